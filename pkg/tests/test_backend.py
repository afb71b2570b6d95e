import os
import subprocess
import sys

import numpy as np
import pytest

from inozemtsev import _kernel

needs_ext = pytest.mark.skipif(_kernel.compiled_theta_series is None, reason="extension not built")


@needs_ext
@pytest.mark.parametrize("tau", [0.8j, 0.3 + 1.1j, 2.5j])
def test_backends_agree(tau):
    rng = np.random.default_rng(1)
    v = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-1, 1, 200)
    a = _kernel.python_theta_series(v, tau)
    b = _kernel.compiled_theta_series(v, tau)
    for x, y in zip(a[:5], b[:5]):
        assert np.allclose(x, y, rtol=1e-14, atol=1e-14)


@needs_ext
def test_scalar_input():
    a = _kernel.python_theta_series(0.4 + 0.1j, 1j)
    b = _kernel.compiled_theta_series(0.4 + 0.1j, 1j)
    assert np.allclose(a[0], b[0], rtol=1e-14)


def test_pure_python_switch():
    code = "from inozemtsev import _kernel, chain_model as c; print(_kernel.BACKEND, c.pair_potential(2, c.ChainParams(7, 0.9)))"
    env = {**os.environ, "INO_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    assert out[0] == "python"
    from inozemtsev.chain_model import ChainParams, pair_potential

    assert float(out[1]) == pytest.approx(pair_potential(2, ChainParams(7, 0.9)), rel=1e-13)
