"""Pure numpy evaluation of the scaled odd theta series.

For v with |Im v| = s the series

    theta(v|tau) = 2 sum_n (-1)^n q^{(n+1/2)^2} sin((2n+1) v)

is returned as ``2 exp(i pi tau / 4 + s) * S0`` with S0 bounded, so that
arguments far up the imaginary direction do not overflow.  S1..S3 are the
same scaling applied to the first three v-derivatives.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

MAX_TERMS = 200
REL_STOP = 1e-16


def _scaled_sin_cos(w: NDArray[np.complex128]) -> tuple[NDArray, NDArray]:
    # sin(w) e^{-|Im w|}, cos(w) e^{-|Im w|}
    a = np.abs(w.imag)
    small = a < 20.0
    ws = np.where(small, w, 0.0)
    sin_s = np.sin(ws) * np.exp(-a * small)
    cos_s = np.cos(ws) * np.exp(-a * small)
    # large |Im w|: one exponential dominates; no cancellation to worry about
    sg = np.where(w.imag >= 0.0, 1.0, -1.0)
    big = np.exp(-1j * sg * w.real) * 0.5
    sin_b = big * (1j * sg)
    cos_b = big
    return np.where(small, sin_s, sin_b), np.where(small, cos_s, cos_b)


def theta_series(v, tau: complex):
    """Return (S0, S1, S2, S3, s, nterms) for the scaled series at v."""
    v = np.asarray(v, dtype=np.complex128)
    s = np.abs(v.imag)
    S = [np.zeros_like(v) for _ in range(4)]
    active = np.ones(v.shape, dtype=bool)
    nterms = 0
    for n in range(MAX_TERMS):
        k = 2 * n + 1
        amp = np.exp(1j * np.pi * tau * (n * n + n) + (k - 1) * s)
        if n % 2:
            amp = -amp
        sn, cn = _scaled_sin_cos(k * v)
        terms = (amp * sn, amp * k * cn, -amp * k * k * sn, -amp * k**3 * cn)
        for j in range(4):
            S[j] += np.where(active, terms[j], 0.0)
        nterms = n + 1
        mag = np.maximum.reduce([np.abs(t) for t in terms])
        ref = np.maximum.reduce([np.abs(x) for x in S])
        active &= ~(mag <= REL_STOP * ref)
        if not active.any():
            break
    else:
        if active.any():
            raise OverflowError("theta series did not converge within 200 terms")
    return S[0], S[1], S[2], S[3], s, nterms
