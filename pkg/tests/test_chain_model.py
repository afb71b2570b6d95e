import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inozemtsev import bethe_two as bt
from inozemtsev.chain_model import (
    ChainParams,
    InputError,
    Normalization,
    SectorBasis,
    SizeError,
    Variant,
    apply_hamiltonian,
    apply_lowering,
    apply_raising,
    build_hamiltonian,
    diagonalize,
    distance,
    ed_spectrum,
    pair_potential,
)
from inozemtsev.elliptic_kernel import PoleError
from inozemtsev.magnon import dispersion, wp_sum_closed, wp_sum_direct
from oracles import oracle_m2_spectrum, oracle_potential, sector_spectrum

TWO_PI = 2 * math.pi


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChainParams(1, 1.0)
        with pytest.raises(ValueError):
            ChainParams(5, 0.0)
        with pytest.raises(ValueError):
            ChainParams(5.5, 1.0)

    def test_n_h(self):
        assert ChainParams(5, 2.0).n_h == pytest.approx(math.sinh(2.0) ** 2 / 4)
        assert ChainParams(5, 1e-6).n_h == pytest.approx(1.0)

    def test_basis(self):
        b = SectorBasis(6, 2)
        assert len(b) == len(b.states) == 15
        assert b.states == sorted(b.states)
        assert all(s[0] < s[1] for s in b.states)


@pytest.mark.parametrize("z,L,d", [(1, 6, 1), (5, 6, 1), (-5, 6, 1), (3, 6, 3), (7, 6, 1), (4, 9, 4), (5, 9, 4)])
def test_distance(z, L, d):
    assert distance(z, L) == d


class TestPotential:
    def test_contact(self):
        p = ChainParams(8, 1.0)
        assert pair_potential(1, p, "Contact") == 1
        assert pair_potential(7, p, Variant.CONTACT) == 1
        assert pair_potential(2, p, Variant.CONTACT) == 0

    def test_trig(self):
        assert pair_potential(1, ChainParams(6, 1.0), Variant.TRIG) == pytest.approx(math.pi**2 / 9, rel=1e-14)

    def test_elliptic_to_contact(self):
        assert abs(pair_potential(1, ChainParams(12, 4.0)) - 1) < 1e-3

    def test_pole(self):
        with pytest.raises(PoleError):
            pair_potential(6, ChainParams(6, 1.0))

    @pytest.mark.parametrize("L,k", [(5, 0.1), (6, 1.0), (9, 0.3), (8, 3.0), (12, 10.0)])
    def test_against_oracle(self, L, k):
        ref = oracle_potential(L, k)
        p = ChainParams(L, k)
        for z in range(1, L):
            assert pair_potential(z, p) == pytest.approx(ref[z], rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(L=st.integers(3, 14), k=st.floats(0.05, 8.0), z=st.integers(1, 13))
    def test_positive_symmetric(self, L, k, z):
        z = 1 + (z - 1) % (L - 1)
        p = ChainParams(L, k)
        v = pair_potential(z, p)
        assert v > 0
        assert v == pytest.approx(pair_potential(L - z, p), rel=1e-13)

    def test_unshifted(self):
        p = ChainParams(6, 1.0, Normalization.UNSHIFTED)
        s = ChainParams(6, 1.0, Normalization.SHIFTED)
        assert pair_potential(2, s) - pair_potential(2, p) == pytest.approx(s.shift, rel=1e-12)


class TestHamiltonian:
    def test_vacuum(self):
        H = build_hamiltonian(ChainParams(5, 1.0), 0)
        assert H.shape == (1, 1) and H[0, 0] == 0

    @pytest.mark.parametrize("L,k", [(3, 0.5), (6, 1.0), (9, 2.0), (12, 0.5)])
    def test_one_magnon(self, L, k):
        p = ChainParams(L, k)
        ref = np.sort(dispersion(TWO_PI * np.arange(L) / L, p))
        got = ed_spectrum(p, 1)
        assert np.max(np.abs(got - ref) / np.maximum(1, ref)) < 1e-9

    def test_contact_l4(self):
        # brute-force Pauli oracle: {0, 2, 2, 2, 4, 6}
        ev = ed_spectrum(ChainParams(4, 1.0), 2, Variant.CONTACT)
        ref = sector_spectrum(4, lambda d: 1.0 if d in (1, 3) else 0.0, 2)
        assert np.allclose(ev, ref, atol=1e-12)
        assert np.allclose(ev, [0, 2, 2, 2, 4, 6], atol=1e-12)

    @pytest.mark.parametrize("L,k", [(4, 1.0), (6, 0.3), (7, 3.0), (8, 1.0)])
    def test_m2_against_pauli(self, L, k):
        assert np.max(np.abs(ed_spectrum(ChainParams(L, k), 2) - oracle_m2_spectrum(L, k))) < 1e-10

    def test_symmetric_nonnegative(self):
        H = build_hamiltonian(ChainParams(9, 0.7), 2)
        assert np.array_equal(H, H.T)
        assert np.min(np.linalg.eigvalsh(H)) > -1e-10

    def test_matrix_free(self):
        p = ChainParams(7, 0.9)
        v = np.random.default_rng(0).normal(size=21)
        assert np.allclose(apply_hamiltonian(v, p, 2), build_hamiltonian(p, 2) @ v, atol=1e-12)

    def test_size_guard(self):
        with pytest.raises(SizeError):
            build_hamiltonian(ChainParams(40, 1.0), 5)

    def test_commutes_with_lowering(self):
        # [H, S^-] = 0: the block structure is consistent across sectors
        p = ChainParams(6, 1.3)
        v = np.random.default_rng(3).normal(size=6)
        lhs = build_hamiltonian(p, 2) @ apply_lowering(v, 6, 1)
        rhs = apply_lowering(build_hamiltonian(p, 1) @ v, 6, 1)
        assert np.allclose(lhs, rhs, atol=1e-12)


class TestDiagonalize:
    def test_identity(self):
        assert np.allclose(diagonalize(np.eye(4)).values, 1)

    def test_pauli_x(self):
        assert np.allclose(diagonalize(np.array([[0.0, 1.0], [1.0, 0.0]])).values, [-1, 1])

    def test_reconstruct(self):
        A = np.random.default_rng(7).normal(size=(50, 50))
        A = A + A.T
        es = diagonalize(A)
        assert np.all(np.diff(es.values) >= 0)
        assert np.max(np.abs(es.vectors @ np.diag(es.values) @ es.vectors.T - A)) < 1e-9

    def test_asymmetric(self):
        with pytest.raises(InputError):
            diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestRaising:
    def test_uniform_magnon(self):
        L = 6
        out = apply_raising(np.ones(L), L, 1)
        assert np.allclose(out, [L])

    def test_scattering_state(self):
        p = ChainParams(5, 1.0)
        root = bt.solve_sector(1, 3, p)
        v = bt.wave_vector(root, p)
        assert np.linalg.norm(apply_raising(v, 5, 2)) < 1e-8 * np.linalg.norm(v)

    @pytest.mark.parametrize("I", [1, 2, 3])
    def test_descendant(self, I):
        # S^+ S^- |p> = (L - 2) |p> for p != 0, by direct evaluation
        L = 7
        n = np.arange(1, L + 1)
        mag = np.exp(1j * TWO_PI * I / L * n)
        back = apply_raising(apply_lowering(mag, L, 1), L, 2)
        assert np.max(np.abs(back - (L - 2) * mag)) < 1e-10


@pytest.mark.parametrize("L", range(3, 13))
@pytest.mark.parametrize("k", [0.3, 1.0, 3.0])
def test_dispersion_sums(L, k):
    p = ChainParams(L, k)
    for I in range(L):
        assert abs(wp_sum_direct(I, p) - wp_sum_closed(I, p)) < 1e-10
