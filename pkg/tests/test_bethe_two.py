import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inozemtsev import bethe_two as bt
from inozemtsev.bethe_two import Kind
from inozemtsev.chain_model import ChainParams, ed_spectrum
from inozemtsev.magnon import dispersion, heisenberg_rapidity
from oracles import oracle_m2_spectrum

PI = math.pi
TWO_PI = 2 * PI
P51 = ChainParams(5, 1.0)

# sum and max of the L=10, kappa=0.8 two-magnon spectrum from the Pauli-matrix oracle
ORACLE_L10 = (187.63948652906996, 8.014763814657307)


class TestConstraint:
    @pytest.mark.parametrize("I_tot", [1, 3, 5])
    def test_trivial_real(self, I_tot):
        p = ChainParams(7, 0.8)
        assert abs(bt.constraint_f(PI * I_tot / 7, I_tot, p)) < 1e-11

    @pytest.mark.parametrize("I_tot", [0, 2, 3])
    def test_trivial_imag(self, I_tot):
        p = ChainParams(7, 0.8)
        assert abs(bt.constraint_f(PI * I_tot / 7 + 0.8j, I_tot, p)) < 1e-11

    @settings(max_examples=30, deadline=None)
    @given(x=st.floats(0.1, 6.0), y=st.floats(-0.7, 0.7), J=st.integers(0, 6))
    def test_elliptic(self, x, y, J):
        p = ChainParams(7, 0.8)
        p1 = complex(x, y)
        f = bt.constraint_f(p1, J, p)
        assert abs(bt.constraint_f(p1 + 1.6j, J, p) - f) < 1e-10 * max(1, abs(f))
        assert abs(bt.constraint_f(p1 + TWO_PI, J, p) - f) < 1e-10 * max(1, abs(f))


class TestTrivial:
    def test_l11(self):
        d = [r[2] for r in bt.trivial_roots(4, ChainParams(11, 1.0))]
        assert d == pytest.approx([PI, 1j, PI + 1j])

    def test_l6_includes_real(self):
        roots = bt.trivial_roots(3, ChainParams(6, 1.0))
        assert any(r[2] == 0 and r[0] == pytest.approx(PI / 2) and r[1] == pytest.approx(PI / 2) for r in roots)

    @pytest.mark.parametrize("L,k", [(5, 1.0), (6, 0.5), (8, 2.0)])
    def test_constraint_and_vanishing(self, L, k):
        p = ChainParams(L, k)
        for J in range(L):
            for p1, _, _ in bt.trivial_roots(J, p):
                assert abs(bt.constraint_f(p1, J, p)) < 1e-10
            for r in bt.trivial_root_objects(J, p):
                try:
                    v = bt.wave_vector(r, p)
                except bt.DegeneratePhaseError:
                    continue
                assert np.max(np.abs(v)) < 1e-10


class TestCurve:
    def test_counts_l6(self):
        p = ChainParams(6, 1.0)
        for J in range(6):
            assert len(bt.curve_roots(J, p)) == (2 if J % 2 == 0 else 1)
            assert len(bt.curve_constraint_poly(J, p)) - 1 <= 4

    def test_l4(self):
        assert len(bt.curve_roots(0, ChainParams(4, 1.0))) == 1

    def test_total_l9(self):
        assert sum(len(bt.curve_roots(J, ChainParams(9, 1.0))) for J in range(9)) == 27

    @pytest.mark.parametrize("L,k", [(6, 1.0), (9, 0.5)])
    def test_points_on_curve(self, L, k):
        p = ChainParams(L, k)
        C = bt.lattices(p).hat.constants
        for J in range(L):
            for pt in bt.curve_data(J, p).points.values():
                assert pt.residual(C.g2, C.g3) < 1e-9

    @pytest.mark.parametrize("J", [0, 1, 2, 3])
    def test_reflection(self, J):
        # the two wp preimages u and -u give the same energy
        p = ChainParams(7, 0.9)
        lat = bt.lattices(p).hat
        for x in bt.curve_roots(J, p):
            u = bt.invert_wp(x, lat)
            e1 = bt.curve_energy(x, J, p, u)
            e2 = bt.curve_energy(x, J, p, -u)
            assert abs(e1 - e2) < 1e-9 * max(1, abs(e1))


class TestSolve:
    def test_l5_scattering(self):
        r = bt.solve_sector(1, 3, P51)
        assert r.kind is Kind.SCATTERING
        assert r.p1.real == pytest.approx(1.57985, abs=1e-5)
        assert r.p2.real == pytest.approx(3.44670, abs=1e-5)
        assert r.p_tot == pytest.approx(8 * PI / 5)

    def test_l5_bound(self):
        r = bt.solve_sector(1, 1, P51)
        assert r.kind is Kind.BOUND
        assert r.p1 == pytest.approx(0.25028 + 1j, abs=1e-5)
        assert r.p2 == pytest.approx(2.26299 - 1j, abs=1e-5)

    def test_exceptional(self):
        r = bt.solve_sector(1, 2, ChainParams(6, 1.0))
        assert r.kind is Kind.EXCEPTIONAL
        assert r.p1 == pytest.approx(1j, abs=1e-14)
        assert r.p2 == pytest.approx(PI - 1j, abs=1e-14)

    @pytest.mark.parametrize("L,k", [(6, 1.0), (7, 0.4), (8, 3.0)])
    def test_parity(self, L, k):
        p = ChainParams(L, k)
        for (I1, I2) in bt.scattering_labels(L):
            a = bt.solve_sector(I1, I2, p)
            b = bt.solve_sector(L - I2, L - I1, p)
            assert b.p1.real == pytest.approx(TWO_PI - a.p2.real, abs=1e-9)
            assert b.p2.real == pytest.approx(TWO_PI - a.p1.real, abs=1e-9)
            assert bt.energy(b, p) == pytest.approx(bt.energy(a, p), rel=1e-9)

    def test_selfconjugate_heisenberg(self):
        r = bt.solve_sector(2, 7, ChainParams(9, 50.0))
        assert abs(r.phi - PI / 2) < 1e-3

    @pytest.mark.parametrize("L,k", [(5, 1.0), (8, 0.3), (9, 4.0)])
    def test_bae_and_residual(self, L, k):
        p = ChainParams(L, k)
        for r in bt.nontrivial_roots(p):
            assert r.bae_residual() < 1e-9
            assert bt.constraint_residual(r, p) < 1e-9 * max(1, 1 / k)
            assert r.p_tot == pytest.approx(math.fmod(TWO_PI * (r.I1 + r.I2) / L, TWO_PI))


class TestWaveFunction:
    def test_descendant(self):
        p = P51
        r = bt.descendant_root(2, p)
        q = TWO_PI * 2 / 5
        for n1, n2 in [(1, 2), (2, 4), (3, 5)]:
            ref = np.exp(1j * q * n1) + np.exp(1j * q * n2)
            assert abs(bt.wave_function(r, n1, n2, p) / ref - bt.wave_function(r, 1, 2, p) / (np.exp(1j * q) + np.exp(2j * q))) < 1e-12

    def test_exceptional_zeros(self):
        p = ChainParams(6, 1.0)
        r = bt.solve_sector(1, 2, p)
        for n1 in range(1, 7):
            for n2 in range(n1 + 2, 7, 2):
                assert abs(bt.wave_function(r, n1, n2, p)) < 1e-12

    @pytest.mark.parametrize("I", [(1, 3), (1, 1), (2, 4)])
    def test_periodic(self, I):
        p = P51
        r = bt.solve_sector(*I, p)
        for n1, n2 in [(1, 3), (2, 4), (1, 5)]:
            a = bt.wave_function(r, n1, n2, p)
            assert abs(bt.wave_function(r, n2, n1 + 5, p) - a) < 1e-9 * max(1, abs(a))

    def test_antisymmetry(self):
        p = P51
        r = bt.solve_sector(1, 3, p)
        swapped = replace(r, I1=r.I2, I2=r.I1, p1=r.p2, p2=r.p1, phi=-r.phi)
        for n1, n2 in [(1, 3), (2, 4), (1, 5)]:
            assert abs(bt.wave_function(swapped, n1, n2, p) + bt.wave_function(r, n1, n2, p)) < 1e-10

    def test_imaginary_period(self):
        # p1 -> p1 + 2 i kappa at fixed I_tot leaves the state unchanged
        p = ChainParams(6, 0.7)
        r = bt.solve_sector(1, 4, p)
        s = 2j * p.kappa
        moved = replace(r, p1=r.p1 + s, p2=r.p2 - s, phi=r.phi + 6 * s)
        v, w = bt.wave_vector(r, p), bt.wave_vector(moved, p)
        assert np.max(np.abs(v - w)) < 1e-9 * np.max(np.abs(v))
        assert bt.energy(moved, p) == pytest.approx(bt.energy(r, p), rel=1e-9)


class TestEnergy:
    def test_golden_l4(self):
        assert bt.energy(bt.solve_sector(1, 3, ChainParams(4, 1.0)), ChainParams(4, 1.0)) == pytest.approx(6.08410, abs=1e-5)

    def test_golden_l6(self):
        p = ChainParams(6, 1.0)
        assert bt.energy(bt.solve_sector(1, 1, p), p) == pytest.approx(2.07650, abs=1e-5)

    def test_curve_agrees(self):
        p = ChainParams(7, 0.7)
        for r in bt.nontrivial_roots(p):
            e = bt.energy(r, p)
            assert abs(bt.energy_on_curve(r, p) - e) < 1e-8 * max(1, abs(e))

    def test_descendant(self):
        r = bt.descendant_root(3, P51)
        assert bt.energy(r, P51) == pytest.approx(dispersion(TWO_PI * 3 / 5, P51), rel=1e-14)

    def test_off_shell(self):
        r = bt.solve_sector(1, 3, P51)
        with pytest.raises(bt.ContractError):
            bt.energy(replace(r, p1=r.p1 + 0.1, phi=r.phi + 0.5), P51)


class TestSMatrix:
    def test_descendant(self):
        assert bt.s_matrix(bt.descendant_root(1, P51)) == 1

    def test_coinciding(self):
        r = next(r for r in bt.trivial_root_objects(3, ChainParams(6, 1.0)) if r.p1 == r.p2)
        assert bt.s_matrix(r) == pytest.approx(-1, abs=1e-12)

    def test_unitary(self):
        for r in bt.nontrivial_roots(ChainParams(7, 1.0)):
            if r.kind is Kind.SCATTERING:
                assert abs(abs(bt.s_matrix(r)) - 1) < 1e-12

    def test_heisenberg(self):
        p = ChainParams(9, 50.0)
        for r in bt.nontrivial_roots(p):
            if r.kind is Kind.SCATTERING:
                l1, l2 = heisenberg_rapidity(r.p1.real), heisenberg_rapidity(r.p2.real)
                assert abs(bt.s_matrix(r) - (l1 - l2 - 1j) / (l1 - l2 + 1j)) < 1e-4


class TestHighestWeight:
    def test_on_shell(self):
        p = ChainParams(6, 1.0)
        hw = bt.highest_weight_residual(bt.solve_sector(2, 4, p), p)
        assert hw.residual < 1e-8 and not hw.descendant

    def test_descendant_flagged(self):
        hw = bt.highest_weight_residual(bt.descendant_root(2, P51), P51)
        assert hw.descendant
        assert hw.residual > 0.5

    def test_sum_identity(self):
        # on-shell momentum p = (2 pi I + 2 i kappa t)/L
        p = ChainParams(7, 1.0)
        t = 0.4
        assert bt.hw_sum_residual((TWO_PI * 3 + 2j * t) / 7, t, p) < 1e-10


class TestFullSpectrum:
    def test_l4(self):
        recs = bt.full_spectrum(ChainParams(4, 1.0))
        assert len(recs) == 6
        assert sorted(round(r.energy, 5) for r in recs) == [0.0, 2.44814, 2.44814, 2.86825, 4.05607, 6.08410]

    def test_l6(self):
        recs = bt.full_spectrum(ChainParams(6, 1.0))
        assert len(recs) == 15
        kinds = [Kind(r.kind) for r in recs]
        assert kinds.count(Kind.DESCENDANT) == 6
        assert kinds.count(Kind.SCATTERING) == 6
        assert kinds.count(Kind.BOUND) + kinds.count(Kind.EXCEPTIONAL) == 3

    def test_l10_oracle(self):
        p = ChainParams(10, 0.8)
        E = np.sort([r.energy for r in bt.full_spectrum(p)])
        ref = oracle_m2_spectrum(10, 0.8)
        assert np.max(np.abs(E - ref) / np.maximum(1, ref)) < 1e-8
        assert E.sum() == pytest.approx(ORACLE_L10[0], rel=1e-10)
        assert E.max() == pytest.approx(ORACLE_L10[1], rel=1e-10)

    @pytest.mark.parametrize("L", [4, 7, 10, 13])
    @pytest.mark.parametrize("k", [0.5, 2.0])
    def test_counting(self, L, k):
        p = ChainParams(L, k)
        roots = bt.nontrivial_roots(p)
        assert len(roots) == L * (L - 3) // 2
        for J in range(L):
            n = sum(1 for r in roots if (r.I1 + r.I2) % L == J)
            assert n == ((L - 2) // 2 if J % 2 == 0 else (L - 3) // 2)
        assert len({(r.I1, r.I2) for r in roots}) == len(roots)

    def test_matches_ed(self):
        p = ChainParams(9, 1.7)
        E = np.sort([r.energy for r in bt.full_spectrum(p)])
        assert np.allclose(E, ed_spectrum(p, 2), rtol=1e-9, atol=1e-9)
