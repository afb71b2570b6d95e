"""Heisenberg and Haldane-Shastry endpoints, limit correspondence, critical loci."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from .bethe_two import BetheRoot, Kind, energy, wave_vector
from .chain_model import ChainParams, SectorBasis
from .elliptic_kernel import EllipticError, LatticeSpec, PoleError, rho, rho_prime
from .magnon import rapidity

TWO_PI = 2 * math.pi
POLE_TOL = 1e-14
HS_KAPPA_MAX = 1e-2
HYP_L_MIN = 30
RESOLVE_TOL = 1e-9


class NotCriticalError(ValueError):
    """The critical equation has no root in the scanned bracket."""


class MotifError(ValueError):
    pass


# ---------------------------------------------------------------- Heisenberg


def heisenberg_lambda(p: ArrayLike):
    p = np.asarray(p)
    s = np.sin(p / 2)
    if np.any(np.abs(s) < POLE_TOL):
        raise PoleError("lambda_H: p on a pole of cot(p/2)")
    out = -0.5 * np.cos(p / 2) / s
    return complex(out) if out.ndim == 0 else out


def heisenberg_constraint(p1: complex, p2: complex, phi: complex) -> complex:
    """Residual of 2 lambda_H(phi) = lambda_H(p1) - lambda_H(p2)."""
    return 2 * heisenberg_lambda(phi) - heisenberg_lambda(p1) + heisenberg_lambda(p2)


def heisenberg_s_matrix(lam1: complex, lam2: complex) -> complex:
    """S_H = (l1 - l2 - i)/(l1 - l2 + i); the exact two-string l1 - l2 = -i diverges."""
    d = lam1 - lam2
    if abs(d + 1j) < POLE_TOL:
        raise PoleError("S_H diverges on the exact two-string")
    return (d - 1j) / (d + 1j)


def heisenberg_critical_length(n: int) -> float:
    """Unique root of arctan sqrt(L-1) = (pi/2)(1 - n/L)."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")

    def f(L: float) -> float:
        return math.atan(math.sqrt(L - 1)) - 0.5 * math.pi * (1 - n / L)

    def df(L: float) -> float:
        return 0.5 / (L * math.sqrt(L - 1)) - 0.5 * math.pi * n / (L * L)

    L = brentq(f, 1.0, 4 * (0.5 * math.pi * n) ** 2 + 10, xtol=1e-12)
    for _ in range(3):
        d = df(L)
        if d == 0:
            break
        L -= f(L) / d
    return L


# ---------------------------------------------------------------- critical loci


class Branch(str, Enum):
    REAL = "Real"
    IMAG = "Imag"


@dataclass(frozen=True)
class FixL:
    L: float


@dataclass(frozen=True)
class FixKappa:
    kappa: float


@dataclass(frozen=True)
class CriticalQuery:
    n: int
    branch: Branch
    fixed: FixL | FixKappa

    def __post_init__(self) -> None:
        object.__setattr__(self, "branch", Branch(self.branch))
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.branch is Branch.REAL and self.n % 2 == 0:
            raise ValueError("the Real branch needs odd n")


def _critical_parts(n: int, branch: Branch | str, L: float, kappa: float) -> tuple[complex, complex]:
    bar = LatticeSpec.mom_bar_check(kappa)
    chk = LatticeSpec.mom_check(L, kappa)
    if Branch(branch) is Branch.REAL:
        return rho_prime(1, math.pi * n / L, bar), L * rho_prime(1, math.pi, chk)
    lhs = rho_prime(1, math.pi * n / L + 1j * kappa, bar)
    return lhs, L * rho_prime(1, math.pi * n + 1j * L * kappa, chk)


def critical_function(n: int, branch: Branch | str, L: float, kappa: float) -> float:
    """Left minus right side of the critical equation (real on both branches)."""
    lhs, rhs = _critical_parts(n, branch, L, kappa)
    return float((lhs - rhs).real)


def _resolved(n: int, branch: Branch | str, L: float, kappa: float) -> float:
    # NaN where the difference is below roundoff of the two sides
    lhs, rhs = _critical_parts(n, branch, L, kappa)
    d = (lhs - rhs).real
    scale = abs(lhs) + abs(rhs)
    if Branch(branch) is Branch.IMAG:
        # on the half-period line the leading series terms are O(e^-kappa) and cancel
        scale += math.exp(-kappa) + L * math.exp(-L * kappa)
    return float(d) if abs(d) > RESOLVE_TOL * scale else math.nan


def _largest_root(f, grid: NDArray[np.float64], fine=None) -> float:
    """Largest sign change of f on the grid, refined with ``fine``.

    NaN samples (unresolved) are bridged; samples raising an elliptic error
    (poles) break the bracket.
    """
    pts: list[tuple[float, float | None]] = []
    for x in grid:
        try:
            pts.append((float(x), f(x)))
        except EllipticError:
            pts.append((float(x), None))
    fine = fine or f
    right = None
    for x, v in reversed(pts):
        if v is None:
            right = None
            continue
        if math.isnan(v):
            continue
        if right is not None and v * right[1] < 0:
            return brentq(fine, x, right[0], xtol=1e-12, rtol=1e-14)
        right = (x, v)
    raise NotCriticalError("no sign change of the critical equation in the bracket")


def critical_locus(query: CriticalQuery, kappa_grid: ArrayLike | None = None) -> float:
    """Largest root of the critical equation in the free parameter.

    FixKappa scans L over (n, 4 (pi n/2)^2] in steps of 1/2; smaller roots
    are unphysical. FixL scans kappa on a log grid (default 1e-2 .. 50).
    """
    n, br = query.n, query.branch
    if isinstance(query.fixed, FixKappa):
        k = query.fixed.kappa
        grid = np.arange(n + 0.5, 4 * (0.5 * math.pi * n) ** 2 + 0.5, 0.5)
        return _largest_root(
            lambda L: _resolved(n, br, L, k), grid, lambda L: critical_function(n, br, L, k)
        )
    L = query.fixed.L
    if not n <= L / 2:
        raise ValueError("need n <= L/2 (larger n are parity images)")
    if kappa_grid is None:
        kappa_grid = np.geomspace(1e-2, 50, 120)
    return _largest_root(
        lambda k: _resolved(n, br, L, k),
        np.asarray(kappa_grid, float),
        lambda k: critical_function(n, br, L, k),
    )


# ---------------------------------------------------------------- Haldane-Shastry


@dataclass(frozen=True)
class Motif:
    mu: tuple[int, ...]
    L: int | None = None

    def __post_init__(self) -> None:
        mu = tuple(int(m) for m in self.mu)
        object.__setattr__(self, "mu", mu)
        if any(b < a + 2 for a, b in zip(mu, mu[1:])):
            raise MotifError(f"motif {mu} violates the exclusion rule")
        if mu and mu[0] < 1:
            raise MotifError("motif entries must be >= 1")
        if self.L is not None and mu and mu[-1] > self.L - 1:
            raise MotifError("motif entries must be <= L-1")

    @property
    def nu(self) -> tuple[int, int]:
        """Partition of the Jack factor, (mu2 - 2, mu1)."""
        m1, m2 = self.mu
        return (m2 - 2, m1)

    def energy(self, L: int | None = None) -> float:
        L = self.L if L is None else L
        return hs_energy(self.mu, L)


def motifs(L: int, M: int = 2) -> list[Motif]:
    out = []
    if M == 2:
        for m1 in range(1, L):
            for m2 in range(m1 + 2, L):
                out.append(Motif((m1, m2), L))
    else:
        raise ValueError("only M = 2 motifs are enumerated")
    return out


def hs_energy(mu: tuple[int, ...] | Motif, L: int) -> float:
    mu = mu.mu if isinstance(mu, Motif) else mu
    return 2 * math.pi**2 / L**2 * sum(m * (L - m) for m in mu)


def schur(lam: tuple[int, int], z1, z2):
    """s_lam(z1, z2) = sum_k z1^(l1-k) z2^(l2+k)."""
    l1, l2 = lam
    if not l1 >= l2 >= 0:
        raise ValueError("need l1 >= l2 >= 0")
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    out = sum(z1 ** (l1 - k) * z2 ** (l2 + k) for k in range(l1 - l2 + 1))
    return complex(out) if np.ndim(out) == 0 else out


def schur_bialternant(lam: tuple[int, int], z1, z2):
    """Divided-difference form (z1^(l1+1) z2^l2 - z2^(l1+1) z1^l2)/(z1 - z2)."""
    l1, l2 = lam
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    out = (z1 ** (l1 + 1) * z2**l2 - z2 ** (l1 + 1) * z1**l2) / (z1 - z2)
    return complex(out) if np.ndim(out) == 0 else out


def jack(nu: tuple[int, int], z1, z2):
    """Jack P_nu at alpha = 1/2 via P_(v1,v2) = (z1 z2)^v2 P_(v1-v2,0)."""
    v1, v2 = nu
    if not v1 >= v2 >= 0:
        raise ValueError("need v1 >= v2 >= 0")
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return (z1 * z2) ** v2 * jack2(v1 - v2, z1, z2)


def jack2(I: int, z1, z2):
    """P_(I,0) = sum_i (I - 2i + 1)/(I + 1) s_(I-i,i)."""
    if I < 0:
        raise ValueError("I must be >= 0")
    out = sum((I - 2 * i + 1) / (I + 1) * schur((I - i, i), z1, z2) for i in range(I // 2 + 1))
    return complex(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=64)
def _roots_of_unity(L: int) -> NDArray[np.complex128]:
    return np.exp(TWO_PI * 1j * np.arange(L) / L)


def _ev(n1, n2, L: int):
    z = _roots_of_unity(L)
    return z[np.asarray(n1) % L], z[np.asarray(n2) % L]


def hs_wave_function(mu: Motif, n1, n2, L: int):
    """ev[(z1 - z2)^2 P_nu(z1, z2)] with nu = (mu2 - 2, mu1)."""
    if not isinstance(mu, Motif):
        mu = Motif(tuple(mu), L)
    z1, z2 = _ev(n1, n2, L)
    out = (z1 - z2) ** 2 * jack(mu.nu, z1, z2)
    return complex(out) if np.ndim(out) == 0 else out


def hs_wave_function_schur(mu: Motif, n1, n2, L: int):
    """Rewritten form s_(m2,m1) - ((m2-m1+1)/(m2-m1-1)) s_(m2-1,m1+1)."""
    if not isinstance(mu, Motif):
        mu = Motif(tuple(mu), L)
    m1, m2 = mu.mu
    z1, z2 = _ev(n1, n2, L)
    return schur((m2, m1), z1, z2) - (m2 - m1 + 1) / (m2 - m1 - 1) * schur((m2 - 1, m1 + 1), z1, z2)


def hs_affine_descendant(I: int, n1, n2, L: int):
    """2i (2/(L-2)) ev[(I-1) s_(I,0) + (L-1-I) s_(I-1,1)]."""
    if not 2 <= I <= L - 2:
        raise ValueError("need 2 <= I <= L-2")
    z1, z2 = _ev(n1, n2, L)
    return 2j * 2 / (L - 2) * ((I - 1) * schur((I, 0), z1, z2) + (L - 1 - I) * schur((I - 1, 1), z1, z2))


def hs_exceptional(n1, n2, L: int):
    """2i ev[(z1 + z2) s_(L/2-1,0)], the I = L/2 affine descendant."""
    if L % 2:
        raise ValueError("L must be even")
    z1, z2 = _ev(n1, n2, L)
    return 2j * (z1 + z2) * schur((L // 2 - 1, 0), z1, z2)


def hs_state_count(L: int) -> int:
    """Motifs + L descendants + (L-3) affine descendants."""
    return len(motifs(L)) + L + (L - 3)


# ---------------------------------------------------------------- correspondence


@dataclass
class CorrespondenceReport:
    kind: Kind
    momentum_gap: float
    phase_gap: float
    xi_gap: float
    energy: float
    hs_energy: float
    wave_gaps: NDArray[np.float64] = field(repr=False)
    inconclusive: bool = False

    @property
    def energy_gap(self) -> float:
        return abs(self.energy - self.hs_energy) / abs(self.hs_energy)

    @property
    def max_wave_gap(self) -> float:
        return float(np.max(self.wave_gaps)) if self.wave_gaps.size else 0.0


def hs_target(root: BetheRoot, L: int) -> tuple[tuple[float, float], NDArray[np.complex128], float]:
    """Limiting (Lp1/2pi, Lp2/2pi), wave vector and energy of a root at kappa -> 0.

    Parity images of bound roots (labels above L) and the exceptional root
    come out with the opposite overall sign in the Bethe normalisation.
    """
    st = np.array(SectorBasis(L, 2).states)
    n1, n2 = st[:, 0], st[:, 1]
    if root.kind is Kind.SCATTERING:
        m = Motif((root.I1, root.I2), L)
        pref = (root.I2 - root.I1 - 1) * 1j * math.pi / L
        return (root.I1, root.I2), pref * hs_wave_function_schur(m, n1, n2, L), hs_energy(m, L)
    I = root.I_tot % L
    e = hs_energy((I,), L)
    if root.kind is Kind.DESCENDANT:
        return (0, I), np.exp(TWO_PI * 1j * I * n1 / L) + np.exp(TWO_PI * 1j * I * n2 / L), e
    if root.kind is Kind.EXCEPTIONAL:
        return (0, I), math.pi / (2 * L) * hs_exceptional(n1, n2, L), e
    if root.kind is Kind.BOUND:
        if root.I_tot < L:
            return (0, I), -math.pi / (2 * L) * hs_affine_descendant(I, n1, n2, L), e
        return (I, L), math.pi / (2 * L) * hs_affine_descendant(I, n1, n2, L), e
    raise ValueError(f"no HS limit for {root.kind} roots")


def limit_correspondence_check(root: BetheRoot, params: ChainParams) -> CorrespondenceReport:
    L = params.L
    target_p, target_v, e_hs = hs_target(root, L)
    lp = L * np.array([root.p1, root.p2]) / TWO_PI
    mgap = float(np.max(np.abs(lp - np.array(target_p))))
    v = wave_vector(root, params)
    gaps = np.abs(v - target_v) / np.max(np.abs(target_v))
    if root.kind is Kind.SCATTERING:
        phase_gap = abs(root.phi)
        xi = -1j / np.tan(math.pi * root.gamma / L)
        xi_gap = abs(xi - (root.I2 - root.I1))
    else:
        phase_gap = xi_gap = math.nan
    bad = params.kappa > HS_KAPPA_MAX or root.degraded
    return CorrespondenceReport(root.kind, mgap, phase_gap, xi_gap, energy(root, params), e_hs, gaps, bad)


# ---------------------------------------------------------------- hyperbolic regime


def s_hyp(lam1: complex, lam2: complex, n_lambda: float = 1.0) -> complex:
    d = lam1 - lam2
    return (d - 1j * n_lambda) / (d + 1j * n_lambda)


@dataclass(frozen=True)
class HyperbolicReport:
    constraint_gap: float
    s_gap: float
    phase: float


def hyperbolic_asymptotics(root: BetheRoot, params: ChainParams) -> HyperbolicReport:
    """Compare a finite-L root with cot(phi/2) = rho(p1) - rho(p2) and S_hyp."""
    bar = LatticeSpec.mom_bar_check(params.kappa)
    d = complex(rho(1, root.p1, bar) - rho(1, root.p2, bar))
    gap = abs(1 / np.tan(root.phi / 2) - d)
    lam = rapidity(np.array([root.p1, root.p2], dtype=complex), params)
    S = s_hyp(lam[0], lam[1], params.n_lambda)
    phase = float(np.angle(S))
    return HyperbolicReport(float(gap), float(abs(S - np.exp(1j * root.phi))), phase)


def hs_asymptotic_phase_gap(p1: float, p2: float, phase: float) -> float:
    """Distance mod 2 pi between a phase and -pi + pi sgn(p1 - p2)."""
    target = -math.pi + math.pi * np.sign(p1 - p2)
    return abs(math.remainder(phase - target, TWO_PI))
