"""Two-magnon Bethe ansatz: constraint, curve rationalisation, roots and states.

Conventions.  With quasimomenta p_{1,2} = (pi J +- u)/L, J = I_tot mod L, the
constraint 2 rho_1(phi) = rho_1(p1) - rho_1(p2) (first term on (2pi, 2iL kappa),
the others on (2pi, 2i kappa)) becomes a condition on u alone.  On the lattice
(2pi L, 2iL kappa) the addition formula turns it into

    sum_n 1/(x - x_n) = L/(x - x_0),   x = wp(u), x_n = wp(pi(2n - J)),

with the y = 0 (half-period) and x = infinity trivial roots already divided out.
Grouping the x_n that coincide in pairs gives a polynomial with exactly the
nontrivial roots.  Each x root has two preimages +-u, which swap p1 and p2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from .chain_model import ChainParams, SectorBasis, apply_hamiltonian, apply_raising
from .elliptic_kernel import (
    EllipticError,
    LatticeSpec,
    wp_difference,
    wp_prime_product,
    big_f,
    chi,
    rho,
    rho_pack,
    wp,
    wp_pair,
)
from .magnon import dispersion

TWO_PI = 2 * math.pi

SOLVE_TOL = 1e-11
ACCEPT_TOL = 1e-9
DEGRADED_TOL = 1e-6
DUP_TOL = 1e-8

SEEDED_KAPPA_MAX = 0.05
ENERGY_COND_MAX = 1e6  # above this term-to-result ratio the direct energy is replaced
NOISE_FLOOR = 1e-10  # constraint plateaus are flat to this, relative to max(1, 1/kappa)  # below this the edge scan sees plateau noise


class BetheError(RuntimeError):
    """Solver failure."""


class LabelError(BetheError):
    """No admissible root for the requested Bethe integers."""


class ContractError(BetheError):
    """Input root is off-shell."""


class DegeneratePhaseError(BetheError):
    """gamma on the coordinate lattice: the wave function is undefined."""


class Kind(str, Enum):
    DESCENDANT = "Descendant"
    SCATTERING = "Scattering"
    BOUND = "Bound"
    EXCEPTIONAL = "Exceptional"
    TRIVIAL = "Trivial"
    MAGNON = "Magnon"  # M = 1 rows of the CLI
    VACUUM = "Vacuum"  # M = 0


KIND_ORDER = {
    Kind.VACUUM: -2,
    Kind.MAGNON: -1,
    Kind.DESCENDANT: 0,
    Kind.SCATTERING: 1,
    Kind.BOUND: 2,
    Kind.EXCEPTIONAL: 3,
    Kind.TRIVIAL: 4,
}


@dataclass(frozen=True)
class BetheRoot:
    L: int
    kappa: float
    I1: int
    I2: int
    phi: complex
    p1: complex
    p2: complex
    kind: Kind
    residual: float = 0.0
    degraded: bool = False

    @property
    def gamma(self) -> complex:
        return -1j * self.phi / (2 * self.kappa)

    @property
    def I_tot(self) -> int:
        return self.I1 + self.I2

    @property
    def p_tot(self) -> float:
        return math.fmod(TWO_PI * self.I_tot / self.L, TWO_PI)

    def bae_residual(self) -> float:
        r1 = abs(self.L * self.p1 - TWO_PI * self.I1 - self.phi)
        r2 = abs(self.L * self.p2 - TWO_PI * self.I2 + self.phi)
        return max(r1, r2)


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    y: complex

    def residual(self, g2: complex, g3: complex) -> float:
        return abs(self.y**2 - (4 * self.x**3 - g2 * self.x - g3)) / max(1.0, abs(self.x) ** 3)


@dataclass
class SpectrumRecord:
    L: int
    kappa: float
    I1: int
    I2: int
    p1: complex
    p2: complex
    p_tot: float
    energy: float
    kind: Kind
    residuals: dict[str, float] = field(default_factory=dict)

    def sort_key(self) -> tuple:
        return (KIND_ORDER[Kind(self.kind)], (self.I1 + self.I2) % self.L, self.I1, self.I2)


# ---------------------------------------------------------------- lattices


@dataclass(frozen=True)
class _Lattices:
    L: int
    kappa: float

    @cached_property
    def check(self) -> LatticeSpec:
        return LatticeSpec.mom_check(self.L, self.kappa)

    @cached_property
    def bar(self) -> LatticeSpec:
        return LatticeSpec.mom_bar_check(self.kappa)

    @cached_property
    def hat(self) -> LatticeSpec:
        return LatticeSpec.mom_hat_check(self.L, self.kappa)

    @cached_property
    def coord(self) -> LatticeSpec:
        return LatticeSpec.coord(self.L, self.kappa)

    @cached_property
    def coord_bar(self) -> LatticeSpec:
        return LatticeSpec.coord_bar(self.kappa)


def lattices(params: ChainParams) -> _Lattices:
    return _Lattices(params.L, params.kappa)


# ---------------------------------------------------------------- constraint


def constraint_f(p1: complex, I_tot: int, params: ChainParams) -> complex:
    """f(p1) = 2 rho_1(L p1) - rho_1(p1) + rho_1(2 pi I_tot/L - p1); the last two barred."""
    lat = lattices(params)
    L = params.L
    p2 = TWO_PI * I_tot / L - p1
    return 2 * rho(1, L * p1, lat.check) - rho(1, p1, lat.bar) + rho(1, p2, lat.bar)


def constraint_residual(root: BetheRoot, params: ChainParams) -> float:
    lat = lattices(params)
    return abs(2 * rho(1, root.phi, lat.check) - rho(1, root.p1, lat.bar) + rho(1, root.p2, lat.bar))


def _g_u(u: complex, J: int, lat: _Lattices) -> tuple[complex, complex]:
    """Constraint and its u-derivative at p_{1,2} = (pi J +- u)/L."""
    L = lat.L
    r, dr, _ = rho_pack(1, u + math.pi * J, lat.check)
    p = np.array([(math.pi * J + u) / L, (math.pi * J - u) / L])
    rb, drb, _ = rho_pack(1, p, lat.bar)
    g = 2 * r - rb[0] + rb[1]
    dg = 2 * dr - (drb[0] + drb[1]) / L
    return complex(g), complex(dg)


def _g_vec(u: np.ndarray, J: int, lat: _Lattices) -> np.ndarray:
    L = lat.L
    pj = math.pi * J
    return 2 * rho(1, u + pj, lat.check) - rho(1, (pj + u) / L, lat.bar) + rho(1, (pj - u) / L, lat.bar)


def _newton_u(u: complex, J: int, lat: _Lattices, tol: float = SOLVE_TOL, maxit: int = 60) -> tuple[complex, float]:
    res = math.inf
    for _ in range(maxit):
        g, dg = _g_u(u, J, lat)
        res = abs(g)
        if res < tol or dg == 0:
            break
        step = g / dg
        # damp wild steps
        lim = 0.25 * lat.L
        if abs(step) > lim:
            step *= lim / abs(step)
        u = u - step
    g, _ = _g_u(u, J, lat)
    return u, abs(g)


# ---------------------------------------------------------------- trivial roots


def trivial_roots(I_tot: int, params: ChainParams) -> list[tuple[complex, complex, complex]]:
    L, k = params.L, params.kappa
    c = math.pi * I_tot / L
    deltas: list[complex] = []
    if I_tot % 2 == 1:
        deltas.append(0.0)
    if (L - I_tot) % 2 == 1:
        deltas.append(math.pi)
    deltas += [1j * k, math.pi + 1j * k]
    return [(c + d, c - d, d) for d in deltas]


def trivial_root_objects(I_tot: int, params: ChainParams) -> list[BetheRoot]:
    out = []
    L = params.L
    for p1, p2, _ in trivial_roots(I_tot, params):
        I1 = 0
        phi = L * p1
        out.append(BetheRoot(L, params.kappa, I1, I_tot, phi, p1, p2, Kind.TRIVIAL))
    return out


# ---------------------------------------------------------------- curve


@dataclass
class CurveData:
    J: int
    x0: complex | None  # None when J == 0 (x_0 at infinity)
    X: NDArray[np.complex128]  # distinct finite abscissae
    m: NDArray[np.float64]  # their multiplicities
    R: float
    points: dict[int, CurvePoint]  # x_n, y_n for every n with a_n off the lattice


def curve_data(J: int, params: ChainParams) -> CurveData:
    L = params.L
    lat = lattices(params)
    J %= L
    pts: dict[int, CurvePoint] = {}
    for n in range(L):
        a = math.pi * (2 * n - J)
        if (2 * n - J) % (2 * L) == 0:
            continue
        x, y = wp_pair(a, lat.hat)
        pts[n] = CurvePoint(complex(x), complex(y))
    skip = {0, J} if J != 0 else set()
    seen: set[int] = set()
    X, m = [], []
    for n in sorted(pts):
        if n in skip or n in seen:
            continue
        partner = (J - n) % L
        seen.add(n)
        if partner != n and partner in pts and partner not in skip:
            seen.add(partner)
            X.append(pts[n].x)
            m.append(2.0)
        else:
            X.append(pts[n].x)
            m.append(1.0)
    x0 = pts[0].x if J != 0 else None
    R = float(L - 2) if J != 0 else 0.0
    return CurveData(J, x0, np.array(X, dtype=complex), np.array(m), R, pts)


def curve_constraint_poly(I_tot: int, params: ChainParams) -> NDArray[np.complex128]:
    """Coefficients (highest degree first) of the curve polynomial in x.

    Numerator of sum_k m_k/(x - X_k) - R/(x - x_0) with all trivial factors
    removed; degree equals the number of nontrivial roots for this I_tot.
    """
    cd = curve_data(I_tot, params)
    return _poly_from_curve(cd)[0]


def _poly_from_curve(cd: CurveData):
    X, m = cd.X, cd.m
    # centre and scale for conditioning
    allx = X if cd.x0 is None else np.append(X, cd.x0)
    ctr = np.mean(allx)
    scl = max(np.max(np.abs(allx - ctr)), 1e-300)
    Xs = (X - ctr) / scl
    poly = np.zeros(1, dtype=complex)
    for k in range(len(Xs)):
        others = np.poly(np.delete(Xs, k)) if len(Xs) > 1 else np.ones(1, dtype=complex)
        term = m[k] * others
        if cd.x0 is not None:
            term = np.polymul(term, [1.0, -(cd.x0 - ctr) / scl])
        poly = np.polyadd(poly, term)
    if cd.x0 is not None and cd.R:
        poly = np.polysub(poly, cd.R * np.poly(Xs))
    # strip leading zeros produced by exact cancellation of the top coefficient
    tol = 1e-9 * np.max(np.abs(poly))
    while len(poly) > 1 and abs(poly[0]) < tol:
        poly = poly[1:]
    return poly, ctr, scl


def _secular(x: complex, cd: CurveData) -> tuple[complex, complex]:
    d = x - cd.X
    g = np.sum(cd.m / d)
    dg = -np.sum(cd.m / d**2)
    if cd.x0 is not None:
        g -= cd.R / (x - cd.x0)
        dg += cd.R / (x - cd.x0) ** 2
    return complex(g), complex(dg)


def curve_roots(I_tot: int, params: ChainParams) -> list[complex]:
    """Admissible x roots of the curve polynomial, polished and deduplicated."""
    cd = curve_data(I_tot, params)
    poly, ctr, scl = _poly_from_curve(cd)
    if len(poly) <= 1:
        return []
    roots = np.roots(poly) * scl + ctr
    out: list[complex] = []
    excl = list(cd.X) + ([cd.x0] if cd.x0 is not None else [])
    for r in roots:
        x = complex(r)
        for _ in range(30):
            g, dg = _secular(x, cd)
            if dg == 0:
                break
            step = g / dg
            x -= step
            if abs(step) < 1e-15 * max(abs(x), scl):
                break
        if any(abs(x - e) < DUP_TOL * scl for e in excl):
            continue
        if any(abs(x - o) < DUP_TOL * scl for o in out):
            continue
        out.append(x)
    return out


def invert_wp(x: complex, lat: LatticeSpec, grid: int = 12) -> complex:
    """One preimage u of wp(u) = x in the fundamental parallelogram (the other is -u)."""
    o1, o2 = lat.omega1, lat.omega2
    a = (np.arange(grid) + 0.5) / grid - 0.5
    A, B = np.meshgrid(a, a)
    u = (A * o1 + B * o2).ravel()
    scale = max(1.0, abs(x))
    for _ in range(60):
        p, dp = wp_pair(u, lat)
        with np.errstate(all="ignore"):
            step = (p - x) / dp
        step = np.where(np.isfinite(step), step, 0.0)
        lim = 0.1 * min(abs(o1), abs(o2))
        big = np.abs(step) > lim
        step = np.where(big, step * lim / np.maximum(np.abs(step), 1e-300), step)
        u = u - step
        res = np.abs(p - x) / scale
        if np.any(res < 1e-13):
            break
    p = wp(u, lat)
    res = np.abs(p - x) / scale
    i = int(np.nanargmin(res))
    if not res[i] < 1e-8:
        raise BetheError(f"wp inversion failed at x={x} (residual {res[i]:.2e})")
    return complex(u[i])


# ---------------------------------------------------------------- labelling


def _reduce_pair(p1: complex, p2: complex, kappa: float) -> tuple[complex, complex]:
    def red(p):
        re = math.fmod(p.real, TWO_PI)
        if re < 0:
            re += TWO_PI
        im = math.fmod(p.imag, 2 * kappa)
        if im > kappa:
            im -= 2 * kappa
        elif im <= -kappa:
            im += 2 * kappa
        return complex(re, im)

    return red(p1), red(p2)


def bound_label(J: int, L: int) -> tuple[int, int, int]:
    """(I1, I2, n) for the bound state with total label J mod L."""
    J %= L
    if 2 * J <= L:
        return J // 2, (J + 1) // 2, J
    n2 = L - J
    return L - (n2 + 1) // 2, L - n2 // 2, L + J


def _degraded(res: float, kappa: float) -> bool:
    # the constraint scales like 1/kappa for small kappa
    return res > ACCEPT_TOL * max(1.0, 1.0 / kappa)


def _label_root(u: complex, J: int, params: ChainParams, res: float) -> BetheRoot:
    L, k = params.L, params.kappa
    p1, p2 = _reduce_pair((math.pi * J + u) / L, (math.pi * J - u) / L, k)
    real = abs(p1.imag) < 1e-9 and abs(p2.imag) < 1e-9
    if real:
        a, b = sorted([p1.real, p2.real])
        phi = math.fmod(L * a, TWO_PI)
        I1 = round((L * a - phi) / TWO_PI)
        I2 = round((L * b + phi) / TWO_PI)
        if 1 <= I1 and I1 + 2 <= I2 <= L - 1 and (I1 + I2 - J) % L == 0:
            return BetheRoot(L, k, I1, I2, complex(phi), complex(a), complex(b), Kind.SCATTERING, res, _degraded(res, k))
    I1, I2, n = bound_label(J, L)
    c = math.pi * n / L
    s = (math.pi * J + u) / L - c
    # fold s so that p1 = c + s, p2 = c - s with Im s >= 0, Re s <= 0 on the edge
    sr = math.fmod(s.real + math.pi, TWO_PI)
    if sr < 0:
        sr += TWO_PI
    sr -= math.pi
    si = math.fmod(s.imag, 2 * k)
    if si > k:
        si -= 2 * k
    elif si <= -k:
        si += 2 * k
    s = complex(sr, si)
    if s.imag < -1e-12 or (abs(s.imag) <= 1e-12 and s.real > 0):
        s = -s
    if abs(s.imag - k) < 1e-9 * max(1.0, k):
        s = complex(-abs(s.real), k)
    # centre half-integer multiples of pi correctly when n and J differ by L
    p1, p2 = c + s, c - s
    phi = L * p1 - TWO_PI * I1
    return BetheRoot(L, k, I1, I2, phi, p1, p2, Kind.BOUND, res, _degraded(res, k))


def exceptional_root(params: ChainParams) -> BetheRoot:
    L, k = params.L, params.kappa
    if L % 2:
        raise LabelError("exceptional root needs even L")
    I1, I2, _ = bound_label(L // 2, L)
    p1 = 1j * k
    p2 = math.pi - 1j * k
    phi = L * p1 - TWO_PI * I1
    return BetheRoot(L, k, I1, I2, phi, p1, p2, Kind.EXCEPTIONAL)


def descendant_root(I: int, params: ChainParams) -> BetheRoot:
    L = params.L
    I %= L
    return BetheRoot(L, params.kappa, 0, I, 0j, 0j, complex(TWO_PI * I / L), Kind.DESCENDANT)


# ---------------------------------------------------------------- solving


def _sector_roots_curve(J: int, params: ChainParams) -> list[BetheRoot]:
    L = params.L
    lat = lattices(params)
    exc_u = None
    if L % 2 == 0 and J == L // 2:
        exc_u = 1j * L * params.kappa - math.pi * J
    out: list[BetheRoot] = []
    for x in curve_roots(J, params):
        u = invert_wp(x, lat.hat)
        if exc_u is not None:
            ue = complex(wp(exc_u, lat.hat))
            if abs(ue - x) < 1e-6 * max(1.0, abs(x)):
                out.append(exceptional_root(params))
                continue
        u, res = _newton_u(u, J, lat)
        if res > DEGRADED_TOL:
            raise BetheError(f"L={L} J={J}: root at x={x} failed to polish (residual {res:.2e})")
        out.append(_label_root(u, J, params, res))
    return out


def _edge_roots(J: int, params: ChainParams, samples: int = 48) -> list[complex]:
    """Nontrivial roots u on the boundary of [0, pi L] x [0, i L kappa].

    wp(u) on (2 pi L, 2iL kappa) is real exactly on these edges, whose corners
    are the trivial roots, and the constraint is a real function along each
    edge.  Poles are split out and approached geometrically so roots at
    distance O(kappa) from a pole are still bracketed.
    """
    from scipy.optimize import brentq

    L, k = params.L, params.kappa
    lat = lattices(params)
    H = L * k
    edges = [
        (lambda t: complex(t), 0.0, math.pi * L, "re"),
        (lambda t: complex(0.0, t), 0.0, H, "im"),
        (lambda t: complex(math.pi * L, t), 0.0, H, "im"),
        (lambda t: complex(t, H), 0.0, math.pi * L, "re"),
    ]
    found: list[complex] = []
    for idx, (path, t0, t1, part) in enumerate(edges):
        cuts = [t0, t1]
        if idx == 0:
            # phi = u + pi J on the 2 pi grid
            m = math.ceil((t0 + math.pi * J) / TWO_PI)
            while TWO_PI * m - math.pi * J < t1:
                t = TWO_PI * m - math.pi * J
                if t0 < t < t1:
                    cuts.append(t)
                m += 1
        cuts = sorted(set(cuts))

        def G(t: float) -> float:
            try:
                g, _ = _g_u(path(t), J, lat)
            except Exception:
                return math.nan
            return g.real if part == "re" else g.imag

        for a, b in zip(cuts[:-1], cuts[1:]):
            w = b - a
            offs = [w * 10.0**-e for e in range(13, 1, -1)]
            ts = sorted(set([a + o for o in offs] + list(a + w * (np.arange(1, samples) / samples)) + [b - o for o in offs]))
            try:
                gv = _g_vec(np.array([path(t) for t in ts]), J, lat)
                vals = list(gv.real if part == "re" else gv.imag)
            except EllipticError:
                vals = [G(t) for t in ts]
            floor = NOISE_FLOOR * max(1.0, 1.0 / k)
            for (ta, va), (tb, vb) in zip(zip(ts[:-1], vals[:-1]), zip(ts[1:], vals[1:])):
                if not (np.isfinite(va) and np.isfinite(vb)) or va * vb > 0:
                    continue
                if max(abs(va), abs(vb)) < floor:
                    continue  # flat plateau, sign is noise
                if va == 0.0:
                    t = ta
                else:
                    try:
                        t = brentq(G, ta, tb, xtol=1e-15 * max(1.0, abs(tb)), rtol=1e-15, maxiter=200)
                    except ValueError:
                        continue
                u = path(t)
                g, dg = _g_u(u, J, lat)
                if not abs(g) < DEGRADED_TOL * max(1.0, abs(dg) * w):
                    continue  # sign change across a pole
                found.append(u)
    # drop corners (trivial roots) and duplicates
    corners = [0j, complex(math.pi * L), complex(0, H), complex(math.pi * L, H)]
    out: list[complex] = []
    for u in found:
        if any(abs(u - c) < 1e-9 * max(1.0, abs(c)) for c in corners):
            continue
        if any(abs(u - o) < 1e-9 * max(1.0, abs(u)) for o in out):
            continue
        out.append(u)
    return out


def _expected_labels(J: int, L: int) -> set[tuple[int, int]]:
    labs = {(i, j) for i, j in scattering_labels(L) if (i + j) % L == J}
    labs |= {(i, j) for i, j in bound_labels(L) if (i + j) % L == J}
    return labs


def _sector_roots_scan(J: int, params: ChainParams) -> list[BetheRoot]:
    L = params.L
    lat = lattices(params)
    out: list[BetheRoot] = []
    for u in _edge_roots(J, params):
        u, res = _newton_u(u, J, lat)
        root = _label_root(u, J, params, res)
        if root.kind is Kind.BOUND and L % 2 == 0 and J == L // 2:
            ex = exceptional_root(params)
            if abs(root.p1 - ex.p1) < 1e-6 and abs(root.p2 - ex.p2) < 1e-6:
                root = ex
        out.append(root)
    return out


def _hs_seed_u(I1: int, I2: int, J: int, L: int, kappa: float) -> complex:
    """u at first order in kappa from the Haldane-Shastry limit of the label."""
    if I2 - I1 >= 2:
        xi = I2 - I1
        return 2 * math.pi * I1 + 2 * kappa * L / math.pi * complex(np.arctanh(complex(1 / xi))) - math.pi * J
    xi = (L - 2 * J) / (L - 2)
    # p1 -> 0 on the Im p = kappa edge, p2 -> 2 pi J / L
    return 2 * kappa * L / math.pi * complex(np.arctanh(complex(1 / xi + 0j))) - math.pi * J


def _sector_roots_seeded(J: int, params: ChainParams) -> list[BetheRoot]:
    """Per-label Newton from first-order Haldane-Shastry seeds (small kappa)."""
    L, k = params.L, params.kappa
    lat = lattices(params)
    out: list[BetheRoot] = []
    for I1, I2 in sorted(_expected_labels(J, L)):
        if I2 - I1 < 2:
            if L % 2 == 0 and J == L // 2:
                out.append(exceptional_root(params))
                continue
            if 2 * J <= L:
                u0 = _hs_seed_u(I1, I2, J, L, k)
            else:
                # parity image of the partner sector L - J
                Jp = L - J
                u0 = _hs_seed_u(*bound_label(Jp, L)[:2], Jp, L, k) - math.pi * L
        else:
            u0 = _hs_seed_u(I1, I2, J, L, k)
        u, res = _newton_u(u0, J, lat)
        out.append(_label_root(u, J, params, res))
    return out


def sector_roots(J: int, params: ChainParams, method: str = "auto") -> list[BetheRoot]:
    """Nontrivial roots with I1 + I2 = J mod L.

    ``auto`` runs the edge scan and falls back to the curve polynomial if the
    scan misses a label.  The curve alone loses roots at small kappa and large
    L, where the abscissae x_n crowd together.
    """
    J %= params.L
    want = _expected_labels(J, params.L)
    errs = []
    methods = {"curve": _sector_roots_curve, "scan": _sector_roots_scan, "seeded": _sector_roots_seeded}
    if method == "auto":
        if params.kappa < SEEDED_KAPPA_MAX:
            chain = (_sector_roots_seeded, _sector_roots_scan, _sector_roots_curve)
        else:
            chain = (_sector_roots_scan, _sector_roots_curve, _sector_roots_seeded)
    else:
        chain = (methods[method],)
    for fn in chain:
        try:
            roots = fn(J, params)
        except (BetheError, ValueError, ArithmeticError, EllipticError) as exc:
            errs.append(f"{fn.__name__}: {exc}")
            continue
        labs = [(r.I1, r.I2) for r in roots]
        if len(labs) == len(set(labs)) and set(labs) == want and all(r.residual < DEGRADED_TOL for r in roots):
            return roots
        errs.append(f"{fn.__name__}: labels {sorted(labs)} != {sorted(want)}")
    raise BetheError(f"L={params.L}, kappa={params.kappa}, J={J}: " + "; ".join(errs))


def expected_root_count(J: int, L: int) -> int:
    return (L - 2) // 2 if J % 2 == 0 else (L - 3) // 2


def nontrivial_roots(params: ChainParams, method: str = "auto") -> list[BetheRoot]:
    """All L(L-3)/2 scattering, bound and exceptional roots."""
    out: list[BetheRoot] = []
    for J in range(params.L):
        out += sector_roots(J, params, method)
    return out


def solve_sector(I1: int, I2: int, params: ChainParams) -> BetheRoot:
    L = params.L
    if not (0 <= I1 <= I2 <= L - 1):
        raise LabelError("need 0 <= I1 <= I2 <= L-1")
    if I1 == 0:
        if I2 == 0:
            return descendant_root(0, params)
        return descendant_root(I2, params)
    J = (I1 + I2) % L
    roots = sector_roots(J, params)
    for r in roots:
        if (r.I1, r.I2) == (I1, I2):
            return r
    found = ", ".join(f"({r.I1},{r.I2})" for r in roots) or "none"
    raise LabelError(f"no root with I=({I1},{I2}) for L={L}, kappa={params.kappa}; sector has {found}")


# ---------------------------------------------------------------- direct (transcendental) solver


def hs_xi(I1: int, I2: int, L: int) -> float:
    if I2 - I1 >= 2:
        return float(I2 - I1)
    return (L - 2 * (I1 + I2)) / (L - 2) if 2 * (I1 + I2) <= L else (L - 2 * (2 * L - I1 - I2)) / (L - 2)


def _g_gamma(gam: complex, I1: int, I2: int, lat: _Lattices) -> tuple[complex, complex]:
    L, k = lat.L, lat.kappa
    phi = 2j * k * gam
    r, dr, _ = rho_pack(1, phi, lat.check)
    p = np.array([(TWO_PI * I1 + phi) / L, (TWO_PI * I2 - phi) / L])
    rb, drb, _ = rho_pack(1, p, lat.bar)
    g = 2 * r - rb[0] + rb[1]
    dg = (2 * dr - (drb[0] + drb[1]) / L) * 2j * k
    return complex(g), complex(dg)


def solve_label_direct(I1: int, I2: int, params: ChainParams, gamma0: complex | None = None) -> BetheRoot:
    """Newton on the transcendental constraint in gamma, seeded from the HS limit."""
    L, k = params.L, params.kappa
    lat = lattices(params)
    if L % 2 == 0 and I1 + I2 in (L // 2, L // 2 + L) and bound_label(L // 2, L)[:2] == (I1, I2):
        return exceptional_root(params)
    if gamma0 is None:
        xi = hs_xi(I1, I2, L)
        # cot(pi gamma / L) = i xi
        w = np.arctanh(complex(1 / xi))
        gamma0 = -1j * L / math.pi * complex(w)
    gam = complex(gamma0)
    res = math.inf
    for _ in range(100):
        g, dg = _g_gamma(gam, I1, I2, lat)
        res = abs(g)
        if res < SOLVE_TOL * max(1.0, abs(rho(1, (TWO_PI * I1 + 2j * k * gam) / L, lat.bar))):
            break
        step = g / dg
        if abs(step) > 0.2 * L:
            step *= 0.2 * L / abs(step)
        gam -= step
    phi = 2j * k * gam
    p1 = (TWO_PI * I1 + phi) / L
    p2 = (TWO_PI * I2 - phi) / L
    kind = Kind.SCATTERING if I2 >= I1 + 2 else Kind.BOUND
    return BetheRoot(L, k, I1, I2, phi, p1, p2, kind, res, _degraded(res, k))


def scattering_labels(L: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, L) for j in range(i + 2, L)]


def bound_labels(L: int) -> list[tuple[int, int]]:
    out = []
    for n in range(2, L // 2 + 1):
        out.append((n // 2, (n + 1) // 2))
        if 2 * n != L:
            n2 = n
            out.append((L - (n2 + 1) // 2, L - n2 // 2))
    return out


# ---------------------------------------------------------------- states


def wave_function(root: BetheRoot, n1, n2, params: ChainParams):
    """Psi(n1, n2); vectorised over integer arrays n1, n2."""
    n1 = np.asarray(n1)
    n2 = np.asarray(n2)
    lat = lattices(params)
    if root.kind is Kind.DESCENDANT:
        p = root.p2
        return np.exp(1j * p * n1) + np.exp(1j * p * n2)
    if root.kind is Kind.EXCEPTIONAL:
        pref = np.exp(1j * math.pi * n1) - np.exp(1j * math.pi * n2)
        return pref * chi(1, n1 - n2, params.L / 2, lat.coord)
    gam = root.gamma
    o1, o2 = lat.coord.omega1, lat.coord.omega2
    det = o1.real * o2.imag - o1.imag * o2.real
    x = (gam.real * o2.imag - gam.imag * o2.real) / det
    y = (o1.real * gam.imag - o1.imag * gam.real) / det
    if abs(x - round(x)) < 1e-12 and abs(y - round(y)) < 1e-12:
        raise DegeneratePhaseError("gamma lies on the coordinate lattice")
    d = n1 - n2
    a = chi(2, d, gam, lat.coord) * np.exp(1j * (root.p1 * n1 + root.p2 * n2))
    b = chi(2, -d, gam, lat.coord) * np.exp(1j * (root.p1 * n2 + root.p2 * n1))
    return a + b


def wave_vector(root: BetheRoot, params: ChainParams) -> NDArray[np.complex128]:
    """Psi on the ordered coordinate basis n1 < n2."""
    st = np.array(SectorBasis(params.L, 2).states)
    return np.asarray(wave_function(root, st[:, 0], st[:, 1], params), dtype=complex)


def energy(root: BetheRoot, params: ChainParams) -> float:
    """E_n = eps_n(p1) + eps_n(p2) + 4 n_H kappa^2 F_1(phi) on (2pi, 2iL kappa)."""
    if root.kind is Kind.DESCENDANT:
        return float(dispersion(root.p2.real, params, "Normalised"))
    k = params.kappa
    lat = lattices(params)
    if root.kind is not Kind.EXCEPTIONAL:
        res = max(root.residual, constraint_residual(root, params))
        if res > DEGRADED_TOL * max(1.0, 1.0 / k):
            raise ContractError(f"root off-shell (residual {res:.2e})")
    terms = np.array(
        [
            params.n_h * (-2 * k * k) * big_f(1, root.p1, lat.bar),
            params.n_h * (-2 * k * k) * big_f(1, root.p2, lat.bar),
            4 * params.n_h * k * k * big_f(1, root.phi, lat.check),
        ]
    )
    e = complex(np.sum(terms))
    if np.max(np.abs(terms)) > ENERGY_COND_MAX * max(1.0, abs(e)):
        # terms of size ~exp(kappa) cancel (Im p near kappa at large kappa)
        return rayleigh_energy(root, params)
    if abs(e.imag) > 1e-9 * max(1.0, abs(e.real)):
        raise ContractError(f"energy not real: {e}")
    return float(e.real)


def rayleigh_energy(root: BetheRoot, params: ChainParams) -> float:
    """<Psi|H|Psi> / <Psi|Psi> from the Bethe wave function."""
    v = wave_vector(root, params)
    hv = apply_hamiltonian(v, params, 2)
    return float((np.vdot(v, hv) / np.vdot(v, v)).real)


def curve_energy(x: complex, J: int, params: ChainParams, u: complex | None = None) -> complex:
    """Two-magnon energy as a rational function of the curve abscissa x.

    Obtained from E_n with p_{1,2} = (pi J +- u)/L by the addition formula on
    (2pi L, 2iL kappa): the transcendental rho(u) terms cancel on-shell and
    y enters only through y^2 = 4 (x - e1)(x - e2)(x - e3).

    When the curve point u is supplied the differences x - x_n and x - e_i are
    taken from theta products instead of by subtraction; at small kappa all
    abscissae sit in the flat part of wp and plain differences lose most
    digits.
    """
    L, k = params.L, params.kappa
    lat = lattices(params)
    J %= L
    hat = lat.hat
    C = hat.constants
    ch = C.c1
    cc = lat.check.constants.c1
    halves = np.array([hat.omega1 / 2, hat.omega2 / 2, (hat.omega1 + hat.omega2) / 2])

    if u is None:
        def diff(v: complex) -> complex:
            return x - complex(wp(v, hat))

        y2 = 4 * x**3 - C.g2 * x - C.g3
    else:
        def diff(v: complex) -> complex:
            return complex(wp_difference(u, v, hat))

        y2 = 4 * complex(np.prod(wp_difference(np.full(3, u), halves, hat)))

    def ysq(a: complex) -> complex:
        return 4 * complex(np.prod(wp_difference(np.full(3, a), halves, hat)))

    # sum_n wp(u + a_n); odd-in-y pieces cancel between partners n, J - n
    s = 0j
    for n in range(L):
        a = math.pi * (2 * n - J)
        if (2 * n - J) % (2 * L) == 0:
            s += x
            continue
        xn = complex(wp(a, hat))
        d = diff(a)
        s += (y2 + ysq(a)) / (4 * d * d) - x - xn
    if J == 0:
        val = -2 * L * L * x + 4 * L * L * ch + 2 * s + 2 * L * ch - 6 * cc
    else:
        A = math.pi * J
        x0 = complex(wp(A, hat))
        yA = complex(wp_prime_product(A, hat))
        rA = rho(1, A, hat)
        d0 = diff(A)
        Q2 = L * L * y2 / (4 * d0 * d0)
        val = (
            L * L * (2 * x + 2 * x0 - 2 * rA * yA / d0 + 2 * rA * rA + 4 * ch)
            + 2 * s
            + 2 * L * ch
            - 2 * Q2
            - 6 * cc
        )
    return -2 * params.n_h * k * k * val


def energy_on_curve(root: BetheRoot, params: ChainParams) -> float:
    """Rational (curve) form of the energy, evaluated at x_phi = wp(L p1 - pi J)."""
    if root.kind is Kind.DESCENDANT:
        return energy(root, params)
    L = params.L
    lat = lattices(params)
    J = (root.I1 + root.I2) % L
    u = L * root.p1 - math.pi * J
    x_phi = complex(wp(u, lat.hat))
    e = curve_energy(x_phi, J, params, u)
    if abs(e.imag) > 1e-9 * max(1.0, abs(e.real)):
        raise ContractError(f"curve energy not real: {e}")
    return float(e.real)


def s_matrix(root: BetheRoot) -> complex:
    if root.kind is Kind.DESCENDANT:
        return 1.0 + 0j
    return complex(np.exp(1j * root.phi))


@dataclass(frozen=True)
class HighestWeight:
    residual: float
    descendant: bool


def highest_weight_residual(root: BetheRoot, params: ChainParams) -> HighestWeight:
    """max_n |sum_{n' != n} Psi(n, n')| / ||Psi||."""
    L = params.L
    v = wave_vector(root, params)
    norm = float(np.linalg.norm(v))
    s = apply_raising(v, L, 2)
    val = float(np.max(np.abs(s)) / max(norm, 1e-300))
    return HighestWeight(val, root.kind is Kind.DESCENDANT)


def hw_sum_residual(p: complex, t: complex, params: ChainParams) -> float:
    """|sum_{n'=1}^{L-1} e^{ipn'} chi_2(n',t) + rho_2(t) + rho_2bar(omega p / 2 pi)|."""
    lat = lattices(params)
    L = params.L
    n = np.arange(1, L)
    s = np.sum(np.exp(1j * p * n) * chi(2, n.astype(float), t, lat.coord))
    om = params.omega
    closed = -rho(2, t, lat.coord) - rho(2, om * p / TWO_PI, lat.coord_bar)
    return abs(s - closed)


# ---------------------------------------------------------------- spectrum


def record_for(root: BetheRoot, params: ChainParams) -> SpectrumRecord:
    res: dict[str, float] = {}
    if root.kind is Kind.DESCENDANT:
        res["constraint"] = 0.0
        hw = highest_weight_residual(root, params).residual
        res["hw"] = hw
    else:
        res["constraint"] = constraint_residual(root, params)
        res["hw"] = highest_weight_residual(root, params).residual
    return SpectrumRecord(
        params.L,
        params.kappa,
        root.I1,
        root.I2,
        root.p1,
        root.p2,
        root.p_tot,
        energy(root, params),
        root.kind,
        res,
    )


def all_roots(params: ChainParams, method: str = "auto") -> list[BetheRoot]:
    roots = [descendant_root(I, params) for I in range(params.L)]
    return roots + nontrivial_roots(params, method)


def full_spectrum(params: ChainParams) -> list[SpectrumRecord]:
    errors = []
    recs = []
    try:
        roots = all_roots(params)
    except BetheError as exc:
        raise BetheError(f"L={params.L}, kappa={params.kappa}: {exc}") from exc
    for r in roots:
        try:
            recs.append(record_for(r, params))
        except BetheError as exc:
            errors.append(f"I=({r.I1},{r.I2}): {exc}")
    if errors:
        raise BetheError("; ".join(errors))
    recs.sort(key=SpectrumRecord.sort_key)
    return recs
