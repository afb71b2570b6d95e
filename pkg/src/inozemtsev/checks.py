"""Invariant suites shared by ``verify`` and the acceptance tests.

Each suite returns a list of :class:`Check` records holding the maximum
residual observed and the contract limit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import bethe_two as bt
from .chain_model import ChainParams, SectorBasis, Variant, build_hamiltonian, ed_spectrum
from .elliptic_kernel import (
    LatticeSpec,
    big_f,
    doubling_check,
    dual_map,
    rho,
    rho_prime,
    sigma,
    theta,
    wp,
    wp_prime,
    zeta,
)
from .limits_bridge import (
    heisenberg_critical_length,
    hs_wave_function,
    limit_correspondence_check,
    motifs,
)
from .magnon import wp_sum_closed, wp_sum_direct

TWO_PI = 2 * math.pi
SUITES = ("elliptic", "sums", "bethe", "limits")


@dataclass
class Check:
    name: str
    value: float
    limit: float

    @property
    def ok(self) -> bool:
        return bool(self.value < self.limit)

    def as_dict(self) -> dict:
        return {"name": self.name, "max_residual": self.value, "limit": self.limit, "pass": self.ok}


def _rel(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def six_lattices(L: float, kappa: float) -> list[LatticeSpec]:
    return [
        LatticeSpec.coord(L, kappa),
        LatticeSpec.coord_bar(kappa),
        LatticeSpec.coord_hat(L, kappa),
        LatticeSpec.mom_check(L, kappa),
        LatticeSpec.mom_bar_check(kappa),
        LatticeSpec.mom_hat_check(L, kappa),
    ]


def sample_points(lat: LatticeSpec, n: int, rng: np.random.Generator, margin: float = 0.08) -> np.ndarray:
    """Random points of the fundamental parallelogram away from lattice points."""
    out = []
    while len(out) < n:
        x, y = rng.uniform(-0.5, 0.5, 2)
        if math.hypot(x, y) < margin:
            continue
        out.append(x * lat.omega1 + y * lat.omega2)
    return np.array(out)


def cauchy_derivative(f, z: np.ndarray, r: np.ndarray, n: int = 48) -> np.ndarray:
    """f'(z) by the trapezoid rule on circles of radius r (spectrally accurate)."""
    th = TWO_PI * np.arange(n) / n
    e = np.exp(1j * th)
    pts = z[:, None] + r[:, None] * e[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return np.mean(vals / e[None, :], axis=1) / r


def _radius(z: np.ndarray, lat: LatticeSpec) -> np.ndarray:
    # a quarter of the distance to the nearest lattice point, capped by the cell size
    d = np.min(
        [np.abs(z - a * lat.omega1 - b * lat.omega2) for a in (-1, 0, 1) for b in (-1, 0, 1)], axis=0
    )
    return np.minimum(0.25 * d, 0.1 * min(abs(lat.omega1), abs(lat.omega2)))


def elliptic_suite(samples: int = 100, seed: int = 0, params: tuple = ((5, 1.0), (7, 0.4))) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}

    def put(name: str, val) -> None:
        worst[name] = max(worst.get(name, 0.0), float(np.max(val)))

    for L, k in params:
        for lat in six_lattices(L, k):
            C = lat.constants
            z = sample_points(lat, samples, rng)
            put("legendre", abs(lat.omega2 * C.eta1 - lat.omega1 * C.eta2 - TWO_PI * 1j))
            for b, om, eta in ((1, lat.omega1, C.eta1), (2, lat.omega2, C.eta2)):
                put("theta_quasi", _rel(theta(b, z + om, lat), -theta(b, z, lat)))
                sz = sigma(z, lat)
                put("sigma_quasi", _rel(sigma(z + om, lat), -np.exp(eta * (z + om / 2)) * sz))
                put("zeta_quasi", _rel(zeta(z + om, lat), zeta(z, lat) + eta))
                put("wp_periodic", _rel(wp(z + om, lat), wp(z, lat)))
                put("rho_periodic", _rel(rho(b, z + om, lat), rho(b, z, lat)))
                a_om = lat.omega(3 - b)
                put("rho_quasi", _rel(rho(b, z + a_om, lat), rho(b, z, lat) + (-1) ** b * TWO_PI * 1j / om))
            r = _radius(z, lat)
            P = wp(z, lat)
            put("wp_is_minus_dzeta", _rel(-cauchy_derivative(lambda w: zeta(w, lat), z, r), P))
            put("zeta_is_dlogsigma", _rel(cauchy_derivative(lambda w: sigma(w, lat), z, r) / sigma(z, lat), zeta(z, lat)))
            put("wp_prime_is_dwp", _rel(cauchy_derivative(lambda w: wp(w, lat), z, r), wp_prime(z, lat)))
            dP = wp_prime(z, lat)
            rhs = 4 * P**3 - C.g2 * P - C.g3
            put("wp_ode", np.abs(dP**2 - rhs) / np.maximum(1.0, np.abs(P) ** 3))
            put("rho_prime", _rel(rho_prime(1, z, lat), -P - C.c1))
            v = sample_points(lat, samples, rng)
            for zi, vi in zip(z, v):
                r1, r2 = doubling_check(complex(zi), complex(vi), lat)
                scale = max(1.0, abs(complex(wp(zi + vi, lat))))
                put("doubling", max(r1 / scale, r2 / max(1.0, abs(complex(rho(1, zi + vi, lat))))))
        # homogeneity maps between coordinate and momentum lattices
        for coord, mom in (
            (LatticeSpec.coord(L, k), LatticeSpec.mom_check(L, k)),
            (LatticeSpec.coord_bar(k), LatticeSpec.mom_bar_check(k)),
            (LatticeSpec.coord_hat(L, k), LatticeSpec.mom_hat_check(L, k)),
        ):
            p = sample_points(mom, samples, rng)
            for a in (1, 2):
                put("dual_rho", _rel(dual_map("rho", a, p, coord), rho(a, p, mom)))
                put("dual_rho_prime", _rel(dual_map("rho_prime", a, p, coord), rho_prime(a, p, mom)))
                put("dual_big_f", _rel(dual_map("big_f", a, p, coord), big_f(a, p, mom)))
                eta = mom.constants.eta1 if a == 1 else mom.constants.eta2
                put("dual_eta", _rel(dual_map("eta", a, 0, coord), eta))
    # rho_check_1(z) = sum_n rho_hat_1(z + 2 pi n)
    for L in (3, 5, 8):
        k = 1.0
        chk = LatticeSpec.mom_check(L, k)
        hat = LatticeSpec.mom_hat_check(L, k)
        z = sample_points(chk, 20, rng)
        tot = sum(rho(1, z + TWO_PI * n, hat) for n in range(L))
        put("rho_identity", _rel(rho(1, z, chk), tot))
    return [Check(name, val, 1e-10) for name, val in worst.items()]


def sums_suite(Ls=range(3, 13), kappas=(0.3, 1.0, 3.0)) -> list[Check]:
    w0 = wp_ = hw = 0.0
    for L in Ls:
        for k in kappas:
            p = ChainParams(L, k)
            w0 = max(w0, abs(wp_sum_direct(0, p) - wp_sum_closed(0, p)))
            for I in range(1, L):
                wp_ = max(wp_, abs(wp_sum_direct(I, p) - wp_sum_closed(I, p)))
                for t in (0.4, 0.9 + 0.3j):
                    q = (TWO_PI * I + 2j * k * t) / L
                    hw = max(hw, bt.hw_sum_residual(q, t, p))
    return [Check("disp_sum_p0", w0, 1e-10), Check("disp_sum_p", wp_, 1e-10), Check("hw_sum", hw, 1e-10)]


def bethe_suite(L: int = 8, kappa: float = 1.0) -> list[Check]:
    p = ChainParams(L, kappa)
    roots = bt.all_roots(p)
    E = np.sort([bt.energy(r, p) for r in roots])
    ed = ed_spectrum(p, 2)
    out = [Check("root_count", abs(len(roots) - L * (L - 1) // 2), 0.5)]
    out.append(Check("ed_match", float(np.max(np.abs(E - ed) / np.maximum(1.0, np.abs(ed)))), 1e-8))
    nontriv = [r for r in roots if r.kind is not bt.Kind.DESCENDANT]
    out.append(Check("constraint", max([bt.constraint_residual(r, p) for r in nontriv], default=0.0), 1e-8 * max(1.0, 1 / kappa)))
    hw = max([bt.highest_weight_residual(r, p).residual for r in nontriv], default=0.0)
    out.append(Check("highest_weight", hw, 1e-8))
    curve = 0.0
    for r in nontriv:
        e = bt.energy(r, p)
        curve = max(curve, abs(bt.energy_on_curve(r, p) - e) / max(1.0, abs(e)))
    out.append(Check("curve_energy", curve, 1e-8))
    triv = 0.0
    for J in range(L):
        for r in bt.trivial_root_objects(J, p):
            try:
                triv = max(triv, float(np.max(np.abs(bt.wave_vector(r, p)))))
            except bt.DegeneratePhaseError:
                pass
    out.append(Check("trivial_vanish", triv, 1e-10))
    return out


def limits_suite(L: int = 8) -> list[Check]:
    ref = {3: 21.9, 5: 61.3, 7: 120.6, 9: 199.5}
    out = [Check("heisenberg_L_cr", max(abs(heisenberg_critical_length(n) - v) for n, v in ref.items()), 0.1)]
    worst = 0.0
    st = np.array(SectorBasis(L, 2).states)
    H = build_hamiltonian(ChainParams(L, 1.0), 2, Variant.TRIG)
    for m in motifs(L):
        v = hs_wave_function(m, st[:, 0], st[:, 1], L)
        worst = max(worst, float(np.max(np.abs(H @ v - m.energy() * v)) / np.max(np.abs(v))))
    out.append(Check("hs_exact", worst, 1e-9))
    p = ChainParams(L, 1e-3)
    eg = wg = 0.0
    for r in bt.nontrivial_roots(p):
        rep = limit_correspondence_check(r, p)
        eg = max(eg, rep.energy_gap)
        wg = max(wg, rep.max_wave_gap)
    out.append(Check("hs_energy_gap", eg, 1e-2))
    out.append(Check("hs_wave_gap", wg, 5e-2))
    return out


def run_suite(name: str, L: int | None = None, kappa: float | None = None) -> tuple[list[Check], float]:
    t0 = time.perf_counter()
    if name == "elliptic":
        checks = elliptic_suite()
    elif name == "sums":
        checks = sums_suite()
    elif name == "bethe":
        checks = bethe_suite(L or 8, kappa or 1.0)
    elif name == "limits":
        checks = limits_suite(L or 8)
    else:
        raise ValueError(f"unknown suite {name!r}")
    return checks, time.perf_counter() - t0
