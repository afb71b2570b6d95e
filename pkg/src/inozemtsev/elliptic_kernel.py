"""Weierstrass and Jacobi functions on arbitrary period lattices.

Everything is built from the odd theta series

    theta_b(z) = vartheta(pi z / omega_b | tau_b),   tau_1 = omega2/omega1,
                                                   tau_2 = -omega1/omega2,

evaluated on whichever index has the smaller nome.  The other index is reached
through the Legendre relation, so both stay accurate when one nome is close to 1.
Arguments are reduced to the centred fundamental parallelogram first and the
quasi-periodicity factors are reapplied exactly.

All public functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._kernel import theta_series

TWO_PI = 2 * math.pi
POLE_RADIUS = 1e-13
NOME_LIMIT = 1.0 - 1e-8
TAYLOR_RADIUS = 1e-3  # relative to the shorter period

Index = Literal[1, 2]


class EllipticError(ValueError):
    """Base class for kernel errors."""


class PoleError(EllipticError):
    """Argument within the pole guard radius of a lattice point."""


class PrecisionError(EllipticError):
    """Nome too close to the unit circle for the series to converge."""


class DomainError(EllipticError):
    """Arguments outside the domain of an identity check."""


class LatticeTag(str, Enum):
    COORD = "Coord"
    COORD_BAR = "CoordBar"
    COORD_HAT = "CoordHat"
    MOM_CHECK = "MomCheck"
    MOM_BAR_CHECK = "MomBarCheck"
    MOM_HAT_CHECK = "MomHatCheck"


_DUAL_TAG = {
    LatticeTag.COORD: LatticeTag.MOM_CHECK,
    LatticeTag.COORD_BAR: LatticeTag.MOM_BAR_CHECK,
    LatticeTag.COORD_HAT: LatticeTag.MOM_HAT_CHECK,
}


@dataclass(frozen=True)
class EllipticConstants:
    eta1: complex
    eta2: complex
    g2: complex
    g3: complex
    q: complex  # nome of the series actually summed
    series: int  # index b whose series is summed
    tau1: complex
    tau2: complex
    c1: complex  # eta1 / omega1
    c2: complex  # eta2 / omega2
    log_tp0: tuple[complex, complex]  # log theta_b'(0), b = 1, 2

    def c(self, b: int) -> complex:
        return self.c1 if b == 1 else self.c2

    def tau(self, b: int) -> complex:
        return self.tau1 if b == 1 else self.tau2


@dataclass(frozen=True)
class LatticeSpec:
    """Quasi-period pair (omega1, omega2) with Im(omega2/omega1) > 0.

    ``kappa`` records the family parameter (omega = i pi / kappa) for the six
    named lattices; it is only used to build dual lattices.
    """

    omega1: complex
    omega2: complex
    tag: LatticeTag | None = None
    kappa: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega1", complex(self.omega1))
        object.__setattr__(self, "omega2", complex(self.omega2))
        if not (self.omega2 / self.omega1).imag > 0:
            raise DomainError("lattice must satisfy Im(omega2/omega1) > 0")

    @classmethod
    def coord(cls, L: float, kappa: float) -> LatticeSpec:
        return cls(L, 1j * math.pi / kappa, LatticeTag.COORD, kappa)

    @classmethod
    def coord_bar(cls, kappa: float) -> LatticeSpec:
        return cls(1.0, 1j * math.pi / kappa, LatticeTag.COORD_BAR, kappa)

    @classmethod
    def coord_hat(cls, L: float, kappa: float) -> LatticeSpec:
        return cls(L, 1j * math.pi * L / kappa, LatticeTag.COORD_HAT, kappa)

    @classmethod
    def mom_check(cls, L: float, kappa: float) -> LatticeSpec:
        return cls(2 * math.pi, 2j * L * kappa, LatticeTag.MOM_CHECK, kappa)

    @classmethod
    def mom_bar_check(cls, kappa: float) -> LatticeSpec:
        return cls(2 * math.pi, 2j * kappa, LatticeTag.MOM_BAR_CHECK, kappa)

    @classmethod
    def mom_hat_check(cls, L: float, kappa: float) -> LatticeSpec:
        return cls(2 * math.pi * L, 2j * L * kappa, LatticeTag.MOM_HAT_CHECK, kappa)

    @property
    def constants(self) -> EllipticConstants:
        return _constants(self.omega1, self.omega2)

    def omega(self, b: int) -> complex:
        return self.omega1 if b == 1 else self.omega2

    @property
    def scale_omega(self) -> complex:
        return 1j * math.pi / self.kappa if self.kappa else self.omega2

    def dual(self) -> LatticeSpec:
        """Momentum lattice: this lattice scaled by -2 pi / omega, basis reordered."""
        s = -2 * math.pi / self.scale_omega
        return LatticeSpec(-s * self.omega2, s * self.omega1, _DUAL_TAG.get(self.tag), self.kappa)


# ---------------------------------------------------------------- constants


def _eisenstein(tau: complex, k: int) -> complex:
    Q = cmath.exp(2j * math.pi * tau)
    coef = {2: -24.0, 4: 240.0, 6: -504.0}[k]
    total = 0j
    Qn = 1 + 0j
    for n in range(1, 400):
        Qn *= Q
        term = n ** (k - 1) * Qn / (1 - Qn)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    return 1 + coef * total


@lru_cache(maxsize=512)
def _constants(omega1: complex, omega2: complex) -> EllipticConstants:
    tau1 = omega2 / omega1
    tau2 = -omega1 / omega2
    s = 1 if tau1.imag >= tau2.imag else 2
    om, tau = (omega1, tau1) if s == 1 else (omega2, tau2)
    q = cmath.exp(1j * math.pi * tau)
    if abs(q) >= NOME_LIMIT:
        raise PrecisionError(f"nome |q|={abs(q):.3g} too close to 1")
    S0, S1, S2, S3, _, _ = theta_series(np.zeros(1, dtype=complex), tau)
    S1, S3 = complex(S1[0]), complex(S3[0])
    k = math.pi / om
    cs = -k * k * S3 / (3 * S1)
    log_dtheta = math.log(2) + 1j * math.pi * tau / 4 + cmath.log(S1)  # log vartheta'(0|tau_s)
    lt_s = cmath.log(k) + log_dtheta
    # vartheta'(0|-1/tau) = (-i tau)^{3/2} vartheta'(0|tau)
    oa = omega2 if s == 1 else omega1
    lt_a = cmath.log(math.pi / oa) + 1.5 * cmath.log(-1j * tau) + log_dtheta
    legendre = 2j * math.pi / (omega1 * omega2)  # c1 - c2
    if s == 1:
        c1, c2 = cs, cs - legendre
        log_tp0 = (lt_s, lt_a)
    else:
        c1, c2 = cs + legendre, cs
        log_tp0 = (lt_a, lt_s)
    g2 = (4 * math.pi**4 / 3) * _eisenstein(tau, 4) / om**4
    g3 = (8 * math.pi**6 / 27) * _eisenstein(tau, 6) / om**6
    return EllipticConstants(
        eta1=c1 * omega1,
        eta2=c2 * omega2,
        g2=g2,
        g3=g3,
        q=q,
        series=s,
        tau1=tau1,
        tau2=tau2,
        c1=c1,
        c2=c2,
        log_tp0=log_tp0,
    )


# ---------------------------------------------------------------- core evaluation


@dataclass
class _Eval:
    w: NDArray[np.complex128]
    m1: NDArray[np.float64]
    m2: NDArray[np.float64]
    S0: NDArray[np.complex128]
    S1: NDArray[np.complex128]
    S2: NDArray[np.complex128]
    S3: NDArray[np.complex128]
    scale: NDArray[np.float64]


def _reduce(z: NDArray[np.complex128], lat: LatticeSpec):
    o1, o2 = lat.omega1, lat.omega2
    det = o1.real * o2.imag - o1.imag * o2.real
    x = (z.real * o2.imag - z.imag * o2.real) / det
    y = (o1.real * z.imag - o1.imag * z.real) / det
    m1 = np.round(x)
    m2 = np.round(y)
    w = z - m1 * o1 - m2 * o2
    return w, m1, m2


def _evaluate(z: NDArray[np.complex128], lat: LatticeSpec) -> _Eval:
    C = lat.constants
    w, m1, m2 = _reduce(z, lat)
    s = C.series
    v = math.pi * w / lat.omega(s)
    S0, S1, S2, S3, scale, _ = theta_series(v, C.tau(s))
    return _Eval(w, m1, m2, S0, S1, S2, S3, scale)


def _asarray(z: ArrayLike) -> tuple[NDArray[np.complex128], bool]:
    arr = np.asarray(z, dtype=np.complex128)
    return arr, arr.ndim == 0


def _ret(x: NDArray, scalar: bool):
    if scalar:
        return complex(np.asarray(x).reshape(()))
    return x


def _guard(E: _Eval, what: str) -> None:
    if np.any(np.abs(E.w) < POLE_RADIUS):
        raise PoleError(f"{what}: argument on a lattice point")


def _check_b(b: int) -> None:
    if b not in (1, 2):
        raise DomainError("index b must be 1 or 2")


def _shift(b: int, E: _Eval, lat: LatticeSpec) -> NDArray[np.complex128]:
    # rho_b(z + omega_a) = rho_b(z) + (-1)^b 2 pi i / omega_b
    ma = E.m2 if b == 1 else E.m1
    return ma * ((-1) ** b * 2j * math.pi / lat.omega(b))


def _rho_parts(b: int, E: _Eval, lat: LatticeSpec):
    """rho_b, rho_b', rho_b'' at the reduced argument w (no shift applied)."""
    C = lat.constants
    s = C.series
    k = math.pi / lat.omega(s)
    r1 = E.S1 / E.S0
    r2 = E.S2 / E.S0
    r3 = E.S3 / E.S0
    rho = k * r1
    drho = k * k * (r2 - r1 * r1)
    d2rho = k**3 * (r3 - 3 * r2 * r1 + 2 * r1**3)
    if b != s:
        d = C.c(s) - C.c(b)
        rho = rho + d * E.w
        drho = drho + d
    return rho, drho, d2rho


def _log_theta_w(b: int, E: _Eval, lat: LatticeSpec) -> NDArray[np.complex128]:
    C = lat.constants
    s = C.series
    with np.errstate(divide="ignore"):
        lt = math.log(2) + 1j * math.pi * C.tau(s) / 4 + E.scale + np.log(E.S0)
    if b != s:
        d = C.c(s) - C.c(b)
        lt = lt + C.log_tp0[b - 1] - C.log_tp0[s - 1] + d * E.w**2 / 2
    return lt


def _log_theta(b: int, E: _Eval, lat: LatticeSpec) -> NDArray[np.complex128]:
    C = lat.constants
    lt = _log_theta_w(b, E, lat)
    if b == 1:
        k, m = E.m2, E.m1
    else:
        k, m = -E.m1, E.m2
    ob = lat.omega(b)
    return lt + 1j * math.pi * (k + m) - 1j * math.pi * k * k * C.tau(b) - 2j * math.pi * k * E.w / ob


# ---------------------------------------------------------------- public functions


def theta(b: Index, z: ArrayLike, lat: LatticeSpec):
    """theta_b(z) = vartheta(pi z / omega_b | tau_b)."""
    _check_b(b)
    zz, sc = _asarray(z)
    E = _evaluate(zz, lat)
    out = np.exp(_log_theta(b, E, lat))
    out = np.where(E.S0 == 0, 0.0, out)
    return _ret(out, sc)


def theta_prime0(b: Index, lat: LatticeSpec) -> complex:
    _check_b(b)
    return cmath.exp(lat.constants.log_tp0[b - 1])


def sigma(z: ArrayLike, lat: LatticeSpec):
    zz, sc = _asarray(z)
    C = lat.constants
    s = C.series
    E = _evaluate(zz, lat)
    ls = C.c(s) * zz**2 / 2 + _log_theta(s, E, lat) - C.log_tp0[s - 1]
    out = np.where(E.S0 == 0, 0.0, np.exp(ls))
    return _ret(out, sc)


def rho(b: Index, z: ArrayLike, lat: LatticeSpec):
    """rho_b(z) = zeta(z) - (eta_b/omega_b) z = theta_b'(z)/theta_b(z)."""
    _check_b(b)
    zz, sc = _asarray(z)
    E = _evaluate(zz, lat)
    _guard(E, "rho")
    r, _, _ = _rho_parts(b, E, lat)
    return _ret(r + _shift(b, E, lat), sc)


def rho_prime(b: Index, z: ArrayLike, lat: LatticeSpec):
    _check_b(b)
    zz, sc = _asarray(z)
    E = _evaluate(zz, lat)
    _guard(E, "rho_prime")
    _, dr, _ = _rho_parts(b, E, lat)
    if b == 1 and _rect_series1(lat):
        # on the half-period line rho_1' is O(q) and the theta form cancels
        dr = _rho1_prime_qseries(E.w, lat)
    return _ret(dr, sc)


def rho_pack(b: Index, z: ArrayLike, lat: LatticeSpec):
    """(rho_b, rho_b', rho_b'') in one series evaluation."""
    _check_b(b)
    zz, sc = _asarray(z)
    E = _evaluate(zz, lat)
    _guard(E, "rho_pack")
    r, dr, d2r = _rho_parts(b, E, lat)
    r = r + _shift(b, E, lat)
    return _ret(r, sc), _ret(dr, sc), _ret(d2r, sc)


def zeta(z: ArrayLike, lat: LatticeSpec):
    zz, sc = _asarray(z)
    C = lat.constants
    s = C.series
    E = _evaluate(zz, lat)
    _guard(E, "zeta")
    r, _, _ = _rho_parts(s, E, lat)
    return _ret(r + _shift(s, E, lat) + C.c(s) * zz, sc)


def wp(z: ArrayLike, lat: LatticeSpec):
    zz, sc = _asarray(z)
    C = lat.constants
    s = C.series
    E = _evaluate(zz, lat)
    _guard(E, "wp")
    _, dr, _ = _rho_parts(s, E, lat)
    return _ret(-dr - C.c(s), sc)


def wp_prime(z: ArrayLike, lat: LatticeSpec):
    zz, sc = _asarray(z)
    C = lat.constants
    E = _evaluate(zz, lat)
    _guard(E, "wp_prime")
    _, _, d2r = _rho_parts(C.series, E, lat)
    return _ret(-d2r, sc)


def wp_pair(z: ArrayLike, lat: LatticeSpec):
    """(wp, wp') in one series evaluation."""
    zz, sc = _asarray(z)
    C = lat.constants
    s = C.series
    E = _evaluate(zz, lat)
    _guard(E, "wp_pair")
    _, dr, d2r = _rho_parts(s, E, lat)
    return _ret(-dr - C.c(s), sc), _ret(-d2r, sc)


def _log_theta_s(z: NDArray[np.complex128], lat: LatticeSpec, zero_ok: bool = False):
    E = _evaluate(z, lat)
    zero = np.abs(E.w) < POLE_RADIUS
    if np.any(zero) and not zero_ok:
        raise PoleError("argument on a lattice point")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(zero, 0.0, _log_theta(lat.constants.series, E, lat)), zero


def wp_difference(u: ArrayLike, v: ArrayLike, lat: LatticeSpec):
    """wp(u) - wp(v) from the three-term sigma identity.

    Computed as a theta product, so it keeps relative precision when wp is
    nearly flat and the plain difference would cancel.
    """
    uu, su = _asarray(u)
    vv, sv = _asarray(v)
    uu, vv = np.broadcast_arrays(uu, vv)
    C = lat.constants
    lp, zp = _log_theta_s(uu + vv, lat, zero_ok=True)
    lm, zm = _log_theta_s(uu - vv, lat, zero_ok=True)
    lu, _ = _log_theta_s(uu, lat)
    lv, _ = _log_theta_s(vv, lat)
    log = 2 * C.log_tp0[C.series - 1] + lp + lm - 2 * lu - 2 * lv
    out = np.where(zp | zm, 0.0, -np.exp(log))
    return _ret(out, su and sv)


def wp_prime_product(z: ArrayLike, lat: LatticeSpec):
    """wp'(z) = -sigma(2z) / sigma(z)^4, relative precision near half periods."""
    zz, sc = _asarray(z)
    C = lat.constants
    l2, z2 = _log_theta_s(2 * zz, lat, zero_ok=True)
    l1, _ = _log_theta_s(zz, lat)
    out = np.where(z2, 0.0, -np.exp(3 * C.log_tp0[C.series - 1] + l2 - 4 * l1))
    return _ret(out, sc)


def big_f(b: Index, z: ArrayLike, lat: LatticeSpec):
    """F_b = rho_b' + rho_b^2 + 3 eta_b/omega_b; even, F_b(0) = 0."""
    _check_b(b)
    zz, sc = _asarray(z)
    C = lat.constants
    s = C.series
    cb = C.c(b)
    E = _evaluate(zz, lat)
    sh = _shift(b, E, lat)
    near = np.abs(E.w) < TAYLOR_RADIUS * min(abs(lat.omega1), abs(lat.omega2))
    if np.any(near & (sh != 0) & (np.abs(E.w) < POLE_RADIUS)):
        raise PoleError("big_f: argument on a lattice point")
    # theta''/theta avoids the 1/z^2 cancellation between rho' and rho^2
    k = math.pi / lat.omega(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        Fs = k * k * E.S2 / E.S0 + 3 * C.c(s)
        if b != s:
            d = C.c(s) - cb
            rs = k * E.S1 / E.S0
            Fw = Fs - 2 * d + 2 * d * E.w * rs + d * d * E.w**2
        else:
            Fw = Fs
            rs = k * E.S1 / E.S0
        rb = rs + (C.c(s) - cb) * E.w
        out = Fw + 2 * sh * rb + sh * sh
    if b == 1 and _rect_series1(lat):
        # F_1 is O(q^2) on fat lattices; the theta form cancels O(1) terms
        Fq = _big_f1_qseries(E.w, lat)
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.where(sh == 0, Fq, Fq + 2 * sh * rb + sh * sh)
    # Laurent series of wp and zeta: F_b = (c^2 - g2/12) w^2 + (c g2/30 - g3/20) w^4 + O(w^6)
    w2 = E.w**2
    taylor = w2 * ((cb * cb - C.g2 / 12) + (cb * C.g2 / 30 - C.g3 / 20) * w2)
    out = np.where(near & (sh == 0), taylor, out)
    out = np.where(np.abs(E.w) < POLE_RADIUS, 0.0, out)
    return _ret(out, sc)


def _rect_series1(lat: LatticeSpec) -> bool:
    return lat.constants.series == 1 and lat.omega1.imag == 0 and lat.omega2.real == 0


def _qseries_coeffs(v: NDArray[np.complex128], lat: LatticeSpec):
    tau = lat.omega2.imag / lat.omega1.real
    lq2 = -TWO_PI * tau
    vmax = float(np.max(np.abs(v.imag))) if v.size else 0.0
    nmax = max(1, math.ceil(-42.0 / min(lq2 + vmax, -1e-3)))
    n = np.arange(1, nmax + 1)
    return n, lq2, 1 / -np.expm1(n * lq2)


def _qseries_trig(v: NDArray[np.complex128], lat: LatticeSpec):
    """(n, log q^2, 1/(1 - q^2n), a_n e^{inv}, a_n e^{-inv}) with a_n = q^2n/(1 - q^2n).

    Exponents are combined before exponentiating so that large |Im v| inside
    the fundamental domain cannot overflow.
    """
    n, lq2, r = _qseries_coeffs(v, lat)
    nv = np.multiply.outer(1j * v, n)
    ep = np.exp(n * lq2 + nv) * r
    em = np.exp(n * lq2 - nv) * r
    return n, lq2, r, ep, em


def _rho1_prime_qseries(w: NDArray[np.complex128], lat: LatticeSpec) -> NDArray[np.complex128]:
    """rho_1' = (2pi/omega1)^2 [-1/(4 sin^2(v/2)) + 2 sum n a_n cos(nv)]."""
    k = TWO_PI / lat.omega1.real
    v = k * w
    n, _, _, ep, em = _qseries_trig(v, lat)
    B = np.sum(n * (ep + em), axis=-1)
    # -1/(4 sin^2(v/2)) = t/(1 - t)^2 with |t| <= 1
    t = np.exp(np.where(v.imag >= 0, 1j * v, -1j * v))
    return k * k * (B + t / (1 - t) ** 2)


def _big_f1_qseries(w: NDArray[np.complex128], lat: LatticeSpec) -> NDArray[np.complex128]:
    """F_1 on a rectangular lattice with Im tau_1 >= 1, as an explicit q-series.

    With a_n = q^2n / (1 - q^2n) and v = 2 pi w / omega1:
    F = (2pi/omega1)^2 [-6 S + cot(v/2) A + B + A^2],
    S = sum n a_n, A = 2 sum a_n sin(nv), B = 2 sum n a_n cos(nv).
    Every term is O(q^2), so relative precision survives q -> 0.
    """
    k = TWO_PI / lat.omega1.real
    v = k * w
    n, lq2, r, ep, em = _qseries_trig(v, lat)
    A = -1j * np.sum(ep - em, axis=-1)
    B = np.sum(n * (ep + em), axis=-1)
    S = np.sum(n * np.exp(n * lq2) * r)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = -6 * S + A / np.tan(v / 2) + B + A * A
    return k * k * F


def chi(b: Index, z: ArrayLike, t: ArrayLike, lat: LatticeSpec):
    """Kronecker function theta_b'(0) theta_b(z+t) / (theta_b(z) theta_b(t))."""
    _check_b(b)
    zz, sz = _asarray(z)
    tt, st = _asarray(t)
    zz, tt = np.broadcast_arrays(zz, tt)
    Ez = _evaluate(zz, lat)
    Et = _evaluate(tt, lat)
    _guard(Ez, "chi")
    _guard(Et, "chi")
    Ezt = _evaluate(zz + tt, lat)
    lc = lat.constants.log_tp0[b - 1] + _log_theta(b, Ezt, lat) - _log_theta(b, Ez, lat) - _log_theta(b, Et, lat)
    out = np.where(Ezt.S0 == 0, 0.0, np.exp(lc))
    return _ret(out, sz and st)


def doubling_check(u: complex, v: complex, lat: LatticeSpec, b: Index = 1) -> tuple[float, float]:
    """Residuals of the addition formulae for wp and rho_b at (u, v)."""
    pu, pv = wp(u, lat), wp(v, lat)
    # theta-product forms: wp is exponentially flat on thin lattices
    den = wp_difference(u, v, lat)
    if abs(den) < 1e-14 * max(1.0, abs(pu)):
        raise DomainError("wp(u) == wp(v): addition formula degenerate")
    P = (wp_prime_product(u, lat) - wp_prime_product(v, lat)) / (2 * den)
    r_wp = abs(wp(u + v, lat) - (P * P - pu - pv))
    r_rho = abs(rho(b, u + v, lat) - (P + rho(b, u, lat) + rho(b, v, lat)))
    return r_wp, r_rho


def dual_map(fn: Literal["rho", "rho_prime", "big_f", "eta"], a: Index, z: ArrayLike, lat: LatticeSpec):
    """Evaluate fn_a on the dual (momentum) lattice of ``lat`` through ``lat``.

    rho^_a(z) = (omega/2pi) rho_b(omega z / 2pi) with b != a, F^_a scales with
    (omega/2pi)^2, eta^_1 = (omega/2pi) eta_2 and eta^_2 = -(omega/2pi) eta_1.
    ``z`` is ignored for ``eta``.
    """
    _check_b(a)
    b = 3 - a
    lam = lat.scale_omega / (2 * math.pi)
    z = np.asarray(z)
    if fn == "rho":
        return lam * rho(b, lam * z, lat)
    if fn == "rho_prime":
        return lam * lam * rho_prime(b, lam * z, lat)
    if fn == "big_f":
        return lam * lam * big_f(b, lam * z, lat)
    if fn == "eta":
        C = lat.constants
        return lam * C.eta2 if a == 1 else -lam * C.eta1
    raise DomainError(f"unknown function {fn!r}")
