"""One-magnon dispersion and rapidity on the momentum lattice (2 pi, 2 i kappa)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .chain_model import ChainParams, Normalization
from .elliptic_kernel import LatticeSpec, big_f, rho, wp, zeta

TWO_PI = 2 * math.pi


def reduce_momentum(p: complex) -> complex:
    """Representative with Re p in [0, 2 pi)."""
    p = complex(p)
    re = math.fmod(p.real, TWO_PI)
    if re < 0:
        re += TWO_PI
    if re >= TWO_PI:
        re -= TWO_PI
    return complex(re, p.imag)


@dataclass(frozen=True)
class Momentum:
    p: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", reduce_momentum(self.p))

    @classmethod
    def quantized(cls, I: int, L: int) -> Momentum:
        return cls(TWO_PI * (I % L) / L)


def mom_bar(params: ChainParams) -> LatticeSpec:
    return LatticeSpec.mom_bar_check(params.kappa)


def dispersion(p: ArrayLike, params: ChainParams, normalization: Normalization | str | None = None):
    """epsilon_s = -2 kappa^2 F_1(p) on (2 pi, 2 i kappa); epsilon_n = n_H epsilon_s.

    Real input gives a real result; complex input is continued analytically.
    """
    norm = Normalization(normalization) if normalization is not None else params.normalization
    k = params.kappa
    val = -2 * k * k * big_f(1, p, mom_bar(params))
    if norm is Normalization.NORMALISED:
        val = params.n_h * val
    elif norm is Normalization.UNSHIFTED:
        raise ValueError("the unshifted chain has no vanishing-at-zero dispersion")
    if np.isrealobj(p) or np.all(np.imag(np.asarray(p)) == 0):
        return np.real(val) if np.ndim(val) else float(np.real(val))
    return val


def rapidity(p: ArrayLike, params: ChainParams):
    """lambda_n(p) = -tanh(kappa) rho_1(p) on (2 pi, 2 i kappa)."""
    val = -params.n_lambda * rho(1, p, mom_bar(params))
    if np.all(np.imag(np.asarray(p)) == 0):
        return np.real(val) if np.ndim(val) else float(np.real(val))
    return val


def heisenberg_dispersion(p: ArrayLike):
    return 4 * np.sin(np.asarray(p) / 2) ** 2


def hs_dispersion(p: ArrayLike):
    p = np.mod(np.asarray(p, dtype=float), TWO_PI)
    return p * (TWO_PI - p) / 2


def heisenberg_rapidity(p: ArrayLike):
    return -0.5 / np.tan(np.asarray(p) / 2)


def hs_rapidity(p: ArrayLike):
    return (np.asarray(p) - math.pi) / 2


def wp_sum_direct(I: int, params: ChainParams) -> complex:
    """sum_{j=1}^{L-1} e^{ipj} wp(j) on (L, omega), p = 2 pi I / L."""
    L = params.L
    j = np.arange(1, L)
    p = TWO_PI * I / L
    return complex(np.sum(np.exp(1j * p * j) * wp(j.astype(complex), params.lattice)))


def wp_sum_closed(I: int, params: ChainParams) -> complex:
    """Closed form of wp_sum_direct on the barred lattice (1, omega)."""
    bar = LatticeSpec.coord_bar(params.kappa)
    if I % params.L == 0:
        return bar.constants.eta1 - params.lattice.constants.eta1
    x = params.omega * (I % params.L) / params.L
    z = complex(zeta(x, bar)) - bar.constants.c2 * x
    return 0.5 * complex(wp(x, bar)) - 0.5 * z * z

