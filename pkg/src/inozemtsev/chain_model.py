"""Spin-chain Hamiltonian in fixed-magnon sectors and the dense ED oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from .elliptic_kernel import LatticeSpec, PoleError, wp

MAX_SECTOR = 20000
IMAGE_SUM_MIN = 1.0  # kappa L above which the hyperbolic image sum converges in IMAGE_TERMS
IMAGE_TERMS = 25


class SizeError(ValueError):
    """Sector dimension above the dense-storage guard."""


class InputError(ValueError):
    """Matrix handed to the eigensolver is not self-adjoint."""


class Normalization(str, Enum):
    UNSHIFTED = "Unshifted"
    SHIFTED = "Shifted"
    NORMALISED = "Normalised"


class Variant(str, Enum):
    ELLIPTIC = "Elliptic"
    TRIG = "Trig"
    HYPERBOLIC = "Hyperbolic"
    CONTACT = "Contact"
    RATIONAL = "Rational"


@dataclass(frozen=True)
class ChainParams:
    L: int
    kappa: float
    normalization: Normalization = Normalization.NORMALISED

    def __post_init__(self) -> None:
        if int(self.L) != self.L or self.L < 2:
            raise ValueError("L must be an integer >= 2")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "normalization", Normalization(self.normalization))

    @property
    def omega(self) -> complex:
        return 1j * math.pi / self.kappa

    @property
    def n_h(self) -> float:
        k = self.kappa
        # sinh^2(k)/k^2, stable for small k
        return (math.sinh(k) / k) ** 2 if k > 1e-4 else 1.0 + k * k / 3

    @property
    def n_lambda(self) -> float:
        return math.tanh(self.kappa)

    @cached_property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec.coord(self.L, self.kappa)

    @cached_property
    def shift(self) -> float:
        """eta2/omega on the coordinate lattice."""
        return self.lattice.constants.c2.real


@dataclass(frozen=True)
class SectorBasis:
    L: int
    M: int

    @cached_property
    def states(self) -> list[tuple[int, ...]]:
        return list(combinations(range(1, self.L + 1), self.M))

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return math.comb(self.L, self.M)


def distance(z: int, L: int) -> int:
    """d_L(z) = min(|z|, |z - L|, |z + L|) after folding into (-L, L)."""
    z = int(z) % L
    return min(abs(z), abs(z - L), abs(z + L))


def _image_sum(d: int, L: int, k: float, normalised: bool) -> float:
    """wp(d) + eta2/omega = sum_m kappa^2 / sinh^2(kappa (d + m L)).

    Written with exp(-2|x|) so large kappa neither overflows nor cancels;
    the n_H prefactor sinh^2(kappa)/kappa^2 is folded in analytically.
    """
    m = np.arange(-IMAGE_TERMS, IMAGE_TERMS + 1)
    a = np.abs(k * (d + m * L))
    # 1/sinh^2(a) = 4 e^{-2a} / (1 - e^{-2a})^2
    if normalised:
        # sinh^2(k)/sinh^2(a) = e^{2(k - a)} ((1 - e^{-2k}) / (1 - e^{-2a}))^2
        t = np.exp(2 * (k - a)) * (-np.expm1(-2 * k) / -np.expm1(-2 * a)) ** 2
        return float(np.sum(t))
    t = 4 * k * k * np.exp(-2 * a) / np.expm1(-2 * a) ** 2
    return float(np.sum(t))


def pair_potential(z: int, params: ChainParams, variant: Variant | str = Variant.ELLIPTIC) -> float:
    variant = Variant(variant)
    L = params.L
    d = distance(z, L)
    if d == 0:
        raise PoleError("pair potential at coinciding sites")
    k = params.kappa
    if variant is Variant.ELLIPTIC:
        if params.normalization is Normalization.UNSHIFTED:
            return wp(float(d), params.lattice).real
        norm = params.normalization is Normalization.NORMALISED
        if k * L >= IMAGE_SUM_MIN:
            return _image_sum(d, L, k, norm)
        val = wp(float(d), params.lattice).real + params.shift
        return params.n_h * val if norm else val
    if variant is Variant.TRIG:
        return (math.pi / L) ** 2 / math.sin(math.pi * d / L) ** 2
    if variant is Variant.HYPERBOLIC:
        return params.n_h * k * k / math.sinh(k * d) ** 2
    if variant is Variant.CONTACT:
        return 1.0 if d == 1 else 0.0
    return 1.0 / d**2


def potential_table(params: ChainParams, variant: Variant | str = Variant.ELLIPTIC) -> NDArray[np.float64]:
    """V(j) for j = 0..L-1 with V(0) = 0."""
    V = np.zeros(params.L)
    for j in range(1, params.L):
        V[j] = pair_potential(j, params, variant)
    return V


def build_hamiltonian(params: ChainParams, M: int, variant: Variant | str = Variant.ELLIPTIC) -> NDArray[np.float64]:
    """H = sum_{j<k} V(j-k) (1 - P_jk) on the M-magnon coordinate basis."""
    L = params.L
    if not 0 <= M <= L:
        raise ValueError("need 0 <= M <= L")
    dim = math.comb(L, M)
    if dim > MAX_SECTOR:
        raise SizeError(f"sector dimension {dim} exceeds {MAX_SECTOR}")
    V = potential_table(params, variant)
    basis = SectorBasis(L, M)
    H = np.zeros((dim, dim))
    for i, st in enumerate(basis.states):
        occ = set(st)
        for j in st:
            for k in range(1, L + 1):
                if k in occ:
                    continue
                v = V[(j - k) % L]
                H[i, i] += v
                new = tuple(sorted((occ - {j}) | {k}))
                H[i, basis.index[new]] -= v
    return H


def apply_hamiltonian(vec: NDArray, params: ChainParams, M: int, variant: Variant | str = Variant.ELLIPTIC) -> NDArray:
    """H vec without storing H; same conventions as build_hamiltonian."""
    L = params.L
    V = potential_table(params, variant)
    basis = SectorBasis(L, M)
    vec = np.asarray(vec)
    out = np.zeros(len(basis), dtype=np.result_type(vec, float))
    for i, st in enumerate(basis.states):
        occ = set(st)
        acc = 0.0
        for j in st:
            for k in range(1, L + 1):
                if k in occ:
                    continue
                v = V[(j - k) % L]
                acc += v * (vec[i] - vec[basis.index[tuple(sorted((occ - {j}) | {k}))]])
        out[i] = acc
    return out


@dataclass(frozen=True)
class Eigensystem:
    values: NDArray[np.float64]
    vectors: NDArray[np.float64]
    max_residual: float


def diagonalize(H: NDArray) -> Eigensystem:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InputError("matrix must be square")
    if H.size and np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise InputError("matrix is not self-adjoint")
    vals, vecs = np.linalg.eigh(H)
    norm = max(np.linalg.norm(H, 2), 1e-300) if H.size else 1.0
    res = np.linalg.norm(H @ vecs - vecs * vals, axis=0) if H.size else np.zeros(0)
    mr = float(res.max() / norm) if res.size else 0.0
    if mr > 1e-10:
        raise ArithmeticError(f"eigensolver residual {mr:.2e} above contract")
    return Eigensystem(vals, vecs, mr)


def apply_raising(vec: NDArray, L: int, M: int) -> NDArray:
    """S^+ from the M- to the (M-1)-magnon sector: sum over the removed magnon."""
    if M < 1:
        raise ValueError("M must be >= 1")
    src = SectorBasis(L, M)
    dst = SectorBasis(L, M - 1)
    out = np.zeros(len(dst), dtype=np.result_type(vec, float))
    for i, st in enumerate(src.states):
        for j in range(M):
            out[dst.index[st[:j] + st[j + 1 :]]] += vec[i]
    return out


def apply_lowering(vec: NDArray, L: int, M: int) -> NDArray:
    """S^- from the M- to the (M+1)-magnon sector."""
    src = SectorBasis(L, M)
    dst = SectorBasis(L, M + 1)
    out = np.zeros(len(dst), dtype=np.result_type(vec, float))
    for i, st in enumerate(src.states):
        occ = set(st)
        for k in range(1, L + 1):
            if k not in occ:
                out[dst.index[tuple(sorted(occ | {k}))]] += vec[i]
    return out


def ed_spectrum(params: ChainParams, M: int, variant: Variant | str = Variant.ELLIPTIC) -> NDArray[np.float64]:
    return diagonalize(build_hamiltonian(params, M, variant)).values
