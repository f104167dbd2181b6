"""Exact Fourier analysis of small Boolean functions.

A point of ``{-1,1}^M`` is stored as an integer whose bit ``i`` is set iff
coordinate ``i`` equals -1. Subsets ``S`` of ``[M]`` are bitmasks with the
same bit order, so ``chi_S(x) = (-1)^popcount(S & x)`` and the coefficient
vector is the Hadamard transform of the truth table.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from forrlab.wht import fwht, log2_exact, popcount_parity

FOURIER_GUARD = 22


def popcounts(M: int) -> np.ndarray:
    idx = np.arange(2 ** M, dtype=np.int64)
    counts = np.zeros_like(idx)
    for i in range(M):
        counts += (idx >> i) & 1
    return counts


@dataclass(frozen=True)
class FourierTable:
    arity: int
    coeffs: np.ndarray

    def __getitem__(self, S) -> float:
        return float(self.coeffs[mask_of(S)])

    def truth_table(self) -> np.ndarray:
        return fwht(self.coeffs) * 2 ** (self.arity / 2)

    def parseval_gap(self) -> float:
        """``sum f_hat^2 - E[f^2]``."""
        tt = self.truth_table()
        return float(np.sum(self.coeffs ** 2) - np.mean(tt ** 2))

    def degree(self, tol: float = 1e-12) -> int:
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return int(popcounts(self.arity)[nz].max()) if nz.size else 0


def mask_of(S) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    m = 0
    for i in S:
        m |= 1 << int(i)
    return m


def points_to_index(x) -> np.ndarray:
    """Map +-1 vectors (last axis = coordinates) to integer point indices."""
    x = np.asarray(x)
    weights = (1 << np.arange(x.shape[-1], dtype=np.int64))
    return ((x < 0).astype(np.int64) * weights).sum(axis=-1)


def index_to_points(idx, M: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    bits = (idx[..., None] >> np.arange(M)) & 1
    return (1 - 2 * bits).astype(np.int8)


def character(S, M: int) -> np.ndarray:
    """Truth table of ``chi_S``."""
    return (1 - 2 * popcount_parity(np.arange(2 ** M) & mask_of(S))).astype(np.float64)


def brute_fourier(truth_table) -> FourierTable:
    """All ``2^M`` coefficients ``E_x[f(x) chi_S(x)]`` by one fast transform."""
    f = np.asarray(truth_table, dtype=np.float64)
    M = log2_exact(f.size)
    if M > FOURIER_GUARD:
        raise ValueError(f"arity {M} exceeds dense guard {FOURIER_GUARD}")
    return FourierTable(M, fwht(f) / 2 ** (M / 2))


def fourier_by_definition(truth_table) -> np.ndarray:
    """Quadratic-time coefficients; an oracle for :func:`brute_fourier` at small M."""
    f = np.asarray(truth_table, dtype=np.float64)
    M = log2_exact(f.size)
    if M > 12:
        raise ValueError("definition oracle guarded at M <= 12")
    idx = np.arange(f.size)
    chars = 1 - 2 * popcount_parity(idx[:, None] & idx[None, :])
    return chars @ f / f.size


def level_mass(table: FourierTable, k: int) -> float:
    """``L_k(f) = sum_{|S| = k} |f_hat(S)|``."""
    if not 0 <= k <= table.arity:
        raise ValueError(f"level {k} outside [0, {table.arity}]")
    return float(np.abs(table.coeffs[popcounts(table.arity) == k]).sum())


def level_masses(table: FourierTable) -> np.ndarray:
    return np.bincount(popcounts(table.arity), weights=np.abs(table.coeffs), minlength=table.arity + 1)


def multilinear_eval(table: FourierTable, z) -> np.ndarray | float:
    """``sum_S f_hat(S) prod_{i in S} z_i``; ``z`` may be batched as ``(..., M)``."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != table.arity:
        raise ValueError(f"expected {table.arity} coordinates, got {z.shape[-1]}")
    if np.any(np.abs(z) > 1):
        warnings.warn("multilinear_eval called outside [-1,1]^M", RuntimeWarning, stacklevel=2)
    lead = z.shape[:-1]
    zf = z.reshape(-1, table.arity)
    c = np.broadcast_to(table.coeffs, (zf.shape[0], table.coeffs.size))
    for i in range(table.arity):
        pairs = c.reshape(zf.shape[0], -1, 2)
        c = pairs[:, :, 0] + zf[:, i:i + 1] * pairs[:, :, 1]
    out = c[:, 0].reshape(lead)
    return float(out) if out.ndim == 0 else out


def convolve(f, g) -> np.ndarray:
    """``(f * g)(z) = E_x[f(x) g(x z)]`` straight from the definition."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    M = log2_exact(f.size)
    if M > 12:
        raise ValueError("convolution check guarded at M <= 12")
    idx = np.arange(f.size)
    return (f[:, None] * g[idx[:, None] ^ idx[None, :]]).mean(axis=0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: dict


def check_convolution(f, g, tol: float = 1e-10) -> CheckResult:
    """Compare the spectrum of ``f * g`` with the pointwise product of spectra."""
    lhs = brute_fourier(convolve(f, g)).coeffs
    rhs = brute_fourier(f).coeffs * brute_fourier(g).coeffs
    dev = float(np.max(np.abs(lhs - rhs)))
    return CheckResult("convolution", dev < tol, dev, {"tol": tol})


@dataclass
class LevelKResult:
    alpha: float
    k: int
    lhs: float
    rhs: float
    applicable: bool

    @property
    def passed(self) -> bool | None:
        if not self.applicable:
            return None
        return self.lhs <= self.rhs * (1 + 1e-12)


def check_level_k_inequality(indicator, k: int) -> LevelKResult:
    """Level-k inequality for a set ``A`` given as a 0/1 indicator table.

    Applicable when ``A`` is a nonempty proper subset and ``k <= 2 ln(1/alpha)``.
    """
    ind = np.asarray(indicator, dtype=np.float64)
    alpha = float(ind.mean())
    table = brute_fourier(ind)
    lhs = float(np.sum(table.coeffs[popcounts(table.arity) == k] ** 2)) if 0 <= k <= table.arity else 0.0
    if not 0 < alpha < 1 or k < 1:
        return LevelKResult(alpha, k, lhs, math.nan, False)
    log_inv = math.log(1 / alpha)
    rhs = alpha ** 2 * (2 * math.e / k * log_inv) ** k
    return LevelKResult(alpha, k, lhs, rhs, k <= 2 * log_inv)


def lift_weight_bound(k: int, cost: float) -> float:
    """``(e/k)^{2k} c^{2k}``, the shape of the level-2k bound for lifted protocols."""
    return (math.e / k) ** (2 * k) * cost ** (2 * k)


def tal_tree_bound(depth: int, k: int, N: int, constant: float = 1.0) -> float:
    """``(C sqrt(d log(kN)))^{2k}`` for depth-d decision trees; formula only."""
    return (constant * math.sqrt(depth * math.log(k * N))) ** (2 * k)


def tal_ac0_bound(depth: int, size: int, k: int, constant: float = 1.0) -> float:
    """``(C log^{d-1} s)^{2k}`` for AC0 circuits; formula only."""
    return (constant * math.log(size) ** (depth - 1)) ** (2 * k)
