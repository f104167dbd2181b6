"""Normalized fast Walsh-Hadamard transform and the Forrelation functional.

Index convention: an integer ``i`` in ``[0, N)`` is read as its n-bit
expansion, least-significant bit first, so ``H_N[i, j] = (-1)^popcount(i & j) / sqrt(N)``.
"""
from __future__ import annotations

import numpy as np
import numba

NAIVE_GUARD = 2 ** 12


class DimensionError(ValueError):
    """Vector length is not compatible with a Hadamard transform."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def log2_exact(n: int) -> int:
    if not is_power_of_two(n):
        raise DimensionError(f"length {n} is not a power of two")
    return n.bit_length() - 1


@numba.njit(cache=True)
def _fwht_rows_inplace(a):
    rows, n = a.shape
    s = np.sqrt(0.5)
    for r in range(rows):
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    x = a[r, j]
                    y = a[r, j + h]
                    a[r, j] = (x + y) * s
                    a[r, j + h] = (x - y) * s
            h *= 2


def fwht(v) -> np.ndarray:
    """Apply the normalized Hadamard matrix ``H_N`` along the last axis.

    Works on a single vector or a batch of shape ``(..., N)``. The 1/sqrt(2)
    factor is applied inside every butterfly stage, so ``fwht(fwht(v)) == v``
    up to rounding. Returns a new float64 array.
    """
    a = np.array(v, dtype=np.float64, copy=True)
    if a.ndim == 0:
        raise DimensionError("fwht needs at least one axis")
    n = a.shape[-1]
    log2_exact(n)
    lead = a.shape[:-1]
    flat = np.ascontiguousarray(a.reshape(-1, n))
    _fwht_rows_inplace(flat)
    return flat.reshape(lead + (n,))


def mod2_inner(a: int, b: int) -> int:
    """``<a, b>_2``: parity of the bitwise AND of the two indices."""
    return bin(int(a) & int(b)).count("1") & 1


def popcount_parity(x: np.ndarray) -> np.ndarray:
    """Vectorized parity of popcount for non-negative integer arrays."""
    x = np.asarray(x, dtype=np.uint64).copy()
    parity = np.zeros(x.shape, dtype=np.uint64)
    while np.any(x):
        parity ^= x & np.uint64(1)
        x >>= np.uint64(1)
    return parity.astype(np.int64)


def hadamard_matrix(n_dim: int) -> np.ndarray:
    """Dense normalized ``H_N``; only for small oracles and tests."""
    if n_dim > NAIVE_GUARD:
        raise DimensionError(f"refusing to materialize H_N with N={n_dim} > {NAIVE_GUARD}")
    log2_exact(n_dim)
    idx = np.arange(n_dim)
    signs = 1 - 2 * popcount_parity(idx[:, None] & idx[None, :])
    return signs / np.sqrt(n_dim)


def naive_hadamard_apply(v) -> np.ndarray:
    """O(N^2) reference for :func:`fwht`, built from the sign definition."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    if n > NAIVE_GUARD:
        raise DimensionError(f"naive transform guarded at N <= {NAIVE_GUARD}, got {n}")
    return v @ hadamard_matrix(n).T


def split_halves(z) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=np.float64)
    m = z.shape[-1]
    if m % 2 or not is_power_of_two(m // 2):
        raise DimensionError(f"forrelation input must have length 2N with N a power of two, got {m}")
    half = m // 2
    return z[..., :half], z[..., half:]


def forr(z) -> np.ndarray | float:
    """Forrelation ``(1/N) <x, H_N y>`` of ``z = (x, y)``.

    Accepts a single vector of length 2N or a batch ``(..., 2N)``.
    """
    x, y = split_halves(z)
    n_dim = x.shape[-1]
    val = np.einsum("...i,...i->...", x, fwht(y)) / n_dim
    if np.ndim(val) == 0:
        return float(val)
    return val


def forr_naive(z) -> float:
    """Quadratic-time forrelation, kept independent of :func:`fwht`."""
    x, y = split_halves(z)
    n_dim = x.shape[-1]
    return float(x @ (hadamard_matrix(n_dim) @ y) / n_dim)
