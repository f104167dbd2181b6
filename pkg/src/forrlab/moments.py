"""Exact moments of the Gaussian Forrelation distribution and of the hard mixtures.

Gaussian moments come from the Isserlis (Wick) pairing expansion over the
covariance ``eps [[I, H_N], [H_N, I]]``; mixture differences use the
product formula over copies.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from forrlab import dist
from forrlab.params import ForrelationParams
from forrlab.report import ExperimentReport, mean_report
from forrlab.wht import mod2_inner

MOMENT_GUARD = 8


class MomentGuardError(ValueError):
    pass


def _cov(params: ForrelationParams, a: tuple[str, int], b: tuple[str, int]) -> float:
    (sa, ia), (sb, ib) = a, b
    if sa == sb:
        return params.eps if ia == ib else 0.0
    return params.eps * (-1) ** mod2_inner(ia, ib) / np.sqrt(params.N)


def _pairings_sum(params, variables: list) -> float:
    if not variables:
        return 1.0
    if len(variables) % 2:
        return 0.0
    first, rest = variables[0], variables[1:]
    total = 0.0
    for i, partner in enumerate(rest):
        c = _cov(params, first, partner)
        if c != 0.0:
            total += c * _pairings_sum(params, rest[:i] + rest[i + 1:])
    return total


def gaussian_moment_exact(S: Iterable[int], T: Iterable[int], params: ForrelationParams) -> float:
    """``E[prod_{i in S} x_i prod_{j in T} y_j]`` under the Gaussian Forrelation distribution.

    ``S`` and ``T`` are sets of indices in ``[0, N)``.
    """
    S, T = sorted(set(S)), sorted(set(T))
    if len(S) + len(T) > MOMENT_GUARD:
        raise MomentGuardError(f"total degree {len(S) + len(T)} exceeds guard {MOMENT_GUARD}")
    for i in S + T:
        if not 0 <= i < params.N:
            raise ValueError(f"index {i} outside [0, {params.N})")
    if (len(S) + len(T)) % 2:
        return 0.0
    return _pairings_sum(params, [("x", i) for i in S] + [("y", j) for j in T])


def split_copy_index(I_j: Iterable[int], N: int) -> tuple[list[int], list[int]]:
    """Split a subset of ``[0, 2N)`` into its x-part and y-part (both in ``[0, N)``)."""
    S = sorted(i for i in I_j if i < N)
    T = sorted(i - N for i in I_j if i >= N)
    return S, T


def gaussian_moment_of_copy(I_j: Iterable[int], params: ForrelationParams) -> float:
    return gaussian_moment_exact(*split_copy_index(I_j, params.N), params)


def mu_moment_difference(I: Sequence[Iterable[int]], params: ForrelationParams) -> float:
    """Exact ``mu_0^(k)(I) - mu_1^(k)(I)`` for ``I = (I_1, ..., I_k)``.

    Equals ``2^{-(k-1)} prod_j (U(I_j) - G(I_j))`` with ``U(empty) = 1`` and
    ``U(J) = 0`` otherwise.
    """
    I = [sorted(set(I_j)) for I_j in I]
    if len(I) != params.k:
        raise ValueError(f"expected {params.k} components, got {len(I)}")
    if sum(len(I_j) for I_j in I) > MOMENT_GUARD:
        raise MomentGuardError(f"|I| exceeds guard {MOMENT_GUARD}")
    prod = 1.0
    for I_j in I:
        u = 1.0 if not I_j else 0.0
        prod *= u - gaussian_moment_of_copy(I_j, params)
        if prod == 0.0:
            return 0.0
    return prod / 2 ** (params.k - 1)


def moment_difference_bound(total_size: int, params: ForrelationParams) -> float:
    """``2^{-k+1} eps^i N^{-i/2} i!`` for ``|I| = 2i``."""
    from math import factorial

    i = total_size // 2
    return 2.0 ** (1 - params.k) * params.eps ** i * params.N ** (-i / 2) * factorial(i)


def gaussian_moment_bound(i: int, params: ForrelationParams) -> float:
    from math import factorial

    return params.eps ** i * factorial(i) * params.N ** (-i / 2)


DISTRIBUTIONS = ("gaussian", "gaussian_tilde", "uniform", "mu0", "mu1", "mu0_tilde", "mu1_tilde")


def _draw(distribution: str, params: ForrelationParams, rng, size: int) -> np.ndarray:
    if distribution == "gaussian":
        return dist.sample_gaussian_forrelation(params, rng, size)
    if distribution == "gaussian_tilde":
        return dist.round_to_cube(dist.sample_gaussian_forrelation(params, rng, size), rng)
    if distribution == "uniform":
        return dist.sample_uniform(params.length, rng, size)
    if distribution in ("mu0", "mu1", "mu0_tilde", "mu1_tilde"):
        parity = dist.EVEN if distribution.startswith("mu0") else dist.ODD
        return dist.sample_mu(params, parity, distribution.endswith("tilde"), rng, size)
    raise ValueError(f"unknown distribution {distribution!r}; choose from {DISTRIBUTIONS}")


def monomial_samples(distribution: str, I: Sequence[int], params: ForrelationParams, n_samples: int,
                     rng, chunk: int = 100_000) -> np.ndarray:
    """Per-sample values of ``prod_{i in I} z_i``; ``I`` indexes the flat vector."""
    I = np.asarray(sorted(set(I)), dtype=np.int64)
    out = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        z = _draw(distribution, params, rng, m)
        out[done:done + m] = np.prod(z[:, I].astype(np.float64), axis=1) if I.size else 1.0
        done += m
    return out


def estimate_moment(distribution: str, I: Sequence[int], params: ForrelationParams, n_samples: int,
                    rng, seed=None) -> ExperimentReport:
    """Monte Carlo estimate of a moment; stderr is ``stdev / sqrt(n_samples)``."""
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    values = monomial_samples(distribution, I, params, n_samples, rng)
    return mean_report("estimate-moment", {**params.as_dict(), "distribution": distribution,
                                           "I": [int(i) for i in sorted(set(I))]}, values, seed)
