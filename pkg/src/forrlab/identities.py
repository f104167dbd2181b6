"""Structural identities behind the hard-distribution argument, checked numerically.

Deterministic checks (grid telescoping) are exact; the statistical ones
(rounding law, concentration) report an estimate with its standard error.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from forrlab import dist
from forrlab.fourier import FourierTable, multilinear_eval, popcounts
from forrlab.params import ForrelationParams
from forrlab.report import ExperimentReport
from forrlab.wht import forr

TELESCOPE_K = 8
TELESCOPE_T = 16


def _grid_guard(k: int, T: int):
    if k > TELESCOPE_K or T > TELESCOPE_T or k < 1 or T < 1:
        raise ValueError(f"grid loops guarded at 1 <= k <= {TELESCOPE_K}, 1 <= T <= {TELESCOPE_T}")
    if (T + 1) ** k > 2_000_000:
        raise ValueError("grid too large for exhaustive evaluation")


def telescoping_coefficient(b, T: int) -> int:
    """Weight of grid point ``b`` in ``sum_{a in [T]^k} sum_{S} (-1)^|S| [a - 1 + S == b]``.

    Evaluated by the double sum itself, not by the product formula.
    """
    b = tuple(int(x) for x in b)
    k = len(b)
    _grid_guard(k, T)
    total = 0
    for S in itertools.product((0, 1), repeat=k):
        sign = -1 if sum(S) % 2 else 1
        # a_j = b_j + 1 - S_j must lie in [1, T]
        if all(1 <= bj + 1 - sj <= T for bj, sj in zip(b, S)):
            total += sign
    return total


def telescoping_coefficient_bruteforce(b, T: int) -> int:
    """The same weight by looping over every ``a`` as well; kept for small grids."""
    b = tuple(int(x) for x in b)
    k = len(b)
    _grid_guard(k, T)
    total = 0
    for a in itertools.product(range(1, T + 1), repeat=k):
        for S in itertools.product((0, 1), repeat=k):
            if all(aj - 1 + sj == bj for aj, sj, bj in zip(a, S, b)):
                total += -1 if sum(S) % 2 else 1
    return total


def corner_product(b, T: int) -> int:
    """``prod_j (1[b_j = 0] - 1[b_j = T])``."""
    out = 1
    for bj in b:
        out *= int(bj == 0) - int(bj == T)
    return out


@dataclass
class PathwiseResult:
    lhs: float
    rhs: float

    @property
    def deviation(self) -> float:
        return abs(self.lhs - self.rhs)


def check_telescoping_pathwise(g) -> PathwiseResult:
    """Compare ``sum_{a in [T]^k} sum_S (-1)^|S| g(a-1+S)`` with ``sum_B (-1)^|B| g(T B)``.

    ``g`` is any real array of shape ``(T+1,) * k`` indexed by grid points.
    """
    g = np.asarray(g, dtype=np.float64)
    k = g.ndim
    T = g.shape[0] - 1
    _grid_guard(k, T)
    lhs = 0.0
    for S in itertools.product((0, 1), repeat=k):
        sl = tuple(slice(s, s + T) for s in S)
        lhs += (-1) ** sum(S) * g[sl].sum()
    rhs = 0.0
    for B in itertools.product((0, 1), repeat=k):
        rhs += (-1) ** sum(B) * g[tuple(T * x for x in B)]
    return PathwiseResult(float(lhs), float(rhs))


class WalkGrid:
    """Independent scaled Gaussian increments on a ``k x T`` grid.

    Increment ``z_j^(t)`` (``t >= 1``) is ``p * G`` with ``p = 1/sqrt(T)``;
    ``z_j^(0) = 0``. Prefix sums give ``z^{<=(a)}`` for ``a`` in ``{0..T}^k``,
    and ``z^{<=(T S)}`` has law ``G^S O^{S-bar}``.
    """

    def __init__(self, params: ForrelationParams, T: int, rng: np.random.Generator, size: int | None = None):
        self.params = params
        self.T = T
        self.p = 1 / math.sqrt(T)
        lead = () if size is None else (size,)
        inc = dist.sample_gaussian_forrelation(params, rng, lead + (params.k, T)) * self.p
        zero = np.zeros(lead + (params.k, 1, params.copy_length))
        self.prefix = np.concatenate([zero, np.cumsum(inc, axis=-2)], axis=-2)

    def point(self, a) -> np.ndarray:
        """``z^{<=(a)}`` flattened to length ``2kN``."""
        a = list(a)
        if len(a) != self.params.k or any(not 0 <= x <= self.T for x in a):
            raise ValueError(f"grid point {a} outside {{0..{self.T}}}^{self.params.k}")
        parts = [self.prefix[..., j, a_j, :] for j, a_j in enumerate(a)]
        return np.concatenate(parts, axis=-1)


def walk_values(grid: WalkGrid, H: FourierTable) -> np.ndarray:
    """``H(trnc(z^{<=(b)}))`` at every grid point; ``H`` has arity ``2kN``."""
    k, T = grid.params.k, grid.T
    out = np.empty((T + 1,) * k)
    for b in itertools.product(range(T + 1), repeat=k):
        out[b] = multilinear_eval(H, np.clip(grid.point(b), -1, 1))
    return out


def check_rounding_law(H: FourierTable, z, n_samples: int, rng: np.random.Generator,
                       n_sigma: float = 4.0, chunk: int = 250_000) -> ExperimentReport:
    """Mean of ``H`` over roundings of ``z`` against ``H(trnc(z))``."""
    if H.arity > 12:
        raise ValueError("rounding law check guarded at arity <= 12")
    z = np.asarray(z, dtype=np.float64)
    target = multilinear_eval(H, np.clip(z, -1, 1))
    table = H.truth_table()
    weights = 1 << np.arange(H.arity)
    total = total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        r = dist.round_to_cube(np.broadcast_to(z, (m, H.arity)), rng)
        vals = table[((r < 0) * weights).sum(axis=1)]
        total += vals.sum()
        total_sq += (vals ** 2).sum()
        done += m
    mean = total / n_samples
    se = math.sqrt(max(total_sq / n_samples - mean ** 2, 0.0) / n_samples)
    passed = abs(mean - target) <= n_sigma * se + 1e-12
    return ExperimentReport("rounding-law", {"arity": H.arity, "degree": H.degree()}, mean, se, n_samples,
                            passed=passed, extra={"exact": float(target), "n_sigma": n_sigma})


def random_low_degree(M: int, degree: int, rng: np.random.Generator) -> FourierTable:
    coeffs = rng.normal(size=2 ** M)
    coeffs[popcounts(M) > degree] = 0.0
    return FourierTable(M, coeffs / np.sqrt(np.sum(coeffs ** 2)))


def _gaussian_forr_batches(params, n_samples, rng, chunk):
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        yield forr(dist.sample_gaussian_forrelation(params, rng, m))
        done += m


def check_gaussian_concentration(params: ForrelationParams, n_samples: int, rng: np.random.Generator,
                                 chunk: int = 2000) -> ExperimentReport:
    """Tail fractions of ``forr`` under the Gaussian distribution.

    Counts ``forr <= 3 eps/4`` and ``forr >= 5 eps/4`` and records the
    chi-square bound ``2 exp(-N/128)`` next to them. Pass means no lower-tail
    violation at all, which is only meaningful once the bound is tiny.
    """
    f = np.concatenate(list(_gaussian_forr_batches(params, n_samples, rng, chunk)))
    low = int(np.sum(f <= 0.75 * params.eps))
    high = int(np.sum(f >= 1.25 * params.eps))
    bound = 2 * math.exp(-params.N / 128)
    se = float(f.std(ddof=1) / math.sqrt(f.size))
    return ExperimentReport(
        "gaussian-concentration", params.as_dict(), float(f.mean()), se, n_samples,
        passed=low == 0,
        extra={"low_tail_count": low, "high_tail_count": high, "low_tail_fraction": low / f.size,
               "high_tail_fraction": high / f.size, "chi_square_bound": bound, "min_forr": float(f.min())},
    )


def check_rounding_stability(params: ForrelationParams, n_samples: int, rng: np.random.Generator,
                             z0_source: str = "gaussian", threshold: float = 0.01,
                             chunk: int = 1000) -> ExperimentReport:
    """Fraction of roundings with ``|forr(z) - forr(z0)| >= eps/4``.

    ``z0_source='gaussian'`` draws ``z0`` from the Gaussian distribution and
    clips it into ``[-1/2, 1/2]^{2N}`` (rejection into the cube is hopeless
    at this dimension); ``'zero'`` uses ``z0 = 0``.
    """
    violations = 0
    diffs = []
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        if z0_source == "gaussian":
            z0 = np.clip(dist.sample_gaussian_forrelation(params, rng, m), -0.5, 0.5)
        elif z0_source == "zero":
            z0 = np.zeros((m, params.copy_length))
        else:
            raise ValueError(f"unknown z0 source {z0_source!r}")
        z = dist.round_to_cube(z0, rng)
        d = np.asarray(forr(z.astype(np.float64))) - np.asarray(forr(z0))
        violations += int(np.sum(np.abs(d) >= params.eps / 4))
        diffs.append(d)
        done += m
    frac = violations / n_samples
    d = np.concatenate(diffs)
    return ExperimentReport(
        "rounding-stability", {**params.as_dict(), "z0": z0_source}, frac,
        math.sqrt(frac * (1 - frac) / n_samples), n_samples, passed=frac <= threshold,
        extra={"threshold": threshold, "max_abs_diff": float(np.abs(d).max()), "diff_std": float(d.std())},
    )


def truncation_gap(H: FourierTable, z0, P, params: ForrelationParams, n_samples: int,
                   rng: np.random.Generator) -> ExperimentReport:
    """Measured ``E |H(trnc(z0 + P z)) - H(z0 + P z)|`` with ``z`` from ``k`` Gaussian copies.

    Reported only; the asymptotic bound has no pinned constant.
    """
    z0 = np.asarray(z0, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    z = dist.sample_gaussian_forrelation(params, rng, (n_samples, params.k)).reshape(n_samples, -1)
    pts = z0 + P * z
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        raw = multilinear_eval(H, pts)
    gap = np.abs(multilinear_eval(H, np.clip(pts, -1, 1)) - raw)
    return ExperimentReport("truncation-gap", params.as_dict(), float(gap.mean()),
                            float(gap.std(ddof=1) / math.sqrt(n_samples)), n_samples,
                            extra={"fraction_truncated": float(np.mean(np.any(np.abs(pts) > 1, axis=1)))})
