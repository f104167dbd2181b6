"""Classical query adversaries: decision trees and the pairwise correlation tester.

A tree is a nested tuple: a leaf is ``+1`` or ``-1``; an internal node is
``(coord, plus_branch, minus_branch)`` where ``plus_branch`` is followed when
``z[coord] == +1``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from forrlab import dist
from forrlab.params import ForrelationParams
from forrlab.problem import PromiseLabel
from forrlab.report import ExperimentReport
from forrlab.wht import mod2_inner

EXHAUSTIVE_BITS = 12
EXHAUSTIVE_DEPTH = 3


def tree_depth(tree) -> int:
    if isinstance(tree, (int, np.integer)):
        return 0
    return 1 + max(tree_depth(tree[1]), tree_depth(tree[2]))


def tree_coords(tree) -> set:
    if isinstance(tree, (int, np.integer)):
        return set()
    return {tree[0]} | tree_coords(tree[1]) | tree_coords(tree[2])


@dataclass(frozen=True)
class DecisionTree:
    root: object
    n_inputs: int
    depth_bound: int | None = None

    def __post_init__(self):
        d = tree_depth(self.root)
        if self.depth_bound is not None and d > self.depth_bound:
            raise ValueError(f"tree depth {d} exceeds bound {self.depth_bound}")
        bad = [c for c in tree_coords(self.root) if not 0 <= c < self.n_inputs]
        if bad:
            raise ValueError(f"queried coordinates {bad} outside [0, {self.n_inputs})")

    @property
    def depth(self) -> int:
        return tree_depth(self.root)


def eval_tree(tree, z) -> int:
    """Walk from the root to a leaf on one input."""
    node = tree.root if isinstance(tree, DecisionTree) else tree
    z = np.asarray(z)
    while not isinstance(node, (int, np.integer)):
        coord, plus, minus = node
        if not 0 <= coord < z.shape[-1]:
            raise IndexError(f"tree queries coordinate {coord} of a length-{z.shape[-1]} input")
        node = plus if z[coord] > 0 else minus
    return int(node)


def eval_tree_batch(tree, Z) -> np.ndarray:
    node = tree.root if isinstance(tree, DecisionTree) else tree
    Z = np.asarray(Z)
    if isinstance(node, (int, np.integer)):
        return np.full(Z.shape[0], int(node), dtype=np.int8)
    coord, plus, minus = node
    go_plus = Z[:, coord] > 0
    out = np.empty(Z.shape[0], dtype=np.int8)
    if go_plus.any():
        out[go_plus] = eval_tree_batch(plus, Z[go_plus])
    if (~go_plus).any():
        out[~go_plus] = eval_tree_batch(minus, Z[~go_plus])
    return out


def count_trees(n_inputs: int, depth: int) -> int:
    """Syntactic trees of depth at most ``depth`` (constant leaves included)."""
    t = 2
    for _ in range(depth):
        t = 2 + n_inputs * t * t
    return t


def enumerate_trees(n_inputs: int, depth: int):
    if depth == 0:
        yield 1
        yield -1
        return
    yield 1
    yield -1
    subs = list(enumerate_trees(n_inputs, depth - 1))
    for c in range(n_inputs):
        for a in subs:
            for b in subs:
                yield (c, a, b)


def tree_truth_table(tree, n_inputs: int) -> np.ndarray:
    """Values on all ``2^n`` encoded points (bit i set iff ``z_i = -1``)."""
    idx = np.arange(2 ** n_inputs)
    pts = 1 - 2 * ((idx[:, None] >> np.arange(n_inputs)) & 1)
    return eval_tree_batch(tree, pts)


# --- optimum over all trees of bounded depth, against a signed weight table ----

def best_tree(weights, n_inputs: int, depth: int):
    """Maximize ``sum_x D(x) w(x)`` over trees of depth <= ``depth``.

    Dynamic programming over subcubes: a subcube is either a leaf (value
    ``|sum w|``) or split on a free coordinate. Returns ``(value, tree)``.
    """
    w = np.asarray(weights, dtype=np.float64)
    idx = np.arange(2 ** n_inputs)

    @lru_cache(maxsize=None)
    def solve(fixed: int, values: int, d: int):
        s = float(w[(idx & fixed) == values].sum())
        best = (abs(s), 1 if s >= 0 else -1)
        if d == 0:
            return best
        for c in range(n_inputs):
            bit = 1 << c
            if fixed & bit:
                continue
            plus = solve(fixed | bit, values, d - 1)
            minus = solve(fixed | bit, values | bit, d - 1)
            total = plus[0] + minus[0]
            if total > best[0] + 1e-15:
                best = (total, (c, plus[1], minus[1]))
        return best

    value, tree = solve(0, 0, depth)
    return value, tree


def empirical_weights(no_samples, yes_samples) -> np.ndarray:
    """``p_no(x) - p_yes(x)`` on encoded points from two +-1 sample arrays."""
    n_inputs = no_samples.shape[1]
    size = 2 ** n_inputs
    shifts = np.arange(n_inputs)
    enc0 = ((no_samples < 0).astype(np.int64) << shifts).sum(axis=1)
    enc1 = ((yes_samples < 0).astype(np.int64) << shifts).sum(axis=1)
    p0 = np.bincount(enc0, minlength=size) / no_samples.shape[0]
    p1 = np.bincount(enc1, minlength=size) / yes_samples.shape[0]
    return p0 - p1


def gap_with_stderr(tree, no_samples, yes_samples) -> tuple[float, float]:
    """``E_no[D] - E_yes[D]`` with its Monte Carlo standard error."""
    d0 = eval_tree_batch(tree, no_samples).astype(np.float64)
    d1 = eval_tree_batch(tree, yes_samples).astype(np.float64)
    gap = d0.mean() - d1.mean()
    se = math.sqrt(d0.var(ddof=1) / d0.size + d1.var(ddof=1) / d1.size)
    return float(gap), se


def _draw_pair(params: ForrelationParams, n: int, seed: int, source: str, max_rejects: int):
    """No/yes sample arrays driven by the same seed (common random numbers)."""
    if source == "sigma":
        no, st0 = dist.sample_sigma_batch(params, PromiseLabel.NO, n, np.random.default_rng(seed), max_rejects)
        yes, st1 = dist.sample_sigma_batch(params, PromiseLabel.YES, n, np.random.default_rng(seed), max_rejects)
        return no, yes, (st0.rejection_rate + st1.rejection_rate) / 2
    if source == "tilde":
        no = dist.sample_mu(params, dist.EVEN, True, np.random.default_rng(seed), n)
        yes = dist.sample_mu(params, dist.ODD, True, np.random.default_rng(seed), n)
        return no, yes, 0.0
    raise ValueError(f"unknown source {source!r}")


def greedy_tree(no_samples, yes_samples, depth: int):
    """Grow a tree top-down, each node splitting on the coordinate whose split
    best separates the two sample sets. Heuristic; no optimality claim."""
    n0, n1 = no_samples.shape[0], yes_samples.shape[0]

    def grow(A, B, d):
        s = A.shape[0] / n0 - B.shape[0] / n1
        leaf = 1 if s >= 0 else -1
        if d == 0 or (A.shape[0] + B.shape[0]) == 0:
            return leaf
        plus0 = (A > 0).sum(axis=0) / n0
        plus1 = (B > 0).sum(axis=0) / n1
        minus0 = A.shape[0] / n0 - plus0
        minus1 = B.shape[0] / n1 - plus1
        score = np.abs(plus0 - plus1) + np.abs(minus0 - minus1)
        c = int(np.argmax(score))
        if score[c] <= abs(s) + 1e-15:
            return leaf
        return (c, grow(A[A[:, c] > 0], B[B[:, c] > 0], d - 1), grow(A[A[:, c] < 0], B[B[:, c] < 0], d - 1))

    return grow(no_samples, yes_samples, depth)


def tree_advantage_scan(params: ForrelationParams, depth: int, strategy: str, n_samples: int, seed: int,
                        source: str = "sigma", max_trees: int = 20_000, time_budget: float | None = None,
                        max_rejects: int = 10_000) -> ExperimentReport:
    """Largest ``|E_no[D] - E_yes[D]|`` found over depth-``depth`` trees.

    ``exhaustive`` scores every tree against the empirical no/yes
    distributions of ``n_samples`` draws each: explicit enumeration when the
    class has at most ``max_trees`` members, otherwise the exact subcube
    dynamic program. ``greedy`` grows one tree on the training draws. Either
    way the chosen tree is re-measured on fresh draws (``holdout_gap``),
    because the in-sample maximum over many trees is biased upward.
    """
    M = params.length
    started = time.perf_counter()
    if strategy == "exhaustive":
        if M > EXHAUSTIVE_BITS or depth > EXHAUSTIVE_DEPTH:
            raise ValueError(f"exhaustive scan needs 2kN <= {EXHAUSTIVE_BITS} and depth <= {EXHAUSTIVE_DEPTH}")
    elif strategy != "greedy":
        raise ValueError(f"unknown strategy {strategy!r}")
    no, yes, rej = _draw_pair(params, n_samples, seed, source, max_rejects)
    partial = False
    n_trees = count_trees(M, depth)
    if strategy == "exhaustive":
        w = empirical_weights(no, yes)
        if n_trees <= max_trees:
            best_val, best = -1.0, None
            for t_i, tree in enumerate(enumerate_trees(M, depth)):
                v = float(tree_truth_table(tree, M) @ w)
                if v > best_val:
                    best_val, best = v, tree
                if time_budget is not None and time.perf_counter() - started > time_budget:
                    partial = True
                    n_trees = t_i + 1
                    break
            method = "enumeration"
        else:
            best_val, best = best_tree(w, M, depth)
            method = "subcube-dp"
        in_sample = abs(best_val)
        in_se = math.sqrt(2.0 / n_samples)
    else:
        best = greedy_tree(no, yes, depth)
        in_sample, in_se = gap_with_stderr(best, no, yes)
        in_sample = abs(in_sample)
        method = "greedy"
    no_h, yes_h, _ = _draw_pair(params, n_samples, seed + 1, source, max_rejects)
    hold_gap, hold_se = gap_with_stderr(best, no_h, yes_h)
    return ExperimentReport(
        "tree-advantage", {**params.as_dict(), "depth": depth, "strategy": strategy, "source": source},
        in_sample, in_se, n_samples, seed,
        extra={
            "method": method,
            "trees_in_class": n_trees,
            "partial": partial,
            "tree": repr(best),
            "holdout_gap": hold_gap,
            "holdout_stderr": hold_se,
            "rejection_rate": rej,
            "note": "maximum over the scanned class only; in-sample maximum is biased upward",
        },
    )


# --- correlation tester ------------------------------------------------------

def tester_coords(params: ForrelationParams, pairs) -> list[int]:
    """Flat coordinates ``[x_i of copy 0, y_j of copy 0, x_i of copy 1, ...]``."""
    if len(pairs) != params.k:
        raise ValueError(f"need one (i, j) pair per copy, got {len(pairs)}")
    L, N = params.copy_length, params.N
    coords = []
    for c, (i, j) in enumerate(pairs):
        coords += [c * L + i, c * L + N + j]
    return coords


def tester_signs(pairs) -> np.ndarray:
    return np.array([(-1) ** mod2_inner(i, j) for i, j in pairs], dtype=np.int8)


def correlation_tester(params: ForrelationParams, pairs):
    """Decision function guessing ``F^(k)`` from one coordinate pair per copy.

    Copy ``c`` is guessed yes (-1) when ``x_i y_j (-1)^<i,j>`` is +1; the
    output is the product of the copy guesses. Accepts one input or a batch.
    """
    coords = np.array(tester_coords(params, pairs))
    signs = tester_signs(pairs)

    def decide(z):
        z = np.asarray(z)
        picked = z[..., coords].astype(np.int64).reshape(z.shape[:-1] + (params.k, 2))
        per_copy = -(picked[..., 0] * picked[..., 1] * signs)
        return np.prod(per_copy, axis=-1)

    return decide


def _tester_values_marginal(params, pairs, source, rng, n):
    coords = tester_coords(params, pairs)
    z = dist.sample_marginal(params, coords, source, rng, n).astype(np.int64).reshape(n, params.k, 2)
    return np.prod(-(z[..., 0] * z[..., 1] * tester_signs(pairs)), axis=-1)


def correlation_advantage(params: ForrelationParams, pairs, n_samples: int, rng: np.random.Generator,
                          source: str = "tilde", chunk: int = 2_000_000, seed=None) -> ExperimentReport:
    """``(E_no[T] - E_yes[T]) / 2`` for the correlation tester ``T``.

    ``tilde`` compares the rounded even/odd mixtures (sampling only the
    queried coordinates, which is exact); ``uniform`` compares the uniform
    distribution with itself; ``sigma`` uses full promise-conditioned draws.
    """
    sums = np.zeros(2)
    sq = np.zeros(2)
    decide = correlation_tester(params, pairs)
    for side, parity in enumerate((dist.EVEN, dist.ODD)):
        done = 0
        while done < n_samples:
            m = min(chunk, n_samples - done)
            if source == "sigma":
                lab = PromiseLabel.NO if side == 0 else PromiseLabel.YES
                z, _ = dist.sample_sigma_batch(params, lab, m, rng)
                vals = decide(z)
            elif source in ("tilde", "uniform"):
                vals = _tester_values_marginal(params, pairs, "uniform" if source == "uniform" else parity, rng, m)
            else:
                raise ValueError(f"unknown source {source!r}")
            sums[side] += vals.sum()
            sq[side] += (vals.astype(np.float64) ** 2).sum()
            done += m
    means = sums / n_samples
    var = sq / n_samples - means ** 2
    adv = (means[0] - means[1]) / 2
    se = 0.5 * math.sqrt(var[0] / n_samples + var[1] / n_samples)
    return ExperimentReport(
        "correlation-advantage", {**params.as_dict(), "pairs": [list(p) for p in pairs], "source": source},
        float(adv), se, n_samples, seed,
        extra={"mean_no": float(means[0]), "mean_yes": float(means[1]),
               "first_moment_heuristic": (params.eps / (2 * math.sqrt(params.N))) ** params.k},
    )
