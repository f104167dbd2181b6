"""Simulation of the one-query Forrelation test and its amplified k-fold use.

The quantum circuit itself is not simulated: its only observable is a bit
that equals 1 with probability ``(1 + forr(z)) / 2``, and that is what we draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from forrlab import dist
from forrlab.params import ForrelationParams
from forrlab.problem import PromiseLabel, copy_forr, label_k_codes
from forrlab.report import ExperimentReport
from forrlab.wht import DimensionError, forr

AMPLIFICATION_CONSTANT = 128.0


@dataclass
class QueryLedger:
    queries: int = 0

    def charge(self, n: int = 1):
        self.queries += int(n)


@dataclass(frozen=True)
class AmplificationPlan:
    repetitions: int
    threshold: float
    error_budget: float
    eps: float

    def __post_init__(self):
        lo, hi = (1 + self.eps / 4) / 2, (1 + self.eps / 2) / 2
        if not lo < self.threshold < hi:
            raise ValueError(f"threshold {self.threshold} not strictly inside ({lo}, {hi})")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")

    @property
    def hoeffding_error(self) -> float:
        """Per-copy error bound ``exp(-2 r (eps/16)^2)`` at the midpoint threshold."""
        return math.exp(-2 * self.repetitions * (self.eps / 16) ** 2)


def single_query_accept_prob(z):
    """``(1 + forr(z)) / 2`` clamped to ``[0, 1]``; vectorized over leading axes."""
    z = np.asarray(z)
    if z.ndim == 0 or z.shape[-1] % 2:
        raise DimensionError(f"bad input shape {z.shape}")
    p = np.clip((1.0 + np.asarray(forr(z))) / 2.0, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def simulate_single_query(z, rng: np.random.Generator, ledger: QueryLedger | None = None) -> int:
    p = single_query_accept_prob(z)
    if ledger is not None:
        ledger.charge(1)
    return int(rng.random() < p)


def make_plan(params: ForrelationParams, constant: float = AMPLIFICATION_CONSTANT,
              threshold_fraction: float = 3 / 8) -> AmplificationPlan:
    """``r = ceil(constant / eps^2 * ln(10 k))`` repetitions, threshold ``(1 + 3 eps/8) / 2``."""
    eps = params.eps
    r = math.ceil(constant / eps ** 2 * math.log(10 * params.k))
    return AmplificationPlan(r, (1 + threshold_fraction * eps) / 2, 1 / (10 * params.k), eps)


def solve_copies(accept_probs, plan: AmplificationPlan, rng: np.random.Generator) -> np.ndarray:
    """Per-copy guesses (-1 yes, +1 no) from ``r`` simulated queries each.

    The accept count of ``r`` independent single-query runs is drawn as one
    binomial variate.
    """
    counts = rng.binomial(plan.repetitions, accept_probs)
    freq = counts / plan.repetitions
    return np.where(freq >= plan.threshold, -1, 1).astype(np.int8)


def solve_xor_k(z, params: ForrelationParams, plan: AmplificationPlan, rng: np.random.Generator,
                ledger: QueryLedger | None = None) -> tuple[int, int]:
    """Guess ``F^(k)(z)``; returns ``(guess, queries)`` with ``queries == k * r``."""
    z = np.asarray(z)
    if z.shape != (params.length,):
        raise DimensionError(f"expected length {params.length}, got {z.shape}")
    p = np.clip((1 + copy_forr(z, params)) / 2, 0, 1)
    guesses = solve_copies(p, plan, rng)
    queries = params.k * plan.repetitions
    if ledger is not None:
        ledger.charge(queries)
    return int(np.prod(guesses.astype(np.int64))), queries


def solve_xor_k_batch(zs, params: ForrelationParams, plan: AmplificationPlan, rng: np.random.Generator):
    p = np.clip((1 + copy_forr(zs, params)) / 2, 0, 1)
    guesses = solve_copies(p, plan, rng)
    return np.prod(guesses.astype(np.int64), axis=-1), zs.shape[0] * params.k * plan.repetitions


def quantum_success(params: ForrelationParams, trials: int, rng: np.random.Generator,
                    plan: AmplificationPlan | None = None, max_rejects: int = 10_000,
                    seed=None) -> ExperimentReport:
    """Success rate of the amplified test on sigma-sampled instances.

    Half of the trials are yes instances, half no instances.
    """
    plan = plan or make_plan(params)
    n_yes = trials // 2
    n_no = trials - n_yes
    yes, st_yes = dist.sample_sigma_batch(params, PromiseLabel.YES, n_yes, rng, max_rejects)
    no, st_no = dist.sample_sigma_batch(params, PromiseLabel.NO, n_no, rng, max_rejects)
    zs = np.concatenate([yes, no])
    truth = label_k_codes(zs, params).astype(np.int64)
    guesses, queries = solve_xor_k_batch(zs, params, plan, rng)
    correct = (guesses == truth).astype(np.float64)
    rate = float(correct.mean())
    se = math.sqrt(max(rate * (1 - rate), 0.0) / trials)
    draws = st_yes.draws + st_no.draws
    rejects = st_yes.rejected + st_no.rejected
    return ExperimentReport(
        "quantum-success", params.as_dict(), rate, se, trials, seed,
        extra={
            "repetitions": plan.repetitions,
            "threshold": plan.threshold,
            "queries_per_instance": params.k * plan.repetitions,
            "total_queries": int(queries),
            "rejection_rate": rejects / draws,
            "rejection_rate_yes": st_yes.rejection_rate,
            "rejection_rate_no": st_no.rejection_rate,
        },
    )
