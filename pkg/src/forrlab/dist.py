"""Samplers for the Gaussian Forrelation distribution, the uniform distribution,
the hard mixtures ``mu_0^(k)`` / ``mu_1^(k)``, their rounded versions, and the
promise-conditioned ``sigma`` distributions.

Every sampler takes an explicit ``numpy.random.Generator`` and accepts an
optional ``size`` for batched draws (leading axis).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from forrlab.params import ForrelationParams
from forrlab.problem import PromiseLabel, label_k_codes
from forrlab.wht import fwht, mod2_inner

EVEN, ODD = "even", "odd"


class PromiseFailure(RuntimeError):
    """The sigma sampler rejects too often; the parameters are too small for
    the promise to hold with high probability."""


def _parity_bit(parity) -> int:
    if parity in (EVEN, 0):
        return 0
    if parity in (ODD, 1):
        return 1
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def _lead(size) -> tuple:
    if size is None:
        return ()
    return (size,) if np.isscalar(size) else tuple(size)


def sample_gaussian_forrelation(params: ForrelationParams, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw ``(x, H_N x)`` with ``x ~ N(0, eps I_N)``."""
    lead = _lead(size)
    x = rng.normal(0.0, np.sqrt(params.eps), size=lead + (params.N,))
    return np.concatenate([x, fwht(x)], axis=-1)


def sample_uniform(length: int, rng: np.random.Generator, size=None) -> np.ndarray:
    return (1 - 2 * rng.integers(0, 2, size=_lead(size) + (length,), dtype=np.int8)).astype(np.int8)


def trnc(a):
    """Clamp into ``[-1, 1]``; scalars stay scalars."""
    out = np.clip(a, -1.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def round_to_cube(z, rng: np.random.Generator) -> np.ndarray:
    """Independent +-1 rounding with ``P[z'_i = 1] = (1 + trnc(z_i)) / 2``.

    Coordinates with ``|z_i| >= 1`` are assigned deterministically.
    """
    t = np.clip(np.asarray(z, dtype=np.float64), -1.0, 1.0)
    u = rng.random(t.shape)
    return np.where(u < (1.0 + t) / 2.0, 1, -1).astype(np.int8)


def sample_patterns(k: int, parity, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform subsets ``S`` of ``[k]`` with ``|S|`` of the given parity, as bool masks."""
    bit = _parity_bit(parity)
    lead = _lead(size)
    free = rng.integers(0, 2, size=lead + (k - 1,), dtype=np.int8)
    last = (bit - free.sum(axis=-1, keepdims=True)) % 2
    return np.concatenate([free, last.astype(np.int8)], axis=-1).astype(bool)


def sample_mu(params: ForrelationParams, parity, rounded: bool, rng: np.random.Generator,
              size=None, return_patterns: bool = False):
    """Sample ``mu_parity^(k)`` (or its rounded version) over ``R^{2kN}``.

    Copies in the drawn pattern ``S`` come from the Gaussian distribution
    (rounded when ``rounded``), the rest are uniform +-1 strings.
    """
    lead = _lead(size)
    patterns = sample_patterns(params.k, parity, rng, size)
    flat_pat = patterns.reshape(-1, params.k)
    m = flat_pat.shape[0]
    L = params.copy_length
    out = np.empty((m, params.k, L), dtype=np.int8 if rounded else np.float64)
    for j in range(params.k):
        g_rows = np.flatnonzero(flat_pat[:, j])
        u_rows = np.flatnonzero(~flat_pat[:, j])
        if g_rows.size:
            g = sample_gaussian_forrelation(params, rng, g_rows.size)
            out[g_rows, j] = round_to_cube(g, rng) if rounded else g
        if u_rows.size:
            out[u_rows, j] = sample_uniform(L, rng, u_rows.size)
    out = out.reshape(lead + (params.length,))
    if return_patterns:
        return out, patterns
    return out


def target_parity(label: PromiseLabel) -> str:
    """No instances come from the even mixture, yes instances from the odd one."""
    if label is PromiseLabel.NO:
        return EVEN
    if label is PromiseLabel.YES:
        return ODD
    raise ValueError("sigma is only defined for YES / NO")


@dataclass
class RejectionStats:
    draws: int = 0
    accepted: int = 0

    @property
    def rejected(self) -> int:
        return self.draws - self.accepted

    @property
    def rejection_rate(self) -> float:
        return self.rejected / self.draws if self.draws else 0.0


def sample_sigma_batch(params: ForrelationParams, label: PromiseLabel, n: int, rng: np.random.Generator,
                       max_rejects: int = 10_000, chunk: int | None = None):
    """Draw ``n`` instances of ``sigma_label`` by rejection from the rounded mixture.

    Returns ``(samples, stats)``. Raises :class:`PromiseFailure` once at least
    ``max_rejects`` candidates have been drawn with a rejection rate above 50%.
    """
    parity = target_parity(label)
    want = label.value
    if chunk is None:
        chunk = max(16, min(4096, (1 << 22) // params.length))
    stats = RejectionStats()
    kept = []
    have = 0
    while have < n:
        batch = sample_mu(params, parity, True, rng, size=chunk)
        ok = label_k_codes(batch, params) == want
        stats.draws += chunk
        stats.accepted += int(ok.sum())
        take = batch[ok][: n - have]
        kept.append(take)
        have += take.shape[0]
        if stats.draws >= max_rejects and stats.rejection_rate > 0.5:
            raise PromiseFailure(
                f"rejection rate {stats.rejection_rate:.3f} over {stats.draws} draws at {params.as_dict()}")
    return np.concatenate(kept, axis=0), stats


def sample_sigma(params: ForrelationParams, label: PromiseLabel, rng: np.random.Generator,
                 max_rejects: int = 10_000) -> np.ndarray:
    """One draw of ``sigma_label^(k)``."""
    samples, _ = sample_sigma_batch(params, label, 1, rng, max_rejects, chunk=1)
    return samples[0]


def gaussian_covariance(params: ForrelationParams, coords) -> np.ndarray:
    """Covariance of the Gaussian distribution restricted to coordinates in ``[0, 2N)``.

    Index ``i < N`` is ``x_i``, index ``N + j`` is ``y_j``.
    """
    N, eps = params.N, params.eps
    coords = [int(c) for c in coords]
    m = len(coords)
    cov = np.zeros((m, m))
    for a, ca in enumerate(coords):
        for b, cb in enumerate(coords):
            side_a, ia = divmod(ca, N)
            side_b, ib = divmod(cb, N)
            if side_a == side_b:
                cov[a, b] = eps if ia == ib else 0.0
            else:
                cov[a, b] = eps * (-1) ** mod2_inner(ia, ib) / np.sqrt(N)
    return cov


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def sample_marginal(params: ForrelationParams, coords, source: str, rng: np.random.Generator,
                    size: int, rounded: bool = True) -> np.ndarray:
    """Exact joint law of a few coordinates of a ``2kN`` instance.

    ``source`` is ``"even"``/``"odd"`` for the mixtures or ``"uniform"``.
    Only the requested coordinates are generated, so the cost does not
    depend on ``N``. Returns shape ``(size, len(coords))``.
    """
    coords = np.asarray(coords, dtype=np.int64)
    L = params.copy_length
    out = np.empty((size, coords.size), dtype=np.float64)
    if source == "uniform":
        patterns = np.zeros((size, params.k), dtype=bool)
    else:
        patterns = sample_patterns(params.k, source, rng, size)
    copy_of = coords // L
    for j in np.unique(copy_of):
        cols = np.flatnonzero(copy_of == j)
        local = coords[cols] % L
        g_rows = np.flatnonzero(patterns[:, j])
        u_rows = np.flatnonzero(~patterns[:, j])
        if g_rows.size:
            factor = _psd_factor(gaussian_covariance(params, local))
            g = rng.standard_normal((g_rows.size, cols.size)) @ factor.T
            out[np.ix_(g_rows, cols)] = g
        if u_rows.size:
            out[np.ix_(u_rows, cols)] = 1 - 2 * rng.integers(0, 2, size=(u_rows.size, cols.size))
    if rounded:
        return round_to_cube(out, rng)
    return out
