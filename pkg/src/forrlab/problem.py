"""The promise problem F and its k-fold XOR."""
from __future__ import annotations

from enum import Enum

import numpy as np

from forrlab.params import ForrelationParams
from forrlab.wht import DimensionError, forr


class PromiseLabel(Enum):
    YES = -1
    NO = 1
    OUTSIDE = 0

    @property
    def numeric(self) -> int:
        if self is PromiseLabel.OUTSIDE:
            raise ValueError("OUTSIDE has no +-1 value")
        return self.value

    @classmethod
    def parse(cls, text: str) -> "PromiseLabel":
        key = text.strip().lower()
        aliases = {"yes": cls.YES, "-1": cls.YES, "no": cls.NO, "1": cls.NO, "+1": cls.NO,
                   "outside": cls.OUTSIDE, "0": cls.OUTSIDE}
        if key not in aliases:
            raise ValueError(f"unknown label {text!r}")
        return aliases[key]


def label_codes(forr_values, params: ForrelationParams) -> np.ndarray:
    """Vectorized labels as int8 codes: -1 yes, +1 no, 0 outside the promise."""
    f = np.asarray(forr_values, dtype=np.float64)
    out = np.zeros(f.shape, dtype=np.int8)
    out[f <= params.no_threshold] = 1
    out[f >= params.yes_threshold] = -1
    return out


def label(z, params: ForrelationParams) -> PromiseLabel:
    z = np.asarray(z)
    if z.shape != (params.copy_length,):
        raise DimensionError(f"expected a vector of length {params.copy_length}, got shape {z.shape}")
    return PromiseLabel(int(label_codes(forr(z), params)))


def copy_forr(z, params: ForrelationParams) -> np.ndarray:
    """Forrelation of each copy; ``z`` has shape ``(..., 2kN)``, result ``(..., k)``."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != params.length:
        raise DimensionError(f"expected last axis {params.length}, got {z.shape[-1]}")
    copies = z.reshape(z.shape[:-1] + (params.k, params.copy_length))
    return forr(copies)


def label_k_codes(z, params: ForrelationParams) -> np.ndarray:
    """Vectorized ``F^(k)`` codes; 0 whenever any copy falls outside the promise."""
    codes = label_codes(copy_forr(z, params), params).astype(np.int64)
    return np.prod(codes, axis=-1).astype(np.int8)


def label_k(z, params: ForrelationParams) -> PromiseLabel:
    z = np.asarray(z)
    if z.shape != (params.length,):
        raise DimensionError(f"expected a vector of length {params.length}, got shape {z.shape}")
    return PromiseLabel(int(label_k_codes(z, params)))


def promise_statistics(params: ForrelationParams, source: str, n_samples: int, rng: np.random.Generator,
                       chunk: int = 2000):
    """Fraction of draws from ``source`` that land on the label it is meant to produce.

    ``source`` is ``'even'`` (rounded even mixture, expected NO), ``'odd'``
    (rounded odd mixture, expected YES) or ``'uniform'`` (expected NO). The
    report also counts draws outside the promise.
    """
    from forrlab import dist
    from forrlab.report import mean_report

    if n_samples < 1000:
        raise ValueError("promise statistics need at least 1000 samples")
    expected = {"even": 1, "odd": -1, "uniform": 1}
    if source not in expected:
        raise ValueError(f"unknown source {source!r}")
    hits, outside = [], 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        if source == "uniform":
            z = dist.sample_uniform(params.length, rng, m)
        else:
            z = dist.sample_mu(params, source, True, rng, m)
        codes = label_k_codes(z, params)
        hits.append(codes == expected[source])
        outside += int(np.sum(codes == 0))
        done += m
    return mean_report("promise-statistics", {**params.as_dict(), "source": source},
                       np.concatenate(hits).astype(float), outside_fraction=outside / n_samples)
