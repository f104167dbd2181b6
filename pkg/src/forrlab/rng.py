"""Counter-based random streams keyed by (master seed, stream id)."""
from __future__ import annotations

import numpy as np


def stream(seed: int, *stream_id: int) -> np.random.Generator:
    """Philox generator for a logical task.

    The stream depends only on the seed and the task id, never on which
    worker runs the task.
    """
    ss = np.random.SeedSequence(int(seed) & (2 ** 64 - 1), spawn_key=tuple(int(s) for s in stream_id))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
