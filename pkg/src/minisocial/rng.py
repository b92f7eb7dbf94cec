"""Named, seedable random streams.

Every stochastic component draws from its own counter-based stream derived
from (seed, name), so scenario sampling, learner initialization, and policy
sampling stay independent: consuming draws from one stream never shifts
another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    """Return an independent generator for `name` under `seed`.

    Uses Philox (counter-based) keyed by the seed and a hash of the name;
    the same (seed, name) pair always yields the same sequence.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    key = np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, int.from_bytes(digest[:8], "little")],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
