"""Deterministic seed handling shared by code selection, decoding, and experiments.

Every stochastic component takes an explicit integer seed.  Sub-streams
(per pool member, per trial, per search round) are derived from a parent
seed plus integer tags, so any run can be replayed exactly from the
seeds it reports.
"""

from __future__ import annotations

import numpy as np

# Seeds are kept inside the range a 64-bit generator state accepts.
MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    """Validate an integer seed and return it as a plain int."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64 - 1], got {seed}")
    return seed


def derive_seed(*parts: int) -> int:
    """Mix integer parts into a stable 64-bit sub-seed.

    The mapping is fixed by the entropy-pooling scheme of
    numpy.random.SeedSequence, so derived streams are reproducible
    across runs and machines and distinct parts give independent
    streams.
    """
    if not parts:
        raise ValueError("derive_seed needs at least one part")
    entropy = [check_seed(p) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
