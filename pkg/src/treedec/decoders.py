"""Decoder estimators with a scikit-learn parameter interface.

Each decoder wraps a TreeCode plus its knobs as constructor parameters,
so get_params / set_params / clone work for sweeps and grid tools.  The
decoders carry no trainable state: fit is a no-op kept for pipeline
compatibility.  decode handles one received sequence and returns the
full DecodeResult; predict handles a batch, one row per sequence, and
returns the hard estimates.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .codebook import TreeCode
from .mcts import MctsParams
from .mlsd import (
    DEFAULT_MAX_LEAVES,
    _brute_counted,
    _mlsd_counted,
    _window_counted,
)
from .modes import (
    DecodeResult,
    Effort,
    decode_anytime,
    decode_single_round,
    decode_sliding_root,
)
from .seeding import derive_seed
from .validation import check_received_batch, check_received_sequence


class TreeDecoder(BaseEstimator):
    """Base class: code handling, batch predict, and seed plumbing."""

    def fit(self, X=None, y=None):
        """No-op; decoders have no trainable state."""
        return self

    def decode(self, received, *, seed=None) -> DecodeResult:
        """Decode one received sequence of d words."""
        y = check_received_sequence(received, self.code.params)
        return self._decode(y, self._base_seed(seed))

    def predict(self, received_batch, *, seed=None) -> np.ndarray:
        """Decode a batch, one received sequence per row.

        Row i runs with the sub-seed derive_seed(seed, i), so a batch is
        replayable row by row.
        """
        batch = check_received_batch(received_batch, self.code.params)
        base = self._base_seed(seed)
        out = np.empty(batch.shape, dtype=np.int64)
        for i, row in enumerate(batch):
            out[i] = self._decode([int(w) for w in row], derive_seed(base, i)).estimates
        return out

    def _base_seed(self, seed) -> int:
        if seed is not None:
            return int(seed)
        return int(getattr(self, "seed", 0))

    def _decode(self, y: list[int], seed: int) -> DecodeResult:
        raise NotImplementedError


class MlsdDecoder(TreeDecoder):
    """Exact maximum-likelihood sequence decoder (full backward induction).

    Deterministic; seeds are accepted and ignored.  reward_evals counts
    the optimal-value entries computed, one per (node, action) pair.
    """

    def __init__(self, code: TreeCode, max_leaves: int = DEFAULT_MAX_LEAVES):
        self.code = code
        self.max_leaves = max_leaves

    def _decode(self, y, seed):
        actions, evals = _mlsd_counted(self.code, y, max_leaves=self.max_leaves)
        return DecodeResult(actions, Effort(reward_evals=evals))


class BruteForceDecoder(TreeDecoder):
    """Exact decoder by enumeration of every leaf path (oracle for MLSD)."""

    def __init__(self, code: TreeCode, max_leaves: int = DEFAULT_MAX_LEAVES):
        self.code = code
        self.max_leaves = max_leaves

    def _decode(self, y, seed):
        actions, evals = _brute_counted(self.code, y, max_leaves=self.max_leaves)
        return DecodeResult(actions, Effort(reward_evals=evals))


class SlidingWindowDecoder(TreeDecoder):
    """Exhaustive bounded-lookahead decoder committing one symbol per step."""

    def __init__(self, code: TreeCode, window: int = 10, max_leaves: int = DEFAULT_MAX_LEAVES):
        self.code = code
        self.window = window
        self.max_leaves = max_leaves

    def _decode(self, y, seed):
        actions, evals = _window_counted(
            self.code, y, self.window, max_leaves=self.max_leaves
        )
        return DecodeResult(actions, Effort(reward_evals=evals))


class _MctsDecoderBase(TreeDecoder):
    def _mcts_params(self) -> MctsParams:
        return MctsParams(
            exploration_c=self.c,
            init_n=self.init_n,
            init_q=self.init_q,
            explore_policy=self.explore_policy,
            explore_depth_cap=self.explore_depth_cap,
        )


class SingleRoundMctsDecoder(_MctsDecoderBase):
    """One full-depth search of m rounds, then one greedy readout.

    c defaults (None) to the search depth d.
    """

    def __init__(
        self,
        code: TreeCode,
        m: int = 1000,
        c: float | None = None,
        explore_policy: str = "uniform-random",
        init_n: float = 0.0,
        init_q: float = 0.0,
        explore_depth_cap: int | None = None,
        seed: int = 0,
    ):
        self.code = code
        self.m = m
        self.c = c
        self.explore_policy = explore_policy
        self.init_n = init_n
        self.init_q = init_q
        self.explore_depth_cap = explore_depth_cap
        self.seed = seed

    def _decode(self, y, seed):
        return decode_single_round(self.code, y, self.m, self._mcts_params(), seed=seed)


class SlidingRootMctsDecoder(_MctsDecoderBase):
    """Search, commit the best root action, re-root, repeat.

    search_depth bounds each round's horizon; None searches the full
    remaining depth.  c defaults to the first round's horizon.
    """

    def __init__(
        self,
        code: TreeCode,
        m_per_round: int = 1000,
        search_depth: int | None = None,
        c: float | None = None,
        explore_policy: str = "uniform-random",
        init_n: float = 0.0,
        init_q: float = 0.0,
        explore_depth_cap: int | None = None,
        seed: int = 0,
    ):
        self.code = code
        self.m_per_round = m_per_round
        self.search_depth = search_depth
        self.c = c
        self.explore_policy = explore_policy
        self.init_n = init_n
        self.init_q = init_q
        self.explore_depth_cap = explore_depth_cap
        self.seed = seed

    def _decode(self, y, seed):
        return decode_sliding_root(
            self.code, y, self.m_per_round, self.search_depth,
            self._mcts_params(), seed=seed,
        )


class AnytimeMctsDecoder(_MctsDecoderBase):
    """Anytime decoder: one round set per received word, snapshots kept.

    The DecodeResult's snapshots list holds the greedy estimates after
    each word; snapshot i covers the first i symbols and any symbol can
    change until the last word arrives.  c defaults to the code depth d.
    """

    def __init__(
        self,
        code: TreeCode,
        m_per_round: int = 1000,
        c: float | None = None,
        explore_policy: str = "uniform-random",
        init_n: float = 0.0,
        init_q: float = 0.0,
        explore_depth_cap: int | None = None,
        seed: int = 0,
    ):
        self.code = code
        self.m_per_round = m_per_round
        self.c = c
        self.explore_policy = explore_policy
        self.init_n = init_n
        self.init_q = init_q
        self.explore_depth_cap = explore_depth_cap
        self.seed = seed

    def _decode(self, y, seed):
        return decode_anytime(self.code, y, self.m_per_round, self._mcts_params(), seed=seed)
