"""Decoding modes built on the tree search, plus soft output.

* decode_single_round: one search from the root over the full depth,
  then one greedy readout of all d symbols.
* decode_sliding_root: after each round set, commit the best root action
  and re-root one level deeper; earlier decisions are final.
* decode_anytime: for a stream of received words, round set i searches
  from the fixed root to depth i and re-reads the first i symbols, so
  earlier estimates can be revised as later words arrive.

Every round set runs with a seed derived from (seed, round_index), so a
decode is replayable from its single seed and modes can be compared
round by round.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import TreeCode
from .mcts import MctsParams, SearchStats, greedy_path, run_search_rounds
from .seeding import check_seed, derive_seed
from .validation import check_positive_int, check_received_sequence, check_word


@dataclass
class Effort:
    """Work counters accumulated over one decode."""

    rounds: int = 0
    expansions: int = 0
    reward_evals: int = 0

    def add_round_set(self, m: int, stats: SearchStats) -> None:
        self.rounds += m
        self.expansions += stats.expansions
        self.reward_evals += stats.reward_evals


@dataclass
class DecodeResult:
    """Decoder output: hard estimates, work counters, and optionally the
    per-round snapshots (anytime mode) or the final search statistics."""

    estimates: np.ndarray
    effort: Effort = field(default_factory=Effort)
    snapshots: list[np.ndarray] | None = None
    stats: SearchStats | None = None


def _resolved(params: MctsParams | None, depth: int) -> MctsParams:
    if params is None:
        params = MctsParams()
    return params.with_exploration_c(depth)


def decode_single_round(
    code: TreeCode,
    received,
    m: int,
    params: MctsParams | None = None,
    *,
    seed: int = 0,
    keep_stats: bool = False,
) -> DecodeResult:
    """Search the full tree once with m rounds and read out all symbols."""
    p = code.params
    y = check_received_sequence(received, p)
    m = check_positive_int(m, "m")
    seed = check_seed(seed)
    params = _resolved(params, p.d)
    stats = run_search_rounds(code, y, m, params, depth=p.d, seed=derive_seed(seed, 1))
    effort = Effort()
    effort.add_round_set(m, stats)
    estimates = np.array(greedy_path(stats, (), p.d), dtype=np.int64)
    return DecodeResult(estimates, effort, stats=stats if keep_stats else None)


def decode_sliding_root(
    code: TreeCode,
    received,
    m_per_round: int,
    search_depth: int | None = None,
    params: MctsParams | None = None,
    *,
    seed: int = 0,
) -> DecodeResult:
    """Commit one symbol per round set, re-rooting below each decision.

    Round set i searches from the node fixed by the first i - 1 decisions
    to depth min(search_depth, d + 1 - i), full remaining depth when
    search_depth is None.  A None exploration constant resolves to the
    first round's depth and stays fixed for the whole decode.
    """
    p = code.params
    y = check_received_sequence(received, p)
    m_per_round = check_positive_int(m_per_round, "m_per_round")
    if search_depth is not None:
        search_depth = check_positive_int(search_depth, "search_depth")
    seed = check_seed(seed)
    first_depth = p.d if search_depth is None else min(search_depth, p.d)
    params = _resolved(params, first_depth)
    effort = Effort()
    committed: list[int] = []
    for i in range(1, p.d + 1):
        remaining = p.d - len(committed)
        depth = remaining if search_depth is None else min(search_depth, remaining)
        stats = run_search_rounds(
            code, y, m_per_round, params,
            root=tuple(committed), depth=depth, seed=derive_seed(seed, i),
        )
        effort.add_round_set(m_per_round, stats)
        committed.append(greedy_path(stats, tuple(committed), 1)[0])
    return DecodeResult(np.array(committed, dtype=np.int64), effort)


def decode_anytime(
    code: TreeCode,
    received_stream,
    m_per_round: int,
    params: MctsParams | None = None,
    *,
    seed: int = 0,
) -> DecodeResult:
    """Decode a stream of received words, refining estimates as they arrive.

    After word i arrives, round set i searches from the root to depth i
    and snapshot i re-reads the first i symbols greedily; snapshot d is
    the final estimate.  Every symbol stays revisable until the end.
    """
    p = code.params
    m_per_round = check_positive_int(m_per_round, "m_per_round")
    seed = check_seed(seed)
    params = _resolved(params, p.d)
    effort = Effort()
    snapshots: list[np.ndarray] = []
    y: list[int] = []
    stream = iter(received_stream)
    for i in range(1, p.d + 1):
        try:
            word = next(stream)
        except StopIteration:
            raise ValueError(
                f"received stream ended after {i - 1} words, code depth is {p.d}"
            ) from None
        y.append(check_word(word, p.n, f"received[{i - 1}]"))
        stats = run_search_rounds(
            code, y, m_per_round, params, depth=i, seed=derive_seed(seed, i)
        )
        effort.add_round_set(m_per_round, stats)
        snapshots.append(np.array(greedy_path(stats, (), i), dtype=np.int64))
    return DecodeResult(snapshots[-1], effort, snapshots=snapshots)


@dataclass(frozen=True)
class SoftOutput:
    """Per-action posterior proxy at one node."""

    prefix: tuple[int, ...]
    beta: float
    probs: np.ndarray


def soft_output(stats: SearchStats, prefix, beta: float) -> SoftOutput:
    """Softmax of the node's action values at inverse temperature beta.

    Computed with the max-shift form, so large values cannot overflow.
    beta = 0 gives the uniform distribution; growing beta concentrates
    on the greedy action.
    """
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be a finite number >= 0, got {beta}")
    prefix = tuple(prefix)
    q = np.array(
        [stats.q_value(prefix, a) for a in range(stats.num_actions)], dtype=np.float64
    )
    z = beta * q
    z -= z.max()
    w = np.exp(z)
    return SoftOutput(prefix, float(beta), w / w.sum())
