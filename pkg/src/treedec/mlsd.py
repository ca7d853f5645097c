"""Exact decoders over the full code tree.

All three decoders return the same action sequence on the same input:

* mlsd_decode: backward dynamic programming over optimal values, then a
  forward greedy walk;
* brute_force_decode: forward accumulation of path distances over every
  leaf (the oracle the DP is checked against);
* sliding_window_full_search: per-step exhaustive search over a bounded
  lookahead window, committing one action at a time.

Ties are always broken toward the lowest action index, so every decoder
yields the lexicographically smallest optimal (or window-optimal) path.
Level-contiguous heap indexing (see codebook) lets each tree level be
processed as one vectorized sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import TreeCode, level_offset
from .validation import check_positive_int, check_received_sequence

# Refuse full-tree sweeps beyond this many leaves; callers should switch
# to the sampling decoders or the sliding window instead.
DEFAULT_MAX_LEAVES = 1 << 26

_popcount = np.bitwise_count


class TreeTooLargeError(ValueError):
    """Exact decoding was asked to sweep a tree over its size budget."""


def _check_budget(leaves: int, max_leaves: int, what: str) -> None:
    if leaves > max_leaves:
        raise TreeTooLargeError(
            f"{what} needs {leaves} leaves, over the budget of {max_leaves}; "
            "use the MCTS decoders or sliding-window search"
        )


def _accum_dtype(params):
    # cumulative metrics are bounded by n * d
    bound = params.n * params.d
    if bound <= np.iinfo(np.int16).max:
        return np.int16
    if bound <= np.iinfo(np.int32).max:
        return np.int32
    return np.int64


def _level_labels(code: TreeCode, depth: int) -> np.ndarray:
    b = code.params.num_actions
    lo = level_offset(depth, b)
    return code.labels_np[lo * b : (lo + b**depth) * b]


@dataclass
class DpTables:
    """Backward-induction tables: optimal value per node and per branch.

    v_levels[t] holds optimal values for all depth-t nodes in heap order;
    leaves are implicitly zero.  q_levels[t] has shape (nodes, actions).
    """

    params: object
    v_levels: list = field(repr=False)
    q_levels: list = field(repr=False)
    q_entries: int = 0

    def _local(self, prefix) -> int:
        loc = 0
        for a in prefix:
            loc = loc * self.params.num_actions + a
        return loc

    def v_star(self, prefix) -> int:
        """Optimal value of the subtree rooted at the node, 0 at leaves."""
        prefix = tuple(prefix)
        if len(prefix) > self.params.d:
            raise ValueError("prefix deeper than the code tree")
        if len(prefix) == self.params.d:
            return 0
        return int(self.v_levels[len(prefix)][self._local(prefix)])

    def q_star(self, prefix, action: int) -> int:
        """Optimal value of taking the action at the node."""
        prefix = tuple(prefix)
        if len(prefix) >= self.params.d:
            raise ValueError("leaf nodes have no actions")
        return int(self.q_levels[len(prefix)][self._local(prefix), action])


def _backward_sweep(code: TreeCode, y: list[int], keep_tables: bool):
    p = code.params
    b, n, d = p.num_actions, p.n, p.d
    acc = _accum_dtype(p)
    q_entries = 0
    best_levels: list[np.ndarray] = [None] * d
    v_levels: list[np.ndarray] = [None] * d if keep_tables else None
    q_levels: list[np.ndarray] = [None] * d if keep_tables else None
    v_next = None
    for depth in range(d - 1, -1, -1):
        dist = _popcount(_level_labels(code, depth) ^ y[depth])
        q = n - dist.astype(acc)
        if v_next is not None:
            q += v_next
        q = q.reshape(-1, b)
        v_next = q.max(axis=1)
        best_levels[depth] = q.argmax(axis=1)
        q_entries += q.size
        if keep_tables:
            v_levels[depth] = v_next
            q_levels[depth] = q
    return best_levels, v_levels, q_levels, q_entries


def _mlsd_counted(code: TreeCode, received, *, max_leaves: int = DEFAULT_MAX_LEAVES):
    y = check_received_sequence(received, code.params)
    _check_budget(code.params.num_leaves, max_leaves, "full-tree dynamic programming")
    best_levels, _, _, q_entries = _backward_sweep(code, y, keep_tables=False)
    b = code.params.num_actions
    actions = np.empty(code.params.d, dtype=np.int64)
    loc = 0
    for depth, best in enumerate(best_levels):
        a = int(best[loc])
        actions[depth] = a
        loc = loc * b + a
    return actions, q_entries


def mlsd_decode(code: TreeCode, received, *, max_leaves: int = DEFAULT_MAX_LEAVES) -> np.ndarray:
    """Maximum-likelihood sequence decoding by backward induction.

    Runs the exact dynamic program over the full tree and walks forward
    taking, at each node, the lowest action index among the maximizers.
    """
    actions, _ = _mlsd_counted(code, received, max_leaves=max_leaves)
    return actions


def dp_tables(code: TreeCode, received, *, max_leaves: int = 1 << 20) -> DpTables:
    """Full backward-induction tables, for inspection and consistency checks."""
    y = check_received_sequence(received, code.params)
    _check_budget(code.params.num_leaves, max_leaves, "value-table construction")
    _, v_levels, q_levels, q_entries = _backward_sweep(code, y, keep_tables=True)
    return DpTables(code.params, v_levels, q_levels, q_entries)


def _brute_counted(code: TreeCode, received, *, max_leaves: int = DEFAULT_MAX_LEAVES):
    y = check_received_sequence(received, code.params)
    p = code.params
    _check_budget(p.num_leaves, max_leaves, "leaf enumeration")
    b, acc = p.num_actions, _accum_dtype(p)
    distance_evals = 0
    cum = None
    for depth in range(p.d):
        dist = _popcount(_level_labels(code, depth) ^ y[depth]).astype(acc)
        cum = dist if cum is None else np.repeat(cum, b) + dist
        distance_evals += dist.size
    leaf = int(np.argmin(cum))  # first minimum: lexicographically smallest path
    actions = np.empty(p.d, dtype=np.int64)
    for depth in range(p.d - 1, -1, -1):
        actions[depth] = leaf % b
        leaf //= b
    return actions, distance_evals


def brute_force_decode(code: TreeCode, received, *, max_leaves: int = DEFAULT_MAX_LEAVES) -> np.ndarray:
    """Exhaustive minimum-distance decoding over all leaf paths."""
    actions, _ = _brute_counted(code, received, max_leaves=max_leaves)
    return actions


def _window_counted(
    code: TreeCode, received, window_depth: int, *, max_leaves: int = DEFAULT_MAX_LEAVES
):
    y = check_received_sequence(received, code.params)
    p = code.params
    window_depth = check_positive_int(window_depth, "window_depth")
    _check_budget(p.num_actions ** min(window_depth, p.d), max_leaves, "window enumeration")
    b, acc = p.num_actions, _accum_dtype(p)
    labels = code.labels_np
    distance_evals = 0
    actions = np.empty(p.d, dtype=np.int64)
    node = 0
    for step in range(p.d):
        width = min(window_depth, p.d - step)
        lo, hi = node, node + 1
        cum = None
        for j in range(width):
            dist = _popcount(labels[lo * b : hi * b] ^ y[step + j]).astype(acc)
            cum = dist if cum is None else np.repeat(cum, b) + dist
            distance_evals += dist.size
            lo, hi = lo * b + 1, hi * b + 1
        best = int(np.argmin(cum))
        a = best >> ((width - 1) * p.k)  # leading action of the best window path
        actions[step] = a
        node = node * b + 1 + a
    return actions, distance_evals


def sliding_window_full_search(
    code: TreeCode, received, window_depth: int, *, max_leaves: int = DEFAULT_MAX_LEAVES
) -> np.ndarray:
    """Commit one action per step after exhausting a bounded lookahead.

    At step i the decoder enumerates every path of length
    min(window_depth, d - i) below the current node, finds the minimum
    accumulated distance (ties toward the lexicographically smallest
    path), commits that path's first action, and slides forward.
    """
    actions, _ = _window_counted(code, received, window_depth, max_leaves=max_leaves)
    return actions


def path_distance(code: TreeCode, received, actions) -> int:
    """Accumulated Hamming distance between a path's labels and the
    received words, computed independently of the vectorized sweeps."""
    from .channel import hamming_distance
    from .validation import check_info_sequence

    y = check_received_sequence(received, code.params)
    path = check_info_sequence(actions, code.params)
    b = code.params.num_actions
    total = 0
    node = 0
    for depth, a in enumerate(path):
        total += hamming_distance(code.labels[node * b + a], y[depth])
        node = node * b + 1 + a
    return total
