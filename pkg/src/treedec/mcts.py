"""Upper-confidence tree search over the code tree.

One search round descends from the root through nodes already visited,
picking actions by the UCB rule (untried actions first, lowest index);
the first unvisited node is added to the statistics table and a random
rollout runs from there to the search horizon.  Branch rewards collected
on the way down are backed up into running means on the way back.

search() is the readable recursive form of a round.  run_search_rounds()
is an iterative driver that replays exactly the same arithmetic, random
draws, and tie-breaks over a flat integer-keyed table; the two produce
bit-identical statistics and are tested against each other.  Rewards are
integers, so accumulated rollout sums are exact in floating point no
matter the summation order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from math import log, sqrt
from typing import Callable

from .channel import reward
from .codebook import TreeCode, index_to_prefix, prefix_to_index
from .seeding import check_seed
from .validation import check_prefix, check_word

EXPLORE_POLICIES = ("uniform-random", "round-robin")


@dataclass(frozen=True)
class MctsParams:
    """Search knobs.

    exploration_c None means "resolve to the search depth of the decode",
    done by the decode modes (a constant for the whole decode, also when
    per-round horizons shrink or grow).  init_n and init_q are scalars or
    callables (prefix, action) -> float, applied when a node is expanded;
    nonzero values act as priors, e.g. soft input on early symbols.
    explore_depth_cap truncates rollouts below the expanded node.
    """

    exploration_c: float | None = None
    init_n: float | Callable = 0.0
    init_q: float | Callable = 0.0
    explore_policy: str = "uniform-random"
    explore_depth_cap: int | None = None

    def __post_init__(self):
        if self.exploration_c is not None and not self.exploration_c >= 0:
            raise ValueError(f"exploration_c must be >= 0, got {self.exploration_c}")
        if self.explore_policy not in EXPLORE_POLICIES:
            raise ValueError(
                f"explore_policy must be one of {EXPLORE_POLICIES}, got {self.explore_policy!r}"
            )
        if self.explore_depth_cap is not None and self.explore_depth_cap < 1:
            raise ValueError(f"explore_depth_cap must be >= 1, got {self.explore_depth_cap}")

    def with_exploration_c(self, depth: int) -> "MctsParams":
        """Resolve a None exploration constant to the given search depth."""
        if self.exploration_c is not None:
            return self
        return replace(self, exploration_c=float(depth))


class _UniformPolicy:
    """Rollout policy drawing actions uniformly, one RNG call per step."""

    kind = "uniform-random"
    __slots__ = ("bits",)

    def __init__(self, num_actions: int):
        self.bits = num_actions.bit_length() - 1

    def __call__(self, rng: random.Random) -> int:
        return rng.getrandbits(self.bits)


class _RoundRobinPolicy:
    """Rollout policy cycling deterministically through the actions."""

    kind = "round-robin"
    __slots__ = ("num_actions", "next_action")

    def __init__(self, num_actions: int):
        self.num_actions = num_actions
        self.next_action = 0

    def __call__(self, rng: random.Random) -> int:
        a = self.next_action
        self.next_action = (a + 1) % self.num_actions
        return a


def _make_policy(name: str, num_actions: int):
    if name == "uniform-random":
        return _UniformPolicy(num_actions)
    if name == "round-robin":
        return _RoundRobinPolicy(num_actions)
    raise ValueError(f"unknown explore policy {name!r}")


class SearchStats:
    """Visit counts and value estimates for the nodes a search has touched.

    Nodes are keyed internally by heap index; each expanded node owns one
    flat record [N(a0)..N(aB-1), Q(a0)..Q(aB-1)].  The rollout policy
    lives here too, so its state (the round-robin pointer) persists for
    the lifetime of one decode.  expansions and reward_evals count the
    work done by every search round run against these statistics.
    """

    def __init__(
        self,
        num_actions: int,
        init_n: float | Callable = 0.0,
        init_q: float | Callable = 0.0,
        explore_policy: str = "uniform-random",
    ):
        if num_actions < 2 or num_actions & (num_actions - 1):
            raise ValueError(f"num_actions must be a power of two >= 2, got {num_actions}")
        self.num_actions = num_actions
        self.init_n = init_n
        self.init_q = init_q
        self._scalar_init = not (callable(init_n) or callable(init_q))
        if self._scalar_init:
            self._template = [float(init_n)] * num_actions + [float(init_q)] * num_actions
        else:
            self._template = None
        self._table: dict[int, list[float]] = {}
        self.policy = _make_policy(explore_policy, num_actions)
        self.expansions = 0
        self.reward_evals = 0

    @classmethod
    def for_params(cls, num_actions: int, params: MctsParams) -> "SearchStats":
        return cls(num_actions, params.init_n, params.init_q, params.explore_policy)

    # -- record management ---------------------------------------------------

    def _make_record(self, index: int) -> list[float]:
        if self._scalar_init:
            return self._template.copy()
        prefix = index_to_prefix(index, self.num_actions)
        fn, fq = self.init_n, self.init_q
        rec = [float(fn(prefix, a)) if callable(fn) else float(fn) for a in range(self.num_actions)]
        rec += [float(fq(prefix, a)) if callable(fq) else float(fq) for a in range(self.num_actions)]
        return rec

    def _expand_index(self, index: int) -> list[float]:
        if index in self._table:
            raise ValueError(f"node {index} already expanded")
        rec = self._make_record(index)
        self._table[index] = rec
        self.expansions += 1
        return rec

    def expand(self, prefix) -> None:
        """Add a node to the table with its initial counts and values."""
        self._expand_index(prefix_to_index(prefix, self.num_actions))

    def _record_for(self, prefix) -> list[float]:
        rec = self._table.get(prefix_to_index(prefix, self.num_actions))
        if rec is None:
            raise ValueError(f"node {tuple(prefix)} is not expanded")
        return rec

    # -- public queries --------------------------------------------------------

    def __contains__(self, prefix) -> bool:
        return prefix_to_index(prefix, self.num_actions) in self._table

    def is_expanded(self, prefix) -> bool:
        return prefix in self

    def __len__(self) -> int:
        return len(self._table)

    def expanded_prefixes(self) -> set[tuple[int, ...]]:
        return {index_to_prefix(i, self.num_actions) for i in self._table}

    def n_count(self, prefix, action: int) -> float:
        return self._record_for(prefix)[action]

    def q_value(self, prefix, action: int) -> float:
        return self._record_for(prefix)[self.num_actions + action]

    def n_total(self, prefix) -> float:
        rec = self._record_for(prefix)
        total = 0.0
        for a in range(self.num_actions):
            total += rec[a]
        return total

    def init_q_for(self, prefix, action: int) -> float:
        """Initial value a node would get on expansion (used for greedy
        walks through nodes the search never reached)."""
        if callable(self.init_q):
            return float(self.init_q(tuple(prefix), action))
        return float(self.init_q)


def _ucb_action(rec: list[float], num_actions: int, c: float) -> int:
    """Canonical selection over one record: untried actions first (lowest
    index), otherwise argmax of Q + c * sqrt(log(N(s)) / N(s,a)) with ties
    toward the lowest index.  N(s) is recomputed as the sum of the action
    counts on every call.  log(N(s)) is clamped at zero, which only
    matters for fractional prior counts below one."""
    for a in range(num_actions):
        if rec[a] == 0.0:
            return a
    total = 0.0
    for a in range(num_actions):
        total += rec[a]
    log_total = log(total) if total > 1.0 else 0.0
    best = 0
    best_score = rec[num_actions] + c * sqrt(log_total / rec[0])
    for a in range(1, num_actions):
        score = rec[num_actions + a] + c * sqrt(log_total / rec[a])
        if score > best_score:
            best, best_score = a, score
    return best


def select_action_ucb(stats: SearchStats, prefix, exploration_c: float) -> int:
    """UCB action choice at an expanded node."""
    if exploration_c is None or not exploration_c >= 0:
        raise ValueError(f"exploration_c must be a number >= 0, got {exploration_c}")
    return _ucb_action(stats._record_for(prefix), stats.num_actions, exploration_c)


def explore(prefix, depth_remaining: int, received, code: TreeCode, policy, rng) -> float:
    """Default-policy rollout: walk depth_remaining steps below the node,
    drawing each action from the policy, and return the summed rewards."""
    return _explore(tuple(prefix), depth_remaining, received, code, policy, rng, None)


def _explore(prefix, depth_remaining, received, code, policy, rng, stats):
    if depth_remaining <= 0:
        return 0.0
    a = policy(rng)
    r = reward(code.branch_label(prefix, a), received[len(prefix)], code.params.n)
    if stats is not None:
        stats.reward_evals += 1
    return r + _explore(prefix + (a,), depth_remaining - 1, received, code, policy, rng, stats)


def search(
    stats: SearchStats,
    prefix,
    depth_remaining: int,
    received,
    code: TreeCode,
    params: MctsParams,
    rng: random.Random,
) -> float:
    """One search round from the given node, recursive reference form.

    Returns the reward accumulated between this node and the bottom of
    the round (selection rewards plus rollout rewards); 0 at the horizon.
    Requires a numeric exploration_c (see MctsParams.with_exploration_c).
    """
    if depth_remaining <= 0:
        return 0.0
    c = params.exploration_c
    if c is None:
        raise ValueError(
            "exploration_c is unresolved; call params.with_exploration_c(depth) first"
        )
    prefix = tuple(prefix)
    if len(received) < len(prefix) + depth_remaining:
        raise ValueError("received sequence shorter than the search horizon")
    if prefix not in stats:
        stats.expand(prefix)
        rollout = depth_remaining
        if params.explore_depth_cap is not None:
            rollout = min(rollout, params.explore_depth_cap)
        return _explore(prefix, rollout, received, code, stats.policy, rng, stats)
    a = select_action_ucb(stats, prefix, c)
    r = reward(code.branch_label(prefix, a), received[len(prefix)], code.params.n)
    stats.reward_evals += 1
    q = r + search(stats, prefix + (a,), depth_remaining - 1, received, code, params, rng)
    rec = stats._record_for(prefix)
    rec[a] += 1.0
    count = rec[a]
    slot = stats.num_actions + a
    rec[slot] = (1.0 - 1.0 / count) * rec[slot] + q / count
    return q


def greedy_path(stats: SearchStats, start, length: int) -> list[int]:
    """Follow argmax-Q actions from start for the given number of steps.

    Ties go to the lowest action index.  Nodes the search never expanded
    contribute their would-be initial values, so with all-zero init_q the
    walk continues with action 0.
    """
    start = tuple(start)
    if length < 0:
        raise ValueError(f"length must be >= 0, got {length}")
    if length > 0 and start not in stats:
        raise ValueError("start node is not expanded")
    b = stats.num_actions
    table = stats._table
    out: list[int] = []
    prefix = start
    index = prefix_to_index(start, b)
    for _ in range(length):
        rec = table.get(index)
        if rec is not None:
            best, best_q = 0, rec[b]
            for a in range(1, b):
                if rec[b + a] > best_q:
                    best, best_q = a, rec[b + a]
        else:
            best, best_q = 0, stats.init_q_for(prefix, 0)
            for a in range(1, b):
                q0 = stats.init_q_for(prefix, a)
                if q0 > best_q:
                    best, best_q = a, q0
        out.append(best)
        prefix = prefix + (best,)
        index = index * b + 1 + best
    return out


def run_search_rounds(
    code: TreeCode,
    received,
    m: int,
    params: MctsParams | None = None,
    *,
    root=(),
    depth: int | None = None,
    seed: int = 0,
    rng: random.Random | None = None,
) -> SearchStats:
    """Run m search rounds from a root node and return the statistics.

    received must cover the searched levels: word t is matched against
    branches at depth t, so len(received) >= len(root) + depth.  depth
    defaults to the full remaining height.  A None exploration_c resolves
    to depth.  The iterative driver below replays the recursive search()
    exactly: same draws, same arithmetic, same tie-breaks.
    """
    p = code.params
    if params is None:
        params = MctsParams()
    root = check_prefix(root, p)
    if depth is None:
        depth = p.d - len(root)
    if not 0 <= depth <= p.d - len(root):
        raise ValueError(f"depth must be in [0, {p.d - len(root)}], got {depth}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    y = [check_word(w, p.n, f"received[{i}]") for i, w in enumerate(received)]
    if len(y) < len(root) + depth:
        raise ValueError(
            f"received must cover {len(root) + depth} levels, got {len(y)}"
        )
    if rng is None:
        rng = random.Random(check_seed(seed))
    c = params.exploration_c
    if c is None:
        c = float(depth)
    stats = SearchStats.for_params(p.num_actions, params)
    if depth == 0 or m == 0:
        return stats
    _drive_rounds(stats, code, y, m, float(c), root, depth, params.explore_depth_cap, rng)
    return stats


def _drive_rounds(stats, code, y, m, c, root, depth, cap, rng):
    """Iterative replay of m recursive search rounds (hot loop)."""
    p = code.params
    b = p.num_actions
    n_bits = p.n
    labels = code.labels
    root_depth = len(root)
    root_index = prefix_to_index(root, b)
    table = stats._table
    template = stats._template
    scalar_init = stats._scalar_init
    uniform = stats.policy.kind == "uniform-random"
    rr_next = 0 if uniform else stats.policy.next_action
    getrandbits = rng.getrandbits
    expansions = 0
    reward_evals = 0

    # reward lookup per relative level: rtabs[j][w] = reward of word w at
    # absolute depth root_depth + j (skipped for wide labels)
    if n_bits <= 16:
        rtabs = [
            [n_bits - (w ^ y[root_depth + j]).bit_count() for w in range(1 << n_bits)]
            for j in range(depth)
        ]
    else:
        rtabs = None

    if b == 2 and rtabs is not None:
        table_get = table.get
        local_log, local_sqrt = log, sqrt
        for _ in range(m):
            s = root_index
            lvl = 0
            q = 0.0
            path: list = []
            append = path.append
            while lvl < depth:
                rec = table_get(s)
                if rec is None:
                    if scalar_init:
                        rec = template.copy()
                    else:
                        rec = stats._make_record(s)
                    table[s] = rec
                    expansions += 1
                    steps = depth - lvl if cap is None else min(cap, depth - lvl)
                    reward_evals += steps
                    end = lvl + steps
                    if uniform:
                        while lvl < end:
                            a = getrandbits(1)
                            q += rtabs[lvl][labels[s + s + a]]
                            s = s + s + 1 + a
                            lvl += 1
                    else:
                        while lvl < end:
                            a = rr_next
                            rr_next = a ^ 1
                            q += rtabs[lvl][labels[s + s + a]]
                            s = s + s + 1 + a
                            lvl += 1
                    break
                n0 = rec[0]
                if n0 == 0.0:
                    a = 0
                else:
                    n1 = rec[1]
                    if n1 == 0.0:
                        a = 1
                    else:
                        total = n0 + n1
                        log_total = local_log(total) if total > 1.0 else 0.0
                        s0 = rec[2] + c * local_sqrt(log_total / n0)
                        s1 = rec[3] + c * local_sqrt(log_total / n1)
                        a = 0 if s0 >= s1 else 1
                append((rec, a, rtabs[lvl][labels[s + s + a]]))
                s = s + s + 1 + a
                lvl += 1
            reward_evals += len(path)
            for rec, a, r in reversed(path):
                q = r + q
                rec[a] += 1.0
                count = rec[a]
                slot = 2 + a
                rec[slot] = (1.0 - 1.0 / count) * rec[slot] + q / count
    else:
        k_bits = p.k
        for _ in range(m):
            s = root_index
            lvl = 0
            q = 0.0
            path = []
            while lvl < depth:
                rec = table.get(s)
                if rec is None:
                    if scalar_init:
                        rec = template.copy()
                    else:
                        rec = stats._make_record(s)
                    table[s] = rec
                    expansions += 1
                    steps = depth - lvl if cap is None else min(cap, depth - lvl)
                    reward_evals += steps
                    end = lvl + steps
                    while lvl < end:
                        if uniform:
                            a = getrandbits(k_bits)
                        else:
                            a = rr_next
                            rr_next = (a + 1) % b
                        w = labels[s * b + a]
                        if rtabs is not None:
                            q += rtabs[lvl][w]
                        else:
                            q += n_bits - (w ^ y[root_depth + lvl]).bit_count()
                        s = s * b + 1 + a
                        lvl += 1
                    break
                a = -1
                for i in range(b):
                    if rec[i] == 0.0:
                        a = i
                        break
                if a < 0:
                    total = 0.0
                    for i in range(b):
                        total += rec[i]
                    log_total = log(total) if total > 1.0 else 0.0
                    a = 0
                    best_score = rec[b] + c * sqrt(log_total / rec[0])
                    for i in range(1, b):
                        score = rec[b + i] + c * sqrt(log_total / rec[i])
                        if score > best_score:
                            a, best_score = i, score
                w = labels[s * b + a]
                if rtabs is not None:
                    r = rtabs[lvl][w]
                else:
                    r = n_bits - (w ^ y[root_depth + lvl]).bit_count()
                path.append((rec, a, r))
                s = s * b + 1 + a
                lvl += 1
            reward_evals += len(path)
            for i in range(len(path) - 1, -1, -1):
                rec, a, r = path[i]
                q = r + q
                rec[a] += 1.0
                count = rec[a]
                slot = b + a
                rec[slot] = (1.0 - 1.0 / count) * rec[slot] + q / count

    if not uniform:
        stats.policy.next_action = rr_next
    stats.expansions += expansions
    stats.reward_evals += reward_evals
