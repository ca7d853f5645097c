import math

import numpy as np
import pytest

from treedec import (
    CodeParams,
    ChannelConfig,
    MctsParams,
    SearchStats,
    decode_anytime,
    decode_single_round,
    decode_sliding_root,
    encode,
    generate_random_code,
    greedy_path,
    run_search_rounds,
    soft_output,
    transmit_bsc,
)
from treedec.seeding import derive_seed


def noisy_instance(seed, k=1, n=2, d=8, p=0.15):
    rng = np.random.default_rng(seed)
    code = generate_random_code(CodeParams(k, n, d), seed=seed)
    info = [int(v) for v in rng.integers(0, 1 << k, size=d)]
    sent = encode(code, info)
    received = transmit_bsc(sent, ChannelConfig(p, seed=seed + 1), n)
    return code, info, [int(w) for w in received]


# ------------------------------------------------------------- single round


def test_single_round_one_playout_gives_all_zero():
    code, _, received = noisy_instance(3)
    result = decode_single_round(code, received, 1, seed=7)
    assert result.estimates.tolist() == [0] * 8
    assert result.effort.rounds == 1
    assert result.effort.reward_evals == 8


def test_single_round_effort_exact():
    code, _, received = noisy_instance(4)
    for m in (1, 10, 250):
        result = decode_single_round(code, received, m, seed=1)
        assert result.effort.rounds == m
        assert result.effort.reward_evals == m * 8
        assert result.effort.expansions <= m


def test_single_round_matches_manual_composition():
    # One round set at the root with the documented per-round seed, then a
    # greedy readout, is the whole operation.
    code, _, received = noisy_instance(5)
    m, seed = 300, 21
    result = decode_single_round(code, received, m, seed=seed, keep_stats=True)
    params = MctsParams().with_exploration_c(8)
    stats = run_search_rounds(code, received, m, params, seed=derive_seed(seed, 1))
    assert result.estimates.tolist() == greedy_path(stats, (), 8)
    for prefix in stats.expanded_prefixes():
        for a in range(2):
            assert result.stats.q_value(prefix, a) == stats.q_value(prefix, a)
            assert result.stats.n_count(prefix, a) == stats.n_count(prefix, a)


def test_single_round_stats_kept_only_on_request():
    code, _, received = noisy_instance(6)
    assert decode_single_round(code, received, 5, seed=0).stats is None
    kept = decode_single_round(code, received, 5, seed=0, keep_stats=True)
    assert isinstance(kept.stats, SearchStats)


def test_single_round_deterministic_by_seed():
    code, _, received = noisy_instance(7)
    a = decode_single_round(code, received, 200, seed=3)
    b = decode_single_round(code, received, 200, seed=3)
    c = decode_single_round(code, received, 200, seed=4)
    assert a.estimates.tolist() == b.estimates.tolist()
    assert c.estimates is not None  # seeds may coincide on easy input


def test_single_round_validation():
    code, _, received = noisy_instance(8)
    with pytest.raises(ValueError):
        decode_single_round(code, received, 0)
    with pytest.raises(ValueError):
        decode_single_round(code, received[:-1], 10)


# ------------------------------------------------------------- sliding root


def test_sliding_root_effort_full_depth():
    code, _, received = noisy_instance(9)
    d, m = 8, 50
    result = decode_sliding_root(code, received, m)
    assert len(result.estimates) == d
    assert result.effort.rounds == m * d
    assert result.effort.reward_evals == m * sum(d + 1 - i for i in range(1, d + 1))


def test_sliding_root_effort_windowed():
    code, _, received = noisy_instance(10)
    d, m, w = 8, 40, 3
    result = decode_sliding_root(code, received, m, search_depth=w)
    assert result.effort.reward_evals == m * sum(min(w, d + 1 - i) for i in range(1, d + 1))


def test_sliding_root_matches_manual_recomposition():
    # Re-root after committing the greedy action of each round set.
    code, _, received = noisy_instance(11)
    d, m, seed, w = 8, 120, 13, 4
    result = decode_sliding_root(code, received, m, search_depth=w, seed=seed)
    params = MctsParams().with_exploration_c(min(w, d))
    committed = []
    for i in range(1, d + 1):
        depth = min(w, d + 1 - i)
        stats = run_search_rounds(code, received, m, params,
                                  root=tuple(committed), depth=depth,
                                  seed=derive_seed(seed, i))
        committed.append(greedy_path(stats, tuple(committed), 1)[0])
    assert result.estimates.tolist() == committed


def test_sliding_root_window_validation():
    code, _, received = noisy_instance(12)
    with pytest.raises(ValueError):
        decode_sliding_root(code, received, 10, search_depth=0)
    # window larger than the tree is clipped, not an error
    result = decode_sliding_root(code, received, 10, search_depth=99)
    assert len(result.estimates) == 8


# ----------------------------------------------------------------- anytime


def test_anytime_snapshot_shapes():
    code, _, received = noisy_instance(13)
    result = decode_anytime(code, iter(received), 30, seed=2)
    assert len(result.snapshots) == 8
    for i, snap in enumerate(result.snapshots, start=1):
        assert len(snap) == i
        assert all(int(a) in (0, 1) for a in snap)
    assert result.estimates.tolist() == result.snapshots[-1].tolist()


def test_anytime_accepts_list_or_iterator():
    code, _, received = noisy_instance(14)
    a = decode_anytime(code, received, 25, seed=5)
    b = decode_anytime(code, iter(received), 25, seed=5)
    assert [s.tolist() for s in a.snapshots] == [s.tolist() for s in b.snapshots]


def test_anytime_snapshots_depend_only_on_seen_words():
    # Snapshot i is computed before words i+1.. arrive, so corrupting the
    # tail of the stream must not change the first i snapshots.
    code, _, received = noisy_instance(15)
    full = decode_anytime(code, received, 40, seed=9)
    for cut in (2, 5):
        garbled = received[:cut] + [0] * (8 - cut)
        other = decode_anytime(code, garbled, 40, seed=9)
        assert [s.tolist() for s in other.snapshots[:cut]] == [s.tolist() for s in full.snapshots[:cut]]


def test_anytime_round_matches_single_round_procedure():
    # Round i searches the full tree to depth i with the round seed; the
    # final round is therefore a depth-d search like the single-round mode.
    code, _, received = noisy_instance(16)
    d, m, seed = 8, 80, 33
    result = decode_anytime(code, received, m, seed=seed)
    params = MctsParams().with_exploration_c(d)
    for i in (1, 4, d):
        stats = run_search_rounds(code, received[:i], m, params, depth=i,
                                  seed=derive_seed(seed, i))
        assert result.snapshots[i - 1].tolist() == greedy_path(stats, (), i)


def test_anytime_revises_earlier_symbols():
    # Later rounds may overturn an early decision; find an instance where a
    # snapshot disagrees with a previous one on some already-seen symbol.
    found = False
    for s in range(40):
        code, _, received = noisy_instance(100 + s, p=0.25)
        result = decode_anytime(code, received, 60, seed=s)
        snaps = result.snapshots
        for i in range(1, len(snaps)):
            if snaps[i][: i].tolist() != snaps[i - 1].tolist():
                found = True
                break
        if found:
            break
    assert found


def test_anytime_effort():
    code, _, received = noisy_instance(17)
    d, m = 8, 25
    result = decode_anytime(code, received, m, seed=0)
    assert result.effort.rounds == m * d
    assert result.effort.reward_evals == m * sum(range(1, d + 1))


def test_anytime_stream_too_short():
    code, _, received = noisy_instance(18)
    with pytest.raises(ValueError, match="stream ended"):
        decode_anytime(code, iter(received[:5]), 10)


# ----------------------------------------------- cross-mode equivalences


def test_depth_one_modes_coincide():
    code = generate_random_code(CodeParams(1, 4, 1), seed=44)
    received = [0b1001]
    m, seed = 64, 77
    single = decode_single_round(code, received, m, seed=seed)
    sliding = decode_sliding_root(code, received, m, seed=seed)
    anytime = decode_anytime(code, received, m, seed=seed)
    assert single.estimates.tolist() == sliding.estimates.tolist() == anytime.estimates.tolist()
    assert anytime.snapshots[0].tolist() == single.estimates.tolist()


def test_sliding_full_depth_first_symbol_matches_single_round():
    # Round 1 of the full-depth sliding mode and the single-round mode run
    # the same root search with the same seed; their first commitments agree.
    code, _, received = noisy_instance(19)
    m, seed = 150, 8
    single = decode_single_round(code, received, m, seed=seed)
    sliding = decode_sliding_root(code, received, m, seed=seed)
    assert sliding.estimates[0] == single.estimates[0]


# -------------------------------------------------------------- soft output


def build_stats(q0, q1, n0=4.0, n1=4.0):
    params = MctsParams(init_n=lambda p, a: (n0, n1)[a],
                        init_q=lambda p, a: (q0, q1)[a])
    stats = SearchStats.for_params(2, params)
    stats.expand(())
    return stats


def test_soft_output_uniform_at_zero_beta():
    out = soft_output(build_stats(5.0, -1.0), (), 0.0)
    assert out.probs.tolist() == pytest.approx([0.5, 0.5], rel=1e-12)


def test_soft_output_example_values():
    out = soft_output(build_stats(2.0, 1.0), (), 1.0)
    expected1 = math.exp(1.0) / (1.0 + math.exp(1.0))
    assert abs(out.probs[0] - expected1) < 1e-9
    assert abs(out.probs[0] - 0.7311) < 5e-5
    assert abs(out.probs[1] - 0.2689) < 5e-5
    assert abs(sum(out.probs) - 1.0) < 1e-9


def test_soft_output_sharpens_with_beta():
    probs0 = []
    for beta in (0.5, 1.0, 2.0, 4.0, 8.0):
        probs0.append(soft_output(build_stats(3.0, 1.0), (), beta).probs[0])
    assert all(b > a for a, b in zip(probs0, probs0[1:]))
    assert soft_output(build_stats(3.0, 1.0), (), 200.0).probs.tolist() == pytest.approx(
        [1.0, 0.0], abs=1e-9)


def test_soft_output_handles_large_values_stably():
    out = soft_output(build_stats(1000.0, 999.0), (), 1.0)
    assert math.isfinite(out.probs[0])
    assert abs(sum(out.probs) - 1.0) < 1e-9


def test_soft_output_argmax_agrees_with_greedy():
    code, _, received = noisy_instance(20)
    stats = run_search_rounds(code, received, 200, seed=3)
    step = greedy_path(stats, (), 1)[0]
    out = soft_output(stats, (), 2.0)
    assert int(np.argmax(out.probs)) == step
    assert out.prefix == ()
    assert out.beta == 2.0


def test_soft_output_validation():
    stats = build_stats(1.0, 0.0)
    with pytest.raises(ValueError):
        soft_output(stats, (), -1.0)
    with pytest.raises(ValueError):
        soft_output(stats, (), float("nan"))
    with pytest.raises(ValueError):
        soft_output(stats, (0,), 1.0)  # unexpanded prefix
