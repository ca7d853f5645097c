"""Tree codes with anytime Monte-Carlo decoding.

Encoding walks a complete 2**k-ary labeled tree; decoding is either
exact (full-tree dynamic programming, leaf enumeration, or an exhaustive
sliding window) or sampled by upper-confidence tree search in single,
sliding-root, and anytime modes.  A seeded experiment harness measures
bit error rates per position and per round and emits replayable reports.
"""

from .channel import ChannelConfig, bsc_flip_words, hamming_distance, reward, transmit_bsc
from .codebook import (
    CodeFileError,
    CodeParams,
    CodeTooLargeError,
    TreeCode,
    child_index,
    encode,
    generate_random_code,
    has_duplicate_codewords,
    index_to_prefix,
    load_code,
    prefix_to_index,
    save_code,
    select_best_code,
)
from .decoders import (
    AnytimeMctsDecoder,
    BruteForceDecoder,
    MlsdDecoder,
    SingleRoundMctsDecoder,
    SlidingRootMctsDecoder,
    SlidingWindowDecoder,
    TreeDecoder,
)
from .experiment import (
    BerComparison,
    BerReport,
    ExperimentConfig,
    compare_reports,
    emit_report,
    intervals_separated,
    load_report_csv,
    run_experiment,
    wilson_interval,
)
from .mcts import (
    MctsParams,
    SearchStats,
    explore,
    greedy_path,
    run_search_rounds,
    search,
    select_action_ucb,
)
from .mlsd import (
    DpTables,
    TreeTooLargeError,
    brute_force_decode,
    dp_tables,
    mlsd_decode,
    path_distance,
    sliding_window_full_search,
)
from .modes import (
    DecodeResult,
    Effort,
    SoftOutput,
    decode_anytime,
    decode_single_round,
    decode_sliding_root,
    soft_output,
)
from .seeding import derive_seed

__version__ = "0.1.0"

__all__ = [
    "AnytimeMctsDecoder",
    "BerComparison",
    "BerReport",
    "BruteForceDecoder",
    "ChannelConfig",
    "CodeFileError",
    "CodeParams",
    "CodeTooLargeError",
    "DecodeResult",
    "DpTables",
    "Effort",
    "ExperimentConfig",
    "MctsParams",
    "MlsdDecoder",
    "SearchStats",
    "SingleRoundMctsDecoder",
    "SlidingRootMctsDecoder",
    "SlidingWindowDecoder",
    "SoftOutput",
    "TreeCode",
    "TreeDecoder",
    "TreeTooLargeError",
    "bsc_flip_words",
    "brute_force_decode",
    "child_index",
    "compare_reports",
    "decode_anytime",
    "decode_single_round",
    "decode_sliding_root",
    "derive_seed",
    "dp_tables",
    "emit_report",
    "encode",
    "explore",
    "generate_random_code",
    "greedy_path",
    "hamming_distance",
    "has_duplicate_codewords",
    "index_to_prefix",
    "intervals_separated",
    "load_code",
    "load_report_csv",
    "mlsd_decode",
    "path_distance",
    "prefix_to_index",
    "reward",
    "run_experiment",
    "run_search_rounds",
    "save_code",
    "search",
    "select_action_ucb",
    "select_best_code",
    "sliding_window_full_search",
    "soft_output",
    "transmit_bsc",
    "wilson_interval",
]
