"""BER experiment harness: seeded trials, reports, and comparisons.

A run is fixed by one ExperimentConfig.  Trial t draws its info sequence
from derive_seed(master_seed, t, 0), its channel flip mask from
derive_seed(master_seed, t, 1), and hands the decoder
derive_seed(master_seed, t, 2).  The first two streams do not depend on
the decoder, so runs that differ only in the decoder see identical
messages and noise (common random numbers) and their BER differences are
paired, not sampling artifacts.

Reports hold raw error counts per (bit, round) cell; CSV and JSON-lines
emission is deterministic, so identical configs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .channel import bsc_flip_words
from .codebook import (
    CodeParams,
    TreeCode,
    encode,
    generate_random_code,
    load_code,
    select_best_code,
)
from .decoders import (
    AnytimeMctsDecoder,
    BruteForceDecoder,
    MlsdDecoder,
    SingleRoundMctsDecoder,
    SlidingRootMctsDecoder,
    SlidingWindowDecoder,
)
from .mlsd import DEFAULT_MAX_LEAVES, TreeTooLargeError
from .seeding import check_seed, derive_seed
from .validation import check_positive_int, check_probability

DECODER_CHOICES = (
    "mlsd",
    "brute",
    "sliding-window",
    "mcts-single",
    "mcts-sliding",
    "mcts-anytime",
)

CSV_HEADER = ("decoder", "k", "n", "d", "p", "m", "C", "bit_index", "round", "trials", "errors", "ber")

# sub-seed tag for pool selection, distinct from the per-trial streams
_SELECT_TAG = 101


@dataclass
class ExperimentConfig:
    """Everything needed to replay one BER run.

    The code comes from exactly one source: a code file, a selection
    pool (pool_size members, best kept), or direct generation from
    code_seed.  trials None resolves to 20000 for codes up to depth 15
    and 5000 beyond, matching the default measurement sizes for the
    short and long reference codes.
    """

    decoder: str
    k: int | None = None
    n: int | None = None
    d: int | None = None
    crossover_p: float = 0.1
    code_seed: int | None = None
    code_file: str | None = None
    pool_size: int | None = None
    trials_per_code: int = 10000
    window: int = 10
    m: int = 1000
    search_depth: int | None = None
    c: float | None = None
    explore_policy: str = "uniform-random"
    init_n: float = 0.0
    init_q: float = 0.0
    explore_depth_cap: int | None = None
    trials: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        if self.decoder not in DECODER_CHOICES:
            raise ValueError(
                f"decoder must be one of {DECODER_CHOICES}, got {self.decoder!r}"
            )
        check_probability(self.crossover_p, "crossover_p")
        check_seed(self.master_seed)
        if self.trials is not None:
            check_positive_int(self.trials, "trials")
        sources = sum(
            x is not None for x in (self.code_file, self.pool_size, self.code_seed)
        )
        if sources != 1:
            raise ValueError(
                "specify exactly one code source: code_file, pool_size, or code_seed"
            )
        if self.code_file is None and None in (self.k, self.n, self.d):
            raise ValueError("k, n, d are required unless a code_file is given")

    @property
    def resolved_trials(self) -> int:
        if self.trials is not None:
            return self.trials
        return 20000 if (self.d or 0) <= 15 else 5000

    def code_params(self) -> CodeParams:
        return CodeParams(self.k, self.n, self.d)


def resolve_code(config: ExperimentConfig) -> TreeCode:
    """Materialize the code the config points at."""
    if config.code_file is not None:
        code = load_code(config.code_file)
        for name in ("k", "n", "d"):
            want = getattr(config, name)
            have = getattr(code.params, name)
            if want is not None and want != have:
                raise ValueError(
                    f"code file has {name}={have}, config says {name}={want}"
                )
        return code
    if config.pool_size is not None:
        return select_best_code(
            config.code_params(),
            config.pool_size,
            config.trials_per_code,
            config.crossover_p,
            derive_seed(config.master_seed, _SELECT_TAG),
        )
    return generate_random_code(config.code_params(), config.code_seed)


def make_decoder(config: ExperimentConfig, code: TreeCode):
    """Build the estimator the config names."""
    mcts_kwargs = dict(
        c=config.c,
        explore_policy=config.explore_policy,
        init_n=config.init_n,
        init_q=config.init_q,
        explore_depth_cap=config.explore_depth_cap,
    )
    if config.decoder == "mlsd":
        return MlsdDecoder(code)
    if config.decoder == "brute":
        return BruteForceDecoder(code)
    if config.decoder == "sliding-window":
        return SlidingWindowDecoder(code, window=config.window)
    if config.decoder == "mcts-single":
        return SingleRoundMctsDecoder(code, m=config.m, **mcts_kwargs)
    if config.decoder == "mcts-sliding":
        return SlidingRootMctsDecoder(
            code, m_per_round=config.m, search_depth=config.search_depth, **mcts_kwargs
        )
    if config.decoder == "mcts-anytime":
        return AnytimeMctsDecoder(code, m_per_round=config.m, **mcts_kwargs)
    raise ValueError(f"unknown decoder {config.decoder!r}")


def decoder_label(config: ExperimentConfig) -> str:
    if config.decoder == "sliding-window":
        return f"sliding-window[w={config.window}]"
    if config.decoder == "mcts-sliding":
        depth = "full" if config.search_depth is None else config.search_depth
        return f"mcts-sliding[depth={depth}]"
    return config.decoder


def _report_m_c(config: ExperimentConfig, d: int):
    """The m and C columns a run reports: None for the exact decoders,
    the resolved exploration constant for the search decoders."""
    if config.decoder in ("mlsd", "brute", "sliding-window"):
        return None, None
    if config.c is not None:
        return config.m, float(config.c)
    if config.decoder == "mcts-sliding":
        first = d if config.search_depth is None else min(config.search_depth, d)
        return config.m, float(first)
    return config.m, float(d)


def _preflight(config: ExperimentConfig, code: TreeCode) -> None:
    # budget problems must surface before any trial runs
    p = code.params
    if config.decoder in ("mlsd", "brute") and p.num_leaves > DEFAULT_MAX_LEAVES:
        raise TreeTooLargeError(
            f"{config.decoder} over a depth-{p.d} code needs {p.num_leaves} leaves, "
            f"over the budget of {DEFAULT_MAX_LEAVES}"
        )
    if config.decoder == "sliding-window":
        span = p.num_actions ** min(config.window, p.d)
        if span > DEFAULT_MAX_LEAVES:
            raise TreeTooLargeError(
                f"window {config.window} enumerates {span} paths, "
                f"over the budget of {DEFAULT_MAX_LEAVES}"
            )


def _run_trials(code: TreeCode, config: ExperimentConfig, lo: int, hi: int):
    """Run trials [lo, hi); returns error counts and effort sums."""
    p = code.params
    decoder = make_decoder(config, code)
    anytime = config.decoder == "mcts-anytime"
    n_rounds = p.d if anytime else 1
    errors = np.zeros((p.d, n_rounds), dtype=np.int64)
    rounds = expansions = reward_evals = 0
    master = config.master_seed
    for t in range(lo, hi):
        info = np.random.default_rng(derive_seed(master, t, 0)).integers(
            0, p.num_actions, size=p.d
        )
        mask = bsc_flip_words(
            np.random.default_rng(derive_seed(master, t, 1)),
            config.crossover_p,
            (p.d,),
            p.n,
        )
        received = encode(code, info) ^ mask
        result = decoder.decode(received, seed=derive_seed(master, t, 2))
        if anytime:
            for j, snap in enumerate(result.snapshots):
                errors[: j + 1, j] += snap != info[: j + 1]
        else:
            errors[:, 0] += result.estimates != info
        rounds += result.effort.rounds
        expansions += result.effort.expansions
        reward_evals += result.effort.reward_evals
    return errors, (rounds, expansions, reward_evals), hi - lo


def _run_trials_star(args):
    return _run_trials(*args)


def run_experiment(config: ExperimentConfig, *, workers: int = 1) -> "BerReport":
    """Run the configured trials and aggregate a report.

    workers > 1 splits the trial range over processes; the reduction is
    a sum of counts, so the report is identical for any worker count.
    """
    workers = check_positive_int(workers, "workers")
    code = resolve_code(config)
    _preflight(config, code)
    total = config.resolved_trials
    if workers == 1 or total < 2 * workers:
        errors, sums, done = _run_trials(code, config, 0, total)
    else:
        bounds = np.linspace(0, total, workers * 4 + 1, dtype=int)
        jobs = [
            (code, config, int(a), int(b))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_run_trials_star, jobs)
        errors = sum(p[0] for p in parts)
        sums = tuple(sum(p[1][i] for p in parts) for i in range(3))
        done = sum(p[2] for p in parts)
    p = code.params
    anytime = config.decoder == "mcts-anytime"
    m, c = _report_m_c(config, p.d)
    return BerReport(
        decoder_label=decoder_label(config),
        k=p.k,
        n=p.n,
        d=p.d,
        crossover_p=config.crossover_p,
        m=m,
        exploration_c=c,
        trials=done,
        rounds=list(range(1, p.d + 1)) if anytime else ["final"],
        errors=errors,
        effort_means={
            "rounds": sums[0] / done,
            "expansions": sums[1] / done,
            "reward_evals": sums[2] / done,
        },
        master_seed=config.master_seed,
        config=asdict(config),
    )


@dataclass
class BerReport:
    """Error counts per (bit index, round) cell plus run metadata.

    rounds is ["final"] for one-shot decoders or [1..d] for the anytime
    decoder, where the cell (bit i, round j) exists for j >= i.
    """

    decoder_label: str
    k: int
    n: int
    d: int
    crossover_p: float
    m: int | None
    exploration_c: float | None
    trials: int
    rounds: list
    errors: np.ndarray = field(repr=False)
    effort_means: dict = field(default_factory=dict)
    master_seed: int | None = None
    config: dict | None = None

    def ber(self, bit_index: int, round_label=None) -> float:
        """BER of one bit (1-based) at a round; default the last round."""
        col = len(self.rounds) - 1 if round_label is None else self.rounds.index(round_label)
        return self.errors[bit_index - 1, col] / self.trials

    def final_errors(self) -> np.ndarray:
        """Error counts of every bit at the last round."""
        return self.errors[:, -1]

    def mean_final_ber(self) -> float:
        return float(self.final_errors().sum()) / (self.trials * self.d)

    def cells(self):
        """Yield (bit_index, round_label, errors) in emission order."""
        for bit in range(1, self.d + 1):
            for col, label in enumerate(self.rounds):
                if label != "final" and label < bit:
                    continue
                yield bit, label, int(self.errors[bit - 1, col])

    def to_rows(self):
        # csv stringifies floats via str == repr, so emission is stable
        m = "" if self.m is None else self.m
        c = "" if self.exploration_c is None else self.exploration_c
        for bit, label, errs in self.cells():
            yield (
                self.decoder_label,
                self.k,
                self.n,
                self.d,
                self.crossover_p,
                m,
                c,
                bit,
                label,
                self.trials,
                errs,
                errs / self.trials,
            )


def emit_report(report: BerReport, fmt: str = "csv", destination=None) -> str:
    """Serialize a report; write it out when a destination is given.

    fmt is "csv" or "json-lines" (alias "jsonl").  The text depends only
    on the report's counts and metadata, so replays match byte for byte.
    """
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(report.to_rows())
        text = buf.getvalue()
    elif fmt in ("json-lines", "jsonl"):
        lines = [
            json.dumps(dict(zip(CSV_HEADER, row)), sort_keys=False)
            for row in report.to_rows()
        ]
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f'fmt must be "csv" or "json-lines", got {fmt!r}')
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            Path(destination).write_text(text)
    return text


def load_report_csv(source) -> BerReport:
    """Rebuild a report from its CSV emission (counts and metadata only)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader, ()))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = [row for row in reader if row]
    if not rows:
        raise ValueError("report has no data rows")
    first = rows[0]
    k, n, d, trials = int(first[1]), int(first[2]), int(first[3]), int(first[9])
    label, p = first[0], float(first[4])
    m = int(first[5]) if first[5] else None
    c = float(first[6]) if first[6] else None
    round_labels: list = []
    for row in rows:
        lab = row[8] if row[8] == "final" else int(row[8])
        if lab not in round_labels:
            round_labels.append(lab)
    round_labels.sort(key=lambda x: (x == "final", x if x != "final" else 0))
    errors = np.zeros((d, len(round_labels)), dtype=np.int64)
    for row in rows:
        if (row[0], int(row[1]), int(row[2]), int(row[3]), int(row[9])) != (label, k, n, d, trials):
            raise ValueError("report mixes incompatible rows")
        lab = row[8] if row[8] == "final" else int(row[8])
        errors[int(row[7]) - 1, round_labels.index(lab)] = int(row[10])
    return BerReport(
        decoder_label=label,
        k=k,
        n=n,
        d=d,
        crossover_p=p,
        m=m,
        exploration_c=c,
        trials=trials,
        rounds=round_labels,
        errors=errors,
    )


# ---------------------------------------------------------------------------
# comparison


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= errors <= trials:
        raise ValueError("errors must be in [0, trials]")
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # the bound is exact at the extremes; don't leave rounding residue there
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def intervals_separated(errors_a: int, trials_a: int, errors_b: int, trials_b: int) -> bool:
    """True when the two 95% intervals do not overlap."""
    lo_a, hi_a = wilson_interval(errors_a, trials_a)
    lo_b, hi_b = wilson_interval(errors_b, trials_b)
    return hi_a < lo_b or hi_b < lo_a


@dataclass(frozen=True)
class BitComparison:
    bit_index: int
    errors_a: int
    errors_b: int
    ber_a: float
    ber_b: float
    ratio: float
    a_significantly_lower: bool
    b_significantly_lower: bool


@dataclass
class BerComparison:
    """Final-round BER comparison of two runs over the same trial set."""

    label_a: str
    label_b: str
    trials: int
    bits: list[BitComparison]
    mean_ber_a: float
    mean_ber_b: float

    def summary(self) -> str:
        lines = [
            f"bit  {self.label_a:>24}  {self.label_b:>24}  ratio     significant",
        ]
        for b in self.bits:
            if b.a_significantly_lower:
                sig = "a lower"
            elif b.b_significantly_lower:
                sig = "b lower"
            else:
                sig = "-"
            ratio = "inf" if math.isinf(b.ratio) else f"{b.ratio:.3f}"
            lines.append(
                f"{b.bit_index:>3}  {b.ber_a:>24.6g}  {b.ber_b:>24.6g}  {ratio:>8}  {sig}"
            )
        lines.append(
            f"mean {self.mean_ber_a:>24.6g}  {self.mean_ber_b:>24.6g}"
        )
        return "\n".join(lines)


def compare_reports(a: BerReport, b: BerReport) -> BerComparison:
    """Compare two reports bit by bit at their final rounds.

    Requires matching code shape, channel, and trial counts; the ratio is
    ber_a / ber_b with 0/0 read as 1 and x/0 as infinity.  Significance
    means non-overlapping 95% Wilson intervals.
    """
    for name in ("k", "n", "d", "crossover_p", "trials"):
        if getattr(a, name) != getattr(b, name):
            raise ValueError(
                f"reports disagree on {name}: {getattr(a, name)} vs {getattr(b, name)}"
            )
    bits = []
    ea, eb = a.final_errors(), b.final_errors()
    for i in range(a.d):
        ber_a, ber_b = ea[i] / a.trials, eb[i] / b.trials
        if ea[i] == eb[i] == 0:
            ratio = 1.0
        elif eb[i] == 0:
            ratio = math.inf
        else:
            ratio = float(ber_a / ber_b)
        sep = intervals_separated(int(ea[i]), a.trials, int(eb[i]), b.trials)
        bits.append(
            BitComparison(
                bit_index=i + 1,
                errors_a=int(ea[i]),
                errors_b=int(eb[i]),
                ber_a=float(ber_a),
                ber_b=float(ber_b),
                ratio=ratio,
                a_significantly_lower=sep and ber_a < ber_b,
                b_significantly_lower=sep and ber_b < ber_a,
            )
        )
    return BerComparison(
        label_a=a.decoder_label,
        label_b=b.decoder_label,
        trials=a.trials,
        bits=bits,
        mean_ber_a=float(ea.sum()) / (a.trials * a.d),
        mean_ber_b=float(eb.sum()) / (b.trials * b.d),
    )


# ---------------------------------------------------------------------------
# flat key = value config files


_CONFIG_FIELDS = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}


def _parse_config_value(token: str):
    token = token.strip()
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token.startswith("'") and token.endswith("'") and len(token) >= 2:
        return token[1:-1]
    low = token.lower()
    if low in ("none", "null"):
        return None
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_config_file(source) -> dict:
    """Read a flat key = value file (comments with #, strings optionally
    quoted) into a mapping of ExperimentConfig fields."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    mapping: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in mapping:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        if not (value.lstrip().startswith(('"', "'"))):
            value = value.split("#", 1)[0]
        mapping[key] = _parse_config_value(value)
    return mapping


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    unknown = set(mapping) - _CONFIG_FIELDS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**mapping)
