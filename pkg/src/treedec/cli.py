"""Command-line front end.

Payload (code files, codewords, received words, reports) goes to --out
or stdout; seeds and progress notes always go to stderr.  Every
stochastic command reports the seed it ran with, so any run can be
replayed exactly.
"""

from __future__ import annotations

import argparse
import io
import secrets
import sys
from pathlib import Path

from .codebook import (
    CodeParams,
    encode,
    generate_random_code,
    load_code,
    save_code,
    select_best_code,
)
from .channel import ChannelConfig, transmit_bsc
from .experiment import (
    DECODER_CHOICES,
    ExperimentConfig,
    compare_reports,
    config_from_mapping,
    emit_report,
    load_report_csv,
    make_decoder,
    parse_config_file,
    resolve_code,
    run_experiment,
)

_STOCHASTIC_DECODERS = ("mcts-single", "mcts-sliding", "mcts-anytime")


def parse_symbols(text: str) -> list[int]:
    """Parse '0110' or '0,1,3,0' into a list of symbols."""
    text = text.strip()
    if not text:
        raise ValueError("empty symbol string")
    if "," in text:
        return [int(tok) for tok in text.split(",")]
    if not text.isdigit():
        raise ValueError(f"symbols must be digits or comma-separated integers, got {text!r}")
    return [int(ch) for ch in text]


def format_symbols(symbols) -> str:
    symbols = [int(s) for s in symbols]
    if all(s <= 9 for s in symbols):
        return "".join(str(s) for s in symbols)
    return ",".join(str(s) for s in symbols)


def read_word_lines(source) -> tuple[list[int], int]:
    """Read one binary word per line; returns the words and their width."""
    text = source.read() if hasattr(source, "read") else Path(source).read_text()
    words: list[int] = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"line {lineno}: expected a binary word, got {line!r}")
        if width is None:
            width = len(line)
        elif len(line) != width:
            raise ValueError(f"line {lineno}: width {len(line)} != {width}")
        words.append(int(line, 2))
    if width is None:
        raise ValueError("no words found")
    return words, width


def format_word_lines(words, width: int) -> str:
    return "\n".join(format(int(w), f"0{width}b") for w in words) + "\n"


def _emit_payload(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _note(message: str) -> None:
    # stdout is reserved for payload
    print(message, file=sys.stderr)


def _pick_seed(seed: int | None) -> int:
    return secrets.randbits(63) if seed is None else seed


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_gen_code(args) -> int:
    seed = _pick_seed(args.seed)
    code = generate_random_code(CodeParams(args.k, args.n, args.d), seed)
    buf = io.StringIO()
    save_code(code, buf)
    _emit_payload(buf.getvalue(), args.out)
    _note(f"generated (k={args.k}, n={args.n}, d={args.d}) code")
    _note(f"seed: {seed}")
    return 0


def _cmd_select_code(args) -> int:
    seed = _pick_seed(args.seed)
    code = select_best_code(
        CodeParams(args.k, args.n, args.d),
        args.pool_size,
        args.trials_per_code,
        args.p,
        seed,
    )
    buf = io.StringIO()
    save_code(code, buf)
    _emit_payload(buf.getvalue(), args.out)
    _note(
        f"selected best of {args.pool_size} codes "
        f"({args.trials_per_code} trials each at p={args.p})"
    )
    _note(f"selection seed: {seed}")
    _note(f"winner generation seed: {code.seed}")
    return 0


def _cmd_encode(args) -> int:
    code = load_code(args.code)
    words = encode(code, parse_symbols(args.info))
    _emit_payload(format_word_lines(words, code.params.n), args.out)
    return 0


def _cmd_transmit(args) -> int:
    words, width = read_word_lines(args.infile)
    seed = _pick_seed(args.seed)
    received = transmit_bsc(words, ChannelConfig(args.p, seed), width)
    _emit_payload(format_word_lines(received, width), args.out)
    _note(f"seed: {seed}")
    return 0


def _cmd_decode(args) -> int:
    config = ExperimentConfig(
        decoder=args.decoder,
        code_file=args.code,
        window=args.window,
        m=args.m,
        search_depth=args.search_depth,
        c=args.c,
    )
    code = resolve_code(config)
    received, width = read_word_lines(args.received)
    if width != code.params.n:
        raise ValueError(
            f"received words are {width} bits wide, code labels are {code.params.n}"
        )
    stochastic = args.decoder in _STOCHASTIC_DECODERS
    seed = _pick_seed(args.seed) if stochastic else 0
    decoder = make_decoder(config, code)
    result = decoder.decode(received, seed=seed)
    if args.snapshots and result.snapshots is not None:
        for i, snap in enumerate(result.snapshots, start=1):
            print(f"round {i}: {format_symbols(snap)}")
    print(f"decoded: {format_symbols(result.estimates)}")
    if stochastic:
        _note(f"seed: {seed}")
    return 0


def _cmd_experiment(args) -> int:
    mapping = parse_config_file(args.config) if args.config else {}
    overrides = {
        "decoder": args.decoder,
        "k": args.k,
        "n": args.n,
        "d": args.d,
        "crossover_p": args.p,
        "code_seed": args.code_seed,
        "code_file": args.code_file,
        "pool_size": args.pool_size,
        "trials_per_code": args.trials_per_code,
        "window": args.window,
        "m": args.m,
        "search_depth": args.search_depth,
        "c": args.c,
        "explore_policy": args.explore_policy,
        "explore_depth_cap": args.explore_depth_cap,
        "trials": args.trials,
        "master_seed": args.master_seed,
    }
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    config = config_from_mapping(mapping)
    report = run_experiment(config, workers=args.workers)
    text = emit_report(report, args.format)
    _emit_payload(text, args.out)
    _note(f"decoder: {report.decoder_label}")
    _note(f"trials: {report.trials}, mean final BER: {report.mean_final_ber()!r}")
    _note(f"master seed: {report.master_seed}")
    return 0


def _cmd_compare(args) -> int:
    a = load_report_csv(args.report_a)
    b = load_report_csv(args.report_b)
    print(compare_reports(a, b).summary())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treedec",
        description="Tree codes: generation, encoding, channel simulation, "
        "exact and Monte-Carlo decoding, BER experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_code_params(p):
        p.add_argument("--k", type=int, required=True, help="info bits per step")
        p.add_argument("--n", type=int, required=True, help="bits per branch label")
        p.add_argument("--d", type=int, required=True, help="tree depth (symbols per codeword)")

    p = sub.add_parser("gen-code", help="generate a random tree code")
    add_code_params(p)
    p.add_argument("--seed", type=int, default=None,
                   help="label generation seed (default: random, reported)")
    p.add_argument("--out", default=None, help="code file (default stdout)")
    p.set_defaults(func=_cmd_gen_code)

    p = sub.add_parser("select-code", help="pick the best code from a random pool")
    add_code_params(p)
    p.add_argument("--pool-size", type=int, default=50,
                   help="number of random candidate codes")
    p.add_argument("--trials-per-code", type=int, default=10000,
                   help="measurement trials per candidate")
    p.add_argument("--p", type=float, default=0.1, help="selection channel crossover probability")
    p.add_argument("--seed", type=int, default=None,
                   help="selection seed (default: random, reported)")
    p.add_argument("--out", default=None, help="code file (default stdout)")
    p.set_defaults(func=_cmd_select_code)

    p = sub.add_parser("encode", help="encode an info sequence")
    p.add_argument("--code", required=True, help="code file")
    p.add_argument("--info", required=True, help="symbols, e.g. 0110 or 0,1,1,0")
    p.add_argument("--out", default=None, help="codeword file (default stdout)")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("transmit", help="pass a codeword through the channel")
    p.add_argument("--in", dest="infile", required=True, help="codeword file")
    p.add_argument("--p", type=float, required=True, help="crossover probability")
    p.add_argument("--seed", type=int, default=None,
                   help="noise seed (default: random, reported)")
    p.add_argument("--out", default=None, help="received-word file (default stdout)")
    p.set_defaults(func=_cmd_transmit)

    p = sub.add_parser("decode", help="decode a received sequence")
    p.add_argument("--code", required=True, help="code file")
    p.add_argument("--received", required=True, help="received-word file")
    p.add_argument("--decoder", required=True, choices=DECODER_CHOICES,
                   help="decoding algorithm")
    p.add_argument("--m", type=int, default=1000, help="search rounds (per round set)")
    p.add_argument("--c", type=float, default=None, help="exploration constant (default: search depth)")
    p.add_argument("--window", type=int, default=10, help="sliding-window lookahead")
    p.add_argument("--search-depth", type=int, default=None, help="per-round horizon (mcts-sliding)")
    p.add_argument("--seed", type=int, default=None,
                   help="search seed (default: random, reported)")
    p.add_argument("--snapshots", action="store_true", help="print per-round estimates (mcts-anytime)")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("experiment", help="run a BER experiment")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--decoder", choices=DECODER_CHOICES, default=None,
                   help="decoding algorithm")
    p.add_argument("--k", type=int, default=None, help="info bits per step")
    p.add_argument("--n", type=int, default=None, help="bits per branch label")
    p.add_argument("--d", type=int, default=None, help="tree depth")
    p.add_argument("--p", type=float, default=None, help="crossover probability")
    p.add_argument("--code-seed", type=int, default=None,
                   help="use a fixed random code with this seed")
    p.add_argument("--code-file", default=None, help="use a saved code file")
    p.add_argument("--pool-size", type=int, default=None,
                   help="select the code from a pool this large")
    p.add_argument("--trials-per-code", type=int, default=None,
                   help="selection trials per pool candidate")
    p.add_argument("--window", type=int, default=None, help="sliding-window lookahead")
    p.add_argument("--m", type=int, default=None, help="search rounds per round set")
    p.add_argument("--search-depth", type=int, default=None,
                   help="per-round horizon (mcts-sliding)")
    p.add_argument("--c", type=float, default=None,
                   help="exploration constant (default: search depth)")
    p.add_argument("--explore-policy", choices=("uniform-random", "round-robin"), default=None,
                   help="playout policy beyond the expanded tree")
    p.add_argument("--explore-depth-cap", type=int, default=None,
                   help="truncate playouts at this depth")
    p.add_argument("--trials", type=int, default=None,
                   help="measurement trials (default 20000, 5000 for deep trees)")
    p.add_argument("--master-seed", type=int, default=None, help="experiment master seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--format", choices=("csv", "json-lines"), default="csv",
                   help="report format")
    p.add_argument("--out", default=None, help="report file (default stdout)")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("compare", help="compare two report CSVs bit by bit")
    p.add_argument("report_a", help="first report CSV")
    p.add_argument("report_b", help="second report CSV")
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
