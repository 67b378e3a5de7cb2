"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 byte budget or length cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import analysis, oracle
from .repair import RePair, Variant
from .slp import BUDGET_ENV, CapacityError, SLPError, default_budget, serialize
from .witness import build_family, materialize_s, s_k_text
from .words import Word, from_runs, read_word, word_length

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3

VARIANTS = {"mg": Variant.MAXIMAL_STRING, "digram": Variant.DIGRAM}


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="latin-1")


def cmd_gen(args, parser) -> int:
    if args.k < 2:
        parser.error("gen needs --k >= 2")
    family = build_family(args.k)
    if args.rle:
        _write_text(args.out, s_k_text(family) + "\n")
    else:
        data = materialize_s(family, "explicit", args.budget)
        if args.out is None or args.out == "-":
            sys.stdout.buffer.write(data)
        else:
            Path(args.out).write_bytes(data)
    print(family.metadata(), file=sys.stderr)
    return EXIT_OK


def _load_input(args, parser) -> Word:
    if args.unary is not None:
        if args.unary < 1:
            parser.error("--unary needs m >= 1")
        return ((ord("a"), args.unary),)
    if args.input is None:
        parser.error("give -i/--input or --unary")
    try:
        word = read_word(args.input)
    except ValueError as exc:
        raise SLPError(f"{args.input}: {exc}") from None
    if word_length(word) < 1:
        parser.error("input word is empty")
    return word


def cmd_compress(args, parser) -> int:
    word = _load_input(args, parser)
    n = word_length(word)
    if n > args.budget:
        raise CapacityError(n, args.budget, "input")
    if args.rounds is not None and args.rounds < 0:
        parser.error("--rounds must be >= 0")

    state = RePair.from_word(word)
    traces = []
    t0 = time.perf_counter()
    state.run(VARIANTS[args.variant], traces.append, args.rounds)
    ms = (time.perf_counter() - t0) * 1000
    slp = state.to_slp()

    if args.trace:
        text = "".join(t.format(slp) + "\n" for t in traces)
        if args.trace == "-":
            sys.stderr.write(text)
        else:
            Path(args.trace).write_text(text)
    _write_text(args.out, serialize(slp) + "\n")
    summary = f"n={n} size={slp.size} rounds={state.rounds} ms={ms:.1f}"
    print(summary, file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_analyze(args, parser) -> int:
    if args.k is not None:
        if args.k < 4:
            parser.error("analyze --k needs k >= 4")
        rounds = analysis.run_k_minus_1_rounds(args.k)
        g = rounds.slp
        print(f"k={args.k} n={rounds.family.n} w={rounds.family.w}")
        for t in rounds.trace:
            print(t.format(g))
        try:
            vf = analysis.extract_v_factors(g, args.k, rounds.family)
            print("v_factors=" + vf.format(g))
        except analysis.StructureError as exc:
            print(f"structure error: {exc}")
            return EXIT_FAIL
        report = analysis.verify_claims(args.k)
        for note in report.notes:
            print(note)
        return EXIT_OK

    word = _load_input(args, parser)
    n = word_length(word)
    if isinstance(word, tuple):
        if n > args.budget:
            raise CapacityError(n, args.budget, "input")
        explicit = from_runs(word, args.budget)
    else:
        explicit = word
    cap = None if n <= analysis.HUGE_WORD else analysis.DEFAULT_FACTOR_CAP
    stats = analysis.FactorStats.of(explicit, min(n, cap or n))
    print(f"n={n}")
    for l in range(1, min(stats.max_len, 16) + 1):
        print(f"d_{l}={stats[l]}")
    print(f"lemma3_lower_bound={max(-(-stats[l] // l) for l in range(1, stats.max_len + 1))}")
    for label, variant in VARIANTS.items():
        state = RePair.from_word(word)
        state.run(variant)
        print(f"repair_{label}_size={state.size} rounds={state.rounds}")
    return EXIT_OK


def cmd_verify(args, parser) -> int:
    if args.k < 4:
        parser.error("verify needs --k >= 4")
    t0 = time.perf_counter()
    report = analysis.verify_claims(args.k)
    print(report.text())
    verdict = "PASS" if report.ok else "FAIL"
    print(f"{verdict} k={args.k} ms={(time.perf_counter() - t0) * 1000:.1f}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_bench(args, parser) -> int:
    if args.kmin < 4 or args.kmax < args.kmin:
        parser.error("bench needs 4 <= --kmin <= --kmax")
    rows = analysis.ratio_table(args.kmin, args.kmax, VARIANTS[args.variant], args.jobs)
    _write_text(args.out, analysis.to_csv(rows, args.timing))
    judged = [r for r in rows if r.k >= 6]
    increasing = analysis.ratios_increasing(rows)
    out = sys.stderr if args.out in (None, "-") else sys.stdout
    if len(judged) < 2:
        print("monotonicity: not judged (needs two rows with k >= 6)", file=out)
    else:
        print(f"monotonicity: ratio strictly increasing for k >= 6: {'yes' if increasing else 'no'}", file=out)
    print(f"ms={sum(r.ms for r in rows):.1f}", file=out)
    return EXIT_OK if increasing or len(judged) < 2 else EXIT_FAIL


def cmd_oracle(args, parser) -> int:
    if args.word is not None:
        res = oracle.smallest_slp(args.word.encode("latin-1"))
        print(f"g={res.g}")
        print(serialize(res.witness))
        return EXIT_OK
    if args.all_binary_upto is None:
        parser.error("give --word or --all-binary-upto")
    report = oracle.audit_corpus(args.all_binary_upto, jobs=args.jobs)
    if args.csv:
        Path(args.csv).write_text(report.csv())
    worst = report.worst
    print(f"words={len(report.rows)} violations={len(report.violations)} max_ratio={report.max_ratio:.4f}"
          + (f" worst={worst.word.decode('latin-1')}" if worst else ""))
    for v in report.violations[:10]:
        print(f"violation {v}")
    return EXIT_OK if not report.violations else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slpforge", description="RePair grammar compression laboratory")
    parser.add_argument("--budget", type=int, default=None,
                        help=f"byte budget for explicit words (default 2^31 or ${BUDGET_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write the witness word s_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rle", action="store_true", help="run-length text instead of raw bytes")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compress", help="run RePair and write the SLP")
    p.add_argument("-i", "--input")
    p.add_argument("--unary", type=int, metavar="M", help="compress a^M")
    p.add_argument("--variant", choices=VARIANTS, default="mg")
    p.add_argument("-o", "--out")
    p.add_argument("--trace", metavar="PATH", help="per-round trace file, '-' for stderr")
    p.add_argument("--rounds", type=int, help="stop after this many rounds")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("analyze", help="factor statistics of a word, or the round-(k-1) grammar of s_k")
    p.add_argument("-i", "--input")
    p.add_argument("--unary", type=int, metavar="M")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="check the structural claims on s_k")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="approximation ratio table over a k range")
    p.add_argument("--kmin", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="mg")
    p.add_argument("-o", "--out", help="CSV path (default stdout)")
    p.add_argument("--timing", action="store_true", help="fill the ms column")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exact smallest SLP for tiny words")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--word")
    group.add_argument("--all-binary-upto", type=int, metavar="L")
    p.add_argument("--csv", help="audit CSV path")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is None:
        args.budget = default_budget()
    try:
        return args.func(args, parser)
    except CapacityError as exc:
        print(f"slpforge: capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (SLPError, ValueError) as exc:
        print(f"slpforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
