"""Command line entry point: ``attack``, ``verify``, ``bench`` and ``replay-example``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .attacks import ATTACKS, CSV_COLUMNS, run_attack
from .errors import QuantLBError, SubjectLacksRankQuery, SummaryNotStreaming
from .summaries import SUMMARY_NAMES, summary_factory
from .suite import max_n_from_env, run_verify, space_trend
from .streams import StreamLog
from .universe import format_bound, parse_item
from .worked_example import replay_example

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2
MIN_EPS_INV = 17


class ConfigError(QuantLBError):
    pass


def parse_k_range(text: str) -> Tuple[int, int]:
    """``"4..10"`` or ``"4"``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B or A, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid k range {text!r}")
    return lo, hi


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    try:
        return format_bound(obj)
    except Exception:
        raise TypeError(f"not JSON serialisable: {obj!r}") from None


def dump_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True, default=_json_default)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def write_csv(rows: Sequence[dict], columns: Sequence[str], path: Optional[str]) -> None:
    if path in (None, "-"):
        writer = csv.DictWriter(sys.stdout, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _cap() -> Optional[int]:
    try:
        return max_n_from_env()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def required_length(attack: str, eps_inv: int, k: int) -> int:
    if attack == "biased":
        return eps_inv * (2 ** (k + 1) - 2)
    if attack == "median":
        return 2 * eps_inv * 2 ** k
    return eps_inv * 2 ** k


def _attack_point(attack: str, summary: str, eps_inv: int, k: int, want_trace: bool):
    outcome = run_attack(attack, summary_factory(summary, eps_inv), eps_inv, k)
    firsts = {name: paths[0] for name, paths in outcome.failures.items() if paths}
    trace = None
    if want_trace and outcome.trace is not None:
        trace = {"k": k, "details": outcome.details, "nodes": outcome.trace.to_json()["nodes"]}
    return k, outcome.csv_row(), outcome.ok, firsts, trace


def cmd_attack(args) -> int:
    m = args.eps_inv
    if m < MIN_EPS_INV:
        raise ConfigError(f"--eps-inv must be >= {MIN_EPS_INV} (eps < 1/16), got {m}")
    lo, hi = args.k
    cap = _cap()
    if cap is not None and required_length(args.attack, m, hi) > cap:
        raise ConfigError(f"k={hi} needs {required_length(args.attack, m, hi)} items; QA_MAX_N={cap}")
    probe = summary_factory(args.summary, m)()
    if not probe.streaming:
        raise SummaryNotStreaming(f"{probe.name} is an offline summary and cannot be attacked online")
    if args.attack == "rank" and not probe.supports_rank:
        raise SubjectLacksRankQuery(f"{probe.name} does not answer rank queries")
    ks = list(range(lo, hi + 1))
    want_trace = args.trace is not None
    if args.jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            n = len(ks)
            results = list(pool.map(_attack_point, [args.attack] * n, [args.summary] * n, [m] * n, ks,
                                    [want_trace] * n))
    else:
        results = [_attack_point(args.attack, args.summary, m, k, want_trace) for k in ks]
    results.sort(key=lambda r: r[0])
    write_csv([r[1] for r in results], CSV_COLUMNS, args.csv)
    if want_trace:
        dump_json({"attack": args.attack, "summary": args.summary, "eps_inv": m,
                   "runs": [r[4] for r in results]}, args.trace)
    status = EXIT_OK
    for k, row, ok, firsts, _ in results:
        if not ok:
            status = EXIT_VIOLATION
            where = ", ".join(f"{name} at {path}" for name, path in sorted(firsts.items()))
            print(f"violation k={k}: {row['witness'] or where}", file=sys.stderr)
    return status


def cmd_verify(args) -> int:
    eps_invs = [args.eps_inv] if args.eps_inv else [18, 32]
    if any(m < MIN_EPS_INV for m in eps_invs):
        raise ConfigError(f"--eps-inv must be >= {MIN_EPS_INV} (eps < 1/16)")
    lo, hi = args.k or (1, 10)
    _cap()
    names = [args.summary] if args.summary else ["gk", "gk-greedy"]
    if "offline" in names:
        raise SummaryNotStreaming("offline is finalize-only; the property suite needs a streaming summary")
    states = {} if args.dump_states else None
    results = run_verify(names=names, eps_invs=eps_invs, ks=range(lo, hi + 1), quick=args.quick, seed=args.seed,
                         jobs=args.jobs, states=states)
    if states is not None:
        dump_json(states, args.dump_states)
    return EXIT_OK if all(r.ok for r in results.values()) else EXIT_VIOLATION


def cmd_bench(args) -> int:
    m = args.eps_inv or 32
    if m < 2:
        raise ConfigError(f"--eps-inv must be >= 2 for bench, got {m}")
    lo, hi = args.k or (6, 14)
    cap = _cap()
    ks = [k for k in range(lo, hi + 1) if cap is None or m * 2 ** k <= cap]
    if not ks:
        raise ConfigError(f"every checkpoint exceeds QA_MAX_N={cap}")
    rows = space_trend(args.summary or "gk", m, ks, args.seed)
    write_csv([r.csv_row() for r in rows], list(rows[0].csv_row()), args.csv)
    return EXIT_OK


def cmd_replay(args) -> int:
    factory = summary_factory(args.summary, 6) if args.summary else None
    report = replay_example(factory)
    dump_json(report, args.trace)
    if args.dump_streams:
        out = Path(args.dump_streams)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("pi", "rho"):
            StreamLog(parse_item(s) for s in report["streams"][name]).dump(out / f"{name}.txt")
    shape_ok = (
        report["checkpoints"] == [12, 24, 36, 48]
        and report["spine"] == [12, 24, 48]
        and report["leaves"] == 4
        and report["per_leaf"] == [12] * 4
        and report["refinements"] == 3
    )
    return EXIT_OK if shape_ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantlb", description="Adversarial lower-bound harness for quantile summaries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, summary_default: Optional[str] = "gk"):
        p.add_argument("--eps-inv", type=int, help="1/eps as an integer")
        p.add_argument("--k", type=parse_k_range, help="recursion depth range A..B")
        p.add_argument("--summary", choices=SUMMARY_NAMES, default=summary_default)
        p.add_argument("--seed", type=int, default=0, help="seed for random test streams")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--csv", help="CSV output path (default stdout)")
        p.add_argument("--trace", help="JSON trace output path")

    p = sub.add_parser("attack", help="run one attack over a range of depths")
    common(p)
    p.add_argument("--attack", choices=ATTACKS, default="quantile")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("verify", help="run the property suite")
    common(p, summary_default=None)
    p.add_argument("--quick", action="store_true", help="only depths k <= 6")
    p.add_argument("--dump-states", metavar="PATH", help="write the final memory states of every run as JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="peak space of a summary on a random stream")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay-example", help="the eps = 1/6, k = 3 construction as JSON")
    common(p, summary_default=None)
    p.add_argument("--dump-streams", metavar="DIR", help="write pi.txt and rho.txt, one item per line")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "attack":
        if args.eps_inv is None or args.k is None:
            parser.error("attack needs --eps-inv and --k")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, SummaryNotStreaming, SubjectLacksRankQuery) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
