"""Command line entry points.

Exit codes: 0 success, 1 validation failure (ill-typed tree, changed graph),
2 I/O or format error.  AMNORM_WORKERS sets the number of worker processes.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, List, Optional, Sequence

from amnorm.algebra import AM_PLUS, AlgebraMode
from amnorm.amtree import evaluate, well_typed
from amnorm.errors import AmError, FormatError, TokenMismatch
from amnorm.io import read_amtrees, read_sdp, write_amtrees, write_sdp
from amnorm.metrics import corpus_graph_f, corpus_tree_f, stagewise
from amnorm.patterns import census
from amnorm.transforms import RULE_ORDER, check_order, normalize_corpus, workers_from_env

OK, INVALID, IO_ERROR = 0, 1, 2


def pmap(fn: Callable, items: Sequence, workers: int) -> List:
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(x) for x in items]


def _mode(text: str) -> AlgebraMode:
    try:
        return AlgebraMode.parse(text)
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown mode {text!r} (use AM or AM_PLUS)")


def _csv(text: str) -> List[str]:
    return [x for x in (p.strip() for p in text.split(",")) if x]


def _triples(args):
    banks = [read_amtrees(p) for p in (args.dm, args.pas, args.psd)]
    if len({len(b) for b in banks}) != 1:
        raise TokenMismatch(f"sentence counts differ: {[len(b) for b in banks]}")
    return list(zip(*banks))


def _sid(t, k):
    return t.sid if t.sid is not None else str(k + 1)


def _check(tree, mode, allow_open):
    r = well_typed(tree, mode, allow_open)
    return r.ok, r.diagnostics


def cmd_validate(args) -> int:
    trees = read_amtrees(args.trees)
    results = pmap(partial(_check, mode=args.mode, allow_open=args.allow_open), trees, workers_from_env())
    bad = 0
    for k, (t, (ok, diags)) in enumerate(zip(trees, results)):
        if ok:
            print(f"{_sid(t, k)}\tok")
        else:
            bad += 1
            print(f"{_sid(t, k)}\tFAIL\t{diags[0]}")
            for d in diags[1:]:
                print(f"\t\t{d}")
    print(f"{len(trees) - bad}/{len(trees)} well-typed", file=sys.stderr)
    return INVALID if bad else OK


def _eval(tree, mode, allow_open):
    try:
        return evaluate(tree, mode, allow_open), None
    except AmError as err:
        return None, f"{type(err).__name__}: {err}"


def cmd_eval(args) -> int:
    trees = read_amtrees(args.trees)
    results = pmap(partial(_eval, mode=args.mode, allow_open=args.allow_open), trees, workers_from_env())
    failed = [(k, msg) for k, (_, msg) in enumerate(results) if msg]
    for k, msg in failed:
        print(f"sentence {_sid(trees[k], k)}: {msg}", file=sys.stderr)
    if failed:
        return INVALID
    write_sdp([g for g, _ in results], args.output, frames=not args.no_frames)
    return OK


def cmd_patterns(args) -> int:
    report = census(_triples(args), top=args.top)
    sys.stdout.write(report.to_tsv() if args.tsv else report.to_table())
    return OK


def cmd_normalize(args) -> int:
    triples = _triples(args)
    out, report = normalize_corpus(
        triples, args.order, args.mode, args.punct_pos, check=not args.no_check, workers=workers_from_env()
    )
    os.makedirs(args.output, exist_ok=True)
    for n, bank in enumerate(("dm", "pas", "psd")):
        write_amtrees([t[n] for t in out], os.path.join(args.output, f"{bank}.amtree"))
    with open(os.path.join(args.output, "report.tsv"), "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_tsv())
    with open(os.path.join(args.output, "report.jsonl"), "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_jsonl())
    sys.stdout.write(report.summary())
    for k, msg in report.errors:
        print(f"sentence {_sid(triples[k][0], k)}: {msg}", file=sys.stderr)
    for k, bank in report.broken:
        print(f"sentence {_sid(triples[k][0], k)}: {bank.upper()} graph changed by normalization", file=sys.stderr)
    return OK if report.preserved else INVALID


def cmd_stages(args) -> int:
    report = stagewise(_triples(args), args.order, args.mode, args.punct_pos, workers_from_env())
    sys.stdout.write(report.to_table())
    return OK


def cmd_compare_trees(args) -> int:
    scores = corpus_tree_f(read_amtrees(args.a), read_amtrees(args.b))
    for name, s in zip(("UF", "A/M F", "LF"), scores):
        print(f"{name}\t{s.pct()}\tP {float(100 * s.p):.1f}\tR {float(100 * s.r):.1f}")
    return OK


def cmd_compare_graphs(args) -> int:
    frames = not args.no_frames
    s = corpus_graph_f(
        read_sdp(args.a, frames),
        read_sdp(args.b, frames),
        directed=not args.undirected,
        include_punct=not args.no_punct,
        punct_pos=args.punct_pos,
    )
    kind = "undirected" if args.undirected else "directed"
    print(f"UF ({kind})\t{s.pct()}\tP {float(100 * s.p):.1f}\tR {float(100 * s.r):.1f}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", type=_mode, default=AM_PLUS, help="algebra: AM or AM_PLUS (default)")
    common.add_argument(
        "--punct-pos", type=lambda s: frozenset(_csv(s)), default=None,
        help="comma-separated punctuation POS tags (default: tags without letters or digits)",
    )
    order = argparse.ArgumentParser(add_help=False)
    order.add_argument("--order", type=lambda s: check_order(_csv(s)), default=RULE_ORDER,
                       help="comma-separated rule order (default: %s)" % ",".join(RULE_ORDER))
    banks = argparse.ArgumentParser(add_help=False)
    for b in ("dm", "pas", "psd"):
        banks.add_argument(b, help=f"{b.upper()} .amtree file")
    open_src = argparse.ArgumentParser(add_help=False)
    open_src.add_argument("--allow-open", type=_csv, default=[], help="sources that may stay open at the root")

    p = argparse.ArgumentParser(prog="amnorm", description="AM dependency tree normalization for DM/PAS/PSD")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common, open_src], help="check that trees are well-typed")
    s.add_argument("trees")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("eval", parents=[common, open_src], help="evaluate trees to an SDP file")
    s.add_argument("trees")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--no-frames", action="store_true", help="write no frame column")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("patterns", parents=[common, banks], help="pattern signature census")
    s.add_argument("--tsv", action="store_true")
    s.add_argument("--top", type=int, default=3, help="POS tags and lemmas listed per row")
    s.set_defaults(func=cmd_patterns)

    s = sub.add_parser("normalize", parents=[common, order, banks], help="apply the normalization rules")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--no-check", action="store_true", help="skip the graph preservation check")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("stages", parents=[common, order, banks], help="tree F-scores after each rule stage")
    s.set_defaults(func=cmd_stages)

    s = sub.add_parser("compare-trees", help="UF, A/M F and LF between two tree files")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_compare_trees)

    s = sub.add_parser("compare-graphs", parents=[common], help="unlabeled F between two SDP files")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--undirected", action="store_true")
    s.add_argument("--no-punct", action="store_true", help="drop edges at punctuation tokens")
    s.add_argument("--no-frames", action="store_true", help="input files have no frame column")
    s.set_defaults(func=cmd_compare_graphs)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, OSError, TokenMismatch) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return IO_ERROR
    except AmError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
