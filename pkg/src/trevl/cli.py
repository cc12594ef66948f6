"""trec_eval-style command line front end.

Usage: trevl [-q] [-c] [-M depth] -m <measure> ... <qrel-file> <run-file>

Measure flags repeat: ``-m map -m ndcg``. Cutoff families accept a
restriction suffix (``-m ndcg_cut.5,10``); ``-m all`` (or no -m at all)
selects every supported measure. Exit status is 0 when at least one query
was evaluated, 2 on usage, file or parse errors.
"""

from __future__ import annotations

import argparse
import sys

from trevl.core import (
    Evaluator,
    MeasureSelection,
    RunSet,
    aggregate,
    supported_measures,
)
from trevl.errors import ParseError
from trevl.trecio import format_results, parse_qrel, parse_run


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trevl",
        description="Evaluate a retrieval run against relevance judgments.",
    )
    parser.add_argument("-m", dest="measures", action="append", metavar="MEASURE",
                        help="measure to compute (repeatable); 'all' selects every "
                             "supported measure; cutoff families accept e.g. ndcg_cut.5,10")
    parser.add_argument("-q", dest="per_query", action="store_true",
                        help="also print per-query values")
    parser.add_argument("-c", dest="complete", action="store_true",
                        help="average over all judged queries, counting missing ones as 0")
    parser.add_argument("-M", dest="depth", type=int, default=1000, metavar="DEPTH",
                        help="evaluate only the top DEPTH documents per query (default 1000)")
    parser.add_argument("qrel_file")
    parser.add_argument("run_file")
    return parser


def _resolve_measures(flags: list[str] | None) -> MeasureSelection:
    if not flags or "all" in flags:
        return MeasureSelection(supported_measures())
    identifiers: list[str] = []
    for flag in flags:
        name, dot, suffix = flag.partition(".")
        if dot:
            try:
                ks = [int(tok) for tok in suffix.split(",") if tok]
            except ValueError:
                raise ValueError(f"bad cutoff list in {flag!r}") from None
            if not ks or any(k < 1 for k in ks):
                raise ValueError(f"bad cutoff list in {flag!r}")
            # per-cutoff identifiers carry their own k
            identifiers.extend(f"{name}_{k}" for k in ks)
        else:
            identifiers.append(name)
    return MeasureSelection(identifiers)


def _truncate(run: RunSet, depth: int) -> RunSet:
    truncated: dict[str, dict[str, float]] = {}
    for qid, docs in run.queries.items():
        if len(docs) <= depth:
            truncated[qid] = docs
            continue
        items = sorted(docs.items(), key=lambda kv: (kv[1], kv[0]), reverse=True)
        truncated[qid] = dict(items[:depth])
    return RunSet(truncated, _validated=True)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.depth < 1:
        print("trevl: -M depth must be positive", file=sys.stderr)
        return 2
    try:
        selection = _resolve_measures(args.measures)
    except ValueError as exc:
        print(f"trevl: {exc}", file=sys.stderr)
        return 2

    try:
        with open(args.qrel_file, encoding="utf-8", errors="surrogateescape") as fh:
            qrel = parse_qrel(fh)
    except OSError as exc:
        print(f"trevl: cannot read qrel file: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"trevl: {args.qrel_file}: {exc}", file=sys.stderr)
        return 2
    try:
        with open(args.run_file, encoding="utf-8", errors="surrogateescape") as fh:
            run = parse_run(fh)
    except OSError as exc:
        print(f"trevl: cannot read run file: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"trevl: {args.run_file}: {exc}", file=sys.stderr)
        return 2

    evaluator = Evaluator(qrel, selection)
    results = evaluator.evaluate(_truncate(run, args.depth))
    if not results.per_query:
        print("trevl: no run query matches a judged query", file=sys.stderr)
        return 2
    aggregates = aggregate(results, "complete" if args.complete else "judged-only")
    sys.stdout.write(format_results(results, aggregates, per_query=args.per_query))
    return 0


if __name__ == "__main__":
    sys.exit(main())
