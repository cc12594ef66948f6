"""Parsing and serialization of run/qrel files and result formatting.

File grammar (whitespace-separated tokens, blank lines skipped):
  run line:  <qid> <literal> <docid> <rank> <score> <tag>
  qrel line: <qid> <iter> <docid> <rel>
The literal, iteration and rank fields are accepted and ignored; ordering
is always re-derived from scores. Result text is tab-separated
``measure<TAB>query-or-all<TAB>value`` with 4-decimal values.
"""

from __future__ import annotations

import math
from typing import IO, Iterable, Mapping

from trevl.core import QrelSet, ResultSet, RunSet
from trevl.errors import DuplicateEntryError, ParseError


def parse_run(stream: Iterable[str]) -> RunSet:
    """Read a run file; duplicate (query, doc) pairs and bad lines raise."""
    queries: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(stream, 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 6:
            raise ParseError(lineno, f"expected 6 fields in run line, got {len(fields)}")
        qid, _literal, did, _rank, score_text, _tag = fields
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(lineno, f"non-numeric score {score_text!r}") from None
        if not math.isfinite(score):
            raise ParseError(lineno, f"non-finite score {score_text!r}")
        docs = queries.setdefault(qid, {})
        if did in docs:
            raise DuplicateEntryError(lineno, f"duplicate document {did!r} for query {qid!r}")
        docs[did] = score
    return RunSet(queries, _validated=True)


def parse_qrel(stream: Iterable[str]) -> QrelSet:
    """Read a qrel file; relevance is an integer (negatives allowed)."""
    queries: dict[str, dict[str, int]] = {}
    for lineno, line in enumerate(stream, 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 4:
            raise ParseError(lineno, f"expected 4 fields in qrel line, got {len(fields)}")
        qid, _iteration, did, rel_text = fields
        try:
            rel = int(rel_text)
        except ValueError:
            raise ParseError(lineno, f"non-integer relevance {rel_text!r}") from None
        docs = queries.setdefault(qid, {})
        if did in docs:
            raise DuplicateEntryError(lineno, f"duplicate judgment {did!r} for query {qid!r}")
        docs[did] = rel
    return QrelSet(queries, _validated=True)


def write_run(run: RunSet | Mapping[str, Mapping[str, float]], run_tag: str, stream: IO[str]) -> None:
    """Emit 6-field run lines in insertion order, scores at 6 decimals.

    The rank field is a 1-based per-query counter over emission order; it
    carries no semantics on the way back in.
    """
    queries = run.queries if isinstance(run, RunSet) else run
    lines = []
    for qid, docs in queries.items():
        for counter, (did, score) in enumerate(docs.items(), 1):
            lines.append(f"{qid} Q0 {did} {counter} {score:.6f} {run_tag}\n")
    stream.writelines(lines)


def write_qrel(qrel: QrelSet | Mapping[str, Mapping[str, int]], stream: IO[str]) -> None:
    """Emit 4-field qrel lines in insertion order."""
    queries = qrel.queries if isinstance(qrel, QrelSet) else qrel
    lines = []
    for qid, docs in queries.items():
        for did, rel in docs.items():
            lines.append(f"{qid} 0 {did} {rel}\n")
    stream.writelines(lines)


def format_results(
    results: ResultSet,
    aggregates: Mapping[str, float],
    per_query: bool = False,
) -> str:
    """Render result text: per-query lines (optional) then the "all" rows.

    Per-query lines are grouped by query id (sorted), measures in selection
    order within each group; "all" lines follow in selection order.
    """
    lines = []
    if per_query:
        for qid in sorted(results.per_query):
            values = results.per_query[qid]
            for key in results.measure_keys:
                lines.append(f"{key}\t{qid}\t{values[key]:.4f}\n")
    for key in results.measure_keys:
        lines.append(f"{key}\tall\t{aggregates[key]:.4f}\n")
    return "".join(lines)
