"""Binding-backed NDCG vs. a plain-Python NDCG baseline.

The baseline below is the fastest loop-only formulation we settled on:
no numeric libraries, just sorted() over (doc, score) pairs with the same
descending score / descending doc-id order the engine uses, and explicit
log2 sums. The benchmark first checks both paths agree on the value, then
reports per-ranking-size mean and standard deviation over repetitions.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from math import log2
from typing import Mapping, NamedTuple, Sequence

from trevlbind import RelevanceEvaluator


def interpreted_ndcg(judgments: Mapping[str, int], scored: Mapping[str, float]) -> float:
    """Loop-only NDCG: linear gain, 1/log2(rank+1) discount, full depth."""
    ideal = sorted((rel for rel in judgments.values() if rel > 0), reverse=True)
    idcg = 0.0
    for i, gain in enumerate(ideal):
        idcg += gain / log2(i + 2)
    if idcg == 0.0:
        return 0.0
    ranked = sorted(scored.items(), key=lambda kv: (kv[1], kv[0]), reverse=True)
    dcg = 0.0
    for i, (doc, _score) in enumerate(ranked):
        rel = judgments.get(doc, 0)
        if rel > 0:
            dcg += rel / log2(i + 2)
    return dcg / idcg


class BenchRow(NamedTuple):
    n_docs: int
    binding_mean_s: float
    binding_std_s: float
    interpreted_mean_s: float
    interpreted_std_s: float

    @property
    def speedup(self) -> float:
        return self.interpreted_mean_s / self.binding_mean_s


def single_query_workload(n_docs: int) -> tuple[dict, dict]:
    """One query, n docs, distinct integer scores, everything relevant."""
    width = len(str(n_docs))
    docs = [f"d{j:0{width}d}" for j in range(1, n_docs + 1)]
    judgments = {doc: 1 for doc in docs}
    scored = {doc: float(n_docs - j) for j, doc in enumerate(docs)}
    return {"q1": judgments}, {"q1": scored}


def _time_calls(fn, repetitions: int, inner: int) -> tuple[float, float]:
    fn()  # warm-up
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - start) / inner)
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, std


def bench_binding_vs_interpreted(
    doc_counts: Sequence[int],
    repetitions: int = 20,
    value_tolerance: float = 1e-9,
) -> list[BenchRow]:
    """Per doc count, time both NDCG paths on a single query.

    Both paths are required to produce the same value (within
    ``value_tolerance``) before anything is timed.
    """
    rows = []
    for n_docs in doc_counts:
        qrel, run = single_query_workload(n_docs)
        evaluator = RelevanceEvaluator(qrel, {"ndcg"})
        bound_value = evaluator.evaluate(run)["q1"]["ndcg"]
        plain_value = interpreted_ndcg(qrel["q1"], run["q1"])
        if abs(bound_value - plain_value) > value_tolerance:
            raise AssertionError(
                f"NDCG paths disagree at {n_docs} docs: {bound_value} vs {plain_value}"
            )
        # batch tiny calls so each timing sample is well above clock noise
        inner = max(1, 2000 // max(n_docs, 1))
        b_mean, b_std = _time_calls(lambda: evaluator.evaluate(run), repetitions, inner)
        i_mean, i_std = _time_calls(
            lambda: interpreted_ndcg(qrel["q1"], run["q1"]), repetitions, inner
        )
        rows.append(BenchRow(n_docs, b_mean, b_std, i_mean, i_std))
    return rows


def format_rows(rows: Sequence[BenchRow]) -> str:
    lines = ["n_docs\tbinding_mean_s\tbinding_std_s\tinterpreted_mean_s\tinterpreted_std_s\tspeedup\n"]
    for row in rows:
        lines.append(
            f"{row.n_docs}\t{row.binding_mean_s:.9f}\t{row.binding_std_s:.9f}\t"
            f"{row.interpreted_mean_s:.9f}\t{row.interpreted_std_s:.9f}\t{row.speedup:.2f}\n"
        )
    return "".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trevlbind-bench",
        description="Compare binding-backed NDCG with the plain-Python baseline.",
    )
    parser.add_argument(
        "--docs",
        type=lambda s: tuple(int(tok) for tok in s.split(",") if tok),
        default=(1, 2, 3, 5, 10, 30, 100, 300, 1000),
    )
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args(argv)
    rows = bench_binding_vs_interpreted(args.docs, args.reps)
    sys.stdout.write(format_rows(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
