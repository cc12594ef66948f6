"""Benchmark harness: in-process evaluation vs. the write/spawn/read workflow.

The in-process side times Evaluator construction plus evaluate() on
in-memory structures. The subprocess side times the full external loop:
serialize the workload to files in a scratch directory, launch a
trec_eval-compatible executable, and read its whole stdout into a string
(measure values are deliberately not extracted). Every mean is over a
monotonic clock with one untimed warm-up iteration.

``compare_kernels`` times the compiled scoring kernel against its
pure-Python twin on single-query workloads.
"""

from __future__ import annotations

import argparse
import shutil
import statistics
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from trevl.core import KERNELS, Evaluator, QrelSet, RunSet
from trevl.errors import BenchmarkError, ConfigError
from trevl.trecio import write_qrel, write_run

DEFAULT_MEASURES = ("map", "ndcg")


@dataclass(frozen=True)
class BenchConfig:
    query_counts: tuple[int, ...]
    doc_counts: tuple[int, ...]
    repetitions: int = 20
    scratch_dir: str = "."
    external_evaluator: str = ""
    measures: tuple[str, ...] = DEFAULT_MEASURES

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.query_counts or min(self.query_counts) < 1:
            raise ConfigError("query counts must be positive")
        if not self.doc_counts or min(self.doc_counts) < 1:
            raise ConfigError("document counts must be positive")


@dataclass(frozen=True)
class SpeedupCell:
    n_queries: int
    n_docs: int
    mean_in_process_s: float
    mean_subprocess_s: float

    @property
    def speedup(self) -> float:
        return self.mean_subprocess_s / self.mean_in_process_s


def synthesize_workload(n_queries: int, n_docs: int) -> tuple[QrelSet, RunSet]:
    """All-relevant workload: per query, distinct integer scores n_docs..1.

    Every ranking over such judgments is perfect, so any measure value is
    known in advance; only the evaluation cost varies with size.
    """
    if n_queries < 1 or n_docs < 1:
        raise ConfigError("workload sizes must be positive")
    qw = len(str(n_queries))
    dw = len(str(n_docs))
    doc_ids = [f"d{j:0{dw}d}" for j in range(1, n_docs + 1)]
    scores = {did: float(n_docs - j) for j, did in enumerate(doc_ids)}
    judgments = {did: 1 for did in doc_ids}
    qrel = {f"q{i:0{qw}d}": judgments for i in range(1, n_queries + 1)}
    run = {f"q{i:0{qw}d}": scores for i in range(1, n_queries + 1)}
    return QrelSet(qrel, _validated=True), RunSet(run, _validated=True)


def time_in_process(
    workload: tuple[QrelSet, RunSet],
    measures: Sequence[str] = DEFAULT_MEASURES,
    repetitions: int = 20,
    kernel: str | None = None,
) -> float:
    qrel, run = workload

    def once():
        Evaluator(qrel, measures, kernel=kernel).evaluate(run)

    once()  # warm-up
    start = time.perf_counter()
    for _ in range(repetitions):
        once()
    return (time.perf_counter() - start) / repetitions


def run_external_once(
    workload: tuple[QrelSet, RunSet],
    measures: Sequence[str],
    scratch_dir: str,
    external_evaluator: str,
) -> str:
    """One serialize-invoke-read cycle; returns the child's entire stdout."""
    qrel, run = workload
    scratch = Path(scratch_dir)
    qrel_path = scratch / "bench_qrel.txt"
    run_path = scratch / "bench_run.txt"
    try:
        with open(qrel_path, "w", encoding="utf-8") as fh:
            write_qrel(qrel, fh)
        with open(run_path, "w", encoding="utf-8") as fh:
            write_run(run, "bench", fh)
        cmd = [external_evaluator]
        for measure in measures:
            cmd.extend(["-m", measure])
        cmd.extend([str(qrel_path), str(run_path)])
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True)
        except OSError as exc:
            raise BenchmarkError(f"cannot launch {external_evaluator!r}: {exc}") from exc
        if proc.returncode != 0:
            raise BenchmarkError(
                f"{external_evaluator!r} exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        return proc.stdout
    finally:
        qrel_path.unlink(missing_ok=True)
        run_path.unlink(missing_ok=True)


def time_subprocess_workflow(
    workload: tuple[QrelSet, RunSet],
    measures: Sequence[str] = DEFAULT_MEASURES,
    repetitions: int = 20,
    scratch_dir: str = ".",
    external_evaluator: str = "",
) -> float:
    run_external_once(workload, measures, scratch_dir, external_evaluator)  # warm-up
    start = time.perf_counter()
    for _ in range(repetitions):
        run_external_once(workload, measures, scratch_dir, external_evaluator)
    return (time.perf_counter() - start) / repetitions


def speedup_grid(config: BenchConfig) -> list[SpeedupCell]:
    cells = []
    for n_queries in config.query_counts:
        for n_docs in config.doc_counts:
            workload = synthesize_workload(n_queries, n_docs)
            t_in = time_in_process(workload, config.measures, config.repetitions)
            t_sub = time_subprocess_workflow(
                workload,
                config.measures,
                config.repetitions,
                config.scratch_dir,
                config.external_evaluator,
            )
            cells.append(SpeedupCell(n_queries, n_docs, t_in, t_sub))
    return cells


def format_grid(cells: Sequence[SpeedupCell]) -> str:
    lines = ["n_queries\tn_docs\tt_inproc_s_incl_setup\tt_subproc_s\tspeedup\n"]
    for cell in cells:
        lines.append(
            f"{cell.n_queries}\t{cell.n_docs}\t{cell.mean_in_process_s:.6f}\t"
            f"{cell.mean_subprocess_s:.6f}\t{cell.speedup:.2f}\n"
        )
    return "".join(lines)


def compare_kernels(
    doc_counts: Sequence[int],
    repetitions: int = 20,
    measures: Sequence[str] = DEFAULT_MEASURES,
) -> list[tuple[int, float, float]]:
    """Per doc count: (n_docs, mean compiled seconds, mean pure seconds)."""
    if "compiled" not in KERNELS:
        raise BenchmarkError("compiled kernel is not available in this build")
    rows = []
    for n_docs in doc_counts:
        workload = synthesize_workload(1, n_docs)
        t_compiled = time_in_process(workload, measures, repetitions, kernel="compiled")
        t_pure = time_in_process(workload, measures, repetitions, kernel="pure")
        rows.append((n_docs, t_compiled, t_pure))
    return rows


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trevl-bench",
        description="Time in-process evaluation against an external evaluator workflow.",
    )
    parser.add_argument("--queries", type=_csv_ints, default=(1, 10, 100))
    parser.add_argument("--docs", type=_csv_ints, default=(1, 10, 100, 1000))
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--scratch", default=None, help="directory for serialized files")
    parser.add_argument("--external", default=None,
                        help="trec_eval-compatible executable (default: the installed trevl)")
    parser.add_argument("--measures", type=lambda s: tuple(s.split(",")), default=DEFAULT_MEASURES)
    parser.add_argument("--compare-kernels", action="store_true",
                        help="time the compiled scoring kernel against its pure-Python twin instead")
    args = parser.parse_args(argv)

    if args.compare_kernels:
        try:
            rows = compare_kernels(args.docs, args.reps, args.measures)
        except BenchmarkError as exc:
            print(f"trevl-bench: {exc}", file=sys.stderr)
            return 2
        sys.stdout.write("n_docs\tt_compiled_s\tt_pure_s\tspeedup\n")
        for n_docs, t_compiled, t_pure in rows:
            sys.stdout.write(f"{n_docs}\t{t_compiled:.6f}\t{t_pure:.6f}\t{t_pure / t_compiled:.2f}\n")
        return 0

    external = args.external or shutil.which("trevl")
    if external is None:
        print("trevl-bench: no external evaluator found; pass --external", file=sys.stderr)
        return 2
    scratch = args.scratch or tempfile.mkdtemp(prefix="trevl-bench-")
    try:
        config = BenchConfig(
            query_counts=args.queries,
            doc_counts=args.docs,
            repetitions=args.reps,
            scratch_dir=scratch,
            external_evaluator=external,
            measures=args.measures,
        )
        cells = speedup_grid(config)
    except (BenchmarkError, ConfigError) as exc:
        print(f"trevl-bench: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(format_grid(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
