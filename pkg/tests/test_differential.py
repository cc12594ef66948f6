"""Differential comparison against a reference trec_eval binary.

These tests only run when a reference executable is available (the
``TREC_EVAL_BIN`` environment variable, or ``trec_eval`` on PATH).
Without one, compatibility is covered by the oracle-equivalence suite and
the recorded fixtures in tests/fixtures/ (see test_cli / test_acceptance).
"""

import os
import shutil
import subprocess

import numpy as np
import pytest

from conftest import random_instance
from trevl.cli import main
from trevl.trecio import write_qrel, write_run

REFERENCE = os.environ.get("TREC_EVAL_BIN") or shutil.which("trec_eval")

pytestmark = pytest.mark.skipif(
    REFERENCE is None,
    reason="no reference trec_eval executable (set TREC_EVAL_BIN to enable)",
)

MEASURES = ["map", "ndcg", "recip_rank", "P.5,10", "ndcg_cut.5,10"]


def reference_values(qrel_path, run_path):
    cmd = [REFERENCE, "-q"]
    for measure in MEASURES:
        cmd.extend(["-m", measure])
    cmd.extend([str(qrel_path), str(run_path)])
    proc = subprocess.run(cmd, capture_output=True, text=True, check=True)
    values = {}
    for line in proc.stdout.splitlines():
        measure, qid, value = line.split()
        values[(measure, qid)] = float(value)
    return values


def test_random_workloads_match_reference(tmp_path, capsys):
    rng = np.random.default_rng(7)
    compared = 0
    for i in range(100):
        qrel, run = random_instance(rng, max_queries=6, max_docs=12, max_level=2)
        shared = {qid for qid in qrel if qid in run and any(r > 0 for r in qrel[qid].values())}
        if not shared:
            continue
        qrel_path = tmp_path / f"{i}.qrel"
        run_path = tmp_path / f"{i}.run"
        with open(qrel_path, "w") as fh:
            write_qrel(qrel, fh)
        with open(run_path, "w") as fh:
            write_run(run, "diff", fh)
        expected = reference_values(qrel_path, run_path)
        argv = ["-q"]
        for measure in MEASURES:
            argv.extend(["-m", measure])
        argv.extend([str(qrel_path), str(run_path)])
        assert main(argv) == 0
        for line in capsys.readouterr().out.splitlines():
            measure, qid, value = line.split("\t")
            key = (measure, qid)
            if key in expected:
                assert float(value) == pytest.approx(expected[key], abs=5e-5), key
                compared += 1
    assert compared > 0
