import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from trevl.cli import main

FIXTURES = Path(__file__).parent / "fixtures"

GOLDEN_QREL_TEXT = "q1 0 d1 1\nq1 0 d2 0\nq2 0 d2 1\n"
GOLDEN_RUN_TEXT = (
    "q1 Q0 d1 1 0.5 t\nq1 Q0 d2 2 2.0 t\n"
    "q2 Q0 d1 1 0.5 t\nq2 Q0 d2 2 0.6 t\n"
)


@pytest.fixture
def golden_files(tmp_path):
    qrel = tmp_path / "golden.qrel"
    run = tmp_path / "golden.run"
    qrel.write_text(GOLDEN_QREL_TEXT)
    run.write_text(GOLDEN_RUN_TEXT)
    return str(qrel), str(run)


class TestMainGolden:
    def test_map_and_ndcg(self, golden_files, capsys):
        assert main(["-m", "map", "-m", "ndcg", *golden_files]) == 0
        out = capsys.readouterr().out
        assert "map\tall\t0.7500\n" in out
        assert "ndcg\tall\t0.8155\n" in out

    def test_all_measures_emit_all_rows(self, golden_files, capsys):
        assert main(["-m", "all", *golden_files]) == 0
        out = capsys.readouterr().out
        all_lines = [line for line in out.splitlines() if "\tall\t" in line]
        # 6 plain measures plus two cutoff families over 9 default cutoffs
        assert len(all_lines) == 6 + 2 * 9
        assert any(line.startswith("ndcg_cut_1000\t") for line in all_lines)

    def test_default_is_all(self, golden_files, capsys):
        assert main(list(golden_files)) == 0
        assert "P_5\tall\t" in capsys.readouterr().out

    def test_per_query_lines_precede_all(self, golden_files, capsys):
        assert main(["-q", "-m", "map", *golden_files]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == ["map\tq1\t0.5000", "map\tq2\t1.0000", "map\tall\t0.7500"]

    def test_complete_mode(self, golden_files, tmp_path, capsys):
        run = tmp_path / "partial.run"
        run.write_text("q2 Q0 d2 1 0.6 t\n")
        assert main(["-c", "-m", "map", golden_files[0], str(run)]) == 0
        assert "map\tall\t0.5000\n" in capsys.readouterr().out

    def test_cutoff_restriction(self, golden_files, capsys):
        assert main(["-m", "ndcg_cut.5,10", *golden_files]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert [line.split("\t")[0] for line in lines] == ["ndcg_cut_5", "ndcg_cut_10"]

    def test_depth_cap_truncates(self, golden_files, tmp_path, capsys):
        assert main(["-M", "1", "-m", "map", *golden_files]) == 0
        out = capsys.readouterr().out
        # q1 keeps only non-relevant d2 (score 2.0), q2 keeps relevant d2
        assert "map\tall\t0.5000\n" in out


class TestMainErrors:
    def test_missing_file(self, tmp_path, capsys):
        missing = str(tmp_path / "nope.qrel")
        assert main(["-m", "map", missing, missing]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_parse_error_reports_line(self, golden_files, tmp_path, capsys):
        bad = tmp_path / "bad.run"
        bad.write_text("q1 Q0 d1 1 0.5 t\nq1 Q0 d2 oops\n")
        assert main(["-m", "map", golden_files[0], str(bad)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_unknown_measure_lists_supported(self, golden_files, capsys):
        assert main(["-m", "nope", *golden_files]) == 2
        err = capsys.readouterr().err
        assert "unknown measure" in err and "ndcg_cut" in err

    def test_no_overlap_exits_nonzero(self, golden_files, tmp_path, capsys):
        run = tmp_path / "other.run"
        run.write_text("q9 Q0 d1 1 1.0 t\n")
        assert main(["-m", "map", golden_files[0], str(run)]) == 2

    def test_bad_depth(self, golden_files, capsys):
        assert main(["-M", "0", "-m", "map", *golden_files]) == 2


class TestGoldenFixtures:
    """Recorded expected output, computed by the brute-force oracle."""

    def test_cli_matches_recorded_output(self, capsys):
        status = main([
            "-q", "-m", "map", "-m", "ndcg", "-m", "recip_rank",
            "-m", "P.5,10", "-m", "ndcg_cut.5,10",
            "-m", "num_ret", "-m", "num_rel", "-m", "num_rel_ret",
            str(FIXTURES / "graded.qrel"), str(FIXTURES / "graded.run"),
        ])
        assert status == 0
        expected = (FIXTURES / "graded.expected").read_text()
        assert capsys.readouterr().out == expected


class TestConsoleScript:
    @pytest.mark.skipif(shutil.which("trevl") is None, reason="entry point not installed")
    def test_installed_entry_point(self, golden_files):
        proc = subprocess.run(
            ["trevl", "-m", "map", *golden_files], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "map\tall\t0.7500" in proc.stdout

    def test_module_invocation(self, golden_files):
        proc = subprocess.run(
            [sys.executable, "-m", "trevl.cli", "-m", "ndcg", *golden_files],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "ndcg\tall\t0.8155" in proc.stdout
