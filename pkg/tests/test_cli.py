"""Tests for CLI commands."""

import csv
import io
import json
import shutil

import pytest
from typer.testing import CliRunner

from treesieve import __version__
from treesieve.cli import app
from treesieve.formats import read_graph
from treesieve.models import REPORT_SCHEMA


@pytest.fixture
def runner():
    """Create a CLI test runner."""
    return CliRunner()


@pytest.fixture
def corpus(tmp_path, fixtures_dir):
    """Directory holding p5 and its side files."""
    for name in ("p5.txt", "p5.coloring", "p5.frac"):
        shutil.copy(fixtures_dir / name, tmp_path / name)
    return tmp_path


class TestDetectCommand:
    """Test detect command."""

    def test_path_found(self, runner, fixtures_dir):
        result = runner.invoke(app, ["detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "5", "--l", "2", "--seed", "1"])
        assert result.exit_code == 0
        assert "YES" in result.stdout

    def test_star_has_no_four_path(self, runner, fixtures_dir):
        result = runner.invoke(app, ["detect", "--graph", str(fixtures_dir / "star3.txt"), "--k", "4", "--l", "2"])
        assert result.exit_code == 1
        assert "NO" in result.stdout

    def test_single_leaf_is_usage_error(self, runner, fixtures_dir):
        result = runner.invoke(app, ["detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "5", "--l", "1"])
        assert result.exit_code == 2
        assert "ERROR" in result.output

    def test_missing_graph_file(self, runner, tmp_path):
        result = runner.invoke(app, ["detect", "--graph", str(tmp_path / "absent.txt"), "--k", "3", "--l", "2"])
        assert result.exit_code == 2
        assert "ERROR" in result.output

    def test_malformed_graph_file(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("3\n1 4\n")
        result = runner.invoke(app, ["detect", "--graph", str(bad), "--k", "3", "--l", "2"])
        assert result.exit_code == 2

    def test_vector_needs_file(self, runner, fixtures_dir):
        result = runner.invoke(
            app, ["detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "5", "--l", "2", "--strategy", "vector"]
        )
        assert result.exit_code == 2
        assert "--vectors" in result.output

    def test_color_strategy(self, runner, fixtures_dir):
        result = runner.invoke(app, [
            "detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "5", "--l", "2",
            "--strategy", "color", "--coloring", str(fixtures_dir / "p5.coloring"), "--seed", "1", "--boost", "2",
        ])
        assert result.exit_code == 0

    def test_fixed_bipartition(self, runner, fixtures_dir):
        result = runner.invoke(app, [
            "detect", "--graph", str(fixtures_dir / "star3.txt"), "--k", "4", "--l", "3",
            "--strategy", "bipartition", "--partition", str(fixtures_dir / "star3.part"),
        ])
        assert result.exit_code == 0

    def test_json_report(self, runner, fixtures_dir):
        result = runner.invoke(app, [
            "detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "5", "--l", "2", "--seed", "1", "--json",
        ])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["schema"] == REPORT_SCHEMA
        assert report["version"] == __version__
        assert report["command"][0] == "detect"
        assert "--json" in report["command"]
        assert report["graph"] == {"n": 5, "m": 4, "max_degree": 2}
        assert report["plan"]["k"] == 5
        assert report["plan"]["t"] == 1
        assert report["verdict"]["answer"] == "YES"
        assert set(report["timings"]) == {"load", "detect"}

    def test_json_report_is_reproducible(self, runner, fixtures_dir):
        args = ["detect", "--graph", str(fixtures_dir / "p5.txt"), "--k", "4", "--l", "2", "--seed", "9", "--json"]
        first = json.loads(runner.invoke(app, args).stdout)
        second = json.loads(runner.invoke(app, args).stdout)
        first.pop("timings")
        second.pop("timings")
        assert first == second


class TestPathCommands:
    """Test kpath and ham commands."""

    def test_kpath(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kpath", "--graph", str(fixtures_dir / "p5.txt"), "--k", "4"])
        assert result.exit_code == 0

    def test_kpath_too_long(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kpath", "--graph", str(fixtures_dir / "p5.txt"), "--k", "6"])
        assert result.exit_code == 1

    def test_kpath_subcubic(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kpath", "--graph", str(fixtures_dir / "k3.txt"), "--k", "3", "--subcubic"])
        assert result.exit_code == 0
        assert "YES" in result.stdout

    def test_kpath_subcubic_rejects_dense_graph(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kpath", "--graph", str(fixtures_dir / "k5.txt"), "--k", "3", "--subcubic"])
        assert result.exit_code == 2

    def test_ham_path(self, runner, fixtures_dir):
        result = runner.invoke(app, ["ham", "--graph", str(fixtures_dir / "p5.txt")])
        assert result.exit_code == 0

    def test_ham_star(self, runner, fixtures_dir):
        result = runner.invoke(app, ["ham", "--graph", str(fixtures_dir / "star3.txt")])
        assert result.exit_code == 1

    @pytest.mark.slow
    def test_ham_petersen(self, runner, fixtures_dir):
        """The Petersen graph has a Hamiltonian path but no Hamiltonian cycle."""
        result = runner.invoke(app, ["ham", "--graph", str(fixtures_dir / "petersen.dimacs"), "--seed", "2", "--boost", "2"])
        assert result.exit_code == 0


class TestKistCommand:
    """Test kist command."""

    def test_star_has_one_internal_vertex(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kist", "--graph", str(fixtures_dir / "star3.txt"), "--k", "2"])
        assert result.exit_code == 1

    def test_path_is_internal_spanning(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kist", "--graph", str(fixtures_dir / "p5.txt"), "--k", "3"])
        assert result.exit_code == 0

    def test_json_plan_keeps_k(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kist", "--graph", str(fixtures_dir / "star3.txt"), "--k", "1", "--json"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["plan"]["k"] == 1
        assert report["verdict"]["strategy_detail"]["decided_by"]

    @pytest.mark.slow
    def test_long_path(self, runner, fixtures_dir):
        result = runner.invoke(app, ["kist", "--graph", str(fixtures_dir / "path8.txt"), "--k", "6", "--seed", "4"])
        assert result.exit_code == 0


class TestPreprocessCommand:
    """Test preprocess command."""

    def test_triangle_to_file(self, runner, fixtures_dir, tmp_path):
        out = tmp_path / "k3.weighted"
        trace = tmp_path / "trace.json"
        result = runner.invoke(
            app, ["preprocess", "--graph", str(fixtures_dir / "k3.txt"), "--out", str(out), "--trace", str(trace)]
        )
        assert result.exit_code == 0
        assert "SUCCESS" in result.stdout
        assert read_graph(out).weights == (3,)
        steps = json.loads(trace.read_text())["steps"]
        assert steps == [{"triangle": [1, 2, 3], "merged_into": 1}]

    def test_triangle_free_to_stdout(self, runner, fixtures_dir):
        result = runner.invoke(app, ["preprocess", "--graph", str(fixtures_dir / "c6.txt")])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "6"
        assert "w 1 1" in lines

    def test_degree_four_rejected(self, runner, fixtures_dir):
        result = runner.invoke(app, ["preprocess", "--graph", str(fixtures_dir / "k5.txt")])
        assert result.exit_code == 2
        assert "ERROR" in result.output


class TestBenchCommand:
    """Test bench command."""

    def test_empty_corpus(self, runner, tmp_path):
        result = runner.invoke(app, ["bench", str(tmp_path)])
        assert result.exit_code == 0
        assert "No graphs found" in result.stdout

    def test_not_a_directory(self, runner, fixtures_dir):
        result = runner.invoke(app, ["bench", str(fixtures_dir / "p5.txt")])
        assert result.exit_code == 2

    def test_unknown_format(self, runner, corpus):
        result = runner.invoke(app, ["bench", str(corpus), "--format", "xml"])
        assert result.exit_code == 2

    def test_csv_rows(self, runner, corpus):
        result = runner.invoke(
            app, ["bench", str(corpus), "--k", "3", "--k", "4", "--strategy", "random", "--strategy", "color", "--format", "csv"]
        )
        assert result.exit_code == 0
        rows = list(csv.DictReader(io.StringIO(result.stdout)))
        assert len(rows) == 4
        assert {row["strategy"] for row in rows} == {"random", "color"}
        assert all(row["graph"] == "p5.txt" for row in rows)
        assert all(0.0 <= float(row["success_frequency"]) <= 1.0 for row in rows)

    def test_json_rows(self, runner, corpus):
        result = runner.invoke(app, ["bench", str(corpus), "--k", "4", "--format", "json", "--repeat", "2"])
        assert result.exit_code == 0
        rows = json.loads(result.stdout)
        assert rows[0]["k"] == 4
        assert rows[0]["n"] == 5
        assert rows[0]["budget_ratio"] == pytest.approx(rows[0]["r"] / 4, abs=1e-6)

    def test_missing_vectors_skipped(self, runner, corpus):
        result = runner.invoke(app, ["bench", str(corpus), "--strategy", "vector", "--format", "csv"])
        assert result.exit_code == 0
        assert "skipping" in result.output
        assert "p5.txt,5" not in result.output

    def test_histogram(self, runner, corpus):
        result = runner.invoke(
            app, ["bench", str(corpus), "--k", "5", "--histogram", "--samples", "400", "--format", "json"]
        )
        assert result.exit_code == 0
        rows = json.loads(result.stdout)
        assert rows
        assert sum(row["frequency"] for row in rows) == pytest.approx(1.0)
        assert rows[-1]["cumulative"] == pytest.approx(1.0)
        assert all(row["l"] == 2 for row in rows)

    def test_output_file(self, runner, corpus, tmp_path):
        target = tmp_path / "bench.csv"
        result = runner.invoke(app, ["bench", str(corpus), "--k", "3", "--format", "csv", "--output", str(target)])
        assert result.exit_code == 0
        header = target.read_text().splitlines()[0]
        assert header.split(",")[0] == "graph"
        assert header.split(",")[-1] == "budget_ratio"


class TestVersionCommand:
    """Test version command."""

    def test_version(self, runner):
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert __version__ in result.stdout
