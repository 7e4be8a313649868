import json
import subprocess
import sys

import pytest

from msplot.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from msplot.dataio import format_long_csv
from msplot.fdmodel import uniform_grid, validate
from msplot.simulate import ModelSpec, model_sample

import numpy as np


@pytest.fixture
def sim_csv(tmp_path):
    lab = model_sample(ModelSpec(model_id=1, n=40, c=0.1, m=25, seed=11))
    path = tmp_path / "curves.csv"
    path.write_text(format_long_csv(lab.sample), encoding="utf-8")
    return path


class TestDetect:
    def test_happy_path_writes_outputs(self, tmp_path, sim_csv):
        out = tmp_path / "result.csv"
        svg = tmp_path / "plot.svg"
        code = main(
            [
                "detect",
                "--input", str(sim_csv),
                "--method", "srmd-f",
                "--quantile", "0.993",
                "--inflation", "1.5",
                "--directions", "200",
                "--seed", "1",
                "--out", str(out),
                "--svg", str(svg),
            ]
        )
        assert code == EXIT_OK
        header = out.read_text().splitlines()[0]
        assert header == "curve_id,mo_1,vo,fo,srmd,flagged"
        assert svg.read_bytes().startswith(b"<?xml")
        manifest = json.loads((tmp_path / "result.manifest.json").read_text())
        assert manifest["quantile"] == 0.993
        assert manifest["subcommand"] == "detect"

    def test_byte_identical_reruns(self, tmp_path, sim_csv):
        out1 = tmp_path / "r1.csv"
        out2 = tmp_path / "r2.csv"
        for out in (out1, out2):
            assert main(["detect", "--input", str(sim_csv), "--seed", "7", "--out", str(out)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_boxplot_method(self, tmp_path, sim_csv):
        out = tmp_path / "result.csv"
        code = main(
            ["detect", "--input", str(sim_csv), "--method", "boxplot", "--out", str(out)]
        )
        assert code == EXIT_OK
        first_row = out.read_text().splitlines()[1].split(",")
        assert first_row[4] == ""  # no srmd column values for the boxplot rule

    def test_missing_input_is_input_error(self, tmp_path):
        code = main(["detect", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o.csv")])
        assert code == EXIT_INPUT

    def test_degenerate_data_is_numerical_error(self, tmp_path):
        g = uniform_grid(5, (0, 1))
        sample = validate(np.tile(np.array([1.0, 1.0, 1.0, 1.0])[:, None], (1, 5)), g)
        path = tmp_path / "flat.csv"
        path.write_text(format_long_csv(sample), encoding="utf-8")
        code = main(["detect", "--input", str(path), "--out", str(tmp_path / "o.csv")])
        assert code == EXIT_NUMERICAL

    def test_malformed_csv_is_input_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("curve_id,t,dim_1\na,0.0,1.0\na,zzz,2.0\n", encoding="utf-8")
        code = main(["detect", "--input", str(path), "--out", str(tmp_path / "o.csv")])
        assert code == EXIT_INPUT


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path):
        out = tmp_path / "sim.csv"
        truth = tmp_path / "truth.csv"
        code = main(
            [
                "simulate", "--model", "2", "--n", "30", "--c", "0.1",
                "--m", "20", "--seed", "5", "--out", str(out), "--truth", str(truth),
            ]
        )
        assert code == EXIT_OK
        assert out.read_text().startswith("curve_id,t,dim_1")
        truth_lines = truth.read_text().splitlines()
        assert truth_lines[0] == "curve_id,outlier"
        assert sum(line.endswith(",true") for line in truth_lines[1:]) == 3
        assert (tmp_path / "sim.manifest.json").exists()

    def test_deterministic(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            out = tmp_path / f"sim_{tag}.csv"
            truth = tmp_path / f"truth_{tag}.csv"
            main(["simulate", "--model", "5", "--n", "15", "--m", "12", "--seed", "9",
                  "--out", str(out), "--truth", str(truth)])
            paths.append((out.read_bytes(), truth.read_bytes()))
        assert paths[0] == paths[1]

    def test_bad_model_is_input_error(self, tmp_path):
        code = main(["simulate", "--model", "9", "--out", str(tmp_path / "s.csv"),
                     "--truth", str(tmp_path / "t.csv")])
        assert code == EXIT_INPUT


class TestBench:
    def test_rates_and_summary(self, tmp_path):
        out = tmp_path / "rates.csv"
        summary = tmp_path / "summary.csv"
        code = main(
            [
                "bench", "--model", "1", "--n", "40", "--c", "0.1", "--m", "20",
                "--reps", "3", "--seed", "2", "--out", str(out), "--summary", str(summary),
            ]
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "rep,p_c,p_f" and len(lines) == 4
        stats = dict(line.split(",") for line in summary.read_text().splitlines()[1:])
        assert 0.0 <= float(stats["p_c_mean"]) <= 1.0

    def test_workers_flag_preserves_bytes(self, tmp_path):
        outs = []
        for tag, workers in (("a", "1"), ("b", "3")):
            out = tmp_path / f"rates_{tag}.csv"
            summary = tmp_path / f"summary_{tag}.csv"
            main(["bench", "--model", "1", "--n", "40", "--m", "20", "--reps", "3",
                  "--seed", "2", "--workers", workers, "--out", str(out),
                  "--summary", str(summary)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestPlots:
    def test_array_needs_multivariate(self, tmp_path, sim_csv):
        code = main(["array", "--input", str(sim_csv), "--out", str(tmp_path / "a.svg")])
        assert code == EXIT_INPUT  # p = 1 input

    def test_array_on_bivariate(self, tmp_path):
        lab = model_sample(ModelSpec(model_id=5, n=15, c=0.2, m=12, seed=3))
        path = tmp_path / "bi.csv"
        path.write_text(format_long_csv(lab.sample), encoding="utf-8")
        out = tmp_path / "array.svg"
        assert main(["array", "--input", str(path), "--out", str(out)]) == EXIT_OK
        assert out.read_bytes().count(b'class="panel"') == 4

    def test_outliergram(self, tmp_path, sim_csv):
        out = tmp_path / "og.svg"
        assert main(["outliergram", "--input", str(sim_csv), "--out", str(out)]) == EXIT_OK
        assert b'class="reference"' in out.read_bytes()


class TestInterface:
    def test_help_lists_defaults(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["detect", "--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        assert "0.993" in text and "1.5" in text and "200" in text and "srmd-f" in text

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_console_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "msplot.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "msplot" in result.stdout
