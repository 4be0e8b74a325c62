"""CLI behavior: flags, output files, and exit codes (0 ok, 1 failing
checks or benchmark cells, 2 usage or domain errors)."""

import json

import numpy as np
import pytest

from fitzloss.cli import main
from fitzloss.train import read_weights


@pytest.fixture()
def synth_manifest(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({"datasets": [
        {"name": "demo", "format": "synth", "seed": 21, "n": 60, "d": 4,
         "k": 3, "noise": 0.3},
    ]}))
    return str(manifest)


class TestEvalCommand:
    def test_prints_machine_readable_record(self, capsys):
        rc = main(["eval", "--loss", "fitzpatrick-sparsemax",
                   "--y", "1,0", "--theta", "0,0"])
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert abs(record["value"] - 0.125) < 1e-12
        assert record["y_star"] == [0.75, 0.25]

    def test_zero_at_link(self, capsys):
        rc = main(["eval", "--loss", "logistic",
                   "--y", "0.5,0.5", "--theta", "0,0"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["value"] <= 1e-9

    def test_fitz_squared_zero(self, capsys):
        rc = main(["eval", "--loss", "fitzpatrick-squared",
                   "--y", "1,0", "--theta", "1,0"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["value"] == 0.0

    def test_domain_error_exits_2(self, capsys):
        rc = main(["eval", "--loss", "logistic", "--y", "2,0", "--theta", "0,0"])
        assert rc == 2
        assert "sum to 1" in capsys.readouterr().err

    def test_unparsable_vector_exits_2(self, capsys):
        rc = main(["eval", "--loss", "logistic", "--y", "a,b", "--theta", "0,0"])
        assert rc == 2

    def test_missing_flag_exits_2(self):
        with pytest.raises(SystemExit) as info:
            main(["eval", "--loss", "logistic", "--y", "1,0"])
        assert info.value.code == 2


class TestCurveCommand:
    def test_csv_contract(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        rc = main(["curve", "--generator", "sparsemax", "--k", "2",
                   "--s-range=-5:5", "--steps", "201", "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        assert text.endswith("\n")
        lines = text.splitlines()
        assert lines[0] == "s,fy_value,fitz_value"
        assert len(lines) == 202
        for line in lines[1:]:
            s, fy, fitz = (float(v) for v in line.split(","))
            assert 0.0 <= fitz <= fy + 1e-9
            if s >= 1.0:
                assert fy == 0.0 and fitz == 0.0

    def test_twelve_significant_digits(self, tmp_path):
        out = tmp_path / "curve.csv"
        main(["curve", "--generator", "logistic", "--k", "2",
              "--s-range", "0:1", "--steps", "2", "--out", str(out)])
        first = out.read_text().splitlines()[1].split(",")
        assert first[1] == f"{np.log(2):.12g}"

    def test_bad_range_exits_2(self, tmp_path):
        rc = main(["curve", "--generator", "logistic", "--s-range", "5:1",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestCheckCommand:
    def test_pass_exit_0(self, capsys):
        rc = main(["check", "--suite", "sandwich,identities",
                   "--seed", "0", "--trials", "40"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 2

    def test_unknown_suite_exit_2(self, capsys):
        rc = main(["check", "--suite", "bogus"])
        assert rc == 2


class TestTrainCommand:
    def test_writes_model_and_metrics(self, tmp_path, synth_manifest, capsys):
        model = tmp_path / "model.txt"
        rc = main(["train", "--manifest", synth_manifest, "--dataset", "demo",
                   "--loss", "fitzpatrick-logistic", "--lambda", "0.5",
                   "--seed", "4", "--out", str(model)])
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert record["converged"] is True
        weights, spec, lam, seed = read_weights(model)
        assert weights.shape == (3, 4)
        assert spec.name == "fitzpatrick-logistic"
        assert lam == 0.5 and seed == 4

    def test_same_seed_byte_identical(self, tmp_path, synth_manifest):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        for out in (a, b):
            rc = main(["train", "--manifest", synth_manifest, "--dataset",
                       "demo", "--loss", "sparsemax", "--lambda", "1.0",
                       "--seed", "9", "--out", str(out)])
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()

    def test_huge_lambda_shrinks_weights(self, tmp_path, synth_manifest, capsys):
        model = tmp_path / "model.txt"
        rc = main(["train", "--manifest", synth_manifest, "--dataset", "demo",
                   "--loss", "logistic", "--lambda", "1e9", "--out", str(model)])
        assert rc == 0
        weights, _, _, _ = read_weights(model)
        assert float(np.linalg.norm(weights)) < 1e-3

    def test_unknown_dataset_exit_2(self, synth_manifest, capsys):
        rc = main(["train", "--manifest", synth_manifest, "--dataset", "nope",
                   "--loss", "logistic", "--lambda", "1.0"])
        assert rc == 2


class TestBenchmarkCommand:
    def test_report_files(self, tmp_path, synth_manifest, capsys):
        out = tmp_path / "report.json"
        rc = main(["benchmark", "--manifest", synth_manifest,
                   "--losses", "logistic,fitzpatrick-logistic",
                   "--lambda-grid", "0.01,1.0", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["failures"] == 0
        csv_lines = (tmp_path / "report.csv").read_text().splitlines()
        assert csv_lines[0] == "dataset,logistic,fitzpatrick-logistic"
        assert csv_lines[1].startswith("demo,")

    def test_single_lambda_echoed(self, tmp_path, synth_manifest, capsys):
        out = tmp_path / "report.json"
        rc = main(["benchmark", "--manifest", synth_manifest,
                   "--losses", "sparsemax", "--lambda-grid", "0.25",
                   "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert all(c["best_lambda"] == 0.25 for c in report["cells"])

    def test_missing_manifest_exit_2(self, tmp_path, capsys):
        rc = main(["benchmark", "--manifest", str(tmp_path / "none.json"),
                   "--losses", "logistic", "--out", str(tmp_path / "r.json")])
        assert rc == 2
