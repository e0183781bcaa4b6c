import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fracflow.cli import SUMMARY_HEADER, main
from fracflow.io import read_path_csv
from fracflow.kernels import HurstParams


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_synth_example(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["synth", "--H", "0.5", "--method", "exact", "--grid", "0:1:256", "--n", "1",
                 "--seed", "7", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["time", "dim0"] and len(rows) - 1 == 257


def test_synth_bytes_deterministic(tmp_path):
    for k in (0, 1):
        main(["synth", "--H", "0.3", "--method", "kernel", "--grid", "0:1:16", "--seed", "2",
              "--out", str(tmp_path / f"{k}.csv")])
    assert (tmp_path / "0.csv").read_bytes() == (tmp_path / "1.csv").read_bytes()


@pytest.mark.parametrize("method", ["mollified", "poisson", "gamma"])
def test_synth_methods_directory(tmp_path, method):
    assert main(["synth", "--H", "0.7", "--method", method, "--grid", "0:1:8", "--n", "3",
                 "--out", str(tmp_path / "d")]) == 0
    assert sorted(p.name for p in (tmp_path / "d").iterdir()) == [f"path_000{i}.csv" for i in range(3)]


def test_integrate_stratonovich_within_tolerance(tmp_path):
    path = tmp_path / "p.csv"
    main(["synth", "--H", "0.4", "--grid", "0:1:4096", "--seed", "7", "--out", str(path)])
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"F": {"univariate": [0, 1]}, "interval": [0, 1], "partition": 2048,
                                "rule": "midpoint", "kind": "stratonovich"}))
    out = tmp_path / "r.json"
    assert main(["integrate", "--path", str(path), "--spec", str(spec), "--H", "0.4", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    x = read_path_csv(path, HurstParams(0.4)).values[0]
    assert res["chain_rule_reference"] == pytest.approx((x[-1] ** 2 - x[0] ** 2) / 2)
    assert res["abs_difference"] <= res["tolerance"]


def test_integrate_skorohod(tmp_path):
    path = tmp_path / "p.csv"
    main(["synth", "--H", "0.6", "--grid", "0:1:64", "--out", str(path)])
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"F": {"univariate": [0, 0, 1]}, "partition": 32, "kind": "skorohod"}))
    out = tmp_path / "r.json"
    assert main(["integrate", "--path", str(path), "--spec", str(spec), "--H", "0.6", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["kind"] == "skorohod" and res["correction_value"][0][0] != 0.0


def test_integrate_bad_kind(tmp_path):
    path = tmp_path / "p.csv"
    main(["synth", "--H", "0.6", "--grid", "0:1:8", "--out", str(path)])
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"kind": "ito"}))
    assert main(["integrate", "--path", str(path), "--spec", str(spec), "--H", "0.6"]) == 2


def test_roughpath(tmp_path):
    main(["synth", "--H", "0.5", "--grid", "0:1:32", "--n", "4", "--d", "2", "--out", str(tmp_path / "d")])
    files = sorted(str(p) for p in (tmp_path / "d").iterdir())
    out = tmp_path / "r.json"
    args = ["roughpath", "--H", "0.5", "--out", str(out)]
    for f in files:
        args += ["--path", f]
    assert main(args) == 0
    res = json.loads(out.read_text())
    assert len(res["paths"]) == 4 and res["paths"][0]["chen_max_residual"] < 1e-12
    assert [s["level"] for s in res["scaling"]] == [2, 3]


def test_invert_with_noise(tmp_path):
    assert main(["synth", "--H", "0.7", "--method", "kernel", "--grid=-4:4:256", "--noise-R", "8",
                 "--noise-h", "0.03125", "--seed", "3", "--save-noise", str(tmp_path / "nz"),
                 "--out", str(tmp_path / "w.csv")]) == 0
    rep = tmp_path / "rep.json"
    assert main(["invert", "--path", str(tmp_path / "w.csv"), "--H", "0.7", "--noise",
                 str(tmp_path / "nz" / "noise_0000.fnf"), "--out", str(tmp_path / "b.csv"),
                 "--report", str(rep)]) == 0
    res = json.loads(rep.read_text())
    assert res["n_times"] == 65 and "rms_error" in res
    assert len(_rows(tmp_path / "b.csv")) == 66


def test_report_empty_dir(tmp_path):
    (tmp_path / "in").mkdir()
    assert main(["report", "--in", str(tmp_path / "in"), "--out", str(tmp_path / "out")]) == 0
    assert _rows(tmp_path / "out" / "summary.csv") == [SUMMARY_HEADER]


def test_report_aggregates_verify(tmp_path):
    assert main(["verify", "roughpath", "--n", "1000", "--out", str(tmp_path / "v")]) == 0
    assert main(["report", "--in", str(tmp_path / "v"), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "summary.csv")
    assert {r[1] for r in rows[1:]} == {"chen_identity", "scaling_norms"}
    series = _rows(tmp_path / "o" / "series.csv")
    assert len(series) > 1


def test_verify_bad_selector_and_config(tmp_path):
    assert main(["verify", "nope"]) == 2
    (tmp_path / "c.yaml").write_text("n: 0\n")
    assert main(["verify", "--config", str(tmp_path / "c.yaml")]) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--H", "0.5"])
    assert exc.value.code == 2
    assert main(["synth", "--H", "1.5", "--grid", "0:1:4", "--out", "x.csv"]) == 2


def test_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACFLOW_THREADS", "1")
    assert main(["synth", "--H", "0.5", "--grid", "0:1:4", "--out", str(tmp_path / "a.csv")]) == 0
    monkeypatch.setenv("FRACFLOW_THREADS", "zero")
    assert main(["synth", "--H", "0.5", "--grid", "0:1:4", "--out", str(tmp_path / "a.csv")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fracflow", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout
