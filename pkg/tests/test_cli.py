import json

import numpy as np
import pytest

from goa_osfs.cli import main
from goa_osfs.data import load_csv

from conftest import DATA

WDBC = ["--data", str(DATA / "wdbc_train.csv"), "--test", str(DATA / "wdbc_test.csv"),
        "--label", "diagnosis"]


def test_simulate(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--classes", "10", "--dims", "10", "--per-class", "1000",
                 "--seed", "1", "-o", str(out)]) == 0
    ds = load_csv(out)
    assert ds.values.shape == (10000, 10) and ds.class_count == 10


def test_stream_run_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    assert main(["stream-run", "--algo", "goa", "--scenario", "a", "--delta", "0.5",
                 *WDBC, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["algorithm"] == "GOA" and report["scenario"] == "A"
    assert "runtime_ms" not in report
    assert "runtime_ms" in json.loads((out / "timing.json").read_text())
    lines = (out / "trace_trial0.jsonl").read_text().splitlines()
    assert len(lines) >= 30
    assert set(json.loads(lines[0])) == {"t", "feature", "decision", "witness", "estimates"}
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["delta"] == 0.5 and man["version"]
    assert len(man["seeds"]["selector"]) == 1 and man["dataset_fingerprint"]


def test_manifest_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["stream-run", "--algo", "xsaola", "--scenario", "b2", "--delta", "0.01",
                 "--data", str(DATA / "wdbc.csv"), "--label", "diagnosis", "--trials", "2",
                 "--seed", "5", "--out", str(a)]) == 0
    assert main(["stream-run", "--manifest", str(a / "manifest.json"), "--out", str(b)]) == 0
    for name in ("report.json", "trace_trial0.jsonl", "trace_trial1.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_b3_infeasible_exit(tmp_path, capsys):
    code = main(["stream-run", "--scenario", "b3", "--spans", "2", *WDBC,
                 "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "scenario B3" in err and "windows need" in err
    assert not (tmp_path / "report.json").exists()


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["stream-run", "--scenario", "q"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_missing_data_exit_1(tmp_path, capsys):
    assert main(["stream-run", "--data", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 1
    assert "not found" in capsys.readouterr().err


def test_output_env_and_config(tmp_path, monkeypatch):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(f"[data]\npath = {DATA / 'wdbc.csv'}\nlabel = diagnosis\n"
                   f"[algorithm]\nname = XSAOLA\ndelta = 0.9\n[eval]\ntrials = 1\n"
                   f"[run]\noutput_dir = {tmp_path / 'from_config'}\n")
    monkeypatch.setenv("GOA_OSFS_OUTPUT", str(tmp_path / "from_env"))
    assert main(["stream-run", "--config", str(cfg), "--delta", "0.05"]) == 0
    man = json.loads((tmp_path / "from_env" / "manifest.json").read_text())
    assert man["config"]["delta"] == 0.05 and man["config"]["algorithm"] == "XSAOLA"
    monkeypatch.delenv("GOA_OSFS_OUTPUT")
    assert main(["stream-run", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_config" / "report.json").exists()


def test_compare_and_report(tmp_path):
    base = tmp_path / "base"
    assert main(["stream-run", "--algo", "xsaola", "--delta", "0.01", *WDBC,
                 "--out", str(base)]) == 0
    cmp_dir = tmp_path / "cmp"
    assert main(["compare", *WDBC, "--grid", "0.05,0.5", "--baseline",
                 str(base / "report.json"), "--out", str(cmp_dir)]) == 0
    res = json.loads((cmp_dir / "comparison.json").read_text())
    assert res["rule_applied"] in ("UnderBudgetBest", "ClosestOverBudget")
    assert res["chosen_delta"] in (0.05, 0.5)
    assert len(json.loads((cmp_dir / "grid_goa.json").read_text())) == 2

    r1, r2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["report", str(cmp_dir), str(base / "report.json"), "--out", str(r1)]) == 0
    assert main(["report", str(base / "report.json"), str(cmp_dir), "--out", str(r2)]) == 0
    names = sorted(p.name for p in r1.iterdir())
    assert "table.csv" in names and any(n.startswith("series_") for n in names)
    for n in names:
        assert (r1 / n).read_bytes() == (r2 / n).read_bytes()


def test_compare_with_baseline_grid(tmp_path):
    assert main(["compare", "--data", str(DATA / "wdbc.csv"), "--label", "diagnosis",
                 "--trials", "1", "--grid", "0.3", "--baseline-grid", "0.01,0.5",
                 "--classifier", "svm", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "comparison.json").read_text())
    assert res["classifier"] == "svm" and res["baseline_report"]["algorithm"] == "XSAOLA"
    assert len(json.loads((tmp_path / "grid_baseline.json").read_text())) == 2


def test_cache_dump(tmp_path):
    assert main(["cache", *WDBC, "--features", "0,1,2", "--dump-emst", "2,0",
                 "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "cache.csv").read_text().splitlines()
    assert lines[0].startswith("# fingerprint=") and len(lines) == 2 + 3
    edges = (tmp_path / "emst_0_2.csv").read_text().splitlines()
    assert len(edges) == 1 + 2 * 398 - 1
    pts = np.loadtxt(tmp_path / "emst_0_2_points.csv", delimiter=",", skiprows=1)
    assert pts.shape == (796, 4)
    assert main(["cache", *WDBC, "--dump-emst", "1", "--out", str(tmp_path)]) == 1
