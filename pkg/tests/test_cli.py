import json

import pytest

from briergame.cli import main

CSV = """date,group,outcome,A_a1,A_a2,A_a3,B_a1,B_a2,B_a3
2006-08-19,E0,1,1.5,3.8,6.5,1.53,3.6,6.0
2006-08-19,E0,3,2.1,3.2,3.5,2.2,3.2,3.25
2006-08-20,E0,2,2.6,3.1,2.7,2.5,3.2,2.75
2006-08-21,E0,1,1.8,3.4,4.5,1.83,3.3,4.33
"""


@pytest.fixture
def data(tmp_path):
    path = tmp_path / "matches.csv"
    path.write_text(CSV)
    return path


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "data.ini"
    path.write_text("[data]\noutcomes = 3\nexperts = A, B\nodds_pattern = {expert}_a{i}\n")
    return path


def test_ingest(data, config, tmp_path, capsys):
    probs, hist = tmp_path / "p.csv", tmp_path / "h.csv"
    rc = main(["ingest", "--input", str(data), "--config", str(config),
               "--probs-out", str(probs), "--histogram-out", str(hist)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["records"] == 4 and summary["errors"] == 0
    assert len(probs.read_text().splitlines()) == 5
    assert len(hist.read_text().splitlines()) == 201


def test_ingest_reports_bad_rows(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(CSV + "2006-08-22,E0,4,1.5,3.8,6.5,1.5,3.6,6.0\n2006-08-22,E0,1,0.9,3.8,6.5,1.5,3.6,6.0\n")
    rc = main(["ingest", "--input", str(path), "--outcomes", "3", "--experts", "A,B"])
    summary = json.loads(capsys.readouterr().out)
    assert rc == 1 and summary["errors"] == 2
    assert summary["diagnostics"][0].startswith("row 6:")


def test_missing_schema_is_a_usage_error(data):
    with pytest.raises(SystemExit) as exc:
        main(["ingest", "--input", str(data)])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--algo", "saa"])
    assert exc.value.code == 2


def test_run_and_report(data, config, tmp_path):
    out, curves = tmp_path / "run.json", tmp_path / "curves.csv"
    rc = main(["run", "--algo", "saa", "--data", str(data), "--config", str(config),
               "--batch-by-date", "--out", str(out), "--curves", str(curves)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["type"] == "run" and payload["summary"]["algorithm"] == "saa"
    assert len(curves.read_text().splitlines()) == 5
    rep = tmp_path / "report.csv"
    assert main(["report", "--input", str(out), "--out", str(rep)]) == 0
    assert rep.read_text().splitlines()[1].startswith("run,saa,")


def test_run_synthetic_every_algorithm(tmp_path):
    for algo in ("saa", "wdaa", "wkaa", "hedge", "saa_ha", "follow_leader", "simple_average", "bma"):
        out = tmp_path / f"{algo}.json"
        rc = main(["run", "--algo", algo, "--synthetic", "N=60,K=3,n=3,seed=1,outcomes=adversarial",
                   "--out", str(out)])
        assert rc == 0, algo


def test_run_rejects_unmixable_eta(tmp_path):
    rc = main(["run", "--algo", "saa", "--param", "1.5", "--synthetic", "N=10,K=2,n=2",
               "--out", str(tmp_path / "x.json")])
    assert rc == 1


def test_sweep_and_json_report(tmp_path):
    out = tmp_path / "sweep.json"
    rc = main(["sweep", "--algo", "wdaa", "--grid", "1:8:4", "--synthetic", "N=80,K=4,n=3,seed=2",
               "--out", str(out)])
    assert rc == 0
    rep = tmp_path / "report.json"
    assert main(["report", "--input", str(out), "--format", "json", "--out", str(rep)]) == 0
    sweeps = json.loads(rep.read_text())["sweeps"]
    assert len(sweeps[0]["parameter_values"]) == 4


def test_sweep_with_failing_points_exits_nonzero(tmp_path):
    rc = main(["sweep", "--algo", "saa", "--grid", "0.5,1.2", "--synthetic", "N=20,K=2,n=2",
               "--out", str(tmp_path / "s.json")])
    assert rc == 1


def test_mixability(capsys):
    assert main(["mixability", "--n", "2", "--eta", "0.5", "--samples", "500", "--grid-resolution", "50"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["curvature_positive"] and out["search"]["verdict"] == "consistent"


def test_mixability_boundary_touches_zero(capsys):
    # at eta = 1 the curvature vanishes at (1/2, 1/2) but the search finds no violation
    assert main(["mixability", "--n", "2", "--eta", "1.0", "--samples", "500", "--grid-resolution", "50"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["curvature_min"] == pytest.approx(0.0, abs=1e-12)
    assert out["search"]["verdict"] == "consistent"


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--algo", "nope"])
    assert exc.value.code == 2
