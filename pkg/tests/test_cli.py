import json
from importlib.resources import files

import numpy as np
import pytest

from minar.cli import main
from minar.experiments import SET_1, SET_2
from minar.process import CountSeries, simulate_minar

DATA = files("minar") / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_unknown_command(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 64 and "usage" in err


def test_bad_flag(capsys):
    code, _, err = run(capsys, "fit", "--nope")
    assert code == 1 and "unrecognized" in err


def test_simulate(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, stdout, _ = run(capsys, "simulate", "--preset", "set1", "--steps", "100", "--seed", "7", "--out", str(out))
    assert code == 0
    assert len(out.read_text().splitlines()) == 102  # header plus 101 rows
    assert json.loads(stdout)["seed"] == 7
    first = out.read_text()
    run(capsys, "simulate", "--preset", "set1", "--steps", "100", "--seed", "7", "--out", str(out))
    assert out.read_text() == first


def test_simulate_zero_steps(capsys):
    code, out, _ = run(capsys, "simulate", "--preset", "set1", "--steps", "0", "--n0", "4,2")
    assert code == 0 and out.splitlines() == ["t,series_1,series_2", "0,4,2"]


def test_simulate_nonstationary_warns(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"P": [[0.8, 0.3], [0.3, 0.8]], "lambda1": 1, "lambda2": 1, "phi": 0.2, "steps": 5}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0 and err.startswith("warning:")


def test_simulate_invalid_params(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"P": [[1.8, 0.3], [0.3, 0.8]], "lambda1": 1, "lambda2": 1}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 1 and err


@pytest.fixture(scope="module")
def series_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "set1.csv"
    simulate_minar(SET_1["P"], SET_1["innov"], [9, 7], 10_000, 99).to_csv(path)
    return path


def test_fit(capsys, series_file):
    code, out, _ = run(capsys, "fit", "--input", str(series_file))
    rep = json.loads(out)
    assert code == 0
    assert len(rep["params"]) == 7 and len(rep["std_errors"]) == 7
    assert all(np.isfinite(v) for v in rep["std_errors"].values())


def test_fit_short_series(capsys, tmp_path):
    path = tmp_path / "short.csv"
    CountSeries(np.ones((10, 2), dtype=int)).to_csv(path)
    code, _, err = run(capsys, "fit", "--input", str(path))
    assert code == 1 and "30" in err


def test_fit_nonconvergence_exit(capsys, series_file, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"input": str(series_file), "max_evals": 30}))
    code, out, _ = run(capsys, "fit", "--config", str(cfg))
    assert code == 2 and json.loads(out)["converged"] is False


def test_ladder(capsys, series_file, tmp_path):
    head = tmp_path / "head.csv"
    CountSeries.from_csv(series_file)[:3001].to_csv(head)
    code, out, _ = run(capsys, "ladder", "--input", str(head))
    assert code == 0 and len(json.loads(out)["tests"]) == 4


def test_granger_diagonal(capsys, tmp_path):
    path = tmp_path / "d.csv"
    from minar.innovations import BivPoissonParams
    simulate_minar(SET_2["P"], BivPoissonParams(5.0, 3.0, 0.0), [6, 5], 2000, 3).to_csv(path)
    code, out, _ = run(capsys, "granger", "--input", str(path))
    assert code == 0 and json.loads(out)["classification"] == "independent"


def test_forecast(capsys):
    code, out, _ = run(capsys, "forecast", "--preset", "okhotsk-west-pacific-24h", "--n0", "1,3", "--horizons", "1")
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert round(float(row[1]), 4) == 0.3277
    assert len(row[1]) >= 6


def test_forecast_from_fit(capsys, tmp_path):
    fit = tmp_path / "f.json"
    fit.write_text(json.dumps({"params": {"p11": 0.0817, "p12": 0.028, "p21": 0.106, "p22": 0.1552,
                                          "lambda1": 0.162, "lambda2": 0.4261, "phi": 0.0269}}))
    code, out, _ = run(capsys, "forecast", "--fit", str(fit), "--n0", "1,3")
    assert code == 0 and out.splitlines()[1].startswith("1,0.3277")


def test_forecast_missing_n0(capsys):
    code, _, err = run(capsys, "forecast", "--preset", "okhotsk-west-pacific-24h")
    assert code == 1 and "initial counts" in err


def test_risk(capsys, tmp_path):
    out = tmp_path / "r.csv"
    args = ["risk", "--preset", "okhotsk-west-pacific-24h", "--n0", "23,46", "--horizons", "1,2",
            "--thresholds", "0,20", "--paths", "5000", "--seed", "1", "--out", str(out)]
    assert run(capsys, *args)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n / days,1,2" and lines[1] == "0,1.0,1.0"
    se = (tmp_path / "r_se.csv").read_text()
    first = out.read_text()
    run(capsys, *args)
    assert out.read_text() == first and (tmp_path / "r_se.csv").read_text() == se


def test_study(capsys, tmp_path):
    code, _, err = run(capsys, "study", "--preset", "set2", "--sizes", "100,1000", "--replications", "2",
                       "--seed", "3", "--out", str(tmp_path / "st"))
    assert code == 0
    means = (tmp_path / "st" / "means.csv").read_text().splitlines()
    assert means[0].startswith("n,p11,p12,p21,p22,lambda1,lambda2,phi")
    assert [m.split(",")[0] for m in means[1:]] == ["100", "1000"]
    assert (tmp_path / "st" / "stdevs.csv").exists()


def test_ingest(capsys, tmp_path):
    out = tmp_path / "series.csv"
    code, _, err = run(capsys, "ingest", "--config", str(DATA / "mini_config.json"),
                       "--catalog", str(DATA / "mini_catalog.csv"), "--regions", str(DATA / "mini_plates.json"),
                       "--out", str(out))
    assert code == 0
    assert out.read_text() == (DATA / "mini_expected.csv").read_text()
    assert "latitude out of range" in (tmp_path / "series_rejects.csv").read_text()
    assert "1 row(s) rejected" in err


def test_ingest_missing_catalog(capsys):
    code, _, err = run(capsys, "ingest", "--start", "2011-01-01T00:00:00Z", "--end", "2011-01-02T00:00:00Z")
    assert code == 1
