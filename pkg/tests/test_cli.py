import csv
import json

import pytest

from levydim.cli import main

STABLE_15 = '{"family":"IsotropicStable","params":{"alpha":1.5},"dim":1}'


def _report(out):
    with open(out / "report.json") as fh:
        return json.load(fh)


def test_dim_range_example(tmp_path, capsys):
    code = main(["dim-range", "--psi", STABLE_15, "--tol", "0.01", "--out", str(tmp_path)])
    assert code == 0
    doc = _report(tmp_path)
    assert 0.99 <= doc["report"]["value"] <= 1.0
    assert doc["job"]["psi"]["family"] == "IsotropicStable"
    assert (tmp_path / "plot.svg").read_text().lstrip().startswith("<?xml")
    with open(tmp_path / "report.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[-1]["verdict"] == "estimate"
    assert {"exponent", "verdict", "value", "ci_lo", "ci_hi"} <= set(rows[0].keys())


def test_unknown_family_exits_2(tmp_path, capsys):
    code = main(["dim-range", "--psi", '{"family":"Nope","params":{},"dim":1}', "--out", str(tmp_path)])
    err = capsys.readouterr().err.strip()
    assert code == 2
    assert len(err.splitlines()) == 1
    assert "psi.family" in err
    assert not (tmp_path / "report.json").exists()


def test_missing_set_exits_2(tmp_path, capsys):
    assert main(["dim-image", "--psi", STABLE_15, "--out", str(tmp_path)]) == 2
    assert "set" in capsys.readouterr().err


def test_bad_json_exits_2(tmp_path, capsys):
    assert main(["dim-range", "--psi", "{not json", "--out", str(tmp_path)]) == 2


def test_preimage_of_point(tmp_path):
    code = main(["dim-preimage", "--psi", STABLE_15, "--set", '{"kind":"Point","params":{"t":0}}',
                 "--out", str(tmp_path)])
    assert code == 0
    assert _report(tmp_path)["report"]["value"] == pytest.approx(1 / 3, abs=0.05)


def test_job_round_trip(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["dim-range", "--psi", STABLE_15, "--out", str(first)]) == 0
    assert main(["dim-range", "--job", str(first / "report.json"), "--out", str(second)]) == 0
    assert _report(first) == _report(second)


def test_job_file(tmp_path):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"psi": json.loads(STABLE_15), "tol": 0.02}))
    assert main(["dim-range", "--job", str(job), "--out", str(tmp_path)]) == 0
    assert _report(tmp_path)["job"]["tol"] == 0.02


def test_capacity_positive(tmp_path):
    code = main(["capacity", "--set", '{"kind":"SelfSimilar","params":{"N":2,"r":0.3333333333}}',
                 "--gauge", '{"kind":"Riesz","beta":0.4}', "--out", str(tmp_path), "--no-plot"])
    assert code == 0
    assert _report(tmp_path)["report"]["verdict"] == "positive"


def test_simulate(tmp_path):
    code = main(["simulate", "--psi", '{"family":"IsotropicStable","params":{"alpha":1.5},"dim":2}',
                 "--set", '{"kind":"Interval","params":{}}', "--n-paths", "2", "--level", "13",
                 "--out", str(tmp_path)])
    assert code == 0
    rep = _report(tmp_path)["report"]
    assert len(rep["per_path"]) == 2
    assert 1.0 < rep["value"] < 2.0


def test_validate(tmp_path):
    assert main(["validate", "--out", str(tmp_path), "--no-plot"]) == 0
    assert _report(tmp_path)["report"]["passed"]
