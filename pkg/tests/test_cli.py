"""Thin-client CLI: file outputs and exit codes."""
import csv
import json

import pytest
from click.testing import CliRunner

from kponet.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_landscape_writes_json_and_csv(tmp_path, runner):
    cfg = write_config(tmp_path / "cfg.json", {"instance": {"hard": True}})
    out = tmp_path / "land.json"
    res = runner.invoke(main, ["landscape", cfg, "-o", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 16
    with open(tmp_path / "land_table.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 16
    assert "config_bits" in rows[0]


def test_solve_small(tmp_path, runner):
    cfg = write_config(tmp_path / "cfg.json", {
        "instance": {"random": {"n": 2, "seed": 3}},
        "levels": 5,
        "params": {"T": 2.0},
    })
    out = tmp_path / "run.json"
    res = runner.invoke(main, ["solve", cfg, "-o", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert "metrics" in doc and "config" in doc
    with open(tmp_path / "run_configs.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert abs(sum(float(r["probability"]) for r in rows) - 1) < 1e-9


def test_invalid_config_exits_one(tmp_path, runner):
    cfg = write_config(tmp_path / "bad.json",
                       {"instance": {"hard": True, "path": "x"}})
    res = runner.invoke(main, ["landscape", cfg, "-o", str(tmp_path / "x.json")])
    assert res.exit_code == 1


def test_unreadable_config_exits_one(tmp_path, runner):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    res = runner.invoke(main, ["solve", str(p), "-o", str(tmp_path / "x.json")])
    assert res.exit_code == 1


def test_spectrum_small(tmp_path, runner):
    cfg = write_config(tmp_path / "cfg.json", {
        "instance": {"hard": True},
        "levels": 10,
        "n_e": 3,
        "m": 2,
        "grid_points": 4,
    })
    out = tmp_path / "spec.json"
    res = runner.invoke(main, ["spectrum", cfg, "-o", str(out),
                               "--csv", str(tmp_path / "spec.csv")])
    assert res.exit_code == 0, res.output
    with open(tmp_path / "spec.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert set(rows[0]) == {"t", "p", "gap_1", "gap_2", "tracked_level"}
