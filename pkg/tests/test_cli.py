import csv
import json

import numpy as np
import pytest

from dtnlab.cli import main
from dtnlab.reports import CSV_SCHEMAS, write_csv, write_svg_lineplot


def _write_config(tmp_path, body, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(body), encoding="utf-8")
    return path


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_validate_subcommand(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "experiment": {"kind": "validate", "parameters": {}}},
    )
    rc = main(["validate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = _read_csv(tmp_path / "validate.csv")
    assert rows[0] == list(CSV_SCHEMAS["validate"] + ("schema_version", "config_hash"))
    assert all(row[3] == "1" for row in rows[1:])  # every check passes


def test_dtn_subcommand_matches_analytic(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 512},
         "coefficients": {"a": 1.0, "m": 1.0},
         "experiment": {"kind": "dtn", "parameters": {}}},
    )
    rc = main(["dtn", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = _read_csv(tmp_path / "dtn.csv")[1:]
    lam = np.zeros((2, 2))
    for row in rows:
        lam[int(row[0]), int(row[1])] = float(row[2])
    exact = np.array([[1 / np.tanh(1), -1 / np.sinh(1)], [-1 / np.sinh(1), 1 / np.tanh(1)]])
    assert np.max(np.abs(lam - exact)) / np.max(np.abs(exact)) <= 1e-3


def test_graph_subcommand_eigen_instance(tmp_path):
    n = 32
    h = 1.0 / (n + 1)
    lam1 = (4 / h**2) * np.sin(np.pi * h / 2) ** 2
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": n},
         "coefficients": {"a": 1.0, "m": -lam1},
         "experiment": {"kind": "graph", "parameters": {}}},
    )
    rc = main(["graph", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = {r[0]: r for r in _read_csv(tmp_path / "graph.csv")[1:]}
    assert rows["mul"][1] == "1"
    assert rows["dom"][1] == "1"
    assert float(rows["dom"][2]) <= 1e-9


def test_sector_subcommand(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 32},
         "coefficients": {"a": 1.0, "m": 1.0},
         "experiment": {"kind": "sector", "parameters": {"samples": 64}}},
    )
    rc = main(["sector", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = {r[0]: r for r in _read_csv(tmp_path / "sector.csv")[1:]}
    assert rows["contained"][3] == "1"


def test_converge_subcommand_with_svg(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "experiment": {"kind": "converge",
                        "parameters": {"n_oscs": [2, 4], "grid_factor": 32}},
         "output": {"csv_path": "converge.csv", "svg_path": "converge.svg", "seed": 42}},
    )
    rc = main(["converge", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    rows = _read_csv(tmp_path / "converge.csv")
    assert rows[0][:6] == list(CSV_SCHEMAS["converge"])
    assert (tmp_path / "converge.svg").read_text().startswith("<svg")


def test_resolvent_subcommand(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "experiment": {"kind": "resolvent",
                        "parameters": {"a_template": 1.0, "a_limit": 1.0,
                                        "m_template": "-5+sin(2*pi*{n}*x)",
                                        "m_limit": -5.0, "mu": 1.0, "norm_cap": 1.0,
                                        "n_oscs": [2, 4], "grid_factor": 32,
                                        "lambda_offsets": [1.0]}}},
    )
    rc = main(["resolvent", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    metrics = {r[3] for r in _read_csv(tmp_path / "resolvent.csv")[1:]}
    assert any(m.startswith("resolvent_gap") for m in metrics)


def test_config_error_exit_code(tmp_path):
    cfg = _write_config(tmp_path, {"geometry": {"kind": "interval", "n": 0}})
    assert main(["validate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    missing = tmp_path / "nope.json"
    bad = _write_config(tmp_path, {"geometry": {"kind": "interval", "n": 4}, "zzz": 1})
    assert main(["validate", "--config", str(bad), "--out", str(tmp_path), "--strict"]) == 2


def test_solver_failure_exit_code(tmp_path):
    # resolvent experiment at an interior eigenvalue aborts with exit 4
    n_osc, factor = 2, 32
    grid = n_osc * factor
    h = 1.0 / (grid + 1)
    lam1 = (4 / h**2) * np.sin(np.pi * h / 2) ** 2
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "experiment": {"kind": "resolvent",
                        "parameters": {"a_template": 1.0, "a_limit": 1.0,
                                        "m_template": -lam1, "m_limit": -lam1,
                                        "mu": 1.0, "norm_cap": 1.0,
                                        "n_oscs": [n_osc], "grid_factor": factor}}},
    )
    assert main(["resolvent", "--config", str(cfg), "--out", str(tmp_path)]) == 4


def test_seed_override_and_determinism(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "coefficients": {"a": "2+sin(2*pi*x)", "m": 1.0},
         "experiment": {"kind": "dtn", "parameters": {}}},
    )
    for sub in ("one", "two"):
        rc = main(["dtn", "--config", str(cfg), "--out", str(tmp_path / sub), "--seed", "7"])
        assert rc == 0
    assert (tmp_path / "one" / "dtn.csv").read_bytes() == (
        tmp_path / "two" / "dtn.csv"
    ).read_bytes()


def test_converge_value_columns_deterministic(tmp_path):
    cfg = _write_config(
        tmp_path,
        {"geometry": {"kind": "interval", "n": 16},
         "experiment": {"kind": "converge",
                        "parameters": {"n_oscs": [2, 4], "grid_factor": 32}}},
    )
    outs = []
    for sub in ("one", "two"):
        rc = main(["converge", "--config", str(cfg), "--out", str(tmp_path / sub)])
        assert rc == 0
        rows = _read_csv(tmp_path / sub / "converge.csv")
        # runtime_ms is wall time and exempt from byte identity; every value
        # column must match exactly
        outs.append([row[:5] + row[6:] for row in rows])
    assert outs[0] == outs[1]


def test_write_csv_rejects_schema_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", "dtn", [(1, 2, 3)], "1", "beef")


def test_svg_writer_minimal(tmp_path):
    path = write_svg_lineplot(
        tmp_path / "plot.svg", {"gap": [(4, 1e-2), (8, 5e-3), (16, 2e-3)]}, title="t"
    )
    text = path.read_text()
    assert text.startswith("<svg") and "polyline" in text
