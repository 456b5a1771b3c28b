import csv
import json

import numpy as np
import pytest

from fibrate.core import certify_zero_energy
from fibrate.errors import FormatError, GridMismatch
from fibrate.grid import build_grid
from fibrate.io import FIELD_HEADER, ResultBundle, bundle_dict, dumps, load_field, persist_field, read_field, write_outputs
from fibrate.problems import build_problem


@pytest.mark.parametrize("grid", [build_grid("interval", 1.0, 50), build_grid("rectangle", (1.0, 2.0), (4, 5)),
                                  build_grid("radial", 3.0, 40)], ids=lambda g: g.kind)
def test_field_round_trip_is_exact(grid, rng, tmp_path):
    u = rng.standard_normal(grid.size) * 10.0 ** rng.uniform(-300, 300, grid.size)
    path = persist_field(u, grid, tmp_path / "u.txt")
    np.testing.assert_array_equal(load_field(path, grid), u)
    info, _ = read_field(path)
    assert info["kind"] == grid.kind


def test_field_errors(tmp_path, interval64):
    u = np.ones(64)
    path = persist_field(u, interval64, tmp_path / "u.txt")
    with pytest.raises(GridMismatch):
        load_field(path, build_grid("interval", 1.0, 65))
    with pytest.raises(GridMismatch):
        load_field(path, build_grid("interval", 2.0, 64))
    with pytest.raises(GridMismatch):
        persist_field(np.ones(3), interval64, tmp_path / "v.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("not a field\n")
    with pytest.raises(FormatError):
        load_field(bad)
    bad.write_text(f"{FIELD_HEADER}\ninterval 1 64\n1.0\n")
    with pytest.raises(FormatError):
        load_field(bad)
    bad.write_text(f"{FIELD_HEADER}\ninterval one 64\n")
    with pytest.raises(FormatError):
        load_field(bad)


def test_dumps_round_trip():
    obj = {"a": [1, 2.5, 1 / 3, None, True], "b": {"c": np.float64(np.pi), "d": np.arange(3)}, "e": float("nan"), "f": {}}
    back = json.loads(dumps(obj))
    assert back["a"] == [1, 2.5, 1 / 3, None, True]
    assert back["b"] == {"c": np.pi, "d": [0, 1, 2]}
    assert back["e"] is None and back["f"] == {}
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_empty_bundle(tmp_path):
    doc = bundle_dict(ResultBundle())
    assert set(doc) == {"meta", "records", "estimates", "reports"}
    write_outputs(ResultBundle(), ["json", "csv"], tmp_path)
    assert json.loads((tmp_path / "result.json").read_text())["records"] == []
    rows = list(csv.reader(open(tmp_path / "records.csv")))
    assert rows == [["n", "mu", "bound", "energy_residual", "gradient_residual", "nehari_class", "iterations", "converged"]]


def test_record_tables(tmp_path):
    g = build_grid("interval", 1.0, 32)
    model = build_problem({"kind": "semilinear", "q": 3, "r": 4}, g)
    rec = certify_zero_energy(model, np.sin(np.pi * g.nodes))
    write_outputs(ResultBundle(records=[rec], grid=g), ["json", "csv"], tmp_path)
    rows = list(csv.DictReader(open(tmp_path / "records.csv")))
    assert rows[0]["nehari_class"] == "N+" and float(rows[0]["mu"]) == rec.mu
    doc = json.loads((tmp_path / "result.json").read_text())
    assert doc["records"][0]["mu"] == rec.mu and doc["records"][0]["nehari_discrepancy"] is True
    np.testing.assert_array_equal(load_field(tmp_path / "field_000.txt", g), rec.v)
