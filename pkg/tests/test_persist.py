import json

import numpy as np

from prodwave import persist
from prodwave.propagate import OutputPath


def test_path_round_trip_is_exact(tmp_path):
    y = np.random.default_rng(0).standard_normal(25) * 1e-7
    p = OutputPath(y, "reduced", {"lambda2": 0.5}, seed=9, network_hash=None)
    out = persist.write_path(p, tmp_path / "p.csv")
    back = persist.read_path(out)
    assert np.array_equal(back.y, y)
    assert back.kind == "reduced" and back.params == {"lambda2": 0.5} and back.seed == 9
    meta = json.loads((tmp_path / "p.csv.json").read_text())
    assert meta["length"] == 25


def test_rows_and_hash(tmp_path):
    rows = [{"a": 1, "b": 0.1}, {"a": 2, "c": [1, 2]}]
    path = persist.write_rows(rows, tmp_path / "r.csv")
    back = persist.read_rows(path)
    assert back[0]["b"] == "0.1" and back[1]["c"] == "[1, 2]"
    assert persist.canonical_hash({"x": 1, "y": 2}) == persist.canonical_hash({"y": 2, "x": 1})
    assert persist._plain({"z": 1 + 2j, "n": np.int64(3), "f": float("nan")}) == {
        "z": {"real": 1.0, "imag": 2.0}, "n": 3, "f": "nan"}
