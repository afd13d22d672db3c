import csv

import numpy as np
import pytest

from sharpspec import io
from sharpspec.results import EigResult, Report


def test_fmt_roundtrip():
    x = 0.1 + 0.2
    assert float(io.fmt(x)) == x
    assert io.fmt(None) == "" and io.fmt(True) == "true" and io.fmt(3) == "3"


def test_spectrum_csv_header_and_clusters(tmp_path):
    res = EigResult(np.array([2.0, -1.0, 2.0 + 1e-12]), np.zeros(3), 1e-8)
    p = tmp_path / "s.csv"
    io.write_spectrum_csv(p, res)
    lines = p.read_text().splitlines()
    assert lines[0] == "index,eigenvalue,residual,cluster_id"
    rows = list(csv.DictReader(lines))
    assert [r["cluster_id"] for r in rows] == ["0", "1", "1"]


def test_report_csv(tmp_path):
    rep = Report("demo")
    rep.add("identity", 1e-14, 1e-10)
    rep.add("broken", 1.0, 1e-10)
    p = tmp_path / "r.csv"
    io.write_report_csv(p, rep.as_rows())
    rows = list(csv.DictReader(p.open()))
    assert [r["passed"] for r in rows] == ["true", "false"]
    assert rows[0]["tolerance"] == "1e-10"


def test_read_grid_data_with_index(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("dof_index,u0,v0\n1,2.0,0.5\n0,1.0,0.25\n")
    d = io.read_grid_data(p, 2)
    np.testing.assert_array_equal(d["u0"], [1.0, 2.0])
    np.testing.assert_array_equal(d["v0"], [0.25, 0.5])


def test_read_grid_data_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("value\n1\n2\n")
    with pytest.raises(ValueError, match="degrees of freedom"):
        io.read_grid_data(p, 3)
    with pytest.raises(FileNotFoundError):
        io.read_grid_data(tmp_path / "missing.csv", 2)


def test_vtk_vector_cells(tmp_path):
    vals = np.arange(2 * 3 * 1 * 3, dtype=float).reshape(2, 3, 1, 3)
    p = tmp_path / "f.vtk"
    io.write_vtk(p, vals, (0.0, 0.0, 0.0), 0.5, vector=True)
    text = p.read_text().splitlines()
    assert "DIMENSIONS 3 4 2" in text and "CELL_DATA 6" in text
    assert text[-6:][1] == "9 10 11"  # x runs fastest: cell (1, 0, 0)
