import csv
import json

import numpy as np
import pytest

from sharpspec.cli import main, parse_times


@pytest.fixture
def interval(tmp_path):
    p = tmp_path / "interval.json"
    p.write_text(json.dumps({"shape": "box", "h": "1/31", "extent": [[-0.5, 0.5]]}))
    return p


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_times():
    np.testing.assert_allclose(parse_times("0:1:5"), [0, 0.25, 0.5, 0.75, 1])
    np.testing.assert_allclose(parse_times("0,1/2,1"), [0, 0.5, 1])


def test_verify_linrel_passes(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["verify", "--suite", "linrel", "--seed", "42", "--out", str(out)]) == 0
    rows = _rows(out)
    assert rows and all(r["passed"] == "true" for r in rows)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["passed"] and meta["seed"] == 42


def test_verify_complex_dd_rows_zero(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["verify", "--suite", "complex", "--out", str(out)]) == 0
    dd = [r for r in _rows(out) if r["check"].endswith("dd-zero")]
    assert dd and all(float(r["measured"]) == 0 for r in dd)


def test_verify_spectra_symbol_vs_stencil(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["verify", "--suite", "spectra", "--tol", "1e-10", "--out", str(out)]) == 0
    row = next(r for r in _rows(out) if r["check"] == "symbol-vs-stencil")
    assert float(row["measured"]) <= 1e-12


def test_unknown_suite_exit_code():
    assert main(["verify", "--suite", "bogus"]) == 2


def test_spectrum_d_sharp(tmp_path, interval):
    out = tmp_path / "d.csv"
    assert main(["spectrum", "--domain", str(interval), "--operator", "d-sharp-1d",
                 "--count", "5", "--out", str(out)]) == 0
    lam = np.array([float(r["eigenvalue"]) for r in _rows(out)])
    np.testing.assert_allclose(np.sort(lam), -np.sort(lam)[::-1], atol=1e-9)
    assert out.read_text().startswith("index,eigenvalue,residual,cluster_id\n")


def test_spectrum_curl_with_field_export(tmp_path):
    dom = tmp_path / "cube.json"
    dom.write_text('{"shape": "box", "h": 0.25, "extent": [[0, 1], [0, 1], [0, 1]]}')
    out = tmp_path / "c.csv"
    fields = tmp_path / "fields"
    assert main(["spectrum", "--domain", str(dom), "--operator", "curl-sharp", "--count", "6",
                 "--out", str(out), "--export-fields", str(fields)]) == 0
    files = sorted(fields.glob("*.vtk"))
    assert len(files) == len(_rows(out)) == 6
    assert "VECTORS eigenfield double" in files[0].read_text()


def test_spectrum_errors(tmp_path, interval):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["spectrum", "--domain", str(empty), "--operator", "curl-sharp",
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["spectrum", "--domain", str(interval), "--operator", "curl-sharp",
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["spectrum", "--domain", str(tmp_path / "nope.json"), "--operator",
                 "laplace-sharp", "--out", str(tmp_path / "x.csv")]) == 2


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--operator", "warp-drive"])
    assert exc.value.code == 2


def test_convergence_columns_and_level_check(tmp_path, interval):
    out = tmp_path / "c.csv"
    assert main(["convergence", "--domain", str(interval), "--operator", "laplace-sharp",
                 "--h-list", "1/15,1/31,1/63", "--tracks", "2", "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["h", "track", "eigenvalue", "order", "richardson", "reference",
                             "error"]
    assert all(1.5 <= float(r["order"]) <= 2.5 for r in rows)
    assert main(["convergence", "--domain", str(interval), "--operator", "laplace-sharp",
                 "--h-list", "1/15,1/31", "--out", str(out)]) == 2


def test_evolve_heat_constant_and_wave_energy(tmp_path, interval):
    n = 32
    const = tmp_path / "c.csv"
    const.write_text("value\n" + "1.5\n" * n)
    out = tmp_path / "heat.csv"
    assert main(["evolve", "--domain", str(interval), "--equation", "heat", "--data", str(const),
                 "--times", "0,0.5,1", "--out", str(out)]) == 0
    vals = np.array([float(r["value"]) for r in _rows(out)])
    np.testing.assert_allclose(vals, 1.5, atol=1e-12)

    x = np.linspace(-0.5, 0.5, n)
    data = tmp_path / "w.csv"
    data.write_text("u0,v0\n" + "".join(f"{np.cos(2 * np.pi * v)},0\n" for v in x))
    out = tmp_path / "wave.csv"
    assert main(["evolve", "--domain", str(interval), "--equation", "wave", "--data", str(data),
                 "--times", "0:10:21", "--out", str(out)]) == 0
    energy = np.array([float(r["energy"]) for r in _rows(tmp_path / "wave_energy.csv")])
    assert np.ptp(energy) <= 1e-8 * energy[0]


def test_evolve_missing_and_mismatched_data(tmp_path, interval):
    out = str(tmp_path / "o.csv")
    assert main(["evolve", "--domain", str(interval), "--equation", "heat", "--data",
                 str(tmp_path / "missing.csv"), "--times", "0,1", "--out", out]) == 2
    short = tmp_path / "s.csv"
    short.write_text("value\n1\n2\n")
    assert main(["evolve", "--domain", str(interval), "--equation", "heat", "--data",
                 str(short), "--times", "0,1", "--out", out]) == 2
