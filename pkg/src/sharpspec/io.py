"""CSV, JSON and legacy-VTK writers (and the grid-function reader)."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .results import EigResult

SPECTRUM_HEADER = ("index", "eigenvalue", "residual", "cluster_id")
REPORT_HEADER = ("suite", "check", "measured", "tolerance", "passed", "note")
CONVERGENCE_HEADER = ("h", "track", "eigenvalue", "order", "richardson", "reference", "error")


def fmt(x) -> str:
    """Round-trip float formatting; blanks for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    return format(x, ".17g")


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_spectrum_csv(path, result: EigResult) -> None:
    ids = result.cluster_ids
    _write_rows(path, SPECTRUM_HEADER,
                ((i, lam, r, int(c)) for i, (lam, r, c) in
                 enumerate(zip(result.eigenvalues, result.residuals, ids))))


def write_report_csv(path, rows: Sequence[dict]) -> None:
    _write_rows(path, REPORT_HEADER,
                ((r["suite"], r["check"], r["measured"], r["tolerance"], bool(r["passed"]), r["note"])
                 for r in rows))


def write_convergence_csv(path, rows: Sequence[dict]) -> None:
    _write_rows(path, CONVERGENCE_HEADER, ([r.get(k) for k in CONVERGENCE_HEADER] for r in rows))


def write_snapshots_csv(path, times: np.ndarray, snapshots: np.ndarray) -> None:
    def rows():
        for t, u in zip(times, snapshots):
            for i, v in enumerate(u):
                yield (t, i, v)

    _write_rows(path, ("t", "dof_index", "value"), rows())


def write_energy_csv(path, times: np.ndarray, energy: np.ndarray) -> None:
    _write_rows(path, ("t", "energy"), zip(times, energy))


def environment() -> dict:
    import scipy

    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else str(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_metadata(path, data: dict) -> None:
    """Sorted-key JSON; callers must not put timings or dates in here."""
    Path(path).write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def read_grid_data(path, n: int) -> dict:
    """Read initial data from CSV.

    Accepted columns: ``value`` or ``u0`` (required), ``v0`` (optional) and
    ``dof_index`` (optional; rows are then placed by index).  Returns a dict
    with arrays ``u0`` and ``v0`` of length ``n``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty data file")
        names = [f.strip() for f in reader.fieldnames]
        reader.fieldnames = names
        ucol = "u0" if "u0" in names else "value" if "value" in names else None
        if ucol is None:
            raise ValueError(f"{path}: needs a 'value' or 'u0' column")
        rows = list(reader)
    if len(rows) != n:
        raise ValueError(f"{path}: {len(rows)} values, the grid has {n} degrees of freedom")
    if "dof_index" in names:
        idx = np.array([int(r["dof_index"]) for r in rows])
        if sorted(idx.tolist()) != list(range(n)):
            raise ValueError(f"{path}: dof_index must be a permutation of 0..{n - 1}")
    else:
        idx = np.arange(n)
    out = {}
    for key, col in (("u0", ucol), ("v0", "v0" if "v0" in names else None)):
        arr = np.zeros(n)
        if col is not None:
            arr[idx] = [float(r[col]) for r in rows]
        out[key] = arr
    return out


def write_vtk(path, values: np.ndarray, origin: Sequence[float], spacing: float,
              name: str = "field", cell_data: bool = True, vector: bool = False) -> None:
    """Legacy ASCII STRUCTURED_POINTS file.

    ``values`` is indexed [i, j, k] (missing axes allowed), with a trailing
    axis of length 3 when ``vector`` is set.  With ``cell_data`` the values sit
    on cells and the point grid is one larger per axis.
    """
    values = np.asarray(values, dtype=float)
    grid = values.shape[:-1] if vector else values.shape
    dims = list(grid) + [1] * (3 - len(grid))
    org = list(origin) + [0.0] * (3 - len(origin))
    npts = [d + 1 if cell_data and i < len(grid) else d for i, d in enumerate(dims)]
    count = int(np.prod(dims))
    # VTK wants x fastest
    arr = values.reshape(tuple(dims) + ((3,) if vector else ()))
    arr = np.transpose(arr, (2, 1, 0, 3) if vector else (2, 1, 0)).reshape(count, -1)
    lines = ["# vtk DataFile Version 3.0", name, "ASCII", "DATASET STRUCTURED_POINTS",
             "DIMENSIONS {} {} {}".format(*npts), "ORIGIN {} {} {}".format(*(fmt(o) for o in org)),
             "SPACING {0} {0} {0}".format(fmt(spacing)),
             f"{'CELL_DATA' if cell_data else 'POINT_DATA'} {count}"]
    if vector:
        lines.append(f"VECTORS {name} double")
    else:
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
    lines += [" ".join(fmt(v) for v in row) for row in arr]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
