"""Command-line front end: ``sharpspec verify|spectrum|convergence|evolve``.

Exit codes: 0 on success, 1 when a check fails or a solve is only partial,
2 on bad input (parse errors, missing files, incompatible options).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .domain import DomainError, DomainSpec, voxelize
from .evolution import EigenBasis, evolve_heat, evolve_wave
from .results import EigResult
from .spectra import (ball_beltrami_root, curl_setup, curl_sharp_eigs, d_sharp_1d_eigs,
                      laplace_sharp_eigs, observed_order, richardson)
from .verify import SUITES, run_suite

log = logging.getLogger("sharpspec")

OPERATORS = ("curl-sharp", "laplace-sharp", "d-sharp-1d")
OPERATOR_DIMS = {"curl-sharp": (3,), "laplace-sharp": (1, 2), "d-sharp-1d": (1,)}
# metadata that varies run to run and must stay out of the output files
VOLATILE = ("seconds", "grid_vectors")


class UsageError(Exception):
    """Bad input; reported on stderr with exit code 2."""


def _sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def _parse_real(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_list(text: str) -> list:
    """Comma-separated reals (fractions allowed)."""
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError("empty list")
    return [_parse_real(t) for t in items]


def parse_times(text: str) -> np.ndarray:
    """``t0,t1,...`` or ``start:stop:count`` (inclusive, evenly spaced)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("time range must be start:stop:count")
        start, stop = _parse_real(parts[0]), _parse_real(parts[1])
        try:
            num = int(parts[2])
        except ValueError:
            raise UsageError(f"bad time count {parts[2]!r}") from None
        if num < 1:
            raise UsageError("time count must be positive")
        return np.linspace(start, stop, num)
    return np.array(parse_list(text))


def _load_domain(path) -> DomainSpec:
    try:
        return DomainSpec.load(path)
    except FileNotFoundError:
        raise UsageError(f"domain file not found: {path}") from None
    except (DomainError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _check_operator(spec: DomainSpec, operator: str) -> None:
    if spec.dim not in OPERATOR_DIMS[operator]:
        raise UsageError(f"{operator} is not defined for a {spec.dim}D domain")


def _smallest(res: EigResult, count: int) -> EigResult:
    """The ``count`` eigenvalues of smallest magnitude (all if fewer)."""
    order = np.argsort(np.abs(res.eigenvalues), kind="stable")[:count]
    vecs = res.vectors[:, order] if res.vectors is not None else None
    meta = dict(res.metadata)
    if "grid_vectors" in meta:
        meta["grid_vectors"] = meta["grid_vectors"][:, order]
    return EigResult(res.eigenvalues[order], res.residuals[order], res.cluster_tol, vecs,
                     list(res.unverified), res.converged, meta)


def compute_spectrum(spec: DomainSpec, operator: str, count: int, tol: float, seed: int,
                     cg_tol: float, setup=None) -> EigResult:
    _check_operator(spec, operator)
    if operator == "curl-sharp":
        return curl_sharp_eigs(spec, count=count, tol=tol, cg_tol=cg_tol, seed=seed, setup=setup)
    dense_tol = min(tol, 1e-10)
    if operator == "laplace-sharp":
        return _smallest(laplace_sharp_eigs(spec, tol=dense_tol), count)
    return _smallest(d_sharp_1d_eigs(spec, tol=dense_tol), count)


def _public_metadata(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if k not in VOLATILE}


# ----------------------------------------------------------------------------
# field export


def _edge_field_to_cells(setup, vector: np.ndarray) -> tuple:
    """Average each voxel's four edges per axis; returns (values[i,j,k,3], origin)."""
    emb = setup.embedding
    v = setup.complex.domain
    u = emb.extend(vector)
    lo, hi = v.bounding_box
    cells = np.zeros(tuple(hi - lo) + (3,))
    p = v.cells + emb.shift
    for a in range(3):
        b, c = [x for x in range(3) if x != a]
        acc = np.zeros(p.shape[0])
        for ob in (0, 1):
            for oc in (0, 1):
                q = p.copy()
                q[:, b] += ob
                q[:, c] += oc
                acc += u[a][tuple(q.T)]
        cells[tuple((v.cells - lo).T) + (a,)] = acc / 4
    return cells, v.origin + lo * v.h


def _vertex_field_to_grid(complex_, values: np.ndarray) -> tuple:
    v = complex_.domain
    lo, hi = v.bounding_box
    grid = np.zeros(tuple(hi - lo + 1))
    grid[tuple((complex_.anchors(0) - lo).T)] = values
    return grid, v.origin + lo * v.h


def export_fields(directory, spec: DomainSpec, operator: str, res: EigResult, setup=None) -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if operator == "curl-sharp":
        for i in range(len(res)):
            vals, origin = _edge_field_to_cells(setup, res.vectors[:, i])
            path = directory / f"mode_{i:03d}.vtk"
            io.write_vtk(path, vals, origin, spec.h, name="eigenfield", cell_data=True,
                         vector=True)
            written.append(path)
        return written
    from .cubical import build_complex

    c = build_complex(voxelize(spec))
    if operator == "laplace-sharp":
        fields = res.metadata["grid_vectors"]
    else:
        raise UsageError("field export is available for curl-sharp and laplace-sharp")
    for i in range(fields.shape[1]):
        vals, origin = _vertex_field_to_grid(c, fields[:, i])
        path = directory / f"mode_{i:03d}.vtk"
        io.write_vtk(path, vals, origin, spec.h, name="eigenfunction", cell_data=False)
        written.append(path)
    return written


# ----------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}, all")
    reports = run_suite(args.suite, seed=args.seed, tol=args.tol)
    rows = [row for rep in reports for row in rep.as_rows()]
    for r in rows:
        flag = "PASS" if r["passed"] else "FAIL"
        print(f"{flag} {r['suite']}/{r['check']} measured={io.fmt(r['measured'])} "
              f"tol={io.fmt(r['tolerance'])}")
    ok = all(rep.passed for rep in reports)
    print(f"{sum(r['passed'] for r in rows)}/{len(rows)} checks passed")
    if args.out:
        io.write_report_csv(args.out, rows)
        io.write_metadata(_sidecar(args.out), dict(
            command="verify", suite=args.suite, seed=args.seed, tol=args.tol, passed=ok,
            environment=io.environment(),
            info={rep.name: rep.info for rep in reports}))
    return 0 if ok else 1


def cmd_spectrum(args) -> int:
    spec = _load_domain(args.domain)
    if args.seed is not None:
        spec = DomainSpec.from_dict(dict(spec.to_dict(), seed=args.seed))
    _check_operator(spec, args.operator)
    if args.count < 1:
        raise UsageError("--count must be positive")
    setup = curl_setup(spec, args.cg_tol, spec.seed) if args.operator == "curl-sharp" else None
    res = compute_spectrum(spec, args.operator, args.count, args.tol, spec.seed, args.cg_tol,
                           setup)
    partial = (not res.converged) or bool(res.unverified) or len(res) < args.count
    io.write_spectrum_csv(args.out, res)
    io.write_metadata(_sidecar(args.out), dict(
        command="spectrum", operator=args.operator, domain=spec.to_dict(), count=args.count,
        tol=args.tol, cg_tol=args.cg_tol, seed=spec.seed, partial=partial,
        reported=len(res), unverified=res.unverified, environment=io.environment(),
        solver=_public_metadata(res.metadata)))
    for lam, r, cid in zip(res.eigenvalues, res.residuals, res.cluster_ids):
        print(f"{io.fmt(lam)}\tresidual={r:.3e}\tcluster={cid}")
    if args.export_fields:
        export_fields(args.export_fields, spec, args.operator, res, setup)
    if partial:
        print(f"partial result: {len(res)} of {args.count} eigenvalues verified", file=sys.stderr)
        return 1
    return 0


def _reference(spec: DomainSpec, operator: str, track: int) -> Optional[float]:
    """Continuum value of a tracked eigenvalue, where one is known."""
    if spec.dim == 1:
        (a, b), = spec.extent
        k = (track + 2) // 2  # tracks 0,1 -> k=1 (double), 2,3 -> k=2, ...
        w = 2 * np.pi * k / (b - a)
        return -w ** 2 if operator == "laplace-sharp" else w
    if operator == "curl-sharp" and spec.shape == "ball":
        return ball_beltrami_root() / spec.radii(1)[0]
    return None


def _tracked(res: EigResult, operator: str, tracks: int) -> list:
    """Values followed across levels: nonzero eigenvalues by increasing |λ|.

    For curl# only the positive half is tracked (the spectrum is symmetric);
    for ∂# the positive σ; for div#grad# every nonzero eigenvalue.
    """
    lam = res.eigenvalues
    nz = np.abs(lam) > res.cluster_tol
    if operator in ("curl-sharp", "d-sharp-1d"):
        nz &= lam > 0
    vals = lam[nz]
    return list(vals[np.argsort(np.abs(vals), kind="stable")][:tracks])


def cmd_convergence(args) -> int:
    spec = _load_domain(args.domain)
    _check_operator(spec, args.operator)
    hs = sorted(parse_list(args.h_list), reverse=True)
    if len(hs) < 3:
        raise UsageError("a convergence study needs at least 3 grid levels")
    if any(h <= 0 for h in hs):
        raise UsageError("grid sizes must be positive")
    count = args.count or (2 * args.tracks + 6 if args.operator == "curl-sharp" else 4 * args.tracks + 2)
    levels = []
    for h in hs:
        sp = spec.with_h(h)
        res = compute_spectrum(sp, args.operator, count, args.tol, spec.seed, args.cg_tol)
        levels.append(_tracked(res, args.operator, args.tracks))
        log.info("h=%g done", h)
    n_tracks = min(len(v) for v in levels)
    rows = []
    ok = True
    for t in range(n_tracks):
        vals = [lv[t] for lv in levels]
        order = observed_order(hs[-3:], vals[-3:])
        extrap = richardson(hs, vals, order)
        ref = _reference(spec, args.operator, t)
        for h, v in zip(hs, vals):
            err = abs(v - ref) / abs(ref) if ref is not None else None
            rows.append(dict(h=h, track=t, eigenvalue=v, order=order, richardson=extrap,
                             reference=ref, error=err))
    io.write_convergence_csv(args.out, rows)
    io.write_metadata(_sidecar(args.out), dict(
        command="convergence", operator=args.operator, domain=spec.to_dict(), h=hs,
        tracks=n_tracks, tol=args.tol, cg_tol=args.cg_tol, environment=io.environment()))
    for r in rows:
        print(f"h={io.fmt(r['h'])} track={r['track']} value={io.fmt(r['eigenvalue'])} "
              f"order={r['order']:.4g}")
    if n_tracks < args.tracks:
        ok = False
        print(f"only {n_tracks} of {args.tracks} tracks available at every level", file=sys.stderr)
    return 0 if ok else 1


def cmd_evolve(args) -> int:
    spec = _load_domain(args.domain)
    if spec.dim not in (1, 2):
        raise UsageError("evolve is available for 1D and 2D domains")
    if not Path(args.data).is_file():
        raise UsageError(f"data file not found: {args.data}")
    times = parse_times(args.times)
    basis = EigenBasis.from_domain(spec, count=args.modes)
    try:
        data = io.read_grid_data(args.data, basis.n)
        if args.equation == "heat":
            res = evolve_heat(basis, data["u0"], times)
        else:
            res = evolve_wave(basis, data["u0"], data["v0"], times)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    io.write_snapshots_csv(out, res.times, res.snapshots)
    energy_path = out.with_name(out.stem + "_energy.csv")
    io.write_energy_csv(energy_path, res.times, res.energy)
    io.write_metadata(_sidecar(out), dict(
        command="evolve", equation=args.equation, domain=spec.to_dict(), modes=len(basis.values),
        n_dofs=basis.n, truncation_residual=res.truncation_residual,
        kernel_modes=int(basis.kernel.sum()), environment=io.environment()))
    print(f"wrote {out} and {energy_path} ({len(res.times)} times, {basis.n} values each)")
    return 0


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharpspec", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run invariant suites and write a residual report")
    v.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES)}, all")
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--tol", type=float, default=1e-10)
    v.add_argument("--out", help="report CSV (a JSON sidecar is written next to it)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spectrum", help="eigenvalues of a sharp operator on a domain")
    s.add_argument("--domain", required=True, help="domain JSON file")
    s.add_argument("--operator", required=True, choices=OPERATORS)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--cg-tol", type=float, default=1e-10)
    s.add_argument("--seed", type=int, default=None, help="overrides the domain file's seed")
    s.add_argument("--out", required=True, help="spectrum CSV")
    s.add_argument("--export-fields", metavar="DIR", help="write eigenfields as VTK files")
    s.set_defaults(func=cmd_spectrum)

    c = sub.add_parser("convergence", help="eigenvalues across grid sizes with fitted order")
    c.add_argument("--domain", required=True)
    c.add_argument("--operator", required=True, choices=OPERATORS)
    c.add_argument("--h-list", required=True, help="comma-separated grid sizes, e.g. 1/12,1/16,1/24")
    c.add_argument("--tracks", type=int, default=3)
    c.add_argument("--count", type=int, default=None)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--cg-tol", type=float, default=1e-10)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_convergence)

    e = sub.add_parser("evolve", help="heat or wave equation by eigenexpansion")
    e.add_argument("--domain", required=True)
    e.add_argument("--equation", required=True, choices=("heat", "wave"))
    e.add_argument("--data", required=True, help="CSV with a value (or u0) column, optional v0")
    e.add_argument("--times", required=True, help="t0,t1,... or start:stop:count")
    e.add_argument("--modes", type=int, default=None, help="keep this many modes (default all)")
    e.add_argument("--out", required=True, help="snapshot CSV; energy goes to <stem>_energy.csv")
    e.set_defaults(func=cmd_evolve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sharpspec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
