"""Acceptance criteria, one test each; outcomes are tabulated in the terminal summary."""
import csv
import time

import numpy as np
import pytest

from sharpspec import linrel as lr
from sharpspec.cli import main
from sharpspec.domain import DomainSpec
from sharpspec.evolution import EigenBasis, evolve_heat, evolve_wave, heat_expm_oracle
from sharpspec.spectra import (ball_beltrami_root, circulant_laplace_values, curl_setup,
                               curl_sharp_eigs, dense_curl_oracle, gradient_sharp_singular_values,
                               interval_spec, laplace_sharp_eigs, parity_defect,
                               torus_weyl_exponent)
from sharpspec.torus import TorusGrid
from sharpspec.verify import complex_suite, linrel_suite, three_node_oracle

BELTRAMI = 4.493409
CG_TOL = 1e-10
BALL_LEVELS = (1 / 12, 1 / 16, 1 / 24)


def _ball(h):
    return DomainSpec("ball", h, (1.0,))


def _cube(h):
    return DomainSpec("box", h, extent=((0, 1),) * 3)


@pytest.fixture(scope="module")
def ball_fine():
    """Ball at h = 1/24: setup, symmetry probe and the 50 smallest |λ|."""
    t0 = time.perf_counter()
    setup = curl_setup(_ball(1 / 24), cg_tol=CG_TOL, seed=42)
    sym = setup.resolvent.symmetry_probe(np.random.default_rng(42), probes=20)
    t_sym = time.perf_counter() - t0
    eig = curl_sharp_eigs(None, count=50, cg_tol=CG_TOL, seed=42, setup=setup, keep_vectors=False)
    return dict(setup=setup, symmetry=sym, t_sym=t_sym, eig=eig,
                seconds=time.perf_counter() - t0)


@pytest.fixture(scope="module")
def ball_coarse():
    out = {}
    for h in BALL_LEVELS[:2]:
        t0 = time.perf_counter()
        eig = curl_sharp_eigs(_ball(h), count=8, cg_tol=CG_TOL, seed=42, keep_vectors=False)
        out[h] = (eig, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def cube_eigs():
    return curl_sharp_eigs(_cube(1 / 8), count=10, cg_tol=CG_TOL, seed=42, keep_vectors=False)


def _smallest_positive(eig):
    lam = eig.eigenvalues
    return float(lam[lam > 0].min())


def test_relation_calculus_suite(record):
    t0 = time.perf_counter()
    rep = linrel_suite(seed=42, tol=1e-10, n_random=200)
    dt = time.perf_counter() - t0
    bad = [c.id for c in rep.checks if not c.passed]
    ok = rep.passed and dt <= 60
    record(1, "relation calculus on random and mimetic instances", ok,
           f"{len(rep.checks)} checks, failed={bad}, {dt:.1f}s")
    assert ok


def test_three_node_oracle(record):
    rep = three_node_oracle(1e-10)
    worst = max(c.measured for c in rep.checks)
    record(2, "three-node worked example", rep.passed, f"subspace distance {worst:.2e}")
    assert rep.passed


def test_interval_periodicity(record, tmp_path):
    t0 = time.perf_counter()
    rel = {}
    for n in (64, 256):
        lam = laplace_sharp_eigs(interval_spec(n)).eigenvalues
        circ = circulant_laplace_values(n, 1.0 / (n - 1))
        rel[n] = np.abs(lam - circ).max() / np.abs(circ).max() if lam.size == circ.size else np.inf
    lam = np.sort(laplace_sharp_eigs(interval_spec(256)).eigenvalues)[::-1]
    cont = np.array([-(2 * np.pi * k) ** 2 for k in range(1, 6) for _ in range(2)])
    cont_err = np.abs(lam[1:11] - cont).max() / np.abs(cont).min()
    cont_rel = np.max(np.abs(lam[1:11] - cont) / np.abs(cont))
    domain = tmp_path / "interval.json"
    domain.write_text('{"shape": "box", "h": 0.01, "extent": [[-0.5, 0.5]]}')
    out = tmp_path / "conv.csv"
    code = main(["convergence", "--domain", str(domain), "--operator", "laplace-sharp",
                 "--h-list", "1/63,1/127,1/255,1/511", "--tracks", "6", "--out", str(out)])
    with open(out) as fh:
        orders = {int(r["track"]): float(r["order"]) for r in csv.DictReader(fh)}
    dt = time.perf_counter() - t0
    ok = (max(rel.values()) <= 1e-10 and cont_rel <= 0.02 and code == 0
          and all(1.5 <= p <= 2.5 for p in orders.values()) and dt <= 60)
    record(3, "interval periodicity", ok,
           f"circulant rel {max(rel.values()):.1e}, continuum k<=5 {cont_rel:.2%}, "
           f"orders {[round(orders[t], 3) for t in sorted(orders)]}, {dt:.1f}s")
    assert ok


def test_poincare_surrogate(record):
    smin = {}
    for n in (64, 128, 256, 512):
        s, *_ = gradient_sharp_singular_values(interval_spec(n))
        smin[n] = float(np.sort(s[s > 1e-8])[0])
    off = abs(smin[512] - 2 * np.pi) / (2 * np.pi)
    ok = min(smin.values()) >= 5.0 and off <= 0.01
    record(4, "closed-range surrogate", ok,
           f"smallest singular values {', '.join(f'{n}:{v:.5f}' for n, v in smin.items())}")
    assert ok


def test_mimetic_exactness(record):
    rep = complex_suite(seed=42)
    betti_rows = [c for c in rep.checks if c.id.endswith("/betti")]
    worst_dual = max(c.measured for c in rep.checks if "/duality-" in c.id)
    bad = [c.id for c in rep.checks if not c.passed]
    ok = rep.passed and len(betti_rows) == 6
    record(5, "mimetic exactness", ok,
           f"dd/intertwining integer-exact, duality {worst_dual:.1e}, "
           f"Betti rows {len(betti_rows)}, failed={bad}")
    assert ok


def test_resolvent_symmetry(record, ball_fine):
    tol = max(1e-10, 10 * CG_TOL)
    ok = ball_fine["symmetry"] <= tol and ball_fine["t_sym"] <= 600
    record(6, "resolvent symmetry, ball h=1/24", ok,
           f"residual {ball_fine['symmetry']:.1e} (tol {tol:.0e}), {ball_fine['t_sym']:.0f}s")
    assert ok


def test_beltrami_benchmark(record, ball_fine, ball_coarse):
    ref = ball_beltrami_root()
    values = [_smallest_positive(ball_coarse[h][0]) for h in BALL_LEVELS[:2]]
    values.append(_smallest_positive(ball_fine["eig"]))
    errors = [abs(v - ref) / ref for v in values]
    total = ball_fine["seconds"] + sum(t for _, t in ball_coarse.values())
    ok = (abs(ref - BELTRAMI) < 1e-6 and errors[-1] <= 0.10
          and all(b <= a for a, b in zip(errors, errors[1:])) and total <= 900)
    record(7, "unit-ball Beltrami benchmark", ok,
           f"λ = {', '.join(f'{v:.4f}' for v in values)} vs {ref:.6f}, "
           f"errors {', '.join(f'{e:.2%}' for e in errors)}, {total:.0f}s")
    assert ok


def test_cross_method_agreement(record, cube_eigs):
    t0 = time.perf_counter()
    oracle = dense_curl_oracle(_cube(1 / 8), count=5)
    dt = time.perf_counter() - t0
    a = np.sort(np.abs(cube_eigs.eigenvalues))[:5]
    b = np.sort(np.abs(oracle.eigenvalues))[:5]
    rel = np.abs(a - b).max() / b.max() if a.size == b.size == 5 else np.inf
    ok = rel <= 1e-6 and dt <= 300
    record(8, "resolvent route vs dense oracle, cube h=1/8", ok,
           f"relative difference {rel:.1e}, oracle {dt:.0f}s")
    assert ok


def test_parity_symmetry(record, cube_eigs):
    d = parity_defect(cube_eigs)
    ok = d <= cube_eigs.cluster_tol
    record(9, "spectrum symmetric under negation, cube", ok,
           f"defect {d:.1e} (cluster_tol {cube_eigs.cluster_tol:.1e})")
    assert ok


def test_discreteness_surrogate(record, ball_fine):
    eig = ball_fine["eig"]
    mu = np.sort(np.abs(eig.metadata["mu"]))[::-1]
    ctol = 1e-6 * mu[0]
    levels, mult = [], []
    for m in mu:
        if levels and abs(levels[-1] - m) <= ctol:
            mult[-1] += 1
        else:
            levels.append(m)
            mult.append(1)
    decreasing = all(b < a - ctol for a, b in zip(levels, levels[1:]))
    p = torus_weyl_exponent(TorusGrid.cubic(21, 1.0 / 21))
    ok = (mu.size == 50 and decreasing and mu[49] < mu[4] and max(mult) <= 12
          and 2.5 <= p <= 3.5)
    record(10, "discreteness surrogate", ok,
           f"{len(levels)} distinct |μ| levels, max multiplicity {max(mult)}, "
           f"|μ_50|={mu[49]:.4f} < |μ_5|={mu[4]:.4f}, Weyl exponent {p:.3f}")
    assert ok


def test_krein_example(record):
    S = lr.second_difference_operator(12, 1.0 / 11)
    _, rep = lr.krein_sharp(lr.krein_pair(S), 1e-10)
    sym = rep["krein-symmetric"].measured
    ok = rep.passed and rep.info["kernel dim"] == 2 and sym <= 1e-10
    record(11, "Krein-von Neumann example, n=12", ok,
           f"kernel dim {rep.info['kernel dim']}, min eigenvalue "
           f"{min(rep.info['eigenvalues']):.2e}, symmetry {sym:.1e}")
    assert ok


def test_evolution(record, rng):
    spec = interval_spec(128)
    basis = EigenBasis.from_domain(spec)
    u0 = rng.standard_normal(basis.n)
    times = np.linspace(0, 0.05, 11)
    heat = evolve_heat(basis, u0, times)
    mass = np.abs(heat.kernel_coefficients - heat.kernel_coefficients[0]).max()
    monotone = bool(np.all(np.diff(heat.energy) <= 1e-12 * heat.energy[0]))
    oracle = heat_expm_oracle(spec, u0, times)
    expm = np.abs(heat.snapshots - oracle).max() / np.abs(oracle).max()
    wave = evolve_wave(basis, u0, rng.standard_normal(basis.n), np.linspace(0, 10, 101))
    drift = np.abs(wave.energy - wave.energy[0]).max() / wave.energy[0]
    ok = mass <= 1e-10 and monotone and drift <= 1e-8 and expm <= 1e-8
    record(12, "heat and wave evolution, n=128", ok,
           f"mass drift {mass:.1e}, monotone {monotone}, wave energy {drift:.1e}, "
           f"expm {expm:.1e}")
    assert ok


def test_determinism(record, tmp_path):
    interval = tmp_path / "interval.json"
    interval.write_text('{"shape": "box", "h": "1/63", "extent": [[-0.5, 0.5]]}')
    cube = tmp_path / "cube.json"
    cube.write_text('{"shape": "box", "h": 0.25, "extent": [[0, 1], [0, 1], [0, 1]]}')
    data = tmp_path / "u0.csv"
    data.write_text("value\n" + "\n".join(str(np.sin(3 * i)) for i in range(64)) + "\n")
    commands = {
        "verify.csv": ["verify", "--suite", "complex"],
        "curl.csv": ["spectrum", "--domain", str(cube), "--operator", "curl-sharp", "--count", "8"],
        "lap.csv": ["spectrum", "--domain", str(interval), "--operator", "laplace-sharp"],
        "d.csv": ["spectrum", "--domain", str(interval), "--operator", "d-sharp-1d"],
        "conv.csv": ["convergence", "--domain", str(interval), "--operator", "laplace-sharp",
                     "--h-list", "1/15,1/31,1/63"],
        "heat.csv": ["evolve", "--domain", str(interval), "--equation", "heat", "--data",
                     str(data), "--times", "0:0.1:5"],
    }
    same, codes = [], []
    for name, cmd in commands.items():
        outputs = []
        for run in (1, 2):
            out = tmp_path / f"run{run}" / name
            out.parent.mkdir(exist_ok=True)
            codes.append(main(cmd + ["--out", str(out)]))
            files = sorted(out.parent.glob(out.stem + "*"))
            outputs.append({f.name: f.read_bytes() for f in files})
        same.append(outputs[0] == outputs[1])
    ok = all(same) and all(c == 0 for c in codes)
    record(13, "byte-identical reruns", ok,
           f"{sum(same)}/{len(same)} commands identical, exit codes {sorted(set(codes))}")
    assert ok
