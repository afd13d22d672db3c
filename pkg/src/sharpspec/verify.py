"""Invariant suites behind ``sharpspec verify``.

Each suite returns a :class:`Report`; random instances are aggregated so a
row holds the worst measurement over its family.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Callable, Optional

import numpy as np

from . import linrel as lr
from .cubical import (betti, boundary_closure_violations, build_complex, dd_residual,
                      duality_residual, intertwining_residual, mimetic_pair, to_dense_pair)
from .domain import DomainSpec, VoxelDomain, voxelize
from .lanczos import lanczos
from .projector import ProjectorChain, embed, intertwining_defect
from .results import Report
from .spectra import (SharpResolvent, TorusResolvent, circulant_laplace_values, curl_sharp_eigs,
                      curl_setup, gradient_sharp_singular_values, interval_spec, parity_defect, torus_weyl_exponent,
                      laplace_sharp_eigs, torus_curl_spectrum, weyl_fit)
from .torus import (TorusGrid, curl_block, dense_face_to_edge_shift, face_to_edge_shift,
                    lex_curl, periodic_lex_curl, symbol_pseudoinverse, torus_curl,
                    transverse_projector)

SUITES = ("linrel", "complex", "spectra")
REFERENCE_SHAPES = {
    "ball": (DomainSpec("ball", 0.25, (1.0,)), (1, 0, 0)),
    "solid-torus": (DomainSpec("solid-torus", 0.25, (1.0, 0.5)), (1, 1, 0)),
    "shell": (DomainSpec("shell", 0.25, (0.5, 1.0)), (1, 0, 1)),
}


class _Worst:
    """Collects the worst measurement per check id."""

    def __init__(self):
        self.values = defaultdict(float)
        self.tols = {}
        self.counts = defaultdict(int)
        self.failed = defaultdict(int)

    def add_report(self, rep: Report, prefix: str):
        for c in rep.checks:
            key = prefix + c.id
            v = c.measured if np.isfinite(c.measured) else np.inf
            self.values[key] = max(self.values[key], v)
            self.tols[key] = c.tol
            self.counts[key] += 1
            self.failed[key] += 0 if c.passed else 1

    def flush(self, rep: Report):
        for key in self.values:
            n, bad = self.counts[key], self.failed[key]
            rep.add(key, self.values[key], self.tols[key], passed=bad == 0,
                    note=f"worst of {n}" + (f"; {bad} failed" if bad else ""))


def random_operator(rng: np.random.Generator, max_dim: int = 40):
    """Random full-domain operator with a random rank defect (square and symmetric half the time)."""
    n0 = int(rng.integers(1, max_dim // 2 + 1))
    if rng.random() < 0.5:
        n1 = n0
    else:
        n1 = int(rng.integers(1, max_dim - n0 + 1))
    r = int(rng.integers(0, min(n0, n1) + 1))
    M = rng.standard_normal((n1, r)) @ rng.standard_normal((r, n0))
    if n0 == n1 and rng.random() < 0.5:
        M = M + M.T
    return M


def random_pair(rng: np.random.Generator, max_dim: int = 40) -> lr.OperatorPair:
    M = random_operator(rng, max_dim)
    n0 = M.shape[1]
    k = int(rng.integers(0, n0 + 1))
    D = lr.orthonormalize(rng.standard_normal((n0, k)), ambient_dim=n0)
    return lr.OperatorPair(lr.LinearRelation.from_matrix(M, D), lr.LinearRelation.from_matrix(M))


def mimetic_dense_pairs():
    """All exported mimetic pairs used by the relation suite: (label, MimeticPair)."""
    out = []
    for n in range(2, 13):
        c = build_complex(voxelize(interval_spec(n + 1)))
        out.append((f"1d-n{n}", mimetic_pair(c, 0)))
    for n in range(2, 7):
        c = build_complex(voxelize(DomainSpec("box", 1.0 / n, extent=((0, 1), (0, 1)))))
        out += [(f"2d-{n}x{n}-k{k}", mimetic_pair(c, k)) for k in range(2)]
    L = VoxelDomain(np.array([[i, j] for i in range(4) for j in range(4) if i < 2 or j < 2]), 0.25)
    cL = build_complex(L)
    out += [(f"2d-L-k{k}", mimetic_pair(cL, k)) for k in range(2)]
    for n in range(1, 4):
        c = build_complex(voxelize(DomainSpec("box", 1.0 / n, extent=((0, 1),) * 3)))
        out += [(f"3d-{n}cube-k{k}", mimetic_pair(c, k)) for k in range(3)]
    return out


def three_node_oracle(tol: float = 1e-10) -> Report:
    rep = Report("three-node")
    sp = lr.sharp(lr.path_pair(3), tol)
    expected_kerB = lr.orthonormalize([[1.0, 1.0]])
    expected_dom = lr.orthonormalize([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    rep.add("three-node-kerB", lr.distance(sp.kerB, expected_kerB), tol)
    rep.add("three-node-sharp-domain",
            lr.distance(lr.parts(sp.A_sharp).domain, expected_dom), tol)
    return rep


def linrel_suite(seed: int = 42, tol: float = 1e-10, n_random: int = 200,
                 pairing_tol: float = 1e-12) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report("linrel")
    worst = _Worst()
    for _ in range(n_random):
        M = random_operator(rng)
        A = lr.LinearRelation.from_matrix(M)
        worst.add_report(lr.verify_reduction_identities(A, tol), "random/")
        R = lr.LinearRelation.from_pairs(rng.standard_normal((int(rng.integers(1, 20)), 6)),
                                         rng.standard_normal((int(rng.integers(1, 20)), 6)))
        tmp = Report("adjoint")
        tmp.add("adjoint-involution", lr.relation_distance(lr.adjoint(lr.adjoint(R)), R), tol)
        tmp.add("adjoint-pairing-route", lr.relation_distance(lr.adjoint(R), lr.pairing_adjoint(R)),
                tol)
        worst.add_report(tmp, "random/")
        pair = random_pair(rng)
        worst.add_report(lr.verify_sharp_identities(lr.sharp(pair, tol), tol, pairing_tol),
                         "random/")
    for label, m in mimetic_dense_pairs():
        pair = to_dense_pair(m, tol)
        family = "mimetic/"
        worst.add_report(lr.verify_reduction_identities(pair.A, tol), family)
        worst.add_report(lr.verify_sharp_identities(lr.sharp(pair, tol), tol, pairing_tol), family)
    worst.flush(rep)
    rep.extend(three_node_oracle(tol))
    S = lr.second_difference_operator(12, 1.0 / 11)
    _, krein = lr.krein_sharp(lr.krein_pair(S), tol)
    rep.extend(krein)
    rep.add("krein-kernel-dim-2", abs(krein.info["kernel dim"] - 2), 0)
    return rep


def complex_suite(seed: int = 42, tol: float = 1e-10, duality_tol: float = 1e-13) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report("complex")
    single = build_complex(VoxelDomain(np.zeros((1, 3), dtype=int), 1.0))
    rep.add("single-cell-counts", 0 if single.counts() == (8, 12, 6, 1) else 1, 0,
            note=str(single.counts()))
    ball = voxelize(DomainSpec("ball", 0.5, (1.0,)))
    rep.add("ball-h1/2-cells", abs(ball.n_cells - 32), 0)
    shapes = [("cube3", voxelize(DomainSpec("box", 1 / 3, extent=((0, 1),) * 3)), None),
              ("square6", voxelize(DomainSpec("box", 1 / 6, extent=((0, 1),) * 2)), None),
              ("interval12", voxelize(interval_spec(13)), None)]
    for h in (0.25, 1 / 6):
        for name, (spec, expected) in REFERENCE_SHAPES.items():
            shapes.append((f"{name}-h{h:.4g}", voxelize(spec.with_h(h)), expected))
    for label, v, expected in shapes:
        c = build_complex(v)
        rep.add(f"{label}/dd-zero", dd_residual(c), 0)
        rep.add(f"{label}/boundary-closed", boundary_closure_violations(c), 0)
        for k in range(c.dim):
            m = mimetic_pair(c, k)
            rep.add(f"{label}/intertwining-k{k}", intertwining_residual(m), 0)
            rep.add(f"{label}/duality-k{k}", duality_residual(m, rng), duality_tol)
        if expected is not None:
            b = betti(c)
            rep.add(f"{label}/betti", 0 if tuple(b[:3]) == expected else 1, 0,
                    note=f"got {tuple(b[:3])}, expected {expected}")
            if max(c.counts()) <= 1500:
                rep.add(f"{label}/betti-methods-agree",
                        0 if betti(c, "rank") == betti(c, "topological") else 1, 0)
    return rep


def spectra_suite(seed: int = 42, tol: float = 1e-10) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report("spectra")
    g = TorusGrid((7, 9, 11), 0.5)
    u = rng.standard_normal(g.field_shape)
    v = rng.standard_normal(g.field_shape)
    S = torus_curl(g)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    rep.add("symbol-hermitian", abs(np.vdot(S(u), v) - np.vdot(u, S(v))) / (nu * nv), 1e-12)
    C = lex_curl(g)
    Cs = periodic_lex_curl(g)
    rep.add("symbol-vs-stencil", np.abs(C(u).ravel() - Cs @ u.ravel()).max() / np.abs(u).max(),
            1e-12)
    gs = TorusGrid((5, 5, 7), 1.0)
    us = rng.standard_normal(gs.field_shape)
    U = dense_face_to_edge_shift(gs)
    rep.add("shift-vs-dirichlet-kernel",
            np.abs(face_to_edge_shift(gs)(us).ravel() - U @ us.ravel()).max(), 1e-12)
    rep.add("shift-unitary", np.abs(U.T @ U - np.eye(U.shape[0])).max(), 1e-12)
    Sp = symbol_pseudoinverse(S)
    rep.add("pseudoinverse-projector", np.abs(S(Sp(u)) - transverse_projector(g)(u)).max()
            / np.abs(u).max(), 1e-11)
    w = np.linalg.eigvalsh(curl_block([2 * np.pi / 16, 0.0, 0.0]))
    rep.add("mode-eigenvalues", np.abs(w - np.array([-1, 0, 1]) * 2 * np.sin(np.pi / 16)).max(),
            1e-14)

    gl = TorusGrid((7, 9, 11), 1.0)
    ref = torus_curl_spectrum(gl)
    nz = ref[np.abs(ref) > 1e-9]
    # unequal sides keep multiplicities at 2 per sign; 12 values end a level
    lz = lanczos(TorusResolvent(gl), 12, tol=1e-10, seed=seed, which="LM")
    expect = np.sort(nz[np.argsort(np.abs(nz), kind="stable")[:12]])
    got = np.sort(1.0 / lz.eigenvalues)
    rep.add("torus-lanczos-vs-symbol", np.abs(got - expect).max() / np.abs(expect).max()
            if got.size == expect.size else np.inf, 1e-9)
    p = torus_weyl_exponent(TorusGrid.cubic(21, 1.0 / 21))
    rep.add("weyl-exponent-torus", abs(p - 3.0), 0.5, note=f"exponent {p:.4f}")

    spec = interval_spec(64)
    lap = laplace_sharp_eigs(spec)
    circ = circulant_laplace_values(64, spec.h)
    rep.add("interval-circulant", np.abs(lap.eigenvalues - circ).max() / np.abs(circ).max()
            if lap.eigenvalues.size == circ.size else np.inf, tol)
    s, *_ = gradient_sharp_singular_values(spec)
    smin = float(np.sort(s[s > 1e-8])[0])
    rep.add("interval-poincare", max(0.0, 5.0 - smin), 0.0, note=f"smallest singular value {smin:.6f}")

    cube = DomainSpec("box", 0.25, extent=((0, 1),) * 3)
    setup = curl_setup(cube, cg_tol=1e-10, seed=seed)
    rep.add("cube-embedding-intertwining", intertwining_defect(setup.embedding), 0)
    rep.extend(setup.projector.check(rng), prefix="cube/")
    rep.add("cube-resolvent-symmetry", setup.resolvent.symmetry_probe(rng, 20), 1e-10)
    eig = curl_sharp_eigs(None, count=8, setup=setup, seed=seed)
    lam = eig.eigenvalues
    rep.add("cube-parity", parity_defect(eig), eig.cluster_tol)
    return rep


def run_suite(name: str, seed: int = 42, tol: float = 1e-10) -> list:
    names = SUITES if name == "all" else (name,)
    if any(n not in SUITES for n in names):
        raise KeyError(name)
    funcs: dict = {"linrel": linrel_suite, "complex": complex_suite, "spectra": spectra_suite}
    return [funcs[n](seed=seed, tol=tol) for n in names]
