"""Spectra of sharp operators.

curl# on a 3D voxel domain is reached through its inverse: with the domain
embedded in a periodic grid, the reduced inverse is

    R = P ι* S⁺ ι P,

where ι extends edge fields by zero, S⁺ is the mode-wise pseudoinverse of
the torus curl endomorphism and P projects onto ker(curl)⊥ on the domain.
Lanczos on R gives μ_j, and λ_j = 1/μ_j.

For 1D/2D the Laplacian div#grad# and the derivative ∂# come from the dense
relation calculus directly.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.optimize as sopt
import scipy.sparse.linalg as spla

from . import linrel as lr
from .cubical import CubicalComplex, build_complex, mimetic_pair, to_dense_pair
from .domain import DomainSpec, VoxelDomain, voxelize
from .lanczos import lanczos
from .projector import Embedding, ProjectorChain, embed
from .results import EigResult, Report, cluster_ids
from .torus import (TorusGrid, dense_face_to_edge_shift, mode_eigenvalues, periodic_lex_curl,
                    symbol_pseudoinverse, torus_curl)

log = logging.getLogger(__name__)

DENSE_1D_LIMIT = 1024
DENSE_2D_LIMIT = 24


def ball_beltrami_root() -> float:
    """Smallest positive root of tan x = x (the unit-ball value), by bisection."""
    # sin x - x cos x has the same positive roots and no poles
    return sopt.bisect(lambda x: np.sin(x) - x * np.cos(x), np.pi, 1.5 * np.pi, xtol=1e-15)


def _as_complex(domain) -> CubicalComplex:
    if isinstance(domain, CubicalComplex):
        return domain
    if isinstance(domain, DomainSpec):
        domain = voxelize(domain)
    if isinstance(domain, VoxelDomain):
        return build_complex(domain)
    raise TypeError(f"cannot build a complex from {type(domain).__name__}")


class SharpResolvent(spla.LinearOperator):
    """R = P ι* S⁺ ι P on the domain's edge fields (Euclidean coordinates)."""

    def __init__(self, emb: Embedding, projector: ProjectorChain, pinv=None):
        self.emb = emb
        self.projector = projector
        self.curl = torus_curl(emb.grid)
        self.pinv = pinv if pinv is not None else symbol_pseudoinverse(self.curl)
        self.applications = 0
        n = emb.n_edges
        super().__init__(dtype=np.float64, shape=(n, n))

    def _matvec(self, x):
        x = np.asarray(x, dtype=float).ravel()
        self.applications += 1
        y = self.projector(x)
        w = self.pinv(self.emb.extend(y))
        return self.projector(self.emb.restrict(w))

    def _rmatvec(self, x):
        return self._matvec(x)

    def embedded_residual(self, v: np.ndarray, lam: float) -> float:
        """‖S w − λ Π w‖ / ‖Π w‖ with w = S⁺ ι P v and Π = ι P ι*."""
        u = self.emb.extend(self.projector(v))
        w = self.pinv(u)
        Pw = self.emb.extend(self.projector(self.emb.restrict(w)))
        r = self.curl(w) - lam * Pw
        return float(np.linalg.norm(r) / np.linalg.norm(Pw))

    def symmetry_probe(self, rng: np.random.Generator, probes: int = 20) -> float:
        """max |<Rx, y> − <x, Ry>| / (‖x‖‖y‖) over random pairs."""
        worst = 0.0
        for _ in range(probes):
            x = rng.standard_normal(self.shape[0])
            y = rng.standard_normal(self.shape[0])
            d = abs(np.dot(self.matvec(x), y) - np.dot(x, self.matvec(y)))
            worst = max(worst, d / (np.linalg.norm(x) * np.linalg.norm(y)))
        return worst


class TorusResolvent(spla.LinearOperator):
    """The pseudoinverse S⁺ on all torus edge fields (no domain restriction)."""

    def __init__(self, grid: TorusGrid):
        self.grid = grid
        self.curl = torus_curl(grid)
        self.pinv = symbol_pseudoinverse(self.curl)
        m = 3 * grid.n_points
        super().__init__(dtype=np.float64, shape=(m, m))

    def _matvec(self, x):
        return self.pinv(np.asarray(x, dtype=float)).ravel()

    def _rmatvec(self, x):
        return self._matvec(x)


@dataclass
class CurlSetup:
    complex: CubicalComplex
    embedding: Embedding
    projector: ProjectorChain
    resolvent: SharpResolvent


def curl_setup(domain, cg_tol: float = 1e-10, seed: int = 42, pad: int = 2,
               grid: Optional[TorusGrid] = None) -> CurlSetup:
    c = _as_complex(domain)
    if c.dim != 3:
        raise ValueError("curl-sharp needs a 3D domain")
    emb = embed(c, grid, pad)
    P = ProjectorChain(c, cg_tol=cg_tol, seed=seed)
    return CurlSetup(c, emb, P, SharpResolvent(emb, P))


def _invert(mu: EigResult, lam_residuals: np.ndarray, cluster_rel: float, meta: dict) -> EigResult:
    lam = 1.0 / mu.eigenvalues
    ctol = cluster_rel * float(np.abs(lam).max(initial=0.0))
    return EigResult(lam, lam_residuals, ctol, mu.vectors,
                     [(1.0 / v, r) for v, r in mu.unverified if v != 0],
                     mu.converged, meta)


def curl_sharp_eigs(domain, count: int = 10, tol: float = 1e-8, cg_tol: float = 1e-10,
                    seed: int = 42, block_size: int = 4, max_dim: Optional[int] = None,
                    cluster_rel: float = 1e-6, setup: Optional[CurlSetup] = None,
                    keep_vectors: bool = True) -> EigResult:
    """The ``count`` eigenvalues of curl# of smallest magnitude (both signs).

    Residuals are the embedded-equation residuals of
    :meth:`SharpResolvent.embedded_residual`; the inverse eigenvalues μ and
    Lanczos residuals are kept in ``metadata``.
    """
    t0 = time.perf_counter()
    if setup is None:
        setup = curl_setup(domain, cg_tol, seed)
    R = setup.resolvent
    mu = lanczos(R, count, tol=tol, seed=seed, which="LM", block_size=block_size,
                 max_dim=max_dim)
    res = np.array([R.embedded_residual(v, 1.0 / m)
                    for v, m in zip(mu.vectors.T, mu.eigenvalues)]) if len(mu) else np.zeros(0)
    meta = dict(mu.metadata)
    meta.update(operator="curl-sharp", h=setup.complex.h, grid=list(setup.embedding.grid.n),
                n_edges=setup.embedding.n_edges, cg_tol=cg_tol, mu=mu.eigenvalues.tolist(),
                lanczos_residuals=mu.residuals.tolist(),
                harmonic_dim=int(setup.projector.harmonic.shape[1]),
                cg_iterations=setup.projector.iterations, seconds=time.perf_counter() - t0)
    # a Lanczos residual ε on μ shows up as about λ² ε in the embedded equation
    bound = 10 * tol * mu.metadata["norm_estimate"] / mu.eigenvalues ** 2 if len(mu) else res
    meta["residual_bounds"] = bound.tolist()
    out = _invert(mu, res, cluster_rel, meta)
    bad = res > bound
    if bad.any():
        lam = 1.0 / mu.eigenvalues
        out = EigResult(lam[~bad], res[~bad], out.cluster_tol,
                        mu.vectors[:, ~bad] if mu.vectors is not None else None,
                        out.unverified + [(float(l), float(r)) for l, r in zip(lam[bad], res[bad])],
                        False, meta)
    if not keep_vectors:
        out.vectors = None
    return out


def torus_curl_eigs(grid: TorusGrid, count: int = 10, tol: float = 1e-8, seed: int = 42,
                    block_size: int = 4) -> EigResult:
    """Smallest-magnitude nonzero curl eigenvalues on the full torus via Lanczos on S⁺."""
    R = TorusResolvent(grid)
    mu = lanczos(R, count, tol=tol, seed=seed, which="LM", block_size=block_size)
    res = np.array([np.linalg.norm(R.curl(v).ravel() - v / m) * abs(m)
                    for v, m in zip(mu.vectors.T, mu.eigenvalues)])
    return _invert(mu, res, 1e-6, dict(mu.metadata, operator="torus-curl"))


def torus_curl_spectrum(grid: TorusGrid) -> np.ndarray:
    """All curl eigenvalues on the torus from the per-mode symbols (sorted)."""
    return np.sort(mode_eigenvalues(torus_curl(grid)))


# ----------------------------------------------------------------------------
# dense oracle


def dense_torus_curl(grid: TorusGrid) -> np.ndarray:
    """Dense curl endomorphism assembled from the index-space stencil and Dirichlet kernels."""
    U = dense_face_to_edge_shift(grid)
    C = periodic_lex_curl(grid)
    return np.asarray((C.T @ U.T).T)


def dense_curl_oracle(domain, count: int = 5, pad: int = 2,
                      grid: Optional[TorusGrid] = None) -> EigResult:
    """Reference curl# eigenvalues from dense linear algebra only.

    The torus pseudoinverse comes from a dense symmetric eigendecomposition
    of the assembled curl, the kernel of curl on the domain from the
    relation calculus applied to the exported curl pair, and the eigenvalues
    from a verified dense compression.
    """
    c = _as_complex(domain)
    emb = embed(c, grid, pad)
    S = dense_torus_curl(emb.grid)
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    cut = 1e-10 * np.abs(w).max()
    inv = np.where(np.abs(w) > cut, 1.0 / np.where(np.abs(w) > cut, w, 1.0), 0.0)
    E = emb.edge_index
    VE = V[E]
    G = (VE * inv) @ VE.T
    del S, V, VE

    pair = to_dense_pair(mimetic_pair(c, 1, weights="uniform"))
    sharp = lr.sharp(pair)
    kernel = lr.parts(sharp.A_sharp).kernel
    Q = lr.complement(kernel)
    PGP = Q.basis @ (Q.basis.T @ G @ Q.basis) @ Q.basis.T
    R = lr.LinearRelation.from_matrix(PGP)
    mu = lr.point_spectrum(R, Q, tol=1e-9 * max(1.0, np.abs(G).max()))
    order = np.argsort(-np.abs(mu.eigenvalues), kind="stable")[:count]
    sel = mu.eigenvalues[order]
    lam = 1.0 / sel
    return EigResult(lam, mu.residuals[order], 1e-6 * np.abs(lam).max(), mu.vectors[:, order],
                     metadata=dict(method="dense oracle", kernel_dim=kernel.dim,
                                   grid=list(emb.grid.n)))


# ----------------------------------------------------------------------------
# 1D / 2D dense route


@dataclass
class DenseSharp:
    pair_sharp: lr.SharpPair
    B_sharp: lr.LinearRelation
    weights0: np.ndarray
    weights1: np.ndarray
    matrix: np.ndarray
    complex: CubicalComplex
    scale: float


def dense_gradient_sharp(domain, tol: float = 1e-10) -> DenseSharp:
    """grad# of a 1D/2D domain as a dense relation in orthonormal coordinates."""
    c = _as_complex(domain)
    if c.dim == 1 and c.counts()[0] > DENSE_1D_LIMIT:
        raise ValueError(f"1D dense route limited to {DENSE_1D_LIMIT} nodes")
    if c.dim == 2 and max(c.domain.mask().shape) > DENSE_2D_LIMIT:
        raise ValueError(f"2D dense route limited to {DENSE_2D_LIMIT}^2 cells")
    if c.dim == 3:
        raise ValueError("the dense Laplacian route is for 1D and 2D domains")
    m = mimetic_pair(c, 0, weights="lumped")
    # the relations are built for h*grad (norm ~ 1): graphs of badly scaled
    # operators lose digits, and every sharp-construction step commutes with scaling
    pair = to_dense_pair(m, tol)
    matrix = pair.A.operator_matrix()
    scale = c.h
    A = lr.LinearRelation.from_matrix(scale * matrix, tol=tol)
    A0 = lr.LinearRelation.from_matrix(scale * matrix, lr.parts(pair.A0).domain, tol=tol)
    sp_ = lr.sharp(lr.OperatorPair(A0, A), tol)
    return DenseSharp(sp_, lr.b_sharp(sp_), m.w_source, m.w_target, matrix, c, scale)


def laplace_sharp_eigs(domain, tol: float = 1e-10, cluster_rel: float = 1e-8,
                       dense: Optional[DenseSharp] = None) -> EigResult:
    """Full spectrum of div# grad# (eigenvalues -σ² ≤ 0, zero included).

    The operator is the relation composition B# ∘ A#, compressed onto
    dom(A#); eigenvectors are returned in grid values (not orthonormal
    coordinates) in ``metadata['grid_vectors']``.
    """
    t0 = time.perf_counter()
    ds = dense if dense is not None else dense_gradient_sharp(domain, tol)
    As = ds.pair_sharp.A_sharp
    C = lr.compose(As, ds.B_sharp)
    D = lr.parts(As).domain
    res = lr.point_spectrum(C, D, tol=1e-9, cluster_tol=cluster_rel)
    s2 = ds.scale ** 2
    res = EigResult(res.eigenvalues / s2, res.residuals / s2, cluster_rel / s2, res.vectors,
                    [(v / s2, r / s2) for v, r in res.unverified], res.converged,
                    dict(res.metadata))
    res.metadata.update(operator="laplace-sharp", h=ds.complex.h, n_dofs=int(ds.matrix.shape[1]),
                        domain_dim=D.dim, seconds=time.perf_counter() - t0,
                        grid_vectors=res.vectors / np.sqrt(ds.weights0)[:, None])
    return res


def gradient_sharp_singular_values(domain, tol: float = 1e-10,
                                   dense: Optional[DenseSharp] = None):
    """Singular triplets of grad# restricted to its domain: (σ, U, V, residuals)."""
    ds = dense if dense is not None else dense_gradient_sharp(domain, tol)
    Q = lr.parts(ds.pair_sharp.A_sharp).domain.basis
    AQ = ds.matrix @ Q
    U, s, Wt = np.linalg.svd(AQ, full_matrices=False)
    V = Q @ Wt.T
    res = np.linalg.norm(ds.matrix @ V - U * s, axis=0)
    return s, U, V, res


def d_sharp_1d_eigs(domain, tol: float = 1e-10, cluster_rel: float = 1e-8) -> EigResult:
    """∂# on an interval: spectrum i·{0, ±σ_j}, reported as the real numbers 0, ±σ_j.

    Each positive singular value of grad# gives the pair ±σ (the imaginary
    parts of the eigenvalues of the periodic derivative); the kernel gives
    one zero.
    """
    ds = dense_gradient_sharp(domain, tol)
    if ds.complex.dim != 1:
        raise ValueError("d-sharp-1d needs a 1D domain")
    s, U, V, res = gradient_sharp_singular_values(domain, tol, ds)
    smax = float(s.max(initial=0.0))
    pos = s > 1e-10 * max(1.0, smax)
    kernel_dim = lr.parts(ds.pair_sharp.A_sharp).kernel.dim
    vals = np.concatenate([np.zeros(kernel_dim), s[pos], -s[pos]])
    r = np.concatenate([np.zeros(kernel_dim), res[pos], res[pos]])
    return EigResult(vals, r, cluster_rel * max(1.0, smax),
                     metadata=dict(operator="d-sharp-1d", h=ds.complex.h,
                                   n_dofs=int(ds.matrix.shape[1])))


def circulant_laplace_values(n_nodes: int, h: float) -> np.ndarray:
    """-(4/h²) sin²(πk/(n−1)), k = 0..n−2: the periodic second difference on n−1 points."""
    k = np.arange(n_nodes - 1)
    return np.sort(-(4.0 / h ** 2) * np.sin(np.pi * k / (n_nodes - 1)) ** 2)


def interval_spec(n_nodes: int, length: float = 1.0) -> DomainSpec:
    """The interval (−L/2, L/2) with n nodes."""
    return DomainSpec("box", length / (n_nodes - 1), extent=((-length / 2, length / 2),))


# ----------------------------------------------------------------------------
# diagnostics


def parity_defect(result: EigResult) -> float:
    """Worst mismatch between the window and its negation.

    The outermost |λ| level is dropped first: a window of fixed count can
    cut through a cluster there.
    """
    lam = np.asarray(result.eigenvalues, float)
    if lam.size == 0:
        return float("inf")
    a = np.abs(lam)
    keep = a < a.max() - result.cluster_tol
    lam = np.sort(lam[keep])
    if lam.size == 0:
        return 0.0
    return float(np.abs(lam + lam[::-1]).max())


def weyl_fit(eigenvalues, volume: Optional[float] = None, min_count: int = 30):
    """Least-squares fit log N(λ) ≈ p log λ + log C on the positive eigenvalues.

    Returns ``(p, C)``; with ``volume`` given the prefactor is divided by it.
    """
    lam = np.asarray(eigenvalues.eigenvalues if isinstance(eigenvalues, EigResult)
                     else eigenvalues, dtype=float)
    lam = np.sort(lam[lam > 0])
    if lam.size < min_count:
        raise ValueError(f"need at least {min_count} positive eigenvalues, got {lam.size}")
    N = np.arange(1, lam.size + 1)
    p, logc = np.polyfit(np.log(lam), np.log(N), 1)
    C = float(np.exp(logc))
    if volume:
        C /= volume
    return float(p), C


def torus_weyl_exponent(grid: TorusGrid, fraction: float = 1 / 16) -> float:
    """Weyl exponent of the lowest positive torus curl eigenvalues.

    Only the low end of the spectrum is used: grid dispersion flattens the
    upper part and inflates the exponent there.
    """
    ref = torus_curl_spectrum(grid)
    pos = np.sort(ref[ref > 1e-9 * np.abs(ref).max()])
    return weyl_fit(pos[: max(30, int(pos.size * fraction))])[0]


def observed_order(h: Sequence[float], values: Sequence[float]) -> float:
    """Order p from three levels: (v1−v2)/(v2−v3) = (h1^p−h2^p)/(h2^p−h3^p)."""
    h1, h2, h3 = h
    v1, v2, v3 = values
    if v2 == v3:
        return np.inf
    target = (v1 - v2) / (v2 - v3)

    def f(p):
        return (h1 ** p - h2 ** p) / (h2 ** p - h3 ** p) - target

    try:
        return float(sopt.brentq(f, 0.05, 12.0))
    except ValueError:
        return float("nan")


def richardson(h: Sequence[float], values: Sequence[float], order: float) -> float:
    """Extrapolate the two finest levels with the given order."""
    h2, h3 = h[-2], h[-1]
    v2, v3 = values[-2], values[-1]
    if not np.isfinite(order):
        return float(v3)
    r = (h2 / h3) ** order
    return float(v3 + (v3 - v2) / (r - 1.0))
