"""Embedding of a voxel complex into a periodic grid and the curl-kernel projector."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cubical import CubicalComplex, betti
from .results import Report
from .torus import TorusGrid, odd_fft_size, periodic_gradient, periodic_lex_curl

log = logging.getLogger(__name__)

DEFAULT_PAD = 2


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""


@dataclass(eq=False)
class Embedding:
    """Extension by zero of Omega's edge fields into torus edge fields, and its adjoint."""

    complex: CubicalComplex
    grid: TorusGrid
    shift: np.ndarray
    vertex_index: np.ndarray
    edge_index: np.ndarray
    face_index: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edge_index.size

    def extend(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros(self.grid.field_shape)
        u.reshape(-1)[self.edge_index] = x
        return u

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u).reshape(-1)[self.edge_index]

    def extend_many(self, X: np.ndarray) -> np.ndarray:
        U = np.zeros((X.shape[1],) + self.grid.field_shape)
        U.reshape(X.shape[1], -1)[:, self.edge_index] = X.T
        return U


def _flat(grid: TorusGrid, anchors: np.ndarray) -> np.ndarray:
    return np.ravel_multi_index(tuple(anchors.T), grid.n)


def embed(c: CubicalComplex, grid: Optional[TorusGrid] = None, pad: int = DEFAULT_PAD) -> Embedding:
    """Place the complex in a torus with at least ``pad`` empty cells on each side."""
    if c.dim != 3:
        raise ValueError("torus embedding needs a 3D complex")
    lo, hi = c.domain.bounding_box
    if grid is None:
        grid = TorusGrid(tuple(odd_fft_size(int(e) + 2 * pad) for e in hi - lo), c.h)
    if any(int(e) + 2 * pad > n for e, n in zip(hi - lo, grid.n)):
        raise ValueError("torus grid too small for the domain and padding")
    shift = pad - lo
    N = grid.n_points
    v_idx = _flat(grid, c.anchors(0) + shift)
    e_idx = np.concatenate([g.axes[0] * N + _flat(grid, g.anchors + shift) for g in c.groups[1]])
    f_idx = np.concatenate([(3 - sum(g.axes)) * N + _flat(grid, g.anchors + shift)
                            for g in c.groups[2]])
    return Embedding(c, grid, shift, v_idx, e_idx, f_idx)


def intertwining_defect(emb: Embedding) -> int:
    """Integer check that the torus stencils applied to zero-extended relative
    fields give the zero extension of the complex's own coboundaries."""
    c, g = emb.complex, emb.grid
    worst = 0
    pairs = [(periodic_gradient(g), emb.vertex_index, emb.edge_index),
             (periodic_lex_curl(g), emb.edge_index, emb.face_index)]
    for k, (Mt, src, tgt) in enumerate(pairs):
        Mt = (Mt * g.h).tocsr()
        Mt.data = np.rint(Mt.data)
        Mt = Mt.astype(np.int64)
        rel = c.interior(k)
        block = Mt[:, src[rel]]
        Dk = c.incidence[k][:, rel].tocoo()
        expected = sp.csr_matrix((Dk.data, (tgt[Dk.row], Dk.col)), shape=block.shape)
        diff = (block - expected).tocoo()
        diff.eliminate_zeros()
        if diff.nnz:
            worst = max(worst, int(np.abs(diff.data).max()))
    return worst


class ProjectorChain:
    """Orthogonal projector of Omega's edge fields onto ker(curl)⊥.

    Gradients are removed with a conjugate-gradient solve on the vertex
    Laplacian d0^T d0; if the domain has first Betti number b1 > 0, a
    computed orthonormal basis of discrete harmonic fields is removed too.
    """

    def __init__(self, c: CubicalComplex, cg_tol: float = 1e-10, seed: int = 42,
                 maxiter: Optional[int] = None, harmonic: Optional[np.ndarray] = None,
                 b1: Optional[int] = None):
        if c.dim != 3:
            raise ValueError("the curl projector needs a 3D complex")
        self.complex = c
        self.cg_tol = cg_tol
        self.d0 = c.incidence[0].astype(float).tocsr()
        self.d1 = c.incidence[1].astype(float).tocsr()
        self.L0 = (self.d0.T @ self.d0).tocsr()
        self.maxiter = maxiter or 20 * self.L0.shape[0]
        self.iterations = 0
        if harmonic is None:
            if b1 is None:
                b1 = betti(c)[1]
            harmonic = self._harmonic_basis(b1, seed) if b1 else np.zeros((self.d0.shape[0], 0))
        self.harmonic = harmonic

    @property
    def n(self) -> int:
        return self.d0.shape[0]

    def _cg(self, A, b, rtol, scale):
        # stop at max(rtol*|b|, rtol*scale): when b is tiny (input already
        # nearly projected) only accuracy relative to the input matters
        nb = np.linalg.norm(b)
        if nb == 0:
            return np.zeros_like(b)
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = spla.cg(A, b, rtol=rtol, atol=rtol * scale, maxiter=self.maxiter, callback=cb)
        self.iterations += count[0]
        if info != 0:
            raise ConvergenceError(f"CG did not converge (info={info}, rtol={rtol:g})")
        return x

    def gradient_part(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto ran(d0)."""
        phi = self._cg(self.L0, self.d0.T @ x, 1e-2 * self.cg_tol, np.linalg.norm(x))
        return self.d0 @ phi

    def _harmonic_basis(self, b1: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        L2 = (self.d1 @ self.d1.T).tocsr()
        cols = []
        for _ in range(b1):
            x = rng.standard_normal(self.n)
            x -= self.gradient_part(x)
            x -= self.d1.T @ self._cg(L2, self.d1 @ x, 1e-2 * self.cg_tol, np.linalg.norm(x))
            cols.append(x)
        H, _ = np.linalg.qr(np.column_stack(cols))
        return H

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = x - self.gradient_part(x)
        if self.harmonic.shape[1]:
            y -= self.harmonic @ (self.harmonic.T @ y)
        return y

    def check(self, rng: np.random.Generator, probes: int = 3) -> Report:
        rep = Report("projector")
        tol = 10 * self.cg_tol
        idem = sym = grad = 0.0
        for _ in range(probes):
            x = rng.standard_normal(self.n)
            y = rng.standard_normal(self.n)
            Px, Py = self(x), self(y)
            idem = max(idem, np.linalg.norm(self(Px) - Px) / np.linalg.norm(x))
            sym = max(sym, abs(np.dot(Px, y) - np.dot(x, Py)) / (np.linalg.norm(x) * np.linalg.norm(y)))
            g = self.d0 @ rng.standard_normal(self.d0.shape[1])
            grad = max(grad, np.linalg.norm(self(g)) / np.linalg.norm(g))
        rep.add("projector-idempotent", idem, tol)
        rep.add("projector-symmetric", sym, tol)
        rep.add("projector-gradients", grad, tol)
        if self.harmonic.shape[1]:
            H = self.harmonic
            rep.add("harmonic-closed", np.linalg.norm(self.d1 @ H, 2), tol * np.sqrt(self.n))
            rep.add("harmonic-coclosed", np.linalg.norm(self.d0.T @ H, 2), tol * np.sqrt(self.n))
        rep.info["harmonic dimension"] = self.harmonic.shape[1]
        return rep
