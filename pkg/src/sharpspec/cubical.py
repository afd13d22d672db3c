"""Cubical cochain complexes over voxel domains and their mimetic operator pairs.

A k-cell is stored as (anchor, axes): the unit cube spanned from the lattice
point ``anchor`` along the sorted ``axes`` (|axes| = k).  Cells are indexed
grouped by axis set (in ``itertools.combinations`` order) and then by anchor
in row-major order.  The coboundary is

    (d_k w)(a, S) = sum_m (-1)^m [w(a + e_{s_m}, S - s_m) - w(a, S - s_m)],

so d_0 is the forward difference and d_1 the lexicographic Yee curl.  A cell
belongs to the boundary subcomplex when some of the 2^(d-k) voxels around it
are missing from the domain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product as iproduct
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from .domain import VoxelDomain
from .linrel import LinearRelation, OperatorPair, coordinate_subspace

DENSE_LIMIT = 4000
RANK_LIMIT = 6000
AUTO_RANK_LIMIT = 1500


@dataclass(frozen=True, eq=False)
class CellGroup:
    axes: tuple
    anchors: np.ndarray
    offset: int


@dataclass(eq=False)
class CubicalComplex:
    domain: VoxelDomain
    groups: list
    incidence: list
    boundary: list
    adjacency: list
    _pad_lo: np.ndarray = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def h(self) -> float:
        return self.domain.h

    def counts(self) -> tuple:
        return tuple(int(b.size) for b in self.boundary)

    def cells(self, k: int) -> list:
        return self.groups[k]

    def anchors(self, k: int) -> np.ndarray:
        return np.vstack([g.anchors for g in self.groups[k]])

    def axes(self, k: int) -> list:
        """Axis tuple of every k-cell, in index order."""
        out = []
        for g in self.groups[k]:
            out.extend([g.axes] * g.anchors.shape[0])
        return out

    def group(self, k: int, axes) -> CellGroup:
        for g in self.groups[k]:
            if g.axes == tuple(axes):
                return g
        raise KeyError(axes)

    def weights(self, k: int, convention: str = "lumped") -> np.ndarray:
        """Diagonal inner-product weights of k-cochains.

        ``lumped``: h^d times the fraction of surrounding voxels inside the
        domain; ``uniform``: h^d for every cell.
        """
        d = self.dim
        if convention == "lumped":
            return self.h ** d * self.adjacency[k] / 2 ** (d - k)
        if convention == "uniform":
            return np.full(self.adjacency[k].size, self.h ** d)
        raise ValueError(f"unknown weight convention {convention!r}")

    def interior(self, k: int) -> np.ndarray:
        return np.flatnonzero(~self.boundary[k])


def _shift(a: np.ndarray, axis: int) -> np.ndarray:
    # out[p] = a[p - e_axis]; the zero padding makes wrap-around harmless
    return np.roll(a, 1, axis=axis)


def build_complex(v: VoxelDomain) -> CubicalComplex:
    d = v.dim
    lo, hi = v.bounding_box
    shape = tuple(int(s) for s in (hi - lo + 2))
    occ = np.zeros(shape, dtype=np.int64)
    occ[tuple((v.cells - lo + 1).T)] = 1
    pad_lo = lo - 1  # lattice coordinate of padded index 0

    groups, boundary, adjacency, lookups = [], [], [], []
    for k in range(d + 1):
        gk, bk, ak, lk = [], [], [], {}
        offset = 0
        for S in combinations(range(d), k):
            free = [j for j in range(d) if j not in S]
            count = np.zeros(shape, dtype=np.int64)
            for o in iproduct((0, 1), repeat=len(free)):
                a = occ
                for j, oj in zip(free, o):
                    if oj:
                        a = _shift(a, j)
                count += a
            idx = np.argwhere(count > 0)
            table = np.full(shape, -1, dtype=np.int64)
            table[tuple(idx.T)] = offset + np.arange(idx.shape[0])
            cnt = count[tuple(idx.T)]
            gk.append(CellGroup(S, idx + pad_lo, offset))
            bk.append(cnt < 2 ** (d - k))
            ak.append(cnt)
            lk[S] = table
            offset += idx.shape[0]
        groups.append(gk)
        boundary.append(np.concatenate(bk))
        adjacency.append(np.concatenate(ak).astype(float))
        lookups.append(lk)

    incidence = []
    for k in range(d):
        rows, cols, vals = [], [], []
        for g in groups[k + 1]:
            T = g.axes
            p = g.anchors - pad_lo
            tau = g.offset + np.arange(p.shape[0])
            for m, t in enumerate(T):
                S = T[:m] + T[m + 1:]
                table = lookups[k][S]
                sign = -1 if m % 2 else 1
                q = p.copy()
                q[:, t] += 1
                plus = table[tuple(q.T)]
                minus = table[tuple(p.T)]
                if (plus < 0).any() or (minus < 0).any():
                    raise RuntimeError("face lookup failed")
                rows += [tau, tau]
                cols += [plus, minus]
                vals += [np.full(tau.size, sign), np.full(tau.size, -sign)]
        n_rows = boundary[k + 1].size
        n_cols = boundary[k].size
        D = sp.csr_matrix((np.concatenate(vals).astype(np.int64),
                           (np.concatenate(rows), np.concatenate(cols))), shape=(n_rows, n_cols))
        D.sort_indices()
        incidence.append(D)
    return CubicalComplex(v, groups, incidence, boundary, adjacency, pad_lo)


def dd_residual(c: CubicalComplex) -> int:
    """Largest |entry| of d_{k+1} d_k over all k (integer arithmetic)."""
    worst = 0
    for k in range(c.dim - 1):
        P = (c.incidence[k + 1] @ c.incidence[k]).tocoo()
        if P.nnz:
            worst = max(worst, int(np.abs(P.data).max()))
    return worst


def boundary_closure_violations(c: CubicalComplex) -> int:
    """Number of (boundary cell, face) incidences whose face is not a boundary cell."""
    bad = 0
    for k in range(c.dim):
        D = c.incidence[k].tocoo()
        bad += int(np.sum(c.boundary[k + 1][D.row] & ~c.boundary[k][D.col]))
    return bad


@dataclass(eq=False)
class MimeticPair:
    """Coboundary d_k on all cells together with its relative (boundary-free) part."""

    complex: CubicalComplex
    k: int
    M_full: sp.csr_matrix
    source_rel: np.ndarray
    target_rel: np.ndarray
    w_source: np.ndarray
    w_target: np.ndarray
    weights: str

    @property
    def M_rel(self) -> sp.csr_matrix:
        return self.M_full[self.target_rel][:, self.source_rel]


def mimetic_pair(c: CubicalComplex, k: int, weights: str = "lumped") -> MimeticPair:
    """Operator proxy d_k / h with relative DOFs = cells off the boundary subcomplex."""
    if not 0 <= k < c.dim:
        raise ValueError(f"degree must satisfy 0 <= k < {c.dim}, got {k}")
    M = (c.incidence[k].astype(float) / c.h).tocsr()
    return MimeticPair(c, k, M, c.interior(k), c.interior(k + 1),
                       c.weights(k, weights), c.weights(k + 1, weights), weights)


def intertwining_residual(m: MimeticPair) -> int:
    """Integer check of  iota d_rel = d_full iota : d_full must not map relative DOFs outside."""
    D = m.complex.incidence[m.k]
    outside = np.ones(D.shape[0], dtype=bool)
    outside[m.target_rel] = False
    leak = D[outside][:, m.source_rel]
    return int(np.abs(leak.data).sum()) if leak.nnz else 0


def duality_residual(m: MimeticPair, rng: np.random.Generator, trials: int = 5) -> float:
    """max |<d_rel x, y> + <x, delta y>| / (|x||y|), delta = -W^-1 d^T W, weighted products."""
    D = m.M_full
    worst = 0.0
    for _ in range(trials):
        x = np.zeros(D.shape[1])
        x[m.source_rel] = rng.standard_normal(m.source_rel.size)
        y = rng.standard_normal(D.shape[0])
        delta_y = -(D.T @ (m.w_target * y)) / m.w_source
        lhs = np.dot(D @ x, m.w_target * y)
        rhs = np.dot(x, m.w_source * delta_y)
        nx = np.sqrt(np.dot(x, m.w_source * x))
        ny = np.sqrt(np.dot(y, m.w_target * y))
        worst = max(worst, abs(lhs + rhs) / (nx * ny))
    return worst


def orthonormal_matrix(m: MimeticPair) -> np.ndarray:
    """Dense W_t^{1/2} D W_s^{-1/2}: the operator in orthonormal coordinates."""
    D = m.M_full.toarray()
    return np.sqrt(m.w_target)[:, None] * D / np.sqrt(m.w_source)[None, :]


def to_dense_pair(m: MimeticPair, tol: float = 1e-10) -> OperatorPair:
    n0, n1 = m.M_full.shape[1], m.M_full.shape[0]
    if n0 + n1 > DENSE_LIMIT:
        raise ValueError(f"dense export limited to {DENSE_LIMIT} DOFs, got {n0 + n1}")
    A_mat = orthonormal_matrix(m)
    A = LinearRelation.from_matrix(A_mat, tol=tol)
    A0 = LinearRelation.from_matrix(A_mat, coordinate_subspace(n0, m.source_rel, tol), tol=tol)
    return OperatorPair(A0, A)


# ----------------------------------------------------------------------------
# Betti numbers


def euler_characteristic(c: CubicalComplex) -> int:
    return int(sum((-1) ** k * n for k, n in enumerate(c.counts())))


def _betti_rank(c: CubicalComplex) -> tuple:
    ranks = []
    for D in c.incidence:
        if max(D.shape) > RANK_LIMIT:
            raise MemoryError(f"rank computation limited to {RANK_LIMIT} cells per degree")
        ranks.append(int(np.linalg.matrix_rank(D.toarray().astype(float))) if D.nnz else 0)
    n = c.counts()
    out = []
    for k in range(c.dim + 1):
        r_out = ranks[k] if k < c.dim else 0
        r_in = ranks[k - 1] if k > 0 else 0
        out.append(n[k] - r_out - r_in)
    return tuple(out)


def _betti_topological(c: CubicalComplex) -> tuple:
    d = c.dim
    occ = np.pad(c.domain.mask(), 1)
    full = ndimage.generate_binary_structure(d, d)
    face = ndimage.generate_binary_structure(d, 1)
    _, b0 = ndimage.label(occ, structure=full)
    _, n_out = ndimage.label(~occ, structure=face)
    cavities = n_out - 1  # bounded complement components
    chi = euler_characteristic(c)
    if d == 1:
        return (b0, 0)
    if d == 2:
        return (b0, cavities, 0)
    return (b0, b0 + cavities - chi, cavities, 0)


def betti(c: CubicalComplex, method: str = "auto") -> tuple:
    """Betti numbers (b_0, ..., b_d) of the closed voxel union.

    ``rank`` uses rank-nullity on the incidence matrices; ``topological``
    counts components of the union and of its complement and closes with the
    Euler characteristic, which scales to large grids.
    """
    if method == "auto":
        method = "rank" if max(c.counts()) <= AUTO_RANK_LIMIT else "topological"
    if method == "rank":
        return _betti_rank(c)
    if method == "topological":
        return _betti_topological(c)
    raise ValueError(f"unknown method {method!r}")
