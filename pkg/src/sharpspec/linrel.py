"""Dense calculus of closed linear relations.

A relation between H0 = R^dim0 and H1 = R^dim1 is stored as an orthonormal
basis of its graph in H0 (+) H1.  Operators are relations with trivial
multivalued part.  Relations may additionally carry the closed subspaces
``space0``/``space1`` they are considered to act between (``None`` means the
whole coordinate space); adjoints are taken relative to those spaces, which
is what a reduced operator needs.

Everything here is finite dimensional, so closures are trivial and ranges
are automatically closed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .results import EigResult, Report, cluster_ids

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^ambient_dim given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _as_columns(vectors, ambient_dim: Optional[int]) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        M = vectors.astype(float, copy=False)
    else:
        vectors = list(vectors)
        if not vectors:
            if ambient_dim is None:
                raise ValueError("ambient dimension required for an empty vector list")
            return np.zeros((ambient_dim, 0))
        lengths = {np.asarray(v).size for v in vectors}
        if len(lengths) != 1:
            raise ValueError(f"vectors have mismatched dimensions {sorted(lengths)}")
        M = np.column_stack([np.asarray(v, dtype=float).ravel() for v in vectors])
    if ambient_dim is not None and M.shape[0] != ambient_dim:
        raise ValueError(f"vectors have dimension {M.shape[0]}, expected {ambient_dim}")
    return M


def orthonormalize(vectors, tol: float = DEFAULT_TOL,
                   ambient_dim: Optional[int] = None) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    ``vectors`` is a sequence of 1-d vectors or a 2-d array whose columns are
    the vectors.  The rank is the number of singular values above
    ``tol * (largest singular value)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = _as_columns(vectors, ambient_dim)
    n = M.shape[0]
    if n < 1:
        raise ValueError("empty ambient dimension")
    if M.shape[1] == 0:
        return Subspace(n, np.zeros((n, 0)), tol)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return Subspace(n, np.zeros((n, 0)), tol)
    r = int(np.sum(s > tol * s[0]))
    return Subspace(n, U[:, :r], tol)


def _span_abs(M: np.ndarray, threshold: float, tol: float = DEFAULT_TOL) -> Subspace:
    # Absolute rank threshold; used on blocks of orthonormal bases where the
    # natural scale is 1.
    n = M.shape[0]
    if M.shape[1] == 0:
        return Subspace(n, np.zeros((n, 0)), tol)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return Subspace(n, U[:, s > threshold], tol)


def zero_subspace(n: int, tol: float = DEFAULT_TOL) -> Subspace:
    return Subspace(n, np.zeros((n, 0)), tol)


def full_subspace(n: int, tol: float = DEFAULT_TOL) -> Subspace:
    return Subspace(n, np.eye(n), tol)


def coordinate_subspace(n: int, indices, tol: float = DEFAULT_TOL) -> Subspace:
    indices = np.asarray(indices, dtype=int)
    B = np.zeros((n, indices.size))
    B[indices, np.arange(indices.size)] = 1.0
    return Subspace(n, B, tol)


def complement(S: Subspace, within: Optional[Subspace] = None) -> Subspace:
    """Orthogonal complement of S (inside ``within`` if given)."""
    n = S.ambient_dim
    if S.dim == 0:
        comp = full_subspace(n, S.tol)
    else:
        U, _, _ = np.linalg.svd(S.basis, full_matrices=True)
        comp = Subspace(n, U[:, S.dim:], S.tol)
    if within is not None:
        return intersect(comp, within)
    return comp


def subspace_sum(*spaces: Subspace) -> Subspace:
    tol = spaces[0].tol
    return _span_abs(np.hstack([S.basis for S in spaces]), tol, tol)


def intersect(S: Subspace, T: Subspace) -> Subspace:
    if S.dim == 0 or T.dim == 0:
        return zero_subspace(S.ambient_dim, S.tol)
    # S ∩ T = {Sa : (I - P_T) S a = 0}
    R = S.basis - T.basis @ (T.basis.T @ S.basis)
    _, s, Vt = np.linalg.svd(R, full_matrices=True)
    s = np.concatenate([s, np.zeros(S.dim - s.size)])
    null = Vt.T[:, s <= S.tol]
    return _span_abs(S.basis @ null, 0.5, S.tol)


def inclusion_gap(S: Subspace, T: Subspace) -> float:
    """Size of the part of S outside T; 0 iff S ⊆ T."""
    if S.dim == 0:
        return 0.0
    R = S.basis - T.basis @ (T.basis.T @ S.basis)
    return float(np.linalg.norm(R, 2))


def distance(S: Subspace, T: Subspace) -> float:
    """Sine of the largest principal angle; 1.0 when the dimensions differ."""
    if S.dim != T.dim:
        return 1.0
    return max(inclusion_gap(S, T), inclusion_gap(T, S))


def product(S0: Subspace, S1: Subspace) -> Subspace:
    n0, n1 = S0.ambient_dim, S1.ambient_dim
    B = np.zeros((n0 + n1, S0.dim + S1.dim))
    B[:n0, :S0.dim] = S0.basis
    B[n0:, S0.dim:] = S1.basis
    return Subspace(n0 + n1, B, S0.tol)


class Parts(NamedTuple):
    kernel: Subspace
    range: Subspace
    domain: Subspace
    mul: Subspace


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """Closed linear relation from R^dim0 to R^dim1 stored by its graph."""

    dim0: int
    dim1: int
    graph: Subspace
    space0: Optional[Subspace] = None
    space1: Optional[Subspace] = None

    def __post_init__(self):
        if self.graph.ambient_dim != self.dim0 + self.dim1:
            raise ValueError("graph ambient dimension must be dim0 + dim1")

    @classmethod
    def from_matrix(cls, M, domain: Optional[Subspace] = None, tol: float = DEFAULT_TOL,
                    space0=None, space1=None) -> "LinearRelation":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        dim1, dim0 = M.shape
        Q = np.eye(dim0) if domain is None else domain.basis
        G = np.vstack([Q, M @ Q])
        return cls(dim0, dim1, orthonormalize(G, tol, dim0 + dim1) if G.shape[1] else
                   zero_subspace(dim0 + dim1, tol), space0, space1)

    @classmethod
    def from_pairs(cls, X, Z, tol: float = DEFAULT_TOL, space0=None, space1=None):
        """Relation spanned by the pairs (X[:, j], Z[:, j])."""
        X = np.asarray(X, dtype=float)
        Z = np.asarray(Z, dtype=float)
        dim0, dim1 = X.shape[0], Z.shape[0]
        G = np.vstack([X, Z])
        graph = _span_abs(G, tol * max(1.0, np.abs(G).max(initial=0.0)), tol)
        return cls(dim0, dim1, Subspace(dim0 + dim1, graph.basis, tol), space0, space1)

    @property
    def tol(self) -> float:
        return self.graph.tol

    @property
    def X(self) -> np.ndarray:
        return self.graph.basis[:self.dim0]

    @property
    def Z(self) -> np.ndarray:
        return self.graph.basis[self.dim0:]

    def negate(self) -> "LinearRelation":
        B = self.graph.basis.copy()
        B[self.dim0:] *= -1
        return LinearRelation(self.dim0, self.dim1, Subspace(self.graph.ambient_dim, B, self.tol),
                              self.space0, self.space1)

    def inverse(self) -> "LinearRelation":
        B = np.vstack([self.Z, self.X])
        return LinearRelation(self.dim1, self.dim0, Subspace(self.graph.ambient_dim, B, self.tol),
                              self.space1, self.space0)

    def is_functional(self) -> bool:
        return parts(self).mul.dim == 0

    def operator_matrix(self) -> np.ndarray:
        """Matrix M with Mx ∈ R(x) for x ∈ dom, Mx ⊥ mul, and M = 0 on dom⊥."""
        if self.graph.dim == 0:
            return np.zeros((self.dim1, self.dim0))
        p = parts(self)
        Xd = p.domain.basis
        # coefficients c with X c = Xd, minimal norm
        C = np.linalg.lstsq(self.X, Xd, rcond=None)[0]
        Zd = self.Z @ C
        if p.mul.dim:
            Zd = Zd - p.mul.basis @ (p.mul.basis.T @ Zd)
        return Zd @ Xd.T

    def __repr__(self):
        return f"LinearRelation({self.dim0} -> {self.dim1}, graph dim {self.graph.dim})"


def parts(R: LinearRelation) -> Parts:
    """Kernel, range, domain and multivalued part of a relation.

    One SVD of the H0-block of the orthonormal graph basis gives all four
    with consistent rank decisions (the two blocks share right singular
    vectors because X^T X + Z^T Z = I).
    """
    tol = R.tol
    r = R.graph.dim
    if r == 0:
        return Parts(zero_subspace(R.dim0, tol), zero_subspace(R.dim1, tol),
                     zero_subspace(R.dim0, tol), zero_subspace(R.dim1, tol))
    _, s, Vt = np.linalg.svd(R.X, full_matrices=True)
    s = np.concatenate([s, np.zeros(r - s.size)])
    V = Vt.T
    XV = R.X @ V
    ZV = R.Z @ V
    znorm = np.linalg.norm(ZV, axis=0)
    dom = s > tol
    ker = znorm <= tol
    ran = ~ker
    mul = ~dom

    def _unit(M, norms):
        return M / norms if M.shape[1] else M

    return Parts(
        kernel=Subspace(R.dim0, _unit(XV[:, ker], s[ker]), tol),
        range=Subspace(R.dim1, _unit(ZV[:, ran], znorm[ran]), tol),
        domain=Subspace(R.dim0, _unit(XV[:, dom], s[dom]), tol),
        mul=Subspace(R.dim1, _unit(ZV[:, mul], znorm[mul]), tol),
    )


def adjoint(R: LinearRelation) -> LinearRelation:
    """Adjoint relation {(y, z): <v, y> = <u, z> for all (u, v) in R}.

    Computed as the orthogonal complement of J·graph with J(u, v) = (-v, u),
    taken inside space1 x space0 when the relation carries those spaces.
    """
    JG = np.vstack([-R.Z, R.X])
    n = R.dim0 + R.dim1
    comp = complement(Subspace(n, JG, R.tol))
    if R.space0 is not None or R.space1 is not None:
        s1 = R.space1 if R.space1 is not None else full_subspace(R.dim1, R.tol)
        s0 = R.space0 if R.space0 is not None else full_subspace(R.dim0, R.tol)
        comp = intersect(comp, product(s1, s0))
    return LinearRelation(R.dim1, R.dim0, comp, R.space1, R.space0)


def pairing_adjoint(R: LinearRelation, probes: int = 0, rng=None) -> LinearRelation:
    """Adjoint built directly from the defining pairing (null space of a linear system).

    Independent of the rotation formula used by :func:`adjoint`; only used to
    cross-check it.  Spaces attached to ``R`` are ignored.
    """
    # (y, z) is in the adjoint iff  X^T z - Z^T y = 0
    K = np.hstack([-R.Z.T, R.X.T])
    n = R.dim0 + R.dim1
    if K.shape[0] == 0:
        return LinearRelation(R.dim1, R.dim0, full_subspace(n, R.tol))
    _, s, Vt = np.linalg.svd(K, full_matrices=True)
    s = np.concatenate([s, np.zeros(n - s.size)])
    null = Vt.T[:, s <= R.tol]
    return LinearRelation(R.dim1, R.dim0, Subspace(n, null, R.tol))


def compose(R: LinearRelation, S: LinearRelation) -> LinearRelation:
    """S∘R = {(x, z): (x, y) ∈ R and (y, z) ∈ S for some y}."""
    if R.dim1 != S.dim0:
        raise ValueError("dimension mismatch in composition")
    # solve Z_R a = X_S b
    K = np.hstack([R.Z, -S.X])
    m = K.shape[1]
    if m == 0:
        return LinearRelation(R.dim0, S.dim1, zero_subspace(R.dim0 + S.dim1, R.tol))
    _, s, Vt = np.linalg.svd(K, full_matrices=True)
    s = np.concatenate([s, np.zeros(m - s.size)])
    null = Vt.T[:, s <= R.tol]
    a, b = null[:R.graph.dim], null[R.graph.dim:]
    G = np.vstack([R.X @ a, S.Z @ b])
    return LinearRelation(R.dim0, S.dim1, _span_abs(G, R.tol, R.tol), R.space0, S.space1)


def restrict(R: LinearRelation, D: Subspace) -> LinearRelation:
    """Restriction of R to the elements x ∈ D."""
    return LinearRelation(R.dim0, R.dim1,
                          intersect(R.graph, product(D, full_subspace(R.dim1, R.tol))),
                          R.space0, R.space1)


def relation_distance(R: LinearRelation, S: LinearRelation) -> float:
    return distance(R.graph, S.graph)


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """Minimal operator A0 (functional) inside the maximal relation A."""

    A0: LinearRelation
    A: LinearRelation

    def __post_init__(self):
        if (self.A0.dim0, self.A0.dim1) != (self.A.dim0, self.A.dim1):
            raise ValueError("A0 and A must act between the same spaces")

    def inclusion_gap(self) -> float:
        return inclusion_gap(self.A0.graph, self.A.graph)


@dataclass(frozen=True, eq=False)
class SharpPair:
    pair: OperatorPair
    B_rel: LinearRelation
    kerB: Subspace
    A_sharp: LinearRelation


def sharp(pair: OperatorPair, tol: float = DEFAULT_TOL) -> SharpPair:
    """A# := A restricted to {x : Ax ⊥ ker B}, with B := -adjoint(A0)."""
    A0, A = pair.A0, pair.A
    gap = pair.inclusion_gap()
    if gap > tol:
        raise ValueError(f"graph(A0) is not contained in graph(A) (gap {gap:.3e})")
    if not A0.is_functional():
        raise ValueError("A0 must be an operator")
    B_rel = adjoint(A0).negate()
    kerB = parts(B_rel).kernel
    constraint = product(full_subspace(A.dim0, tol), complement(kerB))
    A_sharp = LinearRelation(A.dim0, A.dim1, intersect(A.graph, constraint))
    return SharpPair(pair, B_rel, kerB, A_sharp)


def b_sharp(sp: SharpPair) -> LinearRelation:
    """B# := B restricted to {y : By ∈ ran(B0)} with B0 := -adjoint(A), ran(B0) = ker(A)⊥."""
    kerA = parts(sp.pair.A).kernel
    B = sp.B_rel
    constraint = product(full_subspace(B.dim0, B.tol), complement(kerA))
    return LinearRelation(B.dim0, B.dim1, intersect(B.graph, constraint))


def reduced(A: LinearRelation) -> LinearRelation:
    """A_red : dom(A) ∩ ker(A)⊥ ⊆ ker(A)⊥ → ran(A), acting between those subspaces."""
    p = parts(A)
    if p.mul.dim:
        raise ValueError("reduced operator requires an operator (mul(A) = {0})")
    space0 = A.space0 if A.space0 is not None else full_subspace(A.dim0, A.tol)
    ker_perp = complement(p.kernel, within=space0)
    dom_red = intersect(p.domain, ker_perp)
    M = A.operator_matrix()
    Q = dom_red.basis
    if Q.shape[1]:
        graph = orthonormalize(np.vstack([Q, M @ Q]), A.tol, A.dim0 + A.dim1)
    else:
        graph = zero_subspace(A.dim0 + A.dim1, A.tol)
    return LinearRelation(A.dim0, A.dim1, graph, ker_perp, p.range)


def point_spectrum(A: LinearRelation, dom_restriction: Optional[Subspace] = None,
                   tol: float = 1e-8, cluster_tol: Optional[float] = None) -> EigResult:
    """Eigenpairs of the compression Q^T A Q, kept only if ‖A(Qv) − λQv‖ ≤ tol‖Qv‖."""
    if A.dim0 != A.dim1:
        raise ValueError("point spectrum needs a relation from a space to itself")
    n = A.dim0
    Q = (dom_restriction if dom_restriction is not None else full_subspace(n)).basis
    M = A.operator_matrix()
    if Q.shape[1] == 0:
        return EigResult(np.zeros(0), np.zeros(0), cluster_tol or 0.0, np.zeros((n, 0)))
    AQ = M @ Q
    T = Q.T @ AQ
    scale = max(np.linalg.norm(T, 2), 1e-300)
    if np.linalg.norm(T - T.T, 2) <= 1e-12 * scale:
        w, V = np.linalg.eigh(0.5 * (T + T.T))
        w = w.astype(complex)
    else:
        w, V = np.linalg.eig(T)
    X = Q @ V
    R = AQ @ V - X * w
    res = np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(X, axis=0), 1e-300)
    real = np.abs(w.imag) <= tol
    ok = (res <= tol) & real
    if cluster_tol is None:
        cluster_tol = 1e-8 * max(1.0, scale)
    unverified = [(complex(w[i]), float(res[i])) for i in np.flatnonzero(~ok)]
    Xr = np.real(X[:, ok])
    Xr = Xr / np.linalg.norm(Xr, axis=0)
    return EigResult(w[ok].real, res[ok], cluster_tol, Xr, unverified,
                     converged=not unverified, metadata={"method": "dense compression"})


# ----------------------------------------------------------------------------
# verification suites


def _multiset_gap(a: np.ndarray, b: np.ndarray, cluster_tol: float) -> float:
    """Largest mismatch between sorted multisets, inf if the counts differ."""
    a, b = np.sort(a), np.sort(b)
    if a.size != b.size:
        return np.inf
    return float(np.max(np.abs(a - b), initial=0.0))


def verify_reduction_identities(A: LinearRelation, tol: float = DEFAULT_TOL) -> Report:
    """Identities linking an operator with full domain to its reduced operator."""
    rep = Report("reduction")
    p = parts(A)
    if p.domain.dim != A.dim0:
        raise ValueError("verification expects an operator with full domain")
    red = reduced(A)
    lhs = adjoint(red)
    rhs = reduced(adjoint(A))
    rep.add("reduced-adjoint", distance(lhs.graph, rhs.graph), tol)

    # closed range <=> bounded invertibility of A_red; in finite dimension both hold,
    # and the inverse bound equals the smallest nonzero singular value of A.
    M = A.operator_matrix()
    sv = np.linalg.svd(M, compute_uv=False)
    nonzero = sv[sv > tol * max(sv.max(initial=0.0), 1.0)]
    gap = float(nonzero.min()) if nonzero.size else np.inf
    K = red.space0.basis
    Rb = red.space1.basis
    if K.shape[1]:
        red_sv = np.linalg.svd(Rb.T @ M @ K, compute_uv=False)
        red_min = float(red_sv.min())
        mismatch = abs(red_min - gap) / max(gap, 1e-300)
    else:
        mismatch = 0.0
    rep.add("reduced-invertible", mismatch, max(tol * 1e2, 1e-8),
            note=f"smallest nonzero singular value {gap:.6e}")

    if A.dim0 == A.dim1 and np.linalg.norm(M - M.T, 2) <= tol * max(1.0, np.linalg.norm(M, 2)):
        full = np.linalg.eigvalsh(0.5 * (M + M.T))
        if K.shape[1]:
            red_eigs = np.linalg.eigvalsh(K.T @ M @ K)
        else:
            red_eigs = np.zeros(0)
        ctol = 1e-8 * max(1.0, np.abs(full).max(initial=0.0))
        nz_full = full[np.abs(full) > ctol]
        nz_red = red_eigs[np.abs(red_eigs) > ctol]
        rep.add("reduced-spectrum", _multiset_gap(nz_full, nz_red, ctol), ctol)
    rep.info["gap"] = gap
    return rep


def verify_sharp_identities(sp: SharpPair, tol: float = DEFAULT_TOL,
                            pairing_tol: float = 1e-12) -> Report:
    rep = Report("sharp")
    A0, A, As = sp.pair.A0, sp.pair.A, sp.A_sharp
    pA, pA0, pS = parts(A), parts(A0), parts(As)

    # domain of the sharp operator = ker(A) + dom(A0)
    rep.add("sharp-domain", distance(pS.domain, subspace_sum(pA.kernel, pA0.domain)), tol)
    rep.add("sharp-inclusion", max(inclusion_gap(A0.graph, As.graph),
                                   inclusion_gap(As.graph, A.graph)), tol)

    # <z, y> + <x, w> = 0 for (x, z) ∈ A#, (y, w) ∈ B0 := -adjoint(A)
    B0 = adjoint(A).negate()
    Gs, Gb = As.graph.basis, B0.graph.basis
    if Gs.shape[1] and Gb.shape[1]:
        P = Gs[A.dim0:].T @ Gb[:B0.dim0] + Gs[:A.dim0].T @ Gb[B0.dim0:]
        pairing = float(np.abs(P).max())
    else:
        pairing = 0.0
    rep.add("sharp-pairing", pairing, pairing_tol)

    # S := A restricted to ker(A) + dom(A0) has the kernel and range of A#, hence its domain
    # (only meaningful when A is an operator; for relations mul(A) leaks into the restriction)
    if pA.mul.dim == 0:
        S = restrict(A, subspace_sum(pA.kernel, pA0.domain))
        pR = parts(S)
        rep.add("core-restriction", max(distance(pR.kernel, pS.kernel),
                                        distance(pR.range, pS.range),
                                        distance(pR.domain, pS.domain)), tol)

    # -(B#)* = A#
    Bs = b_sharp(sp)
    rep.add("sharp-adjoint", distance(adjoint(Bs).negate().graph, As.graph), tol)

    # diagnostic only: eigenvalue 1 of B# A#
    C = compose(As, Bs)
    fixed = intersect(C.graph, Subspace(C.graph.ambient_dim,
                                        np.vstack([np.eye(C.dim0), np.eye(C.dim0)]) / np.sqrt(2)
                                        if C.dim0 == C.dim1 else np.zeros((C.graph.ambient_dim, 0))))
    rep.info["dim ker(1 - B#A#)"] = fixed.dim
    return rep


# ----------------------------------------------------------------------------
# reference constructions


def path_pair(n: int, h: float = 1.0) -> OperatorPair:
    """Difference operator on an n-node path; A0 is its restriction to interior nodes."""
    if n < 2:
        raise ValueError("need at least two nodes")
    D = (np.eye(n - 1, n, 1) - np.eye(n - 1, n)) / h
    A = LinearRelation.from_matrix(D)
    A0 = LinearRelation.from_matrix(D, coordinate_subspace(n, range(1, n - 1)))
    return OperatorPair(A0, A)


def second_difference_operator(n: int, h: float = 1.0,
                               interior: bool = True) -> LinearRelation:
    """Discrete -u'' = D^T D / h^2 on n nodes, on the interior nodes (or everywhere)."""
    D = (np.eye(n - 1, n, 1) - np.eye(n - 1, n)) / h
    M = D.T @ D
    dom = coordinate_subspace(n, range(1, n - 1)) if interior else None
    return LinearRelation.from_matrix(M, dom)


def krein_pair(S: LinearRelation) -> OperatorPair:
    """A0 := S and A := S* (the maximal operator of a symmetric S)."""
    return OperatorPair(S, adjoint(S))


def krein_sharp(S_pair: OperatorPair, tol: float = DEFAULT_TOL):
    """Sharp extension of a symmetric positive S; returns (A#, report)."""
    S = S_pair.A0
    pS = parts(S)
    Q = pS.domain.basis
    M = S.operator_matrix()
    T = Q.T @ M @ Q
    if Q.shape[1] and np.linalg.norm(Q.T @ M.T @ Q - T, 2) > tol * max(1.0, np.linalg.norm(T, 2)):
        raise ValueError("S is not symmetric")
    if Q.shape[1] and np.linalg.eigvalsh(0.5 * (T + T.T)).min() <= 0:
        raise ValueError("S is not strictly positive")
    sp = sharp(S_pair, tol)
    As = sp.A_sharp
    rep = Report("krein")
    rep.add("krein-symmetric", distance(As.graph, adjoint(As).graph), tol)
    pAs = parts(As)
    Ms = As.operator_matrix()
    Qd = pAs.domain.basis
    eigs = np.linalg.eigvalsh(Qd.T @ (0.5 * (Ms + Ms.T)) @ Qd) if Qd.shape[1] else np.zeros(0)
    scale = max(1.0, np.abs(eigs).max(initial=0.0))
    rep.add("krein-nonnegative", max(0.0, -eigs.min(initial=0.0)), tol * scale)
    kerA = parts(S_pair.A).kernel
    rep.add("krein-kernel-dim", abs(pAs.kernel.dim - kerA.dim), 0)
    rep.info["kernel dim"] = pAs.kernel.dim
    rep.info["eigenvalues"] = eigs
    return As, rep
