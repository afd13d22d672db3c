"""Block Lanczos with full reorthogonalization for symmetric operators."""
from __future__ import annotations

import logging
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse.linalg as spla

from .results import EigResult

log = logging.getLogger(__name__)

WHICH = ("LM", "LA", "SA")


def as_operator(op, n: Optional[int] = None) -> spla.LinearOperator:
    if isinstance(op, spla.LinearOperator):
        return op
    if callable(op) and not hasattr(op, "shape"):
        if n is None:
            raise ValueError("dimension required for a callable operator")
        return spla.LinearOperator((n, n), matvec=op, dtype=float)
    return spla.aslinearoperator(op)


def _select(theta: np.ndarray, count: int, which: str) -> np.ndarray:
    if which == "LM":
        order = np.argsort(-np.abs(theta), kind="stable")
    elif which == "LA":
        order = np.argsort(-theta, kind="stable")
    else:
        order = np.argsort(theta, kind="stable")
    return order[:count]


def _orthogonalize(W: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Two classical Gram-Schmidt passes; returns the accumulated coefficients."""
    if V.shape[1] == 0:
        return np.zeros((0, W.shape[1]))
    H = V.T @ W
    W -= V @ H
    H2 = V.T @ W
    W -= V @ H2
    return H + H2


def lanczos(op, count: int, tol: float = 1e-8, seed: int = 42, which: str = "LM",
            block_size: int = 4, max_dim: Optional[int] = None, n: Optional[int] = None,
            cluster_tol: Optional[float] = None, keep_vectors: bool = True) -> EigResult:
    """Extremal eigenpairs of a symmetric operator.

    ``which`` selects largest magnitude (LM), largest (LA) or smallest (SA).
    A Ritz pair is accepted when ``‖A x − θ x‖ ≤ tol · max|θ|``; this is
    re-checked with explicit operator applications at the end, and pairs
    failing it are moved to ``unverified``.  If the basis limit is reached
    first the result is returned with ``converged=False``.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    if count < 1:
        raise ValueError("count must be positive")
    A = as_operator(op, n)
    n = A.shape[0]
    count = min(count, n)
    if max_dim is None:
        max_dim = max(300, 10 * count)
    max_dim = min(max_dim, n)
    rng = np.random.default_rng(seed)
    b = max(1, min(block_size, n))

    cap = min(n, max(4 * b, 64))
    V = np.empty((n, cap))
    T = np.zeros((cap, cap))
    Q, _ = np.linalg.qr(rng.standard_normal((n, b)))
    V[:, :b] = Q
    m = b          # basis size
    j0 = 0         # first column of the current block
    n_apply = 0
    theta = Y = R = None
    anorm = 0.0
    converged = False

    while True:
        bj = m - j0
        Vb = V[:, j0:m]
        W = np.asarray(A.matmat(Vb), dtype=float).reshape(n, bj)
        n_apply += bj
        H = _orthogonalize(W, V[:, :m])
        T[:m, j0:m] = H

        k = m
        Tk = 0.5 * (T[:k, :k] + T[:k, :k].T)
        theta, Y = np.linalg.eigh(Tk)
        anorm = max(anorm, float(np.abs(theta).max(initial=0.0)))

        room = min(max_dim, n) - m
        if room <= 0:
            R = np.zeros((0, bj))
            est = np.zeros(k) if m == n else np.full(k, np.inf)
        else:
            nb = min(b, room)
            Qn, R = np.linalg.qr(W, mode="reduced")
            Qn, R = Qn[:, :nb], R[:nb]
            small = np.abs(np.diag(R)) <= 1e-12 * max(anorm, 1e-300)
            if small.any() or nb < bj:
                Qn = _fresh_block(W, V[:, :m], nb, small, Qn, rng)
                R = Qn.T @ W
            est = np.linalg.norm(R @ Y[j0:k], axis=0)
        wanted = _select(theta, count, which)
        if k >= count and np.all(est[wanted] <= tol * anorm):
            converged = True
            break
        if room <= 0:
            break

        # grow storage and append the new block
        if m + nb > cap:
            new_cap = min(n, max(2 * cap, m + nb))
            V2 = np.empty((n, new_cap))
            V2[:, :m] = V[:, :m]
            T2 = np.zeros((new_cap, new_cap))
            T2[:cap, :cap] = T
            V, T, cap = V2, T2, new_cap
        V[:, m:m + nb] = Qn
        T[m:m + nb, j0:m] = R
        j0, m = m, m + nb

    k = m
    wanted = _select(theta, count, which)
    X = V[:, :k] @ Y[:, wanted]
    AX = np.asarray(A.matmat(X), dtype=float).reshape(n, -1)
    n_apply += X.shape[1]
    vals = theta[wanted]
    res = np.linalg.norm(AX - X * vals, axis=0)
    ok = res <= tol * max(anorm, 1e-300)
    unverified = [(float(v), float(r)) for v, r in zip(vals[~ok], res[~ok])]
    if cluster_tol is None:
        cluster_tol = 1e-6 * max(anorm, 1e-300)
    meta = dict(method="block lanczos", which=which, block_size=b, basis_dim=k,
                applications=n_apply, tol=tol, seed=seed, norm_estimate=anorm,
                converged_estimate=converged)
    log.debug("lanczos: basis %d, %d applications, converged=%s", k, n_apply, converged)
    return EigResult(vals[ok], res[ok], cluster_tol, X[:, ok] if keep_vectors else None,
                     unverified, converged and not unverified, meta)


def _fresh_block(W, V, nb, small, Qn, rng):
    """Replace deflated directions by random vectors orthogonal to everything so far."""
    n = W.shape[0]
    cols = []
    basis = V
    for i in range(nb):
        if i < Qn.shape[1] and not small[i]:
            q = Qn[:, i].copy()
        else:
            q = rng.standard_normal(n)
        for _ in range(2):
            q -= basis @ (basis.T @ q)
            for c in cols:
                q -= c * np.dot(c, q)
        q /= np.linalg.norm(q)
        cols.append(q)
    return np.column_stack(cols)
