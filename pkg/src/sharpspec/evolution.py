"""Heat and wave equations for div#grad# solved exactly by eigenexpansion."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import linrel as lr
from .spectra import DenseSharp, dense_gradient_sharp, laplace_sharp_eigs


@dataclass(eq=False)
class EigenBasis:
    """Eigenpairs of div#grad# on a 1D/2D grid.

    ``vectors`` hold grid values, orthonormal in the weighted inner product
    ⟨u, v⟩ = Σ w_i u_i v_i; ``values`` are the eigenvalues −σ² ≤ 0.  Modes
    with |value| ≤ ``kernel_tol`` form the kernel block.
    """

    values: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    grad: np.ndarray
    edge_weights: np.ndarray
    kernel_tol: float = 1e-8

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.vectors.shape != (self.weights.size, self.values.size):
            raise ValueError("basis/space dimension mismatch")

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def kernel(self) -> np.ndarray:
        return np.abs(self.values) <= self.kernel_tol

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(np.maximum(-self.values, 0.0))

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, float)
        if u.shape[0] != self.n:
            raise ValueError(f"grid function has {u.shape[0]} values, basis expects {self.n}")
        return self.vectors.T @ (self.weights * u)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.vectors @ coeffs

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(np.dot(u, self.weights * u)))

    def grad_norm2(self, u: np.ndarray) -> float:
        g = self.grad @ u
        return float(np.dot(g, self.edge_weights * g))

    def orthonormality_defect(self) -> float:
        G = self.vectors.T @ (self.weights[:, None] * self.vectors)
        return float(np.abs(G - np.eye(G.shape[0])).max(initial=0.0))

    def truncation_residual(self, u: np.ndarray) -> float:
        return self.norm(u - self.synthesize(self.coefficients(u)))

    @classmethod
    def from_domain(cls, domain, count: Optional[int] = None, tol: float = 1e-10) -> "EigenBasis":
        """Basis from the dense route; ``count`` keeps the modes with smallest σ."""
        ds = dense_gradient_sharp(domain, tol)
        res = laplace_sharp_eigs(domain, tol, dense=ds)
        vals = res.eigenvalues
        vecs = res.metadata["grid_vectors"]
        order = np.argsort(-vals, kind="stable")  # 0 first, then increasing σ
        if count is not None:
            order = order[:count]
        scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
        G = ds.matrix / np.sqrt(ds.weights1)[:, None] * np.sqrt(ds.weights0)[None, :]
        return cls(vals[order], vecs[:, order], ds.weights0, G, ds.weights1,
                   kernel_tol=1e-9 * scale)


@dataclass
class EvolutionResult:
    times: np.ndarray
    snapshots: np.ndarray            # (len(times), n) grid values
    coefficients: np.ndarray         # (len(times), modes)
    energy: np.ndarray
    kernel_coefficients: np.ndarray  # (len(times), kernel modes)
    truncation_residual: float
    info: dict = field(default_factory=dict)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0 or np.any(np.diff(t) <= 0) or t[0] < 0 or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite, nonnegative and strictly increasing")
    return t


def evolve_heat(basis: EigenBasis, u0: np.ndarray, times: Sequence[float],
                source: Optional[np.ndarray] = None) -> EvolutionResult:
    """u' = div#grad# u (+ f constant in time), u(0) = u0.

    Mode j evolves as a_j e^{λ_j t} (+ f_j (e^{λ_j t} − 1)/λ_j, or f_j t on
    the kernel).  The energy column is ‖u(t)‖².
    """
    t = _check_times(times)
    a = basis.coefficients(u0)
    f = basis.coefficients(source) if source is not None else np.zeros_like(a)
    lam = basis.values
    ker = basis.kernel
    E = np.exp(np.outer(t, lam))
    C = a * E
    lam_safe = np.where(ker, 1.0, lam)
    growth = np.where(ker, t[:, None], np.expm1(np.outer(t, lam)) / lam_safe)
    C = C + f * growth
    U = C @ basis.vectors.T
    energy = np.array([basis.norm(u) ** 2 for u in U])
    return EvolutionResult(t, U, C, energy, C[:, ker], basis.truncation_residual(u0),
                           dict(equation="heat"))


def evolve_wave(basis: EigenBasis, u0: np.ndarray, v0: np.ndarray, times: Sequence[float],
                source: Optional[np.ndarray] = None) -> EvolutionResult:
    """u'' = div#grad# u (+ f), u(0) = u0, u'(0) = v0.

    The energy column is E(t) = ‖u'(t)‖² + ‖grad u(t)‖².
    """
    t = _check_times(times)
    a = basis.coefficients(u0)
    b = basis.coefficients(v0)
    f = basis.coefficients(source) if source is not None else np.zeros_like(a)
    ker = basis.kernel
    s = np.where(ker, 1.0, basis.sigma)
    st = np.outer(t, s)
    cos, sin = np.cos(st), np.sin(st)
    C = np.where(ker, a + np.outer(t, b) + 0.5 * np.outer(t ** 2, f),
                 a * cos + b * sin / s + f * (1 - cos) / s ** 2)
    D = np.where(ker, b + np.outer(t, f), -a * s * sin + b * cos + f * sin / s)
    U = C @ basis.vectors.T
    V = D @ basis.vectors.T
    energy = np.array([basis.norm(v) ** 2 + basis.grad_norm2(u) for u, v in zip(U, V)])
    trunc = max(basis.truncation_residual(u0), basis.truncation_residual(v0))
    return EvolutionResult(t, U, C, energy, C[:, ker], trunc, dict(equation="wave"))


def heat_expm_oracle(domain, u0: np.ndarray, times: Sequence[float],
                     tol: float = 1e-10, dense: Optional[DenseSharp] = None) -> np.ndarray:
    """Heat solution by a dense matrix exponential (no eigendecomposition).

    The generator is −(A Q)^T (A Q) on the domain basis Q of grad#, with A
    the orthonormal-coordinate gradient; u0 is first projected onto that
    domain, matching the expansion.
    """
    ds = dense if dense is not None else dense_gradient_sharp(domain, tol)
    Q = lr.parts(ds.pair_sharp.A_sharp).domain.basis
    AQ = ds.matrix @ Q
    L = -(AQ.T @ AQ)
    sw = np.sqrt(ds.weights0)
    c0 = Q.T @ (sw * np.asarray(u0, float))
    out = []
    for t in _check_times(times):
        out.append((Q @ (sla.expm(t * L) @ c0)) / sw)
    return np.array(out)
