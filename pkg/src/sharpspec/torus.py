"""Periodic staggered grids and FFT-diagonal operators on them.

Fields live on a 3-torus of n_0 x n_1 x n_2 cells with spacing h.  Edge
fields are stored as arrays of shape (3, n_0, n_1, n_2): component c at
index p is the edge from p to p + e_c, located at p + e_c/2.  Face fields
use the same shape, component c being the face normal to axis c at
p + (e_a + e_b)/2 with a < b the other two axes.

Operators commuting with translations are stored by their per-mode 3x3
symbols in *position-aware* Fourier coordinates, i.e. coefficients taken
relative to each component's physical location.  In these coordinates the
forward difference along axis j is multiplication by i*kappa_j with
kappa_j = (2/h) sin(theta_j/2), and the curl on edges, composed with the
half-cell shift from faces back to edges, is the Hermitian symbol
i kappa x.  The grid sizes are odd so that the half-cell shift maps real
fields to real fields (an even size has a Nyquist mode with no real shift).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp

# sign relating the lexicographic coboundary on faces to the curl component
HODGE_SIGN = np.array([1.0, -1.0, 1.0])
OTHER_AXES = ((1, 2), (0, 2), (0, 1))
EDGE_OFFSETS = 0.5 * np.eye(3)
FACE_OFFSETS = 0.5 * (1.0 - np.eye(3))
SMOOTH_PRIMES = (3, 5, 7, 11, 13)


def odd_fft_size(target: int) -> int:
    """Smallest odd n >= target with prime factors in 3..13."""
    n = max(3, int(target))
    if n % 2 == 0:
        n += 1
    while True:
        m = n
        for p in SMOOTH_PRIMES:
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 2


@dataclass(frozen=True)
class TorusGrid:
    n: tuple
    h: float

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        if len(n) != 3:
            raise ValueError("torus grids are three dimensional")
        if any(v < 3 or v % 2 == 0 for v in n):
            raise ValueError(f"grid sizes must be odd and >= 3, got {n}")
        if not self.h > 0:
            raise ValueError("h must be positive")
        object.__setattr__(self, "n", n)

    @classmethod
    def cubic(cls, n: int, h: float = 1.0) -> "TorusGrid":
        return cls((n, n, n), h)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def field_shape(self) -> tuple:
        return (3,) + self.n

    @property
    def n_points(self) -> int:
        return int(np.prod(self.n))

    @property
    def period(self) -> tuple:
        return tuple(v * self.h for v in self.n)

    @property
    def spectral_shape(self) -> tuple:
        return (self.n[0], self.n[1], self.n[2] // 2 + 1)

    def angles(self) -> list:
        """theta_j per axis on the rfft grid, broadcastable."""
        th = []
        for j, nj in enumerate(self.n):
            f = sfft.rfftfreq(nj) if j == 2 else sfft.fftfreq(nj)
            shape = [1, 1, 1]
            shape[j] = f.size
            th.append((2 * np.pi * f).reshape(shape))
        return th

    def kappa(self) -> np.ndarray:
        """Difference-operator wave numbers, shape (3,) + spectral_shape."""
        th = self.angles()
        out = np.zeros((3,) + self.spectral_shape)
        for j in range(3):
            out[j] = (2.0 / self.h) * np.sin(th[j] / 2)
        return out


class SymbolOperator:
    """Translation-invariant map between 3-component staggered fields.

    ``symbol`` has shape (3, 3) + grid.spectral_shape and acts on
    position-aware coefficients; ``in_offsets``/``out_offsets`` give the
    location (in cells) of each input/output component.
    """

    def __init__(self, grid: TorusGrid, symbol: np.ndarray,
                 in_offsets: np.ndarray = EDGE_OFFSETS, out_offsets: np.ndarray = EDGE_OFFSETS):
        self.grid = grid
        self.symbol = np.asarray(symbol, dtype=complex)
        if self.symbol.shape != (3, 3) + grid.spectral_shape:
            raise ValueError("symbol shape does not match the grid")
        self.in_offsets = np.asarray(in_offsets, float)
        self.out_offsets = np.asarray(out_offsets, float)
        th = grid.angles()
        self._phase_in = np.stack([np.exp(-1j * sum(th[j] * o[j] for j in range(3)))
                                   for o in self.in_offsets])
        self._phase_out = np.stack([np.exp(1j * sum(th[j] * o[j] for j in range(3)))
                                    for o in self.out_offsets])

    @property
    def shape(self) -> tuple:
        m = 3 * self.grid.n_points
        return (m, m)

    def apply_spectral(self, X: np.ndarray) -> np.ndarray:
        Xt = X * self._phase_in
        Yt = np.einsum("ij...,j...->i...", self.symbol, Xt)
        return Yt * self._phase_out

    def __call__(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        u = np.asarray(u, dtype=float).reshape(g.field_shape)
        U = sfft.rfftn(u, axes=(1, 2, 3))
        V = self.apply_spectral(U)
        return sfft.irfftn(V, s=g.n, axes=(1, 2, 3))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self(x).ravel()

    def compose(self, other: "SymbolOperator") -> "SymbolOperator":
        """self ∘ other (other's outputs must sit where self's inputs do)."""
        if not np.allclose(self.in_offsets, other.out_offsets):
            raise ValueError("component locations do not match")
        sym = np.einsum("ij...,jk...->ik...", self.symbol, other.symbol)
        return SymbolOperator(self.grid, sym, other.in_offsets, self.out_offsets)

    def block(self, mode: tuple) -> np.ndarray:
        """3x3 symbol at one rfft-grid mode index."""
        return self.symbol[(slice(None), slice(None)) + tuple(mode)]


def _cross_matrix(kappa: np.ndarray) -> np.ndarray:
    K = np.zeros((3, 3) + kappa.shape[1:])
    K[0, 1], K[0, 2] = -kappa[2], kappa[1]
    K[1, 0], K[1, 2] = kappa[2], -kappa[0]
    K[2, 0], K[2, 1] = -kappa[1], kappa[0]
    return K


def curl_block(theta: Sequence[float], h: float = 1.0) -> np.ndarray:
    """3x3 curl symbol i kappa x at the angles theta (any grid size)."""
    kap = (2.0 / h) * np.sin(np.asarray(theta, dtype=float) / 2)
    return 1j * _cross_matrix(kap.reshape(3, 1))[:, :, 0]


def lex_curl(grid: TorusGrid) -> SymbolOperator:
    """Lexicographic coboundary edges -> faces: F_c = D_a E_b - D_b E_a (a < b)."""
    sym = 1j * HODGE_SIGN[:, None, None, None, None] * _cross_matrix(grid.kappa())
    return SymbolOperator(grid, sym, EDGE_OFFSETS, FACE_OFFSETS)


def face_to_edge_shift(grid: TorusGrid) -> SymbolOperator:
    """Unitary half-cell shift taking face component c to edge component c (with the curl sign)."""
    sym = np.zeros((3, 3) + grid.spectral_shape, dtype=complex)
    for c in range(3):
        sym[c, c] = HODGE_SIGN[c]
    return SymbolOperator(grid, sym, FACE_OFFSETS, EDGE_OFFSETS)


def torus_curl(grid: TorusGrid) -> SymbolOperator:
    """Square curl endomorphism of edge fields: shift ∘ lexicographic curl."""
    return face_to_edge_shift(grid).compose(lex_curl(grid))


def symbol_pseudoinverse(S: SymbolOperator, rcond: float = 1e-12) -> SymbolOperator:
    """Mode-wise Moore-Penrose pseudoinverse."""
    blocks = np.moveaxis(S.symbol.reshape(3, 3, -1), -1, 0)
    scale = np.abs(blocks).max(initial=0.0)
    pinv = np.linalg.pinv(blocks, rcond=rcond) if scale > 0 else np.zeros_like(blocks)
    # rcond is relative per block; blocks that are numerically zero must map to zero
    norms = np.linalg.norm(blocks, axis=(1, 2))
    pinv[norms <= rcond * scale] = 0
    sym = np.moveaxis(pinv, 0, -1).reshape(S.symbol.shape)
    return SymbolOperator(S.grid, sym, S.out_offsets, S.in_offsets)


def transverse_projector(grid: TorusGrid) -> SymbolOperator:
    """I - kappa kappa^T / |kappa|^2 (zero at kappa = 0), built without the curl."""
    kap = grid.kappa()
    k2 = np.sum(kap ** 2, axis=0)
    safe = np.where(k2 > 0, k2, 1.0)
    sym = np.zeros((3, 3) + grid.spectral_shape, dtype=complex)
    for i in range(3):
        for j in range(3):
            sym[i, j] = (i == j) - kap[i] * kap[j] / safe
    sym[:, :, k2 == 0] = 0
    return SymbolOperator(grid, sym)


def mode_eigenvalues(S: SymbolOperator) -> np.ndarray:
    """Eigenvalues of every Hermitian 3x3 block, including conjugate modes.

    Returns one array covering each full-grid mode exactly once.
    """
    g = S.grid
    blocks = np.moveaxis(S.symbol, (0, 1), (-2, -1))
    w = np.linalg.eigvalsh(blocks)  # (n0, n1, n2r, 3)
    n2 = g.n[2]
    # rfft index j along the last axis stands for +j and (for j > 0) also -j
    weight = np.full(g.spectral_shape[2], 2)
    weight[0] = 1
    reps = np.broadcast_to(weight[None, None, :, None], w.shape)
    return np.repeat(w.ravel(), reps.ravel())


# ----------------------------------------------------------------------------
# index-space stencils (the assembled counterparts of the symbols)


def _lin(grid: TorusGrid, idx: np.ndarray) -> np.ndarray:
    return np.ravel_multi_index(tuple((idx % np.array(grid.n)[:, None])), grid.n)


def _all_points(grid: TorusGrid) -> np.ndarray:
    return np.indices(grid.n).reshape(3, -1)


def periodic_gradient(grid: TorusGrid) -> sp.csr_matrix:
    """Edges x vertices forward differences / h."""
    N = grid.n_points
    P = _all_points(grid)
    base = _lin(grid, P)
    rows, cols, vals = [], [], []
    for c in range(3):
        Q = P.copy()
        Q[c] += 1
        r = c * N + base
        rows += [r, r]
        cols += [_lin(grid, Q), base]
        vals += [np.ones(N), -np.ones(N)]
    G = sp.csr_matrix((np.concatenate(vals) / grid.h, (np.concatenate(rows), np.concatenate(cols))),
                      shape=(3 * N, N))
    return G


def periodic_lex_curl(grid: TorusGrid) -> sp.csr_matrix:
    """Faces x edges lexicographic coboundary / h, face c normal to axis c."""
    N = grid.n_points
    P = _all_points(grid)
    base = _lin(grid, P)
    rows, cols, vals = [], [], []
    for c, (a, b) in enumerate(OTHER_AXES):
        r = c * N + base
        Pa = P.copy()
        Pa[a] += 1
        Pb = P.copy()
        Pb[b] += 1
        # D_a E_b - D_b E_a
        rows += [r, r, r, r]
        cols += [b * N + _lin(grid, Pa), b * N + base, a * N + _lin(grid, Pb), a * N + base]
        vals += [np.ones(N), -np.ones(N), -np.ones(N), np.ones(N)]
    return sp.csr_matrix((np.concatenate(vals) / grid.h,
                          (np.concatenate(rows), np.concatenate(cols))), shape=(3 * N, 3 * N))


def dirichlet_shift_matrix(n: int, delta: float) -> np.ndarray:
    """Band-limited interpolation of a period-n sequence at i + delta (odd n)."""
    t = np.arange(n)[:, None] - np.arange(n)[None, :] + delta
    den = n * np.sin(np.pi * t / n)
    with np.errstate(invalid="ignore", divide="ignore"):
        K = np.sin(np.pi * t) / den
    K[np.abs(den) < 1e-14] = 1.0
    return K


def dense_face_to_edge_shift(grid: TorusGrid) -> np.ndarray:
    """Dense matrix of :func:`face_to_edge_shift` assembled from Dirichlet kernels."""
    N = grid.n_points
    U = np.zeros((3 * N, 3 * N))
    for c in range(3):
        mats = [dirichlet_shift_matrix(grid.n[j], 0.5 if j == c else -0.5) for j in range(3)]
        U[c * N:(c + 1) * N, c * N:(c + 1) * N] = HODGE_SIGN[c] * np.kron(
            mats[0], np.kron(mats[1], mats[2]))
    return U
