"""Result containers shared by the solvers and the verification suites."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def cluster_ids(values: np.ndarray, cluster_tol: float) -> np.ndarray:
    """Label ascending values; a new cluster starts when the gap exceeds cluster_tol."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=int)
    order = np.argsort(values, kind="stable")
    ids = np.empty(values.size, dtype=int)
    current = 0
    ids[order[0]] = 0
    for prev, nxt in zip(order[:-1], order[1:]):
        if values[nxt] - values[prev] > cluster_tol:
            current += 1
        ids[nxt] = current
    return ids


@dataclass
class EigResult:
    """Eigenvalues with residuals, multiplicity clusters and solver metadata.

    ``eigenvalues`` are sorted ascending; ``vectors`` (if kept) holds the
    matching eigenvectors as columns. Candidates that failed the residual
    check live in ``unverified`` and are never mixed into ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    residuals: np.ndarray
    cluster_tol: float
    vectors: Optional[np.ndarray] = None
    unverified: list = field(default_factory=list)
    converged: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        order = np.argsort(self.eigenvalues, kind="stable")
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)[order]
        self.residuals = np.asarray(self.residuals, dtype=float)[order]
        if self.vectors is not None:
            self.vectors = np.asarray(self.vectors)[:, order]

    @property
    def cluster_ids(self) -> np.ndarray:
        return cluster_ids(self.eigenvalues, self.cluster_tol)

    def clusters(self) -> list[tuple[float, int]]:
        """(mean value, multiplicity) per cluster, ascending."""
        ids = self.cluster_ids
        out = []
        for c in range(ids.max() + 1 if ids.size else 0):
            members = self.eigenvalues[ids == c]
            out.append((float(members.mean()), int(members.size)))
        return out

    def __len__(self):
        return self.eigenvalues.size


@dataclass
class Check:
    """One verified statement: measured residual against its tolerance."""

    id: str
    measured: float
    tol: float
    passed: Optional[bool] = None
    note: str = ""

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.measured) and self.measured <= self.tol)


@dataclass
class Report:
    name: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, id: str, measured: float, tol: float, passed: Optional[bool] = None,
            note: str = "") -> Check:
        check = Check(id, float(measured), float(tol), passed, note)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.id, c.measured, c.tol, c.passed, c.note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, id: str) -> Check:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def as_rows(self) -> list[dict[str, Any]]:
        return [dict(suite=self.name, check=c.id, measured=c.measured, tolerance=c.tol,
                     passed=c.passed, note=c.note) for c in self.checks]
