"""Domain specifications and their voxelization on a uniform lattice."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

SHAPES = ("box", "ball", "shell", "solid-torus", "voxels")
FIELDS = ("shape", "h", "radius", "extent", "voxels_path", "seed")
DEFAULT_SEED = 42


class DomainError(ValueError):
    """Invalid or unreadable domain description."""


def parse_length(value) -> float:
    """Accept numbers and fraction strings such as ``"1/24"``."""
    if isinstance(value, bool):
        raise DomainError(f"not a length: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a length: {value!r}") from exc
    raise DomainError(f"not a length: {value!r}")


@dataclass(frozen=True)
class DomainSpec:
    shape: str
    h: float
    radius: Optional[tuple] = None
    extent: Optional[tuple] = None
    voxels_path: Optional[str] = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown shape {self.shape!r}; expected one of {', '.join(SHAPES)}")
        if not (np.isfinite(self.h) and self.h > 0):
            raise DomainError("h must be positive")
        if self.radius is not None and any(r <= 0 for r in self.radius):
            raise DomainError("radii must be positive")
        if self.shape == "box":
            if not self.extent:
                raise DomainError("box needs an extent")
            if not 1 <= len(self.extent) <= 3:
                raise DomainError("box extent must have 1 to 3 intervals")
            if any(hi <= lo for lo, hi in self.extent):
                raise DomainError("box extent intervals must have positive length")
        if self.shape == "shell":
            r = self.radii(2)
            if r[0] >= r[1]:
                raise DomainError("shell needs inner radius < outer radius")
        if self.shape == "voxels" and not self.voxels_path:
            raise DomainError("shape 'voxels' needs voxels_path")

    def radii(self, count: int) -> tuple:
        defaults = {"ball": (1.0,), "shell": (0.5, 1.0), "solid-torus": (1.0, 0.5)}
        r = self.radius if self.radius is not None else defaults[self.shape]
        if len(r) != count:
            raise DomainError(f"shape {self.shape!r} needs {count} radius value(s)")
        return tuple(r)

    @property
    def dim(self) -> int:
        if self.shape == "box":
            return len(self.extent)
        if self.shape == "voxels":
            return voxelize(self).dim
        return 3

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "DomainSpec":
        if not isinstance(data, dict):
            raise DomainError("domain description must be a JSON object")
        unknown = sorted(set(data) - set(FIELDS))
        if unknown:
            raise DomainError(f"unknown field(s): {', '.join(unknown)}")
        for key in ("shape", "h"):
            if key not in data:
                raise DomainError(f"missing field {key!r}")
        radius = data.get("radius")
        if radius is not None:
            radius = tuple(parse_length(r) for r in (radius if isinstance(radius, list) else [radius]))
        extent = data.get("extent")
        if extent is not None:
            try:
                extent = tuple((parse_length(lo), parse_length(hi)) for lo, hi in extent)
            except (TypeError, ValueError) as exc:
                raise DomainError("extent must be a list of [lo, hi] pairs") from exc
        path = data.get("voxels_path")
        if path is not None:
            p = Path(path)
            if not p.is_absolute() and base_dir is not None:
                p = base_dir / p
            if not p.is_file():
                raise DomainError(f"voxel file not found: {p}")
            path = str(p)
        seed = data.get("seed", DEFAULT_SEED)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise DomainError("seed must be an integer")
        return cls(str(data["shape"]), parse_length(data["h"]), radius, extent, path, seed)

    @classmethod
    def load(cls, path) -> "DomainSpec":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DomainError(f"cannot read domain file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"cannot parse domain file {path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def with_h(self, h: float) -> "DomainSpec":
        return DomainSpec(self.shape, h, self.radius, self.extent, self.voxels_path, self.seed)

    def to_dict(self) -> dict:
        out = {"shape": self.shape, "h": self.h}
        if self.radius is not None:
            out["radius"] = list(self.radius) if len(self.radius) > 1 else self.radius[0]
        if self.extent is not None:
            out["extent"] = [list(e) for e in self.extent]
        if self.voxels_path is not None:
            out["voxels_path"] = self.voxels_path
        out["seed"] = self.seed
        return out


@dataclass(frozen=True, eq=False)
class VoxelDomain:
    """Set of lattice cells; cell i occupies origin + h*[i, i+1)."""

    cells: np.ndarray
    h: float
    origin: np.ndarray = field(default=None)

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[0] == 0:
            raise DomainError("voxel domain is empty")
        if not 1 <= cells.shape[1] <= 3:
            raise DomainError("only dimensions 1, 2 and 3 are supported")
        if not self.h > 0:
            raise DomainError("h must be positive")
        cells = np.unique(cells, axis=0)
        object.__setattr__(self, "cells", cells)
        origin = np.zeros(cells.shape[1]) if self.origin is None else np.asarray(self.origin, float)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return self.cells.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Lowest cell index and one past the highest, per axis."""
        return self.cells.min(axis=0), self.cells.max(axis=0) + 1

    def mask(self) -> np.ndarray:
        lo, hi = self.bounding_box
        m = np.zeros(tuple(hi - lo), dtype=bool)
        m[tuple((self.cells - lo).T)] = True
        return m

    def centers(self) -> np.ndarray:
        return self.origin + (self.cells + 0.5) * self.h

    @property
    def volume(self) -> float:
        return self.n_cells * self.h ** self.dim


def _lattice_cells(lower, upper, h, inside) -> tuple[np.ndarray, np.ndarray]:
    lower = np.asarray(lower, float)
    counts = [int(np.ceil((u - l) / h - 0.5)) for l, u in zip(lower, upper)]
    axes = [lower[i] + (np.arange(c) + 0.5) * h for i, c in enumerate(counts)]
    grids = np.meshgrid(*axes, indexing="ij")
    keep = inside(*grids)
    return np.argwhere(keep), lower


def voxelize(spec: DomainSpec) -> VoxelDomain:
    """Cells whose centers lie strictly inside the shape."""
    h = spec.h
    if spec.shape == "voxels":
        return VoxelDomain(read_voxel_file(spec.voxels_path), h)
    if spec.shape == "box":
        lo = [e[0] for e in spec.extent]
        hi = [e[1] for e in spec.extent]
        cells, origin = _lattice_cells(lo, hi, h, lambda *x: np.ones(x[0].shape, bool))
    elif spec.shape == "ball":
        (R,) = spec.radii(1)
        cells, origin = _lattice_cells([-R] * 3, [R] * 3, h,
                                       lambda x, y, z: x * x + y * y + z * z < R * R)
    elif spec.shape == "shell":
        a, b = spec.radii(2)

        def inside(x, y, z):
            r2 = x * x + y * y + z * z
            return (r2 > a * a) & (r2 < b * b)

        cells, origin = _lattice_cells([-b] * 3, [b] * 3, h, inside)
    else:
        R, r = spec.radii(2)
        if r >= R:
            raise DomainError("solid torus needs tube radius < major radius")
        cells, origin = _lattice_cells([-(R + r), -(R + r), -r], [R + r, R + r, r], h,
                                       lambda x, y, z: (np.hypot(x, y) - R) ** 2 + z * z < r * r)
    if cells.shape[0] == 0:
        raise DomainError("voxelization produced no cells")
    return VoxelDomain(cells, h, origin)


def read_voxel_file(path) -> np.ndarray:
    """Integer cell indices, one whitespace-separated tuple per line ('#' starts a comment)."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([int(tok) for tok in line.split()])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: expected integers") from exc
    if not rows:
        raise DomainError(f"{path}: no voxels")
    if len({len(r) for r in rows}) != 1:
        raise DomainError(f"{path}: inconsistent number of indices per line")
    return np.array(rows, dtype=np.int64)


def write_voxel_file(path, cells: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(cells, dtype=np.int64):
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
