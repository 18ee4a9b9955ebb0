"""Domain types and primitive operations shared by every solver.

Axis and index conventions (all other modules rely on these):

* A voxel grid is a cubic binary tensor ``cells[i][j][k]``.
* The three shadow planes are tied to the coordinate axes:
  the ``P`` plane is orthogonal to axis I and indexed ``P[j][k]``
  (bitmap row = j, column = k); ``Q`` is orthogonal to J and indexed
  ``Q[i][k]``; ``R`` is orthogonal to K and indexed ``R[i][j]``.
* No mirroring is applied anywhere; a physical shadow of the exported
  mesh may therefore appear mirrored depending on viewing side.

All functions here are pure: they never mutate their inputs and their
outputs are freshly allocated.  Values may be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = [
    "Axis",
    "Bitmap",
    "VoxelGrid",
    "HyperGrid",
    "TargetSet",
    "flatten_index",
    "unflatten_index",
    "project",
    "similarity",
    "resample_nearest",
]


class Axis(IntEnum):
    """The three coordinate axes, ordered I < J < K.

    The integer value doubles as the numpy reduction axis used when
    projecting along that direction.
    """

    I = 0
    J = 1
    K = 2


def _as_binary(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError(f"{name} must contain only 0/1 values")
    return arr


@dataclass(frozen=True, eq=False)
class Bitmap:
    """Square binary image; a target shadow or a computed projection."""

    bits: np.ndarray

    def __post_init__(self):
        bits = _as_binary(self.bits, "bitmap")
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError(f"bitmap must be square 2D, got shape {bits.shape}")
        if bits.shape[0] == 0:
            raise ValueError("bitmap size must be positive")
        object.__setattr__(self, "bits", bits)

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "Bitmap":
        return cls(np.zeros((n, n), dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "Bitmap":
        return cls(np.ones((n, n), dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Cubic binary voxel tensor, addressed ``cells[i][j][k]``."""

    cells: np.ndarray

    def __post_init__(self):
        cells = _as_binary(self.cells, "voxel grid")
        if cells.ndim != 3 or len(set(cells.shape)) != 1:
            raise ValueError(f"voxel grid must be cubic 3D, got shape {cells.shape}")
        if cells.shape[0] == 0:
            raise ValueError("voxel grid size must be positive")
        object.__setattr__(self, "cells", cells)

    @property
    def size(self) -> int:
        return self.cells.shape[0]

    def count(self) -> int:
        """Number of occupied voxels."""
        return int(self.cells.sum())

    @classmethod
    def zeros(cls, n: int) -> "VoxelGrid":
        return cls(np.zeros((n, n, n), dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "VoxelGrid":
        return cls(np.ones((n, n, n), dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class HyperGrid:
    """Binary d-dimensional tensor (d >= 2) with equal extent along every axis."""

    cells: np.ndarray

    def __post_init__(self):
        cells = _as_binary(self.cells, "hypergrid")
        if cells.ndim < 2:
            raise ValueError("hypergrid must have dimension >= 2")
        if len(set(cells.shape)) != 1:
            raise ValueError(f"hypergrid extents must all be equal, got {cells.shape}")
        object.__setattr__(self, "cells", cells)

    @property
    def dim(self) -> int:
        return self.cells.ndim

    @property
    def size(self) -> int:
        return self.cells.shape[0]


@dataclass(frozen=True, eq=False)
class TargetSet:
    """Target shadows for a solve: P is mandatory, Q optional, R requires Q."""

    p: Bitmap
    q: Bitmap | None = None
    r: Bitmap | None = None

    def __post_init__(self):
        if self.r is not None and self.q is None:
            raise ValueError("target R may only be given when Q is given")
        for name, bm in (("q", self.q), ("r", self.r)):
            if bm is not None and bm.size != self.p.size:
                raise ValueError(
                    f"target {name} has size {bm.size}, but p has size {self.p.size}"
                )

    @property
    def n(self) -> int:
        """Working resolution (side length shared by all provided planes)."""
        return self.p.size

    def provided(self) -> list[tuple[Axis, Bitmap]]:
        """The provided planes paired with the axis each one is orthogonal to."""
        planes = [(Axis.I, self.p)]
        if self.q is not None:
            planes.append((Axis.J, self.q))
        if self.r is not None:
            planes.append((Axis.K, self.r))
        return planes


def flatten_index(i: int, j: int, k: int, n: int) -> int:
    """Map tensor index (i, j, k) to its flat position i*n^2 + j*n + k."""
    if not (0 <= i < n and 0 <= j < n and 0 <= k < n):
        raise ValueError(f"index ({i}, {j}, {k}) out of range for n={n}")
    return i * n * n + j * n + k


def unflatten_index(f: int, n: int) -> tuple[int, int, int]:
    """Inverse of :func:`flatten_index`."""
    if not 0 <= f < n**3:
        raise ValueError(f"flat index {f} out of range for n={n}")
    i, rem = divmod(f, n * n)
    j, k = divmod(rem, n)
    return i, j, k


def project(grid: VoxelGrid, axis: Axis) -> Bitmap:
    """Orthographic shadow of the grid along one axis.

    An output pixel is 1 iff any voxel on the line orthogonal to the
    plane is 1 (any positive voxel blocks light).
    """
    shadow = np.any(grid.cells, axis=int(axis))
    return Bitmap(shadow.astype(np.uint8))


def similarity(a: Bitmap, b: Bitmap) -> float:
    """Fraction of pixel positions where the two bitmaps agree."""
    if a.size != b.size:
        raise ValueError(f"bitmap sizes differ: {a.size} vs {b.size}")
    return float(np.mean(a.bits == b.bits))


def resample_nearest(b: Bitmap, target_size: int) -> Bitmap:
    """Nearest-neighbor resample to ``target_size`` x ``target_size``.

    Output pixel (r, c) copies source pixel (floor(r*size/target),
    floor(c*size/target)).  Upsampling by an integer factor N turns each
    source pixel into an N x N block, and downsampling by an integer
    factor picks the top-left pixel of each block, so the two operations
    invert each other.
    """
    if target_size < 1:
        raise ValueError("target_size must be >= 1")
    src = (np.arange(target_size) * b.size) // target_size
    return Bitmap(b.bits[np.ix_(src, src)])
