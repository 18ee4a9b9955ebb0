"""Direct carving solver and the supersampled anti-alias pass.

Carving starts from an all-ones tensor and, for every 0 pixel of every
provided target, deletes the voxel line orthogonal to that pixel.  That
loop collapses to a closed-form AND over broadcast planes, which is a
single branch-free pass and what is implemented here.

The anti-alias pass dilates a solved grid by an integer supersampling
factor and deletes every subvoxel that is dark in all provided
high-resolution targets; such a deletion can only improve each
projection's match, never hurt it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Axis, Bitmap, HyperGrid, TargetSet, VoxelGrid, project, similarity

__all__ = [
    "CarveReport",
    "match_report",
    "carve3",
    "carve_nd",
    "dilate",
    "antialias_carve",
]


@dataclass(frozen=True)
class CarveReport:
    """A solved grid plus how well its shadows match each provided target."""

    grid: VoxelGrid
    per_plane_similarity: dict[Axis, float]
    consistent: bool


def match_report(grid: VoxelGrid, targets: TargetSet) -> CarveReport:
    """Score a grid's shadows against each provided target plane."""
    sims = {ax: similarity(project(grid, ax), bm) for ax, bm in targets.provided()}
    return CarveReport(grid, sims, all(s == 1.0 for s in sims.values()))


def carve3(targets: TargetSet) -> CarveReport:
    """Carve an n^3 grid against the provided targets.

    The surviving voxels are exactly ``P[j,k] & Q[i,k] & R[i,j]`` with
    absent planes acting as all-ones (no constraint).  The report
    compares the grid's shadows against each provided target; an
    unsatisfiable target set yields ``consistent=False`` rather than an
    error, and the (possibly empty) best-effort grid is still returned.
    """
    n = targets.n
    p = targets.p.bits.astype(bool)
    q = targets.q.bits.astype(bool) if targets.q is not None else np.ones((n, n), bool)
    r = targets.r.bits.astype(bool) if targets.r is not None else np.ones((n, n), bool)
    cells = p[None, :, :] & q[:, None, :] & r[:, :, None]
    return match_report(VoxelGrid(cells.astype(np.uint8)), targets)


def carve_nd(d: int, n: int, images) -> HyperGrid:
    """Carve a d-dimensional hypertensor against hyperplane images.

    ``images`` is a sequence of ``(axis_index, image)`` pairs where each
    image is a (d-1)-dimensional binary array (or HyperGrid) of extent n
    along every axis.  The output cell at index tuple t survives iff for
    every image m the pixel at t-with-coordinate-axis_m-removed is 1.

    At most one image per axis; with d=3 and the axis convention of
    :mod:`shadowcarve.core` this reproduces :func:`carve3`.
    """
    if d < 2:
        raise ValueError("dimension d must be >= 2")
    if n < 1:
        raise ValueError("size n must be >= 1")
    pairs = list(images)
    if not 1 <= len(pairs) <= d:
        raise ValueError(f"need between 1 and {d} images, got {len(pairs)}")
    seen = set()
    acc = np.ones((n,) * d, dtype=bool)
    for axis, image in pairs:
        if not 0 <= axis < d:
            raise ValueError(f"axis index {axis} out of range for d={d}")
        if axis in seen:
            raise ValueError(f"duplicate axis index {axis}")
        seen.add(axis)
        arr = image.cells if isinstance(image, HyperGrid) else np.asarray(image)
        if arr.shape != (n,) * (d - 1):
            raise ValueError(
                f"image on axis {axis} has shape {arr.shape}, expected {(n,) * (d - 1)}"
            )
        acc &= np.expand_dims(arr.astype(bool), axis=axis)
    return HyperGrid(acc.astype(np.uint8))


def dilate(grid: VoxelGrid, factor: int) -> VoxelGrid:
    """Blow each voxel up into a factor^3 block of subvoxels."""
    if factor < 1:
        raise ValueError("dilation factor must be >= 1")
    if factor == 1:
        return VoxelGrid(grid.cells.copy())
    cells = grid.cells
    for axis in range(3):
        cells = cells.repeat(factor, axis=axis)
    return VoxelGrid(cells)


def antialias_carve(coarse: VoxelGrid, targets_hi: TargetSet, factor: int) -> VoxelGrid:
    """Supersampled carve: dilate, then delete subvoxels dark in every target.

    ``targets_hi`` must hold the high-resolution targets at size
    ``factor * coarse.size``.  A live subvoxel (i, j, k) is deleted iff
    every provided target has a 0 subpixel at the corresponding position
    (absent planes impose nothing and so never veto a deletion).
    Deletion never creates voxels, so the result is a subset of the
    dilated grid.
    """
    if factor < 1:
        raise ValueError("supersampling factor must be >= 1")
    n_hi = coarse.size * factor
    if targets_hi.n != n_hi:
        raise ValueError(
            f"high-resolution targets have size {targets_hi.n}, expected {n_hi}"
        )
    sup = dilate(coarse, factor).cells.astype(bool)

    p = targets_hi.p.bits.astype(bool)
    keep = p[None, :, :]
    if targets_hi.q is not None:
        keep = keep | targets_hi.q.bits.astype(bool)[:, None, :]
    if targets_hi.r is not None:
        keep = keep | targets_hi.r.bits.astype(bool)[:, :, None]

    out = sup & keep
    if __debug__:
        # Deletion-safety, checked via the dual form: a subvoxel may be
        # removed only where every provided plane's zero mask holds.
        dark = ~p[None, :, :]
        if targets_hi.q is not None:
            dark = dark & ~targets_hi.q.bits.astype(bool)[:, None, :]
        if targets_hi.r is not None:
            dark = dark & ~targets_hi.r.bits.astype(bool)[:, :, None]
        assert np.array_equal(sup & ~out, sup & dark)
    return VoxelGrid(out.astype(np.uint8))
