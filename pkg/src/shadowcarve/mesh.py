"""Voxel grid to boundary-quad mesh, OBJ export, and printability checks.

Voxel (i, j, k) occupies the unit cube [i, i+1] x [j, j+1] x [k, k+1];
mesh vertices are integer lattice points (physical scaling is the
consumer's concern).  One quad is emitted for every face between an
occupied cell and an unoccupied-or-outside neighbor, wound
counter-clockwise as seen from the unoccupied side, so outward normals
follow the right-hand rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import VoxelGrid

__all__ = ["Mesh", "ComponentReport", "extract_surface", "write_obj", "connected_components"]

# Corner offsets per (axis, side) relative to the cell origin, already in
# CCW order for an outward normal: cross(v1-v0, v2-v1) points out.
_FACE_CORNERS = {
    (0, +1): ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),
    (0, -1): ((0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)),
    (1, +1): ((0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)),
    (1, -1): ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),
    (2, +1): ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
    (2, -1): ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),
}


@dataclass(frozen=True, eq=False)
class Mesh:
    """Quad mesh on the integer lattice: (V, 3) vertices, (F, 4) face indices."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.int64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 4)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)


@dataclass(frozen=True)
class ComponentReport:
    """Face-connected components and how many never touch the k=0 base plane."""

    component_count: int
    component_sizes: list[int]
    floating_count: int


def _exposed(occ: np.ndarray, axis: int, side: int) -> np.ndarray:
    """Occupied cells whose neighbor one step along ``side*axis`` is empty."""
    neighbor = np.zeros_like(occ)
    src = [slice(None)] * 3
    dst = [slice(None)] * 3
    if side > 0:
        src[axis] = slice(1, None)
        dst[axis] = slice(None, -1)
    else:
        src[axis] = slice(None, -1)
        dst[axis] = slice(1, None)
    neighbor[tuple(dst)] = occ[tuple(src)]
    return occ & ~neighbor


def extract_surface(grid: VoxelGrid) -> Mesh:
    """Boundary quads of the occupied region, vertices deduplicated.

    Vertices appear in first-use order over a fixed face scan (axis I-,
    I+, J-, J+, K-, K+; cells in row-major order within each), which
    makes the output bytes deterministic for a given grid.
    """
    occ = grid.cells.astype(bool)
    n = grid.size
    corner_blocks = []
    for axis in range(3):
        for side in (-1, +1):
            cells = np.argwhere(_exposed(occ, axis, side))
            if len(cells) == 0:
                continue
            offs = np.array(_FACE_CORNERS[(axis, side)], dtype=np.int64)
            corner_blocks.append(cells[:, None, :] + offs[None, :, :])
    if not corner_blocks:
        return Mesh(np.empty((0, 3), np.int64), np.empty((0, 4), np.int64))

    corners = np.concatenate(corner_blocks).reshape(-1, 3)
    side = n + 1
    codes = (corners[:, 0] * side + corners[:, 1]) * side + corners[:, 2]
    uniq, first_pos, inverse = np.unique(codes, return_index=True, return_inverse=True)
    order = np.argsort(first_pos, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    vertices = corners[first_pos[order]]
    faces = rank[inverse].reshape(-1, 4)
    return Mesh(vertices, faces)


def write_obj(mesh: Mesh) -> str:
    """OBJ text: one ``v x y z`` line per vertex then one 1-based
    ``f a b c d`` line per quad.  Empty mesh gives empty text."""
    parts = [f"v {x} {y} {z}\n" for x, y, z in mesh.vertices]
    parts += [f"f {a + 1} {b + 1} {c + 1} {d + 1}\n" for a, b, c, d in mesh.faces]
    return "".join(parts)


def connected_components(grid: VoxelGrid, connectivity: int = 6) -> ComponentReport:
    """Label maximal face-connected clusters of occupied voxels.

    A component is floating iff none of its voxels lies in the k=0 base
    plane; such a part would print in mid-air.  Only 6-connectivity
    (shared faces) is supported: corner contact transfers no strength.
    """
    if connectivity != 6:
        raise ValueError("only 6-connectivity (face adjacency) is supported")
    structure = ndimage.generate_binary_structure(3, 1)
    labels, count = ndimage.label(grid.cells, structure=structure)
    if count == 0:
        return ComponentReport(0, [], 0)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    grounded = np.unique(labels[:, :, 0])
    grounded = grounded[grounded > 0]
    return ComponentReport(int(count), [int(s) for s in sizes], int(count - len(grounded)))
