"""Linear-programming solver route: relax voxels to [0, 1], then threshold.

The voxel tensor is flattened to a vector of n^3 continuous variables
(see :func:`shadowcarve.core.flatten_index`).  For every provided target
plane two constraint families are emitted per pixel:

* upper: the sum of the voxel line orthogonal to the pixel is at most
  ``n * pixel`` (a dark pixel annihilates its whole line);
* lower: the same sum is at least ``pixel`` (a lit pixel needs at least
  one voxel's worth of mass on its line).

The objective maximizes the unweighted sum of all variables.  Absent
planes contribute no rows at all.

Two row families per pixel are redundant in practice: an upper row for a
lit pixel (rhs = n) can never bind under the unit box, and a lower row
for a dark pixel (rhs = 0) is vacuous.  ``build_lp`` drops those by
default, which shrinks the system roughly tenfold; pass
``full_matrix=True`` to keep the literal system for fidelity checks.

The continuous optimum is binarized by a global threshold: voxels with
value >= lambda survive.  For feasible instances any threshold in
(epsilon, 1) yields the same grid, because the optimum is integral.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .carve import CarveReport, match_report
from .core import TargetSet, VoxelGrid
from .simplex import SimplexStalled, solve_bounded

__all__ = [
    "LPRow",
    "LPProblem",
    "LPSolution",
    "ThresholdConfig",
    "Infeasible",
    "SizeCapExceeded",
    "DEFAULT_SIZE_CAP",
    "build_lp",
    "relax_rhs",
    "solve_lp",
    "threshold",
    "solve_pipeline",
    "lp_text",
]

DEFAULT_SIZE_CAP = 16

_PLANE_AXES = {"P": 0, "Q": 1, "R": 2}


class Infeasible(RuntimeError):
    """No voxel grid can satisfy the given targets."""


class SizeCapExceeded(ValueError):
    """Requested LP resolution is above the configured cap."""


@dataclass(frozen=True)
class LPRow:
    """One inequality: sum of coeffs*vars (relation) rhs."""

    var_indices: np.ndarray
    coeffs: np.ndarray
    relation: str  # "<=" or ">="
    rhs: float
    label: str

    def __post_init__(self):
        if self.relation not in ("<=", ">="):
            raise ValueError(f"bad relation {self.relation!r}")


@dataclass(frozen=True)
class LPProblem:
    n: int
    num_vars: int
    objective: np.ndarray  # maximized; all ones for the shadow problem
    rows: list[LPRow]
    provided_planes: tuple[str, ...]
    var_lo: float = 0.0
    var_hi: float = 1.0

    def dense_ub(self) -> tuple[np.ndarray, np.ndarray]:
        """All rows as a dense ``A x <= b`` system (>= rows negated)."""
        a = np.zeros((len(self.rows), self.num_vars))
        b = np.zeros(len(self.rows))
        for i, row in enumerate(self.rows):
            sign = 1.0 if row.relation == "<=" else -1.0
            a[i, row.var_indices] = sign * row.coeffs
            b[i] = sign * row.rhs
        return a, b


@dataclass(frozen=True)
class LPSolution:
    status: str  # "optimal" or "infeasible"
    x: np.ndarray | None
    objective_value: float | None
    n: int


@dataclass(frozen=True)
class ThresholdConfig:
    lam: float = 0.5
    epsilon: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lambda must lie strictly between 0 and 1")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


def _line_indices(plane: str, n: int, r: int, c: int) -> np.ndarray:
    """Flat variable indices of the voxel line behind pixel (r, c)."""
    span = np.arange(n)
    if plane == "P":  # pixel (j, k) = (r, c), line runs over i
        return span * n * n + r * n + c
    if plane == "Q":  # pixel (i, k) = (r, c), line runs over j
        return r * n * n + span * n + c
    if plane == "R":  # pixel (i, j) = (r, c), line runs over k
        return r * n * n + c * n + span
    raise ValueError(f"unknown plane {plane!r}")


def build_lp(targets: TargetSet, *, full_matrix: bool = False) -> LPProblem:
    """Emit the constraint system for the provided planes.

    Rows come out grouped by family: all upper rows (P, Q, R order),
    then all lower rows.  With ``full_matrix=False`` (the default) the
    never-binding upper rows of lit pixels and the vacuous lower rows of
    dark pixels are dropped.
    """
    n = targets.n
    if n == 0:
        raise ValueError("resolution must be positive")
    planes = [("P", targets.p)]
    if targets.q is not None:
        planes.append(("Q", targets.q))
    if targets.r is not None:
        planes.append(("R", targets.r))

    ones = np.ones(n)
    upper: list[LPRow] = []
    lower: list[LPRow] = []
    for name, bm in planes:
        for r in range(n):
            for c in range(n):
                pixel = int(bm.bits[r, c])
                idx = _line_indices(name, n, r, c)
                if full_matrix or pixel == 0:
                    upper.append(
                        LPRow(idx, ones, "<=", float(n * pixel), f"{name}_upper_{r}_{c}")
                    )
                if full_matrix or pixel == 1:
                    lower.append(
                        LPRow(idx, ones, ">=", float(pixel), f"{name}_lower_{r}_{c}")
                    )

    return LPProblem(
        n=n,
        num_vars=n**3,
        objective=np.ones(n**3),
        rows=upper + lower,
        provided_planes=tuple(name for name, _ in planes),
    )


def relax_rhs(problem: LPProblem, eps: float) -> LPProblem:
    """Allow per-inequality error eps: rhs + eps for <=, rhs - eps for >=."""
    if eps < 0:
        raise ValueError("relaxation must be nonnegative")
    rows = [
        replace(row, rhs=row.rhs + (eps if row.relation == "<=" else -eps))
        for row in problem.rows
    ]
    return replace(problem, rows=rows)


def constraint_violation(problem: LPProblem, x: np.ndarray) -> float:
    """Largest amount by which x breaks any row or variable bound."""
    worst = max(
        float(np.max(problem.var_lo - x, initial=0.0)),
        float(np.max(x - problem.var_hi, initial=0.0)),
    )
    for row in problem.rows:
        total = float(x[row.var_indices] @ row.coeffs)
        gap = total - row.rhs if row.relation == "<=" else row.rhs - total
        worst = max(worst, gap)
    return worst


def solve_lp(problem: LPProblem, epsilon: float = 1e-6) -> LPSolution:
    """Maximize the objective over the constraint system.

    Returns an optimal solution or infeasible status; a solver stall
    (which the anti-cycling rule should rule out) raises
    :class:`shadowcarve.simplex.SimplexStalled`.
    """
    a, b = problem.dense_ub()
    lo = np.full(problem.num_vars, problem.var_lo)
    hi = np.full(problem.num_vars, problem.var_hi)
    result = solve_bounded(problem.objective, a, b, lo, hi, feas_tol=epsilon)
    if result.status == "infeasible":
        return LPSolution("infeasible", None, None, problem.n)
    violation = constraint_violation(problem, result.x)
    if violation > 10 * epsilon:
        raise RuntimeError(
            f"solver returned an infeasible point (violation {violation:.3g})"
        )
    return LPSolution("optimal", result.x, result.objective, problem.n)


def threshold(solution: LPSolution, cfg: ThresholdConfig) -> VoxelGrid:
    """Binarize: voxel is 1 iff its variable is >= lambda."""
    if solution.status != "optimal":
        raise ValueError("cannot threshold a non-optimal solution")
    n = solution.n
    cells = (solution.x.reshape(n, n, n) >= cfg.lam).astype(np.uint8)
    return VoxelGrid(cells)


def solve_pipeline(
    targets: TargetSet,
    cfg: ThresholdConfig | None = None,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
    full_matrix: bool = False,
) -> CarveReport:
    """build_lp -> solve_lp -> threshold -> shadow verification.

    Raises :class:`Infeasible` when no grid can satisfy the targets and
    :class:`SizeCapExceeded` above the resolution cap (the direct
    carving solver has no such limit).
    """
    cfg = cfg or ThresholdConfig()
    if targets.n > size_cap:
        raise SizeCapExceeded(
            f"LP resolution {targets.n} exceeds the cap of {size_cap}; "
            f"raise the cap explicitly or use the carving solver, which "
            f"handles large grids directly"
        )
    problem = build_lp(targets, full_matrix=full_matrix)
    solution = solve_lp(problem, cfg.epsilon)
    if solution.status != "optimal":
        raise Infeasible("the target shadows admit no voxel grid")
    return match_report(threshold(solution, cfg), targets)


def lp_text(problem: LPProblem) -> str:
    """Human-readable LP-format dump for cross-checking with other solvers."""
    def term(i):
        return f"x{i}"

    lines = ["Maximize"]
    obj = " + ".join(term(i) for i in range(problem.num_vars))
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for row in problem.rows:
        body = " + ".join(
            term(i) if co == 1.0 else f"{co:g} {term(i)}"
            for i, co in zip(row.var_indices, row.coeffs)
        )
        lines.append(f" {row.label}: {body} {row.relation} {row.rhs:g}")
    lines.append("Bounds")
    for i in range(problem.num_vars):
        lines.append(f" {problem.var_lo:g} <= {term(i)} <= {problem.var_hi:g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
