"""Dense two-phase simplex for box-constrained linear programs.

Solves

    max  c.x   s.t.   A x <= b,   lo <= x <= hi

with bounds handled natively: a nonbasic variable rests at either of its
bounds, enters in whichever direction improves the objective, and the
ratio test allows a "bound flip" (the entering variable runs all the way
to its opposite bound without any basis change).  No big-M terms are
used; rows that start infeasible get a phase-1 artificial variable.

Pricing is Dantzig's rule by default.  After a run of degenerate pivots
the solver switches to Bland's rule (least-index entering and leaving
variable), which cannot cycle, and switches back once a pivot makes real
progress.  The iteration cap is therefore a hard defect signal, not a
tuning knob, and hitting it raises :class:`SimplexStalled`.

Everything is plain dense numpy; the intended scale is a few thousand
variables and at most a few thousand rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SimplexResult", "SimplexStalled", "solve_bounded"]

_AT_LO, _AT_HI, _BASIC = 0, 1, 2
_BLAND_AFTER = 25  # consecutive degenerate pivots before Bland's rule engages
_REFRESH_EVERY = 64  # pivots between full recomputations of the pricing row


class SimplexStalled(RuntimeError):
    """The pivot-count cap was reached before an optimum was proven."""


@dataclass(frozen=True)
class SimplexResult:
    status: str  # "optimal" or "infeasible"
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve_bounded(
    c,
    a_ub,
    b_ub,
    lo,
    hi,
    *,
    feas_tol: float = 1e-7,
    pivot_tol: float = 1e-9,
    max_iter: int | None = None,
) -> SimplexResult:
    """Maximize ``c.x`` subject to ``a_ub x <= b_ub`` and ``lo <= x <= hi``.

    ``hi`` entries may be ``np.inf``; ``lo`` must be finite.  Greater-than
    rows must be negated by the caller before the call.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if a.ndim != 2:
        a = a.reshape(len(b), -1)
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,) or lo.shape != (n,) or hi.shape != (n,):
        raise ValueError("inconsistent LP dimensions")
    if not np.all(np.isfinite(lo)):
        raise ValueError("lower bounds must be finite")
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")

    if m == 0:
        # Only box constraints: each variable sits at whichever bound the
        # objective prefers.
        x = np.where(c > 0, hi, lo)
        if not np.all(np.isfinite(x)):
            raise RuntimeError("unbounded LP: positive cost on an unbounded variable")
        return SimplexResult("optimal", x, float(c @ x), 0)

    solver = _Tableau(c, a, b, lo, hi, feas_tol, pivot_tol, max_iter)
    return solver.solve()


class _Tableau:
    def __init__(self, c, a, b, lo, hi, feas_tol, pivot_tol, max_iter):
        m, n = a.shape
        self.m, self.nstruct = m, n
        self.nreal = n + m  # structural + slack columns
        self.feas_tol = feas_tol
        self.pivot_tol = pivot_tol
        self.c = c

        # Start every structural variable at its lower bound; slack values
        # are then the row residuals, and rows with a negative residual
        # need an artificial to provide a feasible starting basis.
        resid = b - a @ lo
        art_rows = np.flatnonzero(resid < 0)
        n_art = len(art_rows)
        ncols = self.nreal + n_art

        self.tab = np.zeros((m, ncols))
        self.tab[:, :n] = a
        self.tab[np.arange(m), n + np.arange(m)] = 1.0
        self.rhs = b.astype(float).copy()
        self.lo = np.concatenate([lo, np.zeros(m + n_art)])
        self.hi = np.concatenate([hi, np.full(m, np.inf), np.full(n_art, np.inf)])

        self.basis = n + np.arange(m)
        self.vstat = np.full(ncols, _AT_LO, dtype=np.int8)
        self.vstat[self.basis] = _BASIC
        self.xb = resid.astype(float).copy()

        for t, r in enumerate(art_rows):
            col = self.nreal + t
            # Negate the row so the artificial enters the basis with
            # coefficient +1 and value -resid > 0; the slack drops to 0.
            self.tab[r] *= -1.0
            self.rhs[r] *= -1.0
            self.tab[r, col] = 1.0
            self.vstat[self.basis[r]] = _AT_LO
            self.basis[r] = col
            self.vstat[col] = _BASIC
            self.xb[r] = -resid[r]

        self.n_art = n_art
        self.iterations = 0
        self.max_iter = max_iter if max_iter is not None else 1000 + 200 * (m + ncols)

    # -- bookkeeping ----------------------------------------------------

    def _nonbasic_values(self):
        vals = np.zeros(len(self.vstat))
        at_lo = self.vstat == _AT_LO
        at_hi = self.vstat == _AT_HI
        vals[at_lo] = self.lo[at_lo]
        vals[at_hi] = self.hi[at_hi]
        return vals

    def _refresh_basic_values(self):
        vals = self._nonbasic_values()
        nz = np.flatnonzero(vals)
        self.xb = self.rhs - self.tab[:, nz] @ vals[nz] if nz.size else self.rhs.copy()

    def _reduced_costs(self, cc):
        return cc - cc[self.basis] @ self.tab

    # -- pivoting -------------------------------------------------------

    def _apply_pivot(self, r, e, enter_val, leave_status):
        tab, rhs = self.tab, self.rhs
        self.vstat[self.basis[r]] = leave_status
        piv = tab[r, e]
        tab[r] /= piv
        rhs[r] /= piv
        colv = tab[:, e].copy()
        colv[r] = 0.0
        nz = np.flatnonzero(colv != 0.0)
        if nz.size:
            tab[nz] -= np.outer(colv[nz], tab[r])
            rhs[nz] -= colv[nz] * rhs[r]
        tab[:, e] = 0.0
        tab[r, e] = 1.0
        self.basis[r] = e
        self.vstat[e] = _BASIC
        self.xb[r] = enter_val

    def _optimize(self, cc, phase):
        """Run pivots until ``cc.x`` is maximal.  Returns nothing; raises
        SimplexStalled when the cap is hit."""
        d = self._reduced_costs(cc)
        tol = self.pivot_tol
        bland = False
        degen_streak = 0
        pivots_since_refresh = 0

        while True:
            if self.iterations >= self.max_iter:
                raise SimplexStalled(
                    f"simplex did not converge within {self.max_iter} iterations "
                    f"(phase {phase})"
                )
            self.iterations += 1

            can_rise = (self.vstat == _AT_LO) & (d > tol)
            can_fall = (self.vstat == _AT_HI) & (d < -tol)
            eligible = can_rise | can_fall
            if not eligible.any():
                return
            if bland:
                e = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                e = int(np.argmax(score))
            t = 1.0 if self.vstat[e] == _AT_LO else -1.0

            w = t * self.tab[:, e]
            deltas = np.full(self.m, np.inf)
            blo = self.lo[self.basis]
            bhi = self.hi[self.basis]
            pos = w > tol
            if pos.any():
                deltas[pos] = (self.xb[pos] - blo[pos]) / w[pos]
            neg = w < -tol
            if neg.any():
                deltas[neg] = (self.xb[neg] - bhi[neg]) / w[neg]
            np.maximum(deltas, 0.0, out=deltas)  # clamp tiny negative drift

            flip_limit = self.hi[e] - self.lo[e]
            step_basic = deltas.min() if self.m else np.inf
            if flip_limit <= step_basic:
                if not np.isfinite(flip_limit):
                    raise RuntimeError("unbounded LP direction encountered")
                # Bound flip: no basis change.
                self.vstat[e] = _AT_HI if t > 0 else _AT_LO
                self.xb -= flip_limit * w
                if flip_limit > tol:
                    degen_streak = 0
                    bland = False
                continue

            cand = np.flatnonzero(deltas <= step_basic + 1e-12 * (1.0 + step_basic))
            if bland:
                r = int(cand[np.argmin(self.basis[cand])])
            else:
                r = int(cand[np.argmax(np.abs(w[cand]))])
            step = deltas[r]

            leave_status = _AT_LO if w[r] > 0 else _AT_HI
            self.xb -= step * w
            enter_val = (self.lo[e] if t > 0 else self.hi[e]) + t * step
            self._apply_pivot(r, e, enter_val, leave_status)

            if step <= tol:
                degen_streak += 1
                if degen_streak > _BLAND_AFTER:
                    bland = True
            else:
                degen_streak = 0
                bland = False

            pivots_since_refresh += 1
            if pivots_since_refresh >= _REFRESH_EVERY:
                d = self._reduced_costs(cc)
                self._refresh_basic_values()
                pivots_since_refresh = 0
            else:
                d = d - d[e] * self.tab[r]
                d[self.basis] = 0.0

    def _drive_out_artificials(self):
        """Pivot zero-valued basic artificials out; drop redundant rows."""
        keep = np.ones(self.m, dtype=bool)
        for r in range(self.m):
            if self.basis[r] < self.nreal:
                continue
            row = self.tab[r, : self.nreal]
            nonbasic = self.vstat[: self.nreal] != _BASIC
            cand = np.flatnonzero(nonbasic & (np.abs(row) > self.pivot_tol))
            if cand.size:
                # Degenerate swap: the artificial sits at 0, so the entering
                # variable stays at its bound and no value moves.
                e = int(cand[0])
                enter_val = self.lo[e] if self.vstat[e] == _AT_LO else self.hi[e]
                self._apply_pivot(r, e, enter_val, _AT_LO)
            else:
                keep[r] = False  # row is redundant over the real columns
        if not keep.all():
            self.tab = self.tab[keep]
            self.rhs = self.rhs[keep]
            self.basis = self.basis[keep]
            self.xb = self.xb[keep]
            self.m = len(self.rhs)

    def solve(self) -> SimplexResult:
        ncols = self.tab.shape[1]
        if self.n_art:
            cc1 = np.zeros(ncols)
            cc1[self.nreal :] = -1.0
            self._optimize(cc1, phase=1)
            self._refresh_basic_values()
            art_basic = self.basis >= self.nreal
            infeasibility = float(self.xb[art_basic].sum()) if art_basic.any() else 0.0
            if infeasibility > self.feas_tol:
                return SimplexResult("infeasible", None, None, self.iterations)
            self._drive_out_artificials()
            # All artificials are now nonbasic; cut their columns off.
            self.tab = self.tab[:, : self.nreal]
            self.vstat = self.vstat[: self.nreal]
            self.lo = self.lo[: self.nreal]
            self.hi = self.hi[: self.nreal]

        cc2 = np.zeros(self.nreal)
        cc2[: self.nstruct] = self.c
        self._optimize(cc2, phase=2)
        self._refresh_basic_values()

        x_full = self._nonbasic_values()
        x_full[self.basis] = self.xb
        x = x_full[: self.nstruct]
        return SimplexResult("optimal", x, float(self.c @ x), self.iterations)
