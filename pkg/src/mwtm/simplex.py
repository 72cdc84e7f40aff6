"""Dense two-phase primal simplex on a full tableau.

Solves ``maximize c @ x`` subject to rows ``A[k] @ x (<=|=|>=) b[k]`` and
``x >= 0``.  Entering columns follow Dantzig's rule until a streak of
degenerate pivots occurs; from then on Bland's smallest-index rule is used
until the next non-degenerate pivot, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import MWTMError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
BLAND_AFTER = 25


class SimplexError(MWTMError):
    """Pivot limit hit or numerical breakdown."""


@dataclass(frozen=True)
class SimplexResult:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray
    objective: float
    pivots: int


class _Tableau:
    """Constraint rows ``T`` with right-hand sides ``rhs`` in canonical form for ``basis``."""

    def __init__(self, T: np.ndarray, rhs: np.ndarray, basis: list[int],
                 pivot_tol: float, feas_tol: float, bland_after: int, max_pivots: int):
        self.T = T
        self.rhs = rhs
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.feas_tol = feas_tol
        self.bland_after = bland_after
        self.max_pivots = max_pivots
        self.pivots = 0
        self.reduced = np.zeros(T.shape[1])

    def pivot(self, p: int, q: int) -> None:
        T, rhs = self.T, self.rhs
        piv = T[p, q]
        T[p] /= piv
        rhs[p] /= piv
        prow = T[p]
        col = T[:, q].copy()
        col[p] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= col[nz, None] * prow
            rhs[nz] -= col[nz] * rhs[p]
        T[nz, q] = 0.0
        r = self.reduced[q]
        if r != 0.0:
            self.reduced -= r * prow
            self.reduced[q] = 0.0
        self.basis[p] = q
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise SimplexError(f"pivot limit {self.max_pivots} exceeded")

    def optimize(self, cost: np.ndarray) -> str:
        """Maximize ``cost @ x`` starting from the current basis."""
        T, rhs = self.T, self.rhs
        self.reduced = cost[self.basis] @ T - cost
        streak = 0
        while True:
            reduced = self.reduced
            if streak >= self.bland_after:
                candidates = np.flatnonzero(reduced < -self.pivot_tol)
                if candidates.size == 0:
                    return "optimal"
                q = int(candidates[0])
            else:
                q = int(np.argmin(reduced))
                if reduced[q] >= -self.pivot_tol:
                    return "optimal"
            column = T[:, q]
            rows = np.flatnonzero(column > self.pivot_tol)
            if rows.size == 0:
                return "unbounded"
            ratios = rhs[rows] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + self.feas_tol * 1e-3]
            # Bland's leaving rule: smallest basic variable index among ties.
            p = int(tied[0]) if tied.size == 1 else int(min(tied, key=lambda r: self.basis[r]))
            streak = streak + 1 if best <= self.feas_tol else 0
            self.pivot(p, q)
            np.maximum(rhs, 0.0, out=rhs, where=rhs > -self.feas_tol)


def _crash(T: np.ndarray, b: np.ndarray, start: Sequence[int], slack_rows: np.ndarray,
           nvars: int, feas_tol: float):
    """Canonical tableau for a caller-supplied basis, or ``None`` if unusable."""
    nrows = T.shape[0]
    if len(start) != nrows:
        return None
    slack_of = {int(r): nvars + k for k, r in enumerate(slack_rows)}
    basis = []
    for r, col in enumerate(start):
        if col < 0:
            if r not in slack_of:
                return None
            col = slack_of[r]
        basis.append(int(col))
    if len(set(basis)) != nrows:
        return None
    B = T[:, basis]
    try:
        both = np.linalg.solve(B, np.column_stack([T, b]))
    except np.linalg.LinAlgError:
        return None
    T2, rhs = both[:, :-1], both[:, -1].copy()
    if rhs.min() < -feas_tol:
        return None
    np.maximum(rhs, 0.0, out=rhs)
    # clean round-off so basic columns are exact unit vectors
    T2[np.abs(T2) < 1e-12] = 0.0
    T2[:, basis] = np.eye(nrows)
    return T2, rhs, basis


def solve(c: Sequence[float], A: np.ndarray, senses: Sequence[str], b: Sequence[float], *,
          pivot_tol: float = PIVOT_TOL, feas_tol: float = FEAS_TOL,
          bland_after: int = BLAND_AFTER, max_pivots: int | None = None,
          start: Sequence[int] | None = None) -> SimplexResult:
    """Solve a small dense LP with non-negative variables.

    ``senses`` holds one of ``"<="``, ``"="``, ``">="`` per row of ``A``.
    ``start`` optionally names a starting basic column per row, a structural
    index or ``-1`` for the row's slack.  If that basis is non-singular and
    primal feasible, phase 1 is skipped; otherwise it is ignored.
    Raises :class:`SimplexError` if the pivot limit is exceeded.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(senses), c.size)
    b = np.asarray(b, dtype=float).copy()
    nrows, nvars = A.shape
    if nrows == 0:
        if np.any(c > pivot_tol):
            return SimplexResult("unbounded", np.zeros(nvars), float("inf"), 0)
        return SimplexResult("optimal", np.zeros(nvars), 0.0, 0)

    A = A.copy()
    sign = np.array([{"<=": 1.0, "=": 0.0, ">=": -1.0}[s] for s in senses])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    sign[flip] *= -1

    n_slack = int(np.count_nonzero(sign))
    slack_rows = np.nonzero(sign)[0]
    needs_art = [r for r in range(nrows) if sign[r] <= 0]
    n_art = len(needs_art)
    width = nvars + n_slack + n_art

    T = np.zeros((nrows, width))
    T[:, :nvars] = A
    basis = [-1] * nrows
    for k, r in enumerate(slack_rows):
        T[r, nvars + k] = sign[r]
        if sign[r] > 0:
            basis[r] = nvars + k
    for k, r in enumerate(needs_art):
        T[r, nvars + n_slack + k] = 1.0
        basis[r] = nvars + n_slack + k

    if max_pivots is None:
        max_pivots = 50 * (nrows + width) + 1000
    art_start = nvars + n_slack
    crashed = _crash(T[:, :art_start], b, start, slack_rows, nvars, feas_tol) if start is not None else None
    if crashed is not None:
        T, b, basis = crashed
        n_art = 0
        width = art_start
    tab = _Tableau(T, b, basis, pivot_tol, feas_tol, bland_after, max_pivots)

    if n_art:
        phase1 = np.zeros(width)
        phase1[art_start:] = -1.0
        tab.optimize(phase1)
        infeasibility = float(sum(tab.rhs[r] for r in range(nrows) if tab.basis[r] >= art_start))
        if infeasibility > feas_tol:
            return SimplexResult("infeasible", np.zeros(nvars), float("nan"), tab.pivots)
        # Drive zero-level artificials out of the basis; rows with no usable
        # column are redundant and dropped.
        keep = []
        for r in range(nrows):
            if tab.basis[r] >= art_start:
                row = np.abs(tab.T[r, :art_start])
                cand = np.nonzero(row > pivot_tol)[0]
                if cand.size:
                    tab.pivot(r, int(cand[np.argmax(row[cand])]))
                    keep.append(r)
            else:
                keep.append(r)
        tab.T = tab.T[keep][:, :art_start].copy()
        tab.rhs = tab.rhs[keep].copy()
        tab.basis = [tab.basis[r] for r in keep]
        width = art_start

    cost = np.zeros(width)
    cost[:nvars] = c
    status = tab.optimize(cost)
    if status == "unbounded":
        return SimplexResult("unbounded", np.zeros(nvars), float("inf"), tab.pivots)

    full = np.zeros(width)
    for r, var in enumerate(tab.basis):
        full[var] = tab.rhs[r]
    x = full[:nvars]
    x[np.abs(x) < feas_tol * 1e-2] = 0.0
    return SimplexResult("optimal", x, float(c @ x), tab.pivots)
