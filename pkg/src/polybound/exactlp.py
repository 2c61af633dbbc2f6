"""Exact rational linear programming: two-phase primal simplex, Bland's rule.

Problems are stated as ``min c.x`` subject to rows ``a.x (<=|=|>=) b`` with
each variable either nonnegative or free.  Every quantity is an ``mpq``;
there are no tolerances anywhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from gmpy2 import mpq

from . import _linalg

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "=", ">="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LPProblem:
    """``min c.x`` subject to ``A x (senses) b``; ``free[j]`` marks x_j unrestricted."""

    c: List[mpq]
    A: List[List[mpq]]
    senses: List[str]
    b: List[mpq]
    free: List[bool] = field(default_factory=list)
    names: Optional[List[str]] = None

    def __post_init__(self):
        nvar = len(self.c)
        self.c = [mpq(v) for v in self.c]
        self.A = [[mpq(v) for v in row] for row in self.A]
        self.b = [mpq(v) for v in self.b]
        if not self.free:
            self.free = [False] * nvar
        if len(self.free) != nvar:
            raise ValueError("free flags do not match variable count")
        if len(self.A) != len(self.b) or len(self.senses) != len(self.b):
            raise ValueError("row count mismatch between A, senses and b")
        for row in self.A:
            if len(row) != nvar:
                raise ValueError("constraint row has wrong length")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise ValueError(f"unknown row sense {s!r}")

    @property
    def num_vars(self) -> int:
        return len(self.c)

    @property
    def num_rows(self) -> int:
        return len(self.b)


@dataclass
class LPSolution:
    status: str
    x: List[mpq] = field(default_factory=list)
    objective: Optional[mpq] = None
    duals: List[mpq] = field(default_factory=list)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Dense tableau ``[A | b]`` with a basis, pivoted in place."""

    def __init__(self, rows: List[List[mpq]], rhs: List[mpq], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, col: int, obj: List[mpq], obj_rhs: List[mpq]) -> None:
        prow = self.rows[r]
        inv = 1 / prow[col]
        if inv != 1:
            prow = [v * inv if v else v for v in prow]
            self.rows[r] = prow
            self.rhs[r] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        brhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[col]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[i] -= f * brhs
        f = obj[col]
        if f:
            for j in nz:
                obj[j] -= f * prow[j]
            obj_rhs[0] -= f * brhs
        self.basis[r] = col
        self.pivots += 1

    def run(self, obj: List[mpq], obj_rhs: List[mpq], allowed: int) -> str:
        """Minimize; ``obj`` holds reduced costs, ``obj_rhs[0]`` = -value.

        Columns >= ``allowed`` never enter.  Bland: lowest-index entering
        column with negative reduced cost, ties in the ratio test broken by
        lowest basic variable index.
        """
        while True:
            col = next((j for j in range(allowed) if obj[j] < 0), None)
            if col is None:
                return OPTIMAL
            best = None
            best_ratio = None
            for i, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[best])
                    ):
                        best, best_ratio = i, ratio
            if best is None:
                return UNBOUNDED
            self.pivot(best, col, obj, obj_rhs)


def solve(p: LPProblem) -> LPSolution:
    """Solve exactly.  Infeasible/unbounded are reported as statuses."""
    nvar = p.num_vars
    # column layout: one column per nonneg var, two per free var, then slacks
    colmap: List[tuple] = []
    for j in range(nvar):
        colmap.append((j, 1))
        if p.free[j]:
            colmap.append((j, -1))
    nstruct = len(colmap)
    nslack = sum(1 for s in p.senses if s != EQ)
    ncols = nstruct + nslack
    rows: List[List[mpq]] = []
    rhs: List[mpq] = []
    row_sign: List[int] = []
    k = nstruct
    for i in range(p.num_rows):
        row = [mpq(0)] * ncols
        for c, (j, sgn) in enumerate(colmap):
            v = p.A[i][j]
            if v:
                row[c] = v if sgn > 0 else -v
        if p.senses[i] == LE:
            row[k] = mpq(1)
            k += 1
        elif p.senses[i] == GE:
            row[k] = mpq(-1)
            k += 1
        b = p.b[i]
        sign = 1
        if b < 0:
            row = [-v for v in row]
            b = -b
            sign = -1
        rows.append(row)
        rhs.append(b)
        row_sign.append(sign)

    m = len(rows)
    orig_rows = [row[:] for row in rows]
    # phase 1: artificial per row (columns ncols .. ncols+m-1)
    for i in range(m):
        rows[i].extend(mpq(int(i == r)) for r in range(m))
    basis = [ncols + i for i in range(m)]
    tab = _Tableau(rows, rhs, basis)
    total = ncols + m
    obj1 = [mpq(0)] * total
    obj1_rhs = [mpq(0)]
    for i in range(m):
        for j in range(ncols):
            if rows[i][j]:
                obj1[j] -= rows[i][j]
        obj1_rhs[0] -= rhs[i]
    status = tab.run(obj1, obj1_rhs, ncols)
    if status != OPTIMAL:  # phase 1 is bounded below by 0
        raise AssertionError("phase 1 reported unbounded")
    if obj1_rhs[0] != 0:
        return LPSolution(INFEASIBLE, pivots=tab.pivots)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if tab.basis[i] >= ncols:
            col = next((j for j in range(ncols) if tab.rows[i][j]), None)
            if col is None:
                continue
            tab.pivot(i, col, [mpq(0)] * total, [mpq(0)])
        keep.append(i)
    tab.rows = [tab.rows[i][:ncols] for i in keep]
    tab.rhs = [tab.rhs[i] for i in keep]
    tab.basis = [tab.basis[i] for i in keep]
    kept_rows = keep

    # phase 2
    cost = [mpq(0)] * ncols
    for c, (j, sgn) in enumerate(colmap):
        cost[c] = p.c[j] if sgn > 0 else -p.c[j]
    obj2 = list(cost)
    obj2_rhs = [mpq(0)]
    for i, bcol in enumerate(tab.basis):
        f = obj2[bcol]
        if f:
            row = tab.rows[i]
            for j in range(ncols):
                if row[j]:
                    obj2[j] -= f * row[j]
            obj2_rhs[0] -= f * tab.rhs[i]
    status = tab.run(obj2, obj2_rhs, ncols)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, pivots=tab.pivots)

    values = [mpq(0)] * ncols
    for i, bcol in enumerate(tab.basis):
        values[bcol] = tab.rhs[i]
    x = [mpq(0)] * nvar
    for c, (j, sgn) in enumerate(colmap):
        if values[c]:
            x[j] += values[c] if sgn > 0 else -values[c]
    objective = sum((p.c[j] * x[j] for j in range(nvar)), mpq(0))

    duals = _duals(p, orig_rows, cost, tab.basis, kept_rows, row_sign, ncols)
    return LPSolution(OPTIMAL, x, objective, duals, tab.pivots)


def _duals(p, rows, cost, basis, kept_rows, row_sign, ncols) -> List[mpq]:
    # y^T B = c_B on the (sign-normalized) kept rows, then undo row negation
    bmat = [[rows[i][bcol] for i in kept_rows] for bcol in basis]
    y = _linalg.solve(bmat, [cost[bcol] for bcol in basis])
    duals = [mpq(0)] * p.num_rows
    if y is None:
        return duals
    for yi, i in zip(y, kept_rows):
        duals[i] = yi * row_sign[i]
    return duals


def minimize(c: Sequence, A: Sequence[Sequence], senses: Sequence[str], b: Sequence, free=None) -> LPSolution:
    return solve(LPProblem(list(c), [list(r) for r in A], list(senses), list(b), list(free or [])))
