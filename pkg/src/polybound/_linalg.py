"""Small exact linear algebra over the rationals (Gaussian elimination)."""

from __future__ import annotations

from typing import List, Optional, Sequence

from gmpy2 import mpq

Matrix = List[List[mpq]]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[mpq(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, List[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = to_matrix(rows)
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def det(rows: Sequence[Sequence]) -> mpq:
    a = to_matrix(rows)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    result = mpq(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return mpq(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        result *= piv
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / piv
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[c])]
    return sign * result


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[List[mpq]]:
    """Unique solution of a square system, or None when singular."""
    n = len(rows)
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if piv != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def nullspace(rows: Sequence[Sequence], ncols: int) -> List[List[mpq]]:
    """Basis of the right nullspace."""
    if not rows:
        return [[mpq(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for r, pc in enumerate(piv):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def dot(u: Sequence, v: Sequence) -> mpq:
    total = mpq(0)
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total
