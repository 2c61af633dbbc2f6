"""Exact polytope geometry from an H-representation.

Vertices come from exhaustive d-subset enumeration of the constraint rows;
tangent cones at each vertex are read off the tight rows and split into
simplicial cones with a placing triangulation of their extreme rays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import List, Sequence, Tuple

import numpy as np
from gmpy2 import mpq, mpz

from . import _kernels, _linalg, exactlp
from .ratpoly import Polynomial, as_rational

Point = Tuple[mpq, ...]
Ray = Tuple[int, ...]


class PolytopeError(ValueError):
    """Input does not describe a bounded, full-dimensional polytope."""


@dataclass(frozen=True)
class Vertex:
    point: Point
    tight: Tuple[int, ...]


@dataclass(frozen=True)
class SimplicialCone:
    apex: Vertex
    rays: Tuple[Ray, ...]
    parallelepiped_volume: mpq


def _primitive(vec: Sequence) -> Tuple[int, ...]:
    """Scale a rational vector to coprime integers (direction preserved)."""
    vec = [mpq(v) for v in vec]
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, int(v.denominator))
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)


class HRep:
    """``P = {x : A x <= b}``; ``g_i(x) = b_i - <A_i, x>`` are its facet polynomials.

    Validation (full-dimensional, bounded) happens on construction unless
    ``validate=False``.  Exact duplicate rows (up to positive scaling) are
    dropped, keeping the first occurrence.
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence, validate: bool = True):
        rows = [[as_rational(v) for v in row] for row in A]
        rhs = [as_rational(v) for v in b]
        if len(rows) != len(rhs):
            raise PolytopeError("A and b have different row counts")
        if not rows:
            raise PolytopeError("no constraints")
        d = len(rows[0])
        if d == 0:
            raise PolytopeError("dimension must be positive")
        seen = set()
        self.A: List[List[mpq]] = []
        self.b: List[mpq] = []
        for row, bi in zip(rows, rhs):
            if len(row) != d:
                raise PolytopeError("ragged constraint matrix")
            if not any(row):
                if bi < 0:
                    raise PolytopeError("constraint 0 <= negative is infeasible")
                continue
            key = _primitive(row + [bi])
            if key in seen:
                continue
            seen.add(key)
            self.A.append(row)
            self.b.append(bi)
        self.d = d
        if validate:
            self._validate()

    @property
    def n(self) -> int:
        return len(self.b)

    def __repr__(self) -> str:
        return f"HRep(n={self.n}, d={self.d})"

    def _validate(self) -> None:
        # maximize eps subject to A x + eps <= b, eps <= 1
        d = self.d
        c = [mpq(0)] * d + [mpq(-1)]
        A = [row + [mpq(1)] for row in self.A] + [[mpq(0)] * d + [mpq(1)]]
        b = self.b + [mpq(1)]
        sol = exactlp.minimize(c, A, [exactlp.LE] * len(b), b, free=[True] * d + [True])
        if sol.status != exactlp.OPTIMAL or sol.objective >= 0:
            raise PolytopeError("polytope is empty or not full-dimensional")
        self.bounding_box  # raises on unbounded input

    def contains(self, x: Sequence) -> bool:
        x = [as_rational(v) for v in x]
        return all(_linalg.dot(row, x) <= bi for row, bi in zip(self.A, self.b))

    def facet_polynomials(self) -> List[Polynomial]:
        return [Polynomial.affine([-a for a in row], bi) for row, bi in zip(self.A, self.b)]

    @cached_property
    def bounding_box(self) -> Tuple[List[mpq], List[mpq]]:
        """Exact coordinate ranges from 2d linear programs."""
        lo, hi = [], []
        for i in range(self.d):
            for sign, store in ((1, lo), (-1, hi)):
                c = [mpq(0)] * self.d
                c[i] = mpq(sign)
                sol = exactlp.minimize(c, self.A, [exactlp.LE] * self.n, self.b, free=[True] * self.d)
                if sol.status == exactlp.UNBOUNDED:
                    raise PolytopeError(f"polytope is unbounded along coordinate {i + 1}")
                if sol.status != exactlp.OPTIMAL:
                    raise PolytopeError("polytope is empty")
                store.append(sign * sol.objective)
        return lo, hi

    @cached_property
    def vertices(self) -> List[Vertex]:
        return enumerate_vertices(self)

    @cached_property
    def cones(self) -> List[SimplicialCone]:
        return tangent_cones(self)

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "HRep":
        d = len(lower)
        A, b = [], []
        for i in range(d):
            e = [0] * d
            e[i] = 1
            A.append(list(e))
            b.append(upper[i])
            e[i] = -1
            A.append(list(e))
            b.append(-as_rational(lower[i]))
        return cls(A, b)

    @classmethod
    def unit_simplex(cls, d: int) -> "HRep":
        A = []
        for i in range(d):
            e = [0] * d
            e[i] = -1
            A.append(e)
        A.append([1] * d)
        return cls(A, [0] * d + [1])

    def translate(self, v: Sequence) -> "HRep":
        v = [as_rational(t) for t in v]
        return HRep(self.A, [bi + _linalg.dot(row, v) for row, bi in zip(self.A, self.b)])


def enumerate_vertices(P: HRep) -> List[Vertex]:
    """All vertices with their tight rows, lexicographic by point."""
    d = P.d
    found = {}
    for subset in combinations(range(P.n), d):
        x = _linalg.solve([P.A[i] for i in subset], [P.b[i] for i in subset])
        if x is None:
            continue
        key = tuple(x)
        if key in found:
            continue
        slack = [bi - _linalg.dot(row, x) for row, bi in zip(P.A, P.b)]
        if any(s < 0 for s in slack):
            continue
        found[key] = tuple(i for i, s in enumerate(slack) if s == 0)
    if not found:
        raise PolytopeError("no vertices found")
    return [Vertex(pt, found[pt]) for pt in sorted(found)]


def _cone_rays(P: HRep, v: Vertex) -> List[Ray]:
    """Extreme rays of ``{u : A_T u <= 0}`` for the tight rows T."""
    tight = [P.A[i] for i in v.tight]
    d = P.d
    if len(tight) == d:
        rays = []
        for j in range(d):
            rhs = [mpq(-int(i == j)) for i in range(d)]
            u = _linalg.solve(tight, rhs)
            rays.append(_primitive(u))
        return sorted(rays)
    rays = set()
    for sub in combinations(range(len(tight)), d - 1):
        basis = _linalg.nullspace([tight[i] for i in sub], d)
        if len(basis) != 1:
            continue
        u = basis[0]
        vals = [_linalg.dot(row, u) for row in tight]
        if all(t <= 0 for t in vals):
            rays.add(_primitive(u))
        elif all(t >= 0 for t in vals):
            rays.add(_primitive([-t for t in u]))
    return sorted(rays)


def _facet_normal(rays: Sequence[Ray], d: int) -> List[mpq]:
    basis = _linalg.nullspace([list(r) for r in rays], d)
    if len(basis) != 1:
        raise AssertionError("degenerate facet in cone triangulation")
    return basis[0]


def triangulate_cone(rays: Sequence[Ray], d: int) -> List[Tuple[Ray, ...]]:
    """Placing triangulation of a pointed full-dimensional cone.

    Rays are placed in the given order; the start simplex is the first
    linearly independent d-subset in combination order.  No new rays are
    introduced.
    """
    rays = list(rays)
    if len(rays) < d:
        raise AssertionError("cone has fewer rays than its dimension")
    if len(rays) == d:
        return [tuple(rays)]
    start = next(s for s in combinations(range(len(rays)), d) if _linalg.det([rays[i] for i in s]) != 0)
    simplices: List[frozenset] = [frozenset(start)]
    for r in range(len(rays)):
        if r in start:
            continue
        counts = {}
        for s in simplices:
            for w in s:
                f = s - {w}
                counts[f] = counts.get(f, 0) + 1
        new = []
        for s in simplices:
            for w in s:
                f = s - {w}
                if counts[f] != 1:
                    continue
                h = _facet_normal([rays[i] for i in f], d)
                side_w = _linalg.dot(h, rays[w])
                side_r = _linalg.dot(h, rays[r])
                if side_r and (side_r > 0) != (side_w > 0):
                    new.append(f | {r})
        simplices.extend(new)
    return [tuple(rays[i] for i in sorted(s)) for s in simplices]


def tangent_cones(P: HRep) -> List[SimplicialCone]:
    """Simplicial cones of a triangulation of every vertex's feasible cone."""
    out = []
    for v in P.vertices:
        rays = _cone_rays(P, v)
        for simplex in triangulate_cone(rays, P.d):
            vol = abs(_linalg.det([list(r) for r in simplex]))
            out.append(SimplicialCone(v, simplex, vol))
    return out


def coordinate_width(P: HRep) -> Tuple[mpq, mpq]:
    """``(M, M_tilde)``: the largest coordinate width and the largest
    absolute coordinate over P."""
    lo, hi = P.bounding_box
    width = max(h - l for l, h in zip(lo, hi))
    reach = max(max(abs(l), abs(h)) for l, h in zip(lo, hi))
    return width, reach


def _ceil(q: mpq) -> int:
    return -((-q.numerator) // q.denominator)


def _floor(q: mpq) -> int:
    return q.numerator // q.denominator


def scaled_lattice(P: HRep, m: int, impl: str | None = None) -> np.ndarray:
    """Integer numerators ``p`` of the points ``p/m`` in P, as an int64 array
    (one row per point, lexicographic).  Boundary points are included."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    lo_q, hi_q = P.bounding_box
    lo = [_ceil(v * m) for v in lo_q]
    hi = [_floor(v * m) for v in hi_q]
    rows, rhs = [], []
    for row, bi in zip(P.A, P.b):
        den = mpz(1)
        for v in list(row) + [bi]:
            den = den * v.denominator // gcd(int(den), int(v.denominator))
        rows.append([int(v * den) for v in row])
        rhs.append(int(bi * den * m))
    reach = max(max(abs(l), abs(h)) for l, h in zip(lo, hi)) if lo else 0
    bound = max(sum(abs(a) for a in r) * reach + abs(c) for r, c in zip(rows, rhs))
    if bound < _kernels.INT64_SAFE:
        return _kernels.scan_box(rows, rhs, lo, hi, impl=impl)
    return _scan_exact(rows, rhs, lo, hi)


def _scan_exact(rows, rhs, lo, hi) -> np.ndarray:
    from itertools import product

    pts = [
        p
        for p in product(*(range(l, h + 1) for l, h in zip(lo, hi)))
        if all(sum(a * x for a, x in zip(r, p)) <= c for r, c in zip(rows, rhs))
    ]
    return np.array(pts, dtype=object).reshape(len(pts), len(lo))


def lattice_points(P: HRep, m: int) -> List[Point]:
    """Points of ``P`` on the scaled lattice ``(1/m) Z^d``."""
    return [tuple(mpq(int(v), m) for v in row) for row in scaled_lattice(P, m)]


def parse_hrep(text: str, validate: bool = True) -> HRep:
    """Parse ``n d`` then n lines ``b_i a_i1 ... a_id`` meaning ``<a_i, x> <= b_i``."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty polytope file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'n d'")
    try:
        n, d = int(head[0]), int(head[1])
    except ValueError:
        raise ValueError("first line must be 'n d'") from None
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} constraint lines, found {len(lines) - 1}")
    A, b = [], []
    for k, ln in enumerate(lines[1:], 2):
        fields = ln.split()
        if len(fields) != d + 1:
            raise ValueError(f"constraint {k - 1}: expected {d + 1} fields")
        try:
            vals = [as_rational(f) for f in fields]
        except ValueError as exc:
            raise ValueError(f"constraint {k - 1}: {exc}") from None
        b.append(vals[0])
        A.append(vals[1:])
    return HRep(A, b, validate=validate)


def dump_hrep(P: HRep) -> str:
    lines = [f"{P.n} {P.d}"]
    for row, bi in zip(P.A, P.b):
        lines.append(" ".join(str(v) for v in [bi] + list(row)))
    return "\n".join(lines) + "\n"
