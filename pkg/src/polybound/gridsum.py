"""Lower bounds from exact sums of ``f^k`` over a scaled lattice.

``L_{k,m}`` is the k-th power mean of ``f`` over ``P ∩ (1/m) Z^d``.  Grid
values are computed as integers ``F(p) = den * m^D * f(p/m)`` in the int64
kernel when that cannot overflow, and the k-th powers are summed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Sequence

import numpy as np
from gmpy2 import mpq, mpz

from . import _kernels
from .bounds import DEFAULT_DIGITS, nth_root_directed
from .polytope import HRep, scaled_lattice
from .ratpoly import Polynomial


@dataclass(frozen=True)
class GridSumResult:
    m: int
    k: int
    S: mpq
    count: int
    Lkm_pow_k: mpq
    L_km: str
    grid_max: mpq


def _integer_form(f: Polynomial, m: int):
    """Exponents, integer coefficients and ``m``-powers with
    ``f(p/m) = sum coef * mpow * p^e / (den * m^D)``."""
    D = f.degree
    den = mpz(1)
    for c in f.terms.values():
        den = den * c.denominator // gcd(int(den), int(c.denominator))
    mons = list(f.terms)
    exps = [list(mon) for mon in mons]
    coefs = [int(f.terms[mon] * den) for mon in mons]
    mpow = [m ** (D - sum(mon)) for mon in mons]
    return exps, coefs, mpow, int(den) * m ** D


def grid_values(P: HRep, f: Polynomial, m: int, impl: Optional[str] = None):
    """Integer grid values ``F`` and the common denominator ``q`` with
    ``f(p/m) = F / q`` for each lattice point."""
    pts = scaled_lattice(P, m, impl)
    exps, coefs, mpow, q = _integer_form(f, m)
    if not len(pts):
        return [], q
    reach = int(np.max(np.abs(pts))) if pts.dtype != object else max(abs(int(v)) for v in pts.flat)
    D = f.degree
    bound = sum(abs(c) * mp for c, mp in zip(coefs, mpow)) * max(reach, 1) ** D
    if exps and bound < _kernels.INT64_SAFE and pts.dtype != object:
        vals = _kernels.eval_grid(pts, np.array(exps, dtype=np.int64).reshape(len(exps), f.dim), coefs, mpow, impl)
        return [int(v) for v in vals], q
    out = []
    for p in pts:
        total = 0
        for e, c, mp in zip(exps, coefs, mpow):
            term = c * mp
            for x, ej in zip(p, e):
                term *= int(x) ** ej
            total += term
        out.append(total)
    return out, q


def grid_lower_bound(
    P: HRep, f: Polynomial, k: int, m: int, digits: int = DEFAULT_DIGITS, impl: Optional[str] = None
) -> GridSumResult:
    """Exact ``S(m) = sum f(x)^k`` over the grid and the rounded-down ``L_{k,m}``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    vals, q = grid_values(P, f, m, impl)
    if not vals:
        raise ValueError(f"no points of the 1/{m} lattice lie in P")
    total = sum(mpz(v) ** k for v in vals)
    S = mpq(total, mpz(q) ** k)
    mean = S / len(vals)
    if mean < 0 and k % 2 == 0:  # pragma: no cover - even powers are >= 0
        raise ValueError("negative mean with even k")
    if mean < 0:
        raise ValueError("grid mean of f^k is negative; the k-th root is not a bound")
    return GridSumResult(m, k, S, len(vals), mean, nth_root_directed(mean, k, digits, "down"), mpq(max(vals), q))


def convergence_report(
    P: HRep, f: Polynomial, k: int, ms: Sequence[int], digits: int = 6, exact=None
) -> str:
    """``L_{k,m}`` for each ``m`` next to the integral bound ``exact`` (if given)."""
    results: List[GridSumResult] = [grid_lower_bound(P, f, k, m, digits) for m in ms]
    width = max(len(str(m)) for m in ms)
    lines = [f"{'m'.rjust(width)}  points  L_k,m >="]
    for r in results:
        lines.append(f"{str(r.m).rjust(width)}  {str(r.count).rjust(6)}  {r.L_km}")
    if exact is not None:
        lines.append(f"L_k >= {exact}")
    return "\n".join(lines) + "\n"
