"""Polynomial decompositions used for integration.

* powers of linear forms: every monomial ``x^m`` is rewritten as a signed
  sum of ``<p, x>^{|m|}`` over ``0 <= p <= m``;
* Handelman certificates: ``f + s = sum_alpha c_alpha g^alpha`` with
  ``c_alpha >= 0``, found by an exact linear program over the facet
  polynomials ``g_i`` of the polytope.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb, gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from gmpy2 import mpq, mpz

from . import exactlp
from .polytope import HRep
from .ratpoly import Monomial, Polynomial, as_rational, factorial, monomials_upto

log = logging.getLogger(__name__)

SPARSE = "sparse"
SHIFT_ONLY = "shift-only"

Form = Tuple[int, ...]


class CertificateError(RuntimeError):
    """No Handelman certificate was found up to the degree bound."""

    def __init__(self, message: str, last_t: int):
        super().__init__(message)
        self.last_t = last_t


@dataclass(frozen=True)
class LinearFormPower:
    """``coefficient * <form, x> ** power``."""

    coefficient: mpq
    form: Form
    power: int


@dataclass(frozen=True)
class HandelmanMonomial:
    coefficient: mpq
    alpha: Tuple[int, ...]


@dataclass
class HandelmanCertificate:
    """``sum(c_alpha * g^alpha) == f + shift`` on the polytope's facets."""

    polytope: HRep
    t: int
    shift: mpq
    monomials: List[HandelmanMonomial]
    objective: Optional[mpq] = None
    mode: str = SPARSE
    verified: bool = field(default=False, repr=False)

    def __len__(self) -> int:
        return len(self.monomials)

    def dumps(self) -> str:
        lines = [f"t {self.t}", f"s {self.shift}"]
        for hm in self.monomials:
            lines.append(f"{hm.coefficient} : " + " ".join(str(a) for a in hm.alpha))
        return "\n".join(lines) + "\n"


def normalize_form(form: Sequence, power: int) -> Tuple[Form, mpq]:
    """Primitive integer form with first nonzero entry positive, plus the
    factor ``lambda**power`` such that ``<form,x>^power = factor * <prim,x>^power``."""
    vals = [as_rational(v) for v in form]
    if not any(vals):
        return tuple(0 for _ in vals), mpq(1)
    den = mpz(1)
    for v in vals:
        den = den * v.denominator // gcd(int(den), int(v.denominator))
    ints = [int(v * den) for v in vals]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    first = next(v for v in ints if v)
    sign = 1 if first > 0 else -1
    prim = tuple(sign * v // g for v in ints)
    scale = mpq(sign * g, den)
    return prim, scale ** power


def linear_form_table(f: Polynomial) -> Dict[Form, Dict[int, mpq]]:
    """Merged power-of-linear-form decomposition of ``f``.

    Returns ``{primitive form: {power: coefficient}}`` with zero entries
    removed.  A constant term appears under the zero form with power 0.
    """
    d = f.dim
    by_degree: Dict[int, List[Tuple[Monomial, mpq]]] = {}
    for mon, c in f.terms.items():
        by_degree.setdefault(sum(mon), []).append((mon, c))
    table: Dict[Form, Dict[int, mpq]] = {}
    for N, items in sorted(by_degree.items()):
        if N == 0:
            table.setdefault((0,) * d, {})[0] = items[0][1]
            continue
        # integer accumulation: coefficient * lcm of denominators
        den = mpz(1)
        for _, c in items:
            den = den * c.denominator // gcd(int(den), int(c.denominator))
        shape = tuple(max(m[i] for m, _ in items) + 1 for i in range(d))
        acc = np.zeros(shape, dtype=object)
        acc[...] = 0
        for mon, c in items:
            block = np.array([mpz(c * den)], dtype=object).reshape(())
            for mi in mon:
                row = np.array([(-1) ** (mi - p) * comb(mi, p) for p in range(mi + 1)], dtype=object)
                block = np.multiply.outer(block, row)
            acc[tuple(slice(0, mi + 1) for mi in mon)] += block
        scale = den * factorial(N)
        nz = np.argwhere(acc != 0)
        for idx in nz:
            p = tuple(int(v) for v in idx)
            if not any(p):
                continue
            g = 0
            for v in p:
                g = gcd(g, v)
            prim = tuple(v // g for v in p)
            coef = mpq(acc[p] * mpz(g) ** N, scale)
            slot = table.setdefault(prim, {})
            v = slot.get(N, 0) + coef
            if v:
                slot[N] = v
            else:
                slot.pop(N, None)
    return {form: powers for form, powers in table.items() if powers}


def _flatten(table: Dict[Form, Dict[int, mpq]]) -> List[LinearFormPower]:
    out = [
        LinearFormPower(c, form, N)
        for form, powers in table.items()
        for N, c in powers.items()
    ]
    out.sort(key=lambda t: (t.power, t.form))
    return out


def monomial_to_linear_forms(mon: Sequence[int]) -> List[LinearFormPower]:
    """Powers-of-linear-forms expansion of the single monomial ``x^mon``."""
    mon = tuple(int(e) for e in mon)
    return _flatten(linear_form_table(Polynomial(len(mon), {mon: 1})))


def poly_to_linear_forms(f: Polynomial) -> List[LinearFormPower]:
    """Per-monomial expansion of ``f`` with like ``(form, power)`` terms merged."""
    return _flatten(linear_form_table(f))


def expand_linear_forms(terms: Sequence[LinearFormPower], dim: int) -> Polynomial:
    """Sum the terms back into the monomial basis (used for checking)."""
    total = Polynomial(dim)
    for t in terms:
        if t.power == 0:
            total = total + t.coefficient
            continue
        total = total + Polynomial.affine(list(t.form)) ** t.power * t.coefficient
    return total


# --- Handelman --------------------------------------------------------------


def _g_powers(P: HRep, t: int) -> Tuple[Tuple[Tuple[int, ...], ...], List[Polynomial]]:
    """All products ``g^alpha`` with ``|alpha| <= t`` (graded order)."""
    alphas, index = monomials_upto(P.n, t)
    gs = P.facet_polynomials()
    prods: List[Polynomial] = []
    for alpha in alphas:
        if not any(alpha):
            prods.append(Polynomial.constant(P.d, 1))
            continue
        j = max(i for i, a in enumerate(alpha) if a)
        prev = list(alpha)
        prev[j] -= 1
        prods.append(prods[index[tuple(prev)]] * gs[j])
    return alphas, prods


def handelman_lp(
    f: Polynomial,
    P: HRep,
    t: int,
    mode: str = SPARSE,
    weight=1,
) -> exactlp.LPProblem:
    """The linear program whose solutions are degree-``t`` certificates.

    Variables are ``c_alpha`` for ``|alpha| <= t`` (graded order) followed
    by the free shift ``s``.  One equality row per monomial ``x^beta`` with
    ``|beta| <= t``; the constant row reads ``a_0 . c - s = f_0``.
    """
    if f.dim != P.d:
        raise ValueError("polynomial and polytope dimensions differ")
    if t < f.degree:
        raise ValueError(f"Handelman degree t={t} is below deg(f)={f.degree}")
    if mode not in (SPARSE, SHIFT_ONLY):
        raise ValueError(f"unknown objective mode {mode!r}")
    alphas, prods = _g_powers(P, t)
    betas, bindex = monomials_upto(P.d, t)
    ncols = len(alphas)
    A = [[mpq(0)] * (ncols + 1) for _ in betas]
    for j, g in enumerate(prods):
        for mon, c in g.terms.items():
            A[bindex[mon]][j] = c
    A[0][ncols] = mpq(-1)
    rhs = [f.coefficient(beta) for beta in betas]
    w = as_rational(weight)
    cost = [w if mode == SPARSE else mpq(0)] * ncols + [mpq(1)]
    names = ["c[" + ",".join(map(str, a)) + "]" for a in alphas] + ["s"]
    return exactlp.LPProblem(cost, A, [exactlp.EQ] * len(betas), rhs, [False] * ncols + [True], names)


def degree_bound(D: int) -> int:
    """Degree at which some shift always admits a certificate: D(D-1)+1."""
    return D * (D - 1) + 1


def _assemble(f, P, t, mode, sol) -> HandelmanCertificate:
    alphas = monomials_upto(P.n, t)[0]
    mons = [HandelmanMonomial(c, alpha) for alpha, c in zip(alphas, sol.x[:-1]) if c]
    return HandelmanCertificate(P, t, sol.x[-1], mons, sol.objective, mode)


def find_certificate(
    f: Polynomial,
    P: HRep,
    t: Optional[int] = None,
    mode: str = SPARSE,
    weight=1,
    t_max: Optional[int] = None,
) -> HandelmanCertificate:
    """Solve the certificate LP at degree ``t``, retrying at t+1, ... up to
    ``D(D-1)+1`` on infeasibility.  Every returned certificate is verified."""
    D = f.degree
    if t is None:
        t = D
    if t < D:
        raise ValueError(f"Handelman degree t={t} is below deg(f)={D}")
    if t_max is None:
        t_max = max(degree_bound(D), t)
    for tt in range(t, t_max + 1):
        lp = handelman_lp(f, P, tt, mode, weight)
        sol = exactlp.solve(lp)
        log.debug("Handelman LP t=%d: %s after %d pivots", tt, sol.status, sol.pivots)
        if sol.status != exactlp.OPTIMAL:
            continue
        cert = _assemble(f, P, tt, mode, sol)
        if not verify_certificate(cert, f):
            raise AssertionError("LP solution failed certificate verification")
        cert.verified = True
        return cert
    raise CertificateError(f"no Handelman certificate found for t <= {t_max}", t_max)


def expand_handelman(P: HRep, monomials: Sequence[HandelmanMonomial]) -> Polynomial:
    gs = P.facet_polynomials()
    cache: Dict[Tuple[int, int], Polynomial] = {}
    total = Polynomial(P.d)
    for hm in monomials:
        term = Polynomial.constant(P.d, hm.coefficient)
        for i, a in enumerate(hm.alpha):
            if a:
                if (i, a) not in cache:
                    cache[(i, a)] = gs[i] ** a
                term = term * cache[(i, a)]
        total = total + term
    return total


def verify_certificate(cert: HandelmanCertificate, f: Polynomial) -> bool:
    """True iff all coefficients are nonnegative and the expansion equals f + s."""
    if any(hm.coefficient < 0 for hm in cert.monomials):
        return False
    if any(len(hm.alpha) != cert.polytope.n for hm in cert.monomials):
        return False
    return expand_handelman(cert.polytope, cert.monomials) == f + cert.shift


def certificate_pow(cert: HandelmanCertificate, k: int) -> List[HandelmanMonomial]:
    """Expand ``(sum c_alpha g^alpha)^k`` in the g-basis (like alphas merged)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    base = {hm.alpha: hm.coefficient for hm in cert.monomials}
    acc = dict(base)
    for _ in range(k - 1):
        nxt: Dict[Tuple[int, ...], mpq] = {}
        for a1, c1 in acc.items():
            for a2, c2 in base.items():
                key = tuple(x + y for x, y in zip(a1, a2))
                nxt[key] = nxt.get(key, 0) + c1 * c2
        acc = nxt
    items = sorted(acc.items(), key=lambda kv: (sum(kv[0]), kv[0]))
    return [HandelmanMonomial(c, a) for a, c in items if c]


def parse_certificate(text: str, P: HRep) -> HandelmanCertificate:
    t = s = None
    mons = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("t "):
            t = int(line.split()[1])
        elif line.startswith("s "):
            s = as_rational(line.split()[1])
        else:
            coef, _, rest = line.partition(":")
            mons.append(HandelmanMonomial(as_rational(coef), tuple(int(v) for v in rest.split())))
    if t is None or s is None:
        raise ValueError("certificate needs 't' and 's' header lines")
    return HandelmanCertificate(P, t, s, mons)


def term_counts(f: Polynomial, cert: HandelmanCertificate) -> Dict[str, int]:
    """Number of summands in each decomposition of ``f`` (resp. ``f + s``)."""
    return {
        "handelman": len(cert.monomials),
        "linear_forms": sum(len(v) for v in linear_form_table(f).values()),
    }
