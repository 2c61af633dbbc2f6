"""Exact integration over polytopes through the exponential valuation.

Two engines share the vertex-cone data of :mod:`polybound.polytope`:

* powers of linear forms, where ``int_P <l,x>^M`` is a finite sum of cone
  contributions whenever ``l`` is regular (no ray orthogonal to it);
* products of affine forms, where a truncated series in ``t_1..t_n`` with
  one auxiliary Laurent variable yields the whole table
  ``int_P prod (<l_i,x> + r_i)^{p_i} / p_i!`` for ``|p| <= M`` at once.

Non-regular linear forms are routed through the second engine.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import _linalg
from .decompose import (
    HandelmanCertificate,
    HandelmanMonomial,
    certificate_pow,
    find_certificate,
    linear_form_table,
    verify_certificate,
)
from .polytope import HRep, SimplicialCone
from .ratpoly import (
    Monomial,
    Polynomial,
    TruncatedSeries,
    as_rational,
    factorial,
    monomials_upto,
    multinomial_expand,
    poly_pow,
    truncated_product,
)

log = logging.getLogger(__name__)

LINEAR_FORMS = "linear-forms"
HANDELMAN = "handelman"
BACKENDS = (LINEAR_FORMS, HANDELMAN)


@dataclass(frozen=True)
class AffineFactor:
    """``(<form, x> + const) ** power``."""

    form: Tuple[mpq, ...]
    const: mpq = mpq(0)
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "form", tuple(as_rational(v) for v in self.form))
        object.__setattr__(self, "const", as_rational(self.const))
        if self.power < 0:
            raise ValueError("affine factor power must be nonnegative")


@dataclass
class AffineProductIntegralTable:
    """``values[p] = int_P prod_i (<l_i,x> + r_i)^{p_i} / p_i!`` for ``|p| <= M``."""

    factors: Tuple[AffineFactor, ...]
    M: int
    values: Dict[Monomial, mpq]

    def __getitem__(self, p: Sequence[int]) -> mpq:
        p = tuple(p)
        if sum(p) > self.M or len(p) != len(self.factors):
            raise KeyError(p)
        return self.values.get(p, mpq(0))

    def integral(self, p: Sequence[int]) -> mpq:
        """``int_P prod (<l_i,x> + r_i)^{p_i}`` (factorials restored)."""
        scale = 1
        for e in p:
            scale *= factorial(e)
        return self[p] * scale


def _all_rays(P: HRep):
    return {u for cone in P.cones for u in cone.rays}


def is_regular(P: HRep, form: Sequence) -> bool:
    return all(_linalg.dot(form, u) != 0 for u in _all_rays(P))


def regular_form(P: HRep) -> Tuple[int, ...]:
    """First ``(1, lam, ..., lam^(d-1))``, lam = 1, 2, ..., orthogonal to no ray."""
    rays = _all_rays(P)
    lam = 1
    while True:
        form = tuple(lam ** i for i in range(P.d))
        if all(sum(a * b for a, b in zip(form, u)) for u in rays):
            return form
        lam += 1


def _cone_data(cone: SimplicialCone, form: Sequence) -> Tuple[mpq, mpq]:
    """``(<l, s>, vol(Pi_C) / prod(-<l, u_i>))`` for one cone."""
    a = _linalg.dot(form, cone.apex.point)
    w = mpq(cone.parallelepiped_volume)
    for u in cone.rays:
        w /= -_linalg.dot(form, u)
    return a, w


def volume(P: HRep, form: Optional[Sequence] = None) -> mpq:
    """Exact volume; any regular ``form`` gives the same answer."""
    if form is None:
        form = regular_form(P)
    elif not is_regular(P, form):
        raise ValueError("volume needs a regular linear form")
    total = mpq(0)
    for cone in P.cones:
        a, w = _cone_data(cone, form)
        total += w * a ** P.d
    return total / factorial(P.d)


def _regular_powers(P: HRep, form, powers: Dict[int, mpq]) -> mpq:
    """``sum_N c_N int_P <form,x>^N`` for a regular form."""
    d = P.d
    order = sorted(powers)
    # N!/(N+d)! for every needed N
    weight = {N: mpq(1, 1) / _rising(N + 1, d) for N in order}
    total = mpq(0)
    for cone in P.cones:
        a, w = _cone_data(cone, form)
        if not a:
            continue
        acc = mpq(0)
        apow = a ** (order[0] + d)
        prev = order[0]
        for N in order:
            if N != prev:
                apow *= a ** (N - prev)
                prev = N
            acc += powers[N] * weight[N] * apow
        total += w * acc
    return total


def _rising(start: int, count: int) -> int:
    out = 1
    for i in range(count):
        out *= start + i
    return out


def _series_powers(P: HRep, form, powers: Dict[int, mpq]) -> mpq:
    top = max(powers)
    table = integrate_affine_product(P, [AffineFactor(form, 0, top)])
    return sum((c * table.integral((N,)) for N, c in powers.items()), mpq(0))


def integrate_linear_form_power(P: HRep, form: Sequence, power: int) -> mpq:
    """``int_P <form, x>^power dx``."""
    return integrate_linear_form_powers(P, form, {power: 1})


def integrate_linear_form_powers(P: HRep, form: Sequence, powers: Dict[int, object]) -> mpq:
    """``sum_N c_N int_P <form, x>^N dx`` for one form and several powers."""
    powers = {int(N): as_rational(c) for N, c in powers.items() if c}
    if not powers:
        return mpq(0)
    form = tuple(as_rational(v) for v in form)
    if len(form) != P.d:
        raise ValueError("form dimension does not match the polytope")
    if not any(form):
        # 0^0 = 1 convention; higher powers vanish
        return powers.get(0, mpq(0)) * volume(P)
    if 0 in powers:
        base = powers.pop(0) * volume(P)
        return base + (integrate_linear_form_powers(P, form, powers) if powers else 0)
    if is_regular(P, form):
        return _regular_powers(P, form, powers)
    log.debug("form %s is not regular; using the series method", form)
    return _series_powers(P, form, powers)


# --- affine products --------------------------------------------------------


def _exp_factor(n: int, i: int, value: mpq, order: int) -> TruncatedSeries:
    """``exp(value * t_i)`` truncated at degree ``order``."""
    terms = {}
    power = mpq(1)
    for k in range(order + 1):
        mon = tuple(k if j == i else 0 for j in range(n))
        terms[(mon, 0)] = power / factorial(k)
        power *= value
    return TruncatedSeries.from_terms(n, order, terms)


def _laurent_factor(b: Sequence[mpq], beta: mpq, order: int) -> TruncatedSeries:
    """``1 / (-<b, t> - beta*tau)`` expanded in powers of ``<b,t>/(beta*tau)``."""
    n = len(b)
    terms = {}
    inv = 1 / beta
    scale = -inv
    for k in range(order + 1):
        # (-1)^(k+1) <b,t>^k (beta tau)^(-1-k)
        for mon, c in multinomial_expand(b, k).items():
            terms[(mon, -1 - k)] = scale * c
        scale *= -inv
    return TruncatedSeries.from_terms(n, order, terms)


def _cone_series(cone: SimplicialCone, factors, aux_form, order) -> List[mpq]:
    n = len(factors)
    s = cone.apex.point
    exps = [
        _exp_factor(n, i, _linalg.dot(f.form, s) + f.const, order) for i, f in enumerate(factors)
    ]
    laurent = []
    for u in cone.rays:
        b = [_linalg.dot(f.form, u) for f in factors]
        beta = _linalg.dot(aux_form, u)
        laurent.append(_laurent_factor(b, beta, order))
    # Laurent factors first keeps every intermediate row a single aux term
    H = truncated_product(laurent, order)
    if exps:
        H = truncated_product([H] + [truncated_product(exps, order)], order)
    alpha = _linalg.dot(aux_form, s)
    vol = cone.parallelepiped_volume
    out = []
    for row in H.rows:
        acc = mpq(0)
        for e, c in row.items():
            # pair tau^e with the tau^(-e) term of exp(alpha * tau)
            if e <= 0 and (alpha or e == 0):
                acc += c * alpha ** (-e) / factorial(-e)
        out.append(acc * vol)
    return out


def integrate_affine_product(
    P: HRep, factors: Sequence[AffineFactor], order: Optional[int] = None
) -> AffineProductIntegralTable:
    """Table of ``int_P prod (<l_i,x> + r_i)^{p_i} / p_i!`` for ``|p| <= M``.

    ``M`` defaults to the sum of the factor powers.
    """
    factors = tuple(factors)
    for f in factors:
        if len(f.form) != P.d:
            raise ValueError("affine factor dimension does not match the polytope")
    M = sum(f.power for f in factors) if order is None else order
    n = len(factors)
    mons = monomials_upto(n, M)[0]
    if n == 0:
        return AffineProductIntegralTable(factors, M, {(): volume(P)})
    aux_form = regular_form(P)
    totals = [mpq(0)] * len(mons)
    for cone in P.cones:
        for i, v in enumerate(_cone_series(cone, factors, aux_form, M)):
            if v:
                totals[i] += v
    values = {mon: v for mon, v in zip(mons, totals) if v}
    return AffineProductIntegralTable(factors, M, values)


def facet_factors(P: HRep) -> List[AffineFactor]:
    """The facet polynomials ``b_i - <A_i, x>`` as affine factors."""
    return [AffineFactor(tuple(-a for a in row), bi) for row, bi in zip(P.A, P.b)]


def integrate_handelman(P: HRep, monomials: Sequence[HandelmanMonomial]) -> mpq:
    """``sum c_alpha int_P g^alpha`` from one shared affine-product table."""
    monomials = [hm for hm in monomials if hm.coefficient]
    if not monomials:
        return mpq(0)
    top = max(sum(hm.alpha) for hm in monomials)
    table = integrate_affine_product(P, facet_factors(P), order=top)
    return sum((hm.coefficient * table.integral(hm.alpha) for hm in monomials), mpq(0))


def integrate_linear_forms(P: HRep, f: Polynomial) -> mpq:
    """``int_P f`` through the merged power-of-linear-form decomposition."""
    if f.dim != P.d:
        raise ValueError("polynomial and polytope dimensions differ")
    total = mpq(0)
    for form, powers in linear_form_table(f).items():
        total += integrate_linear_form_powers(P, form, powers)
    return total


def integrate_polynomial(
    P: HRep,
    f: Polynomial,
    backend: str = LINEAR_FORMS,
    certificate: Optional[HandelmanCertificate] = None,
) -> mpq:
    """Exact ``int_P f(x) dx``; both backends return the same rational.

    The Handelman backend integrates ``f + s`` from a certificate (found
    here when not supplied) and subtracts ``s * vol(P)``.
    """
    if backend == LINEAR_FORMS:
        return integrate_linear_forms(P, f)
    if backend != HANDELMAN:
        raise ValueError(f"unknown backend {backend!r}")
    if certificate is None:
        certificate = find_certificate(f, P)
    elif not verify_certificate(certificate, f):
        raise ValueError("certificate does not verify against the polynomial")
    value = integrate_handelman(P, certificate.monomials)
    if certificate.shift:
        value -= certificate.shift * volume(P)
    return value


def integrate_power(
    P: HRep,
    f: Polynomial,
    k: int,
    backend: str = LINEAR_FORMS,
    certificate: Optional[HandelmanCertificate] = None,
) -> mpq:
    """``int_P f^k`` (linear forms) or ``int_P (f + s)^k`` (Handelman, with the
    certificate's shift ``s``)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if backend == LINEAR_FORMS:
        return integrate_linear_forms(P, poly_pow(f, k))
    if backend != HANDELMAN:
        raise ValueError(f"unknown backend {backend!r}")
    if certificate is None:
        certificate = find_certificate(f, P)
    elif not verify_certificate(certificate, f):
        raise ValueError("certificate does not verify against the polynomial")
    if k == 0:
        return volume(P)
    return integrate_handelman(P, certificate_pow(certificate, k))
