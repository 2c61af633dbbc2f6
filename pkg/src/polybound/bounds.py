"""Moment-based bounds on the maximum of a polynomial over a polytope.

``L_k`` is the k-th power mean of ``f`` over ``P``; ``U_k`` inflates it by a
Lipschitz/width factor.  Both are computed from the exact rationals
``L_k^k`` and ``U_k^(d+k)``; only the final roots are rounded, and always in
the direction that keeps them valid bounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence

import mpmath
from gmpy2 import mpq

from .decompose import SHIFT_ONLY, SPARSE, HandelmanCertificate, degree_bound, find_certificate
from .integrate import HANDELMAN, LINEAR_FORMS, integrate_power, volume
from .polytope import HRep, coordinate_width
from .ratpoly import Polynomial, as_rational

log = logging.getLogger(__name__)

WHOLE = "whole"
PER_MONOMIAL = "per-monomial"
DEFAULT_DIGITS = 12


# --- Lipschitz constant ------------------------------------------------------


@dataclass(frozen=True)
class LipschitzEstimate:
    value: mpq
    method: str
    box_bound: mpq


def lipschitz(f: Polynomial, box_bound, method: str = PER_MONOMIAL) -> LipschitzEstimate:
    """Lipschitz constant of ``f`` (infinity-norm sense) on ``[-Mt, Mt]^d``.

    ``whole``: ``c r D Mt^(D-1)`` with ``c`` the largest coefficient and ``r``
    the number of nonconstant terms.  ``per-monomial``: the same bound
    applied to each term separately and summed.
    """
    Mt = as_rational(box_bound)
    if Mt < 0:
        raise ValueError("box bound must be nonnegative")
    terms = [(mon, c) for mon, c in f.terms.items() if any(mon)]
    if not terms:
        return LipschitzEstimate(mpq(0), method, Mt)
    if method == WHOLE:
        D = f.degree
        c = max(abs(c) for _, c in terms)
        value = c * len(terms) * D * Mt ** (D - 1)
    elif method == PER_MONOMIAL:
        value = sum((abs(c) * sum(mon) * Mt ** (sum(mon) - 1) for mon, c in terms), mpq(0))
    else:
        raise ValueError(f"unknown Lipschitz method {method!r}")
    return LipschitzEstimate(mpq(value), method, Mt)


# --- choosing k --------------------------------------------------------------


@dataclass(frozen=True)
class KChooserParams:
    epsilon: mpq
    upper: mpq
    delta: mpq = mpq(1, 10)
    c_delta: mpq = mpq(81, 20)

    def __post_init__(self):
        for name in ("epsilon", "upper", "delta", "c_delta"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.upper <= 0:
            raise ValueError("the initial upper bound must be positive")


def _iv(q: mpq):
    return mpmath.iv.mpf(q.numerator) / q.denominator


def k_components(params: KChooserParams, d: int, M, L) -> List[mpmath.mpf]:
    """Upper endpoints of the four terms whose maximum decides ``k``."""
    ML = as_rational(M) * as_rational(L)
    if ML <= 0:
        raise ValueError("M * L must be positive")
    with mpmath.workdps(40):
        iv = mpmath.iv
        eps, U = _iv(params.epsilon), _iv(params.upper)
        delta, cd = _iv(params.delta), _iv(params.c_delta)
        ml = _iv(ML)
        one = iv.mpf(1)
        terms = [
            d * (U / ml - 1),
            d / ((eps + 1) ** (one / 3) - 1),
            3 * d * iv.log(ml / U) * (1 + 1 / eps) if ML > params.upper else iv.mpf(0),
            d * ((3 * cd) ** (1 + delta) * (1 + 1 / eps) ** (1 + delta) - 1),
        ]
        return [mpmath.mpf(t.b.a) for t in terms]


def choose_k(params: KChooserParams, d: int, M, L) -> int:
    """Smallest integer k at least every component (and at least 1)."""
    top = max(k_components(params, d, M, L))
    return max(1, int(mpmath.ceil(top)))


# --- directed roots ----------------------------------------------------------


def iroot(x: int, n: int) -> int:
    """``floor(x ** (1/n))`` for integers ``x >= 0`` by Newton's method."""
    if x < 0 or n < 1:
        raise ValueError("iroot needs x >= 0 and n >= 1")
    if x < 2 or n == 1:
        return x
    r = 1 << -(-x.bit_length() // n)  # >= true root
    while True:
        s = ((n - 1) * r + x // r ** (n - 1)) // n
        if s >= r:
            break
        r = s
    while r ** n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def _format_scaled(a: int, digits: int) -> str:
    sign = "-" if a < 0 else ""
    a = abs(a)
    if digits == 0:
        return f"{sign}{a}"
    whole, frac = divmod(a, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _floor_div(p: int, q: int) -> int:
    return p // q


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def nth_root_directed(v, n: int, digits: int = DEFAULT_DIGITS, direction: str = "down") -> str:
    """Decimal ``r`` with ``digits`` fractional digits and ``r^n <= v`` (down)
    or ``r^n >= v`` (up), as tight as the precision allows."""
    v = as_rational(v)
    if n < 1:
        raise ValueError("root index must be positive")
    if direction not in ("down", "up"):
        raise ValueError("direction must be 'down' or 'up'")
    if v < 0:
        if n % 2 == 0:
            raise ValueError("even root of a negative number")
        flip = "up" if direction == "down" else "down"
        out = nth_root_directed(-v, n, digits, flip)
        return out if out.lstrip("0.") == "" else "-" + out
    p, q = int(v.numerator), int(v.denominator)
    scale = 10 ** (digits * n)
    if direction == "down":
        a = iroot(_floor_div(p * scale, q), n)
    else:
        a = iroot(_ceil_div(p * scale, q), n)
        if mpq(a ** n, scale) < v:
            a += 1
    r = mpq(a, 10 ** digits)
    ok = r ** n <= v if direction == "down" else r ** n >= v
    if not ok:  # pragma: no cover - guarded by construction
        raise ArithmeticError("directed root failed its exact check")
    return _format_scaled(a, digits)


def decimal_value(text: str) -> mpq:
    return mpq(Fraction(text))


def round_directed(v, digits: int, direction: str) -> str:
    """A rational rounded to ``digits`` places, toward -inf or +inf."""
    v = as_rational(v)
    num = int(v.numerator) * 10 ** digits
    den = int(v.denominator)
    a = _floor_div(num, den) if direction == "down" else _ceil_div(num, den)
    return _format_scaled(a, digits)


# --- L_k and U_k -------------------------------------------------------------


@dataclass(frozen=True)
class LowerBound:
    k: int
    Lk_pow_k: mpq
    L_k: str


@dataclass(frozen=True)
class UpperBound:
    k: int
    Uk_pow_dk: mpq
    U_k: str
    gamma_k: mpq
    k0: mpq
    valid: bool


def lower_bound_from_integral(integral, vol, k: int, digits: int = DEFAULT_DIGITS) -> LowerBound:
    mean = as_rational(integral) / as_rational(vol)
    return LowerBound(k, mean, nth_root_directed(mean, k, digits, "down"))


def upper_bound_from_integral(
    integral,
    vol,
    k: int,
    d: int,
    lipschitz_value,
    M,
    upper=None,
    f_barycenter=None,
    digits: int = DEFAULT_DIGITS,
) -> UpperBound:
    """``U_k^(d+k) = (I/vol) (M L)^d ((d+k)/d)^d ((d+k)/k)^k`` and its root.

    The validity threshold ``k0`` uses ``upper`` in place of the unknown
    maximum when given, else the Lipschitz estimate from ``f_barycenter``.
    """
    L = as_rational(lipschitz_value)
    M = as_rational(M)
    if L <= 0 or M <= 0:
        raise ValueError("Lipschitz constant and width must be positive")
    if k < 1:
        raise ValueError("k must be a positive integer")
    mean = as_rational(integral) / as_rational(vol)
    ML = M * L
    gamma = mpq(d, d + k)
    value = mean * ML ** d * mpq(d + k, d) ** d * mpq(d + k, k) ** k
    if upper is not None:
        k0 = d * (as_rational(upper) / ML - 1)
    elif f_barycenter is not None:
        k0 = d * as_rational(f_barycenter) / ML
    else:
        k0 = mpq(1)
    k0 = max(mpq(1), k0)
    return UpperBound(k, value, nth_root_directed(value, d + k, digits, "up"), gamma, k0, k >= k0)


def lower_bound(
    P: HRep,
    f: Polynomial,
    k: int,
    backend: str = LINEAR_FORMS,
    certificate: Optional[HandelmanCertificate] = None,
    digits: int = DEFAULT_DIGITS,
) -> LowerBound:
    """``L_k`` for ``f`` (or for ``f + s`` with the Handelman backend)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    integral = integrate_power(P, f, k, backend, certificate)
    return lower_bound_from_integral(integral, volume(P), k, digits)


def upper_bound(
    P: HRep,
    f: Polynomial,
    k: int,
    lipschitz_value,
    M=None,
    upper=None,
    backend: str = LINEAR_FORMS,
    certificate: Optional[HandelmanCertificate] = None,
    digits: int = DEFAULT_DIGITS,
) -> UpperBound:
    if M is None:
        M = coordinate_width(P)[0]
    integral = integrate_power(P, f, k, backend, certificate)
    return upper_bound_from_integral(
        integral, volume(P), k, P.d, lipschitz_value, M, upper, f(barycenter(P)), digits
    )


def barycenter(P: HRep):
    pts = [v.point for v in P.vertices]
    return tuple(sum(c) / len(pts) for c in zip(*pts))


# --- the full pipeline -------------------------------------------------------


@dataclass
class BoundsReport:
    k: int
    Lk_pow_k: mpq
    Uk_pow_dk: Optional[mpq]
    L_k: str
    U_k: Optional[str]
    gamma_k: mpq
    k0: Optional[mpq]
    k0_ok: Optional[bool]
    M: mpq
    lipschitz: Optional[mpq]
    shift: mpq
    t: Optional[int]
    backend: str
    integral: mpq
    volume: mpq
    digits: int = DEFAULT_DIGITS

    @property
    def f_lower(self) -> str:
        """Lower bound on max f itself (shift removed)."""
        return round_directed(decimal_value(self.L_k) - self.shift, self.digits, "down")

    @property
    def f_upper(self) -> Optional[str]:
        if self.U_k is None:
            return None
        return round_directed(decimal_value(self.U_k) - self.shift, self.digits, "up")

    def key_values(self) -> Dict[str, str]:
        def q(v):
            return "" if v is None else str(v)

        return {
            "k": str(self.k),
            "Lk_pow_k": q(self.Lk_pow_k),
            "Uk_pow_dk": q(self.Uk_pow_dk),
            "L_k": self.L_k,
            "U_k": q(self.U_k),
            "M": q(self.M),
            "lipschitz": q(self.lipschitz),
            "gamma_k": q(self.gamma_k),
            "k0": q(self.k0),
            "k0_ok": q(self.k0_ok),
            "s": q(self.shift),
            "t": q(self.t),
            "backend": self.backend,
        }


@dataclass
class PipelineResult:
    reports: List[BoundsReport]
    certificate: Optional[HandelmanCertificate] = None
    k_components: Optional[List[mpmath.mpf]] = None
    lipschitz: Optional[LipschitzEstimate] = None


class Pipeline:
    """Setup shared by every k: width, Lipschitz constant, shift, volume.

    ``shift='auto'`` finds a Handelman certificate and bounds ``f + s``;
    ``shift='none'`` assumes ``f >= 0`` on P and uses the linear-form engine.
    """

    def __init__(
        self,
        P: HRep,
        f: Polynomial,
        backend: str = HANDELMAN,
        shift: str = "auto",
        lipschitz_value=None,
        lipschitz_method: str = PER_MONOMIAL,
        M=None,
        t: Optional[int] = None,
        objective: str = SPARSE,
        upper=None,
        digits: int = DEFAULT_DIGITS,
    ):
        if shift not in ("auto", "none"):
            raise ValueError(f"unknown shift mode {shift!r}")
        if backend not in (HANDELMAN, LINEAR_FORMS):
            raise ValueError(f"unknown backend {backend!r}")
        if shift == "none" and backend == HANDELMAN:
            raise ValueError("the Handelman backend integrates f + s; use shift 'auto'")
        self.P, self.f, self.backend, self.digits = P, f, backend, digits
        width, reach = coordinate_width(P)
        self.M = width if M is None else as_rational(M)
        if lipschitz_value is None:
            self.lipschitz = lipschitz(f, reach, lipschitz_method)
        else:
            self.lipschitz = LipschitzEstimate(as_rational(lipschitz_value), "given", reach)
        self.certificate = find_certificate(f, P, t, objective) if shift == "auto" else None
        self.shift = self.certificate.shift if self.certificate else mpq(0)
        self.upper = None if upper is None else as_rational(upper) + self.shift
        self.volume = volume(P)
        self.shifted = f + self.shift

    def choose(self, epsilon, delta=mpq(1, 10), c_delta=mpq(81, 20)):
        """``(k, components)`` for the requested relative accuracy."""
        if self.upper is None:
            raise ValueError("choosing k from epsilon needs an initial upper bound")
        params = KChooserParams(epsilon, self.upper, delta, c_delta)
        comps = k_components(params, self.P.d, self.M, self.lipschitz.value)
        return choose_k(params, self.P.d, self.M, self.lipschitz.value), comps

    def report(self, k: int) -> BoundsReport:
        P, L = self.P, self.lipschitz.value
        if self.backend == HANDELMAN:
            integral = integrate_power(P, self.f, k, HANDELMAN, self.certificate)
        else:
            integral = integrate_power(P, self.shifted, k, LINEAR_FORMS)
        low = lower_bound_from_integral(integral, self.volume, k, self.digits)
        up = None
        if L > 0 and self.M > 0:
            up = upper_bound_from_integral(
                integral, self.volume, k, P.d, L, self.M,
                self.upper, self.shifted(barycenter(P)), self.digits,
            )
        return BoundsReport(
            k=k,
            Lk_pow_k=low.Lk_pow_k,
            Uk_pow_dk=up.Uk_pow_dk if up else None,
            L_k=low.L_k,
            U_k=up.U_k if up else None,
            gamma_k=mpq(P.d, P.d + k),
            k0=up.k0 if up else None,
            k0_ok=up.valid if up else None,
            M=self.M,
            lipschitz=L,
            shift=self.shift,
            t=self.certificate.t if self.certificate else None,
            backend=self.backend,
            integral=integral,
            volume=self.volume,
            digits=self.digits,
        )


def run_pipeline(
    P: HRep,
    f: Polynomial,
    ks: Optional[Sequence[int]] = None,
    epsilon=None,
    upper=None,
    backend: str = HANDELMAN,
    shift: str = "auto",
    lipschitz_value=None,
    lipschitz_method: str = PER_MONOMIAL,
    M=None,
    t: Optional[int] = None,
    objective: str = SPARSE,
    delta=mpq(1, 10),
    c_delta=mpq(81, 20),
    digits: int = DEFAULT_DIGITS,
) -> PipelineResult:
    """Certificate, k-th powers, integrals and both bounds for each k.

    Exactly one of ``ks`` and ``epsilon`` must be given.
    """
    if (ks is None) == (epsilon is None):
        raise ValueError("give exactly one of k and epsilon")
    pipe = Pipeline(P, f, backend, shift, lipschitz_value, lipschitz_method, M, t, objective, upper, digits)
    comps = None
    if epsilon is not None:
        k, comps = pipe.choose(epsilon, delta, c_delta)
        ks = [k]
    reports = [pipe.report(k) for k in ks]
    return PipelineResult(reports, pipe.certificate, comps, pipe.lipschitz)


def format_reports(reports: Sequence[BoundsReport]) -> str:
    """Aligned table followed by one key=value block per report."""
    header = ["k", "L_k >=", "U_k <=", "max f >=", "max f <=", "k0 ok"]
    rows = [
        [str(r.k), r.L_k, r.U_k or "-", r.f_lower, r.f_upper or "-", "-" if r.k0_ok is None else str(r.k0_ok).lower()]
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    for r in reports:
        lines.append("")
        lines += [f"{key}={val}" for key, val in r.key_values().items()]
    return "\n".join(lines) + "\n"


# --- shift quality on simplices ------------------------------------------------


@dataclass(frozen=True)
class ShiftQuality:
    constant: int
    factor: mpq
    t: int
    epsilon_prime: Optional[mpq]
    shift: Optional[mpq]

    @property
    def bound(self) -> mpq:
        """``s + f_min <= bound * (f_max - f_min)``."""
        return self.constant * self.factor


def simplex_shift_quality(
    P: HRep, f: Polynomial, D: Optional[int] = None, t: Optional[int] = None,
    epsilon=None, solve: bool = False,
) -> ShiftQuality:
    """Constants of the shift-quality guarantee on a simplex.

    ``constant = D^D binom(2D-1, D)``, ``factor = binom(D,2)/(t - binom(D,2))``
    and ``epsilon' = epsilon / (2 constant)``.  With ``solve`` the shift-only
    certificate LP is solved at degree ``t`` and its shift returned.
    """
    if P.n != P.d + 1:
        raise ValueError("shift quality bound needs a simplex (d+1 facets)")
    D = f.degree if D is None else D
    if D < 1:
        raise ValueError("degree must be positive")
    t = degree_bound(D) if t is None else t
    pairs = comb(D, 2)
    if t <= pairs:
        raise ValueError("t must exceed binom(D, 2)")
    const = D ** D * comb(2 * D - 1, D)
    eps = None if epsilon is None else as_rational(epsilon) / (2 * const)
    s = None
    if solve:
        s = find_certificate(f, P, t, SHIFT_ONLY, t_max=t).shift
    return ShiftQuality(const, mpq(pairs, t - pairs), t, eps, s)
