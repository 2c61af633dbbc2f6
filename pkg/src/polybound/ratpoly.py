"""Exact rational scalars, sparse multivariate polynomials and truncated series.

Scalars are ``gmpy2.mpq`` values, which are always kept in lowest terms
with a positive denominator.  Polynomials are sparse maps from exponent
tuples to nonzero rationals.  :class:`TruncatedSeries` is the dense-in-main
variables table used by the integration engine.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from gmpy2 import fac as factorial
from gmpy2 import mpq, mpz

Monomial = Tuple[int, ...]

__all__ = [
    "Monomial",
    "Polynomial",
    "TruncatedSeries",
    "as_rational",
    "grlex_key",
    "monomials_upto",
    "parse_polynomial",
    "poly_eval",
    "poly_pow",
    "dump_polynomial",
    "factorial",
    "format_polynomial",
    "multinomial_expand",
    "truncated_product",
]


def as_rational(value) -> mpq:
    """Convert ints, strings like ``"3/4"`` or ``"0.25"``, or rationals to mpq."""
    if isinstance(value, str):
        value = value.strip()
        if not value:
            raise ValueError("empty rational literal")
        try:
            return mpq(value)
        except ValueError:
            raise ValueError(f"not a rational number: {value!r}") from None
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return mpq(value)


def grlex_key(m: Monomial):
    """Sort key for graded lexicographic order (ascending)."""
    return (sum(m), m)


@lru_cache(maxsize=256)
def monomials_upto(n: int, degree: int) -> Tuple[Tuple[Monomial, ...], Dict[Monomial, int]]:
    """All exponent vectors in ``n`` variables with total degree <= ``degree``.

    Returned in graded order (by total degree, then reverse-lex within a
    degree), so the monomials of degree <= j always form a prefix.
    """
    mons: List[Monomial] = []
    for deg in range(degree + 1):
        mons.extend(_compositions(n, deg))
    mons_t = tuple(mons)
    return mons_t, {m: i for i, m in enumerate(mons_t)}


def _compositions(n: int, total: int) -> Iterator[Monomial]:
    if n == 0:
        if total == 0:
            yield ()
        return
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(n - 1, total - first):
            yield (first,) + rest


class Polynomial:
    """Sparse polynomial in ``dim`` variables with rational coefficients.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("dim", "terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Monomial, object] | None = None):
        if dim < 0:
            raise ValueError("dimension must be nonnegative")
        self.dim = dim
        clean: Dict[Monomial, mpq] = {}
        if terms:
            for mon, coef in terms.items():
                mon = tuple(int(e) for e in mon)
                if len(mon) != dim:
                    raise ValueError(f"monomial {mon} does not have length {dim}")
                if any(e < 0 for e in mon):
                    raise ValueError(f"negative exponent in {mon}")
                c = as_rational(coef)
                if c:
                    c = clean.get(mon, 0) + c
                    if c:
                        clean[mon] = c
                    else:
                        clean.pop(mon, None)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, terms: Dict[Monomial, mpq]) -> "Polynomial":
        # trusted constructor: terms already cleaned
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, dim: int, value) -> "Polynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, index: int) -> "Polynomial":
        exps = [0] * dim
        exps[index] = 1
        return cls(dim, {tuple(exps): 1})

    @classmethod
    def affine(cls, coeffs: Sequence, const=0) -> "Polynomial":
        """The polynomial ``<coeffs, x> + const``."""
        dim = len(coeffs)
        terms: Dict[Monomial, object] = {(0,) * dim: const}
        for i, c in enumerate(coeffs):
            e = [0] * dim
            e[i] = 1
            terms[tuple(e)] = c
        return cls(dim, terms)

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> mpq:
        return self.terms.get((0,) * self.dim, mpq(0))

    def coefficient(self, mon: Monomial) -> mpq:
        return self.terms.get(tuple(mon), mpq(0))

    def sorted_terms(self, descending: bool = True) -> List[Tuple[Monomial, mpq]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=descending)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def _check(self, other: "Polynomial") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.dim, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for mon, c in other.terms.items():
            v = out.get(mon, 0) + c
            if v:
                out[mon] = v
            else:
                out.pop(mon, None)
        return Polynomial._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.dim, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = as_rational(other)
            if not c:
                return Polynomial._raw(self.dim, {})
            return Polynomial._raw(self.dim, {m: v * c for m, v in self.terms.items()})
        self._check(other)
        out: Dict[Monomial, mpq] = {}
        get = out.get
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                out[key] = get(key, 0) + c1 * c2
        return Polynomial._raw(self.dim, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        return poly_pow(self, k)

    def __call__(self, x: Sequence) -> mpq:
        return poly_eval(self, x)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.dim == other.dim and self.terms == other.terms
        try:
            return self == Polynomial.constant(self.dim, other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.dim}, {format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    def translate(self, shift: Sequence) -> "Polynomial":
        """Return ``x -> f(x + shift)``."""
        shift = [as_rational(v) for v in shift]
        if len(shift) != self.dim:
            raise ValueError("shift has wrong length")
        result = Polynomial(self.dim)
        cache: Dict[Tuple[int, int], Polynomial] = {}
        for mon, c in self.terms.items():
            term = Polynomial.constant(self.dim, c)
            for i, e in enumerate(mon):
                if e:
                    key = (i, e)
                    if key not in cache:
                        lin = Polynomial.variable(self.dim, i) + shift[i]
                        cache[key] = poly_pow(lin, e)
                    term = term * cache[key]
            result = result + term
        return result


def poly_pow(f: Polynomial, k: int) -> Polynomial:
    """Expand ``f**k`` in the monomial basis.

    Repeated multiplication by ``f`` is used: for the sparse inputs this
    library sees (few terms, large k) it does far less work than squaring.
    """
    if k < 0:
        raise ValueError("exponent must be nonnegative")
    result = Polynomial.constant(f.dim, 1)
    if k == 0:
        return result
    if len(f.terms) == 1:
        (mon, c), = f.terms.items()
        return Polynomial._raw(f.dim, {tuple(e * k for e in mon): c ** k})
    for _ in range(k):
        result = result * f
    return result


def poly_eval(f: Polynomial, x: Sequence) -> mpq:
    """Exact value of ``f`` at the rational point ``x``."""
    if len(x) != f.dim:
        raise ValueError(f"point has length {len(x)}, polynomial has dimension {f.dim}")
    xs = [as_rational(v) for v in x]
    total = mpq(0)
    powers: List[Dict[int, mpq]] = [dict() for _ in xs]
    for mon, c in f.terms.items():
        term = c
        for i, e in enumerate(mon):
            if e:
                p = powers[i].get(e)
                if p is None:
                    p = xs[i] ** e
                    powers[i][e] = p
                term = term * p
        total += term
    return total


def format_polynomial(f: Polynomial, names: Sequence[str] | None = None) -> str:
    if not f.terms:
        return "0"
    if names is None:
        names = [f"x{i + 1}" for i in range(f.dim)] if f.dim > 1 else ["x"]
    parts = []
    for mon, c in f.sorted_terms():
        factors = []
        for name, e in zip(names, mon):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else f"{mag}*" + "*".join(factors)
        else:
            body = str(mag)
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def parse_polynomial(text: str) -> Polynomial:
    """Parse the line-oriented polynomial format.

    ``d <dimension>`` on the first non-comment line, then one term per
    line: ``coefficient e_1 ... e_d``.  Lines starting with ``#`` and blank
    lines are skipped.
    """
    dim = None
    terms: Dict[Monomial, mpq] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if dim is None:
            if len(fields) != 2 or fields[0] != "d":
                raise ValueError(f"line {lineno}: expected 'd <dimension>' header")
            try:
                dim = int(fields[1])
            except ValueError:
                raise ValueError(f"line {lineno}: bad dimension {fields[1]!r}") from None
            if dim < 1:
                raise ValueError(f"line {lineno}: dimension must be positive")
            continue
        if len(fields) != dim + 1:
            raise ValueError(f"line {lineno}: expected {dim + 1} fields, got {len(fields)}")
        try:
            coef = as_rational(fields[0])
            mon = tuple(int(e) for e in fields[1:])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if any(e < 0 for e in mon):
            raise ValueError(f"line {lineno}: negative exponent")
        terms[mon] = terms.get(mon, 0) + coef
    if dim is None:
        raise ValueError("missing 'd <dimension>' header")
    return Polynomial(dim, terms)


def dump_polynomial(f: Polynomial) -> str:
    lines = [f"d {f.dim}"]
    for mon, c in f.sorted_terms():
        lines.append(" ".join([str(c)] + [str(e) for e in mon]))
    return "\n".join(lines) + "\n"


class TruncatedSeries:
    """Series in ``n`` main variables, truncated at total degree ``order``,
    with one auxiliary Laurent variable.

    The table is dense over the main monomials (graded order from
    :func:`monomials_upto`); each row is a sparse map from auxiliary
    exponent to coefficient.  ``lo``/``hi`` record the auxiliary exponent
    range the series may occupy.
    """

    __slots__ = ("n", "order", "lo", "hi", "rows")

    def __init__(self, n: int, order: int, lo: int = 0, hi: int = 0, rows=None):
        if order < 0:
            raise ValueError("truncation order must be nonnegative")
        if lo > hi:
            raise ValueError("empty auxiliary range")
        self.n = n
        self.order = order
        self.lo = lo
        self.hi = hi
        size = len(monomials_upto(n, order)[0])
        if rows is None:
            rows = [dict() for _ in range(size)]
        elif len(rows) != size:
            raise ValueError("row count does not match (n, order)")
        self.rows: List[Dict[int, mpq]] = rows

    @classmethod
    def from_terms(cls, n: int, order: int, terms: Mapping[Tuple[Monomial, int], object]) -> "TruncatedSeries":
        """Build from ``{(main_exponents, aux_exponent): coefficient}``; terms
        above the truncation order are dropped."""
        mons, index = monomials_upto(n, order)
        rows = [dict() for _ in mons]
        auxes = []
        for (mon, e), c in terms.items():
            mon = tuple(mon)
            if len(mon) != n:
                raise ValueError("main exponent vector has wrong length")
            if sum(mon) > order:
                continue
            c = as_rational(c)
            if not c:
                continue
            row = rows[index[mon]]
            v = row.get(e, 0) + c
            if v:
                row[e] = v
            else:
                row.pop(e, None)
            auxes.append(e)
        lo = min(auxes) if auxes else 0
        hi = max(auxes) if auxes else 0
        return cls(n, order, lo, hi, rows)

    @classmethod
    def one(cls, n: int, order: int) -> "TruncatedSeries":
        return cls.from_terms(n, order, {((0,) * n, 0): 1})

    def terms(self) -> Dict[Tuple[Monomial, int], mpq]:
        mons = monomials_upto(self.n, self.order)[0]
        return {(mons[i], e): c for i, row in enumerate(self.rows) for e, c in row.items()}

    def coefficient(self, mon: Monomial, aux: int = 0) -> mpq:
        index = monomials_upto(self.n, self.order)[1]
        mon = tuple(mon)
        if mon not in index:
            return mpq(0)
        return self.rows[index[mon]].get(aux, mpq(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.n == other.n and self.order == other.order and self.terms() == other.terms()

    def __repr__(self) -> str:
        return f"TruncatedSeries(n={self.n}, order={self.order}, aux=[{self.lo},{self.hi}], nnz={sum(map(len, self.rows))})"


def _series_mul(a: TruncatedSeries, b: TruncatedSeries, order: int) -> TruncatedSeries:
    n = a.n
    mons, index = monomials_upto(n, order)
    amons = monomials_upto(n, a.order)[0]
    bmons = monomials_upto(n, b.order)[0]
    rows: List[Dict[int, mpq]] = [dict() for _ in mons]
    # graded order: monomials of degree <= j are the first comb(j + n, n)
    bprefix = [comb(j + n, n) for j in range(b.order + 1)]
    bnz = [(j, bmons[j], row) for j, row in enumerate(b.rows) if row]
    for i, arow in enumerate(a.rows):
        if not arow:
            continue
        ma = amons[i]
        room = order - sum(ma)
        if room < 0:
            continue
        limit = bprefix[min(room, b.order)]
        for j, mb, brow in bnz:
            if j >= limit:
                break
            key = index[tuple(x + y for x, y in zip(ma, mb))]
            out = rows[key]
            for ea, ca in arow.items():
                for eb, cb in brow.items():
                    e = ea + eb
                    v = out.get(e, 0) + ca * cb
                    if v:
                        out[e] = v
                    else:
                        out.pop(e, None)
    return TruncatedSeries(n, order, a.lo + b.lo, a.hi + b.hi, rows)


def truncated_product(factors: Sequence[TruncatedSeries], order: int | None = None) -> TruncatedSeries:
    """Multiply series one at a time, dropping main-degree > ``order`` after
    each step.  Auxiliary exponents add and are never truncated."""
    if not factors:
        raise ValueError("need at least one factor")
    n = factors[0].n
    for s in factors:
        if s.n != n:
            raise ValueError(f"main-variable count mismatch: {s.n} vs {n}")
    if order is None:
        order = min(s.order for s in factors)
    acc = factors[0]
    if acc.order != order:
        acc = _retruncate(acc, order)
    for s in factors[1:]:
        acc = _series_mul(acc, s, order)
    return acc


def _retruncate(s: TruncatedSeries, order: int) -> TruncatedSeries:
    mons = monomials_upto(s.n, s.order)[0]
    return TruncatedSeries.from_terms(
        s.n, order, {(mons[i], e): c for i, row in enumerate(s.rows) for e, c in row.items()}
    )


def multinomial_expand(coeffs: Sequence, power: int) -> Dict[Monomial, mpz | mpq]:
    """Coefficients of ``(sum_i coeffs[i] * t_i) ** power`` keyed by exponent."""
    n = len(coeffs)
    out: Dict[Monomial, mpq] = {}
    fact = _factorials(power)
    for mon in _compositions(n, power):
        c = mpq(fact[power])
        for ci, e in zip(coeffs, mon):
            if e:
                if not ci:
                    c = 0
                    break
                c = c * ci ** e / fact[e]
        if c:
            out[mon] = c
    return out


@lru_cache(maxsize=64)
def _factorials(n: int) -> Tuple[mpz, ...]:
    out = [mpz(1)]
    for i in range(1, n + 1):
        out.append(out[-1] * i)
    return tuple(out)


