from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from polybound.ratpoly import (
    Polynomial,
    TruncatedSeries,
    as_rational,
    dump_polynomial,
    monomials_upto,
    parse_polynomial,
    poly_eval,
    poly_pow,
    truncated_product,
)


def polys(dim, max_terms=6, max_deg=3):
    mon = st.tuples(*[st.integers(0, max_deg)] * dim)
    coef = st.fractions(min_value=-5, max_value=5, max_denominator=6)
    return st.dictionaries(mon, coef, max_size=max_terms)


def as_fraction_dict(f):
    return {m: Fraction(int(c.numerator), int(c.denominator)) for m, c in f.terms.items()}


def test_pow_binomial():
    x = Polynomial.variable(1, 0)
    assert poly_pow(x - 1, 2) == x * x - 2 * x + 1


def test_pow_zero_is_one():
    f = Polynomial(2, {(1, 2): 3, (0, 0): -1})
    assert poly_pow(f, 0) == Polynomial.constant(2, 1)


def test_pow_bivariate_against_naive():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    got = poly_pow((x + y) ** 2, 2)
    want = {(4, 0): 1, (3, 1): 4, (2, 2): 6, (1, 3): 4, (0, 4): 1}
    assert as_fraction_dict(got) == want


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(st.just(d), polys(d))), st.integers(0, 5))
def test_pow_matches_repeated_product(data, k):
    dim, terms = data
    f = Polynomial(dim, terms)
    want = oracles.poly_pow({m: Fraction(c) for m, c in terms.items() if c}, k, dim)
    got = poly_pow(f, k)
    assert as_fraction_dict(got) == want
    if not f.is_zero:
        assert got.degree == k * f.degree


@settings(max_examples=40, deadline=None)
@given(polys(2), polys(2), polys(2))
def test_distributive(a, b, c):
    f, g, h = Polynomial(2, a), Polynomial(2, b), Polynomial(2, c)
    assert (f + g) * h == f * h + g * h


@settings(max_examples=40, deadline=None)
@given(polys(3), polys(3))
def test_coefficients_stay_reduced(a, b):
    for c in (Polynomial(3, a) * Polynomial(3, b)).terms.values():
        assert isinstance(c, type(mpq(1)))
        assert c.denominator > 0
        assert Fraction(int(c.numerator), int(c.denominator)).denominator == c.denominator


def test_zero_polynomial_degree_zero():
    assert Polynomial(3).degree == 0
    assert Polynomial(2, {(1, 1): 0}).terms == {}


def test_eval_examples():
    x = Polynomial.variable(1, 0)
    assert poly_eval(x * x - x, [1]) == 0
    assert poly_eval(-10 * x * x + 2, [mpq(1, 4)]) == mpq(11, 8)
    assert poly_eval(Polynomial.constant(2, 7), [3, mpq(1, 9)]) == 7


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        poly_eval(Polynomial.variable(2, 0), [1])


def test_translate():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    f = x * x * y - 3 * y
    g = f.translate([2, mpq(-1, 3)])
    for pt in ([0, 0], [1, 2], [mpq(1, 2), mpq(5, 7)]):
        assert g(pt) == f([pt[0] + 2, pt[1] - mpq(1, 3)])


def test_parse_and_dump_roundtrip():
    text = "# comment\nd 2\n3/4 2 0\n-1 0 1\n\n5 0 0\n"
    f = parse_polynomial(text)
    assert f.coefficient((2, 0)) == mpq(3, 4)
    assert parse_polynomial(dump_polynomial(f)) == f


@pytest.mark.parametrize(
    "text",
    ["2 0 1\n", "d x\n", "d 2\n1 2\n", "d 1\n1 -1\n", "d 1\nabc 1\n", ""],
)
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_polynomial(text)


def test_as_rational_rejects_float():
    with pytest.raises(TypeError):
        as_rational(0.1)
    assert as_rational("0.1") == mpq(1, 10)


def test_monomials_upto_graded_prefix():
    mons, index = monomials_upto(3, 4)
    degs = [sum(m) for m in mons]
    assert degs == sorted(degs)
    assert len(mons) == 35
    assert all(index[m] == i for i, m in enumerate(mons))


def series(n, order, terms):
    return TruncatedSeries.from_terms(n, order, terms)


def test_truncated_square():
    one_t = series(1, 1, {((0,), 0): 1, ((1,), 0): 1})
    got = truncated_product([one_t, one_t], 1)
    assert got.terms() == {((0,), 0): 1, ((1,), 0): 2}


def test_truncated_identity():
    s = series(2, 3, {((1, 2), -1): mpq(2, 3), ((0, 0), 0): 5, ((3, 0), 4): -1})
    assert truncated_product([TruncatedSeries.one(2, 3), s], 3) == s


def test_truncated_two_variables():
    a = series(2, 2, {((0, 0), 0): 1, ((1, 0), 0): 1, ((0, 1), 0): 1})
    b = series(2, 2, {((0, 0), 0): 1, ((1, 0), 0): -1})
    got = truncated_product([a, b], 2)
    want = {((0, 0), 0): 1, ((0, 1), 0): 1, ((2, 0), 0): -1, ((1, 1), 0): -1}
    assert got.terms() == want


def test_truncated_dimension_mismatch():
    with pytest.raises(ValueError):
        truncated_product([TruncatedSeries.one(1, 2), TruncatedSeries.one(2, 2)], 2)


def test_aux_exponents_add_without_truncation():
    a = series(1, 2, {((0,), -3): 1, ((1,), -1): 2})
    b = series(1, 2, {((0,), -4): 1})
    got = truncated_product([a, b], 2)
    assert got.terms() == {((0,), -7): 1, ((1,), -5): 2}
    assert (got.lo, got.hi) == (-7, -5)


series_terms = st.dictionaries(
    st.tuples(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)), st.integers(-3, 3)),
    st.integers(-4, 4),
    max_size=6,
)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 6), st.lists(series_terms, min_size=1, max_size=3))
def test_truncated_product_matches_full_product(n, order, factor_terms):
    factors = []
    full = {((0,) * n, 0): Fraction(1)}
    for terms in factor_terms:
        terms = {(mon[:n], e): c for (mon, e), c in terms.items()}
        factors.append(series(n, order, terms))
        # oracle: untruncated product on (main, aux) exponent pairs
        nxt = {}
        for (m1, e1), c1 in full.items():
            for (m2, e2), c2 in terms.items():
                key = (tuple(a + b for a, b in zip(m1, m2)), e1 + e2)
                nxt[key] = nxt.get(key, 0) + c1 * c2
        full = nxt
    want = {k: v for k, v in full.items() if v and sum(k[0]) <= order}
    got = truncated_product(factors, order).terms()
    assert got == want
