import random
from math import comb, prod

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from polybound import decompose, exactlp
from polybound.decompose import (
    SHIFT_ONLY,
    CertificateError,
    HandelmanCertificate,
    HandelmanMonomial,
    LinearFormPower,
    certificate_pow,
    expand_handelman,
    expand_linear_forms,
    find_certificate,
    handelman_lp,
    monomial_to_linear_forms,
    normalize_form,
    parse_certificate,
    poly_to_linear_forms,
    term_counts,
    verify_certificate,
)
from polybound.polytope import HRep, lattice_points
from polybound.ratpoly import Polynomial, poly_pow


def monomial(mon):
    return Polynomial(len(mon), {tuple(mon): 1})


def test_xy_expansion():
    terms = monomial_to_linear_forms((1, 1))
    assert set(terms) == {
        LinearFormPower(mpq(1, 2), (1, 1), 2),
        LinearFormPower(mpq(-1, 2), (1, 0), 2),
        LinearFormPower(mpq(-1, 2), (0, 1), 2),
    }


def test_pure_power_is_one_term():
    assert monomial_to_linear_forms((3,)) == [LinearFormPower(mpq(1), (1,), 3)]
    assert monomial_to_linear_forms((3, 0)) == [LinearFormPower(mpq(1), (1, 0), 3)]


def test_x2y_has_four_terms():
    terms = monomial_to_linear_forms((2, 1))
    assert len(terms) == 4
    assert expand_linear_forms(terms, 2) == monomial((2, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.lists(st.integers(0, 6), min_size=d, max_size=d)))
def test_reconstructs_monomial(mon):
    if sum(mon) > 6:
        mon = [min(e, 1) for e in mon]
    terms = monomial_to_linear_forms(mon)
    assert len(terms) <= prod(e + 1 for e in mon) - 1 or sum(mon) == 0
    assert expand_linear_forms(terms, len(mon)) == monomial(mon)


@pytest.mark.parametrize("mon", [(1, 1), (2, 1), (1, 1, 1), (3, 2), (2, 0, 2)])
def test_unmerged_formula_is_an_identity(mon):
    expanded, xs = oracles.binom_sum_check(mon)
    assert expanded == sympy.expand(prod(x ** e for x, e in zip(xs, mon)))


def test_univariate_passthrough():
    x = Polynomial.variable(1, 0)
    assert set(poly_to_linear_forms(x * x - x)) == {
        LinearFormPower(mpq(1), (1,), 2),
        LinearFormPower(mpq(-1), (1,), 1),
    }


def test_constant_convention():
    assert poly_to_linear_forms(Polynomial.constant(2, 5)) == [LinearFormPower(mpq(5), (0, 0), 0)]


def test_merging_xy_plus_x2():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    terms = poly_to_linear_forms(x * y + x * x)
    assert set(terms) == {
        LinearFormPower(mpq(1, 2), (1, 1), 2),
        LinearFormPower(mpq(1, 2), (1, 0), 2),
        LinearFormPower(mpq(-1, 2), (0, 1), 2),
    }
    assert expand_linear_forms(terms, 2) == x * y + x * x


def test_normalize_form():
    assert normalize_form((2, 4), 3) == ((1, 2), 8)
    assert normalize_form((-1, 1), 2) == ((1, -1), 1)
    assert normalize_form((-1, 1), 3) == ((1, -1), -1)
    assert normalize_form((mpq(1, 2), mpq(1, 3)), 1) == ((3, 2), mpq(1, 6))


def test_lp_shape(sym_interval, triangle):
    x = Polynomial.variable(1, 0)
    lp = handelman_lp(x * x - x, sym_interval, 2)
    assert len(lp.A) == comb(2 + 1, 1)
    assert len(lp.c) == comb(2 + 2, 2) + 1  # plus the shift
    f = Polynomial.variable(2, 0) * Polynomial.variable(2, 1)
    lp = handelman_lp(f, triangle, 3)
    assert len(lp.A) == comb(3 + 2, 2) and len(lp.c) == comb(3 + 3, 3) + 1


def test_worked_example(sym_interval):
    x = Polynomial.variable(1, 0)
    sol = exactlp.solve(handelman_lp(x * x - x, sym_interval, 2))
    assert sol.status == exactlp.OPTIMAL
    alphas = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    c = dict(zip(alphas, sol.x[:-1]))
    assert sol.x[-1] == 1
    assert c[(0, 2)] == mpq(3, 4) and c[(2, 0)] == mpq(1, 4)
    assert sol.objective == 2


def test_zero_polynomial(triangle):
    sol = exactlp.solve(handelman_lp(Polynomial(2), triangle, 1))
    assert sol.objective == 0 and all(v == 0 for v in sol.x)


def test_facet_polynomial_itself(sym_interval):
    g1 = sym_interval.facet_polynomials()[0]
    cert = find_certificate(g1, sym_interval, 1)
    assert cert.shift == 0 and cert.objective <= 1
    assert cert.monomials == [HandelmanMonomial(mpq(1), (1, 0))]


def test_degree_below_f_rejected(sym_interval):
    x = Polynomial.variable(1, 0)
    with pytest.raises(ValueError):
        handelman_lp(x * x, sym_interval, 1)
    with pytest.raises(ValueError):
        find_certificate(x * x, sym_interval, 1)


def test_find_certificate_worked_example(sym_interval):
    x = Polynomial.variable(1, 0)
    cert = find_certificate(x * x - x, sym_interval, 2)
    assert cert.shift == 1 and len(cert) == 2 and cert.verified
    g1, g2 = sym_interval.facet_polynomials()
    assert mpq(3, 4) * g2 ** 2 + mpq(1, 4) * g1 ** 2 == x * x - x + 1


def test_shift_only_constant():
    box = HRep.box([0, 0], [1, 1])
    cert = find_certificate(Polynomial.constant(2, 7), box, 0, SHIFT_ONLY)
    assert cert.shift == -7 and cert.monomials == []
    assert verify_certificate(cert, Polynomial.constant(2, 7))


def test_verify_rejects_perturbed(sym_interval):
    x = Polynomial.variable(1, 0)
    cert = find_certificate(x * x - x, sym_interval, 2)
    bad = HandelmanCertificate(
        sym_interval, 2, cert.shift,
        [HandelmanMonomial(mpq(1) if hm.alpha == (0, 2) else hm.coefficient, hm.alpha) for hm in cert.monomials],
    )
    assert not verify_certificate(bad, x * x - x)


def test_verify_empty(triangle):
    assert verify_certificate(HandelmanCertificate(triangle, 0, mpq(0), []), Polynomial(2))


def test_verify_rejects_negative(sym_interval):
    cert = HandelmanCertificate(sym_interval, 1, mpq(0), [HandelmanMonomial(mpq(-1), (1, 0))])
    assert not verify_certificate(cert, -sym_interval.facet_polynomials()[0])


def test_certificate_pow(sym_interval):
    x = Polynomial.variable(1, 0)
    cert = find_certificate(x * x - x, sym_interval, 2)
    assert certificate_pow(cert, 1) == sorted(cert.monomials, key=lambda h: (sum(h.alpha), h.alpha))
    assert set(certificate_pow(cert, 2)) == {
        HandelmanMonomial(mpq(9, 16), (0, 4)),
        HandelmanMonomial(mpq(3, 8), (2, 2)),
        HandelmanMonomial(mpq(1, 16), (4, 0)),
    }
    single = HandelmanCertificate(sym_interval, 2, mpq(0), [HandelmanMonomial(mpq(2, 3), (1, 1))])
    assert certificate_pow(single, 3) == [HandelmanMonomial(mpq(8, 27), (3, 3))]


def random_poly(rng, d, deg, terms=4):
    out = {}
    for _ in range(terms):
        e = [0] * d
        for _ in range(rng.randint(0, deg)):
            e[rng.randrange(d)] += 1
        out[tuple(e)] = mpq(rng.randint(-9, 9), rng.randint(1, 4))
    return Polynomial(d, out)


@pytest.mark.parametrize("seed", range(6))
def test_shift_validity_and_power_identity(seed, triangle):
    rng = random.Random(seed)
    P = [triangle, HRep.unit_simplex(2), HRep.box([-1, 0], [1, 2])][seed % 3]
    f = random_poly(rng, 2, 3)
    cert = find_certificate(f, P)
    for pt in lattice_points(P, 4):
        assert f(pt) + cert.shift >= 0
    for k in (2, 3):
        assert expand_handelman(P, certificate_pow(cert, k)) == poly_pow(f + cert.shift, k)


def test_permuted_columns_still_verify(sym_interval):
    x = Polynomial.variable(1, 0)
    f = x * x - x
    lp = handelman_lp(f, sym_interval, 2)
    n = len(lp.c)
    order = list(range(n))
    random.Random(4).shuffle(order)
    permuted = exactlp.LPProblem(
        [lp.c[j] for j in order], [[row[j] for j in order] for row in lp.A], lp.senses, lp.b,
        [lp.free[j] for j in order],
    )
    sol = exactlp.solve(permuted)
    x_orig = [None] * n
    for pos, j in enumerate(order):
        x_orig[j] = sol.x[pos]
    alphas = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    cert = HandelmanCertificate(
        sym_interval, 2, x_orig[-1], [HandelmanMonomial(c, a) for a, c in zip(alphas, x_orig[:-1]) if c]
    )
    assert verify_certificate(cert, f)
    assert sol.objective == 2


def test_ladder_raises_with_last_t(monkeypatch, sym_interval):
    x = Polynomial.variable(1, 0)
    monkeypatch.setattr(exactlp, "solve", lambda p: exactlp.LPSolution(exactlp.INFEASIBLE))
    with pytest.raises(CertificateError) as err:
        find_certificate(x * x, sym_interval)
    assert err.value.last_t == 3  # D(D-1)+1 for D = 2


def test_ladder_retries(monkeypatch, sym_interval):
    x = Polynomial.variable(1, 0)
    real = exactlp.solve
    seen = []

    def flaky(p):
        seen.append(len(p.b))
        return exactlp.LPSolution(exactlp.INFEASIBLE) if len(seen) == 1 else real(p)

    monkeypatch.setattr(exactlp, "solve", flaky)
    cert = find_certificate(x * x - x, sym_interval)
    assert cert.t == 3 and seen == [3, 4]
    assert verify_certificate(cert, x * x - x)


def test_serialization_roundtrip(sym_interval):
    x = Polynomial.variable(1, 0)
    cert = find_certificate(x * x - x, sym_interval)
    text = cert.dumps()
    assert text.splitlines()[:2] == ["t 2", "s 1"]
    again = parse_certificate(text, sym_interval)
    assert again.monomials == cert.monomials and again.shift == cert.shift
    assert verify_certificate(again, x * x - x)


def test_term_counts(sym_interval):
    x = Polynomial.variable(1, 0)
    cert = find_certificate(x * x - x, sym_interval)
    assert term_counts(x * x - x, cert) == {"handelman": 2, "linear_forms": 2}
    xy = Polynomial.variable(2, 0) * Polynomial.variable(2, 1)
    assert len(poly_to_linear_forms(xy)) == 3


def test_module_exports_degree_bound():
    assert decompose.degree_bound(4) == 13
