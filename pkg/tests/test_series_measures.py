from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from cyclostark.padic_tower import Tower, TowerElem, teichmuller_split
from cyclostark.series_measures import (
    BoundedSeries,
    IwasawaSeries,
    IwasawaSeriesFitter,
    apply_operator,
    count_small_roots,
    eval_at_unit_root,
    finite_level_measure,
    finite_level_measure_by_roots,
    integrate_kernel,
    iwasawa_fit,
    iwasawa_node,
    star_test,
)
from cyclostark.suites import random_star_series, suite_series_measures

P, M = 3, 8


@pytest.fixture(scope="module")
def tower():
    return Tower(P, 20, 2, M + 4)


_T: dict = {}


def shared_tower():
    if "t" not in _T:
        _T["t"] = Tower(P, 20, 2, M + 4)
    return _T["t"]


def poly(coeffs, prec=M):
    return BoundedSeries.polynomial(shared_tower().H, coeffs, prec)


def int_coeffs(h):
    """Integer X-coefficients of a series with rational-integer coefficients."""
    return [int(h.c[i, 0, 0]) * P**h.v for i in range(h.D + 1)]


# ---- arithmetic against sympy


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-100, 100), min_size=1, max_size=7),
       st.lists(st.integers(-100, 100), min_size=1, max_size=7))
def test_product_matches_sympy(a, b):
    X = sympy.Symbol("X")
    ref = sympy.Poly(sum(c * X**i for i, c in enumerate(a)) * sum(c * X**i for i, c in enumerate(b)), X)
    want = [int(c) for c in reversed(ref.all_coeffs())] if ref.degree() >= 0 else [0]
    got = int_coeffs(poly(a) * poly(b))
    mod = P**M
    want += [0] * (len(got) - len(want))
    assert all((g - w) % mod == 0 for g, w in zip(got, want))


def test_inverse_of_unit_series():
    h = poly([1, 3, 2, 5, 7, 1])
    one = h * h.inverse()
    assert one.coeff(0).valuation() == 0
    assert (one.coeff(0) - 1).valuation() >= M
    for i in range(1, one.D + 1):
        assert one.coeff(i).valuation() >= M


def test_inverse_needs_unit_constant_term():
    with pytest.raises(ValueError):
        poly([3, 1]).inverse()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=8))
def test_D_is_one_plus_X_times_derivative(a):
    X = sympy.Symbol("X")
    f = sum(c * X**i for i, c in enumerate(a))
    ref = sympy.Poly(sympy.expand((1 + X) * sympy.diff(f, X)), X)
    want = [int(c) for c in reversed(ref.all_coeffs())] if not ref.is_zero else [0]
    got = int_coeffs(apply_operator(poly(a), "D", 1))
    want += [0] * (len(got) - len(want))
    assert all((g - w) % P**M == 0 for g, w in zip(got, want))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=5),
       st.lists(st.integers(-50, 50), min_size=1, max_size=5))
def test_D_is_a_derivation(a, b):
    f, g = poly(a), poly(b)
    lhs = apply_operator(f * g, "D", 1)
    rhs = apply_operator(f, "D", 1) * g + f * apply_operator(g, "D", 1)
    assert (lhs - rhs).min_valuation() >= M


def test_D_on_Y_powers():
    # D (1 + X)^k = k (1 + X)^k
    for k in range(1, 6):
        h = poly([sympy.binomial(k, i) for i in range(k + 1)])
        d = apply_operator(h, "D", 1)
        assert (d - h.scale(k)).min_valuation() >= M


def test_unknown_operator_and_missing_tower():
    h = poly([1, 1])
    with pytest.raises(ValueError):
        apply_operator(h, "Q", 1)
    with pytest.raises(ValueError):
        apply_operator(h, "V", 1)
    with pytest.raises(ValueError):
        apply_operator(h, "D", -1)


def test_evaluation_routes_agree(tower):
    rng = random.Random(3)
    for n in (0, 1):
        h = random_star_series(tower.H, 20, M, rng)
        a = eval_at_unit_root(h, 1, n, tower)
        b = h.lift(tower.level(n)).evaluate(tower.pi(n))
        assert (a - b).valuation() >= min(a.absprec, b.absprec)


# ---- star condition and measures


def test_star_series_pass_and_constants_fail(tower):
    rng = random.Random(5)
    ok, _, _ = star_test(random_star_series(tower.H, 12, M, rng), tower, M)
    assert ok
    bad, _, _ = star_test(poly([1]), tower, M)
    assert not bad


def test_dirac_measure_integrates_to_point_value(tower):
    """(1+X)^a is the Dirac measure at a; the kernel integral is <a>^t zeta^(ua)."""
    a = 7
    L = 1
    h = poly([sympy.binomial(a, i) for i in range(a + 1)])
    mu = finite_level_measure(h, L)
    assert mu.masses[a % P ** (L + 1)].valuation() == 0
    assert sum(x.valuation() < M for x in mu.masses.values()) == 1
    for t in (0, 1, 2):
        got = integrate_kernel(mu, t, 0, 1, tower)
        _, u = teichmuller_split(a, P, M + 2)
        want = TowerElem.zeta(tower.level(0), a, M) * TowerElem.from_int(tower.level(0), pow(u, t, P ** (M + 2)), M)
        assert (got - want).valuation() >= got.absprec


def test_total_mass_is_value_at_zero(tower):
    rng = random.Random(8)
    h = random_star_series(tower.H, 26, M, rng)
    mu = finite_level_measure(h, 1)
    assert (mu.total() - h.coeff(0)).valuation() >= mu.precision


def test_measure_routes_agree(tower):
    rng = random.Random(11)
    for L in (0, 1):
        h = random_star_series(tower.H, P ** (L + 1) - 1, M, rng)
        mu = finite_level_measure(h, L)
        nu = finite_level_measure_by_roots(h, L, tower)
        cert = min(mu.precision, nu.precision)
        assert cert >= M - L - 1
        for a in range(P ** (L + 1)):
            assert (mu.masses[a] - nu.masses[a]).valuation() >= cert


def test_pushforward_permutes_masses(tower):
    mu = finite_level_measure(poly([1, 2, 3, 4, 5, 6, 7, 8, 9]), 1)
    nu = mu.pushforward(2)
    for a, x in mu.masses.items():
        assert (nu.masses[(2 * a) % 9] - x).valuation() >= M


# ---- Iwasawa fitting


def _poly_values(coeffs, xs):
    out = []
    for x in xs:
        acc = TowerElem.from_int(x.level, 0, M + 6)
        for c in reversed(coeffs):
            acc = acc * x + c
        out.append(acc)
    return out


def test_fit_reproduces_polynomial(tower):
    nodes = [iwasawa_node(m, 0, 0, tower, 1, M + 6) for m in (-1, -3, -5, -7, -9, -11)]
    coeffs = [2, 5, 1, 7, 4, 3]
    ys = _poly_values(coeffs, nodes)
    s = iwasawa_fit(nodes, ys)
    x = iwasawa_node(-13, 0, 0, tower, 1, M + 6)
    (want,) = _poly_values(coeffs, [x])
    assert (s(x) - want).valuation() >= min(s.precision, M)
    mono = s.monomial_coefficients()
    for c, k in zip(mono, coeffs):
        assert (c - k).valuation() >= s.precision - 6


def test_estimator_api_and_validation(tower):
    nodes = [iwasawa_node(m, 0, 0, tower, 1, M + 6) for m in (-1, -3, -5, -7, -9, -11, -13)]
    ys = _poly_values([1, 1, 1, 1, 1, 1], nodes)
    est = IwasawaSeriesFitter(p=P)
    assert clone(est).get_params() == {"p": P, "degree": None}
    est.fit(nodes[:6], ys[:6])
    (res, cp), = est.validate(nodes[6:], ys[6:])
    assert res >= cp
    assert est.held_out_ == [(res, cp)]
    (val, cp2), = est.predict_with_precision(nodes[6:])
    assert cp2 == cp
    with pytest.raises(ValueError):
        IwasawaSeriesFitter(p=P, degree=9).fit(nodes[:3], ys[:3])


def test_iwasawa_record_roundtrip(tower):
    nodes = [iwasawa_node(m, 0, 0, tower, 1, M + 6) for m in (-1, -3, -5)]
    s = iwasawa_fit(nodes, _poly_values([4, 0, 9], nodes))
    text = s.to_record()
    assert text.startswith("IWASAWA_SERIES v1\n")
    back = IwasawaSeries.from_record(text, tower)
    assert back.to_record() == text
    x = iwasawa_node(-7, 0, 0, tower, 1, M + 6)
    assert (back(x) - s(x)).valuation() >= s.precision
    with pytest.raises(ValueError):
        IwasawaSeries.from_record(text.replace("v1", "v9"), tower)
    with pytest.raises(ValueError):
        IwasawaSeries.from_record(text, Tower(5, 12, 1, 8))


def test_node_rejects_character_of_too_large_level(tower):
    with pytest.raises(ValueError):
        iwasawa_node(-1, 1, 3, tower, 0, M)


# ---- Newton polygon


def test_weierstrass_degree():
    # (X - 3)(X - 9)(1 + X): two roots in the open disc
    assert count_small_roots(poly([27, 15, -11, 1])) == 2
    assert count_small_roots(poly([1, 3, 9])) == 0
    assert count_small_roots(poly([9, 3, 1])) == 2
    with pytest.raises(ValueError):
        count_small_roots(poly([0, 0]))


def test_property_suite_passes():
    results = suite_series_measures(seed=1, count=10)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_scale_by_fraction():
    h = poly([3, 6, 9]).scale(Fraction(1, 3))
    assert int_coeffs(h)[:3] == [1, 2, 3]
