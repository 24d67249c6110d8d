from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclostark.exact_cyclotomic import (
    CyclicProductGroup,
    CyclotomicNumber,
    ExactRing,
    GroupRingElem,
    UnitGroupModSign,
    bernoulli_number,
    bernoulli_poly,
    character_eval,
    character_table,
    complex_embed,
    gauss_sum,
    generalized_bernoulli,
    group_ring_fourier,
    l_value_at_one,
    l_value_nonpositive,
)

ORDERS = [1, 3, 4, 5, 7, 8, 9, 12, 15, 20]


def cyc(order, coeffs):
    return CyclotomicNumber.from_coeffs(order, coeffs)


@st.composite
def cyclotomic_numbers(draw, order=None):
    N = order or draw(st.sampled_from(ORDERS))
    k = int(sympy.totient(N))
    nums = draw(st.lists(st.integers(-20, 20), min_size=k, max_size=k))
    den = draw(st.integers(1, 6))
    return cyc(N, [Fraction(a, den) for a in nums])


def quadratic_character(q):
    """The character mod q equal to the Jacobi symbol (./q), found in the table."""
    for chi in character_table(q):
        if all(complex_embed(chi.value(a)).real == pytest.approx(sympy.jacobi_symbol(a, q))
               for a in range(1, q) if math.gcd(a, q) == 1) and chi.E == 2:
            return chi
    raise LookupError(q)


# ---- worked examples


def test_zeta4_squared_is_minus_one():
    i = CyclotomicNumber.root(4, 1)
    assert i * i == CyclotomicNumber.rational(-1)


def test_nontrivial_cube_roots_sum_to_minus_one():
    assert CyclotomicNumber.root(3, 1) + CyclotomicNumber.root(3, 2) == -1


def test_inverse_of_one_minus_zeta5():
    x = CyclotomicNumber.one(5) - CyclotomicNumber.root(5, 1)
    assert x * x.inv() == 1


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        CyclotomicNumber.zero(5).inv()


def test_embedding_compatible_with_complex_values():
    x = cyc(5, [1, Fraction(2, 3), 0, -1])
    y = x.embed(15)
    assert y.order == 15
    assert complex_embed(y) == pytest.approx(complex_embed(x))
    assert y == x


def test_reduction_is_canonical():
    # zeta_5^4 written through the redundant basis reduces to the same vector
    z = CyclotomicNumber.root(5, 4)
    again = CyclotomicNumber.from_int_vector(5, z.redundant(5))
    assert again.coeffs == z.coeffs


# ---- field axioms


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    N = data.draw(st.sampled_from(ORDERS))
    a, b, c = (data.draw(cyclotomic_numbers(N)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == 0


@settings(max_examples=40, deadline=None)
@given(cyclotomic_numbers())
def test_inverse_property(a):
    if a.is_zero():
        return
    assert a * a.inv() == 1


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_complex_embedding_is_a_ring_map(data):
    N = data.draw(st.sampled_from(ORDERS))
    a, b = data.draw(cyclotomic_numbers(N)), data.draw(cyclotomic_numbers(N))
    assert complex_embed(a * b) == pytest.approx(complex_embed(a) * complex_embed(b), abs=1e-9)
    assert complex_embed(a + b) == pytest.approx(complex_embed(a) + complex_embed(b), abs=1e-9)
    assert complex_embed(a.conj()) == pytest.approx(complex_embed(a).conjugate(), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_galois_action_is_multiplicative(data):
    N = data.draw(st.sampled_from([5, 7, 9, 12, 15]))
    c = data.draw(st.sampled_from([u for u in range(1, N) if math.gcd(u, N) == 1]))
    a, b = data.draw(cyclotomic_numbers(N)), data.draw(cyclotomic_numbers(N))
    assert (a * b).galois(c) == a.galois(c) * b.galois(c)


# ---- Bernoulli data against sympy


@pytest.mark.parametrize("k", range(0, 31))
def test_bernoulli_numbers_match_sympy(k):
    ours = bernoulli_number(k)
    ref = Fraction(-1, 2) if k == 1 else Fraction(str(sympy.bernoulli(k)))
    assert ours == ref


@pytest.mark.parametrize("k", [0, 1, 2, 5, 8, 13])
@pytest.mark.parametrize("x", [Fraction(0), Fraction(1, 3), Fraction(2, 7), Fraction(5, 4)])
def test_bernoulli_polynomials_match_sympy(k, x):
    X = sympy.Symbol("X")
    ref = sympy.bernoulli(k, X).subs(X, sympy.Rational(x.numerator, x.denominator))
    assert bernoulli_poly(k, x) == Fraction(str(ref))


def _gen_bernoulli_oracle(chi, k):
    """f^(k-1) sum_a chi(a) B_k(a/f), evaluated with sympy's polynomials in floating point."""
    chi = chi.primitive()
    f = chi.modulus
    X = sympy.Symbol("X")
    Bk = sympy.bernoulli(k, X)
    tot = 0j
    for a in range(1, f + 1):
        if chi(a) is not None:
            tot += chi.complex_value(a) * complex(Bk.subs(X, sympy.Rational(a, f)))
    return tot * f ** (k - 1)


@pytest.mark.parametrize("f", [5, 8, 9, 12, 15])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_generalized_bernoulli_against_sympy(f, k):
    for chi in character_table(f):
        got = complex_embed(generalized_bernoulli(chi, k))
        assert got == pytest.approx(_gen_bernoulli_oracle(chi, k), abs=1e-9)


def test_frozen_values_for_quadratic_character_mod_5():
    chi = quadratic_character(5)
    assert generalized_bernoulli(chi, 2) == Fraction(4, 5)
    assert l_value_nonpositive(chi, -1) == Fraction(-2, 5)
    assert generalized_bernoulli(chi, 1) == 0  # even character


def test_frozen_class_number_relation_mod_3():
    # L(0, chi_{-3}) = 2h/w with h = 1, w = 6 for Q(sqrt(-3))
    chi = quadratic_character(3)
    assert l_value_nonpositive(chi, 0) == Fraction(1, 3)


@pytest.mark.parametrize("f", [5, 7, 9, 13])
@pytest.mark.parametrize("m", [0, -1, -2, -3])
def test_l_values_against_hurwitz_zeta(f, m):
    mpmath.mp.dps = 30
    for chi in character_table(f):
        chi = chi.primitive()
        if chi.modulus == 1:
            continue
        g = chi.modulus
        ref = sum(complex(chi.complex_value(a)) * complex(mpmath.zeta(m, mpmath.mpf(a) / g))
                  for a in range(1, g + 1) if chi(a) is not None) * g ** (-m)
        assert complex_embed(l_value_nonpositive(chi, m)) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("f", [5, 8, 12, 13, 15, 21])
def test_l_value_at_one_against_digamma(f):
    mpmath.mp.dps = 30
    seen = 0
    for chi in character_table(f):
        p = chi.primitive()
        if p.is_trivial() or not p.is_even():
            continue
        g = p.modulus
        # L(1, chi) = -(1/g) sum_a chi(a) psi(a/g) for nontrivial chi
        ref = -sum(complex(p.complex_value(a)) * complex(mpmath.digamma(mpmath.mpf(a) / g))
                   for a in range(1, g) if p(a) is not None) / g
        assert l_value_at_one(chi) == pytest.approx(ref, abs=1e-11)
        seen += 1
    assert seen > 0


def test_l_value_at_one_rejects_odd_characters():
    odd = quadratic_character(3)
    with pytest.raises(ValueError):
        l_value_at_one(odd)


# ---- characters and Gauss sums


@pytest.mark.parametrize("f", [1, 4, 5, 8, 9, 12, 15, 16, 45])
def test_character_table_orthogonality(f):
    chars = character_table(f)
    assert len(chars) == sympy.totient(f)
    units = [a for a in range(f) if math.gcd(a, f) == 1] or [0]
    for i, a in enumerate(chars):
        for j, b in enumerate(chars):
            s = sum(a.complex_value(u) * b.complex_value(u).conjugate() for u in units)
            assert abs(s - (len(units) if i == j else 0)) < 1e-9


def _primitive_count(f):
    out = 1
    for q, e in sympy.factorint(f).items():
        if e == 1:
            out *= q - 2
        else:
            out *= q ** (e - 2) * (q - 1) ** 2
    return out


@pytest.mark.parametrize("f", [3, 4, 5, 8, 9, 12, 15, 16, 27, 45, 60])
def test_number_of_primitive_characters(f):
    assert sum(chi.is_primitive() for chi in character_table(f)) == _primitive_count(f)


@pytest.mark.parametrize("f", [12, 45])
def test_primitive_character_reproduces_values(f):
    for chi in character_table(f):
        p = chi.primitive()
        assert f % p.modulus == 0
        for a in range(f):
            if math.gcd(a, f) == 1:
                assert p(a) == chi(a)


@pytest.mark.parametrize("f", [12, 45])
def test_characters_are_multiplicative(f):
    for chi in character_table(f):
        for a in range(f):
            for b in range(0, f, 7):
                x, y, z = chi(a), chi(b), chi(a * b)
                if x is None or y is None:
                    assert z is None
                else:
                    assert z == (x + y) % chi.E


@pytest.mark.parametrize("f", [3, 5, 7, 8, 9, 13, 15, 16, 20, 21])
def test_gauss_sum_modulus_for_primitive_characters(f):
    for chi in character_table(f):
        if chi.is_primitive():
            g = complex_embed(gauss_sum(chi))
            assert abs(g) == pytest.approx(math.sqrt(f), rel=1e-12)


@pytest.mark.parametrize("q", [5, 13, 17, 3, 7, 11])
def test_quadratic_gauss_sum_sign(q):
    g = complex_embed(gauss_sum(quadratic_character(q)))
    expected = math.sqrt(q) if q % 4 == 1 else 1j * math.sqrt(q)
    assert g == pytest.approx(expected, abs=1e-10)


def test_gauss_sum_of_imprimitive_character_vanishes_at_squareful_modulus():
    # chi mod 9 induced from the quadratic character mod 3
    chi = quadratic_character(3).induce(9)
    assert gauss_sum(chi, primitive=False).is_zero()
    assert not gauss_sum(chi).is_zero()


# ---- group rings


@pytest.mark.parametrize("orders", [(4,), (2, 3), (3, 3), (2, 2, 2)])
def test_fourier_roundtrip_exact(orders):
    G = CyclicProductGroup(orders)
    ring = ExactRing()
    x = GroupRingElem(G, {g: CyclotomicNumber.rational(Fraction(i + 1, 3)) for i, g in enumerate(G.elements)}, ring)
    vals = {i: character_eval(x, chi) for i, chi in enumerate(G.characters())}
    y = group_ring_fourier(vals, G, ring)
    assert all(y[g] == x[g] for g in G.elements)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=8, max_size=8),
       st.lists(st.integers(-5, 5), min_size=8, max_size=8))
def test_character_evaluation_is_multiplicative(u, v):
    G = UnitGroupModSign(45)  # 12 elements; pad the draws cyclically
    ring = ExactRing()
    x = GroupRingElem(G, {g: CyclotomicNumber.rational(u[i % 8]) for i, g in enumerate(G.elements)}, ring)
    y = GroupRingElem(G, {g: CyclotomicNumber.rational(v[(i * 5) % 8]) for i, g in enumerate(G.elements)}, ring)
    for chi in G.characters():
        assert character_eval(x * y, chi) == character_eval(x, chi) * character_eval(y, chi)


def test_unit_group_mod_sign_shape():
    G = UnitGroupModSign(45)
    assert G.order == 12
    assert len(G.characters()) == 12
    assert all(G.mul(a, G.inv(a)) == G.identity for a in G.elements)
    # labels are the representatives min(c, f - c)
    assert all(a < 45 / 2 for a in G.elements)
