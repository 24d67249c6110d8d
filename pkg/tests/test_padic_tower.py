from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclostark.exact_cyclotomic import CyclotomicNumber
from cyclostark.padic_tower import (
    Tower,
    TowerElem,
    build_tower,
    embed_j,
    padic_log,
    padic_log_int,
    teichmuller_int,
    teichmuller_split,
    vp,
)

M = 10


@pytest.fixture(scope="module")
def tower3():
    return Tower(3, 20, 2, M + 4)


@pytest.fixture(scope="module")
def tower5():
    return Tower(5, 12, 1, M + 4)


def _naive_log(u: int, p: int, prec: int) -> int:
    """log(u) for u = 1 mod p by the plain Mercator series over Q."""
    z = Fraction(u - 1)
    acc = Fraction(0)
    for k in range(1, 4 * prec + 20):
        acc += (-1) ** (k + 1) * z**k / k
    mod = p**prec
    return acc.numerator * pow(acc.denominator, -1, mod) % mod


# ---- Z_p helpers


@pytest.mark.parametrize("p", [3, 5, 7])
def test_teichmuller_characterization(p):
    mod = p**M
    for a in range(1, 3 * p):
        if a % p == 0:
            continue
        w = teichmuller_int(a, p, M)
        assert pow(w, p - 1, mod) == 1
        assert (w - a) % p == 0


def test_teichmuller_rejects_nonunit():
    with pytest.raises(ValueError):
        teichmuller_int(6, 3, 5)


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("a", [2, 7, 11, Fraction(4, 7)])
def test_teichmuller_split_product(p, a):
    if vp(Fraction(a), p):
        pytest.skip("non-unit")
    w, u = teichmuller_split(a, p, M)
    mod = p**M
    a = Fraction(a)
    assert (w * u - a.numerator * pow(a.denominator, -1, mod)) % mod == 0
    assert (u - 1) % p == 0


@pytest.mark.parametrize("p", [3, 5])
@pytest.mark.parametrize("u", [4, 7, 10, 1 + 3 * 17, 1 - 9])
def test_log_against_mercator_series(p, u):
    if u % p != 1 % p:
        u = 1 + p * u
    assert padic_log_int(u, p, M) == _naive_log(u, p, M)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6), st.sampled_from([3, 5, 7]))
def test_log_is_a_homomorphism(a, b, p):
    if a % p == 0 or b % p == 0:
        return
    mod = p**M
    assert (padic_log_int(a * b, p, M) - padic_log_int(a, p, M) - padic_log_int(b, p, M)) % mod == 0


def test_log_kills_roots_of_unity():
    assert padic_log(teichmuller_int(2, 5, 12), 5, 10) == 0
    assert padic_log(-1, 3, 10) == 0


def test_valuation_helper():
    assert vp(Fraction(18, 5), 3) == 2
    assert vp(Fraction(5, 27), 3) == -3
    with pytest.raises(ValueError):
        vp(0, 3)


# ---- the tower


def test_zeta_F_embeds_as_primitive_root(tower3):
    F = 20
    t = tower3.root(F, 1, 0, M)
    one = TowerElem.from_int(tower3.level(0), 1, M)
    assert (t**F - one).valuation() >= M
    for q in sympy.primefactors(F):
        assert (t ** (F // q) - one).valuation() == 0


def test_pi_valuations(tower3, tower5):
    for tw in (tower3, tower5):
        p = tw.p
        for n in range(0, 2):
            assert tw.pi(n).valuation() == Fraction(1, (p - 1) * p**n)
        assert TowerElem.from_int(tw.level(1), p, M).valuation() == 1


@pytest.mark.parametrize("p,k", [(3, 1), (3, 2), (5, 1)])
def test_valuation_against_resultant_norm(p, k):
    """Q(zeta_{p^k}) is totally ramified at p, so v(j(x)) = v_p(N(x)) / phi(p^k)."""
    tower = Tower(p, 1, k, 40)
    X = sympy.Symbol("X")
    P = p**k
    Phi = sympy.cyclotomic_poly(P, X)
    rng = random.Random(7 + P)
    phi = int(sympy.totient(P))
    for _ in range(8):
        coeffs = [rng.randint(-30, 30) for _ in range(phi)]
        if not any(coeffs):
            continue
        x = CyclotomicNumber.from_coeffs(P, coeffs)
        norm = sympy.resultant(Phi, sum(c * X**i for i, c in enumerate(coeffs)), X)
        if norm == 0:
            continue
        expected = Fraction(vp(int(norm), p), phi)
        assert embed_j(x, tower, k - 1, 40).valuation() == expected


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=8, max_size=8),
       st.lists(st.integers(-50, 50), min_size=8, max_size=8),
       st.integers(1, 12))
def test_j_is_a_ring_homomorphism(u, v, den):
    tower = _shared_tower()
    # Q(zeta_60) has degree 16; use the first 8 power-basis coordinates
    x = CyclotomicNumber.from_coeffs(60, [Fraction(a, den) for a in u] + [0] * 8)
    y = CyclotomicNumber.from_coeffs(60, v + [0] * 8)
    jx, jy = embed_j(x, tower, 0, M), embed_j(y, tower, 0, M)
    assert (embed_j(x * y, tower, 0, M) - jx * jy).valuation() >= M - 2 * vp(den, 3) - 1
    assert (embed_j(x + y, tower, 0, M) - (jx + jy)).valuation() >= M - vp(den, 3) - 1


_TOWER: dict = {}


def _shared_tower():
    if "t" not in _TOWER:
        _TOWER["t"] = Tower(3, 20, 1, M + 4)
    return _TOWER["t"]


def test_embedding_agrees_across_levels(tower3):
    x = CyclotomicNumber.root(9, 2) + CyclotomicNumber.root(20, 3) * Fraction(1, 7)
    lo = embed_j(x, tower3, 1, M)
    hi = embed_j(x.embed(180 * 3), tower3, 2, M)
    assert (lo.lift(tower3.level(2)) - hi).valuation() >= M


def test_root_outside_tower_rejected(tower3):
    with pytest.raises(ValueError):
        tower3.root(7, 1, 0)
    with pytest.raises(ValueError):
        tower3.root(27, 1, 0)


def test_frobenius_fixes_zeta_and_powers_theta(tower3):
    for n in (0, 1):
        z = tower3.root(3 ** (n + 1), 1, n, M)
        assert (z.frobenius(1) - z).valuation() >= M
        t = tower3.root(20, 1, n, M)
        assert (t.frobenius(1) - tower3.root(20, 3, n, M)).valuation() >= M


def test_galois_moves_zeta(tower3):
    lv = tower3.level(1)
    z = TowerElem.zeta(lv, 1, M)
    assert (z.galois(4) - TowerElem.zeta(lv, 4, M)).valuation() >= M
    with pytest.raises(ValueError):
        z.galois(3)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_inverse_of_units_and_nonunits(tower3, n):
    lv = tower3.level(n)
    one = TowerElem.from_int(lv, 1, M + 4)
    for k in range(1, 5):
        for x in (TowerElem.zeta(lv, k, M + 4) + 3, tower3.pi(n) ** k, tower3.pi(n) * 3 + 9):
            err = x * x.inverse() - one
            assert err.valuation() >= M


def test_inverse_of_zero_raises(tower3):
    with pytest.raises(ZeroDivisionError):
        TowerElem.zero(tower3.level(0), M).inverse()


def test_precision_is_tracked(tower3):
    lv = tower3.level(0)
    a = TowerElem.from_int(lv, 5, 6)
    b = TowerElem.from_int(lv, 7, 9)
    assert (a + b).absprec == 6
    assert (a * b).absprec == 6
    c = TowerElem.from_int(lv, 9, 9)  # valuation 2
    assert (a * c).absprec == 8


def test_trace_descend_and_norm_of_pi(tower3):
    p = 3
    for n in (0, 1):
        lv = tower3.level(n)
        pi = tower3.pi(n)
        prod = None
        for b in range(1, lv.P):
            if b % p:
                s = pi.galois(b)
                prod = s if prod is None else prod * s
        N = prod.descend(tower3.H)
        # the norm of zeta - 1 from Q_p(zeta_{p^(n+1)}) is p
        assert (N - TowerElem.from_int(tower3.H, p, M)).valuation() >= M
        # trace of zeta_{p^(n+1)} is mu(p^(n+1)) = -1 at n = 0 and 0 above
        tr = TowerElem.zeta(lv, 1, M).trace_to_H(tower3.H)
        assert (tr - TowerElem.from_int(tower3.H, -1 if n == 0 else 0, M)).valuation() >= M


def test_descend_rejects_elements_outside_subfield(tower3):
    z = TowerElem.zeta(tower3.level(1), 1, M)
    with pytest.raises(ValueError):
        z.descend(tower3.level(0))


def test_tower_log(tower3):
    # log divides by p^s (s = n + 1 or n + 2), which costs s digits at most
    lv = tower3.level(1)
    z = TowerElem.zeta(lv, 1, M)
    t = TowerElem.theta(lv, 1, M)
    for root in (z, t):
        L = root.log()
        assert L.is_zero() and L.absprec >= M - 3
    x = z + 3
    y = TowerElem.theta(lv, 3, M) + 3
    lhs = (x * y).log()
    rhs = x.log() + y.log()
    assert (lhs - rhs).valuation() >= min(lhs.absprec, rhs.absprec) >= M - 3
    r = TowerElem.from_int(lv, 7, M).log()
    assert (r - TowerElem.from_int(lv, padic_log_int(7, 3, M), M)).valuation() >= r.absprec >= M - 3


def test_build_tower_strips_p():
    tw = build_tower(3, 45, 1, 8)
    assert tw.F == 5
    assert build_tower(5, 25, 1, 8).F == 1


def test_residue_teichmuller(tower3):
    lv = tower3.level(0)
    x = TowerElem.theta(lv, 1, M) + 3
    w = x.residue_teichmuller()
    q = lv.field.q
    assert (w ** (q - 1) - 1).valuation() >= M
    assert (w - x).valuation() > 0
    assert (q - 1) % 20 == 0
