"""Bounded power series over the tower, their operators, measures and Iwasawa fits.

A BoundedSeries stores the coefficients of X^0..X^D as one integer array of
shape (D+1, e, d) scaled by p^v and known modulo p^(v+N), plus a lower bound
`tail` for the valuation of every coefficient beyond D. tail = None marks an
exact polynomial. Every operation tracks how far the result is certified.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._kernels import convnd, zeros
from .padic_tower import (
    Tower,
    TowerElem,
    TowerLevel,
    _vp_or,
    teichmuller_int,
    teichmuller_split,
    vp,
)

__all__ = [
    "BoundedSeries",
    "star_test",
    "apply_operator",
    "eval_at_unit_root",
    "FiniteLevelMeasure",
    "finite_level_measure",
    "finite_level_measure_by_roots",
    "integrate_kernel",
    "IwasawaSeries",
    "IwasawaSeriesFitter",
    "iwasawa_fit",
    "iwasawa_eval",
    "iwasawa_node",
    "count_small_roots",
    "truncation_degree",
]


def truncation_degree(p: int, n: int, M: int, extra: int = 8) -> int:
    """Degree needed so that the tail of a bounded series cannot disturb an
    evaluation at a primitive p^(n+1)-th root of unity minus one to precision M."""
    return math.ceil(M * p**n * (p - 1)) + extra


@lru_cache(maxsize=None)
def _pascal_to_Y(p: int, D: int, cap: int) -> np.ndarray:
    """T[j, i] = C(i, j) (-1)^(i-j): X-basis to Y = 1 + X basis."""
    mod = p**cap
    T = zeros((D + 1, D + 1))
    for i in range(D + 1):
        # coefficient of Y^j in (Y - 1)^i is C(i, j) (-1)^(i-j)
        row = [0] * (i + 1)
        b = 1
        for j in range(i + 1):
            row[j] = b
            b = b * (i - j) // (j + 1)
        for j in range(i + 1):
            T[j, i] = (row[j] * (-1) ** (i - j)) % mod
    return T


@lru_cache(maxsize=None)
def _pascal_from_Y(p: int, D: int, cap: int) -> np.ndarray:
    """S[i, j] = C(j, i): Y-basis to X-basis."""
    mod = p**cap
    S = zeros((D + 1, D + 1))
    for j in range(D + 1):
        b = 1
        for i in range(j + 1):
            S[i, j] = b % mod
            b = b * (j - i) // (i + 1)
    return S


class BoundedSeries:
    """sum_{i <= D} c_i X^i + (tail of valuation >= tail) over a tower level."""

    __slots__ = ("level", "c", "v", "N", "tail")

    def __init__(self, level: TowerLevel, c: np.ndarray, v: int, N: int, tail: Optional[Fraction]):
        self.level = level
        self.v = v
        self.N = max(N, 0)
        mod = level.p**self.N
        self.c = c % mod if self.N > 0 else zeros(c.shape)
        self.tail = None if tail is None else Fraction(tail)

    # ---- construction
    @classmethod
    def from_elems(cls, elems: Sequence[TowerElem], tail: Optional[Fraction] = None) -> "BoundedSeries":
        lv = elems[0].level
        v = min(e.v for e in elems if e.N) if any(e.N for e in elems) else min(e.absprec for e in elems)
        ap = min(e.absprec for e in elems)
        N = ap - v
        c = zeros((len(elems), lv.e, lv.d))
        p = lv.p
        for i, e in enumerate(elems):
            if e.N:
                c[i] = e.c * p ** (e.v - v)
        return cls(lv, c, v, N, tail)

    @classmethod
    def polynomial(cls, level: TowerLevel, coeffs: Sequence[int], prec: int) -> "BoundedSeries":
        c = zeros((len(coeffs), level.e, level.d))
        for i, x in enumerate(coeffs):
            c[i, 0, 0] = int(x)
        return cls(level, c, 0, prec, None)

    @property
    def p(self) -> int:
        return self.level.p

    @property
    def D(self) -> int:
        return self.c.shape[0] - 1

    @property
    def absprec(self) -> int:
        return self.v + self.N

    def is_polynomial(self) -> bool:
        return self.tail is None

    def coeff(self, i: int) -> TowerElem:
        if i > self.D:
            if self.tail is None:
                return TowerElem.zero(self.level, self.absprec)
            raise IndexError("coefficient beyond the truncation degree")
        return TowerElem(self.level, self.c[i], self.v, self.N)

    def min_valuation(self) -> Fraction:
        """Lower bound for the valuation of all coefficients (tail included)."""
        vals = [self.coeff(i).valuation() for i in range(self.D + 1)]
        m = min(vals) if vals else Fraction(self.absprec)
        if self.tail is not None:
            m = min(m, self.tail)
        return m

    def _with(self, c, v=None, N=None, tail="same") -> "BoundedSeries":
        return BoundedSeries(self.level, c, self.v if v is None else v, self.N if N is None else N,
                             self.tail if tail == "same" else tail)

    def truncate(self, D: int) -> "BoundedSeries":
        if D >= self.D:
            return self
        tail = self.tail
        dropped = min(self.coeff(i).valuation() for i in range(D + 1, self.D + 1))
        tail = dropped if tail is None else min(tail, dropped)
        return self._with(self.c[: D + 1].copy(), tail=tail)

    def normalized(self) -> "BoundedSeries":
        """Move the common p-power of the coefficients into v (no precision change)."""
        if self.N == 0:
            return self
        p = self.p
        m = self.N
        for x in self.c.flat:
            if x:
                m = min(m, _vp_or(int(x), p, m))
                if m == 0:
                    return self
        return BoundedSeries(self.level, self.c // p**m, self.v + m, self.N - m, self.tail)

    def with_precision(self, absprec: int) -> "BoundedSeries":
        if absprec >= self.absprec:
            return self
        return self._with(self.c, N=absprec - self.v)

    # ---- arithmetic
    def _align(self, other: "BoundedSeries"):
        v0 = min(self.v, other.v)
        ap = min(self.absprec, other.absprec)
        p = self.p
        a = self.c * p ** (self.v - v0)
        b = other.c * p ** (other.v - v0)
        return a, b, v0, ap

    def __add__(self, other: "BoundedSeries") -> "BoundedSeries":
        a, b, v0, ap = self._align(other)
        # certified degree: limited by truncated operands
        Ds = [s.D for s in (self, other) if s.tail is not None]
        Dmax = max(self.D, other.D)
        D = min(Ds) if Ds else Dmax
        out = zeros((Dmax + 1,) + a.shape[1:])
        out[: a.shape[0]] += a
        out[: b.shape[0]] += b
        tails = [t for t in (self.tail, other.tail) if t is not None]
        tail = min(tails) if tails else None
        res = BoundedSeries(self.level, out, v0, ap - v0, tail)
        return res.truncate(D) if Ds else res

    def __neg__(self):
        return self._with(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a) -> "BoundedSeries":
        a = Fraction(a)
        k = vp(a, self.p)
        u = a / Fraction(self.p) ** k
        mod = self.p ** max(self.N, 1)
        m = u.numerator * pow(u.denominator, -1, mod) % mod
        tail = None if self.tail is None else self.tail + k
        return BoundedSeries(self.level, self.c * m, self.v + k, self.N, tail)

    def mul_const(self, x: TowerElem) -> "BoundedSeries":
        lv = self.level
        N = min(self.N, x.N)
        mod = self.p**N
        full = convnd(self.c % mod, (x.c % mod).reshape((1,) + x.c.shape))
        full = _reduce_level(lv, full)
        tail = None if self.tail is None else self.tail + x.valuation()
        return BoundedSeries(lv, full, self.v + x.v, N, tail)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, TowerElem):
            return self.mul_const(other)
        lv = self.level
        N = min(self.N, other.N)
        mod = self.p**N
        if self.tail is None and other.tail is None:
            D = self.D + other.D
        elif self.tail is None:
            D = other.D
        elif other.tail is None:
            D = self.D
        else:
            D = min(self.D, other.D)
        a = (self.c % mod)[: D + 1]
        b = (other.c % mod)[: D + 1]
        full = convnd(a, b)[: D + 1]
        full = _reduce_level(lv, full)
        tails = []
        va, vb = self.v, other.v
        if self.tail is not None:
            tails.append(self.tail + vb)
        if other.tail is not None:
            tails.append(other.tail + va)
        tail = min(tails) if tails else None
        return BoundedSeries(lv, full, self.v + other.v, N, tail)

    def __pow__(self, k: int) -> "BoundedSeries":
        out = None
        base = self
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def inverse(self) -> "BoundedSeries":
        """Inverse of a series with unit constant term (Newton iteration)."""
        c0 = self.coeff(0)
        if c0.valuation() != 0:
            raise ValueError("constant term must be a unit")
        D = self.D
        y = BoundedSeries.from_elems([c0.inverse()], tail=None)
        prec = 1
        while prec <= D:
            prec = min(2 * prec, D + 1)
            s = self.truncate(prec - 1)
            two = BoundedSeries.from_elems([TowerElem.from_int(self.level, 2, self.absprec)], tail=None)
            y = (y * (two - s * y)).truncate(prec - 1)
            # y is an approximation, kept as a polynomial so later steps see its full degree
            y = BoundedSeries(self.level, y.c, y.v, y.N, None)
        if self.min_valuation() < 0:
            raise ValueError("inverse is only certified for integral series")
        # an integral series with unit constant term has an integral inverse
        return BoundedSeries(self.level, y.c[: D + 1], y.v, min(y.N, self.absprec - y.v), Fraction(0))

    def frobenius(self, k: int = 1) -> "BoundedSeries":
        m = self.level.field.frob_matrix(k)
        if m is None:
            return self
        return self._with(np.dot(self.c, m))

    def evaluate(self, x: TowerElem) -> TowerElem:
        """Horner evaluation at a point of positive valuation in the same level."""
        acc = self.coeff(self.D)
        for i in range(self.D - 1, -1, -1):
            acc = acc * x + self.coeff(i)
        vx = x.valuation()
        if self.tail is not None:
            bound = self.tail + (self.D + 1) * vx
            ap = min(acc.absprec, math.floor(bound))
            acc = TowerElem(acc.level, acc.c, acc.v, ap - acc.v)
        return acc

    def lift(self, level: TowerLevel) -> "BoundedSeries":
        if level.n == self.level.n:
            return self
        # lift preserves (v, N) because zeta-rows only get re-indexed
        out = zeros((self.D + 1, level.e, level.d))
        step = level.P // self.level.P if self.level.n >= 0 else level.P
        if self.level.n < 0:
            out[:, 0, :] = self.c[:, 0, :]
        else:
            red = zeros((self.D + 1, level.P, level.d))
            red[:, : step * self.level.e: step, :] = self.c
            out = _reduce_rows3(level, red)
        return BoundedSeries(level, out, self.v, self.N, self.tail)

    def descend(self, level: TowerLevel) -> "BoundedSeries":
        elems = [self.coeff(i).descend(level) for i in range(self.D + 1)]
        s = BoundedSeries.from_elems(elems, self.tail)
        return s

    # ---- bases
    def to_Y(self) -> np.ndarray:
        """Coefficients in powers of Y = 1 + X (exact for the polynomial part)."""
        T = _pascal_to_Y(self.p, self.D, self.level.field.cap)
        flat = self.c.reshape(self.D + 1, -1)
        return (np.dot(T, flat) % (self.p ** max(self.N, 1))).reshape(self.c.shape)

    @classmethod
    def from_Y(cls, level, b: np.ndarray, v, N, tail) -> "BoundedSeries":
        D = b.shape[0] - 1
        S = _pascal_from_Y(level.p, D, level.field.cap)
        flat = b.reshape(D + 1, -1)
        return cls(level, np.dot(S, flat).reshape(b.shape), v, N, tail)

    def __repr__(self):
        return f"BoundedSeries(level={self.level.n}, D={self.D}, v={self.v}, N={self.N}, tail={self.tail})"


def _reduce_rows3(level: TowerLevel, arr: np.ndarray) -> np.ndarray:
    """Reduce axis 1 (zeta exponents) of a (D, R, C) array."""
    t = np.ascontiguousarray(arr.transpose(1, 0, 2))
    r = level.reduce_rows(t)
    return np.ascontiguousarray(r.transpose(1, 0, 2))


def _reduce_level(level: TowerLevel, full: np.ndarray) -> np.ndarray:
    full = level.field.reduce_columns(full)
    if level.e == 1:
        if full.shape[1] == 1:
            return full
        return full.sum(axis=1, keepdims=True)
    return _reduce_rows3(level, full)


# ------------------------------------------------------------------ operators


def _omega_table(p: int, prec: int) -> list[int]:
    return [0] + [teichmuller_int(l, p, prec) for l in range(1, p)]


def _gauss_omega(level0: TowerLevel, prec: int) -> TowerElem:
    """g(omega) = sum_b zeta_0^b omega(b)^-1 in H_0."""
    p = level0.p
    mod = p**prec
    om = _omega_table(p, prec)
    red = zeros((level0.P, level0.d))
    for b in range(1, p):
        red[b, 0] = pow(om[b], -1, mod)
    return TowerElem(level0, level0.reduce_rows(red), 0, prec)


def _op_D(h: BoundedSeries) -> BoundedSeries:
    D = h.D
    c = h.c
    out = zeros(c.shape)
    idx = np.arange(D + 1, dtype=object)
    out += c * idx.reshape(-1, 1, 1)
    out[:-1] += c[1:] * (idx[1:]).reshape(-1, 1, 1)
    if h.tail is None:
        return BoundedSeries(h.level, out, h.v, h.N, None)
    return BoundedSeries(h.level, out[:-1].copy() if D > 0 else out, h.v, h.N, h.tail)


def _op_V(h: BoundedSeries, tower: Tower) -> BoundedSeries:
    """V h = -(g(omega)/p) sum_l omega(l) h(zeta_0^l (1+X) - 1)."""
    p = h.p
    lv0 = tower.level(max(0, h.level.n))
    prec = h.absprec
    om = _omega_table(p, prec + 2)
    hl = h.lift(lv0)
    b = hl.to_Y()  # (D+1, e0, d)
    D = hl.D
    acc = zeros((D + 1, lv0.P, lv0.d))
    for l in range(1, p):
        red = zeros((D + 1, lv0.P, lv0.d))
        red[:, : lv0.e, :] = b
        for i in range(D + 1):
            red[i] = np.roll(red[i], (i * l * (lv0.P // p)) % lv0.P, axis=0)
        acc = acc + red * om[l]
    Yc = _reduce_rows3(lv0, acc)
    s = BoundedSeries.from_Y(lv0, Yc, hl.v, hl.N, None)
    g = _gauss_omega(lv0, prec + 2)
    s = s.mul_const(g).scale(Fraction(-1, p))
    if h.tail is not None:
        # tail contribution to X^i is >= tail + (D+1-i)/(p-1) + 1/(p-1) - 1
        P = s.absprec
        cut = D + 1 - math.ceil((P - h.tail) * (p - 1)) - (p - 2)
        cut = min(cut, D)
        if cut < 0:
            raise ValueError("series too short to apply V at this precision")
        s = BoundedSeries(lv0, s.c[: cut + 1].copy(), s.v, s.N, h.tail + Fraction(1, p - 1) - 1)
    else:
        s = BoundedSeries(lv0, s.c, s.v, s.N, None)
    if h.level.n < 0:
        s = s.descend(h.level)
    return s


def apply_operator(h: BoundedSeries, op: str, k: int = 1, tower: Optional[Tower] = None) -> BoundedSeries:
    """Apply D, V, or the twisted derivative Dcheck = D V, k times (k >= 0).

    Dcheck^k is computed as D^k V^(k mod (p-1)); V^(p-1) is the identity on
    star series.
    """
    if k < 0:
        raise ValueError("negative powers go through measures, see integrate_kernel")
    if op == "D":
        for _ in range(k):
            h = _op_D(h)
        return h
    if op == "V":
        if tower is None:
            raise ValueError("V needs the tower (for zeta_0 and omega)")
        for _ in range(k % (h.p - 1) if k else 0):
            h = _op_V(h, tower)
        return h
    if op in ("Dcheck", "Dv"):
        r = k % (h.p - 1)
        if r:
            h = apply_operator(h, "V", r, tower)
        return apply_operator(h, "D", k)
    raise ValueError(f"unknown operator {op}")


def star_test(h: BoundedSeries, tower: Tower, prec: Optional[int] = None) -> tuple[bool, Fraction, int]:
    """Check sum_{zeta in mu_p} h(zeta(1+X) - 1) = 0.

    Returns (passed, smallest valuation seen, certified degree).
    """
    p = h.p
    lv0 = tower.level(max(0, h.level.n))
    hl = h.lift(lv0)
    b = hl.to_Y()
    D = hl.D
    # sum over zeta of zeta^i is p when p | i and 0 otherwise
    keep = zeros((D + 1, 1, 1))
    for i in range(0, D + 1, p):
        keep[i] = p
    s = BoundedSeries.from_Y(lv0, b * keep, hl.v, hl.N, None)
    target = min(prec or h.absprec, h.absprec)
    if h.tail is None:
        cut = D
    else:
        # tail of h contributes >= tail + (D+1-i)/(p-1) to X^i of each twist
        cut = D + 1 - math.ceil((target - h.tail) * (p - 1))
    cut = max(min(cut, D), -1)
    worst = Fraction(target)
    for i in range(cut + 1):
        worst = min(worst, s.coeff(i).valuation())
    return worst >= target, worst, cut


def eval_at_unit_root(h: BoundedSeries, u: int, n: int, tower: Tower) -> TowerElem:
    """h(zeta_n^u - 1) in H_n, zeta_n = zeta_{p^(n+1)}, p not dividing u."""
    lv = tower.level(n)
    p = h.p
    if u % p == 0:
        raise ValueError("u must be prime to p")
    N = h.N
    mod = p ** max(N, 1)
    hl = h.lift(lv) if h.level.n != n else h
    acc = zeros((lv.P, lv.d))
    for i in range(hl.D, -1, -1):
        acc = (np.roll(acc, u % lv.P, axis=0) - acc) % mod
        red = zeros((lv.P, lv.d))
        red[: lv.e] = hl.c[i]
        acc = (acc + red) % mod
    val = TowerElem(lv, lv.reduce_rows(acc), h.v, N)
    if h.tail is not None:
        bound = h.tail + Fraction(hl.D + 1, lv.e)
        ap = min(val.absprec, math.floor(bound))
        val = TowerElem(lv, val.c, val.v, ap - val.v)
    return val


# ------------------------------------------------------------------ measures


class FiniteLevelMeasure:
    """Masses mu(a + p^(L+1) Z_p) for a mod p^(L+1), each an element of `level`."""

    def __init__(self, level: TowerLevel, L: int, masses: dict, precision: int, provenance: str = "series"):
        self.level = level
        self.L = L
        self.masses = masses
        self.precision = precision
        self.provenance = provenance

    @property
    def modulus(self) -> int:
        return self.level.p ** (self.L + 1)

    def total(self) -> TowerElem:
        acc = None
        for a in sorted(self.masses):
            acc = self.masses[a] if acc is None else acc + self.masses[a]
        return acc

    def pushforward(self, c: int) -> "FiniteLevelMeasure":
        """Image under x -> c x (c a unit)."""
        m = self.modulus
        return FiniteLevelMeasure(self.level, self.L, {(c * a) % m: v for a, v in self.masses.items()},
                                  self.precision, self.provenance)

    def __repr__(self):
        return f"FiniteLevelMeasure(L={self.L}, prec={self.precision}, from {self.provenance})"


def finite_level_measure(h: BoundedSeries, L: int) -> FiniteLevelMeasure:
    """Class masses at level L read off from h modulo (1+X)^(p^(L+1)) - 1."""
    p = h.p
    b = h.to_Y()
    m = p ** (L + 1)
    masses = {}
    lv = h.level
    for a in range(m):
        s = b[a::m].sum(axis=0) if b[a::m].shape[0] else zeros((lv.e, lv.d))
        masses[a] = TowerElem(lv, s, h.v, h.N)
    prec = h.absprec
    if h.tail is not None:
        bound = h.tail + Fraction(h.D + 1, p**L * (p - 1)) - (L + 1)
        prec = min(prec, math.floor(bound))
    masses = {a: TowerElem(lv, x.c, x.v, prec - x.v) for a, x in masses.items()}
    return FiniteLevelMeasure(lv, L, masses, prec, "series")


def finite_level_measure_by_roots(h: BoundedSeries, L: int, tower: Tower) -> FiniteLevelMeasure:
    """Same masses through p^-(L+1) sum_zeta zeta^-a h(zeta - 1) (independent route)."""
    p = h.p
    m = p ** (L + 1)
    # h(zeta - 1) for zeta of order p^(k+1); conjugates enter through traces
    vals = {}
    for k in range(L + 1):
        e_k = eval_at_unit_root(h, 1, k, tower)
        vals[k] = e_k
    H = tower.H
    masses = {}
    for a in range(m):
        # level -1 term h(0) plus traces of zeta_k^-a h(pi_k) down to H
        tot = h.coeff(0) if h.level.n < 0 else h.coeff(0).descend(H)
        for k in range(L + 1):
            tk = vals[k].mul_zeta(-a).trace_to_H(H)
            tot = tot + tk
        masses[a] = tot.scale(Fraction(1, m))
    prec = min(x.absprec for x in masses.values())
    return FiniteLevelMeasure(H, L, masses, prec, "roots")


def _bracket_power(a: int, t: int, p: int, prec: int) -> int:
    _, u = teichmuller_split(a, p, prec)
    mod = p**prec
    return pow(u, t, mod) if t >= 0 else pow(pow(u, -1, mod), -t, mod)


def integrate_kernel(mu: FiniteLevelMeasure, t: int, n: int, u: int, tower: Tower) -> TowerElem:
    """Approximate integral over Z_p^x of <x>^t zeta_n^(u x) against mu.

    Exact up to the local-constancy error p^(L+1+v_p(t)) and the precision
    of the masses.
    """
    p = tower.p
    L = mu.L
    if L < n:
        raise ValueError("measure level must be at least n")
    lv = tower.level(n)
    prec = mu.precision
    if t != 0:
        prec = min(prec, L + 1 + _vp_or(abs(t), p, 10**6))
    vmin = min((x.v for x in mu.masses.values() if x.N), default=prec)
    work = prec - vmin
    if work <= 0:
        return TowerElem.zero(lv, prec)
    mod = p**work
    red = zeros((lv.P, lv.d))
    src = mu.level
    for a, x in mu.masses.items():
        if a % p == 0 or x.N == 0:
            continue
        w = _bracket_power(a, t, p, work + 2) % mod
        xc = x.lift(lv).c if src.n != n else x.c
        xl = TowerElem(lv, xc, x.v, x.N) if src.n != n else x
        row = (u * a) % lv.P
        padded = zeros((lv.P, lv.d))
        padded[: lv.e] = xl.c
        shifted = np.roll(padded, row, axis=0)
        red = (red + shifted * (w * p ** (x.v - vmin))) % mod
    return TowerElem(lv, lv.reduce_rows(red), vmin, work)


# ------------------------------------------------------------ Iwasawa fitting


def iwasawa_node(m: int, psi_exp: int, psi_level: int, tower: Tower, n: int, prec: int) -> TowerElem:
    """x = (1+p)^m psi(1+p)^-1 - 1 where psi(1+p) = zeta_{p^psi_level}^psi_exp."""
    p = tower.p
    lv = tower.level(n)
    mod = p ** (prec + 2)
    base = pow(1 + p, m, mod) if m >= 0 else pow(pow(1 + p, -1, mod), -m, mod)
    x = TowerElem.from_int(lv, base, prec)
    if psi_level > 0 and psi_exp % (p**psi_level):
        if psi_level > n + 1:
            raise ValueError("level too small for this character")
        k = -psi_exp * p ** (n + 1 - psi_level)
        x = x.mul_zeta(k)
    return x - 1


def _elem_record(x: TowerElem) -> str:
    digits = ",".join(str(int(a)) for a in x.c.flat)
    return f"{x.v} {x.N} {digits}"


def _elem_parse(text: str, lv) -> TowerElem:
    v, N, digits = text.split(" ")
    c = zeros((lv.e, lv.d))
    vals = [int(a) for a in digits.split(",")]
    if len(vals) != lv.e * lv.d:
        raise ValueError("coefficient count does not match the level")
    c.flat[:] = vals
    return TowerElem(lv, c, int(v), int(N), normalize=False)


class IwasawaSeries:
    """A series c(T) in Newton form on fitted nodes, with a certified precision model."""

    def __init__(self, nodes: list[TowerElem], newton: list[TowerElem], precision: int, labels=None):
        self.nodes = nodes
        self.newton = newton
        self.precision = precision
        self.labels = labels or []

    @property
    def degree(self) -> int:
        return len(self.newton) - 1

    def __call__(self, x: TowerElem) -> TowerElem:
        lv = x.level
        acc = self.newton[-1].lift(lv)
        for k in range(len(self.newton) - 2, -1, -1):
            acc = acc * (x - self.nodes[k].lift(lv)) + self.newton[k].lift(lv)
        return acc

    RECORD_VERSION = 1

    def to_record(self) -> str:
        """Versioned text record; tower elements as v, N and base-10 digit strings."""
        lv = self.nodes[0].level
        head = [f"IWASAWA_SERIES v{self.RECORD_VERSION}",
                f"prime {lv.p}", f"F {lv.field.F}", f"level {lv.n}",
                f"precision {self.precision}", f"degree {self.degree}"]
        body = [f"node {_elem_record(x)}" for x in self.nodes]
        body += [f"coeff {_elem_record(c)}" for c in self.newton]
        return "\n".join(head + body) + "\n"

    @classmethod
    def from_record(cls, text: str, tower: Tower) -> "IwasawaSeries":
        lines = [ln.split(" ", 1) for ln in text.strip().splitlines()]
        if lines[0] != ["IWASAWA_SERIES", f"v{cls.RECORD_VERSION}"]:
            raise ValueError("not an IwasawaSeries record of a supported version")
        meta = {k: v for k, v in lines[1:6]}
        if int(meta["prime"]) != tower.p or int(meta["F"]) != tower.F:
            raise ValueError("record was written for a different tower")
        lv = tower.level(int(meta["level"]))
        nodes = [_elem_parse(v, lv) for k, v in lines[6:] if k == "node"]
        newton = [_elem_parse(v, lv) for k, v in lines[6:] if k == "coeff"]
        if len(newton) != int(meta["degree"]) + 1 or len(nodes) != len(newton):
            raise ValueError("truncated record")
        return cls(nodes, newton, int(meta["precision"]))

    def certified_precision(self, x: TowerElem) -> int:
        """min(propagated precision, norm bound + sum_j v(x - x_j)).

        The norm bound assumes the underlying series has no coefficient of
        valuation below the smallest Newton coefficient.
        """
        lv = x.level
        dist = sum((x - nd.lift(lv)).valuation() for nd in self.nodes)
        vnorm = min(c.valuation() for c in self.newton)
        return int(min(Fraction(self.precision), math.floor(vnorm + dist)))

    def monomial_coefficients(self) -> list[TowerElem]:
        """Expand the Newton form into coefficients of T^k."""
        lv = self.newton[0].level
        coeffs = [self.newton[-1]]
        for k in range(len(self.newton) - 2, -1, -1):
            xk = self.nodes[k].lift(lv)
            new = [TowerElem.zero(lv, 10**6)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                new[i + 1] = new[i + 1] + c
                new[i] = new[i] - c * xk
            new[0] = new[0] + self.newton[k]
            coeffs = new
        return coeffs


def iwasawa_fit(nodes: list[TowerElem], values: list[TowerElem]) -> IwasawaSeries:
    """Newton divided differences through (nodes[j], values[j])."""
    if len(nodes) != len(values) or not nodes:
        raise ValueError("need matching non-empty nodes and values")
    lv = max((x.level for x in list(nodes) + list(values)), key=lambda l: l.n)
    xs = [x.lift(lv) for x in nodes]
    col = [y.lift(lv) for y in values]
    newton = [col[0]]
    for k in range(1, len(xs)):
        col = [(col[j + 1] - col[j]) * (xs[j + k] - xs[j]).inverse() for j in range(len(col) - 1)]
        newton.append(col[0])
    prec = min(c.absprec for c in newton)
    prec = min(prec, min(y.absprec for y in values))
    return IwasawaSeries(xs, newton, prec)


def iwasawa_eval(series: IwasawaSeries, x: TowerElem) -> tuple[TowerElem, int]:
    """Value and certified precision at x."""
    val = series(x)
    cp = series.certified_precision(x)
    return TowerElem(val.level, val.c, val.v, min(val.absprec, cp) - val.v), cp


class IwasawaSeriesFitter(BaseEstimator):
    """Estimator wrapper: fit(nodes, values) then predict(points).

    Nodes and values are tower elements; the fitted interpolant lives in
    `series_`. `held_out_` stores (valuation of the residual, certified
    precision) for any points passed to `validate`.
    """

    def __init__(self, p: int = 3, degree: Optional[int] = None):
        self.p = p
        self.degree = degree

    def fit(self, X, y):
        X = list(X)
        y = list(y)
        k = len(X) if self.degree is None else self.degree + 1
        if k > len(X):
            raise ValueError("not enough nodes for the requested degree")
        self.series_ = iwasawa_fit(X[:k], y[:k])
        self.n_nodes_ = k
        return self

    def predict(self, X):
        return [iwasawa_eval(self.series_, x)[0] for x in X]

    def predict_with_precision(self, X):
        return [iwasawa_eval(self.series_, x) for x in X]

    def validate(self, X, y):
        out = []
        for x, target in zip(X, y):
            # residual of the raw interpolant, not of the value cut to cp
            val = self.series_(x)
            cp = self.series_.certified_precision(x)
            lv = max(val.level, target.level, key=lambda l: l.n)
            res = (val.lift(lv) - target.lift(lv)).valuation()
            out.append((res, cp))
        self.held_out_ = out
        return out


def count_small_roots(h: BoundedSeries) -> int:
    """Number of roots in the open unit disc (Weierstrass degree) from the Newton polygon."""
    vals = [h.coeff(i).valuation() for i in range(h.D + 1)]
    known = [(i, v) for i, v in enumerate(vals) if v < h.absprec]
    if not known:
        raise ValueError("all coefficients vanish to precision")
    vmin = min(v for _, v in known)
    if h.tail is not None and h.tail <= vmin:
        raise ValueError("tail bound too weak to certify the Weierstrass degree")
    for i, v in enumerate(vals):
        if v == vmin and v < h.absprec:
            # every earlier coefficient must be certified strictly larger
            if any(vals[j] >= h.absprec and h.absprec <= vmin for j in range(i)):
                raise ValueError("uncertifiable: an earlier coefficient is below precision")
            return i
    raise AssertionError("unreachable")
