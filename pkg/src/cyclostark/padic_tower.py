"""p-adic scalars, the unramified field H and the ramified tower H_n = H(zeta_{p^(n+1)}).

A tower element at level n is stored as p^v * c where c is an (e, d) integer
array modulo p^N: row i is the coefficient of zeta^i (zeta = zeta_{p^(n+1)},
i < e = (p-1) p^n) and column j the coefficient of theta^j, theta a fixed root
of unity generating H over Q_p. Level -1 is H itself (e = 1).

N is the relative precision, so the element is known modulo p^(v+N) times
the ring of integers. Valuations are normalised so that v(p) = 1.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from sympy import Poly, Symbol, ZZ
from sympy import cyclotomic_poly as _sym_cyclotomic
from sympy.ntheory import n_order
from sympy.polys.factortools import dup_zz_hensel_lift

from ._kernels import as_obj, convnd, zeros
from .exact_cyclotomic import CyclotomicNumber

__all__ = [
    "vp",
    "teichmuller_split",
    "teichmuller_int",
    "padic_log",
    "padic_log_int",
    "UnramifiedField",
    "TowerLevel",
    "TowerElem",
    "Tower",
    "build_tower",
    "embed_j",
]


def vp(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer (or Fraction)."""
    if isinstance(x, Fraction):
        return vp(x.numerator, p) - vp(x.denominator, p)
    if x == 0:
        raise ValueError("valuation of zero")
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    return k


def _vp_or(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    k = 0
    while k < cap and x % p == 0:
        x //= p
        k += 1
    return k


# ------------------------------------------------------------------ Z_p helpers


def teichmuller_int(a: int, p: int, prec: int) -> int:
    """omega(a) mod p^prec for p not dividing a."""
    if a % p == 0:
        raise ValueError("Teichmuller lift of a non-unit")
    mod = p**prec
    x = a % mod
    for _ in range(prec):
        x = pow(x, p, mod)
    return x


def teichmuller_split(a, p: int, prec: int) -> tuple[int, int]:
    """a = omega(a) <a> with omega(a) in mu_{p-1}, <a> in 1 + pZ_p (mod p^prec)."""
    a = Fraction(a)
    if vp(a, p) != 0:
        raise ValueError("needs a p-adic unit")
    mod = p**prec
    ai = a.numerator * pow(a.denominator, -1, mod) % mod
    w = teichmuller_int(ai, p, prec)
    return w, ai * pow(w, -1, mod) % mod


def padic_log_int(x: int, p: int, prec: int) -> int:
    """Iwasawa log of a p-adic unit integer, as a residue mod p^prec."""
    _, u = teichmuller_split(x, p, prec + 2)
    z = u - 1  # v(z) >= 1
    # sum (-1)^(k-1) z^k / k, need k - v(k) >= prec
    work = prec + 2 + max(1, prec.bit_length())
    acc = Fraction(0)
    k = 1
    zk = 1
    while True:
        zk = zk * z % (p ** (work + 8))
        if k - _vp_or(k, p, 64) >= work:
            break
        acc += Fraction((-1) ** (k - 1) * zk, k)
        k += 1
    num, den = acc.numerator, acc.denominator
    return num * pow(den, -1, p**prec) % (p**prec)


def padic_log(x, p: int, prec: int) -> int:
    """log_p(x) mod p^prec for x a unit (Fraction or int); exact on 1 + pZ_p."""
    x = Fraction(x)
    return padic_log_int(x, p, prec)


# ------------------------------------------------------------ unramified field


class UnramifiedField:
    """H = Q_p(theta), theta a primitive F-th root of unity, p not dividing F.

    theta is the Hensel lift of a root of the lexicographically first monic
    irreducible factor of Phi_F modulo p. Frobenius is theta -> theta^p.
    """

    def __init__(self, p: int, F: int, cap: int = 80):
        if F % p == 0:
            raise ValueError("F must be prime to p")
        self.p = p
        self.F = F
        self.cap = cap
        self.d = int(n_order(p, F)) if F > 1 else 1
        self.q = p**self.d
        mod = p**cap
        x = Symbol("x")
        if F <= 2:
            # theta = 1 or -1 already lies in Q_p
            w = [(-1 if F == 1 else 1) % mod, 1]
        else:
            phi = Poly(_sym_cyclotomic(F, x), x)
            _, facs = Poly(phi.as_expr(), x, modulus=p).factor_list()
            mon = []
            for fac, _mult in facs:
                cs = [int(c) % p for c in fac.all_coeffs()]
                inv = pow(cs[0], -1, p)
                mon.append(tuple((c * inv) % p for c in cs))
            mon.sort()
            fl = [list(m) for m in mon]
            lifted = dup_zz_hensel_lift(ZZ(p), [ZZ(int(c)) for c in phi.all_coeffs()], [[ZZ(c) for c in m] for m in fl], cap, ZZ)
            w = [int(c) % mod for c in reversed(lifted[0])]
        self.w = tuple(w)  # low -> high, monic of degree d
        assert len(self.w) == self.d + 1
        # theta^a for 0 <= a < max(F, 2d): rows are power-basis vectors
        size = max(F, 2 * self.d + 1)
        tab = zeros((size, self.d))
        cur = zeros(self.d)
        cur[0] = 1
        low = as_obj(self.w[: self.d])
        for a in range(size):
            tab[a] = cur
            # multiply by theta
            top = cur[self.d - 1]
            cur = np.concatenate([zeros(1), cur[: self.d - 1]])
            cur = (cur - top * low) % mod
        self.theta_pows = tab
        # Frobenius matrix: row j is phi(theta^j) = theta^(j p)
        self._frob = [None]
        fr = zeros((self.d, self.d))
        for j in range(self.d):
            fr[j] = tab[(j * p) % F] if F > 1 else tab[0]
        self._frob_base = fr
        self._frob_pows = {0: None, 1: fr}

    def frob_matrix(self, k: int) -> Optional[np.ndarray]:
        k %= self.d
        if k == 0:
            return None
        if k not in self._frob_pows:
            mod = self.p**self.cap
            m = self._frob_base
            for _ in range(k - 1):
                m = np.dot(m, self._frob_base) % mod
            self._frob_pows[k] = m
        return self._frob_pows[k]

    def reduce_columns(self, arr: np.ndarray) -> np.ndarray:
        """Reduce trailing axis (theta-degree up to 2d-2) into the power basis."""
        c = arr.shape[-1]
        if c <= self.d:
            if c == self.d:
                return arr
            out = zeros(arr.shape[:-1] + (self.d,))
            out[..., :c] = arr
            return out
        return np.dot(arr, self.theta_pows[:c])

    def __repr__(self):
        return f"UnramifiedField(p={self.p}, F={self.F}, d={self.d})"


@lru_cache(maxsize=None)
def _ramanujan_rows(p: int, n: int) -> tuple[int, ...]:
    """Trace of zeta^i from H_n to H for canonical rows i < e."""
    if n < 0:
        return (1,)
    P = p ** (n + 1)
    e = (p - 1) * p**n
    out = []
    for i in range(e):
        if i % P == 0:
            out.append(e)
        elif i % (p**n) == 0:
            out.append(-(p**n))
        else:
            out.append(0)
    return tuple(out)


@lru_cache(maxsize=None)
def _pi_basis_matrix(p: int, n: int) -> np.ndarray:
    """B[k, i] = C(i, k): zeta-basis coefficients to pi-basis coefficients."""
    e = 1 if n < 0 else (p - 1) * p**n
    B = zeros((e, e))
    for i in range(e):
        c = 1
        for k in range(i + 1):
            B[k, i] = c
            c = c * (i - k) // (k + 1)
    return B


class TowerLevel:
    """H_n = H(zeta_{p^(n+1)}); n = -1 means H."""

    def __init__(self, field: UnramifiedField, n: int):
        self.field = field
        self.n = n
        self.p = field.p
        self.d = field.d
        self.P = 1 if n < 0 else self.p ** (n + 1)
        self.e = 1 if n < 0 else (self.p - 1) * self.p**n

    def reduce_rows(self, arr: np.ndarray) -> np.ndarray:
        """Reduce a redundant row array (zeta-exponent axis first) to e rows."""
        P, e = self.P, self.e
        rows = arr.shape[0]
        if rows > P:
            pad = (-rows) % P
            if pad:
                arr = np.concatenate([arr, zeros((pad,) + arr.shape[1:])])
            arr = arr.reshape((-1, P) + arr.shape[1:]).sum(axis=0)
        elif rows < P:
            arr = np.concatenate([arr, zeros((P - rows,) + arr.shape[1:])])
        if P == e:
            return arr
        top = arr[e:P]
        out = arr[:e].copy()
        pn = self.p**self.n
        for k in range(self.p - 1):
            out[k * pn:(k + 1) * pn] -= top
        return out

    def __repr__(self):
        return f"TowerLevel(n={self.n}, e={self.e}, d={self.d})"


class TowerElem:
    """p^v * c, c an (e, d) array mod p^N. N = 0 encodes zero modulo p^v."""

    __slots__ = ("level", "c", "v", "N")

    def __init__(self, level: TowerLevel, c: np.ndarray, v: int, N: int, normalize: bool = True):
        self.level = level
        self.v = v
        self.N = max(N, 0)
        if self.N == 0:
            self.c = zeros((level.e, level.d))
        else:
            self.c = c % (level.p**self.N)
        if normalize:
            self._normalize()

    def _normalize(self):
        if self.N == 0:
            return
        p = self.level.p
        m = self.N
        for x in self.c.flat:
            if x:
                m = min(m, _vp_or(int(x), p, m))
                if m == 0:
                    return
        if m == self.N:
            self.v += self.N
            self.N = 0
            self.c = zeros((self.level.e, self.level.d))
            return
        self.c = self.c // (p**m)
        self.v += m
        self.N -= m

    # ---- constructors
    @classmethod
    def zero(cls, level: TowerLevel, absprec: int) -> "TowerElem":
        return cls(level, zeros((level.e, level.d)), absprec, 0)

    @classmethod
    def from_int(cls, level: TowerLevel, a, prec: int) -> "TowerElem":
        """A rational number known to absolute precision prec."""
        a = Fraction(a)
        p = level.p
        if a == 0:
            return cls.zero(level, prec)
        v = vp(a, p)
        u = a / Fraction(p) ** v
        N = prec - v
        if N <= 0:
            return cls.zero(level, prec)
        mod = p**N
        c = zeros((level.e, level.d))
        c[0, 0] = u.numerator * pow(u.denominator, -1, mod) % mod
        return cls(level, c, v, N)

    @classmethod
    def from_array(cls, level: TowerLevel, arr, prec: int, v: int = 0) -> "TowerElem":
        a = np.asarray(arr, dtype=object)
        c = zeros((level.e, level.d))
        c[: a.shape[0], : a.shape[1]] = a
        return cls(level, c, v, prec - v)

    @classmethod
    def zeta(cls, level: TowerLevel, k: int, prec: int) -> "TowerElem":
        red = zeros((level.P, level.d))
        red[k % level.P, 0] = 1
        return cls(level, level.reduce_rows(red), 0, prec)

    @classmethod
    def theta(cls, level: TowerLevel, a: int, prec: int) -> "TowerElem":
        c = zeros((level.e, level.d))
        f = level.field
        c[0] = f.theta_pows[a % f.F] if f.F > 1 else f.theta_pows[0]
        return cls(level, c, 0, prec)

    @classmethod
    def pi(cls, level: TowerLevel, prec: int) -> "TowerElem":
        return cls.zeta(level, 1, prec) - cls.from_int(level, 1, prec)

    # ---- basic properties
    @property
    def p(self) -> int:
        return self.level.p

    @property
    def absprec(self) -> int:
        return self.v + self.N

    def is_zero(self) -> bool:
        return self.N == 0

    def redundant(self, level: Optional[TowerLevel] = None) -> np.ndarray:
        """Rows indexed by zeta exponent mod P of `level` (default own level)."""
        lv = level or self.level
        out = zeros((lv.P, lv.d))
        step = lv.P // self.level.P if self.level.n >= 0 else lv.P
        if self.level.n < 0:
            out[0] = self.c[0]
        else:
            out[: step * self.level.e: step] = self.c
        return out

    def valuation(self) -> Fraction:
        """Exact valuation, or the absolute precision when the value is zero to precision."""
        if self.N == 0:
            return Fraction(self.absprec)
        lv = self.level
        cp = np.dot(_pi_basis_matrix(lv.p, lv.n), self.c) % (lv.p**self.N) if lv.e > 1 else self.c
        best = Fraction(self.N)
        for k in range(lv.e):
            row = cp[k]
            m = min(_vp_or(int(x), lv.p, self.N) for x in row)
            if m < self.N:
                best = min(best, Fraction(m) + Fraction(k, lv.e))
        return self.v + best

    def is_unit(self) -> bool:
        return self.valuation() == 0

    # ---- arithmetic
    def _check(self, other: "TowerElem"):
        if other.level is not self.level:
            if other.level.n == self.level.n and other.level.field is self.level.field:
                return
            raise ValueError("tower levels differ")

    def __add__(self, other):
        if not isinstance(other, TowerElem):
            other = TowerElem.from_int(self.level, other, self.absprec)
        self._check(other)
        ap = min(self.absprec, other.absprec)
        v0 = min(self.v, other.v)
        N = ap - v0
        if N <= 0:
            return TowerElem.zero(self.level, ap)
        if other.N == 0 or self.N == 0:
            x = self if other.N == 0 else other
            if ap <= x.v:
                return TowerElem.zero(self.level, ap)
            return TowerElem(self.level, x.c, x.v, ap - x.v, normalize=False)
        p = self.p
        c = self.c * (p ** (self.v - v0)) + other.c * (p ** (other.v - v0))
        return TowerElem(self.level, c, v0, N)

    __radd__ = __add__

    def __neg__(self):
        return TowerElem(self.level, -self.c, self.v, self.N, normalize=False)

    def __sub__(self, other):
        if not isinstance(other, TowerElem):
            other = TowerElem.from_int(self.level, other, self.absprec)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, a) -> "TowerElem":
        """Multiply by a rational number exactly."""
        a = Fraction(a)
        if a == 0:
            return TowerElem.zero(self.level, self.absprec + 10**6)
        k = vp(a, self.p)
        u = a / Fraction(self.p) ** k
        if self.N == 0:
            return TowerElem.zero(self.level, self.absprec + k)
        mod = self.p**self.N
        m = u.numerator * pow(u.denominator, -1, mod) % mod
        return TowerElem(self.level, self.c * m, self.v + k, self.N, normalize=False)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TowerElem):
            return NotImplemented
        self._check(other)
        lv = self.level
        if self.N == 0 or other.N == 0:
            # zero times something: absolute precision bounded by the other factor
            ap = self.absprec + other.v if self.N == 0 else other.absprec + self.v
            return TowerElem.zero(lv, ap)
        N = min(self.N, other.N)
        mod = lv.p**N
        a = self.c % mod
        b = other.c % mod
        if lv.e == 1 and lv.d == 1:
            prod = a * b
        else:
            full = convnd(a, b)
            full = lv.field.reduce_columns(full)
            prod = lv.reduce_rows(full)
        return TowerElem(lv, prod, self.v + other.v, N)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TowerElem":
        if k < 0:
            return self.inverse() ** (-k)
        out = None
        base = self
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        if out is None:
            return TowerElem.from_int(self.level, 1, max(self.N, 1))
        return out

    def mul_zeta(self, k: int) -> "TowerElem":
        red = np.roll(self.redundant(), k % self.level.P, axis=0)
        return TowerElem(self.level, self.level.reduce_rows(red), self.v, self.N, normalize=False)

    def galois(self, b: int) -> "TowerElem":
        """sigma_b: zeta -> zeta^b, identity on H."""
        lv = self.level
        if lv.n < 0:
            return self
        if b % lv.p == 0:
            raise ValueError("b must be a unit")
        red = zeros((lv.P, lv.d))
        idx = (np.arange(lv.e) * b) % lv.P
        red[idx] = self.c
        return TowerElem(lv, lv.reduce_rows(red), self.v, self.N, normalize=False)

    def frobenius(self, k: int = 1) -> "TowerElem":
        """phi^k on the H-coefficients, zeta fixed."""
        m = self.level.field.frob_matrix(k)
        if m is None or self.N == 0:
            return self
        return TowerElem(self.level, np.dot(self.c, m), self.v, self.N, normalize=False)

    def trace_to_H(self, H: "TowerLevel") -> "TowerElem":
        r = as_obj(_ramanujan_rows(self.p, self.level.n))
        vec = np.dot(r, self.c).reshape(1, -1)
        return TowerElem(H, vec, self.v, self.N)

    def lift(self, level: TowerLevel) -> "TowerElem":
        """View in a higher level of the same tower."""
        if level.n == self.level.n:
            return self
        if level.n < self.level.n:
            raise ValueError("can only lift upwards")
        red = self.redundant(level)
        return TowerElem(level, level.reduce_rows(red), self.v, self.N, normalize=False)

    def descend(self, level: TowerLevel) -> "TowerElem":
        """Inverse of lift; raises if the element is not in the smaller field."""
        if level.n == self.level.n:
            return self
        red = self.level.reduce_rows(self.redundant())
        step = self.level.P // level.P if level.n >= 0 else self.level.P
        mod = self.p**self.N
        mask = np.ones(self.level.e, dtype=bool)
        mask[::step] = False
        if level.n < 0:
            mask[:] = True
            mask[0] = False
        if any(int(x) % mod for x in red[mask].flat):
            raise ValueError("element is not in the requested subfield")
        c = red[::step][: level.e] if level.n >= 0 else red[:1]
        return TowerElem(level, c, self.v, self.N)

    def _unit_inverse(self) -> "TowerElem":
        lv = self.level
        q = lv.field.q
        target = self.N
        y = self ** (q - 2) if q > 2 else TowerElem.from_int(lv, 1, target)
        # Newton: y <- y (2 - x y); the error valuation doubles each step
        err = 1 - (self * y)
        ev = err.valuation()
        steps = 0
        while ev < target + 1 and steps < 64:
            y = y * (2 - self * y)
            err = 1 - self * y
            ev = err.valuation()
            steps += 1
        return TowerElem(lv, y.c, y.v, min(y.N, target))

    def inverse(self) -> "TowerElem":
        if self.N == 0:
            raise ZeroDivisionError("inverse of an element that is zero to precision")
        lv = self.level
        unit = TowerElem(lv, self.c, 0, self.N)
        if unit.is_unit():
            inv = unit._unit_inverse()
            return TowerElem(lv, inv.c, inv.v - self.v, inv.N)
        # non-unit in the ramified tower: strip pi^r with pi = zeta - 1, then
        # invert the unit part. pi^-1 is exact, so only O(1) digits are lost.
        r = int(unit.valuation() * lv.e)
        pinv = _pi_inverse(lv, unit.N + 3) ** r
        u = unit * pinv
        out = u._unit_inverse() * pinv
        return TowerElem(lv, out.c, out.v - self.v, out.N)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        return self * other.inverse()

    def residue_teichmuller(self) -> "TowerElem":
        """omega of the residue of a unit: the root of unity of order dividing q-1
        congruent to self modulo the maximal ideal (lies in H)."""
        lv = self.level
        if self.v != 0:
            raise ValueError("not a unit")
        cp = np.dot(_pi_basis_matrix(lv.p, lv.n), self.c) if lv.e > 1 else self.c
        r = cp[0] % lv.p
        c = zeros((lv.e, lv.d))
        c[0] = r
        t = TowerElem(lv, c, 0, self.N)
        q = lv.field.q
        for _ in range(self.N + 1):
            t = t**q
        return t

    def log(self) -> "TowerElem":
        """Iwasawa p-adic log of a unit (kills roots of unity of order prime to p)."""
        lv = self.level
        p = lv.p
        if self.valuation() != 0:
            raise ValueError("log of a non-unit")
        q = lv.field.q
        y = self ** (q - 1)
        s = max(lv.n + 1, 0)
        for _ in range(s):
            y = y**p
        z = y - 1
        vz = z.valuation()
        if vz * (p - 1) <= 1:
            # one more p-th power guarantees convergence margin
            y = y**p
            s += 1
            z = y - 1
            vz = z.valuation()
        target = self.N
        acc = z
        zk = z
        k = 1
        while True:
            k += 1
            if vz * k - _vp_or(k, p, 64) >= target + s + 2 or zk.N == 0:
                break
            zk = zk * z
            term = zk.scale(Fraction((-1) ** (k - 1), k))
            acc = acc + term
        return acc.scale(Fraction(1, (q - 1) * p**s))

    def agrees(self, other: "TowerElem", prec) -> bool:
        return (self - other).valuation() >= prec

    def __repr__(self):
        return f"TowerElem(level={self.level.n}, v={self.v}, N={self.N})"


_PI_INV: dict = {}


def _pi_inverse(lv: TowerLevel, prec: int) -> TowerElem:
    """(zeta - 1)^-1 = prod_{b != 1} (zeta^b - 1) / p, since N(zeta - 1) = p."""
    key = (id(lv.field), lv.n, prec)
    if key not in _PI_INV:
        one = TowerElem.from_int(lv, 1, prec + 1)
        acc = one
        for b in range(2, lv.P):
            if b % lv.p:
                acc = acc * (TowerElem.zeta(lv, b, prec + 1) - one)
        _PI_INV[key] = acc.scale(Fraction(1, lv.p))
    return _PI_INV[key]


class Tower:
    """The fields H_n for n = -1..n_max with the embedding j of Q(zeta_{F p^k})."""

    def __init__(self, p: int, F: int, n_max: int, prec: int):
        self.p = p
        self.F = F
        self.prec = prec
        self.field = UnramifiedField(p, F, cap=max(2 * prec + 40, 80))
        self.n_max = n_max
        self.levels = {n: TowerLevel(self.field, n) for n in range(-1, n_max + 1)}

    def level(self, n: int) -> TowerLevel:
        if n not in self.levels:
            if n > self.n_max:
                self.n_max = n
            self.levels[n] = TowerLevel(self.field, n)
        return self.levels[n]

    @property
    def H(self) -> TowerLevel:
        return self.levels[-1]

    def pi(self, n: int) -> TowerElem:
        return TowerElem.pi(self.level(n), self.prec)

    def root_exponents(self, N: int, n: int) -> tuple[int, int]:
        """j(zeta_N) = theta^a * zeta_{p^(n+1)}^b."""
        p = self.p
        k = 0
        Np = N
        while Np % p == 0:
            Np //= p
            k += 1
        if self.F % Np:
            raise ValueError(f"zeta_{N} is not in the tower (prime-to-p part must divide {self.F})")
        if k > n + 1:
            raise ValueError(f"zeta_{N} needs level >= {k - 1}")
        pk = p**k
        x = pow(pk, -1, Np) if Np > 1 else 0
        y = pow(Np, -1, pk) if pk > 1 else 0
        a = (self.F // Np) * x % self.F if Np > 1 else 0
        b = (p ** (n + 1 - k)) * y % (p ** (n + 1)) if pk > 1 else 0
        return a, b

    def root(self, N: int, k: int, n: int, prec: Optional[int] = None) -> TowerElem:
        a, b = self.root_exponents(N, n)
        lv = self.level(n)
        prec = prec or self.prec
        t = TowerElem.theta(lv, a * k, prec)
        return t.mul_zeta(b * k) if lv.n >= 0 else t

    def embed(self, x: CyclotomicNumber, n: int, prec: Optional[int] = None) -> TowerElem:
        return embed_j(x, self, n, prec)

    def frobenius(self, x: TowerElem, k: int = 1) -> TowerElem:
        return x.frobenius(k)


def build_tower(p: int, conductor: int, n_max: int, prec: int) -> Tower:
    """Tower over H = Q_p(zeta_F) with F the prime-to-p part of `conductor`.

    F = 1 is allowed and gives H = Q_p.
    """
    F = conductor
    while F % p == 0:
        F //= p
    return Tower(p, F, n_max, prec)


def embed_j(x: CyclotomicNumber, tower: Tower, n: int, prec: Optional[int] = None) -> TowerElem:
    """j: Q(zeta_N) -> H_n, zeta_N -> theta^a zeta^b as fixed by Tower.root_exponents."""
    prec = prec or tower.prec
    lv = tower.level(n)
    p = tower.p
    a, b = tower.root_exponents(x.order, n)
    den = x.den
    s = vp(den, p)
    dp = den // p**s
    work = prec + s
    mod = p**work
    scale = pow(dp, -1, mod)
    idx = np.arange(len(x.num))
    texp = (idx * a) % tower.F if tower.F > 1 else idx * 0
    zexp = (idx * b) % lv.P
    red = zeros((lv.P, lv.d))
    tp = tower.field.theta_pows
    for i, cval in enumerate(x.num):
        if cval:
            red[zexp[i]] += (int(cval) % mod) * tp[texp[i]]
    c = lv.reduce_rows(red) * scale
    return TowerElem(lv, c, -s, work)
