"""Exact arithmetic in cyclotomic fields, Dirichlet characters and group rings.

Elements of Q(zeta_N) are kept as integer numerator vectors in the power
basis 1, z, ..., z^(phi(N)-1) over one positive common denominator.
Nothing here is floating point except the explicit complex embeddings.
"""

from __future__ import annotations

import cmath
import math
import threading
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product as iproduct
from typing import Callable, Iterable, Optional

import numpy as np
from sympy import Poly, QQ, Symbol, primitive_root
from sympy import cyclotomic_poly as _sym_cyclotomic
from sympy.ntheory import factorint

from ._kernels import as_obj, conv_signed, zeros

__all__ = [
    "CyclotomicNumber",
    "bernoulli_number",
    "bernoulli_poly",
    "scaled_bernoulli",
    "DirichletCharacter",
    "character_table",
    "generalized_bernoulli",
    "l_value_nonpositive",
    "gauss_sum",
    "complex_embed",
    "l_value_at_one",
    "FiniteAbelianGroup",
    "UnitGroupModSign",
    "CyclicProductGroup",
    "GroupCharacter",
    "GroupRingElem",
    "ExactRing",
    "ComplexRing",
    "group_ring_fourier",
    "character_eval",
]


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def radical(n: int) -> int:
    return reduce(lambda x, y: x * y, factorint(n).keys(), 1)


@lru_cache(maxsize=None)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, constant term first."""
    x = Symbol("x")
    return tuple(int(c) for c in reversed(Poly(_sym_cyclotomic(n, x), x).all_coeffs()))


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    out = 1
    for q, e in factorint(n).items():
        out *= (q - 1) * q ** (e - 1)
    return out


def _reduce_vector(order: int, vec: np.ndarray) -> np.ndarray:
    """Reduce an integer vector (any length) modulo Phi_order.

    Phi_N(x) = Phi_rad(x^s) with s = N / rad(N), so the division splits into
    s independent reductions of polynomials in x^s, done as row operations.
    """
    n = order
    if vec.shape[0] > n:
        pad = (-vec.shape[0]) % n
        if pad:
            vec = np.concatenate([vec, zeros(pad)])
        vec = vec.reshape(-1, n).sum(axis=0)
    elif vec.shape[0] < n:
        vec = np.concatenate([vec, zeros(n - vec.shape[0])])
    else:
        vec = vec.copy()
    rad = radical(n) if n > 1 else 1
    s = n // rad
    pcoef = cyclotomic_coeffs(rad)
    r = len(pcoef) - 1
    mat = vec.reshape(rad, s)
    nz = [(k, c) for k, c in enumerate(pcoef[:-1]) if c]
    for q in range(rad - 1, r - 1, -1):
        row = mat[q]
        if not any(row):
            continue
        for k, c in nz:
            mat[q - r + k] = mat[q - r + k] - c * row
        mat[q] = 0
    return mat[:r].reshape(-1)


class CyclotomicNumber:
    """An element of Q(zeta_order), zeta_order = exp(2 pi i / order) under complex_embed."""

    __slots__ = ("order", "num", "den")

    def __init__(self, order: int, num: np.ndarray, den: int = 1):
        # trusted constructor: num already reduced, length phi(order)
        self.order = order
        g = math.gcd(den, *[int(x) for x in num]) if len(num) else den
        if den < 0:
            g = -g
        if g not in (0, 1):
            num = np.array([int(x) // g for x in num], dtype=object)
            den //= g
        self.num = num
        self.den = den

    # ---- constructors
    @classmethod
    def from_coeffs(cls, order: int, coeffs: Iterable) -> "CyclotomicNumber":
        cs = [Fraction(c) for c in coeffs]
        den = reduce(_lcm, (c.denominator for c in cs), 1)
        vec = as_obj([c.numerator * (den // c.denominator) for c in cs]) if cs else zeros(1)
        return cls(order, _reduce_vector(order, vec), den)

    @classmethod
    def from_int_vector(cls, order: int, vec: np.ndarray, den: int = 1) -> "CyclotomicNumber":
        return cls(order, _reduce_vector(order, vec), den)

    @classmethod
    def rational(cls, q, order: int = 1) -> "CyclotomicNumber":
        q = Fraction(q)
        vec = zeros(euler_phi(order))
        vec[0] = q.numerator
        return cls(order, vec, q.denominator)

    @classmethod
    def zero(cls, order: int = 1) -> "CyclotomicNumber":
        return cls(order, zeros(euler_phi(order)), 1)

    @classmethod
    def one(cls, order: int = 1) -> "CyclotomicNumber":
        return cls.rational(1, order)

    @classmethod
    def root(cls, order: int, k: int = 1) -> "CyclotomicNumber":
        vec = zeros(order)
        vec[k % order] = 1
        return cls.from_int_vector(order, vec)

    # ---- structure
    @property
    def coeffs(self) -> list[Fraction]:
        return [Fraction(int(c), self.den) for c in self.num]

    def embed(self, order: int) -> "CyclotomicNumber":
        """View in Q(zeta_order) via zeta_self = zeta_order^(order/self.order)."""
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"Q(zeta_{self.order}) is not inside Q(zeta_{order})")
        step = order // self.order
        vec = zeros(order)
        vec[: step * len(self.num): step] = self.num
        return CyclotomicNumber.from_int_vector(order, vec, self.den)

    def _lift(self, other: "CyclotomicNumber"):
        n = _lcm(self.order, other.order)
        return self.embed(n), other.embed(n), n

    def redundant(self, order: Optional[int] = None) -> np.ndarray:
        """Length-N numerator vector (not reduced), N = order or self.order."""
        a = self.embed(order) if order else self
        vec = zeros(a.order)
        vec[: len(a.num)] = a.num
        return vec

    def galois(self, c: int) -> "CyclotomicNumber":
        """Apply zeta -> zeta^c (c prime to the order)."""
        if math.gcd(c, self.order) != 1:
            raise ValueError("Galois exponent must be a unit")
        vec = zeros(self.order)
        idx = (np.arange(len(self.num)) * c) % self.order
        np.add.at(vec, idx, self.num)
        return CyclotomicNumber.from_int_vector(self.order, vec, self.den)

    def conj(self) -> "CyclotomicNumber":
        return self.galois(-1)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return Fraction(int(self.num[0]), self.den)

    def to_complex(self) -> complex:
        n = self.order
        total = 0j
        scale = self.den
        big = max((abs(int(c)) for c in self.num), default=0)
        if big.bit_length() > 900 or scale.bit_length() > 900:
            import mpmath

            with mpmath.workdps(30):
                acc = mpmath.mpc(0)
                for i, c in enumerate(self.num):
                    if c:
                        acc += mpmath.mpf(int(c)) * mpmath.expjpi(mpmath.mpf(2 * i) / n)
                acc /= scale
                return complex(acc)
        for i, c in enumerate(self.num):
            if c:
                total += int(c) * cmath.exp(2j * math.pi * i / n)
        return total / scale

    # ---- arithmetic
    def _coerce(self, other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.rational(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, n = self._lift(other)
        den = _lcm(a.den, b.den)
        return CyclotomicNumber(n, a.num * (den // a.den) + b.num * (den // b.den), den)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.order, -self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CyclotomicNumber(self.order, self.num * q.numerator, self.den * q.denominator)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        a, b, n = self._lift(other)
        if a.is_rational():
            return CyclotomicNumber(n, b.num * int(a.num[0]), a.den * b.den)
        if b.is_rational():
            return CyclotomicNumber(n, a.num * int(b.num[0]), a.den * b.den)
        prod = conv_signed(a.num, b.num)
        return CyclotomicNumber(n, _reduce_vector(n, prod), a.den * b.den)

    __rmul__ = __mul__

    def mul_root(self, k: int, order: Optional[int] = None) -> "CyclotomicNumber":
        """Multiply by zeta_order^k (a cheap rotation)."""
        n = _lcm(self.order, order or self.order)
        vec = np.roll(self.redundant(n), (k * (n // (order or n))) % n)
        return CyclotomicNumber.from_int_vector(n, vec, self.den)

    def inv(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return CyclotomicNumber.rational(1 / self.to_fraction(), self.order)
        x = Symbol("x")
        f = Poly([int(c) for c in reversed(list(self.num))], x, domain=QQ)
        m = Poly(list(reversed(cyclotomic_coeffs(self.order))), x, domain=QQ)
        g = f.invert(m)
        cs = [Fraction(int(c.p), int(c.q)) for c in reversed(g.all_coeffs())]
        return CyclotomicNumber.from_coeffs(self.order, cs) * self.den

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * other.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = CyclotomicNumber.one(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, _ = self._lift(other)
        return all(int(x) * b.den == int(y) * a.den for x, y in zip(a.num, b.num))

    __hash__ = None

    def __repr__(self):
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"CyclotomicNumber({self.order}: {' + '.join(terms) or '0'})"


# ---------------------------------------------------------------- Bernoulli

_bern_lock = threading.Lock()
_BERN: list[Fraction] = [Fraction(1), Fraction(-1, 2)]


def bernoulli_number(k: int) -> Fraction:
    """B_k with B_1 = -1/2."""
    if k < 0:
        raise ValueError("negative index")
    if k >= 3 and k % 2:
        return Fraction(0)
    with _bern_lock:
        while len(_BERN) <= k:
            m = len(_BERN)
            if m >= 3 and m % 2:
                _BERN.append(Fraction(0))
                continue
            acc = Fraction(0)
            binom = 1
            for j in range(m):
                if _BERN[j]:
                    acc += binom * _BERN[j]
                binom = binom * (m + 1 - j) // (j + 1)
            _BERN.append(-acc / (m + 1))
        return _BERN[k]


def bernoulli_poly(k: int, x) -> Fraction:
    """B_k(x) = sum_j C(k,j) B_j x^(k-j)."""
    x = Fraction(x)
    acc = Fraction(0)
    binom = 1
    for j in range(k + 1):
        b = bernoulli_number(j)
        if b:
            acc += binom * b * x ** (k - j)
        binom = binom * (k - j) // (j + 1)
    return acc


@lru_cache(maxsize=64)
def _bern_int_coeffs(k: int) -> tuple[int, tuple[int, ...]]:
    den = 1
    for j in range(k + 1):
        den = _lcm(den, bernoulli_number(j).denominator)
    out = []
    binom = 1
    for j in range(k + 1):
        out.append(int(binom * bernoulli_number(j) * den))
        binom = binom * (k - j) // (j + 1)
    return den, tuple(out)


def scaled_bernoulli(k: int, f: int) -> list[Fraction]:
    """[f^(k-1) B_k(a/f) for a = 1..f], evaluated with integer Horner steps."""
    den, cs = _bern_int_coeffs(k)
    # f^(k-1) B_k(a/f) = (1/(den f)) sum_j cs_j f^j a^(k-j)
    poly = [cs[j] * f**j for j in range(k + 1)]  # coefficient of a^(k-j)
    out = []
    for a in range(1, f + 1):
        acc = 0
        for c in poly:
            acc = acc * a + c
        out.append(Fraction(acc, den * f))
    return out


# ------------------------------------------------------- Dirichlet characters


@lru_cache(maxsize=None)
def _unit_structure(f: int):
    """(orders, gens, log table) for (Z/f)^x as a product of cyclic groups."""
    comps: list[tuple[int, int]] = []  # (order, generator mod f)
    for q, e in sorted(factorint(f).items()):
        qe = q**e
        rest = f // qe

        def lift(g):
            # x = g mod qe, 1 mod rest
            if rest == 1:
                return g % f
            t = ((g - 1) * pow(rest, -1, qe)) % qe
            return (1 + rest * t) % f

        if q == 2:
            if e == 2:
                comps.append((2, lift(-1)))
            elif e >= 3:
                comps.append((2, lift(-1)))
                comps.append((2 ** (e - 2), lift(5)))
        else:
            comps.append(((q - 1) * q ** (e - 1), lift(int(primitive_root(qe)))))
    orders = tuple(o for o, _ in comps)
    gens = tuple(g for _, g in comps)
    logs: dict[int, tuple[int, ...]] = {}
    for ks in iproduct(*[range(o) for o in orders]):
        x = 1 % f if f > 1 else 0
        for g, k in zip(gens, ks):
            x = x * pow(g, k, f) % f if f > 1 else 0
        logs[x] = ks
    return orders, gens, logs


class DirichletCharacter:
    """A Dirichlet character mod `modulus` with values zeta_E^k.

    `exps[a]` is the exponent k for a unit a, or None when gcd(a, modulus) > 1.
    E is always the exact order of the character.
    """

    __slots__ = ("modulus", "E", "exps", "_conductor", "_primitive")

    def __init__(self, modulus: int, E: int, exps):
        exps = list(exps)
        o = 1
        for k in exps:
            if k is not None:
                o = _lcm(o, E // math.gcd(E, k % E))
        self.modulus = modulus
        self.E = o
        self.exps = tuple(None if k is None else (k % E) * o // E for k in exps)
        self._conductor = None
        self._primitive = None

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus, 1, [0 if math.gcd(a, modulus) == 1 else None for a in range(modulus)])

    def __call__(self, a: int) -> Optional[int]:
        return self.exps[a % self.modulus]

    def value(self, a: int) -> CyclotomicNumber:
        k = self(a)
        if k is None:
            return CyclotomicNumber.zero()
        return CyclotomicNumber.root(self.E, k)

    def complex_value(self, a: int) -> complex:
        k = self(a)
        return 0j if k is None else cmath.exp(2j * math.pi * k / self.E)

    @property
    def key(self):
        return (self.modulus, self.exps)

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"DirichletCharacter(mod {self.modulus}, order {self.E}, conductor {self.conductor})"

    def is_trivial(self) -> bool:
        return self.E == 1

    def is_even(self) -> bool:
        return self(-1) == 0

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = _lcm(self.modulus, other.modulus)
        E = _lcm(self.E, other.E)
        exps = []
        for a in range(m):
            x, y = self(a), other(a)
            exps.append(None if x is None or y is None else x * (E // self.E) + y * (E // other.E))
        return DirichletCharacter(m, E, exps)

    def __pow__(self, k: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, self.E, [None if x is None else x * k for x in self.exps])

    def conj(self) -> "DirichletCharacter":
        return self ** (-1)

    def induce(self, modulus: int) -> "DirichletCharacter":
        if modulus % self.modulus:
            raise ValueError("new modulus must be a multiple")
        return DirichletCharacter(
            modulus, self.E,
            [self(a) if math.gcd(a, modulus) == 1 else None for a in range(modulus)],
        )

    @property
    def conductor(self) -> int:
        if self._conductor is None:
            f = self.modulus
            best = f
            for d in sorted(_divisors(f)):
                ok = True
                for a in range(1, f, d) if f > 1 else []:
                    if math.gcd(a, f) == 1 and self(a) != 0:
                        ok = False
                        break
                if ok:
                    best = d
                    break
            self._conductor = best
        return self._conductor

    def primitive(self) -> "DirichletCharacter":
        if self._primitive is None:
            fc = self.conductor
            if fc == self.modulus:
                self._primitive = self
            else:
                exps = []
                for b in range(fc):
                    if math.gcd(b, fc) != 1:
                        exps.append(None)
                        continue
                    a = b
                    while math.gcd(a, self.modulus) != 1:
                        a += fc
                    exps.append(self(a))
                self._primitive = DirichletCharacter(fc, self.E, exps)
        return self._primitive

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus


@lru_cache(maxsize=None)
def _divisors(n: int) -> tuple[int, ...]:
    ds = [1]
    for q, e in factorint(n).items():
        ds = [d * q**k for d in ds for k in range(e + 1)]
    return tuple(sorted(ds))


@lru_cache(maxsize=None)
def character_table(f: int) -> tuple[DirichletCharacter, ...]:
    """All phi(f) Dirichlet characters mod f, in a fixed order."""
    orders, _gens, logs = _unit_structure(f)
    E = reduce(_lcm, orders, 1)
    out = []
    for ks in iproduct(*[range(o) for o in orders]):
        exps: list[Optional[int]] = [None] * f
        for a, lg in logs.items():
            exps[a] = sum(k * l * (E // o) for k, l, o in zip(ks, lg, orders)) % E if orders else 0
        if f == 1:
            exps = [0]
        out.append(DirichletCharacter(f, E, exps))
    return tuple(out)


def generalized_bernoulli(chi: DirichletCharacter, k: int) -> CyclotomicNumber:
    """B_{k,chi} for the primitive character attached to chi."""
    chi = chi.primitive()
    f = chi.modulus
    vals = scaled_bernoulli(k, f)
    den = reduce(_lcm, (v.denominator for v in vals), 1)
    vec = zeros(chi.E)
    for a, v in zip(range(1, f + 1), vals):
        e = chi(a)
        if e is not None:
            vec[e] += v.numerator * (den // v.denominator)
    return CyclotomicNumber.from_int_vector(chi.E, vec, den)


def l_value_nonpositive(chi: DirichletCharacter, m: int) -> CyclotomicNumber:
    """L(m, chi) = -B_{1-m,chi}/(1-m) for m <= 0, chi primitive."""
    if m > 0:
        raise ValueError("m must be <= 0")
    k = 1 - m
    return generalized_bernoulli(chi, k) * Fraction(-1, k)


def gauss_sum(chi: DirichletCharacter, power: int = -1,
              primitive: bool = True) -> CyclotomicNumber:
    """sum over units b mod f of zeta_f^b chi(b)^power.

    By default chi is first replaced by its primitive character, so f is the
    conductor; with primitive=False the sum runs over the modulus of chi.
    power = -1 is the default convention (the sum pairs zeta^b with the
    inverse character value).
    """
    if primitive:
        chi = chi.primitive()
    f = chi.modulus
    n = _lcm(f, chi.E)
    vec = zeros(n)
    for b in range(f):
        e = chi(b)
        if e is None:
            continue
        vec[(b * (n // f) + power * e * (n // chi.E)) % n] += 1
    return CyclotomicNumber.from_int_vector(n, vec)


def complex_embed(x) -> complex:
    """Principal complex embedding zeta_N -> exp(2 pi i / N)."""
    if isinstance(x, CyclotomicNumber):
        return x.to_complex()
    return complex(x)


def l_value_at_one(chi: DirichletCharacter) -> complex:
    """L(1, chi) for even nontrivial chi through the log-sine closed form."""
    chi = chi.primitive()
    if chi.is_trivial() or not chi.is_even():
        raise ValueError("needs an even nontrivial character")
    f = chi.modulus
    g = complex_embed(gauss_sum(chi.conj()))
    s = 0j
    for a in range(1, f):
        e = chi(a)
        if e is not None:
            s += cmath.exp(-2j * math.pi * e / chi.E) * math.log(abs(1 - cmath.exp(2j * math.pi * a / f)))
    return -g / f * s


# ------------------------------------------------------------- groups, rings


class GroupCharacter:
    """A character of a finite abelian group: sigma -> zeta_E^exp(sigma)."""

    __slots__ = ("group", "E", "exps", "dirichlet", "label")

    def __init__(self, group, E: int, exps: dict, dirichlet=None, label=None):
        self.group = group
        self.E = E
        self.exps = exps
        self.dirichlet = dirichlet
        self.label = label

    def __call__(self, sigma) -> int:
        return self.exps[sigma]

    def is_trivial(self) -> bool:
        return all(v == 0 for v in self.exps.values())

    def __repr__(self):
        return f"GroupCharacter({self.label!r}, order {self.E})"


class FiniteAbelianGroup:
    """Minimal interface: elements, mul, inv, identity, characters."""

    elements: list
    identity: object

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def characters(self) -> list[GroupCharacter]:
        raise NotImplementedError

    @property
    def order(self) -> int:
        return len(self.elements)

    def exponent(self) -> int:
        return reduce(_lcm, (c.E for c in self.characters()), 1)


class CyclicProductGroup(FiniteAbelianGroup):
    """Z/n_1 x ... x Z/n_r with tuple elements."""

    def __init__(self, orders):
        self.orders = tuple(orders)
        self.elements = list(iproduct(*[range(o) for o in self.orders]))
        self.identity = tuple(0 for _ in self.orders)
        self._chars = None

    def mul(self, a, b):
        return tuple((x + y) % o for x, y, o in zip(a, b, self.orders))

    def inv(self, a):
        return tuple((-x) % o for x, o in zip(a, self.orders))

    def characters(self):
        if self._chars is None:
            E = reduce(_lcm, self.orders, 1)
            chars = []
            for ks in self.elements:
                exps = {
                    g: sum(k * x * (E // o) for k, x, o in zip(ks, g, self.orders)) % E
                    for g in self.elements
                }
                chars.append(GroupCharacter(self, E, exps, label=ks))
            self._chars = chars
        return self._chars


class UnitGroupModSign(FiniteAbelianGroup):
    """(Z/f)^x / {+1,-1}, labelled by the representative min(c, f - c)."""

    def __init__(self, f: int):
        self.f = f
        reps = sorted({self.canon(c) for c in range(1, max(f, 2)) if math.gcd(c, f) == 1})
        self.elements = reps if f > 2 else [1]
        self.identity = 1
        self._chars = None

    def canon(self, c: int) -> int:
        if self.f <= 2:
            return 1
        c %= self.f
        return min(c, self.f - c)

    def mul(self, a, b):
        return self.canon(a * b)

    def inv(self, a):
        return self.canon(pow(a, -1, self.f)) if self.f > 2 else 1

    def characters(self) -> list[GroupCharacter]:
        if self._chars is None:
            chars = []
            for chi in character_table(self.f):
                if not chi.is_even():
                    continue
                exps = {s: (chi(s) if self.f > 2 else 0) for s in self.elements}
                # short stable tag: position among even characters and conductor
                tag = f"{len(chars)}:f{chi.conductor}"
                chars.append(GroupCharacter(self, chi.E, exps, dirichlet=chi, label=tag))
            self._chars = chars
        return self._chars

    def project_label(self, c: int, target: "UnitGroupModSign") -> int:
        return target.canon(c)


class ExactRing:
    """Coefficient ring Q(zeta) for group-ring elements."""

    name = "exact"

    def zero(self):
        return CyclotomicNumber.zero()

    def root(self, E: int, k: int):
        return CyclotomicNumber.root(E, k)

    def scalar(self, q):
        return CyclotomicNumber.rational(q)


class ComplexRing:
    name = "complex"

    def zero(self):
        return 0j

    def root(self, E: int, k: int):
        return cmath.exp(2j * math.pi * k / E)

    def scalar(self, q):
        return complex(q)


class GroupRingElem:
    """sum_sigma a_sigma sigma in R[G]."""

    __slots__ = ("group", "coeffs", "ring")

    def __init__(self, group: FiniteAbelianGroup, coeffs: dict, ring):
        self.group = group
        self.ring = ring
        self.coeffs = {g: coeffs.get(g, ring.zero()) for g in group.elements}

    def __getitem__(self, sigma):
        return self.coeffs[sigma]

    def __add__(self, other: "GroupRingElem"):
        return GroupRingElem(self.group, {g: self.coeffs[g] + other.coeffs[g] for g in self.group.elements}, self.ring)

    def __sub__(self, other: "GroupRingElem"):
        return GroupRingElem(self.group, {g: self.coeffs[g] - other.coeffs[g] for g in self.group.elements}, self.ring)

    def __neg__(self):
        return GroupRingElem(self.group, {g: -v for g, v in self.coeffs.items()}, self.ring)

    def scale(self, c):
        return GroupRingElem(self.group, {g: v * c for g, v in self.coeffs.items()}, self.ring)

    def __mul__(self, other):
        if not isinstance(other, GroupRingElem):
            return self.scale(other)
        out = {g: self.ring.zero() for g in self.group.elements}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                ab = self.group.mul(a, b)
                out[ab] = out[ab] + x * y
        return GroupRingElem(self.group, out, self.ring)

    def map(self, fn: Callable) -> "GroupRingElem":
        return GroupRingElem(self.group, {g: fn(v) for g, v in self.coeffs.items()}, self.ring)

    def map_ring(self, fn: Callable, ring) -> "GroupRingElem":
        return GroupRingElem(self.group, {g: fn(v) for g, v in self.coeffs.items()}, ring)

    def project(self, target: FiniteAbelianGroup, proj: Callable) -> "GroupRingElem":
        out = {g: self.ring.zero() for g in target.elements}
        for g, v in self.coeffs.items():
            h = proj(g)
            out[h] = out[h] + v
        return GroupRingElem(target, out, self.ring)

    def character(self, chi: GroupCharacter):
        return character_eval(self, chi)

    def __repr__(self):
        return f"GroupRingElem(|G|={self.group.order}, ring={self.ring.name})"


def character_eval(x: GroupRingElem, chi: GroupCharacter):
    """chi(x) = sum_sigma a_sigma chi(sigma)."""
    if isinstance(x.ring, ExactRing):
        vals = list(x.coeffs.items())
        n = reduce(_lcm, (v.order for _, v in vals), chi.E)
        den = reduce(_lcm, (v.den for _, v in vals), 1)
        acc = zeros(n)
        for g, v in vals:
            if v.is_zero():
                continue
            vec = v.redundant(n) * (den // v.den)
            acc = acc + np.roll(vec, chi(g) * (n // chi.E))
        return CyclotomicNumber.from_int_vector(n, acc, den)
    acc = x.ring.zero()
    for g, v in x.coeffs.items():
        acc = acc + v * x.ring.root(chi.E, chi(g))
    return acc


def group_ring_fourier(values: dict, group: FiniteAbelianGroup, ring) -> GroupRingElem:
    """Inverse Fourier transform: a_sigma = |G|^-1 sum_chi values[chi] chi(sigma)^-1.

    `values` maps the index of each character in group.characters() to its value.
    """
    chars = group.characters()
    order = group.order
    if isinstance(ring, ExactRing):
        n = reduce(_lcm, (values[i].order for i in range(len(chars))), 1)
        n = reduce(_lcm, (c.E for c in chars), n)
        den = reduce(_lcm, (values[i].den for i in range(len(chars))), 1)
        vecs = [values[i].redundant(n) * (den // values[i].den) for i in range(len(chars))]
        coeffs = {}
        for g in group.elements:
            acc = zeros(n)
            for c, vec in zip(chars, vecs):
                acc = acc + np.roll(vec, (-c(g) * (n // c.E)) % n)
            coeffs[g] = CyclotomicNumber.from_int_vector(n, acc, den * order)
        return GroupRingElem(group, coeffs, ring)
    coeffs = {}
    for g in group.elements:
        acc = ring.zero()
        for i, c in enumerate(chars):
            acc = acc + values[i] * ring.root(c.E, -c(g))
        coeffs[g] = acc * ring.scalar(Fraction(1, order))
    return GroupRingElem(group, coeffs, ring)
