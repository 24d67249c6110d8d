"""Norm-coherent sequences, Coleman power series and the twisted L-map.

The cyclotomic Coleman series has the closed form
    g(X) = 2 - C (1+X)^A - C^-1 (1+X)^-A,
C a root of unity in H and A in Z_p, so everything about g is kept as an
"exponential polynomial" sum_k a_k (1+X)^(k A). Substitutions X -> (1+X)^p - 1
and evaluations at zeta - 1 are then exact; power-series truncation only
happens when a genuine series (an inverse or a log) is formed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from ._kernels import zeros
from .exact_cyclotomic import CyclotomicNumber, GroupRingElem, UnitGroupModSign
from .padic_tower import Tower, TowerElem, TowerLevel, _vp_or, embed_j, teichmuller_split
from .series_measures import (
    BoundedSeries,
    FiniteLevelMeasure,
    apply_operator,
    eval_at_unit_root,
    finite_level_measure,
    integrate_kernel,
)

__all__ = [
    "CyclotomicUnitSequence",
    "ExpPoly",
    "ColemanSeries",
    "coleman_series_of",
    "verify_norm_relation",
    "g_star_h_star",
    "cw_delta",
    "TowerRing",
    "L_map",
    "regulator_p",
    "ExplicitLocalSequence",
    "semilocal_regulator",
    "semilocal_L0",
    "semilocal_L_map",
    "pointwise_measure",
    "theta_projected_series",
    "idempotent_e",
    "group_ring_det",
    "WedgeElement",
]


def _crt(a: int, m: int, b: int, n: int) -> int:
    """x = a mod m, x = b mod n (coprime moduli)."""
    if m == 1:
        return b % n
    if n == 1:
        return a % m
    return (a + m * ((b - a) * pow(m, -1, n))) % (m * n)


class CyclotomicUnitSequence:
    """eps_k = (1 - zeta_{f_k}^s)(1 - zeta_{f_k}^-s), f_k = f' p^(k+1), with s = c mod f'
    and s = kappa mod p^(k+1): the sigma-conjugate of the basic sequence for
    sigma = (c, kappa) in (Z/f')^x x Z_p^x. Level -1 uses zeta_{f'}^c."""

    def __init__(self, p: int, fprime: int, c: int = 1, kappa: int = 1):
        if math.gcd(c, fprime) != 1 or kappa % p == 0:
            raise ValueError("sigma must be a unit")
        self.p = p
        self.fprime = fprime
        self.c = c % fprime
        self.kappa = kappa

    def modulus(self, k: int) -> int:
        return self.fprime * self.p ** (k + 1)

    def exponent(self, k: int) -> int:
        if k < 0:
            return self.c
        return _crt(self.c, self.fprime, self.kappa, self.p ** (k + 1))

    def exact(self, k: int) -> CyclotomicNumber:
        f = self.modulus(k)
        s = self.exponent(k)
        one = CyclotomicNumber.one(f)
        return (one - CyclotomicNumber.root(f, s)) * (one - CyclotomicNumber.root(f, -s))

    def tower_value(self, k: int, tower: Tower, prec: Optional[int] = None) -> TowerElem:
        return embed_j(self.exact(k), tower, k, prec)

    def conjugate(self, c: int, kappa: int) -> "CyclotomicUnitSequence":
        return CyclotomicUnitSequence(self.p, self.fprime, self.c * c, self.kappa * kappa)

    def to_record(self) -> str:
        return f"CYCLOTOMIC_SEQUENCE v1 p={self.p} fprime={self.fprime} c={self.c} kappa={self.kappa}\n"

    @classmethod
    def from_record(cls, text: str) -> "CyclotomicUnitSequence":
        head, ver, *fields = text.split()
        if (head, ver) != ("CYCLOTOMIC_SEQUENCE", "v1"):
            raise ValueError("not a cyclotomic sequence record")
        kw = dict(f.split("=") for f in fields)
        return cls(int(kw["p"]), int(kw["fprime"]), int(kw["c"]), int(kw["kappa"]))

    def __repr__(self):
        return f"CyclotomicUnitSequence(p={self.p}, f'={self.fprime}, sigma=({self.c}, {self.kappa}))"


def verify_norm_relation(seq: CyclotomicUnitSequence, k: int) -> bool:
    """Exact check N_{K_(k+1)/K_k}(eps_(k+1)) = eps_k in Q(zeta_{f_(k+1)})."""
    top = seq.exact(k + 1)
    fk = seq.modulus(k)
    f1 = seq.modulus(k + 1)
    prod = CyclotomicNumber.one(f1)
    for j in range(seq.p):
        prod = prod * top.galois(1 + j * fk)
    return prod == seq.exact(k).embed(f1)


def verify_norm_relation_tower(seq: CyclotomicUnitSequence, k: int, tower: Tower) -> Fraction:
    """Same relation after j, with the local Galois group of H_(k+1)/H_k."""
    top = seq.tower_value(k + 1, tower)
    prod = None
    for j in range(seq.p):
        s = top.galois(1 + j * seq.p ** (k + 1))
        prod = s if prod is None else prod * s
    low = prod.descend(tower.level(k))
    return (low - seq.tower_value(k, tower)).valuation()


# -------------------------------------------------------- exponential polynomials


def _binom_row(A: int, D: int, mod: int) -> list[int]:
    """C(A, i) mod `mod` for i = 0..D, A an exact (possibly huge) integer."""
    out = [1 % mod]
    b = 1
    for i in range(1, D + 1):
        b = b * (A - i + 1) // i
        out.append(b % mod)
    return out


class ExpPoly:
    """sum_k a_k (1+X)^(k A), a_k in a tower level, A in Z_p (kept mod p^K)."""

    def __init__(self, level: TowerLevel, A: Fraction, terms: dict, prec: int):
        self.level = level
        self.A = Fraction(A)
        self.terms = terms
        self.prec = prec

    @property
    def p(self) -> int:
        return self.level.p

    def _exp_int(self, k: int, K: int) -> int:
        """Nonnegative integer congruent to k A mod p^K."""
        mod = self.p**K
        a = self.A
        val = a.numerator * pow(a.denominator, -1, mod) % mod
        return (k * val) % mod

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out: dict = {}
        for k1, a1 in self.terms.items():
            for k2, a2 in other.terms.items():
                k = k1 + k2
                out[k] = a1 * a2 if k not in out else out[k] + a1 * a2
        return ExpPoly(self.level, self.A, out, min(self.prec, other.prec))

    def __pow__(self, e: int) -> "ExpPoly":
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def compose_power(self, m: int) -> "ExpPoly":
        """X -> (1+X)^m - 1."""
        return ExpPoly(self.level, self.A * m, dict(self.terms), self.prec)

    def frobenius(self, k: int = 1) -> "ExpPoly":
        return ExpPoly(self.level, self.A, {e: a.frobenius(k) for e, a in self.terms.items()}, self.prec)

    def evaluate(self, n: int, tower: Tower, u: int = 1) -> TowerElem:
        """Exact value at zeta_n^u - 1: (1+X)^(kA) becomes zeta_n^(u k A)."""
        lv = tower.level(n)
        acc = None
        for k, a in sorted(self.terms.items()):
            al = a.lift(lv)
            term = al.mul_zeta(u * self._exp_int(k, n + 1)) if n >= 0 else al
            acc = term if acc is None else acc + term
        return acc

    def twist(self, zeta_exp: int, n: int, tower: Tower) -> "ExpPoly":
        """X -> zeta^e (1+X) - 1 with zeta = zeta_{p^(n+1)}."""
        lv = tower.level(n)
        return ExpPoly(lv, self.A, {k: a.lift(lv).mul_zeta(zeta_exp * self._exp_int(k, n + 1))
                                    for k, a in self.terms.items()}, self.prec)

    def truncated(self, D: int) -> BoundedSeries:
        """sum_k a_k sum_{i <= D} C(kA, i) X^i, certified to degree D (tail >= 0)."""
        lv = self.level
        p = self.p
        # binomials of p-adic exponents: exact integer lift good modulo p^(prec + v_p(D!))
        vfact = sum(D // p**j for j in range(1, 64) if p**j <= D)
        K = self.prec + vfact + 4
        mod = p ** (self.prec + 2)
        elems = None
        for k, a in sorted(self.terms.items()):
            row = _binom_row(self._exp_int(k, K), D, mod)
            c = zeros((D + 1, lv.e, lv.d))
            for i, b in enumerate(row):
                c[i] = a.c * b
            s = BoundedSeries(lv, c, a.v, min(a.N, self.prec - a.v), Fraction(0))
            elems = s if elems is None else elems + s
        return elems


class ColemanSeries:
    """Coleman series of a cyclotomic unit sequence, with its exp-polynomial form."""

    def __init__(self, seq: CyclotomicUnitSequence, tower: Tower, prec: int):
        self.seq = seq
        self.tower = tower
        self.prec = prec
        p, fp = seq.p, seq.fprime
        H = tower.H
        # C = j(zeta_f')^(c p^-1), A = kappa / f'
        cexp = seq.c * pow(p, -1, fp) % fp
        N_root = fp
        self.C = tower.root(N_root, cexp, -1, prec)
        self.Cinv = tower.root(N_root, -cexp, -1, prec)
        self.A = Fraction(seq.kappa, fp)
        two = TowerElem.from_int(H, 2, prec)
        self.exp = ExpPoly(H, self.A, {0: two, 1: -self.C, -1: -self.Cinv}, prec)

    def level_value(self, k: int) -> TowerElem:
        """phi^-k g(pi_k); should equal j(eps_k). k = -1 gives phi(g(0))."""
        if k < 0:
            return self.exp.evaluate(-1, self.tower).frobenius(1)
        return self.exp.evaluate(k, self.tower).frobenius(-k)

    def series(self, D: int) -> BoundedSeries:
        return self.exp.truncated(D)

    def check_levels(self, kmax: int) -> Fraction:
        """Smallest valuation of phi^-k g(pi_k) - j(eps_k) over k = -1..kmax."""
        worst = Fraction(10**6)
        for k in range(-1, kmax + 1):
            diff = self.level_value(k) - self.seq.tower_value(k, self.tower, self.prec)
            worst = min(worst, diff.valuation())
        return worst

    def check_relation(self) -> Fraction:
        """prod_{zeta in mu_p} g(zeta(1+X) - 1) = (phi g)((1+X)^p - 1), as exp-polynomials."""
        t = self.tower
        lhs = None
        for j in range(self.seq.p):
            tw = self.exp.twist(j, 0, t)
            lhs = tw if lhs is None else lhs * tw
        rhs = self.exp.frobenius(1).compose_power(self.seq.p)
        lv0 = t.level(0)
        worst = Fraction(10**6)
        keys = set(lhs.terms) | {k * self.seq.p for k in rhs.terms}
        for k in keys:
            a = lhs.terms.get(k, TowerElem.zero(lv0, self.prec))
            if k % self.seq.p == 0 and (k // self.seq.p) in rhs.terms:
                b = rhs.terms[k // self.seq.p].lift(lv0)
            else:
                b = TowerElem.zero(lv0, self.prec)
            worst = min(worst, (a.lift(lv0) - b).valuation())
        return worst


def coleman_series_of(seq: CyclotomicUnitSequence, tower: Tower, prec: int) -> ColemanSeries:
    return ColemanSeries(seq, tower, prec)


_GH: dict = {}


def g_star_h_star(g: ColemanSeries, D: int) -> tuple[BoundedSeries, BoundedSeries]:
    """g* = g^p / (phi g)((1+X)^p - 1) and h* = (1/p) log g*, truncated at degree D."""
    key = (id(g.tower), g.seq.p, g.seq.fprime, g.seq.c, g.seq.kappa, g.prec, D)
    if key in _GH:
        return _GH[key]
    p = g.seq.p
    num = (g.exp ** p).truncated(D)
    den = g.exp.frobenius(1).compose_power(p).truncated(D)
    gstar = num * den.inverse()
    one = BoundedSeries.from_elems([TowerElem.from_int(g.tower.H, 1, gstar.absprec)], tail=None)
    z = gstar - one
    if min(z.coeff(i).valuation() for i in range(z.D + 1)) < 1:
        raise ArithmeticError("g* is not congruent to 1 mod p")
    zp = z.normalized().scale(Fraction(1, p))  # z = p z'; the true tail of z' is integral
    zp = BoundedSeries(zp.level, zp.c, zp.v, zp.N, Fraction(0))
    target = zp.absprec
    acc = zp
    power = zp
    k = 1
    while True:
        k += 1
        if (k - 1) - _vp_or(k, p, 64) >= target:
            break
        power = (power * zp).truncate(D)
        acc = acc + power.scale(Fraction((-1) ** (k - 1) * p ** (k - 1), k))
    hstar = BoundedSeries(acc.level, acc.c, acc.v, acc.N, Fraction(0))
    _GH[key] = (gstar, hstar)
    return gstar, hstar


def neg_digits_for(p: int, prec: int, budget: int = 2500) -> int:
    """Digits certified by the t < 0 route with p^(digits - 1) <= budget, capped at prec."""
    k = 1
    while k < prec and p**k <= budget:
        k += 1
    return k


def cw_delta(g: ColemanSeries, t: int, n: int, D: int, neg_digits: int = 5,
             route: str = "operator", L: Optional[int] = None) -> TowerElem:
    """delta_{t,n} = phi^-n (Dcheck^t h*)(pi_n).

    For t < 0 the default route uses <x>^t = <x>^(t + p^k j) mod p^(k+1) with
    k = neg_digits - 1 and t + p^k j >= 0, so the result is certified to at
    most neg_digits digits. route="measure" integrates against a level-L
    measure instead (needs D of order p^L (p-1) times the precision).
    """
    tower = g.tower
    p = g.seq.p
    _, h = g_star_h_star(g, D)
    if t < 0 and route == "measure":
        L = max(n, L if L is not None else n + 2)
        mu = finite_level_measure(h, L)
        return integrate_kernel(mu, t, n, 1, tower).frobenius(-n)
    cap = None
    if t < 0:
        step = p ** (neg_digits - 1)
        t = t + step * (-(t // step))
        cap = neg_digits
    ht = apply_operator(h, "Dcheck", t, tower)
    val = eval_at_unit_root(ht, 1, n, tower)
    if cap is not None and val.absprec > cap:
        val = TowerElem(val.level, val.c, val.v, cap - val.v) if val.v < cap else TowerElem.zero(val.level, cap)
    return val.frobenius(-n)


def delta0_from_levels(seq: CyclotomicUnitSequence, n: int, tower: Tower, prec: int) -> TowerElem:
    """(1/p) log(u_n^p / u_(n-1)) with u_k = j(eps_k) and u_-1 = j(eps_-1)."""
    un = seq.tower_value(n, tower, prec)
    um = seq.tower_value(n - 1, tower, prec).lift(tower.level(n))
    p = seq.p
    return un.log() - um.log().scale(Fraction(1, p))


# ------------------------------------------------------------ group-ring level


class TowerRing:
    """Coefficient ring H_n for group-ring elements."""

    name = "padic"

    def __init__(self, tower: Tower, n: int, prec: int):
        self.tower = tower
        self.n = n
        self.prec = prec

    def zero(self):
        return TowerElem.zero(self.tower.level(self.n), self.prec + 10**6)

    def root(self, E: int, k: int):
        return self.tower.root(E, k, self.n, self.prec + 8)

    def scalar(self, q):
        return TowerElem.from_int(self.tower.level(self.n), q, self.prec + 8)


def _delta_reps(fp: int) -> list[int]:
    return [c for c in range(1, fp) if math.gcd(c, fp) == 1 and c <= fp - c] or [1]


def _split_label(label: int, fp: int, p: int, n: int, reps: list[int]) -> tuple[int, int, int]:
    """label mod f_n -> (rep c, a' mod p^(n+1), sign) with label = sign * CRT(c, a')."""
    pn = p ** (n + 1)
    c = label % fp if fp > 1 else 1
    if c in reps:
        return c, label % pn, 1
    return (-label) % fp, (-label) % pn, -1


def L_map(p: int, fprime: int, t: int, n: int, tower: Tower, prec: int, D: int,
          group: Optional[UnitGroupModSign] = None, accelerated: bool = True,
          neg_digits: int = 5) -> GroupRingElem:
    """L_{t,n}(eps) = sum_sigma <kappa(sigma)>^-t delta_{t,n}(sigma eps) sigma^-1.

    accelerated=True builds Coleman series only for (Z/f')^x / +-1 and moves
    to other conjugates with Galois automorphisms; otherwise a separate
    Coleman series is built for every sigma (with the given integer lift).
    """
    fn = fprime * p ** (n + 1)
    G = group or UnitGroupModSign(fn)
    reps = _delta_reps(fprime)
    ring = TowerRing(tower, n, prec)
    coeffs = {}
    if accelerated:
        base = {}
        for c in reps:
            g = ColemanSeries(CyclotomicUnitSequence(p, fprime, c, 1), tower, prec)
            base[c] = cw_delta(g, t, n, D, neg_digits)
        for lab in G.elements:
            c, a, _ = _split_label(lab, fprime, p, n, reps)
            coeffs[G.inv(lab)] = base[c].galois(a)
    else:
        for lab in G.elements:
            c, a, _ = _split_label(lab, fprime, p, n, reps)
            g = ColemanSeries(CyclotomicUnitSequence(p, fprime, c, a), tower, prec)
            val = cw_delta(g, t, n, D, neg_digits)
            coeffs[G.inv(lab)] = val * _bracket(a, -t, p, prec + 4, tower.level(n))
    return GroupRingElem(G, coeffs, ring)


def _bracket(a: int, t: int, p: int, prec: int, level: TowerLevel) -> TowerElem:
    _, u = teichmuller_split(a, p, prec)
    mod = p**prec
    val = pow(u, t, mod) if t >= 0 else pow(pow(u, -1, mod), -t, mod)
    return TowerElem.from_int(level, val, prec)


def regulator_p(p: int, fprime: int, n: int, tower: Tower, prec: int,
                group: Optional[UnitGroupModSign] = None) -> GroupRingElem:
    """lambda_p(eps_n) = sum_sigma log_p(j sigma eps_n) sigma^-1, from exact conjugates."""
    fn = fprime * p ** (n + 1)
    G = group or UnitGroupModSign(fn)
    seq = CyclotomicUnitSequence(p, fprime)
    top = seq.exact(n)
    coeffs = {}
    for lab in G.elements:
        x = embed_j(top.galois(lab), tower, n, prec)
        coeffs[G.inv(lab)] = x.log()
    return GroupRingElem(G, coeffs, TowerRing(tower, n, prec))


def idempotent_e(G: UnitGroupModSign, n: int, p: int, fprime: int, ring) -> GroupRingElem:
    """e_n = 1 - p^-1 sum over Gal(K_n / K_(n-1)); e_0 = 1."""
    one = ring.scalar(1)
    coeffs = {G.identity: one}
    if n >= 1:
        f_prev = fprime * p**n
        ker = [lab for lab in G.elements if (lab - 1) % f_prev == 0 or (lab + 1) % f_prev == 0]
        for lab in ker:
            coeffs[lab] = coeffs.get(lab, ring.zero()) - ring.scalar(Fraction(1, p))
    return GroupRingElem(G, coeffs, ring)


def group_ring_det(matrix: list[list[GroupRingElem]]) -> GroupRingElem:
    """Determinant over a commutative group ring (Laplace expansion)."""
    r = len(matrix)
    if r == 1:
        return matrix[0][0]
    if r == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * group_ring_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


# ------------------------------------------------------------------- semilocal


class ExplicitLocalSequence:
    """Semilocal principal units given level by level (no Coleman series).

    units[(c, k)] is the image of the sigma_c-component at level k in H_k,
    for c in the representatives of (Z/f')^x / +-1 and k = -1..L. Other
    conjugates are reached with the local automorphisms zeta -> zeta^a.
    """

    def __init__(self, p: int, fprime: int, tower: Tower, units: dict, L: int, prec: int):
        self.p = p
        self.fprime = fprime
        self.tower = tower
        self.units = units
        self.L = L
        self.prec = prec
        self.reps = _delta_reps(fprime)

    def value(self, c: int, a: int, k: int) -> TowerElem:
        """Level-k component of sigma u, sigma = (c, a)."""
        x = self.units[(c, k)]
        return x.galois(a) if k >= 0 else x

    @classmethod
    def random(cls, p: int, fprime: int, tower: Tower, L: int, prec: int, rng) -> "ExplicitLocalSequence":
        """A random norm-coherent principal-unit sequence on levels 0..L.

        One random unit per orbit of <p, -1> on (Z/f')^x, made invariant under the
        stabiliser, spread over the orbit with Frobenius, and pushed down with norms.
        """
        reps = _delta_reps(fprime)
        d = tower.field.d
        top = tower.level(L)
        units = {}
        done = {}
        for c0 in reps:
            if c0 in done:
                continue
            arr = zeros((top.e, top.d))
            mod = p**prec
            for i in range(top.e):
                for j in range(top.d):
                    arr[i, j] = int(rng.integers(0, 2**62)) % mod
            x = 1 + TowerElem(top, arr, 0, prec) * tower.pi(L)
            stab = [(j, s) for j in range(d) for s in (1, -1) if (pow(p, j, fprime) * s - 1) % max(fprime, 1) == 0]
            sym = None
            for j, s in stab:
                y = x.frobenius(j).galois(s)
                sym = y if sym is None else sym * y
            for j in range(d):
                for s in (1, -1):
                    c = (c0 * pow(p, j, max(fprime, 2)) * s) % max(fprime, 1) if fprime > 1 else 1
                    if c in reps and c not in done:
                        done[c] = sym.frobenius(j).galois(s)
        for c in reps:
            units[(c, L)] = done[c]
            for k in range(L - 1, -1, -1):
                upper = units[(c, k + 1)]
                prod = None
                for b in range(p):
                    y = upper.galois(1 + b * p ** (k + 1))
                    prod = y if prod is None else prod * y
                units[(c, k)] = prod.descend(tower.level(k))
        return cls(p, fprime, tower, units, L, prec)

    @classmethod
    def from_cyclotomic(cls, p: int, fprime: int, tower: Tower, L: int, prec: int,
                        project: bool = True) -> "ExplicitLocalSequence":
        """b(eps): the principal-unit projection u / omega(u mod pi) of j(eps), level by level."""
        units = {}
        for c in _delta_reps(fprime):
            seq = CyclotomicUnitSequence(p, fprime, c, 1)
            for k in range(-1, L + 1):
                x = seq.tower_value(k, tower, prec)
                if project:
                    w = x.residue_teichmuller()
                    x = x * w.inverse()
                units[(c, k)] = x
        return cls(p, fprime, tower, units, L, prec)


def semilocal_regulator(seq: ExplicitLocalSequence, n: int, group: Optional[UnitGroupModSign] = None) -> GroupRingElem:
    """sum_sigma log_p(j_hat sigma u_n) sigma^-1 computed from the local components."""
    p, fp = seq.p, seq.fprime
    G = group or UnitGroupModSign(fp * p ** (n + 1))
    logs = {c: seq.units[(c, n)].log() for c in seq.reps}
    coeffs = {}
    for lab in G.elements:
        c, a, _ = _split_label(lab, fp, p, n, seq.reps)
        coeffs[G.inv(lab)] = logs[c].galois(a)
    return GroupRingElem(G, coeffs, TowerRing(seq.tower, n, seq.prec))


def _delta0_local(seq: ExplicitLocalSequence, c: int, k: int) -> TowerElem:
    """(1/p) log(u_k^p / u_(k-1)) for the c-component, as an element of H_k."""
    lv = seq.tower.level(k)
    uk = seq.units[(c, k)]
    um = seq.units[(c, k - 1)].lift(lv)
    return uk.log() - um.log().scale(Fraction(1, seq.p))


def semilocal_L0(seq: ExplicitLocalSequence, n: int, group: Optional[UnitGroupModSign] = None) -> GroupRingElem:
    """L_hat_{0,n}(u) = sum_sigma delta_{0,n}(sigma u) sigma^-1, pointwise."""
    p, fp = seq.p, seq.fprime
    G = group or UnitGroupModSign(fp * p ** (n + 1))
    base = {c: _delta0_local(seq, c, n) for c in seq.reps}
    coeffs = {}
    for lab in G.elements:
        c, a, _ = _split_label(lab, fp, p, n, seq.reps)
        coeffs[G.inv(lab)] = base[c].galois(a)
    return GroupRingElem(G, coeffs, TowerRing(seq.tower, n, seq.prec))


def pointwise_measure(seq: ExplicitLocalSequence, c: int) -> FiniteLevelMeasure:
    """Level-L class masses of the measure attached to the c-component, built
    only from the unit values u_-1, ..., u_L:
        p^(L+1) mu(a) = h(0) + sum_k Tr_{H_k/H}(zeta_k^-a h(pi_k)),
    h(pi_k) = phi^k((1/p) log(u_k^p / u_(k-1))), h(0) = (1/p) log(phi^-1(u_-1)^p / u_-1).
    """
    tower = seq.tower
    p = seq.p
    L = seq.L
    H = tower.H
    u_m1 = seq.units[(c, -1)]
    h0 = u_m1.frobenius(-1).log() - u_m1.log().scale(Fraction(1, p))
    ys = []
    for k in range(L + 1):
        ys.append(_delta0_local(seq, c, k).frobenius(k))
    m = p ** (L + 1)
    masses = {}
    for a in range(m):
        tot = h0
        for k in range(L + 1):
            tot = tot + ys[k].mul_zeta(-a).trace_to_H(H)
        masses[a] = tot.scale(Fraction(1, m))
    prec = min(x.absprec for x in masses.values())
    return FiniteLevelMeasure(H, L, masses, prec, "pointwise")


def semilocal_L_map(seq: ExplicitLocalSequence, t: int, n: int,
                    group: Optional[UnitGroupModSign] = None) -> tuple[GroupRingElem, int]:
    """L_hat_{t,n}(u) through pointwise measures; returns (element, certified precision)."""
    p, fp = seq.p, seq.fprime
    tower = seq.tower
    G = group or UnitGroupModSign(fp * p ** (n + 1))
    mus = {c: pointwise_measure(seq, c) for c in seq.reps}
    coeffs = {}
    prec = 10**6
    for lab in G.elements:
        c, a, _ = _split_label(lab, fp, p, n, seq.reps)
        mu = mus[c].pushforward(a)
        val = integrate_kernel(mu, t, n, 1, tower).frobenius(-n)
        val = val * _bracket(a, -t, p, seq.prec + 4, tower.level(n))
        coeffs[G.inv(lab)] = val
        prec = min(prec, val.absprec)
    return GroupRingElem(G, coeffs, TowerRing(tower, n, seq.prec)), prec


def theta_projected_series(p: int, fprime: int, theta, tower: Tower, prec: int, D: int) -> BoundedSeries:
    """F = (1/2) sum_{d in (Z/f')^x} theta(d)^-1 h*(d eps) over H.

    `theta` is a Dirichlet character mod f' (values embedded through j).
    """
    acc = None
    for d in range(1, max(fprime, 2)):
        if math.gcd(d, fprime) != 1:
            continue
        g = ColemanSeries(CyclotomicUnitSequence(p, fprime, d, 1), tower, prec)
        _, h = g_star_h_star(g, D)
        e = theta(d)
        w = tower.root(theta.E, -e, -1, prec + 4)
        term = h.mul_const(w)
        acc = term if acc is None else acc + term
    return acc.scale(Fraction(1, 2))


class WedgeElement:
    """scalar * (u_1 wedge ... wedge u_r); the regulator is scalar * det(L_i(u_s))."""

    def __init__(self, scalar, sequences: list):
        self.scalar = Fraction(scalar)
        self.sequences = list(sequences)

    @property
    def r(self) -> int:
        return len(self.sequences)

    def regulator(self, maps: list) -> GroupRingElem:
        """maps[i](u) -> GroupRingElem; returns scalar * det(maps[i](u_s))."""
        if len(maps) != self.r:
            raise ValueError("need one map per wedge factor")
        matrix = [[mp(u) for u in self.sequences] for mp in maps]
        det = group_ring_det(matrix)
        if isinstance(det.ring, TowerRing):
            return det.map(lambda x: x.scale(self.scalar))
        if det.ring.name == "complex":
            return det.map(lambda x: x * float(self.scalar))
        return det.map(lambda x: x * self.scalar)
