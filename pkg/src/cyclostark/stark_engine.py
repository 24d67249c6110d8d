"""Tower bookkeeping, group-ring zeta values, regulators and the verification checks.

The base field is Q and K_n = Q(zeta_{f_n})^+ with f_n = f' p^max(n0, n+1);
G_n = (Z/f_n)^x / +-1 is labelled by min(c, f_n - c), sigma_c: zeta -> zeta^c.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from sympy import factorint

from .coleman import (
    CyclotomicUnitSequence,
    ExplicitLocalSequence,
    L_map,
    TowerRing,
    WedgeElement,
    idempotent_e,
    neg_digits_for,
    regulator_p,
    semilocal_L_map,
    semilocal_regulator,
    theta_projected_series,
)
from .exact_cyclotomic import (
    ComplexRing,
    CyclotomicNumber,
    DirichletCharacter,
    ExactRing,
    GroupCharacter,
    GroupRingElem,
    UnitGroupModSign,
    _lcm,
    character_eval,
    character_table,
    complex_embed,
    gauss_sum,
    group_ring_fourier,
    l_value_at_one,
    l_value_nonpositive,
)
from .padic_tower import Tower, TowerElem, embed_j, teichmuller_split
from .series_measures import (
    IwasawaSeriesFitter,
    apply_operator,
    finite_level_measure,
    iwasawa_node,
    truncation_degree,
)

__all__ = [
    "Calibration",
    "CALIBRATIONS",
    "calibration",
    "select_calibration",
    "TowerContext",
    "CharacterData",
    "CheckReport",
    "tower_context",
    "phi_character_value",
    "phi_value",
    "phi_complex_at_1",
    "phi_padic",
    "fit_holdout",
    "conductor_depth_failures",
    "layer_triviality_failures",
    "local_gauss_sum",
    "complex_regulator",
    "eta_and_regulators",
    "higher_regulator",
    "phi_padic_character",
    "fit_character",
    "fit_nodes",
    "in_M",
    "run_check",
    "CHECK_KINDS",
]

SCHEMA_VERSION = 1
GUARD = 6


def _prime_factors(n: int) -> list[int]:
    return sorted(factorint(n)) if n > 1 else []


def _crt(a: int, m: int, b: int, n: int) -> int:
    if m == 1:
        return b % n
    if n == 1:
        return a % m
    return (a + m * ((b - a) * pow(m, -1, n))) % (m * n)


# ------------------------------------------------------------------ calibration


@dataclass(frozen=True)
class Calibration:
    """Joint choice of Artin-map direction and Gauss-sum pairing.

    name "A": chi_hat = chi on labels, g = sum zeta^b chi_hat(b)^-1.
    name "B": chi_hat = conj(chi),     g = sum zeta^b chi_hat(b).
    """

    name: str
    conjugate: bool

    def hat(self, chi: DirichletCharacter) -> DirichletCharacter:
        return chi.conj() if self.conjugate else chi

    def gauss(self, chi_hat: DirichletCharacter, primitive: bool = True) -> CyclotomicNumber:
        return gauss_sum(chi_hat, power=1 if self.conjugate else -1, primitive=primitive)

    @property
    def fingerprint(self) -> str:
        blob = json.dumps({"name": self.name, "conjugate": self.conjugate,
                           "gauss_power": 1 if self.conjugate else -1,
                           "embedding": "first-hensel-root;zeta_p^(n+1)->1+pi_n"},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


CALIBRATIONS = (Calibration("A", False), Calibration("B", True))
_FROZEN: dict = {}


def select_calibration() -> tuple[Calibration, dict]:
    """Pick the unique candidate for which C1 holds at (3, 5, n = 1); freeze it."""
    if "cal" in _FROZEN:
        return _FROZEN["cal"], _FROZEN["residuals"]
    ctx = tower_context(3, 5)
    residuals = {}
    for cal in CALIBRATIONS:
        residuals[cal.name] = _c1_residual(ctx, 1, cal)[0]
    passing = [c for c in CALIBRATIONS if residuals[c.name] < 1e-7]
    if len(passing) != 1:
        raise RuntimeError(f"calibration is not decisive: {residuals}")
    _FROZEN["cal"] = passing[0]
    _FROZEN["residuals"] = residuals
    return passing[0], residuals


def calibration() -> Calibration:
    return select_calibration()[0]


# ----------------------------------------------------------------- tower context


@dataclass
class CharacterData:
    chi: DirichletCharacter
    conductor: int
    fprime_part: int
    n_chi: int
    theta: DirichletCharacter
    chi_p: DirichletCharacter
    omega_exp: int
    psi_conductor: int
    n_psi: int


class TowerContext:
    """Conductors, groups and p-adic towers for K_n = Q(zeta_{f_n})^+."""

    def __init__(self, p: int, fprime: int, n0: int = 1):
        if p == 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)) or p < 3:
            raise ValueError("p must be an odd prime")
        if fprime <= 1 or math.gcd(p, fprime) != 1:
            raise ValueError("f' must be > 1 and prime to p")
        if n0 < 1:
            raise ValueError("only towers with p | f0 are supported")
        self.p = p
        self.fprime = fprime
        self.n0 = n0
        self.f0 = fprime * p**n0
        self.n1 = 0
        self.n2 = max(1, n0)
        lam = 1
        for q, e in factorint(fprime).items():
            lam = _lcm(lam, (q - 1) * q ** (e - 1) if q != 2 else (1 if e == 1 else 2 if e == 2 else 2 ** (e - 2)))
        F = _lcm(_lcm(fprime, lam), p - 1)
        while F % p == 0:
            F //= p
        self.F = F
        self._towers: dict = {}

    def f(self, n: int) -> int:
        return self.fprime * self.p ** max(self.n0, n + 1)

    @property
    def sigma_primes(self) -> list[int]:
        return sorted(set(_prime_factors(self.fprime)) | {self.p})

    def group(self, n: int) -> UnitGroupModSign:
        return _group(self.f(n))

    def tower(self, prec: int, n_max: int = 3) -> Tower:
        key = prec
        if key not in self._towers:
            self._towers[key] = Tower(self.p, self.F, n_max, prec)
        return self._towers[key]

    def characters(self, n: int) -> list[GroupCharacter]:
        return self.group(n).characters()

    def decompose(self, chi, n: int) -> CharacterData:
        d = chi.dirichlet if isinstance(chi, GroupCharacter) else chi
        p, fp = self.p, self.fprime
        pn = p ** max(self.n0, n + 1)
        cond = d.conductor
        fpp = cond
        while fpp % p == 0:
            fpp //= p
        k = 0
        c = cond
        while c % p == 0:
            c //= p
            k += 1
        theta = DirichletCharacter(fp, d.E, [d(_crt(a, fp, 1, pn)) if math.gcd(a, fp) == 1 else None
                                             for a in range(fp)])
        chi_p = DirichletCharacter(pn, d.E, [d(_crt(1, fp, a, pn)) if a % p else None for a in range(pn)])
        # omega part: chi_p on the (p-1)-st roots of unity mod pn
        g = _primitive_root(p)
        w = pow(g, pn // p, pn)  # Teichmuller lift of g mod pn, order p - 1
        e = chi_p(w)
        omega_exp = 0
        for i in range(p - 1):
            if (chi_p.E * i) % (p - 1) == 0 and chi_p.E * i // (p - 1) % chi_p.E == e % chi_p.E:
                omega_exp = i
                break
        # psi = chi_p * omega^-omega_exp agrees with chi_p on 1 + pZ_p
        N = max(self.n0, n + 1)
        j = 1
        while j < N and any(chi_p((1 + p**j * x) % pn) != 0 for x in range(pn // p**j)):
            j += 1
        psi_cond, n_psi = (1, -1) if j == 1 else (p**j, j - 1)
        return CharacterData(d, cond, fpp, k - 1, theta, chi_p, omega_exp, psi_cond, n_psi)

    def r_S_chi(self, chi, S: list[int]) -> int:
        """Order of vanishing r(S, chi) at s = 0 for k = Q (S finite primes plus infinity)."""
        d = chi.dirichlet if isinstance(chi, GroupCharacter) else chi
        if d.is_trivial():
            return len(S)
        prim = d.primitive()
        r = 1
        for q in S:
            if prim.modulus % q and prim(q) == 0:
                r += 1
        return r

    def e_chi(self, chi: GroupCharacter, n: int, ring=None) -> GroupRingElem:
        ring = ring or ExactRing()
        G = self.group(n)
        coeffs = {g: ring.root(chi.E, -chi(g)) * ring.scalar(Fraction(1, G.order)) for g in G.elements}
        return GroupRingElem(G, coeffs, ring)

    def e_S_r(self, n: int, S: list[int], r: int, greater: bool = False) -> GroupRingElem:
        """e_{S,G_n,r} (or e_{S,G_n,>r}) with exact coefficients."""
        G = self.group(n)
        ring = ExactRing()
        acc = GroupRingElem(G, {}, ring)
        for chi in G.characters():
            k = self.r_S_chi(chi, S)
            if (k > r) if greater else (k == r):
                acc = acc + self.e_chi(chi, n, ring)
        return acc


def conductor_depth_failures(ctx: TowerContext, N: int = 3) -> list:
    """Characters of G_N where (n(psi) <= n), (n(chi) <= n) and (chi factors
    through G_n) disagree for some 0 <= n <= N. Empty means the lemma holds.
    Level -1 is not a layer of these towers (p divides f_0)."""
    bad = []
    for chi in ctx.characters(N):
        data = ctx.decompose(chi, N)
        for n in range(0, N + 1):
            fn = ctx.f(n)
            a = data.n_psi <= n
            b = data.n_chi <= n
            c = fn % data.conductor == 0
            if not (a == b == c):
                bad.append((chi.label, n, a, b, c))
    return bad


def layer_triviality_failures(ctx: TowerContext, n: int) -> list:
    """For n >= n2: f(chi) | f_n / p iff chi is trivial on Gal(K_n / K_(n-1))."""
    if n < ctx.n2:
        raise ValueError("needs n >= n2")
    G = ctx.group(n)
    fm = ctx.f(n - 1)
    kernel = [g for g in G.elements if (g - 1) % fm == 0 or (g + 1) % fm == 0]
    bad = []
    for chi in G.characters():
        lhs = (ctx.f(n) // ctx.p) % chi.dirichlet.conductor == 0
        rhs = all(chi(g) % chi.E == 0 for g in kernel)
        if lhs != rhs:
            bad.append(chi.label)
    return bad


@lru_cache(maxsize=None)
def _group(f: int) -> UnitGroupModSign:
    return UnitGroupModSign(f)


@lru_cache(maxsize=None)
def tower_context(p: int, fprime: int, n0: int = 1) -> TowerContext:
    return TowerContext(p, fprime, n0)


def _vp(x: int, p: int) -> int:
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    return k


def _primitive_root(p: int) -> int:
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1)):
            return g
    return 1


# --------------------------------------------------------------- zeta values


def _euler_data(ctx: TowerContext, chi_hat: DirichletCharacter, n: int, T: str):
    """Returns None when the component vanishes, else (t, h0, h_prime_primes, T_primes, f_T')."""
    f = chi_hat.modulus
    fn = ctx.f(n)
    h = fn // f
    Tset = {ctx.p} if T == "p" else set()
    h0 = 1
    for q in Tset:
        while h % (h0 * q) == 0:
            h0 *= q
    hp = h // h0
    if h0 > 1:
        sqfree = all(e == 1 for e in factorint(h0).values())
        if not sqfree or math.gcd(h0, f) != 1:
            return None
    t = len(_prime_factors(h0))
    fT = f
    for q in Tset:
        while fT % q == 0:
            fT //= q
    hq = [q for q in _prime_factors(hp) if f % q]
    tq = [q for q in sorted(Tset) if f % q]
    return t, h0, hq, tq, fT


def phi_character_value(ctx: TowerContext, chi, n: int, T: str, m: int,
                        cal: Optional[Calibration] = None) -> CyclotomicNumber:
    """chi(Phi_{n,T}(m)) for an integer m <= 0, exactly."""
    if m > 0:
        raise ValueError("exact values need m <= 0")
    cal = cal or calibration()
    d = chi.dirichlet if isinstance(chi, GroupCharacter) else chi
    hat = cal.hat(d).primitive()
    data = _euler_data(ctx, hat, n, T)
    if data is None:
        return CyclotomicNumber.zero()
    t, h0, hq, tq, fT = data
    s = m
    val = cal.gauss(hat) * l_value_nonpositive(hat, s)
    val = val * (Fraction(1, fT ** (1 - s)))
    if t % 2:
        val = -val
    if h0 > 1:
        val = val * hat.value(h0).inv()
    for q in hq:
        val = val * (CyclotomicNumber.one() - hat.value(q).inv() * Fraction(1, q ** (1 - s)))
    for q in tq:
        val = val * (CyclotomicNumber.one() - hat.value(q) * (q ** (-s)))
    return val


def phi_value(ctx: TowerContext, n: int, T: str, m: int, cal: Optional[Calibration] = None) -> GroupRingElem:
    """Phi_{n,T}(m) in Q(zeta) G_n, assembled from character values by Fourier inversion."""
    G = ctx.group(n)
    vals = {i: phi_character_value(ctx, chi, n, T, m, cal) for i, chi in enumerate(G.characters())}
    return group_ring_fourier(vals, G, ExactRing())


def phi_complex_character_at_1(ctx: TowerContext, chi, n: int, T: str,
                               cal: Optional[Calibration] = None) -> complex:
    cal = cal or calibration()
    d = chi.dirichlet if isinstance(chi, GroupCharacter) else chi
    hat = cal.hat(d).primitive()
    data = _euler_data(ctx, hat, n, T)
    if data is None:
        return 0j
    t, h0, hq, tq, fT = data
    sign = -1 if t % 2 else 1
    pre = sign * complex_embed(cal.gauss(hat))
    if h0 > 1:
        pre *= hat.complex_value(h0).conjugate()
    tfac = 1 + 0j
    for q in tq:
        tfac *= 1 - hat.complex_value(q) / q
    if not hat.is_trivial():
        val = pre * tfac * l_value_at_one(hat)
        for q in hq:
            val *= 1 - hat.complex_value(q).conjugate()
        return val
    # trivial character: zeta(s) has a simple pole with residue 1, each
    # factor (1 - q^(s-1)) vanishes to first order with derivative -log q
    if len(hq) == 0:
        raise ValueError("trivial character with no vanishing factor: pole")
    if len(hq) >= 2:
        return 0j
    return pre * tfac * (-math.log(hq[0]))


def phi_complex_at_1(ctx: TowerContext, n: int, T: str = "empty", cal: Optional[Calibration] = None) -> GroupRingElem:
    G = ctx.group(n)
    vals = {i: phi_complex_character_at_1(ctx, chi, n, T, cal) for i, chi in enumerate(G.characters())}
    return group_ring_fourier(vals, G, ComplexRing())


# --------------------------------------------------------------- regulators


def complex_regulator(ctx: TowerContext, n: int) -> GroupRingElem:
    """R_n(eta_n) = sum_sigma log|sigma eta_n| sigma^-1 with eta_n = -(1/2) eps_n."""
    G = ctx.group(n)
    eps = CyclotomicUnitSequence(ctx.p, ctx.fprime).exact(n)
    coeffs = {}
    for lab in G.elements:
        z = complex_embed(eps.galois(lab))
        coeffs[G.inv(lab)] = -0.5 * math.log(abs(z))
    return GroupRingElem(G, coeffs, ComplexRing())


def eta_and_regulators(ctx: TowerContext, n: int, prec: int):
    """(eta_n, R_n(eta_n), R_{n,p}(e_n eta_n))."""
    eta = WedgeElement(Fraction(-1, 2), [CyclotomicUnitSequence(ctx.p, ctx.fprime)])
    Rc = complex_regulator(ctx, n)
    tower = ctx.tower(prec + GUARD)
    G = ctx.group(n)
    lam = regulator_p(ctx.p, ctx.fprime, n, tower, prec + GUARD, G)
    e = idempotent_e(G, n, ctx.p, ctx.fprime, lam.ring)
    Rp = (e * lam).map(lambda x: x.scale(Fraction(-1, 2)))
    return eta, Rc, Rp


def higher_regulator(ctx: TowerContext, t: int, n: int, prec: int, D: Optional[int] = None) -> GroupRingElem:
    """R_{t,n}(eta) = -(1/2) L_{t,n}(eps)."""
    W = prec + GUARD
    tower = ctx.tower(W)
    nd = neg_digits_for(ctx.p, prec - 1)
    if D is None:
        D = truncation_degree(ctx.p, n, W) + max(t, 0) + (ctx.p ** (nd - 1) if t < 0 else 0)
    G = ctx.group(n)
    eta = WedgeElement(Fraction(-1, 2), [CyclotomicUnitSequence(ctx.p, ctx.fprime)])
    return eta.regulator([lambda u: L_map(ctx.p, ctx.fprime, t, n, tower, W, D, G, neg_digits=nd)])


# ------------------------------------------------------------- p-adic values


def local_gauss_sum(chi_p: DirichletCharacter, n: int, tower: Tower, prec: int,
                    shift: int = 0) -> TowerElem:
    """g_n(psi) = sum_{u in R_n} zeta_n^u psi(u)^-1 with R_n = {u + shift p^(n+1)}."""
    lv = tower.level(n)
    P = tower.p ** (n + 1)
    acc = TowerElem.zero(lv, prec + 10)
    for u in range(P):
        if u % tower.p == 0:
            continue
        rep = u + shift * P
        e = chi_p(rep % chi_p.modulus)
        term = tower.root(chi_p.E, -e, n, prec + 4).mul_zeta(rep) if chi_p.E > 1 else TowerElem.zeta(lv, rep, prec + 4)
        acc = acc + term
    return acc


def _embed_char_value(x: CyclotomicNumber, tower: Tower, n: int, prec: int) -> TowerElem:
    return embed_j(x, tower, n, prec)


def phi_padic_character(ctx: TowerContext, chi, n: int, m: int, prec: int,
                        cal: Optional[Calibration] = None) -> TowerElem:
    """chi(Phi_{n,p}(m)) for m in M(p): j of the exact value."""
    W = prec + GUARD
    return embed_j(phi_character_value(ctx, chi, n, "p", m, cal), ctx.tower(W), n, W)


def in_M(p: int, m: int) -> bool:
    return m <= 0 and (m - 1) % (p - 1) == 0


def fit_nodes(p: int, count: int = 6) -> list[int]:
    return [1 - (j + 1) * (p - 1) for j in range(count)]


def _psi_at_gamma(data: CharacterData, p: int) -> tuple[int, int]:
    """psi(1+p) = zeta_{p^k}^e, returned as (e, k)."""
    chi_p = data.chi_p
    e = chi_p((1 + p) % chi_p.modulus)
    E = chi_p.E
    k = _vp(E, p)
    pk = p**k
    # E = pk * prime-to-p; the value at a principal unit is a p-power root
    return (e // (E // pk)) % pk if k else 0, k


def fit_character(ctx: TowerContext, chi, n: int, prec: int, nodes: Optional[list[int]] = None,
                  cal: Optional[Calibration] = None):
    """Per-fiber Iwasawa fit of C(m) = chi(Phi_{n,p}(m)) / (g * <f'(chi)>^(m-1)) on M(p) nodes."""
    cal = cal or calibration()
    p = ctx.p
    W = prec + GUARD
    tower = ctx.tower(W)
    nodes = nodes or fit_nodes(p)
    data = ctx.decompose(chi, n)
    e, k = _psi_at_gamma(data, p)
    hat = cal.hat(data.chi).primitive()
    g = embed_j(cal.gauss(hat), tower, n, W)
    ginv = g.inverse()
    xs, ys = [], []
    for m in nodes:
        xs.append(iwasawa_node(m, e, k, tower, n, W))
        val = phi_padic_character(ctx, chi, n, m, prec, cal)
        ys.append(val * ginv * _bracket_int(data.fprime_part, 1 - m, p, W, tower.level(n)))
    est = IwasawaSeriesFitter(p=p).fit(xs, ys)
    return est, (e, k), g


def fit_holdout(ctx: TowerContext, n: int, prec: int, held: int = -13,
                cal: Optional[Calibration] = None) -> list[dict]:
    """Fit every nonzero chi fiber on fit_nodes, then compare with the exact value at `held`.

    Returns one row per character: theta exponents, residual valuation and the
    certified precision the fit claims at the held-out node.
    """
    cal = cal or calibration()
    if not in_M(ctx.p, held) or held in fit_nodes(ctx.p):
        raise ValueError("held-out node must be an unused interpolation point")
    W = prec + GUARD
    tower = ctx.tower(W)
    rows = []
    for chi in ctx.group(n).characters():
        if phi_character_value(ctx, chi, n, "p", fit_nodes(ctx.p)[0], cal).is_zero():
            continue
        data = ctx.decompose(chi, n)
        est, (e, k), g = fit_character(ctx, chi, n, prec, cal=cal)
        x = iwasawa_node(held, e, k, tower, n, W)
        target = (phi_padic_character(ctx, chi, n, held, prec, cal) * g.inverse()
                  * _bracket_int(data.fprime_part, 1 - held, ctx.p, W, tower.level(n)))
        (res, cp), = est.validate([x], [target])
        rows.append({"theta": list(data.theta.exps), "label": chi.label,
                     "residual": float(res), "certified": int(cp)})
    return rows


def _bracket_int(a: int, t: int, p: int, prec: int, level) -> TowerElem:
    """<a>^t as a tower element."""
    _, u = teichmuller_split(a, p, prec + 2)
    mod = p ** (prec + 2)
    v = pow(u, t, mod) if t >= 0 else pow(pow(u, -1, mod), -t, mod)
    return TowerElem.from_int(level, v, prec)


def phi_padic(ctx: TowerContext, n: int, m: int, prec: int, cal: Optional[Calibration] = None):
    """Phi_{n,p}(m) as a group-ring element over H_n, with its certified precision.

    m in M(p): j of the exact element. Other m: per-character Iwasawa fits.
    """
    cal = cal or calibration()
    W = prec + GUARD
    tower = ctx.tower(W)
    G = ctx.group(n)
    ring = TowerRing(tower, n, W)
    if in_M(ctx.p, m):
        exact = phi_value(ctx, n, "p", m, cal)
        return exact.map_ring(lambda x: embed_j(x, tower, n, W), ring), W
    vals = {}
    cert = W
    for i, chi in enumerate(G.characters()):
        data = ctx.decompose(chi, n)
        if phi_character_value(ctx, chi, n, "p", fit_nodes(ctx.p)[0], cal).is_zero():
            vals[i] = ring.zero()
            continue
        est, (e, k), g = fit_character(ctx, chi, n, prec, cal=cal)
        x = iwasawa_node(m, e, k, tower, n, W)
        (c, cp), = est.predict_with_precision([x])
        vals[i] = g * _bracket_int(data.fprime_part, m - 1, ctx.p, W, tower.level(n)) * c
        cert = min(cert, cp)
    return group_ring_fourier(vals, G, ring), cert


# ------------------------------------------------------------------- reports


@dataclass
class CheckReport:
    kind: str
    params: dict
    outcome: str
    margin: float
    threshold: float
    calibration: str
    details: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.outcome == "PASS"

    def to_dict(self, timing: bool = False) -> dict:
        d = {"kind": self.kind, "params": self.params, "outcome": self.outcome,
             "margin": self.margin, "threshold": self.threshold,
             "calibration": self.calibration, "details": self.details}
        if timing:
            d["wall_time"] = round(self.wall_time, 3)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(d["kind"], dict(d["params"]), d["outcome"], float(d["margin"]),
                   float(d["threshold"]), d["calibration"], list(d.get("details", [])),
                   float(d.get("wall_time", 0.0)))

    def record(self) -> str:
        """One line of key=value fields (details omitted)."""
        ps = ",".join(f"{k}:{v}" for k, v in sorted(self.params.items()))
        return (f"kind={self.kind} outcome={self.outcome} margin={self.margin!r} "
                f"threshold={self.threshold!r} params={ps} calibration={self.calibration} "
                f"wall_time={self.wall_time:.3f}")

    def line(self) -> str:
        ps = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind:14s} {self.outcome}  margin={self.margin:g}  threshold={self.threshold:g}  {ps}"


def _vmin(diffs) -> float:
    vals = [d.valuation() for d in diffs]
    return float(min(vals)) if vals else float("inf")


def _c1_residual(ctx: TowerContext, n: int, cal: Calibration) -> tuple[float, list]:
    G = ctx.group(n)
    Rc = complex_regulator(ctx, n)
    worst = 0.0
    rows = []
    for chi in G.characters():
        lhs = phi_complex_character_at_1(ctx, chi, n, "empty", cal)
        rhs = 2 * character_eval(Rc, chi)
        r = abs(lhs - rhs)
        worst = max(worst, r)
        rows.append({"label": chi.label, "residual": r})
    return worst, rows


def _check_c1(ctx, n, **kw):
    cal = calibration()
    worst, rows = _c1_residual(ctx, n, cal)
    return worst, 1e-7, worst < 1e-7, [{"label": r["label"], "residual": float(f"{r['residual']:.3e}")} for r in rows]


def _check_prop2a(ctx, n, m, **kw):
    cal = calibration()
    G = ctx.group(n)
    lhs = phi_value(ctx, n, "p", m, cal)
    rhs = phi_value(ctx, n, "empty", m, cal)
    e = idempotent_e(G, n, ctx.p, ctx.fprime, ExactRing())
    factor = Fraction(ctx.p) ** ((n + 1) * (1 - m))
    rhs = (e * rhs).map(lambda x: x * factor)
    diff = lhs - rhs
    ok = all(v.is_zero() for v in diff.coeffs.values())
    return (0.0 if ok else 1.0), 0.0, ok, [{"factor": str(factor), "exact_equal": ok}]


def _check_eq3g(ctx, n, m, precision, **kw):
    cal = calibration()
    M = precision
    W = M + GUARD
    G = ctx.group(n)
    tower = ctx.tower(W)
    if m == 1:
        return _check_eq3g_limit(ctx, n, M, trunc=kw.get("trunc"))
    t = 1 - m
    R2 = higher_regulator(ctx, t, n, M, kw.get("trunc")).map(lambda x: x.scale(2))
    diffs, rows = [], []
    thr = M - 2
    if t < 0:
        # the right side is only certified to neg_digits_for(...) digits here
        thr = min(thr, neg_digits_for(ctx.p, M - 1))
    for chi in G.characters():
        if in_M(ctx.p, m):
            lhs = phi_padic_character(ctx, chi, n, m, M, cal)
        elif phi_character_value(ctx, chi, n, "p", fit_nodes(ctx.p)[0], cal).is_zero():
            lhs = TowerElem.zero(tower.level(n), W)
        else:
            # off the interpolation nodes: per-fiber Iwasawa fit
            est, (e, k), g = fit_character(ctx, chi, n, M, cal=cal)
            (c, cp), = est.predict_with_precision([iwasawa_node(m, e, k, tower, n, W)])
            data = ctx.decompose(chi, n)
            lhs = g * _bracket_int(data.fprime_part, m - 1, ctx.p, W, tower.level(n)) * c
            thr = min(thr, cp)
        rhs = character_eval(R2, chi)
        d = lhs - rhs
        diffs.append(d)
        rows.append({"label": chi.label, "v": float(d.valuation())})
    margin = _vmin(diffs)
    return margin, thr, margin >= thr, rows


def _check_eq3g_limit(ctx, n, M, kmax: Optional[int] = None, trunc: Optional[int] = None):
    """m = 1 through m_k = 1 - (p-1) p^k: report v(LHS(m_k) - RHS(m = 1))."""
    cal = calibration()
    p = ctx.p
    if kmax is None:
        # keep the Bernoulli weight 1 - m_k below about 200
        kmax = max(k for k in range(8) if (p - 1) * p**k <= 200)
    G = ctx.group(n)
    R2 = higher_regulator(ctx, 0, n, M, trunc).map(lambda x: x.scale(2))
    rhs = [character_eval(R2, chi) for chi in G.characters()]
    seq = []
    for k in range(kmax + 1):
        mk = 1 - (p - 1) * p**k
        vals = [phi_padic_character(ctx, chi, n, mk, M, cal) for chi in G.characters()]
        seq.append({"k": k, "m": mk, "v": _vmin([a - b for a, b in zip(vals, rhs)])})
    margin = seq[-1]["v"]
    thr = min(4, kmax)
    return margin, thr, margin >= thr, seq


def _check_vanish(ctx, n, m, precision, **kw):
    cal = calibration()
    M = precision
    G = ctx.group(n)
    R = higher_regulator(ctx, 1 - m, n, M, kw.get("trunc"))
    rows = []
    exact_ok = True
    diffs = []
    for chi in G.characters():
        data = ctx.decompose(chi, n)
        if data.n_chi >= n:
            continue
        x = phi_character_value(ctx, chi, n, "p", m, cal)
        exact_ok &= x.is_zero()
        r = character_eval(R, chi)
        diffs.append(r)
        rows.append({"label": chi.label, "n_chi": data.n_chi, "phi_zero": x.is_zero(),
                     "v_reg": float(r.valuation())})
    margin = _vmin(diffs)
    return margin, M - 2, exact_ok and margin >= M - 2, rows


def _check_lemma1z(ctx, n, m, **kw):
    cal = calibration()
    big = phi_value(ctx, n, "empty", m, cal)
    small = phi_value(ctx, n - 1, "empty", m, cal)
    target = ctx.group(n - 1)
    proj = big.project(target, lambda c: target.canon(c))
    ok = all((proj[g] - small[g]).is_zero() for g in target.elements)
    return (0.0 if ok else 1.0), 0.0, ok, [{"levels": [n, n - 1], "exact_equal": ok}]


def _check_prop3d(ctx, precision, theta_index=None, **kw):
    """Constancy over psi of g(chi)^-1 g_{n(psi)}(chi o alpha) theta(rho)^-n(psi) psi(<f'>)^-1."""
    cal = calibration()
    M = precision
    W = M + GUARD
    p, fp = ctx.p, ctx.fprime
    tower = ctx.tower(W)
    top = 2
    lv = tower.level(top)
    thetas = [t for t in character_table(fp) if t.is_even()]
    rows = []
    worst = float("inf")
    count = 0
    _, u5 = teichmuller_split(fp, p, W + 4)
    for ti, theta in enumerate(thetas):
        if theta_index is not None and ti != theta_index:
            continue
        qs = []
        for k in (1, 2):
            pk = p ** (k + 1)
            for psi in character_table(pk):
                # p-power order characters of exact conductor p^(k+1)
                if psi.E == 1 or psi.E != p ** _vp(psi.E, p) or psi.conductor != pk:
                    continue
                f = fp * pk
                E = _lcm(theta.E, psi.E)
                chi = DirichletCharacter(f, E, [None if math.gcd(a, f) != 1 else
                                                theta(a % fp) * (E // theta.E) + psi(a % pk) * (E // psi.E)
                                                for a in range(f)])
                # chi is read at modulus f' p^(k+1): for theta of smaller conductor
                # the Gauss sum carries the Ramanujan factor of the f' part
                g = embed_j(cal.gauss(cal.hat(chi), primitive=False), tower, top, W)
                chi_p = cal.hat(chi_restrict_p(chi, fp, pk))
                gl = local_gauss_sum(chi_p, k, tower, W).lift(lv)
                th = tower.root(theta.E, -theta(p % fp) * k, top, W) if theta.E > 1 else TowerElem.from_int(lv, 1, W)
                hp = cal.hat(psi)
                ps = tower.root(hp.E, hp(u5 % pk), top, W)
                qs.append(g.inverse() * gl * th * ps.inverse())
                count += 1
        v_theta = min((float((q - qs[0]).valuation()) for q in qs[1:]), default=float("inf"))
        worst = min(worst, v_theta)
        rows.append({"theta": ti, "n_values": len(qs), "v_min": v_theta})
    ok = count >= 6 and worst >= M - 3
    return worst, M - 3, ok, rows


def chi_restrict_p(chi: DirichletCharacter, fp: int, pk: int) -> DirichletCharacter:
    """chi o alpha: a -> chi(CRT(1 mod f', a mod p^k))."""
    return DirichletCharacter(pk, chi.E, [chi(_crt(1, fp, a, pk)) if math.gcd(a, pk) == 1 else None
                                          for a in range(pk)])


def _check_lemma3i(ctx, n, m, precision, **kw):
    """chi(L_{t,n}(eps)) = g_n(chi_p) theta(rho)^-n sum_b chi_p(b) mu_F(b + p^(n+1))."""
    M = precision
    W = M + GUARD
    p, fp = ctx.p, ctx.fprime
    t = 1 - m
    tower = ctx.tower(W)
    D = kw.get("trunc") or truncation_degree(p, n, W) + t
    G = ctx.group(n)
    Lm = L_map(p, fp, t, n, tower, W, D, G)
    lv = tower.level(n)
    P = p ** (n + 1)
    rows = []
    diffs = []
    cache = {}
    for chi in G.characters():
        data = ctx.decompose(chi, n)
        if data.n_chi != n:
            continue
        lhs = character_eval(Lm, chi)
        theta = data.theta
        key = theta.exps
        if key not in cache:
            F = theta_projected_series(p, fp, theta, tower, W, D)
            Ft = apply_operator(F, "Dcheck", t, tower)
            cache[key] = finite_level_measure(Ft, n)
        mu = cache[key]
        chi_p = data.chi_p
        acc = TowerElem.zero(lv, W + 10)
        for b in range(P):
            if b % p == 0:
                continue
            acc = acc + mu.masses[b].lift(lv) * tower.root(chi_p.E, chi_p(b), n, W)
        gl = local_gauss_sum(chi_p, n, tower, W)
        th = tower.root(theta.E, -theta(p % fp) * n, n, W) if theta.E > 1 else TowerElem.from_int(lv, 1, W)
        rhs = gl * th * acc
        d = lhs - rhs
        diffs.append(d)
        rows.append({"label": chi.label, "v": float(d.valuation())})
    margin = _vmin(diffs)
    return margin, M - 3, margin >= M - 3 and len(diffs) > 0, rows


def _check_semilocal(ctx, n, m, precision, **kw):
    """R_hat o b_n = R_{n,p}, and Phi_{n,p}(m) = 2 R_hat_{1-m,n}(b(eta)) through pointwise data."""
    cal = calibration()
    M = precision
    W = M + GUARD
    p, fp = ctx.p, ctx.fprime
    tower = ctx.tower(W)
    G = ctx.group(n)
    L = n + 3
    b = ExplicitLocalSequence.from_cyclotomic(p, fp, tower, L, W)
    R = regulator_p(p, fp, n, tower, W, G)
    Rh = semilocal_regulator(b, n, G)
    v_reg = _vmin([(R - Rh)[g] for g in G.elements])
    Lh, cert = semilocal_L_map(b, 1 - m, n, G)
    diffs, rows = [], []
    for chi in G.characters():
        lhs = phi_padic_character(ctx, chi, n, m, M, cal)
        rhs = -character_eval(Lh, chi)
        d = lhs - rhs
        diffs.append(d)
        rows.append({"label": chi.label, "v": float(d.valuation())})
    v3 = _vmin(diffs)
    thr = min(M - 2, cert)
    # reported on the pointwise scale; a shortfall of the regulator comparison
    # below M - 2 lowers the margin by the same amount
    margin = min(v3, thr + (v_reg - (M - 2)))
    rows.insert(0, {"R_hat_b_vs_R": v_reg, "certified_pointwise": cert, "threshold_pointwise": thr, "v_pointwise": v3})
    return margin, thr, v_reg >= M - 2 and v3 >= thr, rows


CHECK_KINDS = ("C1", "PROP2A", "EQ3G", "PROP3D", "LEMMA1Z", "VANISH", "LEMMA3I", "SEMILOCAL_3F1")

_DISPATCH = {
    "C1": _check_c1,
    "PROP2A": _check_prop2a,
    "EQ3G": _check_eq3g,
    "PROP3D": _check_prop3d,
    "LEMMA1Z": _check_lemma1z,
    "VANISH": _check_vanish,
    "LEMMA3I": _check_lemma3i,
    "SEMILOCAL_3F1": _check_semilocal,
}


def run_check(kind: str, p: int, fprime: int, n: int = 1, m: int = -1, precision: int = 8, **extra) -> CheckReport:
    kind = kind.upper()
    if kind not in _DISPATCH:
        raise ValueError(f"unknown check {kind}")
    ctx = tower_context(p, fprime)
    cal = calibration()
    t0 = time.perf_counter()
    margin, thr, ok, rows = _DISPATCH[kind](ctx, n=n, m=m, precision=precision, **extra)
    wall = time.perf_counter() - t0
    params = {"p": p, "fprime": fprime, "precision": precision}
    if kind not in ("PROP3D",):
        params["n"] = n
    if kind not in ("C1", "PROP3D"):
        params["m"] = m
    if extra.get("trunc"):
        params["trunc"] = int(extra["trunc"])
    return CheckReport(kind, params, "PASS" if ok else "FAIL", float(margin), float(thr),
                       cal.fingerprint, rows, wall)
