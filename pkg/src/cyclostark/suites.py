"""Property suites behind `cyclostark selfcheck --module ...`.

Each suite returns a list of SuiteResult rows; a suite passes when every row
does. Randomized rows draw from random.Random(seed) only.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from ._kernels import zeros
from .coleman import (
    ColemanSeries,
    CyclotomicUnitSequence,
    cw_delta,
    g_star_h_star,
    verify_norm_relation,
    verify_norm_relation_tower,
)
from .exact_cyclotomic import (
    CyclicProductGroup,
    CyclotomicNumber,
    ExactRing,
    character_eval,
    character_table,
    complex_embed,
    gauss_sum,
    generalized_bernoulli,
    group_ring_fourier,
)
from .padic_tower import Tower, TowerElem, embed_j, teichmuller_int
from .series_measures import (
    BoundedSeries,
    apply_operator,
    count_small_roots,
    finite_level_measure,
    finite_level_measure_by_roots,
    star_test,
)

MODULES = ("exact_cyclotomic", "padic_tower", "series_measures", "coleman", "stark_engine")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _row(name, ok, detail=""):
    return SuiteResult(name, bool(ok), str(detail))


# --------------------------------------------------------------- exact_cyclotomic


def suite_exact_cyclotomic(seed: int = 0) -> list[SuiteResult]:
    rng = random.Random(seed)
    out = []
    # Fourier roundtrip on a few product groups of order <= 200
    worst = 0
    for shape in [(2,), (6,), (2, 4), (3, 3, 2), (12, 10), (5, 5, 8)]:
        G = CyclicProductGroup(shape)
        ring = ExactRing()
        chars = G.characters()
        vals = {i: CyclotomicNumber.rational(Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
                for i in range(len(chars))}
        x = group_ring_fourier(vals, G, ring)
        bad = sum(1 for i, chi in enumerate(chars) if character_eval(x, chi) != vals[i])
        worst = max(worst, bad)
    out.append(_row("fourier roundtrip", worst == 0, f"mismatches={worst}"))
    # |g(chi)| = sqrt f for primitive chi, f <= 60
    dev = 0.0
    for f in range(3, 61):
        for chi in character_table(f):
            if chi.conductor != f:
                continue
            dev = max(dev, abs(abs(complex_embed(gauss_sum(chi))) - math.sqrt(f)))
    out.append(_row("gauss sum modulus", dev < 1e-10, f"max deviation {dev:.2e}"))
    # parity vanishing of generalized Bernoulli numbers
    bad = 0
    for f in (3, 4, 5, 7, 8, 9, 12, 15, 20, 45):
        for chi in character_table(f):
            par = 0 if chi.is_even() else 1
            for k in range(1, 13):
                if k % 2 == par:
                    continue
                if k == 1 and chi.is_trivial():
                    continue
                if not generalized_bernoulli(chi, k).is_zero():
                    bad += 1
    out.append(_row("bernoulli parity vanishing", bad == 0, f"nonzero={bad}"))
    # inducing the primitive character back
    bad = 0
    for f in (12, 15, 20, 45, 60):
        for chi in character_table(f):
            prim = chi.primitive()
            for a in range(f):
                if math.gcd(a, f) == 1:
                    if (chi(a) * prim.E - prim(a % prim.modulus) * chi.E) % (chi.E * prim.E):
                        bad += 1
    out.append(_row("primitive induction", bad == 0, f"mismatches={bad}"))
    return out


# ---------------------------------------------------------------- padic_tower


def suite_padic_tower(seed: int = 0) -> list[SuiteResult]:
    rng = random.Random(seed)
    out = []
    for p, F in ((3, 20), (5, 12)):
        M = 8
        tower = Tower(p, F, 2, M + 5)
        # precision soundness: M + 5 truncated to M equals the M result
        ok = True
        for _ in range(10):
            n = rng.randint(0, 1)
            a = CyclotomicNumber.root(F * p ** (n + 1), rng.randrange(F * p ** (n + 1)))
            b = CyclotomicNumber.root(F * p ** (n + 1), rng.randrange(F * p ** (n + 1)))
            x = a + b + CyclotomicNumber.rational(p)
            hi = embed_j(x * x, tower, n, M + 5)
            lo = embed_j(x, tower, n, M)
            lo = lo * lo
            if (hi - lo).valuation() < M:
                ok = False
        out.append(_row(f"precision soundness p={p}", ok))
        # v(pi_n) via the norm down to H
        vals = []
        for n in (0, 1, 2):
            pi = tower.pi(n)
            lv = tower.level(n)
            prod = None
            for b in range(1, lv.P):
                if b % p:
                    s = pi.galois(b)
                    prod = s if prod is None else prod * s
            vals.append(prod.descend(tower.H).valuation())
        out.append(_row(f"norm of pi_n p={p}", all(v == 1 for v in vals), vals))
        # j multiplicative on roots of unity
        bad = 0
        for _ in range(100):
            N1 = F * p ** rng.randint(0, 2)
            N2 = F * p ** rng.randint(0, 2)
            k1, k2 = rng.randrange(N1), rng.randrange(N2)
            x1, x2 = CyclotomicNumber.root(N1, k1), CyclotomicNumber.root(N2, k2)
            lhs = embed_j(x1 * x2, tower, 2, M)
            rhs = embed_j(x1, tower, 2, M) * embed_j(x2, tower, 2, M)
            if (lhs - rhs).valuation() < M:
                bad += 1
        out.append(_row(f"j multiplicative p={p}", bad == 0, f"failures={bad}"))
        # Frobenius on j(zeta_{p^(n+1)}) and j(zeta_F)
        ok = True
        for n in (0, 1, 2):
            z = tower.root(p ** (n + 1), 1, n, M)
            if (z.frobenius(1) - z).valuation() < M:
                ok = False
            t = tower.root(F, 1, n, M)
            if (t.frobenius(1) - tower.root(F, p, n, M)).valuation() < M:
                ok = False
        out.append(_row(f"frobenius on roots p={p}", ok))
        # Teichmuller lifts are (p-1)-st roots of unity
        ok = all(pow(teichmuller_int(a, p, M), p - 1, p**M) == 1 for a in range(1, p))
        out.append(_row(f"teichmuller p={p}", ok))
        # inverses of non-units keep their precision
        worst = Fraction(M)
        lv = tower.level(2)
        for _ in range(10):
            x = embed_j(CyclotomicNumber.root(p**3, rng.randrange(1, p**3)) - CyclotomicNumber.one(p**3)
                        + CyclotomicNumber.rational(p), tower, 2, M + 5)
            if x.is_zero():
                continue
            err = x * x.inverse() - TowerElem.from_int(lv, 1, M + 5)
            worst = min(worst, err.valuation())
        out.append(_row(f"inverse precision p={p}", worst >= M, f"v(x x^-1 - 1) >= {worst}"))
    return out


# ------------------------------------------------------------ series_measures


def random_star_series(level, D: int, prec: int, rng: random.Random) -> BoundedSeries:
    """A polynomial in Y = 1 + X using only exponents prime to p: a star series."""
    p = level.p
    b = zeros((D + 1, level.e, level.d))
    for i in range(D + 1):
        if i % p:
            b[i, 0, 0] = rng.randrange(p**prec)
            if level.d > 1:
                b[i, 0, 1] = rng.randrange(p**prec)
    return BoundedSeries.from_Y(level, b, 0, prec, None)


def suite_series_measures(seed: int = 0, count: int = 50) -> list[SuiteResult]:
    rng = random.Random(seed)
    out = []
    p, F, M = 3, 20, 8
    tower = Tower(p, F, 2, M + 4)
    H = tower.H
    # D V = V D, to every digit both sides certify (V divides by p)
    short = 0
    for _ in range(count):
        h = random_star_series(H, 12, M, rng)
        a = apply_operator(apply_operator(h, "V", 1, tower), "D", 1)
        b = apply_operator(apply_operator(h, "D", 1), "V", 1, tower)
        cert = min(a.absprec, b.absprec)
        if (a - b).min_valuation() < cert or cert < M - 1:
            short += 1
    out.append(_row("D V = V D", short == 0, f"failures={short}"))
    # isometry
    bad = 0
    for _ in range(10):
        h = random_star_series(H, 12, M, rng)
        nh = h.min_valuation()
        for op in ("D", "V", "Dcheck"):
            img = apply_operator(h, op, 1, tower)
            if img.min_valuation() != nh:
                bad += 1
    out.append(_row("isometry of D, V, Dcheck", bad == 0, f"failures={bad}"))
    # D^t = Dcheck^t when (p - 1) | t
    worst = Fraction(M)
    for t in (2, 4, 6):
        h = random_star_series(H, 10, M, rng)
        d = (apply_operator(h, "D", t) - apply_operator(h, "Dcheck", t, tower)).min_valuation()
        worst = min(worst, d)
    out.append(_row("D^t = Dcheck^t for (p-1) | t", worst >= M, f"min v = {worst}"))
    # star closure of h* from Coleman series
    ok = True
    for c in (1, 2):
        g = ColemanSeries(CyclotomicUnitSequence(p, 5, c, 1), tower, M + 4)
        _, hs = g_star_h_star(g, 60)
        passed, _, _ = star_test(hs, tower, M)
        ok = ok and passed
    out.append(_row("star closure of h*", ok))
    # measure / series roundtrip at level L
    # the roots route divides by p^(L+1) and certifies M - L - 1 digits
    short = []
    for L in (0, 1):
        h = random_star_series(H, p ** (L + 1) - 1, M, rng)
        mu = finite_level_measure(h, L)
        nu = finite_level_measure_by_roots(h, L, tower)
        cert = min(mu.precision, nu.precision)
        gap = min((mu.masses[a] - nu.masses[a]).valuation() for a in range(p ** (L + 1)))
        if gap < cert or cert < M - L - 1:
            short.append((L, gap, cert))
    out.append(_row("measure/series roundtrip", not short, short))
    # Newton polygon root counts on constructed series
    bad = 0
    for k in range(10):
        roots = [p ** rng.randint(1, 3) * rng.choice([1, 2, 4, 5]) for _ in range(k % 4)]
        units = [rng.choice([1, 2, 4, 5, 7]) for _ in range(1 + k % 3)]
        poly = [1]
        for r in roots + [-u for u in units]:
            # multiply by (X - r) for small roots, (1 + u X) for unit factors
            lin = [-r, 1] if r in roots else [1, -r]
            new = [0] * (len(poly) + 1)
            for i, a in enumerate(poly):
                for j, b in enumerate(lin):
                    new[i + j] += a * b
            poly = new
        h = BoundedSeries.polynomial(H, poly, M + 6)
        if count_small_roots(h) != len(roots):
            bad += 1
    out.append(_row("newton polygon root counts", bad == 0, f"failures={bad}"))
    return out


# --------------------------------------------------------------------- coleman


def suite_coleman(seed: int = 0, cases: int = 20) -> list[SuiteResult]:
    rng = random.Random(seed)
    out = []
    for p, fp, F in ((3, 5, 20), (5, 3, 12)):
        seq = CyclotomicUnitSequence(p, fp)
        ok = all(verify_norm_relation(seq, k) for k in (0, 1))
        out.append(_row(f"norm coherence exact ({p},{fp})", ok))
    p, fp, M = 3, 5, 8
    tower = Tower(p, 20, 2, M + 6)
    worst_rel = Fraction(10**6)
    worst_lvl = Fraction(10**6)
    for c in (1, 2, 3, 4):
        for kappa in (1, 2, 4, 7):
            g = ColemanSeries(CyclotomicUnitSequence(p, fp, c, kappa), tower, M + 6)
            worst_rel = min(worst_rel, g.check_relation())
            worst_lvl = min(worst_lvl, g.check_levels(1))
    out.append(_row("Coleman relation for constructed series", worst_rel >= M, f"min v = {worst_rel}"))
    out.append(_row("Coleman series reproduces levels", worst_lvl >= M, f"min v = {worst_lvl}"))
    out.append(_row("norm coherence in the tower",
                    min(verify_norm_relation_tower(CyclotomicUnitSequence(p, fp), k, tower) for k in (0, 1)) >= M))
    # sigma fixing level n acts on delta_{t,n} by <kappa>^t
    bad = []
    for i in range(cases):
        n = 1 + i % 2
        t = rng.randint(-2, 4)
        j = rng.randint(1, 8)
        kappa = 1 + j * p ** (n + 1)
        c = rng.choice([1, 2])
        D = 40 * p**n + max(t, 0) + (p**4 if t < 0 else 0)
        base = ColemanSeries(CyclotomicUnitSequence(p, fp, c, 1), tower, M + 6)
        moved = ColemanSeries(CyclotomicUnitSequence(p, fp, c, kappa), tower, M + 6)
        d0 = cw_delta(base, t, n, D)
        d1 = cw_delta(moved, t, n, D)
        mod = p ** (M + 8)
        w = teichmuller_int(kappa % mod, p, M + 8)
        br = kappa * pow(w, -1, mod) % mod
        fac = pow(br, t, mod) if t >= 0 else pow(pow(br, -1, mod), -t, mod)
        diff = d1 - d0.scale(fac)
        need = min(d0.absprec, d1.absprec) - 1
        if diff.valuation() < need:
            bad.append((n, t, kappa, float(diff.valuation()), need))
    out.append(_row(f"Galois twist equivariance ({cases} cases)", not bad, bad[:3]))
    return out


# --------------------------------------------------------------- stark_engine


def suite_stark_engine(seed: int = 0) -> list[SuiteResult]:
    from .stark_engine import (
        layer_triviality_failures,
        conductor_depth_failures,
        local_gauss_sum,
        tower_context,
    )

    out = []
    for p, fp in ((3, 5), (5, 3)):
        ctx = tower_context(p, fp)
        bad = conductor_depth_failures(ctx, 3)
        out.append(_row(f"conductor equivalences ({p},{fp})", not bad, bad[:2]))
        bad = [n for n in (1, 2, 3) if layer_triviality_failures(ctx, n)]
        out.append(_row(f"layer triviality vs conductor ({p},{fp})", not bad, bad))
    # local Gauss sums vanish on characters with a conductor drop
    M = 8
    for p in (3, 5):
        tower = Tower(p, p - 1, 2, M + 4)
        bad = 0
        total = 0
        for n in (1, 2):
            for psi in character_table(p ** (n + 1)):
                if psi.conductor == p ** (n + 1):
                    continue
                total += 1
                if not local_gauss_sum(psi, n, tower, M).valuation() >= M:
                    bad += 1
        out.append(_row(f"local gauss sums with conductor drop p={p}", bad == 0 and total > 0,
                        f"{total} characters, {bad} nonzero"))
    # idempotents
    ctx = tower_context(3, 5)
    for n in (1, 2):
        S = [3, 5]
        for r in (1, 2):
            e = ctx.e_S_r(n, S, r)
            eg = ctx.e_S_r(n, S, r, greater=True)
            ok = (e * e - e).is_zero() if hasattr(e, "is_zero") else _gr_zero(e * e - e)
            ok = ok and _gr_zero(eg * eg - eg) and _gr_zero(e * eg)
            order = ctx.group(n).order
            integral = all(_is_integral(eg[g].scale(order) if hasattr(eg[g], "scale") else eg[g] * order)
                           for g in ctx.group(n).elements)
            out.append(_row(f"idempotents n={n} r={r}", ok and integral))
    return out


def _gr_zero(x) -> bool:
    return all(x[g] == x.ring.zero() or _cz(x[g]) for g in x.group.elements)


def _cz(c) -> bool:
    return isinstance(c, CyclotomicNumber) and c.is_zero()


def _is_integral(c) -> bool:
    return isinstance(c, CyclotomicNumber) and c.den == 1


SUITES = {
    "exact_cyclotomic": suite_exact_cyclotomic,
    "padic_tower": suite_padic_tower,
    "series_measures": suite_series_measures,
    "coleman": suite_coleman,
    "stark_engine": suite_stark_engine,
}


def run_suite(module: str, seed: int = 0) -> list[SuiteResult]:
    if module not in SUITES:
        raise ValueError(f"unknown module {module}")
    return SUITES[module](seed)
