from __future__ import annotations

import mpmath
import pytest

from cyclostark.exact_cyclotomic import character_eval, character_table
from cyclostark.padic_tower import Tower, TowerElem, embed_j
from cyclostark.stark_engine import (
    CHECK_KINDS,
    CheckReport,
    calibration,
    complex_regulator,
    layer_triviality_failures,
    fit_holdout,
    fit_nodes,
    in_M,
    conductor_depth_failures,
    local_gauss_sum,
    phi_character_value,
    phi_padic,
    phi_value,
    run_check,
    select_calibration,
    tower_context,
)

M = 8


# ---- calibration


def test_calibration_is_decisive_and_frozen():
    cal, res = select_calibration()
    assert cal.name == "A"
    assert res["A"] < 1e-7
    assert res["B"] > 1.0
    assert cal.fingerprint == "fad2af3d7a3de223"
    assert calibration() is cal


# ---- complex side


@pytest.mark.parametrize("p,fp,n", [(3, 5, 1), (5, 3, 0), (3, 7, 1)])
def test_complex_regulator_against_sine_formula(p, fp, n):
    """|1 - zeta^a|^2 = 4 sin^2(pi a / f), so log|eps^sigma_a| = log(4 sin^2(pi a / f))."""
    ctx = tower_context(p, fp)
    G = ctx.group(n)
    f = ctx.f(n)
    R = complex_regulator(ctx, n)
    for a in G.elements:
        want = -0.5 * mpmath.log(4 * mpmath.sin(mpmath.pi * a / f) ** 2)
        assert R[G.inv(a)] == pytest.approx(complex(want), abs=1e-12)


@pytest.mark.parametrize("p,fp,n", [(3, 5, 1), (3, 5, 2), (5, 3, 1)])
def test_c1_holds(p, fp, n):
    r = run_check("C1", p, fp, n)
    assert r.passed and r.margin < 1e-7


# ---- exact values


@pytest.mark.parametrize("m", [0, -1, -2])
def test_phi_value_fourier_roundtrip(m):
    ctx = tower_context(3, 5)
    n = 1
    x = phi_value(ctx, n, "empty", m)
    for chi in ctx.group(n).characters():
        assert character_eval(x, chi) == phi_character_value(ctx, chi, n, "empty", m)


def test_phi_value_rejects_positive_m():
    ctx = tower_context(3, 5)
    chi = ctx.group(1).characters()[0]
    with pytest.raises(ValueError):
        phi_character_value(ctx, chi, 1, "empty", 1)


@pytest.mark.parametrize("p,fp,n,m", [(3, 5, 1, -1), (3, 5, 2, -3), (5, 3, 1, -3), (5, 3, 1, -1)])
def test_exact_identities(p, fp, n, m):
    assert run_check("PROP2A", p, fp, n, m).passed
    assert run_check("LEMMA1Z", p, fp, n, m).passed


# ---- conductor bookkeeping


@pytest.mark.parametrize("p,fp", [(3, 5), (5, 3), (3, 7)])
def test_conductor_lemmas(p, fp):
    ctx = tower_context(p, fp)
    assert conductor_depth_failures(ctx, 3) == []
    for n in (1, 2, 3):
        assert layer_triviality_failures(ctx, n) == []
    with pytest.raises(ValueError):
        layer_triviality_failures(ctx, ctx.n2 - 1)


@pytest.mark.parametrize("p", [3, 5])
def test_local_gauss_sum_product(p):
    """g(psi) g(psi^-1) = psi(-1) p^(n+1) for primitive psi mod p^(n+1)."""
    tower = Tower(p, p - 1, 1, M + 4)
    n = 1
    P = p ** (n + 1)
    seen = 0
    for psi in character_table(P):
        if psi.conductor != P:
            continue
        a = local_gauss_sum(psi, n, tower, M)
        b = local_gauss_sum(psi.conj(), n, tower, M)
        sign = 1 if psi(P - 1) == 0 else -1
        want = TowerElem.from_int(tower.level(n), sign * P, M + 4)
        assert (a * b - want).valuation() >= M
        seen += 1
    # primitive characters mod p^2: phi(p^2) - phi(p)
    assert seen == P - 2 * p + 1


def test_local_gauss_sum_does_not_depend_on_representatives():
    tower = Tower(3, 2, 1, M + 4)
    psi = next(c for c in character_table(9) if c.conductor == 9)
    a = local_gauss_sum(psi, 1, tower, M)
    b = local_gauss_sum(psi, 1, tower, M, shift=5)
    assert (a - b).valuation() >= M


# ---- p-adic interpolation


def test_interpolation_nodes():
    assert fit_nodes(3) == [-1, -3, -5, -7, -9, -11]
    assert fit_nodes(5)[:2] == [-3, -7]
    assert in_M(3, -13) and not in_M(3, -2) and not in_M(3, 1)
    assert in_M(5, 1 - 4 * 9) and not in_M(5, -1)


def test_phi_padic_on_nodes_is_exact():
    ctx = tower_context(3, 5)
    x, cert = phi_padic(ctx, 1, -3, M)
    assert cert == M + 6
    exact = phi_value(ctx, 1, "p", -3)
    tower = ctx.tower(M + 6)
    for g in ctx.group(1).elements:
        d = x[g] - embed_j(exact[g], tower, 1, M + 6)
        assert d.is_zero() or d.valuation() >= M + 6


def test_phi_padic_off_nodes_is_certified():
    ctx = tower_context(3, 5)
    x, cert = phi_padic(ctx, 1, -2, M)
    assert 4 <= cert <= M + 6


@pytest.mark.parametrize("n", [1, 2])
def test_fit_holdout(n):
    ctx = tower_context(3, 5)
    rows = fit_holdout(ctx, n, M)
    assert rows
    for r in rows:
        assert r["residual"] >= r["certified"]
        assert r["residual"] >= 4


def test_fit_holdout_rejects_used_node():
    ctx = tower_context(3, 5)
    with pytest.raises(ValueError):
        fit_holdout(ctx, 1, M, held=-1)
    with pytest.raises(ValueError):
        fit_holdout(ctx, 1, M, held=-2)


# ---- reports


@pytest.mark.parametrize("kind", CHECK_KINDS)
def test_every_check_passes_at_small_size(kind):
    r = run_check(kind, 3, 5, 1, -1, M)
    assert r.kind == kind
    assert r.passed, r.details
    assert r.calibration == calibration().fingerprint


def test_report_roundtrip():
    r = run_check("EQ3G", 3, 5, 1, -3, M)
    assert r.params == {"p": 3, "fprime": 5, "n": 1, "m": -3, "precision": M}
    back = CheckReport.from_dict(r.to_dict(timing=True))
    assert back.to_dict(timing=True) == r.to_dict(timing=True)
    assert "wall_time" not in r.to_dict()
    rec = r.record()
    assert rec.startswith("kind=EQ3G outcome=PASS") and "\n" not in rec
    assert "EQ3G" in r.line()


def test_unknown_check():
    with pytest.raises(ValueError):
        run_check("NOPE", 3, 5)
