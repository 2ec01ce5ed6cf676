from __future__ import annotations

import cmath

import pytest

from picardlab.errors import InvalidIndex, ValidationError
from picardlab.quadrature import QuadratureConfig
from picardlab.regulator import (
    _u_antiderivative,
    build_chain,
    closed_form_rhs,
    difference_chain_check,
    difference_closed_form,
    double_integral_K,
    nu_pairing,
    relative_residual,
    stokes_reduced_integral,
    u_substitution_integral,
)

from conftest import MATRIX, make_config


@pytest.fixture(scope="module")
def cfg():
    return make_config()


@pytest.fixture(scope="module")
def chain(cfg):
    return build_chain(cfg, 2, 0)


# ----------------------------------------------------------------------------
# chain geometry


@pytest.mark.parametrize("key", sorted(MATRIX))
@pytest.mark.parametrize("l", [0, 1, -1])
def test_chain_reaches_seeds(key, l):
    c = make_config(key)
    for j in range(2, c.n + 1):
        ch = build_chain(c, j, l)
        e1, e2 = ch.end_roots()
        assert abs(e1 - c.seeds1[j - 1]) < 1e-10 * abs(e1)
        assert abs(e2 - c.zeta**l * c.seeds2[j - 1]) < 1e-10 * abs(e2)
        assert ch.path.start == c.c[0] and ch.path.end == c.c[j - 1]


def test_chain_index_checks(cfg):
    for j in (0, 1, 3):
        with pytest.raises(InvalidIndex):
            build_chain(cfg, j)
    with pytest.raises(InvalidIndex):
        closed_form_rhs(cfg, 3)
    with pytest.raises(ValidationError):
        closed_form_rhs(cfg, 1, component=3)


# ----------------------------------------------------------------------------
# the double integral


@pytest.mark.parametrize("sheet", [1, 2, 4, 7])
def test_sheet_equivariance(cfg, chain, sheet):
    k0 = double_integral_K(chain)
    ki = double_integral_K(build_chain(cfg, 2, 0, sheet=sheet))
    assert relative_residual(ki, cfg.zeta ** (cfg.A * sheet) * k0) < 1e-9


def test_self_convergence(chain):
    coarse = double_integral_K(chain)
    fine = double_integral_K(chain, QuadratureConfig(level=5, max_level=9))
    assert relative_residual(coarse, fine) < 1e-11


def test_eps_halving(cfg, chain):
    half = build_chain(cfg, 2, 0, eps=chain.eps / 2)
    assert relative_residual(double_integral_K(chain), double_integral_K(half)) < 1e-9
    assert relative_residual(stokes_reduced_integral(chain), stokes_reduced_integral(half)) < 1e-10


def test_homotopic_paths_with_loops(cfg):
    # one turn around lam2 and back gives the l = 0 value again
    a = build_chain(cfg, 2, 0)
    b = build_chain(cfg, 2, 0, eps=0.3)
    assert relative_residual(stokes_reduced_integral(a, component=2), stokes_reduced_integral(b, component=2)) < 1e-10


def test_conjugation_symmetry(cfg):
    conj = cfg.conjugate()
    a = build_chain(cfg, 2, 0)
    b = build_chain(conj, 2, 0)
    assert relative_residual(double_integral_K(b), double_integral_K(a).conjugate()) < 1e-10
    for comp in (1, 2):
        assert relative_residual(
            stokes_reduced_integral(b, component=comp), stokes_reduced_integral(a, component=comp).conjugate()
        ) < 1e-10


# ----------------------------------------------------------------------------
# reduced integrals


@pytest.mark.parametrize("comp", [1, 2])
def test_stokes_reversal_negates(chain, comp):
    fwd = stokes_reduced_integral(chain, component=comp)
    back = stokes_reduced_integral(chain, component=comp, reverse=True)
    assert relative_residual(fwd, -back) < 1e-12


def test_u_antiderivatives():
    u = 0.7 + 0.4j
    N, M = 5, 2
    assert abs(_u_antiderivative(2, N, M, u) - u**M / M) < 1e-15
    ref = u ** (N + M) / (N + M) - u**M / M
    assert abs(_u_antiderivative(3, N, M, u) - ref) < 1e-15


@pytest.mark.parametrize("key", sorted(MATRIX))
@pytest.mark.parametrize("comp", [1, 2])
def test_u_substitution_closed_vs_quadrature(key, comp):
    c = make_config(key)
    ch = build_chain(c, c.n, 1)
    quad = u_substitution_integral(ch, component=comp)
    exact = u_substitution_integral(ch, component=comp, closed=True)
    assert relative_residual(quad, exact) < 1e-11


# ----------------------------------------------------------------------------
# closed forms


def test_two_pole_closed_form(cfg):
    # n = 2: the sum has one term and (A/N)_1 / A = 1/N
    z = cfg.zeta
    for j in (1, 2):
        r = cfg.seeds2[j - 1] / cfg.seeds1[j - 1]
        ref = (1 - z**cfg.A) / (cfg.lam2 - cfg.lam1) * r**cfg.A
        assert relative_residual(closed_form_rhs(cfg, j), ref) < 1e-14
        ref2 = -(1 - z**cfg.A) / (cfg.lam1 - cfg.lam2) * r ** -(cfg.N - cfg.A)
        assert relative_residual(closed_form_rhs(cfg, j, component=2), ref2) < 1e-14


@pytest.mark.parametrize("key", sorted(MATRIX))
@pytest.mark.parametrize("comp", [1, 2])
def test_sheet_relations(key, comp):
    c = make_config(key)
    for j in range(1, c.n + 1):
        vals = [closed_form_rhs(c, j, i, comp) for i in range(c.N)]
        scale = max(abs(v) for v in vals)
        assert abs(sum(vals)) < 1e-12 * scale
        for i in range(c.N):
            assert relative_residual(closed_form_rhs(c, j, i + 1, comp), c.zeta**c.A * vals[i]) < 1e-13
        assert closed_form_rhs(c, j, c.N, comp) == vals[0]


@pytest.mark.parametrize("key", sorted(MATRIX))
def test_winding_period_N(key):
    c = make_config(key)
    for comp in (1, 2):
        for l in range(c.N):
            assert difference_closed_form(c, 2, l, 0, comp) == difference_closed_form(c, 2, l + c.N, 0, comp)


@pytest.mark.parametrize("key", sorted(MATRIX))
@pytest.mark.parametrize("comp", [1, 2])
def test_single_cycle_images(key, comp):
    c = make_config(key)
    for j in range(1, c.n + 1):
        for i in (0, 1):
            assert relative_residual(nu_pairing(c, j, i, comp), closed_form_rhs(c, j, i, comp)) < 1e-9


# ----------------------------------------------------------------------------
# the equality chain


@pytest.mark.parametrize("l", [0, 1])
@pytest.mark.parametrize("comp", [1, 2])
def test_equality_chain_canonical(cfg, l, comp):
    rep = difference_chain_check(cfg, 2, l, component=comp)
    r = rep.residuals
    assert r["ab"] < 1e-6
    assert r["bc"] < 1e-10
    assert r["cd"] < 1e-10
    assert rep.passes()


@pytest.mark.parametrize("key", ["n3_N2_A1", "n4_N3_A1"])
def test_equality_chain_more_poles(key):
    c = make_config(key)
    for comp in (1, 2):
        rep = difference_chain_check(c, c.n, 1, component=comp)
        assert rep.passes(), rep.residuals


def test_equality_chain_sheet(cfg):
    rep = difference_chain_check(cfg, 2, 1, i=3)
    assert rep.passes()
    base = difference_chain_check(cfg, 2, 1)
    assert relative_residual(rep.value_closed_form, cfg.zeta ** (3 * cfg.A) * base.value_closed_form) < 1e-13


def test_report_json(cfg, chain):
    rep = difference_chain_check(cfg, 2, 0, chain=chain)
    d = rep.to_json()
    assert "runtimes" not in d
    assert set(d["residuals"]) == {"ab", "ac", "ad", "bc", "bd", "cd"}
    assert "runtimes" in rep.to_json(include_runtimes=True)
