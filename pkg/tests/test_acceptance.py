"""End-to-end acceptance criteria.  Each test prints one line

    CRITERION k: PASS|FAIL  <measured values>  (<runtime> s, limit <limit> s)

to the terminal (also under output capture) and then asserts the outcome.
"""

from __future__ import annotations

import time
from fractions import Fraction as F

import numpy as np
import pytest

from picardlab.cli import main
from picardlab.operator import lemma_identity_check
from picardlab.paths import PathTrace, build_gamma, total_arg_change
from picardlab.periods import (
    annihilation_residual,
    gauss_2f1_series,
    lauricella_fd_euler,
    lauricella_fd_series,
    period_function,
    segment_period_oracle,
)
from picardlab.paths import pochhammer_contour
from picardlab.rank import ConfigTemplate, rank_lower_bound_report, sample_points
from picardlab.regulator import build_chain, closed_form_rhs, difference_chain_check, double_integral_K, relative_residual

from conftest import LAM1, LAM2, MATRIX, make_config


@pytest.fixture
def verdict(pytestconfig):
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")

    def emit(k: int, ok: bool, detail: str, elapsed: float, limit: float | None):
        timed = elapsed < limit if limit is not None else True
        status = "PASS" if ok and timed else "FAIL"
        tail = f"({elapsed:.2f} s, limit {limit:g} s)" if limit is not None else f"({elapsed:.2f} s)"
        with capman.global_and_fixture_disabled():
            print(f"\nCRITERION {k}: {status}  {detail}  {tail}", flush=True)
        assert ok, detail
        assert timed, f"runtime {elapsed:.2f} s exceeds {limit} s"

    return emit


def test_criterion_1_lemma_identity(verdict):
    t0 = time.perf_counter()
    poles = {2: [F(0), F(1)], 3: [F(0), F(1), F(-1, 2)], 4: [F(0), F(1), F(-1, 2), F(3, 2)]}
    cases = [(c, [r] * (len(c) + 1)) for c in poles.values() for r in (F(2, 5), F(1, 2), F(3, 7))]
    cases.append(([F(0), F(1), F(1, 2)], [F(1, 3), F(2, 5), F(1, 7), F(3, 4)]))
    results = [lemma_identity_check(c, r)[0] for c, r in cases]
    verdict(1, all(results), f"{sum(results)}/{len(results)} identities hold exactly", time.perf_counter() - t0, 5)


def test_criterion_2_periods_annihilated(verdict):
    t0 = time.perf_counter()
    cfg = make_config("n2_N5_A2")
    cyc = pochhammer_contour(0, 1, 0.2)
    worst_single, worst_product = 0.0, 0.0
    for shift in (0, 0.15 + 0.1j):
        moved = cfg.with_lams(LAM1 + shift, LAM2 + shift)
        for curve in (1, 2):
            worst_single = max(worst_single, annihilation_residual(moved, curve, cyc))
        P = period_function(moved, 1, cyc)
        Q = period_function(moved, 2, cyc)
        q0, p0 = Q(moved.lam2), P(moved.lam1)
        worst_product = max(
            worst_product,
            annihilation_residual(moved, 1, cyc, function=lambda lam: P(lam) * q0),
            annihilation_residual(moved, 2, cyc, function=lambda lam: p0 * Q(lam)),
        )
    ok = worst_single < 1e-6 and worst_product < 1e-6
    verdict(2, ok, f"max residual periods {worst_single:.2e}, products {worst_product:.2e} (< 1e-6)", time.perf_counter() - t0, 120)


def test_criterion_3_equality_chain(verdict):
    t0 = time.perf_counter()
    worst = {"ab": 0.0, "bc": 0.0, "cd": 0.0}
    failures = []
    count = 0
    for key in sorted(MATRIX):
        cfg = make_config(key)
        for j in range(2, cfg.n + 1):
            for l in (0, 1):
                chain = build_chain(cfg, j, l)
                for comp in (1, 2):
                    rep = difference_chain_check(cfg, j, l, component=comp, chain=chain)
                    count += 1
                    for k in worst:
                        worst[k] = max(worst[k], rep.residuals[k])
                    if not rep.passes():
                        failures.append((key, j, l, comp))
    detail = (
        f"{count} chains, max ab {worst['ab']:.1e} (< 1e-4), bc {worst['bc']:.1e} (< 1e-6), "
        f"cd {worst['cd']:.1e} (< 1e-9); failures {failures}"
    )
    verdict(3, not failures, detail, time.perf_counter() - t0, 1200)


def test_criterion_4_sheet_equivariance(verdict):
    t0 = time.perf_counter()
    cfg = make_config("n2_N5_A2")
    k0 = double_integral_K(build_chain(cfg, 2, 0, sheet=0))
    res = []
    for i in (1, 2):
        ki = double_integral_K(build_chain(cfg, 2, 0, sheet=i))
        res.append(relative_residual(ki, cfg.zeta ** (cfg.A * i) * k0))
    verdict(4, max(res) < 1e-9, f"residuals {', '.join(f'{r:.1e}' for r in res)} (< 1e-9)", time.perf_counter() - t0, 120)


def test_criterion_5_fd_oracles(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_euler = 0.0
    for _ in range(20):
        m = int(rng.integers(1, 4))
        a = rng.uniform(0.1, 0.9)
        c = a + rng.uniform(0.2, 1.5)
        b = rng.uniform(-0.5, 1.2, m)
        x = rng.uniform(0, 0.8, m) * np.exp(2j * np.pi * rng.random(m))
        worst_euler = max(worst_euler, relative_residual(lauricella_fd_series(a, b, c, x), lauricella_fd_euler(a, b, c, x)))
    worst_gauss = 0.0
    for _ in range(10):
        a, b = rng.uniform(-1, 2, 2)
        c = rng.uniform(0.3, 3)
        x = rng.uniform(0, 0.9) * np.exp(2j * np.pi * rng.random())
        worst_gauss = max(worst_gauss, relative_residual(lauricella_fd_series(a, [b], c, [x]), gauss_2f1_series(a, b, c, x)))
    worst_period = 0.0
    for key in sorted(MATRIX):
        cfg = make_config(key)
        for curve in (1, 2):
            worst_period = max(worst_period, relative_residual(*segment_period_oracle(cfg, curve, 1, 2)))
    ok = worst_euler < 1e-8 and worst_gauss < 1e-12 and worst_period < 1e-7
    detail = f"series/Euler {worst_euler:.1e} (< 1e-8), 2F1 {worst_gauss:.1e} (< 1e-12), period/Beta {worst_period:.1e} (< 1e-7)"
    verdict(5, ok, detail, time.perf_counter() - t0, 30)


def test_criterion_6_winding(verdict):
    t0 = time.perf_counter()
    cfg = make_config("n2_N5_A2")
    obstacles = [cfg.lam1, cfg.lam2]
    base = build_gamma(0, 1, obstacles, 0, cfg.N)
    ref1, ref2 = total_arg_change(base, cfg.lam1), total_arg_change(base, cfg.lam2)
    worst_arg, worst_power = 0.0, 0.0
    for l in (-1, 0, 1, 2):
        g = build_gamma(0, 1, obstacles, l, cfg.N, winding_center=cfg.lam2)
        tr = PathTrace(g, [cfg.lam1, cfg.lam2])
        worst_arg = max(
            worst_arg,
            abs(tr.total_arg_change(1) - ref2 - 2 * np.pi * l),
            abs(tr.total_arg_change(0) - ref1),
        )
        for p, lam in enumerate(obstacles):
            root = np.exp(tr.end_log(p) / cfg.N)
            worst_power = max(worst_power, abs(root**cfg.N - (g.end - lam)) / abs(g.end - lam))
    ok = worst_arg < 1e-9 and worst_power < 1e-10
    verdict(6, ok, f"arg-change error {worst_arg:.1e} (< 1e-9), N-th power error {worst_power:.1e} (< 1e-10)", time.perf_counter() - t0, 5)


EXPECTED_BOUND = {"n2_N5_A2": 8, "n2_N5_A3": 8, "n3_N2_A1": 3, "n4_N3_A1": 8}


def test_criterion_7_rank(verdict):
    t0 = time.perf_counter()
    parts, ok, worst_sum = [], True, 0.0
    for key in sorted(MATRIX):
        N, A, c = MATRIX[key]
        template = ConfigTemplate(N, A, c)
        rep = rank_lower_bound_report(template, sample_points(template, 4 * template.n, seed=0))
        ok &= rep.rank == template.n and rep.gap_ratio >= 1e6 and rep.bound == EXPECTED_BOUND[key]
        cfg = make_config(key)
        for j in range(1, cfg.n + 1):
            for comp in (1, 2):
                worst_sum = max(worst_sum, abs(sum(closed_form_rhs(cfg, j, i, comp) for i in range(cfg.N))))
        parts.append(f"{key}: rank {rep.rank}, gap {rep.gap_ratio:.1e}, bound {rep.bound}")
    ok &= worst_sum < 1e-12
    verdict(7, ok, "; ".join(parts) + f"; max |sheet sum| {worst_sum:.1e} (< 1e-12)", time.perf_counter() - t0, 10)


def test_criterion_8_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    same = []
    for argv in (["verify-lemma"], ["operator"], ["periods"], ["chain"], ["rank", "--seed", "7"]):
        outs = []
        for k in range(2):
            out = tmp_path / f"{argv[0]}_{k}.json"
            main([*argv, "--output", str(out)])
            outs.append(out.read_bytes())
        same.append(outs[0] == outs[1])
    verdict(8, all(same), f"{sum(same)}/{len(same)} commands byte-identical on re-run", time.perf_counter() - t0, None)
