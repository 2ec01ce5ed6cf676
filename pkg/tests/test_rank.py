from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from picardlab.errors import InadmissiblePoint, NoClearGap, ValidationError
from picardlab.rank import (
    ConfigTemplate,
    jacobi_svd,
    numerical_rank,
    rank_lower_bound_report,
    sample_matrix,
    sample_points,
    singular_values,
)

from conftest import MATRIX


def template(key: str) -> ConfigTemplate:
    N, A, c = MATRIX[key]
    return ConfigTemplate(N, A, c)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ----------------------------------------------------------------------------
# SVD


def test_identity():
    assert numerical_rank(np.eye(4)).rank == 4
    assert np.allclose(singular_values(np.eye(3)), 1.0)


def test_outer_product_rank_one():
    rng = np.random.default_rng(1)
    u, v = random_complex(rng, 5), random_complex(rng, 7)
    res = numerical_rank(np.outer(u, v))
    assert res.rank == 1
    assert abs(res.singular_values[0] - np.linalg.norm(u) * np.linalg.norm(v)) < 1e-12 * res.singular_values[0]


def test_duplicate_columns():
    rng = np.random.default_rng(2)
    M = random_complex(rng, (4, 3))
    assert numerical_rank(np.hstack([M, M, 2j * M])).rank == 3


def test_column_scaling_preserves_rank():
    rng = np.random.default_rng(3)
    M = random_complex(rng, (3, 6))
    D = np.diag([1e-3, 1, 1e3, 5, 0.2, 1j])
    assert numerical_rank(M @ D).rank == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_svd_matches_numpy(m, k, seed):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, (m, k))
    res = jacobi_svd(M)
    ref = np.linalg.svd(M, compute_uv=False)
    assert np.allclose(res.s[: len(ref)], ref, rtol=1e-12, atol=1e-13 * ref[0])
    assert np.all(np.diff(res.s) <= 0)
    recon = res.U @ np.diag(res.s) @ res.Vh
    assert np.linalg.norm(recon - M) < 1e-10 * np.linalg.norm(M)


def test_svd_wide_spread():
    rng = np.random.default_rng(4)
    Q1, _ = np.linalg.qr(random_complex(rng, (4, 4)))
    Q2, _ = np.linalg.qr(random_complex(rng, (4, 4)))
    s = np.array([1e12, 1.0, 1e-3, 1e-12])
    res = jacobi_svd(Q1 @ np.diag(s) @ Q2)
    # backward stable: absolute error at the rounding level of the largest value
    assert np.all(np.abs(res.s - s) < 1e-14 * s[0] * 16)


def test_no_clear_gap():
    s = np.logspace(0, -8, 6)
    with pytest.raises(NoClearGap):
        numerical_rank(np.diag(s), gap_threshold=1e6)
    with pytest.raises(NoClearGap):
        numerical_rank(np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        numerical_rank(np.eye(2), gap_threshold=1.0)


# ----------------------------------------------------------------------------
# sample points and matrices


def test_points_are_seeded_and_admissible():
    t = template("n3_N2_A1")
    pts = sample_points(t, 12, seed=7)
    assert pts == sample_points(t, 12, seed=7)
    assert pts != sample_points(t, 12, seed=8)
    for a, b in pts:
        assert abs(a - b) >= 0.3
        assert min(abs(z - c) for z in (a, b) for c in t.c) >= 0.3


def test_inadmissible_point():
    t = template("n2_N5_A2")
    with pytest.raises(InadmissiblePoint):
        t.at(0, 1 + 1j)
    with pytest.raises(InadmissiblePoint):
        t.at(1j, 1j)


def test_matrix_needs_enough_points():
    t = template("n2_N5_A2")
    with pytest.raises(ValidationError):
        sample_matrix(t, sample_points(t, 3))


def test_swapped_points_give_distinct_columns():
    t = template("n2_N5_A2")
    a, b = 0.3 + 1.2j, 1.5 - 0.9j
    m = sample_matrix(t, [(a, b), (b, a), (a + 0.5, b), (a, b - 0.5)]).values
    assert np.linalg.norm(m[:, 0:2] - m[:, 2:4]) > 1e-3 * np.linalg.norm(m[:, 0:2])


def test_template_seeds_follow_branch():
    t = template("n2_N5_A2")
    cfg = t.at(-0.6 + 0.35j, 1.85 - 0.45j)
    base = t.base_config()
    for s, s0 in zip(cfg.seeds1, base.seeds1):
        assert abs(s - s0) < 0.1 * abs(s0)


EXPECTED_BOUND = {"n2_N5_A2": 8, "n2_N5_A3": 8, "n3_N2_A1": 3, "n4_N3_A1": 8}


@pytest.mark.parametrize("key", sorted(MATRIX))
def test_rank_lower_bound(key):
    t = template(key)
    rep = rank_lower_bound_report(t, sample_points(t, 4 * t.n, seed=0))
    assert rep.rank == t.n
    assert rep.gap_ratio >= 1e6
    assert rep.bound == EXPECTED_BOUND[key]
    assert len(rep.nonvanishing) == t.n
    d = rep.to_json()
    assert d["numerical_rank"] == d["expected_rank"] == t.n
    assert "algebraic" in d["justification"]
