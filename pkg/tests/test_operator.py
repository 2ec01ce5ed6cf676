from __future__ import annotations

import cmath
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from picardlab.errors import DuplicatePoles, NonFiniteSample, ValidationError
from picardlab.exact import UniPoly
from picardlab.operator import (
    DerivativeScheme,
    apply_operator_numeric,
    build_jp_operator,
    cauchy_derivatives,
    equal_parameter_operator,
    lemma_identity_check,
    potential_x_derivative,
)


def test_canonical_coefficients():
    op = equal_parameter_operator([F(0), F(1)], F(2, 5))
    assert op.q0 == UniPoly([0, -1, 1])
    assert op.p[0] == UniPoly([F(-4, 5), F(8, 5)])  # (4/5)(2 lam - 1)
    assert op.p[1] == UniPoly([F(2, 25)])
    assert op.exact


def test_zero_parameters_kill_lower_coefficients():
    op = equal_parameter_operator([F(0), F(1)], F(0))
    assert op.q1.is_zero()
    assert all(p.is_zero() for p in op.p)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_monic_and_degree_bounds(n):
    op = equal_parameter_operator([F(k, 3) for k in range(n)], F(3, 7))
    assert op.q0.degree == n and op.q0.coeffs[-1] == 1
    for k, p in enumerate(op.p, start=1):
        assert p.degree <= n - k


def test_duplicate_poles_rejected():
    with pytest.raises(DuplicatePoles):
        build_jp_operator([F(0), F(1), F(0)], [F(1, 2)] * 4)


def test_wrong_lengths_rejected():
    with pytest.raises(ValidationError):
        build_jp_operator([F(0), F(1)], [F(1, 2)] * 2)


@pytest.mark.parametrize(
    "c, r",
    [
        ([0, 1], [F(2, 5)] * 3),
        ([0, 1, -1], [F(1, 2)] * 4),
        ([0, 1, F(1, 2)], [F(1, 3), F(2, 5), F(1, 7), F(3, 4)]),
    ],
)
def test_lemma_identity_holds(c, r):
    holds, diff = lemma_identity_check(c, r)
    assert holds and diff.is_zero()


def test_lemma_identity_detects_corruption():
    op = equal_parameter_operator([F(0), F(1)], F(2, 5))
    bad = op.with_p(2, op.p[1] + UniPoly([F(1)]))
    holds, diff = lemma_identity_check(operator=bad)
    assert not holds
    assert not diff.is_zero()


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=2, max_size=4, unique=True),
    st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=10),
)
def test_lemma_identity_property(c, r):
    assert lemma_identity_check(c, [r] * (len(c) + 1))[0]


def test_exact_and_float_builds_agree():
    c, r = [F(0), F(1), F(-1, 2)], [F(2, 5)] * 4
    exact = build_jp_operator(c, r)
    numeric = build_jp_operator([complex(v) for v in c], [complex(v) for v in r])
    lam = 0.3 - 0.7j
    a, b = exact.coefficients_at(lam), numeric.coefficients_at(lam)
    assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)) < 1e-12


def test_cauchy_derivatives_of_exp():
    lam = 0.3 + 0.1j
    d = cauchy_derivatives(cmath.exp, lam, 2, DerivativeScheme(), 1.0)
    for v in d:
        assert abs(v - cmath.exp(lam)) < 1e-10 * abs(cmath.exp(lam))


def test_cauchy_derivatives_affine_and_pole():
    d = cauchy_derivatives(lambda z: 3 * z + 1, 0.2, 3, DerivativeScheme(), 1.0)
    assert abs(d[2]) < 1e-10 and abs(d[3]) < 1e-10
    d = cauchy_derivatives(lambda z: 1 / (z - 2), 0.0, 1, DerivativeScheme(), 2.0)
    assert abs(d[1] + 0.25) < 1e-12


def test_order_zero_is_plain_evaluation():
    f = lambda z: cmath.sin(z) / (z + 3)  # noqa: E731
    lam = 0.4 + 0.2j
    assert abs(cauchy_derivatives(f, lam, 2, DerivativeScheme(), 1.0)[0] - f(lam)) < 1e-12 * abs(f(lam))


def test_scheme_validation():
    with pytest.raises(ValidationError):
        DerivativeScheme(radius_fraction=0.75)
    with pytest.raises(ValidationError):
        cauchy_derivatives(cmath.exp, 0, 8, DerivativeScheme(samples=16), 1.0)


def test_nonfinite_sample_raises():
    with pytest.raises(NonFiniteSample):
        cauchy_derivatives(lambda z: float("nan"), 0, 1, DerivativeScheme(), 1.0)


def test_constant_function_gives_last_coefficient():
    op = equal_parameter_operator([F(0), F(1)], F(2, 5))
    assert abs(apply_operator_numeric(op, lambda z: 1.0, 0.3 + 0.2j) - 2 / 25) < 1e-13


def test_potential_identity_numerically():
    # L applied to (x0 - lam)^(-r0) prod (x0 - c_j)^(-r_j) equals dH/dx at x0
    c = [0.0, 1.0, 0.5 + 0.9j]
    r = [F(2, 5), F(1, 3), F(1, 2), F(3, 7)]
    op = build_jp_operator(c, r)
    x0 = 2.3 + 0.4j
    lam = -0.6 + 0.2j
    rr = [complex(v) for v in r]

    def f(z):
        return cmath.exp(-rr[0] * cmath.log(x0 - z) - sum(rj * cmath.log(x0 - cj) for rj, cj in zip(rr[1:], c)))

    got = apply_operator_numeric(op, f, lam, DerivativeScheme(), abs(x0 - lam))
    want = potential_x_derivative(op, lam, x0)
    assert abs(got - want) < 1e-10 * abs(want)


@settings(max_examples=15, deadline=None)
@given(
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.floats(min_value=0.1, max_value=2.0),
)
def test_operator_is_linear(a, b, w):
    op = equal_parameter_operator([0j, 1 + 0j, 0.5 + 0.9j], 0.4 + 0j)
    lam = -0.5 + 0.3j
    f = lambda z: cmath.exp(w * z)  # noqa: E731
    g = lambda z: 1 / (z - 3)  # noqa: E731
    lhs = apply_operator_numeric(op, lambda z: a * f(z) + b * g(z), lam)
    rhs = a * apply_operator_numeric(op, f, lam) + b * apply_operator_numeric(op, g, lam)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs), abs(rhs))
