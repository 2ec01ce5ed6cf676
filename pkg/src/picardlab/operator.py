"""Jordan-Pochhammer operators: exact construction, the potential identity,
and numerical application to analytic functions via contour differentiation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DuplicatePoles, NonFiniteSample, ValidationError
from .exact import BiPoly, UniPoly, binomial_general, pochhammer


def _exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


@dataclass(frozen=True)
class JPOperator:
    """L = q0 d^n + p_1 d^(n-1) + ... + p_n in the variable lam."""

    order: int
    r: tuple
    poles: tuple
    q0: UniPoly
    q1: UniPoly
    p: tuple  # p[k-1] is p_k, k = 1..n
    exact: bool
    _numeric: tuple = field(default=(), repr=False, compare=False)

    def coefficient_polys(self) -> list[UniPoly]:
        """[q0, p_1, ..., p_n]: coefficient of d^(n-k) at index k."""
        return [self.q0, *self.p]

    def coefficients_at(self, lam: complex) -> np.ndarray:
        polys = self._numeric or tuple(c.to_complex() for c in self.coefficient_polys())
        return np.array([poly(complex(lam)) for poly in polys], dtype=complex)

    def with_p(self, k: int, poly: UniPoly) -> "JPOperator":
        """Copy with p_k replaced; used to build deliberately corrupted operators."""
        p = list(self.p)
        p[k - 1] = poly
        numeric = tuple(c.to_complex() for c in [self.q0, *p])
        return JPOperator(self.order, self.r, self.poles, self.q0, self.q1, tuple(p), self.exact, numeric)


def build_jp_operator(c: Sequence, r: Sequence) -> JPOperator:
    """Coefficients q0, q1 and p_1..p_n for poles c_1..c_n and parameters r_0..r_n.

    Exact (Fraction) arithmetic is used when every pole and parameter is an int
    or Fraction; otherwise coefficients are complex.
    """
    n = len(c)
    if n < 1 or len(r) != n + 1:
        raise ValidationError(f"need n poles and n+1 parameters, got {len(c)} and {len(r)}")
    for a in range(n):
        for b in range(a + 1, n):
            if c[a] == c[b]:
                raise DuplicatePoles(f"poles c_{a + 1} and c_{b + 1} coincide ({c[a]})")
    exact = _exact(c) and _exact(r)
    if exact:
        c = [Fraction(v) for v in c]
        r = [Fraction(v) for v in r]
        one = Fraction(1)
    else:
        c = [complex(v) for v in c]
        r = [complex(v) for v in r]
        one = 1.0 + 0j

    q0 = UniPoly([one])
    for cj in c:
        q0 = q0 * UniPoly.linear_root(cj, one)
    q1 = UniPoly()
    for j, cj in enumerate(c):
        rest = UniPoly([one])
        for k, ck in enumerate(c):
            if k != j:
                rest = rest * UniPoly.linear_root(ck, one)
        q1 = q1 + rest * r[j + 1]

    alpha = n + r[0] - 2
    p = []
    for k in range(1, n + 1):
        term = q0.derivative(k) * binomial_general(alpha, k)
        term = term + q1.derivative(k - 1) * binomial_general(alpha, k - 1)
        p.append(term)
    numeric = tuple(poly.to_complex() for poly in [q0, *p])
    return JPOperator(n, tuple(r), tuple(c), q0, q1, tuple(p), exact, numeric)


def equal_parameter_operator(c: Sequence, r) -> JPOperator:
    """Operator with r_0 = r_1 = ... = r_n = r."""
    return build_jp_operator(c, [r] * (len(c) + 1))


def lemma_identity_sides(op: JPOperator) -> tuple[BiPoly, BiPoly]:
    """Both sides of the polynomial identity behind the potential lemma.

    LHS = sum_k (r0)_(n-k) p_k(lam) (x - lam)^k   (p_0 = q0)
    RHS = (r0)_(n-1) [ (n + r0 - 1) q0(x) + (x - lam) q1(x) - (x - lam) q0'(x) ]
    """
    n, r0 = op.order, op.r[0]
    x_minus_lam = BiPoly.x() - BiPoly.lam()
    lhs = BiPoly()
    shift = BiPoly.constant(Fraction(1) if op.exact else 1.0)
    for k, coeff in enumerate(op.coefficient_polys()):
        lhs = lhs + BiPoly.from_uni(coeff, "lam") * shift * pochhammer(r0, n - k)
        shift = shift * x_minus_lam
    rhs = (
        BiPoly.from_uni(op.q0, "x") * (n + r0 - 1)
        + x_minus_lam * BiPoly.from_uni(op.q1, "x")
        - x_minus_lam * BiPoly.from_uni(op.q0.derivative(), "x")
    ) * pochhammer(r0, n - 1)
    return lhs, rhs


def lemma_identity_check(
    c: Sequence | None = None,
    r: Sequence | None = None,
    *,
    operator: JPOperator | None = None,
) -> tuple[bool, BiPoly]:
    """Exact check of the identity; returns (holds, LHS - RHS)."""
    if operator is None:
        if c is None or r is None:
            raise ValidationError("pass poles and parameters, or a built operator")
        if len(c) < 2:
            raise ValidationError("the identity is stated for n >= 2")
        operator = build_jp_operator(c, r)
    if not operator.exact:
        raise ValidationError("exact identity check needs rational poles and parameters")
    lhs, rhs = lemma_identity_sides(operator)
    diff = lhs - rhs
    return diff.is_zero(), diff


@dataclass(frozen=True)
class DerivativeScheme:
    radius_fraction: float = 0.25
    samples: int = 32

    def __post_init__(self):
        if not 0.0 < self.radius_fraction <= 0.5:
            raise ValidationError("radius_fraction must lie in (0, 1/2]")
        if self.samples < 4:
            raise ValidationError("need at least 4 circle samples")

    def check_order(self, order: int) -> None:
        if self.samples < 4 * (order + 1):
            raise ValidationError(
                f"{self.samples} circle samples cannot resolve derivatives of order {order}; "
                f"need >= {4 * (order + 1)}"
            )


def circle_points(lam: complex, radius: float, samples: int) -> np.ndarray:
    m = np.arange(samples)
    return lam + radius * np.exp(2j * np.pi * m / samples)


def cauchy_derivatives(
    f: Callable[[complex], complex],
    lam: complex,
    max_order: int,
    scheme: DerivativeScheme = DerivativeScheme(),
    clearance: float = 1.0,
) -> list[complex]:
    """f^(k)(lam), k = 0..max_order, by the trapezoidal rule on a circle of
    radius radius_fraction * clearance.  ``f`` must be analytic on that disk."""
    if clearance <= 0 or not math.isfinite(clearance):
        raise ValidationError(f"clearance must be positive and finite, got {clearance}")
    scheme.check_order(max_order)
    rho = scheme.radius_fraction * clearance
    pts = circle_points(lam, rho, scheme.samples)
    vals = np.empty(scheme.samples, dtype=complex)
    for m, z in enumerate(pts):  # fixed order keeps sums reproducible
        v = complex(f(complex(z)))
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise NonFiniteSample(f"f({z}) = {v}")
        vals[m] = v
    return derivatives_from_samples(vals, rho, max_order)


def derivatives_from_samples(vals: np.ndarray, rho: float, max_order: int) -> list[complex]:
    M = len(vals)
    coeffs = np.fft.fft(vals) / M  # Taylor coefficients times rho^k
    return [complex(coeffs[k] * math.factorial(k) / rho**k) for k in range(max_order + 1)]


def operator_terms(op: JPOperator, derivs: Sequence[complex], lam: complex) -> np.ndarray:
    """Individual terms q0 f^(n), p_1 f^(n-1), ..., p_n f."""
    n = op.order
    coeffs = op.coefficients_at(lam)
    return np.array([coeffs[k] * derivs[n - k] for k in range(n + 1)], dtype=complex)


def apply_operator_numeric(
    op: JPOperator,
    f: Callable[[complex], complex],
    lam: complex,
    scheme: DerivativeScheme = DerivativeScheme(),
    clearance: float = 1.0,
    *,
    return_terms: bool = False,
):
    derivs = cauchy_derivatives(f, lam, op.order, scheme, clearance)
    terms = operator_terms(op, derivs, lam)
    value = complex(terms.sum())
    return (value, terms) if return_terms else value


def normalized_residual(value: complex, terms: np.ndarray) -> float:
    scale = float(np.max(np.abs(terms)))
    if scale == 0.0:
        return 0.0 if value == 0 else math.inf
    return abs(value) / scale


def potential_x_derivative(op: JPOperator, lam: complex, x: complex) -> complex:
    """dH/dx at x for H = -(r0)_(n-1) (x-lam)^(-n+1-r0) prod (x-c_j)^(1-r_j),
    principal powers (x must keep every factor off the negative real axis
    if it is compared against principal-branch integrands)."""
    n = op.order
    r = [complex(v) for v in op.r]
    c = [complex(v) for v in op.poles]
    lam = complex(lam)
    x = complex(x)
    h = -complex(pochhammer(r[0], n - 1)) * cmath.exp(
        (-n + 1 - r[0]) * cmath.log(x - lam) + sum((1 - rj) * cmath.log(x - cj) for rj, cj in zip(r[1:], c))
    )
    dlog = (-n + 1 - r[0]) / (x - lam) + sum((1 - rj) / (x - cj) for rj, cj in zip(r[1:], c))
    return h * dlog
