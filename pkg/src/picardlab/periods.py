"""Model configuration, period integrals of the curve 1-forms dx/y, and
Lauricella F_D oracles (series and Euler integral)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    BranchNotClosed,
    MaxTermsExceeded,
    SeriesDiverges,
    ValidationError,
)
from .operator import (
    DerivativeScheme,
    JPOperator,
    apply_operator_numeric,
    equal_parameter_operator,
    normalized_residual,
)
from .paths import Path, PathTrace
from .quadrature import QuadratureConfig, beta, integrate_unit

SEED_TOL = 1e-9


def principal_root(w: complex, N: int) -> complex:
    w = complex(w)
    return 0j if w == 0 else cmath.exp(cmath.log(w) / N)


def continued_log(w: complex, w_ref: complex, log_ref: complex) -> complex:
    """log(w) on the branch obtained by continuing log_ref = log(w_ref) along
    the straight segment; valid while |w - w_ref| < |w_ref|."""
    return log_ref + cmath.log(complex(w) / complex(w_ref))


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of one fiber: y1^N = ((x-lam1) prod (x-c_j))^A and
    y2^N = ((x-lam2) prod (x-c_j))^(N-A).

    ``seeds1[j]`` and ``seeds2[j]`` are the chosen values of
    (c_j - lam1)^(1/N) and (c_j - lam2)^(1/N).
    """

    N: int
    A: int
    c: tuple[complex, ...]
    lam1: complex
    lam2: complex
    seeds1: tuple[complex, ...] = ()
    seeds2: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(complex(v) for v in self.c))
        object.__setattr__(self, "lam1", complex(self.lam1))
        object.__setattr__(self, "lam2", complex(self.lam2))
        if not self.seeds1:
            object.__setattr__(self, "seeds1", tuple(principal_root(cj - self.lam1, self.N) for cj in self.c))
        if not self.seeds2:
            object.__setattr__(self, "seeds2", tuple(principal_root(cj - self.lam2, self.N) for cj in self.c))
        object.__setattr__(self, "seeds1", tuple(complex(v) for v in self.seeds1))
        object.__setattr__(self, "seeds2", tuple(complex(v) for v in self.seeds2))
        for problem in self.violations():
            raise ValidationError(problem)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def zeta(self) -> complex:
        return cmath.exp(2j * math.pi / self.N)

    def violations(self) -> list[str]:
        """Every violated invariant, each naming its clause."""
        out = []
        N, A, n = self.N, self.A, len(self.c)
        if N < 2:
            out.append(f"N >= 2 fails: N = {N}")
        if n < 2:
            out.append(f"n >= 2 fails: n = {n}")
        if N >= 1 and math.gcd(N, A) != 1:
            out.append(f"gcd(N, A) = 1 fails: gcd({N}, {A}) = {math.gcd(N, A)}")
        if n >= 1 and not (Fraction(N + 1, n + 1) <= A <= Fraction(n * N - 1, n + 1)):
            out.append(
                f"(N+1)/(n+1) <= A <= (nN-1)/(n+1) fails: need {Fraction(N + 1, n + 1)} <= {A} <= {Fraction(n * N - 1, n + 1)}"
            )
        if len(set(self.c)) != n:
            out.append("c_1..c_n pairwise distinct fails")
        for name, lam in (("lam1", self.lam1), ("lam2", self.lam2)):
            if lam in self.c:
                out.append(f"{name} not in {{c_j}} fails: {name} = {lam}")
        if self.lam1 == self.lam2:
            out.append("lam1 != lam2 fails")
        for name, lam, seeds in (("seeds1", self.lam1, self.seeds1), ("seeds2", self.lam2, self.seeds2)):
            if len(seeds) != n:
                out.append(f"{name} needs one seed per c_j ({n}), got {len(seeds)}")
                continue
            for j, (cj, s) in enumerate(zip(self.c, seeds)):
                rad = cj - lam
                if rad != 0 and abs(s**N - rad) > SEED_TOL * abs(rad):
                    out.append(f"{name}[{j}]^N = c_{j + 1} - {name[-1] == '1' and 'lam1' or 'lam2'} fails: {s**N} vs {rad}")
        return out

    def exponent(self, curve: int) -> Fraction:
        if curve == 1:
            return Fraction(self.A, self.N)
        if curve == 2:
            return Fraction(self.N - self.A, self.N)
        raise ValidationError(f"curve must be 1 or 2, got {curve}")

    def lam(self, curve: int) -> complex:
        return self.lam1 if curve == 1 else self.lam2

    def branch_points(self, curve: int) -> list[complex]:
        return [self.lam(curve), *self.c]

    def operator(self, curve: int) -> JPOperator:
        return equal_parameter_operator(list(self.c), self.exponent(curve))

    def with_lams(self, lam1: complex, lam2: complex) -> "ModelConfig":
        """Same template at another point, seeds continued from the current ones."""
        s1 = tuple(_continue_root(cj - self.lam1, cj - lam1, s, self.N) for cj, s in zip(self.c, self.seeds1))
        s2 = tuple(_continue_root(cj - self.lam2, cj - lam2, s, self.N) for cj, s in zip(self.c, self.seeds2))
        return replace(self, lam1=complex(lam1), lam2=complex(lam2), seeds1=s1, seeds2=s2)

    def conjugate(self) -> "ModelConfig":
        return ModelConfig(
            self.N,
            self.A,
            tuple(v.conjugate() for v in self.c),
            self.lam1.conjugate(),
            self.lam2.conjugate(),
            tuple(v.conjugate() for v in self.seeds1),
            tuple(v.conjugate() for v in self.seeds2),
        )

    def to_json(self) -> dict:
        cj = lambda z: [z.real, z.imag]  # noqa: E731
        return {
            "N": self.N,
            "A": self.A,
            "c": [cj(v) for v in self.c],
            "lam1": cj(self.lam1),
            "lam2": cj(self.lam2),
            "seeds1": [cj(v) for v in self.seeds1],
            "seeds2": [cj(v) for v in self.seeds2],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ModelConfig":
        def z(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1])
            return complex(v)

        return cls(
            int(data["N"]),
            int(data["A"]),
            tuple(z(v) for v in data["c"]),
            z(data["lam1"]),
            z(data["lam2"]),
            tuple(z(v) for v in data.get("seeds1", ())),
            tuple(z(v) for v in data.get("seeds2", ())),
        )


def _continue_root(w_ref: complex, w: complex, root_ref: complex, N: int) -> complex:
    """N-th root of w continued from root_ref along the straight segment w_ref -> w."""
    w_ref, w = complex(w_ref), complex(w)
    root = complex(root_ref)
    prev = w_ref
    t = 0.0
    while t < 1.0:
        if abs(prev) < 1e-12:
            raise ValidationError("root continuation passes through zero")
        # keep every step well inside the disk where log(cur/prev) is principal
        dt = min(1.0 - t, 0.25 * abs(prev) / max(abs(w - w_ref), 1e-300))
        t = 1.0 if dt >= 1.0 - t else t + dt
        cur = w_ref + (w - w_ref) * t
        root *= cmath.exp(cmath.log(cur / prev) / N)
        prev = cur
    return root


# ----------------------------------------------------------------------------
# integrals of dx / y along paths


def form_integral(
    path: Path,
    bases: Sequence[complex],
    exps: Sequence[float],
    quad: QuadratureConfig = QuadratureConfig(),
    theta0: Sequence[float | None] | None = None,
    *,
    trace: PathTrace | None = None,
) -> tuple[complex, float]:
    """integral of gamma'(s) prod_p (gamma(s) - a_p)^(-e_p) ds with branches
    continued along the path.  Returns (value, error estimate)."""
    tr = trace if trace is not None else PathTrace(path, bases, theta0)
    neg = -np.asarray(exps, dtype=float)
    total, err = 0j, 0.0
    for i, seg in enumerate(path.segments):

        def f(t, tc, i=i, seg=seg):
            return seg.deriv(t) * np.exp(tr.log_combination(i, t, tc, neg))

        v, e = integrate_unit(f, quad)
        total += v
        err += e
    return total, err


def curve_form_integral(
    config: ModelConfig,
    curve: int,
    path: Path,
    quad: QuadratureConfig = QuadratureConfig(),
    theta0: Sequence[float | None] | None = None,
) -> complex:
    """integral of dx / y_curve along ``path``; branches start principal at the
    path start unless ``theta0`` gives lifted arguments per branch point
    (order: lam, c_1, ..., c_n)."""
    e = float(config.exponent(curve))
    bases = config.branch_points(curve)
    value, _ = form_integral(path, bases, [e] * len(bases), quad, theta0)
    return value


def period_function(
    config: ModelConfig,
    curve: int,
    cycle: Path,
    quad: QuadratureConfig = QuadratureConfig(),
) -> Callable[[complex], complex]:
    """lam -> integral of dx/y over ``cycle``, analytic near config.lam(curve).

    The branch of (start - lam) is continued from the principal branch at the
    configured lam, so the function is single-valued on any disk around it
    that avoids the cycle.
    """
    lam0 = config.lam(curve)
    w_ref = cycle.start - lam0
    log_ref = cmath.log(w_ref)
    e = float(config.exponent(curve))

    def P(lam: complex) -> complex:
        bases = [lam, *config.c]
        th = continued_log(cycle.start - lam, w_ref, log_ref).imag
        value, _ = form_integral(cycle, bases, [e] * len(bases), quad, [th] + [None] * config.n)
        return value

    return P


def monodromy_factor(config: ModelConfig, curve: int, cycle: Path) -> complex:
    """Multiplier picked up by 1/y around the closed ``cycle``."""
    tr = PathTrace(cycle, config.branch_points(curve))
    e = float(config.exponent(curve))
    total = sum(e * (tr.theta_end[p] - tr.theta_start[p]) for p in range(len(tr.bases)))
    return cmath.exp(-1j * total)


def cycle_clearance(config: ModelConfig, curve: int, cycle: Path) -> float:
    lam = config.lam(curve)
    return min([cycle.min_distance(lam), *(abs(lam - cj) for cj in config.c)])


@dataclass
class AnnihilationReport:
    residual: float
    value: complex
    terms: list[complex]
    lam: complex
    clearance: float

    def to_json(self) -> dict:
        return {
            "residual": self.residual,
            "value": [self.value.real, self.value.imag],
            "terms": [[t.real, t.imag] for t in self.terms],
            "lam": [self.lam.real, self.lam.imag],
            "clearance": self.clearance,
        }


def annihilation_residual(
    config: ModelConfig,
    curve: int,
    cycle: Path,
    scheme: DerivativeScheme = DerivativeScheme(),
    quad: QuadratureConfig = QuadratureConfig(),
    *,
    operator: JPOperator | None = None,
    function: Callable[[complex], complex] | None = None,
    report: bool = False,
):
    """|L P(lam)| / max_k |term_k| for the period P over a closed cycle.

    ``operator`` overrides the equal-parameter operator with r = A/N (curve 1)
    or (N-A)/N (curve 2); ``function`` replaces the period function.
    """
    if not cycle.is_closed():
        raise BranchNotClosed("cycle is not a closed path")
    mono = monodromy_factor(config, curve, cycle)
    if abs(mono - 1) > 1e-9:
        raise BranchNotClosed(f"1/y returns multiplied by {mono} around the cycle")
    op = operator if operator is not None else config.operator(curve)
    f = function if function is not None else period_function(config, curve, cycle, quad)
    clearance = cycle_clearance(config, curve, cycle)
    lam = config.lam(curve)
    value, terms = apply_operator_numeric(op, f, lam, scheme, clearance, return_terms=True)
    res = normalized_residual(value, terms)
    if report:
        return AnnihilationReport(res, value, [complex(t) for t in terms], lam, clearance)
    return res


# ----------------------------------------------------------------------------
# hypergeometric oracles

SERIES_RADIUS = 0.95
SERIES_MAX_TERMS = 10**6


def _check_c(c: complex) -> None:
    c = complex(c)
    if c.imag == 0 and c.real <= 0 and float(c.real).is_integer():
        raise ValidationError(f"c = {c} is a nonpositive integer")


def lauricella_fd_series(
    a: complex,
    b: Sequence[complex],
    c: complex,
    x: Sequence[complex],
    tol: float = 1e-15,
) -> complex:
    """F_D(a; b_1..b_m; c; x_1..x_m) by summing the multi-index series.

    Terms of equal total degree |m| = s are collected by convolving the
    one-variable factors (b_i)_k x_i^k / k!, then weighted by (a)_s / (c)_s.
    """
    _check_c(c)
    x = [complex(v) for v in x]
    b = [complex(v) for v in b]
    if len(x) != len(b):
        raise ValidationError("b and x must have equal length")
    r = max((abs(v) for v in x), default=0.0)
    if r >= SERIES_RADIUS:
        raise SeriesDiverges(f"max |x_i| = {r:.4g} >= {SERIES_RADIUS}")
    a, c = complex(a), complex(c)
    M = 64
    while True:
        k = np.arange(M - 1)
        shells = np.zeros(M, dtype=complex)
        shells[0] = 1.0
        for bi, xi in zip(b, x):
            e = np.empty(M, dtype=complex)
            e[0] = 1.0
            e[1:] = np.cumprod((bi + k) * xi / (k + 1))
            shells = np.convolve(shells, e)[:M]
        g = np.empty(M, dtype=complex)
        g[0] = 1.0
        g[1:] = np.cumprod((a + k) / (c + k))
        terms = g * shells
        total = complex(np.sum(terms[::-1]))
        tail = _tail_bound(terms, r)
        if tail <= tol * max(abs(total), 1e-300) or tail == 0.0:
            return total
        if M * max(len(x), 1) >= SERIES_MAX_TERMS:
            raise MaxTermsExceeded(f"tail bound {tail:.3e} after {M} shells")
        M *= 2


def _tail_bound(terms: np.ndarray, r: float) -> float:
    mags = np.abs(terms[-16:])
    if not np.any(mags):
        return 0.0
    nz = mags[:-1] > 0
    ratios = mags[1:][nz] / mags[:-1][nz]
    q = max(float(np.max(ratios)) if ratios.size else r, r)
    if q >= 1.0:
        return math.inf
    return float(mags[-1]) * q / (1.0 - q)


def gauss_2f1_series(a: complex, b: complex, c: complex, x: complex, tol: float = 1e-17) -> complex:
    """Plain term-by-term Gauss series, |x| < 1."""
    _check_c(c)
    if abs(x) >= 1:
        raise SeriesDiverges("|x| >= 1")
    total, term, k = 1.0 + 0j, 1.0 + 0j, 0
    while True:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        k += 1
        if abs(term) <= tol * abs(total) and k > 5:
            return total
        if k > SERIES_MAX_TERMS:
            raise MaxTermsExceeded("Gauss series")


def lauricella_fd_euler(
    a: complex,
    b: Sequence[complex],
    c: complex,
    x: Sequence[complex],
    quad: QuadratureConfig = QuadratureConfig(),
) -> complex:
    """(1/B(a, c-a)) integral_0^1 u^(a-1) (1-u)^(c-a-1) prod (1 - x_i u)^(-b_i) du."""
    a, c = complex(a), complex(c)
    if a.real <= 0 or (c - a).real <= 0:
        raise ValidationError("Euler representation needs Re a > 0 and Re(c - a) > 0")
    x = [complex(v) for v in x]
    b = [complex(v) for v in b]
    for v in x:
        if v.imag == 0 and v.real >= 1:
            raise ValidationError(f"x = {v} lies on the cut [1, inf)")

    def f(u, uc):
        log = (a - 1) * np.log(u) + (c - a - 1) * np.log(uc)
        for bi, xi in zip(b, x):
            log = log - bi * np.log(1 - xi * u)
        return np.exp(log)

    value, _ = integrate_unit(f, quad)
    return value / beta(a, c - a)


def segment_period_oracle(config: ModelConfig, curve: int, k1: int, k2: int, quad: QuadratureConfig = QuadratureConfig()):
    """Integral of dx/y along the straight segment c_k1 -> c_k2 in two ways.

    Returns (quadrature value, Euler/Lauricella value).  With x = c + u d,
    d = c' - c, the integral is
        C d B(1-e, 1-e) F_D(1-e; e, ..., e; 2-2e; d/(p_i - c))
    over the other branch points p_i; the u-independent constant C is read
    off the tracked branches at the midpoint so both values share one sheet.
    """
    ca, cb = config.c[k1 - 1], config.c[k2 - 1]
    path = Path.segment(ca, cb)
    e = float(config.exponent(curve))
    bases = config.branch_points(curve)
    tr = PathTrace(path, bases)
    value, _ = form_integral(path, bases, [e] * len(bases), quad, trace=tr)
    d = cb - ca
    others = [p for p in bases if p not in (ca, cb)]
    xs = [d / (p - ca) for p in others]
    half = np.array([0.5])
    tracked = complex(tr.log_combination(0, half, half, [1.0] * len(bases))[0])
    local = math.log(0.25) + sum(cmath.log(1 - x * 0.5) for x in xs)
    const = cmath.exp(-e * (tracked - local))
    a = 1.0 - e
    oracle = const * d * beta(a, a) * lauricella_fd_euler(a, [e] * len(xs), 2.0 * a, xs, quad)
    return value, oracle
