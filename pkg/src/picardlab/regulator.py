"""Regulator double integrals over the triangle and the chain of identities
that reduces their Picard-Fuchs images to a finite closed form.

Notation.  f(x) = (x - lam1) prod (x - c_k), g(x) = (x - lam2) prod (x - c_k),
gamma is a path from c_1 to c_j and

    K = int_{0 < s2 <= s1 < 1} gamma'(s1) gamma'(s2) ds1 ds2
            / ( f(gamma(s1))^(A/N) g(gamma(s2))^((N-A)/N) ).

Component 1 differentiates in lam1, component 2 in lam2.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import InvalidIndex, QuadratureNotConverged, ValidationError
from .exact import pochhammer
from .operator import DerivativeScheme, apply_operator_numeric
from .paths import Path, PathTrace, build_gamma
from .periods import ModelConfig
from .quadrature import QuadratureConfig, de_nodes, integrate_unit

TENSOR_MAX_LEVEL = 7
SMOOTH_MAX_NODES = 512


def _zeta_pow(N: int, k: int) -> complex:
    """zeta^k with the exponent reduced mod N first (keeps i and i+N identical)."""
    return cmath.exp(2j * math.pi * (k % N) / N)


def _check_component(component: int) -> None:
    if component not in (1, 2):
        raise ValidationError(f"component must be 1 or 2, got {component}")


def _check_j(config: ModelConfig, j: int, allow_first: bool = True) -> None:
    if not 1 <= j <= config.n:
        raise InvalidIndex(f"j = {j} outside 1..{config.n}")
    if not allow_first and j == 1:
        raise InvalidIndex("the difference chain needs j >= 2 (c_j distinct from c_1)")


# ----------------------------------------------------------------------------
# chains


def _arg(z: complex) -> float:
    return math.atan2(z.imag, z.real)


@dataclass
class TriangleChain:
    """The path gamma_j^l from c_1 to c_j together with its branch data.

    The path carries ``l`` counterclockwise turns around lam2 plus correction
    turns around lam1 and lam2, chosen so that continuing the seeds of c_1
    along it arrives at seeds1[j] and zeta^l * seeds2[j] at c_j.
    """

    config: ModelConfig
    j: int
    l: int
    sheet: int
    path: Path
    eps: float
    turns: dict = field(default_factory=dict)

    @property
    def bases(self) -> list[complex]:
        cfg = self.config
        return [cfg.lam1, cfg.lam2, *cfg.c]

    def theta0(self, lam1: complex | None = None, lam2: complex | None = None) -> list[float | None]:
        """Start arguments for (lam1, lam2, c_1..c_n), continued in lam from
        the seeds; the sheet rotates the lam1 root by zeta^(-sheet)."""
        cfg = self.config
        c1 = cfg.c[0]
        out: list[float | None] = []
        for lam0, lam, seed, shift in (
            (cfg.lam1, lam1, cfg.seeds1[0], -2 * math.pi * (self.sheet % cfg.N)),
            (cfg.lam2, lam2, cfg.seeds2[0], 0.0),
        ):
            th = cfg.N * _arg(seed) + shift
            if lam is not None and lam != lam0:
                th += _arg((c1 - lam) / (c1 - lam0))
            out.append(th)
        return out + [None] * cfg.n

    def trace(self, lam1: complex | None = None, lam2: complex | None = None) -> PathTrace:
        cfg = self.config
        l1 = cfg.lam1 if lam1 is None else complex(lam1)
        l2 = cfg.lam2 if lam2 is None else complex(lam2)
        return PathTrace(self.path, [l1, l2, *cfg.c], self.theta0(lam1, lam2))

    def end_roots(self) -> tuple[complex, complex]:
        """Continued (c_j - lam1)^(1/N), (c_j - lam2)^(1/N) at the path end (sheet 0)."""
        tr = PathTrace(self.path, self.bases, replace(self, sheet=0).theta0())
        N = self.config.N
        return cmath.exp(tr.end_log(0) / N), cmath.exp(tr.end_log(1) / N)

    def clearance(self, component: int) -> float:
        cfg = self.config
        lam = cfg.lam(component)
        other = cfg.lam2 if component == 1 else cfg.lam1
        return min([self.path.min_distance(lam), abs(lam - other), *(abs(lam - cj) for cj in cfg.c)])

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "l": self.l,
            "sheet": self.sheet,
            "eps": self.eps,
            "turns": {name: t for name, t in self.turns.items()},
            "path": self.path.to_json(),
        }


def _centered(m: int, N: int) -> int:
    m %= N
    return m - N if m > N // 2 else m


def build_chain(
    config: ModelConfig,
    j: int,
    l: int = 0,
    sheet: int = 0,
    eps: float | None = None,
) -> TriangleChain:
    _check_j(config, j, allow_first=False)
    cfg = config
    c1, cj = cfg.c[0], cfg.c[j - 1]
    obstacles = [cfg.lam1, cfg.lam2, *(c for k, c in enumerate(cfg.c) if k not in (0, j - 1))]
    base = build_gamma(c1, cj, obstacles, 0, cfg.N, eps)
    eps_used = eps if eps is not None else _default_eps(c1, cj, obstacles)
    probe = TriangleChain(cfg, j, 0, 0, base, eps_used)
    r1, r2 = probe.end_roots()
    N = cfg.N
    # each counterclockwise turn multiplies the root by zeta
    m1 = _centered(round(N * (_arg(cfg.seeds1[j - 1] / r1)) / (2 * math.pi)), N)
    m2 = _centered(round(N * (_arg(cfg.seeds2[j - 1] / r2)) / (2 * math.pi)), N)
    extra = {}
    if m1:
        extra[cfg.lam1] = m1
    if m2:
        extra[cfg.lam2] = m2
    path = build_gamma(c1, cj, obstacles, l, N, eps_used, winding_center=cfg.lam2, extra_windings=extra)
    chain = TriangleChain(cfg, j, l, sheet, path, eps_used, {"lam1": m1, "lam2": m2 + l})
    e1, e2 = chain.end_roots()
    t1, t2 = cfg.seeds1[j - 1], _zeta_pow(N, l) * cfg.seeds2[j - 1]
    if abs(e1 - t1) > 1e-8 * abs(t1) or abs(e2 - t2) > 1e-8 * abs(t2):
        raise ValidationError("correction turns failed to reproduce the seeds at c_j")
    return chain


def _default_eps(c1: complex, cj: complex, obstacles) -> float:
    pts = [c1, cj, *obstacles]
    gap = min(abs(a - b) for k, a in enumerate(pts) for b in pts[k + 1 :])
    return 0.8 * gap / 2


# ----------------------------------------------------------------------------
# the double integral


def _exponents(config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    a = config.A / config.N
    b = (config.N - config.A) / config.N
    n = config.n
    eF = np.array([a, 0.0] + [a] * n)
    eG = np.array([0.0, b] + [b] * n)
    return eF, eG


def _tensor_de(fun: Callable, quad: QuadratureConfig) -> tuple[complex, float]:
    """int_0^1 int_0^1 fun(x, 1-x, y, 1-y) dy dx by a tensor tanh-sinh rule;
    ``fun`` receives column (x) and row (y) vectors and returns a matrix."""
    top = min(quad.max_level, TENSOR_MAX_LEVEL)
    value, err = 0j, math.inf
    for level in range(quad.level, top + 1):
        nd = de_nodes(level)
        vals = fun(nd.x[:, None], nd.xc[:, None], nd.x[None, :], nd.xc[None, :])
        W = nd.w[:, None] * nd.w[None, :]
        value = complex(np.sum(W * vals))
        cm = nd.coarse
        coarse = 4.0 * complex(np.sum((W * vals)[np.ix_(cm, cm)]))
        err = abs(value - coarse)
        mag = float(np.sum(W * np.abs(vals)))
        if err <= quad.tolerance * max(abs(value), mag):
            return value, err
    raise QuadratureNotConverged(f"tensor rule not converged at level {top}: difference {err:.3e}")


@lru_cache(maxsize=16)
def _legendre_cumulative(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes t, weights w on [0, 1] and the matrix S with
    (S g)_i = int_0^{t_i} p(t) dt for the interpolant p of g at the nodes."""
    x, w = np.polynomial.legendre.leggauss(m)
    V = np.polynomial.legendre.legvander(x, m - 1)
    J = np.empty_like(V)
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        J[:, k] = np.polynomial.legendre.legval(x, np.polynomial.legendre.legint(e, lbnd=-1.0))
    S = 0.5 * np.linalg.solve(V.T, J.T).T
    return 0.5 * (x + 1.0), 0.5 * w, S


def _smooth_block(F, G, quad: QuadratureConfig) -> complex:
    """int_0^1 F(t1) int_0^t1 G(t2) dt2 dt1 for densities analytic on [0, 1]."""
    prev = None
    m = 16
    while m <= SMOOTH_MAX_NODES:
        t, w, S = _legendre_cumulative(m)
        tc = 1.0 - t
        f = F(t, tc)
        g = G(t, tc)
        vals = f * (S @ g)
        value = complex(np.sum(w * vals))
        mag = float(np.sum(w * np.abs(f)) * np.sum(w * np.abs(g)))
        if prev is not None and abs(value - prev) <= quad.tolerance * max(abs(value), mag):
            return value
        prev = value
        m *= 2
    raise QuadratureNotConverged(f"smooth diagonal block not converged with {SMOOTH_MAX_NODES} nodes")


def _segment_log_density(trace: PathTrace, i: int, exps: np.ndarray):
    """(t, tc) -> (gamma'(t), log of prod (gamma(t) - a_p)^(-e_p)); nodes that
    underflowed to an endpoint are flagged with log = -inf."""
    seg = trace.path.segments[i]

    def h(t, tc):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = t.ravel()
        tc = np.broadcast_to(np.asarray(tc, dtype=float), shape).ravel()
        d = np.zeros(t.shape, dtype=complex)
        log = np.full(t.shape, -np.inf, dtype=complex)
        ok = (t > 0.0) & (tc > 0.0)  # underflowed nodes carry negligible weight
        if np.any(ok):
            d[ok] = seg.deriv(t[ok])
            log[ok] = -trace.log_combination(i, t[ok], tc[ok], exps)
        return d.reshape(shape), log.reshape(shape)

    return h


def _segment_density(trace: PathTrace, i: int, exps: np.ndarray):
    h = _segment_log_density(trace, i, exps)

    def f(t, tc):
        d, log = h(t, tc)
        return d * np.exp(log)

    return f


def _combine(x, dF, lF, dG, lG):
    with np.errstate(invalid="ignore", over="ignore"):
        log = np.log(x) + lF + lG
        out = dF * dG * np.exp(log)
    return np.where(np.isfinite(log.real), out, 0.0)


def triangle_integral(trace: PathTrace, eF, eG, quad: QuadratureConfig) -> complex:
    """int_{s2 <= s1} F(s1) G(s2) for densities F, G given by exponent vectors.

    Segment pairs (p > q) factor into one-dimensional integrals; each diagonal
    block is mapped to the unit square by a Duffy substitution pinned at the
    segment end where the densities are singular.
    """
    path = trace.path
    S = len(path.segments)
    bases = trace.bases
    IF, IG = [], []
    for i in range(S):
        IF.append(integrate_unit(_segment_density(trace, i, eF), quad)[0])
        IG.append(integrate_unit(_segment_density(trace, i, eG), quad)[0])
    total = 0j
    acc = 0j
    for p in range(S):
        total += IF[p] * acc
        acc += IG[p]
    for i, seg in enumerate(path.segments):
        F = _segment_log_density(trace, i, eF)
        G = _segment_log_density(trace, i, eG)
        sing_start = i == 0 and np.any(bases == seg.start)
        sing_end = i == S - 1 and np.any(bases == seg.end)
        if sing_start and sing_end:
            raise ValidationError("a single segment may not join two branch points; add collars")
        if not (sing_start or sing_end):
            total += _smooth_block(_segment_density(trace, i, eF), _segment_density(trace, i, eG), quad)
            continue
        if sing_end:
            # a = 1 - t1 <= b = 1 - t2, then a = b * sigma
            def block(x, xc, y, yc, F=F, G=G):
                return _combine(x, *F(xc + x * yc, x * y), *G(xc, x))

        else:
            # t2 = t1 * sigma
            def block(x, xc, y, yc, F=F, G=G):
                return _combine(x, *F(x, xc), *G(x * y, xc + x * yc))

        total += _tensor_de(block, quad)[0]
    return total


def double_integral_K(
    chain: TriangleChain,
    quad: QuadratureConfig = QuadratureConfig(),
    *,
    lam1: complex | None = None,
    lam2: complex | None = None,
) -> complex:
    """K on sheet ``chain.sheet``: the lam1 root is rotated by zeta^(-sheet)
    before integrating, so no equivariance factor is applied by hand."""
    eF, eG = _exponents(chain.config)
    return triangle_integral(chain.trace(lam1, lam2), eF, eG, quad)


def k_function(chain: TriangleChain, component: int, quad: QuadratureConfig = QuadratureConfig()):
    """lam -> K with lam1 (component 1) or lam2 (component 2) moved, path fixed."""
    _check_component(component)
    if component == 1:
        return lambda lam: double_integral_K(chain, quad, lam1=lam)
    return lambda lam: double_integral_K(chain, quad, lam2=lam)


def operator_applied_K(
    chain: TriangleChain,
    component: int,
    quad: QuadratureConfig = QuadratureConfig(),
    scheme: DerivativeScheme = DerivativeScheme(),
) -> complex:
    cfg = chain.config
    op = cfg.operator(component)
    return apply_operator_numeric(op, k_function(chain, component, quad), cfg.lam(component), scheme, chain.clearance(component))


# ----------------------------------------------------------------------------
# reduced integrals


def _moving(config: ModelConfig, component: int):
    """(index of moving lam, index of fixed lam, exponent e, M = N e, sign)."""
    if component == 1:
        return 0, 1, Fraction(config.A, config.N), config.A, 1
    return 1, 0, Fraction(config.N - config.A, config.N), config.N - config.A, -1


def stokes_reduced_integral(
    chain: TriangleChain,
    quad: QuadratureConfig = QuadratureConfig(),
    component: int = 1,
    *,
    reverse: bool = False,
) -> complex:
    """sign (e)_(n-1) int gamma' / ((gamma - lam_a)^(n-1+e) (gamma - lam_b)^(1-e)).

    With ``reverse`` the path is run backwards, starting from the branches it
    had at its end.
    """
    _check_component(component)
    cfg = chain.config
    a, b, e, _, sign = _moving(cfg, component)
    tr = chain.trace()
    exps = np.zeros(2 + cfg.n)
    exps[a] = cfg.n - 1 + float(e)
    exps[b] = 1.0 - float(e)
    if reverse:
        path = chain.path.reversed()
        th = [tr.theta_end[0], tr.theta_end[1]] + [None] * cfg.n
        tr = PathTrace(path, tr.bases, th)
    total = 0j
    for i in range(len(tr.path.segments)):
        total += integrate_unit(_segment_density(tr, i, exps), quad)[0]
    return sign * complex(pochhammer(e, cfg.n - 1)) * total


def _u_polynomial_integrand(n: int, N: int, M: int):
    def h(u):
        return (u**N - 1.0) ** (n - 2) * u ** (M - 1)

    return h


def u_substitution_integral(
    chain: TriangleChain,
    quad: QuadratureConfig = QuadratureConfig(),
    component: int = 1,
    *,
    closed: bool = False,
) -> complex:
    """sign (-N)/(lam_a - lam_b)^(n-1) (e)_(n-1) int (u^N - 1)^(n-2) u^(M-1) du
    along u(s) = (gamma - lam_b)^(1/N) / (gamma - lam_a)^(1/N).

    ``closed`` evaluates the u-integral from the antiderivative at the
    tracked endpoints instead of by quadrature along u(s).
    """
    _check_component(component)
    cfg = chain.config
    n, N = cfg.n, cfg.N
    a, b, e, M, sign = _moving(cfg, component)
    lams = (cfg.lam1, cfg.lam2)
    tr = chain.trace()
    if closed:
        u0 = cmath.exp((tr.start_log(b) - tr.start_log(a)) / N)
        u1 = cmath.exp((tr.end_log(b) - tr.end_log(a)) / N)
        inner = _u_antiderivative(n, N, M, u1) - _u_antiderivative(n, N, M, u0)
    else:
        poly = _u_polynomial_integrand(n, N, M)
        diff = np.zeros(2 + n)
        diff[b], diff[a] = 1.0 / N, -1.0 / N
        la, lb = lams[a], lams[b]
        inner = 0j
        for i, seg in enumerate(tr.path.segments):

            def h(t, tc, i=i, seg=seg):
                u = np.exp(tr.log_combination(i, t, tc, diff))
                z = seg.point(t)
                du = u * seg.deriv(t) / N * (1.0 / (z - lb) - 1.0 / (z - la))
                return poly(u) * du

            inner += integrate_unit(h, quad)[0]
    pref = sign * (-N) / (lams[a] - lams[b]) ** (n - 1) * complex(pochhammer(e, n - 1))
    return pref * inner


def _u_antiderivative(n: int, N: int, M: int, u: complex) -> complex:
    total = 0j
    for k in range(n - 1):
        total += math.comb(n - 2, k) * (-1) ** (n - 2 - k) * u ** (N * k + M) / (N * k + M)
    return total


def _closed_sum(config: ModelConfig, j: int, component: int, power_shift: int = 0) -> complex:
    """sum_k (2-n)_k / ((N k + M) k!) * r_j^(N k + M), r_j = seed_b / seed_a,
    times zeta^(A * power_shift)."""
    cfg = config
    n, N = cfg.n, cfg.N
    a, b, e, M, sign = _moving(cfg, component)
    seeds = (cfg.seeds1, cfg.seeds2)
    r = seeds[b][j - 1] / seeds[a][j - 1]
    total = 0j
    for k in range(n - 1):
        total += complex(pochhammer(2 - n, k)) / ((N * k + M) * math.factorial(k)) * r ** (N * k + M)
    return total * _zeta_pow(N, cfg.A * power_shift)


def _closed_prefactor(config: ModelConfig, component: int, sheet: int) -> complex:
    cfg = config
    N, A, n = cfg.N, cfg.A, cfg.n
    a, b, e, M, sign = _moving(cfg, component)
    lams = (cfg.lam1, cfg.lam2)
    return (
        sign
        * N
        * (1 - _zeta_pow(N, A))
        * _zeta_pow(N, A * sheet)
        / (lams[b] - lams[a]) ** (n - 1)
        * complex(pochhammer(e, n - 1))
    )


def closed_form_rhs(config: ModelConfig, j: int, i: int = 0, component: int = 1) -> complex:
    """Closed-form Picard-Fuchs image of the single-cycle regulator pairing.

    component 1:  N (1-zeta^A) zeta^(Ai) / (lam2-lam1)^(n-1) (A/N)_(n-1)
                  sum_k (2-n)_k / ((Nk+A) k!) ((c_j-lam2)/(c_j-lam1))^((Nk+A)/N)
    component 2:  -N (1-zeta^A) zeta^(Ai) / (lam1-lam2)^(n-1) ((N-A)/N)_(n-1)
                  sum_k (2-n)_k / ((Nk+N-A) k!) ((c_j-lam1)/(c_j-lam2))^((Nk+N-A)/N)

    Fractional powers are integer powers of the seed ratios.
    """
    _check_component(component)
    _check_j(config, j)
    return _closed_prefactor(config, component, i) * _closed_sum(config, j, component)


def closed_form_magnitude(config: ModelConfig, j: int, component: int = 1) -> float:
    """Sum of the absolute values of the terms of closed_form_rhs (rounding scale)."""
    cfg = config
    n, N = cfg.n, cfg.N
    a, b, e, M, sign = _moving(cfg, component)
    seeds = (cfg.seeds1, cfg.seeds2)
    r = abs(seeds[b][j - 1] / seeds[a][j - 1])
    s = sum(abs(complex(pochhammer(2 - n, k))) / ((N * k + M) * math.factorial(k)) * r ** (N * k + M) for k in range(n - 1))
    return abs(_closed_prefactor(cfg, component, 0)) * s


def difference_closed_form(config: ModelConfig, j: int, l: int, i: int = 0, component: int = 1) -> complex:
    """Closed form of the image of the difference xi_{c_j}^{(i+l)} - xi_{c_1}^{(i)}."""
    _check_component(component)
    _check_j(config, j, allow_first=False)
    pre = _closed_prefactor(config, component, i)
    return pre * (_closed_sum(config, j, component, l) - _closed_sum(config, 1, component))


# ----------------------------------------------------------------------------
# reports


def relative_residual(x: complex, y: complex) -> float:
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


@dataclass
class EqualityChainReport:
    j: int
    l: int
    sheet: int
    component: int
    value_operator_applied: complex
    value_stokes: complex
    value_usub: complex
    value_closed_form: complex
    runtimes: dict

    @property
    def values(self) -> dict:
        return {
            "a": self.value_operator_applied,
            "b": self.value_stokes,
            "c": self.value_usub,
            "d": self.value_closed_form,
        }

    @property
    def residuals(self) -> dict:
        v = self.values
        keys = list(v)
        return {f"{p}{q}": relative_residual(v[p], v[q]) for n, p in enumerate(keys) for q in keys[n + 1 :]}

    def passes(self, tol_ab: float = 1e-4, tol_bc: float = 1e-6, tol_cd: float = 1e-9) -> bool:
        r = self.residuals
        return r["ab"] < tol_ab and r["bc"] < tol_bc and r["cd"] < tol_cd

    def to_json(self, *, include_runtimes: bool = False) -> dict:
        out = {
            "j": self.j,
            "l": self.l,
            "sheet": self.sheet,
            "component": self.component,
            "values": {k: [v.real, v.imag] for k, v in self.values.items()},
            "residuals": self.residuals,
        }
        if include_runtimes:
            out["runtimes"] = dict(self.runtimes)
        return out


def difference_chain_check(
    config: ModelConfig,
    j: int,
    l: int = 0,
    quad: QuadratureConfig = QuadratureConfig(),
    scheme: DerivativeScheme = DerivativeScheme(),
    *,
    i: int = 0,
    component: int = 1,
    chain: TriangleChain | None = None,
) -> EqualityChainReport:
    """The four values (a) operator applied to the double integral, (b) the
    Stokes-reduced line integral, (c) the u-substituted integral and (d) the
    closed form, all for the difference of cycles at c_j (sheet i+l) and
    c_1 (sheet i)."""
    _check_component(component)
    _check_j(config, j, allow_first=False)
    if chain is None:
        chain = build_chain(config, j, l)
    N, A = config.N, config.A
    factor = _zeta_pow(N, A * i) * (1 - _zeta_pow(N, A))
    times = {}
    t0 = time.perf_counter()
    va = factor * operator_applied_K(chain, component, quad, scheme)
    times["a"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    vb = factor * stokes_reduced_integral(chain, quad, component)
    times["b"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    vc = factor * u_substitution_integral(chain, quad, component)
    times["c"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    vd = difference_closed_form(config, j, l, i, component)
    times["d"] = time.perf_counter() - t0
    return EqualityChainReport(j, l, i, component, va, vb, vc, vd, times)


def nu_pairing(config: ModelConfig, j: int, i: int = 0, component: int = 1) -> complex:
    """Picard-Fuchs image of the single cycle at c_j, recovered from the
    difference formulas: the cycles over all sheets sum to zero, so

        image(c_1, i) = -(1/N) sum_l D(j', l, i)   for any j' >= 2,
        image(c_j, i) = D(j, 0, i) + image(c_1, i).
    """
    _check_component(component)
    _check_j(config, j)
    if config.c[j - 1] in config.c[: j - 1]:
        raise InvalidIndex(f"c_{j} coincides with an earlier pole")
    N = config.N
    first = -sum(difference_closed_form(config, 2, l, i, component) for l in range(N)) / N
    if j == 1:
        return first
    return difference_closed_form(config, j, 0, i, component) + first
