"""Double-exponential (tanh-sinh) quadrature on [0, 1] and a Lanczos Gamma.

Nodes are returned together with their complements 1 - x, computed without
cancellation, so integrands with algebraic endpoint singularities can be
evaluated from exact distances to the endpoints.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureNotConverged, ValidationError

U_MAX = 6.0


@dataclass(frozen=True)
class DENodes:
    x: np.ndarray  # abscissae in (0, 1)
    xc: np.ndarray  # 1 - x
    w: np.ndarray  # weights (include the step h)
    coarse: np.ndarray  # boolean mask of the nodes shared with level - 1
    h: float


@lru_cache(maxsize=32)
def de_nodes(level: int) -> DENodes:
    """tanh-sinh rule on [0, 1] with step h = 2**-level and |u| <= U_MAX."""
    if level < 0:
        raise ValidationError("level must be >= 0")
    h = 2.0**-level
    k = int(math.floor(U_MAX / h))
    j = np.arange(-k, k + 1)
    u = j * h
    s = 0.5 * math.pi * np.sinh(u)
    x = 1.0 / (1.0 + np.exp(-2.0 * s))
    xc = 1.0 / (1.0 + np.exp(2.0 * s))
    w = h * 0.5 * math.pi * np.cosh(u) / (2.0 * np.cosh(s) ** 2)
    keep = (x > 0.0) & (xc > 0.0) & (w > 0.0)
    coarse = (j % 2) == 0
    return DENodes(x[keep], xc[keep], w[keep], coarse[keep], h)


def de_sum(values: np.ndarray, nodes: DENodes) -> tuple[complex, float]:
    """Quadrature sum and the difference to the next-coarser level."""
    fine = complex(np.sum(nodes.w * values))
    coarse = 2.0 * complex(np.sum(nodes.w[nodes.coarse] * values[nodes.coarse]))
    return fine, abs(fine - coarse)


@dataclass(frozen=True)
class QuadratureConfig:
    scheme: str = "double-exponential"
    level: int = 3
    max_level: int = 9
    tolerance: float = 1e-13

    def __post_init__(self):
        if self.scheme not in ("double-exponential", "gauss-legendre"):
            raise ValidationError(f"unknown quadrature scheme {self.scheme!r}")
        if self.level < 1 or self.max_level < self.level:
            raise ValidationError("need 1 <= level <= max_level")
        if self.tolerance < 1e-13:
            raise ValidationError("tolerance below 1e-13 is not reachable in double precision")

    def doubled(self) -> "QuadratureConfig":
        return QuadratureConfig(self.scheme, self.level + 1, self.max_level + 1, self.tolerance)


def integrate_unit(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quad: QuadratureConfig = QuadratureConfig(),
    *,
    scale: float = 0.0,
) -> tuple[complex, float]:
    """Integrate f(t, 1 - t) over (0, 1).

    Levels increase from ``quad.level`` until successive estimates differ by
    less than ``tolerance * max(|I|, scale)``.  Returns (value, error estimate).
    """
    if quad.scheme == "gauss-legendre":
        return _gauss_legendre(f, quad)
    err = math.inf
    value = 0j
    for level in range(quad.level, quad.max_level + 1):
        nodes = de_nodes(level)
        vals = np.asarray(f(nodes.x, nodes.xc), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise QuadratureNotConverged("non-finite integrand value at a quadrature node")
        value, err = de_sum(vals, nodes)
        magnitude = float(np.sum(nodes.w * np.abs(vals)))
        if err <= quad.tolerance * max(abs(value), magnitude, scale):
            return value, err
    raise QuadratureNotConverged(
        f"double-exponential rule not converged at level {quad.max_level}: "
        f"estimate {value}, successive difference {err:.3e}"
    )


def _gauss_legendre(f, quad: QuadratureConfig) -> tuple[complex, float]:
    n = 8 * 2**quad.level
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    fine = 0.5 * complex(np.sum(w * f(t, 1.0 - t)))
    x2, w2 = np.polynomial.legendre.leggauss(n // 2)
    t2 = 0.5 * (x2 + 1.0)
    coarse = 0.5 * complex(np.sum(w2 * f(t2, 1.0 - t2)))
    return fine, abs(fine - coarse)


# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    z = complex(z)
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma(1.0 - z))
    z -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


def beta(a: complex, b: complex) -> complex:
    return gamma(a) * gamma(b) / gamma(a + b)
