"""Exact rational arithmetic: Pochhammer symbols, generalized binomials and
sparse polynomials in one or two variables.

Rationals are plain :class:`fractions.Fraction` values, which are kept in
lowest terms by construction.  Polynomial coefficients may be ``Fraction``
(exact mode) or ``complex`` (numeric mode); the classes do not care as long
as the coefficients support ``+``, ``*`` and comparison with zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

Scalar = Number  # Fraction | int | complex | float


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def pochhammer(alpha, k: int):
    """Rising factorial alpha (alpha+1) ... (alpha+k-1); 1 when k == 0."""
    if k < 0:
        raise ValueError("pochhammer order must be nonnegative")
    out = 1 if isinstance(alpha, (int, Fraction)) else 1.0
    for m in range(k):
        out = out * (alpha + m)
    return out


def binomial_general(alpha, k: int):
    """alpha (alpha-1) ... (alpha-k+1) / k!, with the convention 0 for k < 0."""
    if k < 0:
        return 0
    num = 1 if isinstance(alpha, (int, Fraction)) else 1.0
    for m in range(k):
        num = num * (alpha - m)
    if isinstance(num, (int, Fraction)):
        return Fraction(num) / math.factorial(k)
    return num / math.factorial(k)


def euler_totient(n: int) -> int:
    if n < 1:
        raise ValueError("totient is defined for positive integers")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _is_zero(c) -> bool:
    return c == 0


class UniPoly:
    """Dense univariate polynomial, coefficients stored lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = list(coeffs)
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs: tuple = tuple(cs)

    @classmethod
    def constant(cls, c) -> "UniPoly":
        return cls([c])

    @classmethod
    def linear_root(cls, root, one=Fraction(1)) -> "UniPoly":
        """The monic polynomial (t - root)."""
        return cls([-root, one])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UniPoly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    def __neg__(self) -> "UniPoly":
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            return UniPoly(c * other for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def derivative(self, order: int = 1) -> "UniPoly":
        cs = list(self.coeffs)
        for _ in range(order):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return UniPoly(cs)

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def to_complex(self) -> "UniPoly":
        return UniPoly(complex(c) for c in self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({[str(c) for c in self.coeffs]})"


class BiPoly:
    """Sparse polynomial in (x, lam): map from exponent pair (i, j) to coefficient
    of x**i * lam**j.  Zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        self.terms: dict[tuple[int, int], object] = {
            k: v for k, v in (terms or {}).items() if not _is_zero(v)
        }

    @classmethod
    def x(cls) -> "BiPoly":
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def lam(cls) -> "BiPoly":
        return cls({(0, 1): Fraction(1)})

    @classmethod
    def constant(cls, c) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def from_uni(cls, p: UniPoly, variable: str) -> "BiPoly":
        if variable == "x":
            return cls({(i, 0): c for i, c in enumerate(p.coeffs)})
        if variable == "lam":
            return cls({(0, i): c for i, c in enumerate(p.coeffs)})
        raise ValueError(f"unknown variable {variable!r}")

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self, variable: str) -> int:
        idx = 0 if variable == "x" else 1
        return max((k[idx] for k in self.terms), default=-1)

    def __add__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            other = BiPoly.constant(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            other = BiPoly.constant(other)
        return self + (-other)

    def __mul__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            return BiPoly({k: v * other for k, v in self.terms.items()})
        out: dict[tuple[int, int], object] = {}
        for (i1, j1), a in self.terms.items():
            for (i2, j2), b in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "BiPoly":
        out = BiPoly.constant(Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    def partial(self, variable: str, order: int = 1) -> "BiPoly":
        idx = 0 if variable == "x" else 1
        out: dict[tuple[int, int], object] = {}
        for key, c in self.terms.items():
            e = key[idx]
            if e < order:
                continue
            factor = math.perm(e, order)
            new = (e - order, key[1]) if idx == 0 else (key[0], e - order)
            out[new] = c * factor
        return BiPoly(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def evaluate(self, x: complex, lam: complex) -> complex:
        # Horner in x over coefficient polynomials in lam
        by_x: dict[int, dict[int, object]] = {}
        for (i, j), c in self.terms.items():
            by_x.setdefault(i, {})[j] = c
        acc = 0j
        for i in range(self.degree("x"), -1, -1):
            row = by_x.get(i, {})
            inner = 0j
            for j in range(max(row, default=-1), -1, -1):
                inner = inner * lam + complex(row.get(j, 0))
            acc = acc * x + inner
        return acc

    def __repr__(self) -> str:
        items = sorted(self.terms.items())
        return "BiPoly(" + ", ".join(f"x^{i} l^{j}: {c}" for (i, j), c in items) + ")"
