"""Piecewise paths in the punctured plane and continuous branch tracking.

A :class:`Path` is an ordered list of exact primitives (line segments and
circular arcs).  :class:`PathTrace` lifts ``arg(z - a)`` continuously along a
path for a set of base points ``a``; N-th roots and fractional powers along the
path are read off the lifted logarithms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._core import lift_phases, tracked_log_sum
from .errors import BadInitialBranch, GeometryInfeasible, PathHitsBasePoint, ValidationError

HIT_THRESHOLD = 1e-9
MAX_STEP = math.pi / 4


def _unit(z: complex) -> complex:
    return z / abs(z)


@dataclass(frozen=True)
class Line:
    z0: complex
    z1: complex

    kind = "line"

    @property
    def start(self) -> complex:
        return self.z0

    @property
    def end(self) -> complex:
        return self.z1

    @property
    def length(self) -> float:
        return abs(self.z1 - self.z0)

    def point(self, t):
        return self.z0 + np.asarray(t) * (self.z1 - self.z0)

    def deriv(self, t):
        return np.full(np.shape(t), self.z1 - self.z0, dtype=complex)

    def offset(self, t, tc, a: complex):
        """z(t) - a, exact near an endpoint that coincides with a."""
        d = self.z1 - self.z0
        if a == self.z0:
            return np.asarray(t) * d
        if a == self.z1:
            return -np.asarray(tc) * d
        return self.z0 - a + np.asarray(t) * d

    def limit_direction(self, a: complex, at_end: bool) -> complex:
        d = self.z1 - self.z0
        return -d if at_end else d

    def min_distance(self, a: complex) -> float:
        d = self.z1 - self.z0
        tau = ((a - self.z0) * d.conjugate()).real / abs(d) ** 2
        tau = min(1.0, max(0.0, tau))
        return abs(self.z0 + tau * d - a)

    def initial_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, 9)

    def reversed(self) -> "Line":
        return Line(self.z1, self.z0)

    def split(self, t: float) -> tuple["Line", "Line"]:
        m = self.z0 + t * (self.z1 - self.z0)
        return Line(self.z0, m), Line(m, self.z1)

    def to_json(self) -> dict:
        return {"type": "line", "start": _cjson(self.z0), "end": _cjson(self.z1)}


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    phi0: float
    sweep: float  # signed; positive is counterclockwise

    kind = "arc"

    @property
    def start(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.phi0)

    @property
    def end(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * (self.phi0 + self.sweep))

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * (self.phi0 + np.asarray(t) * self.sweep))

    def deriv(self, t):
        return 1j * self.sweep * self.radius * np.exp(1j * (self.phi0 + np.asarray(t) * self.sweep))

    def offset(self, t, tc, a: complex):
        rel = self.radius * np.exp(1j * (self.phi0 + np.asarray(t) * self.sweep))
        if a == self.center:
            return rel
        return (self.center - a) + rel

    def limit_direction(self, a: complex, at_end: bool) -> complex:
        t = 1.0 if at_end else 0.0
        tangent = complex(self.deriv(t))
        return -tangent if at_end else tangent

    def min_distance(self, a: complex) -> float:
        rel = a - self.center
        if rel == 0:
            return self.radius
        ang = math.atan2(rel.imag, rel.real)
        lo, hi = sorted((self.phi0, self.phi0 + self.sweep))
        k = math.ceil((lo - ang) / (2 * math.pi))
        if ang + 2 * math.pi * k <= hi:
            return abs(abs(rel) - self.radius)
        return min(abs(self.start - a), abs(self.end - a))

    def initial_grid(self) -> np.ndarray:
        pieces = max(2, int(math.ceil(abs(self.sweep) / (math.pi / 8))))
        return np.linspace(0.0, 1.0, pieces + 1)

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.phi0 + self.sweep, -self.sweep)

    def split(self, t: float) -> tuple["Arc", "Arc"]:
        return (
            Arc(self.center, self.radius, self.phi0, t * self.sweep),
            Arc(self.center, self.radius, self.phi0 + t * self.sweep, (1 - t) * self.sweep),
        )

    def to_json(self) -> dict:
        return {
            "type": "arc",
            "start": _cjson(self.start),
            "end": _cjson(self.end),
            "center": _cjson(self.center),
            "radius": self.radius,
            "orientation": "ccw" if self.sweep > 0 else "cw",
            "phi0": self.phi0,
            "sweep": self.sweep,
        }


Segment = Line | Arc


def _cjson(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def full_loop(center: complex, radius: float, phi0: float, turns: int) -> list[Arc]:
    """|turns| full circles starting at angle phi0; negative turns run clockwise."""
    sign = 1.0 if turns > 0 else -1.0
    arcs = []
    for _ in range(abs(turns)):
        arcs.append(Arc(center, radius, phi0, sign * math.pi))
        arcs.append(Arc(center, radius, phi0 + sign * math.pi, sign * math.pi))
    return arcs


class Path:
    """Piecewise-smooth map [0, 1] -> C.

    Segment k occupies the global parameter interval [breaks[k], breaks[k+1]].
    By default the parameter lengths are proportional to arc length.
    """

    def __init__(self, segments: Sequence[Segment], param_lengths: Sequence[float] | None = None):
        if not segments:
            raise ValidationError("a path needs at least one segment")
        segs = tuple(segments)
        for a, b in zip(segs, segs[1:]):
            if abs(a.end - b.start) > 1e-12 * max(1.0, abs(a.end)):
                raise ValidationError(f"segments do not join: {a.end} vs {b.start}")
        if param_lengths is None:
            param_lengths = [s.length for s in segs]
        lengths = np.asarray(param_lengths, dtype=float)
        if len(lengths) != len(segs) or np.any(lengths <= 0):
            raise ValidationError("parameter lengths must be positive, one per segment")
        self.segments = segs
        self.breaks = np.concatenate([[0.0], np.cumsum(lengths) / lengths.sum()])
        self.breaks[-1] = 1.0

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def is_closed(self, tol: float = 1e-12) -> bool:
        return abs(self.start - self.end) <= tol * max(1.0, abs(self.start))

    def locate(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, len(self.segments) - 1)
        t = (s - self.breaks[k]) / (self.breaks[k + 1] - self.breaks[k])
        return k, t

    def point(self, s):
        k, t = self.locate(s)
        out = np.empty(len(t), dtype=complex)
        for i, seg in enumerate(self.segments):
            m = k == i
            if np.any(m):
                out[m] = seg.point(t[m])
        return out if np.ndim(s) else complex(out[0])

    def deriv(self, s):
        """d gamma / ds for the global parameter."""
        k, t = self.locate(s)
        out = np.empty(len(t), dtype=complex)
        for i, seg in enumerate(self.segments):
            m = k == i
            if np.any(m):
                out[m] = seg.deriv(t[m]) / (self.breaks[i + 1] - self.breaks[i])
        return out if np.ndim(s) else complex(out[0])

    def min_distance(self, a: complex) -> float:
        return min(seg.min_distance(a) for seg in self.segments)

    def reversed(self) -> "Path":
        widths = np.diff(self.breaks)
        return Path([s.reversed() for s in reversed(self.segments)], widths[::-1])

    def __mul__(self, other: "Path") -> "Path":
        """Concatenation: self followed by other."""
        return Path(self.segments + other.segments)

    def to_json(self) -> dict:
        return {
            "segments": [s.to_json() for s in self.segments],
            "breaks": [float(b) for b in self.breaks],
            "start": _cjson(self.start),
            "end": _cjson(self.end),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Path":
        segs: list[Segment] = []
        for d in data["segments"]:
            if d["type"] == "line":
                segs.append(Line(complex(*d["start"]), complex(*d["end"])))
            else:
                segs.append(Arc(complex(*d["center"]), d["radius"], d["phi0"], d["sweep"]))
        widths = np.diff(np.asarray(data["breaks"], dtype=float)) if "breaks" in data else None
        return cls(segs, widths)

    @classmethod
    def segment(cls, a: complex, b: complex) -> "Path":
        return cls([Line(complex(a), complex(b))])


@dataclass
class _SegmentTrace:
    t: np.ndarray
    w: np.ndarray  # P x K offsets (endpoint zeros replaced by limit directions)
    theta: np.ndarray  # P x K lifted arguments


class PathTrace:
    """Continuous logarithms of (z - a) along a path for several base points.

    Parameters
    ----------
    path : Path
    bases : sequence of complex
    theta0 : sequence of float or None
        Lifted argument of (start - a) at the path start.  ``None`` picks the
        principal argument (for a base point at the start, the argument of the
        initial direction).
    """

    def __init__(self, path: Path, bases: Sequence[complex], theta0: Sequence[float | None] | None = None):
        self.path = path
        self.bases = np.asarray([complex(a) for a in bases], dtype=complex)
        P = len(self.bases)
        if theta0 is None:
            theta0 = [None] * P
        first = path.segments[0]
        start_theta = np.empty(P)
        for p, a in enumerate(self.bases):
            if theta0[p] is not None:
                start_theta[p] = float(theta0[p])
            elif a == path.start:
                d = first.limit_direction(a, at_end=False)
                start_theta[p] = math.atan2(d.imag, d.real)
            else:
                w0 = path.start - a
                start_theta[p] = math.atan2(w0.imag, w0.real)
        self.theta_start = start_theta
        self._check_clear()
        self.segments: list[_SegmentTrace] = []
        theta = start_theta.copy()
        for i, seg in enumerate(path.segments):
            tr = self._trace_segment(i, seg, theta)
            self.segments.append(tr)
            theta = tr.theta[:, -1].copy()
        self.theta_end = theta

    def _endpoint_bases(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.path.segments)
        at_start = (self.bases == self.path.start) if i == 0 else np.zeros(len(self.bases), bool)
        at_end = (self.bases == self.path.end) if i == n - 1 else np.zeros(len(self.bases), bool)
        return at_start, at_end

    def _check_clear(self) -> None:
        n = len(self.path.segments)
        for i, seg in enumerate(self.path.segments):
            at_start, at_end = self._endpoint_bases(i)
            for p, a in enumerate(self.bases):
                if at_start[p] or at_end[p]:
                    if seg.kind != "line":
                        raise PathHitsBasePoint("a path may only touch a base point along a straight end piece")
                    # the rest of this segment must stay away from a
                    other = seg.z1 if at_start[p] else seg.z0
                    if abs(other - a) < HIT_THRESHOLD:
                        raise PathHitsBasePoint(f"degenerate end piece at base point {a}")
                    continue
                if seg.min_distance(a) < HIT_THRESHOLD:
                    raise PathHitsBasePoint(f"segment {i} of {n} passes within {HIT_THRESHOLD} of {a}")

    def _grid_offsets(self, seg: Segment, t: np.ndarray, at_start, at_end) -> np.ndarray:
        w = np.empty((len(self.bases), len(t)), dtype=complex)
        for p, a in enumerate(self.bases):
            w[p] = seg.offset(t, 1.0 - t, a)
            if at_start[p] and t[0] == 0.0:
                w[p, 0] = seg.limit_direction(a, at_end=False)
            if at_end[p] and t[-1] == 1.0:
                w[p, -1] = seg.limit_direction(a, at_end=True)
        return w

    def _trace_segment(self, i: int, seg: Segment, theta_in: np.ndarray) -> _SegmentTrace:
        at_start, at_end = self._endpoint_bases(i)
        t = seg.initial_grid()
        for _ in range(64):
            w = self._grid_offsets(seg, t, at_start, at_end)
            steps = np.abs(np.angle(w[:, 1:] / w[:, :-1]))
            bad = np.any(steps >= MAX_STEP, axis=0)
            if not np.any(bad):
                break
            mids = 0.5 * (t[:-1][bad] + t[1:][bad])
            t = np.sort(np.concatenate([t, mids]))
        else:  # pragma: no cover - guarded by the clearance check
            raise PathHitsBasePoint("argument refinement did not terminate")
        theta = lift_phases(w, theta_in.astype(float))
        return _SegmentTrace(t, w, theta)

    def nearest_index(self, i: int, t: np.ndarray) -> np.ndarray:
        grid = self.segments[i].t
        k = np.clip(np.searchsorted(grid, t), 1, len(grid) - 1)
        left_closer = (t - grid[k - 1]) < (grid[k] - t)
        return np.where(left_closer, k - 1, k).astype(np.intp)

    def offsets(self, i: int, t: np.ndarray, tc: np.ndarray) -> np.ndarray:
        seg = self.path.segments[i]
        return np.stack([seg.offset(t, tc, a) for a in self.bases]) if len(self.bases) else np.empty((0, len(t)))

    def log_combination(self, i: int, t: np.ndarray, tc: np.ndarray, exps: Sequence[float]) -> np.ndarray:
        """sum_p exps[p] * log(z(t) - a_p) on segment i, continuous branches."""
        t = np.ascontiguousarray(t, dtype=float)
        tc = np.ascontiguousarray(tc, dtype=float)
        tr = self.segments[i]
        idx = self.nearest_index(i, t)
        w = np.ascontiguousarray(self.offsets(i, t, tc))
        return tracked_log_sum(w, idx, tr.w, tr.theta, np.asarray(exps, dtype=float))

    def logs(self, i: int, t: np.ndarray, tc: np.ndarray) -> np.ndarray:
        """P x M matrix of individual continuous logarithms."""
        eye = np.eye(len(self.bases))
        return np.stack([self.log_combination(i, t, tc, row) for row in eye])

    def total_arg_change(self, p: int = 0) -> float:
        return float(self.theta_end[p] - self.theta_start[p])

    def end_log(self, p: int) -> complex:
        """Continuous log of (end - a_p); modulus from the exact endpoint."""
        w = self.path.end - self.bases[p]
        if w == 0:
            raise PathHitsBasePoint("base point sits at the path end; its log diverges")
        return complex(math.log(abs(w)), self.theta_end[p])

    def start_log(self, p: int) -> complex:
        w = self.path.start - self.bases[p]
        if w == 0:
            raise PathHitsBasePoint("base point sits at the path start; its log diverges")
        return complex(math.log(abs(w)), self.theta_start[p])


class BranchTrace:
    """Analytic continuation of an N-th root of (z - a) along a path."""

    def __init__(self, path: Path, a: complex, N: int, initial: complex):
        self.path = path
        self.a = complex(a)
        self.N = int(N)
        self.initial = complex(initial)
        w0 = path.start - self.a
        theta0 = self.N * math.atan2(self.initial.imag, self.initial.real)
        self._trace = PathTrace(path, [self.a], [theta0])

    @property
    def grid(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(segment parameters, lifted arguments) for every segment."""
        return [(tr.t, tr.theta[0]) for tr in self._trace.segments]

    def log_at(self, s) -> np.ndarray:
        k, t = self.path.locate(s)
        out = np.empty(len(t), dtype=complex)
        for i in range(len(self.path.segments)):
            m = k == i
            if np.any(m):
                out[m] = self._trace.log_combination(i, t[m], 1.0 - t[m], [1.0])
        return out

    def value(self, s):
        vals = np.exp(self.log_at(s) / self.N)
        return vals if np.ndim(s) else complex(vals[0])

    def end_value(self) -> complex:
        return cmath.exp(self._trace.end_log(0) / self.N)

    def total_arg_change(self) -> float:
        return self._trace.total_arg_change(0)


def continue_branch(path: Path, a: complex, N: int, initial: complex) -> BranchTrace:
    w0 = path.start - complex(a)
    if w0 == 0:
        raise PathHitsBasePoint("path starts at the base point")
    if abs(complex(initial) ** N - w0) > 1e-9 * abs(w0):
        raise BadInitialBranch(f"initial**{N} = {complex(initial) ** N} does not match start - a = {w0}")
    return BranchTrace(path, a, N, initial)


def total_arg_change(path: Path, a: complex) -> float:
    return PathTrace(path, [complex(a)]).total_arg_change(0)


def _min_pairwise(points: Sequence[complex]) -> float:
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = min(best, abs(points[i] - points[j]))
    return best


def _detoured_line(p: complex, q: complex, obstacles: Iterable[complex], eps: float) -> list[Segment]:
    """Straight route p -> q with semicircular detours around nearby obstacles."""
    d = q - p
    L = abs(d)
    u = d / L
    detours = []
    for o in obstacles:
        tau = ((o - p) * d.conjugate()).real / L**2
        foot = p + tau * d
        dist = abs(o - foot)
        if not (0.0 < tau < 1.0) or dist >= eps / 2:
            continue
        radius = eps / 2 + dist
        if dist > 0:
            away = _unit(foot - o)
        else:
            away = -1j * u  # pass obstacles lying on the route on the right
        # away is +-i*u; bulging to the right of travel is a counterclockwise half turn
        sweep = math.pi if (away / u).imag < 0 else -math.pi
        detours.append((tau * L - radius, tau * L + radius, foot, radius, sweep))
    detours.sort(key=lambda item: item[0])
    pieces: list[Segment] = []
    cursor = 0.0
    for lo, hi, foot, radius, sweep in detours:
        if lo <= cursor + 1e-12 or hi >= L - 1e-12:
            raise GeometryInfeasible("detour circles overlap each other or the route ends")
        a = p + lo * u
        pieces.append(Line(p + cursor * u, a))
        phi0 = math.atan2(-u.imag, -u.real)
        arc = Arc(foot, radius, phi0, sweep)
        pieces.append(arc)
        cursor = hi
    pieces.append(Line(p + cursor * u if pieces else p, q))
    # reconnect exactly: arcs end at computed points
    fixed: list[Segment] = []
    for k, seg in enumerate(pieces):
        if seg.kind == "line" and k > 0:
            seg = Line(fixed[-1].end, seg.z1)
        fixed.append(seg)
    return fixed


def build_gamma(
    c_start: complex,
    c_end: complex,
    obstacles: Sequence[complex],
    winding_l: int = 0,
    N: int | None = None,
    eps: float | None = None,
    *,
    winding_center: complex | None = None,
    extra_windings: Mapping[complex, int] | None = None,
    loop_radius: float | None = None,
) -> Path:
    """Path from c_start to c_end in the plane punctured at ``obstacles``.

    The path leaves along c_start + s and arrives along c_end - s (straight
    collars of length eps), follows a straight route with semicircular
    detours in between, and has ``winding_l`` extra counterclockwise turns
    around ``winding_center`` (negative: clockwise) spliced in right after the
    first collar.  ``extra_windings`` adds turns around further obstacles.
    ``N`` is only used to validate that ``winding_center`` is a genuine
    obstacle of an N-fold cover (N >= 2).
    """
    c_start, c_end = complex(c_start), complex(c_end)
    obstacles = [complex(o) for o in obstacles]
    if c_start == c_end:
        raise ValidationError("path endpoints coincide")
    if any(o in (c_start, c_end) for o in obstacles):
        raise ValidationError("obstacles must exclude the path endpoints")
    if N is not None and N < 2:
        raise ValidationError("cover degree N must be >= 2")
    pts = [c_start, c_end, *obstacles]
    half_gap = _min_pairwise(pts) / 2
    if eps is None:
        eps = 0.8 * half_gap
    if not 0.0 < eps < half_gap:
        raise ValidationError(f"eps = {eps} must lie in (0, {half_gap:.6g}) (half the minimum pairwise distance)")
    rho = eps / 2 if loop_radius is None else float(loop_radius)

    windings: dict[complex, int] = {}
    if winding_l:
        if winding_center is None:
            raise ValidationError("winding_l != 0 needs a winding_center")
        windings[complex(winding_center)] = int(winding_l)
    for center, turns in (extra_windings or {}).items():
        center = complex(center)
        windings[center] = windings.get(center, 0) + int(turns)
    for center in windings:
        if center not in obstacles:
            raise ValidationError(f"winding center {center} is not an obstacle")

    p = c_start + eps
    q = c_end - eps
    segments: list[Segment] = [Line(c_start, p)]
    for center, turns in windings.items():
        if turns == 0:
            continue
        attach = center + rho * _unit(p - center)
        tether = Line(p, attach)
        for o in pts:
            if o == center:
                continue
            if tether.min_distance(o) < eps / 2 or abs(o - center) - rho < eps / 2:
                raise GeometryInfeasible(f"winding loop around {center} passes too close to {o}")
        segments.append(tether)
        segments.extend(full_loop(center, rho, math.atan2((attach - center).imag, (attach - center).real), turns))
        segments.append(Line(segments[-1].end, p))
    route = _detoured_line(p, q, pts, eps)
    for seg in route:
        for o in pts:
            if seg.min_distance(o) < eps / 2 - 1e-12:
                raise GeometryInfeasible(f"route passes within eps/2 of {o}")
    segments.extend(route)
    segments.append(Line(q, c_end))

    if 2 * eps < 1.0:
        # unit-speed collars: gamma(s) = c_start + s and gamma(1 - s) = c_end - s for s < eps
        inner = [s.length for s in segments[1:-1]]
        scale = (1.0 - 2 * eps) / sum(inner)
        widths = [eps, *[x * scale for x in inner], eps]
    else:
        widths = None
    return Path(segments, widths)


def pochhammer_contour(a: complex, b: complex, clearance: float) -> Path:
    """Commutator loop(a) loop(b) loop(a)^-1 loop(b)^-1 based at the midpoint."""
    a, b = complex(a), complex(b)
    if a == b:
        raise ValidationError("Pochhammer contour needs two distinct points")
    if not 0.0 < clearance < abs(a - b) / 4:
        raise GeometryInfeasible(f"clearance {clearance} must lie in (0, |a - b|/4 = {abs(a - b) / 4:.6g})")
    m = 0.5 * (a + b)

    def loop(center: complex, turns: int) -> list[Segment]:
        attach = center + clearance * _unit(m - center)
        phi0 = math.atan2((attach - center).imag, (attach - center).real)
        arcs = full_loop(center, clearance, phi0, turns)
        return [Line(m, attach), *arcs, Line(arcs[-1].end, m)]

    return Path(loop(a, 1) + loop(b, 1) + loop(a, -1) + loop(b, -1))
