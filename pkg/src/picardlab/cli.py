"""Command-line entry point.

    picardlab {verify-lemma,operator,periods,chain,rank} [--config PATH]
              [--output PATH] [--seed INT] [--quad-level INT] [--tolerance FLOAT]

Exit codes: 0 success, 2 validation error, 3 numerical tolerance failure,
4 geometry infeasible, 5 no clear singular-value gap.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from typing import Any

from .errors import GeometryError, NoClearGap, NumericalError, ValidationError
from .exact import UniPoly
from .operator import DerivativeScheme, build_jp_operator, lemma_identity_check
from .paths import Path, PathTrace, pochhammer_contour
from .periods import (
    ModelConfig,
    annihilation_residual,
    gauss_2f1_series,
    lauricella_fd_euler,
    lauricella_fd_series,
    period_function,
    segment_period_oracle,
    curve_form_integral,
)
from .quadrature import QuadratureConfig
from .rank import ConfigTemplate, rank_lower_bound_report, sample_points
from .regulator import (
    build_chain,
    closed_form_rhs,
    difference_chain_check,
    difference_closed_form,
    relative_residual,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TOLERANCE = 3
EXIT_GEOMETRY = 4
EXIT_NO_GAP = 5

CANONICAL_MODEL = {"N": 5, "A": 2, "c": [[0, 0], [1, 0]], "lam1": [-0.7, 0.3], "lam2": [1.9, -0.4]}

DEFAULT_LEMMA_CASES = [
    {"c": ["0", "1"], "r": ["2/5"] * 3},
    {"c": ["0", "1", "-1"], "r": ["1/2"] * 4},
    {"c": ["0", "1", "-1", "2"], "r": ["3/7"] * 5},
    {"c": ["0", "1", "1/2"], "r": ["1/3", "2/5", "1/7", "3/4"]},
    {"c": ["-2", "1/3"], "r": ["1/2"] * 3},
]


# ----------------------------------------------------------------------------
# JSON output


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return json.dumps(str(x))
    text = f"{x:.17g}"
    return text if ("e" in text or "." in text) else text + ".0"


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, (Fraction, str)):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj) and len(obj) <= 4:
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalars
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ----------------------------------------------------------------------------
# configuration


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValidationError(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


def _rational_or_complex(v):
    if isinstance(v, str) and "j" not in v and "i" not in v:
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return _complex(v)


def load_model(data: dict) -> ModelConfig:
    for key in ("N", "A", "c", "lam1", "lam2"):
        if key not in data:
            raise ValidationError(f"model needs field {key!r}")
    return ModelConfig(
        int(data["N"]),
        int(data["A"]),
        tuple(_complex(v) for v in data["c"]),
        _complex(data["lam1"]),
        _complex(data["lam2"]),
        tuple(_complex(v) for v in data.get("seeds1", ())),
        tuple(_complex(v) for v in data.get("seeds2", ())),
    )


class RunConfig:
    def __init__(self, raw: dict, args: argparse.Namespace):
        self.raw = raw
        self.model_raw = raw.get("model", CANONICAL_MODEL)
        q = dict(raw.get("quadrature", {}))
        if args.quad_level is not None:
            q["level"] = args.quad_level
            q.setdefault("max_level", max(args.quad_level + 6, 9))
        self.quad = QuadratureConfig(**q)
        self.scheme = DerivativeScheme(**raw.get("derivative", {}))
        self.seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
        self.tolerance = args.tolerance if args.tolerance is not None else raw.get("tolerance")
        self.timings = bool(args.timings)

    def model(self) -> ModelConfig:
        return load_model(self.model_raw)

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))


# ----------------------------------------------------------------------------
# commands


def _poly_json(p: UniPoly) -> list:
    return [str(c) if isinstance(c, (int, Fraction)) else complex(c) for c in p.coeffs]


def cmd_verify_lemma(rc: RunConfig) -> tuple[int, dict]:
    sec = rc.section("lemma")
    cases = sec.get("cases", DEFAULT_LEMMA_CASES)
    out = []
    ok = True
    for case in cases:
        c = [_rational_or_complex(v) for v in case["c"]]
        r = [_rational_or_complex(v) for v in case["r"]]
        op = build_jp_operator(c, r)
        if "perturb" in case:
            k = int(case["perturb"]["k"])
            delta = Fraction(case["perturb"]["delta"])
            op = op.with_p(k, op.p[k - 1] + UniPoly([delta]))
        holds, diff = lemma_identity_check(operator=op)
        ok &= holds
        out.append(
            {
                "c": [str(v) for v in c],
                "r": [str(v) for v in r],
                "holds": holds,
                "discrepancy": {f"x^{i} lam^{j}": str(v) for (i, j), v in sorted(diff.terms.items())},
            }
        )
    return (EXIT_OK if ok else EXIT_TOLERANCE), {"command": "verify-lemma", "all_hold": ok, "cases": out}


def cmd_operator(rc: RunConfig) -> tuple[int, dict]:
    sec = rc.section("operator")
    if "c" in sec:
        c = [_rational_or_complex(v) for v in sec["c"]]
        r = [_rational_or_complex(v) for v in sec["r"]]
    else:
        cfg = rc.model()
        curve = int(sec.get("curve", 1))
        c = [Fraction(int(v.real)) if v.imag == 0 and v.real.is_integer() else v for v in cfg.c]
        r = [cfg.exponent(curve)] * (len(c) + 1)
    op = build_jp_operator(c, r)
    return EXIT_OK, {
        "command": "operator",
        "order": op.order,
        "exact": op.exact,
        "poles": [str(v) if op.exact else complex(v) for v in op.poles],
        "r": [str(v) if op.exact else complex(v) for v in op.r],
        "coefficients_lowest_degree_first": {
            "q0": _poly_json(op.q0),
            "q1": _poly_json(op.q1),
            **{f"p{k + 1}": _poly_json(p) for k, p in enumerate(op.p)},
        },
    }


def cmd_periods(rc: RunConfig) -> tuple[int, dict]:
    cfg = rc.model()
    sec = rc.section("periods")
    tol = float(rc.tolerance if rc.tolerance is not None else 1e-6)
    shifts = [_complex(v) for v in sec.get("base_shifts", [[0, 0], [0.15, 0.1]])]
    pairs = sec.get("cycles", [[1, 2]])
    clearance = float(sec.get("clearance", 0.2))
    residuals = []
    worst = 0.0
    for pair in pairs:
        a, b = (cfg.c[int(k) - 1] for k in pair)
        cyc = pochhammer_contour(a, b, clearance)
        for shift in shifts:
            moved = cfg.with_lams(cfg.lam1 + shift, cfg.lam2 + shift)
            entry = {"cycle": list(pair), "shift": shift}
            for curve in (1, 2):
                res = annihilation_residual(moved, curve, cyc, rc.scheme, rc.quad)
                entry[f"residual_curve{curve}"] = res
                worst = max(worst, res)
            # product P(lam1) Q(lam2) under both operators
            P = period_function(moved, 1, cyc, rc.quad)
            Q = period_function(moved, 2, cyc, rc.quad)
            q_fixed = Q(moved.lam2)
            p_fixed = P(moved.lam1)
            for curve, fn in ((1, lambda lam: P(lam) * q_fixed), (2, lambda lam: p_fixed * Q(lam))):
                res = annihilation_residual(moved, curve, cyc, rc.scheme, rc.quad, function=fn)
                entry[f"product_residual_lam{curve}"] = res
                worst = max(worst, res)
            residuals.append(entry)
    oracles = {}
    oracles["fd_at_zero"] = lauricella_fd_series(0.4, [0.4, 0.4], 1.2, [0.0, 0.0])
    s = lauricella_fd_series(0.4, [0.4, 0.4], 1.2, [0.1, -0.2])
    e = lauricella_fd_euler(0.4, [0.4, 0.4], 1.2, [0.1, -0.2], rc.quad)
    oracles["fd_series_vs_euler"] = {"series": s, "euler": e, "residual": relative_residual(s, e)}
    g = gauss_2f1_series(1 / 3, 0.5, 1.25, 0.2)
    f1 = lauricella_fd_series(1 / 3, [0.5], 1.25, [0.2])
    oracles["fd_vs_2f1"] = {"fd": f1, "gauss": g, "residual": relative_residual(f1, g)}
    v, o = segment_period_oracle(cfg, 1, 1, 2, rc.quad)
    oracles["segment_period_vs_euler"] = {"quadrature": v, "euler": o, "residual": relative_residual(v, o)}
    seg = Path.segment(cfg.c[0], cfg.c[1])
    fwd = curve_form_integral(cfg, 1, seg, rc.quad)
    # reversed path started on the branch the forward path ends on
    tr = PathTrace(seg, cfg.branch_points(1))
    theta_end = [tr.theta_end[0]] + [None] * cfg.n
    back = curve_form_integral(cfg, 1, seg.reversed(), rc.quad, theta_end)
    oracles["reversal"] = {"forward": fwd, "reversed": back, "residual": relative_residual(fwd, -back)}
    oracle_ok = (
        abs(oracles["fd_at_zero"] - 1) < 1e-15
        and oracles["fd_series_vs_euler"]["residual"] < 1e-8
        and oracles["fd_vs_2f1"]["residual"] < 1e-12
        and oracles["segment_period_vs_euler"]["residual"] < 1e-7
    )
    ok = worst < tol and oracle_ok
    return (EXIT_OK if ok else EXIT_TOLERANCE), {
        "command": "periods",
        "model": cfg.to_json(),
        "tolerance": tol,
        "max_residual": worst,
        "annihilation": residuals,
        "oracles": oracles,
        "pass": ok,
    }


def cmd_chain(rc: RunConfig) -> tuple[int, dict]:
    cfg = rc.model()
    sec = rc.section("chain")
    pairs = sec.get("pairs", [[j, l] for j in range(2, cfg.n + 1) for l in (0, 1)])
    components = [int(v) for v in sec.get("components", [1, 2])]
    sheet = int(sec.get("sheet", 0))
    tol_ab = float(rc.tolerance if rc.tolerance is not None else 1e-4)
    reports = []
    ok = True
    for j, l in pairs:
        chain = build_chain(cfg, int(j), int(l))
        for comp in components:
            rep = difference_chain_check(cfg, int(j), int(l), rc.quad, rc.scheme, i=sheet, component=comp, chain=chain)
            passed = rep.passes(tol_ab=tol_ab)
            ok &= passed
            d = rep.to_json(include_runtimes=rc.timings)
            d["turns"] = chain.turns
            d["pass"] = passed
            # winding is only seen mod N by the closed form
            shifted = difference_closed_form(cfg, int(j), int(l) + cfg.N, sheet, comp)
            d["closed_form_l_plus_N_identical"] = shifted == rep.value_closed_form
            reports.append(d)
    sheet_sums = {}
    for j in range(1, cfg.n + 1):
        for comp in components:
            total = sum(closed_form_rhs(cfg, j, i, comp) for i in range(cfg.N))
            sheet_sums[f"j{j}_comp{comp}"] = abs(total)
    ok &= max(sheet_sums.values()) < 1e-12
    return (EXIT_OK if ok else EXIT_TOLERANCE), {
        "command": "chain",
        "model": cfg.to_json(),
        "tolerances": {"ab": tol_ab, "bc": 1e-6, "cd": 1e-9},
        "reports": reports,
        "sheet_sums_abs": sheet_sums,
        "pass": ok,
    }


def cmd_rank(rc: RunConfig) -> tuple[int, dict]:
    sec = rc.section("rank")
    cfg = rc.model()
    template = ConfigTemplate.from_config(cfg)
    count = int(sec.get("points", 4 * template.n))
    gap = float(sec.get("gap_threshold", 1e6))
    points = sample_points(template, count, rc.seed)
    report = rank_lower_bound_report(template, points, gap)
    out = {"command": "rank", "seed": rc.seed, **report.to_json(), "summary": report.summary()}
    return EXIT_OK, out


COMMANDS = {
    "verify-lemma": cmd_verify_lemma,
    "operator": cmd_operator,
    "periods": cmd_periods,
    "chain": cmd_chain,
    "rank": cmd_rank,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="picardlab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--output", help="write JSON here instead of stdout")
    parser.add_argument("--seed", type=int, default=None, help="random seed for sampled points")
    parser.add_argument("--quad-level", type=int, default=None, help="starting quadrature level")
    parser.add_argument("--tolerance", type=float, default=None, help="pass/fail tolerance of the command")
    parser.add_argument("--timings", action="store_true", help="include wall-clock timings (not deterministic)")
    return parser


def run(argv: list[str] | None = None) -> tuple[int, dict]:
    args = build_parser().parse_args(argv)
    try:
        raw = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        rc = RunConfig(raw, args)
        t0 = time.perf_counter()
        code, payload = COMMANDS[args.command](rc)
        if rc.timings:
            payload["wall_seconds"] = time.perf_counter() - t0
    except NoClearGap as exc:
        return EXIT_NO_GAP, {"command": args.command, "error": "NoClearGap", "message": str(exc)}
    except (ValidationError, TypeError, KeyError) as exc:
        return EXIT_VALIDATION, {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
    except GeometryError as exc:
        return EXIT_GEOMETRY, {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
    except NumericalError as exc:
        return EXIT_TOLERANCE, {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
    return code, payload


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code, payload = run(argv)
    text = dumps(payload) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
