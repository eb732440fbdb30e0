"""Command-line interface: certify, sweep-digits, radius-sweep, gamma-curve."""

from __future__ import annotations

import argparse
import contextvars
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence

from .alpha import _poly_degree_term, alpha_test, convergence_radius, ingredient_C, mu_upper
from .dfinite import DFiniteError
from .exact import parse_exact
from .interval import IntervalBox, rounding_contexts, to_fraction, working_precision
from .krawczyk import krawczyk_test
from .parsing import ParseError, SystemFile, load_system, parse_point
from .report import (ROUNDING_RULE, Report, alpha_dict, digest, krawczyk_dict, num, round_decimal)
from .system import IngredientSystem, OracleError, SystemError_

PRECISION_ENV = "DFCERT_PRECISION"
DEFAULT_PRECISION = 128
DEFAULT_MULTIPLIERS = ("1e-6", "1e-5", "1e-4", "1e-3", "1e-2", "3e-2")


class InputError(ValueError):
    pass


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError as exc:
        raise InputError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from exc
    if bits < 24:
        raise InputError(f"{PRECISION_ENV} must be at least 24")
    return bits


# helpers ---------------------------------------------------------------------

def _with_mode(sf: SystemFile, mode: str | None) -> IngredientSystem:
    sys_ = sf.system
    if mode is None or mode == sys_.mode:
        return sys_
    try:
        return IngredientSystem(sys_.polys, sys_.ingredients, mode, sys_.names)
    except SystemError_ as exc:
        raise InputError(str(exc)) from exc


def _resolve_point(sf: SystemFile, point: str | None) -> list[str]:
    if point is None:
        return sf.point("default")
    if point in sf.points:
        return sf.points[point]
    return parse_point(point, len(sf.variables))


def _parse_radii(spec, m: int) -> list[Fraction] | None:
    if spec is None or spec == "auto":
        return None
    parts = [p.strip() for p in str(spec).split(",") if p.strip()]
    try:
        vals = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad radius {spec!r}") from exc
    if any(v <= 0 for v in vals):
        raise InputError("radii must be positive")
    if len(vals) == 1:
        return vals * m
    if len(vals) != m:
        raise InputError(f"need 1 or {m} radii, got {len(vals)}")
    return vals


def _run_rows(tasks: Sequence[Callable[[], dict]], jobs: int) -> list[dict]:
    """Run row tasks, concurrently when jobs > 1, preserving order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(contextvars.copy_context().run, t) for t in tasks]
        return [f.result() for f in futures]


def _system_digest(sf: SystemFile, *extra) -> str:
    canonical = json.dumps(sf.data, sort_keys=True)
    return digest(canonical, *[json.dumps(e, sort_keys=True, default=str) for e in extra])


def _box_around(sys_: IngredientSystem, point: Sequence[str], side: Fraction) -> IntervalBox:
    return IntervalBox.around([parse_exact(p) for p in point], side / 2, sys_.complex_mode)


# commands ----------------------------------------------------------------------

def run_certify(source: str, point: str | None = None, method: str = "alpha",
                precision: int | None = None, radius=None, box_side=None,
                mode: str | None = None) -> Report:
    start = time.perf_counter()
    sf = load_system(source)
    sys_ = _with_mode(sf, mode)
    pt = _resolve_point(sf, point)
    sys_.check_point(pt)
    precision = precision or default_precision()
    config = {"precision": precision, "method": method, "mode": sys_.mode, "point": pt,
              "point_norm": "all coordinates", "mu_norm": "Frobenius"}
    with working_precision(precision):
        if method == "alpha":
            radii = _parse_radii(radius, sys_.m)
            config["radius"] = "auto" if radii is None else [str(r) for r in radii]
            cert = alpha_test(sys_, pt, radii)
            result = alpha_dict(cert)
        elif method == "krawczyk":
            if box_side is None:
                raise InputError("krawczyk needs --box-side")
            side = Fraction(str(box_side))
            if side <= 0:
                raise InputError("box side must be positive")
            config["box_side"] = str(side)
            cert = krawczyk_test(sys_, _box_around(sys_, pt, side))
            result = krawczyk_dict(cert)
        else:
            raise InputError(f"unknown method {method!r}")
    return Report("certify", sf.name, _system_digest(sf, config), config, [result], cert.verdict,
                  time.perf_counter() - start)


def run_sweep_digits(source: str, point: str | None = None, digits: Sequence[int] = range(4),
                     methods: Sequence[str] = ("krawczyk", "alpha"), radius="0.4",
                     precision: int | None = None, mode: str | None = None, jobs: int = 1) -> Report:
    start = time.perf_counter()
    sf = load_system(source)
    sys_ = _with_mode(sf, mode)
    pt = _resolve_point(sf, point)
    precision = precision or default_precision()
    radii = _parse_radii(radius, sys_.m)
    config = {"precision": precision, "mode": sys_.mode, "point": pt, "digits": list(digits),
              "methods": list(methods), "radius": "auto" if radii is None else [str(r) for r in radii],
              "rounding": ROUNDING_RULE, "box_side": "2*10^-d"}

    def row(d: int) -> Callable[[], dict]:
        def task():
            with working_precision(precision):
                rounded = [round_decimal(p, d) for p in pt]
                out = {"d": d, "point": rounded}
                if "krawczyk" in methods:
                    side = Fraction(2, 10 ** d)
                    cert = krawczyk_test(sys_, _box_around(sys_, rounded, side))
                    out["krawczyk"] = krawczyk_dict(cert)
                if "alpha" in methods:
                    out["alpha"] = alpha_dict(alpha_test(sys_, rounded, radii))
                return out
        return task

    rows = _run_rows([row(d) for d in digits], jobs)
    return Report("sweep-digits", sf.name, _system_digest(sf, config), config, rows, "complete",
                  time.perf_counter() - start)


def _reference_radius(sf: SystemFile, sys_: IngredientSystem, pt, R) -> Fraction:
    if R is not None and R != "auto":
        return Fraction(str(R))
    if "radius_reference" in sf.data and R is None:
        return Fraction(str(sf.data["radius_reference"]))
    x = sys_.check_point(pt)
    bounds = [convergence_radius(row.func, x[row.input_index]) for row in sys_.ingredients]
    finite = [to_fraction(b) for b in bounds if b.is_finite()]
    if not finite:
        raise InputError("all ingredients are entire; supply --R")
    return min(finite)


def run_radius_sweep(source: str, point: str | None = None, multipliers: Sequence[str] = DEFAULT_MULTIPLIERS,
                     R=None, precision: int | None = None, mode: str | None = None,
                     jobs: int = 1) -> Report:
    """alpha test with every ingredient radius set to multiplier * R."""
    start = time.perf_counter()
    sf = load_system(source)
    sys_ = _with_mode(sf, mode)
    pt = _resolve_point(sf, point)
    precision = precision or default_precision()
    with working_precision(precision):
        Rv = _reference_radius(sf, sys_, pt, R)
    config = {"precision": precision, "mode": sys_.mode, "point": pt, "R": str(Rv),
              "multipliers": list(multipliers), "radius_rule": "same r for every ingredient"}

    def row(mult: str) -> Callable[[], dict]:
        def task():
            r = Fraction(mult) * Rv
            with working_precision(precision):
                cert = alpha_test(sys_, pt, [r] * sys_.m)
            status = cert.verdict
            if cert.message.startswith("RadiusExceeded"):
                status = "radius-exceeded"
            elif cert.message:
                status = "oracle-error"
            return {"multiplier": mult, "r": str(r), "gamma_upper": num(cert.gamma_upper),
                    "alpha_upper": num(cert.alpha_upper), "passes": cert.passed, "status": status,
                    "certificate": alpha_dict(cert)}
        return task

    rows = _run_rows([row(m) for m in multipliers], jobs)
    return Report("radius-sweep", sf.name, _system_digest(sf, config), config, rows, "complete",
                  time.perf_counter() - start)


def parse_grid(spec: str) -> list[Fraction]:
    """``a:b:step`` (inclusive) or a comma list; empty string gives an empty grid."""
    spec = spec.strip()
    if not spec:
        return []
    try:
        if ":" in spec:
            a, b, step = (Fraction(s) for s in spec.split(":"))
            if step <= 0:
                raise InputError("grid step must be positive")
            out, k = [], 0
            while a + k * step <= b:
                out.append(a + k * step)
                k += 1
            return out
        return [Fraction(s) for s in spec.split(",") if s.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad grid {spec!r}") from exc


def gamma_curve_rows(sys_: IngredientSystem, pt, grid: Sequence[Fraction]) -> list[dict]:
    """gamma bounds from each of M/r, M'/2, M''r/2 alone, and combined, per radius."""
    if not grid:
        return []
    x = sys_.check_point(pt)
    mu = mu_upper(sys_, x)
    base = _poly_degree_term(sys_, x)
    _, up, _ = rounding_contexts()
    rows = []
    for r in grid:
        try:
            bounds = [ingredient_C(row.func, x[row.input_index], r) for row in sys_.ingredients]
        except (DFiniteError, OracleError) as exc:
            rows.append({"r": str(r), "gamma0": None, "gamma1": None, "gamma2": None,
                         "gamma": None, "error": f"{type(exc).__name__}: {exc}"})
            continue
        comps = []
        for k in range(3):
            total = base
            for b in bounds:
                total = up.add(total, b.components()[k])
            comps.append(up.mul(mu, total))
        total = base
        for b in bounds:
            total = up.add(total, b.C)
        rows.append({"r": str(r), "gamma0": num(comps[0]), "gamma1": num(comps[1]),
                     "gamma2": num(comps[2]), "gamma": num(up.mul(mu, total)), "error": None})
    return rows


def run_gamma_curve(source: str, point: str | None = None, grid: str = "0.1:1.9:0.05",
                    precision: int | None = None, mode: str | None = None) -> Report:
    start = time.perf_counter()
    sf = load_system(source)
    sys_ = _with_mode(sf, mode)
    pt = _resolve_point(sf, point)
    precision = precision or default_precision()
    radii = parse_grid(grid)
    config = {"precision": precision, "mode": sys_.mode, "point": pt, "grid": grid,
              "radius_rule": "same r for every ingredient"}
    with working_precision(precision):
        rows = gamma_curve_rows(sys_, pt, radii)
    return Report("gamma-curve", sf.name, _system_digest(sf, config), config, rows, "complete",
                  time.perf_counter() - start)


# text rendering -----------------------------------------------------------------

def _short(x) -> str:
    if x is None:
        return "-"
    try:
        v = float(x)
    except ValueError:
        return str(x)
    if math.isinf(v):
        return "inf"
    return f"{v:.6g}"


def render_text(report: Report) -> str:
    lines = [f"{report.command}: {report.system}"]
    if report.command == "certify":
        res = report.results[0]
        lines.append(f"method: {res['method']}  verdict: {res['verdict']}")
        if res["method"] == "alpha":
            lines.append(f"beta <= {_short(res['beta_upper'])}  mu <= {_short(res['mu_upper'])}  "
                         f"gamma <= {_short(res['gamma_upper'])}  alpha <= {_short(res['alpha_upper'])}")
            for k, ing in enumerate(res["ingredients"]):
                lines.append(f"  ingredient {k}: r={_short(ing['r'])} R={_short(ing['R'])} "
                             f"M={_short(ing['M'])} M'={_short(ing['M1'])} M''={_short(ing['M2'])} "
                             f"C={_short(ing['C'])}")
            if res["uniqueness_radius"]:
                lines.append(f"unique root within {_short(res['uniqueness_radius'])}")
        else:
            lines.append(f"contraction <= {_short(res['contraction'])}"
                         + (f"  reason: {res['failure_reason']}" if res["failure_reason"] else ""))
        if res.get("message"):
            lines.append(f"note: {res['message']}")
    elif report.command == "sweep-digits":
        ds = [str(r["d"]) for r in report.results]
        lines.append("d         " + "".join(f"{d:>6}" for d in ds))
        for method in report.config["methods"]:
            vals = [r[method]["verdict"] for r in report.results]
            lines.append(f"{method:<10}" + "".join(f"{v:>6}" for v in vals))
        lines.append(f"rounding: {report.config['rounding']}")
    elif report.command == "radius-sweep":
        lines.append(f"R = {report.config['R']}")
        lines.append(f"{'radius':>10} {'gamma':>14} {'alpha':>14}  passes")
        for r in report.results:
            lines.append(f"{r['multiplier'] + ' R':>10} {_short(r['gamma_upper']):>14} "
                         f"{_short(r['alpha_upper']):>14}  "
                         + ("yes" if r["passes"] else ("no" if r["status"] == "fail" else r["status"])))
    elif report.command == "gamma-curve":
        return render_tsv(report)
    return "\n".join(lines) + "\n"


def render_tsv(report: Report) -> str:
    if not report.results:
        return ""
    out = ["r\tgamma0\tgamma1\tgamma2\tgamma"]
    for r in report.results:
        out.append("\t".join(_short(r[k]) if r[k] is not None else "nan"
                             for k in ("r", "gamma0", "gamma1", "gamma2", "gamma")))
    return "\n".join(out) + "\n"


# argument parsing -----------------------------------------------------------------

def _digit_range(spec: str) -> list[int]:
    try:
        if "-" in spec:
            a, b = spec.split("-")
            return list(range(int(a), int(b) + 1))
        return [int(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad digit range {spec!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfcert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json", "text")):
        p.add_argument("system", help="system file path or bundled name "
                                      "(erf, bessel-erf, exponential, elliptic)")
        p.add_argument("--point", help="comma-separated coordinates or a named point in the file")
        p.add_argument("--precision", type=int, help=f"working precision in bits "
                                                     f"(default ${PRECISION_ENV} or {DEFAULT_PRECISION})")
        p.add_argument("--mode", choices=("real", "complex"), help="override the file's mode")
        p.add_argument("--format", choices=fmt, default=fmt[1] if len(fmt) > 1 else fmt[0])
        p.add_argument("--output", help="write the report here instead of stdout")

    p = sub.add_parser("certify", help="run one alpha or Krawczyk test")
    common(p)
    p.add_argument("--method", choices=("alpha", "krawczyk"), default="alpha")
    p.add_argument("--radius", default="auto", help="Cauchy radius (one value, one per ingredient, or auto)")
    p.add_argument("--box-side", help="side length of the Krawczyk box around the point")

    p = sub.add_parser("sweep-digits", help="round the point to d decimals and run both tests")
    common(p)
    p.add_argument("--digits", default="0-3", help="range a-b or list")
    p.add_argument("--methods", default="krawczyk,alpha")
    p.add_argument("--radius", default="0.4")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("radius-sweep", help="alpha test over radii given as multiples of R")
    common(p)
    p.add_argument("--R", dest="R", help="reference radius (default: file value, else computed)")
    p.add_argument("--multipliers", default=",".join(DEFAULT_MULTIPLIERS))
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gamma-curve", help="gamma bound components over a radius grid")
    common(p, fmt=("tsv", "json"))
    p.add_argument("--grid", default="0.1:1.9:0.05", help="a:b:step or comma list")
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.precision is not None and args.precision < 24:
            raise InputError("precision must be at least 24 bits")
        if args.command == "certify":
            report = run_certify(args.system, args.point, args.method, args.precision, args.radius,
                                 args.box_side, args.mode)
        elif args.command == "sweep-digits":
            report = run_sweep_digits(args.system, args.point, _digit_range(args.digits),
                                      [m.strip() for m in args.methods.split(",") if m.strip()],
                                      args.radius, args.precision, args.mode, args.jobs)
        elif args.command == "radius-sweep":
            mults = [m.strip() for m in args.multipliers.split(",") if m.strip()]
            for m in mults:
                try:
                    Fraction(m)
                except ValueError as exc:
                    raise InputError(f"bad multiplier {m!r}") from exc
            report = run_radius_sweep(args.system, args.point, mults, args.R, args.precision,
                                      args.mode, args.jobs)
        else:
            report = run_gamma_curve(args.system, args.point, args.grid, args.precision, args.mode)
    except (ParseError, InputError, SystemError_, FileNotFoundError, DFiniteError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        _emit(report.to_json() + "\n", args.output)
    elif args.format == "tsv":
        _emit(render_tsv(report), args.output)
    else:
        _emit(render_text(report), args.output)
    if args.command == "certify":
        return 0 if report.verdict == "pass" else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
