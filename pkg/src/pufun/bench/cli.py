"""``pubench`` command line: run suites, export zones and fields, check operations.

Exit codes: 0 success, 2 invalid input, 3 construction limit reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..algebra import apply_binary, op_name
from ..errors import ConstructionLimitError, DivisionSingularityError, PUFunError
from ..extension import build_extension, get_domain
from ..tree import BuildParams, PUFun, build
from . import functions as F
from .suites import SUITES, RunReport, run_suite, time_ratio, uniform_axes

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_LIMIT = 3

OUT_DIR_ENV = "PUBENCH_OUT_DIR"

logger = logging.getLogger("pubench")


def fmt(v) -> str:
    """Text for one CSV cell; floats keep 17 significant digits."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def resolve_out(path: Optional[str], default_name: str) -> Path:
    """Output path; relative paths land in ``$PUBENCH_OUT_DIR`` when it is set."""
    base = os.environ.get(OUT_DIR_ENV)
    p = Path(path) if path else Path(default_name)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def write_reports(reports: List[RunReport], path: Path) -> None:
    if path.suffix.lower() == ".json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([r.as_dict() for r in reports], fh, indent=2, default=_json_default)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RunReport.columns())
        for r in reports:
            w.writerow([fmt(v) for v in r.as_dict().values()])


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(type(v))


def export_zones(fun: PUFun, path) -> int:
    """One CSV row per leaf: id, zone bounds, then domain bounds. Returns the row count."""
    d = fun.d
    head = ["leaf_id"]
    head += [f"zone_{s}{j}" for j in range(d) for s in ("lo", "hi")]
    head += [f"domain_{s}{j}" for j in range(d) for s in ("lo", "hi")]
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for k, lf in enumerate(fun.leaves()):
            if lf.payload is None:
                continue
            row = [k]
            for box in (lf.zone, lf.domain):
                for lo, hi in zip(box.lo, box.hi):
                    row += [fmt(lo), fmt(hi)]
            w.writerow(row)
            rows += 1
    return rows


def read_zones(path) -> list:
    """Parse an exported zone file into ``(zone_lo, zone_hi, dom_lo, dom_hi)`` tuples."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    d = (len(rows[0]) - 1) // 4
    out = []
    for r in rows[1:]:
        v = [float(x) for x in r[1:]]
        z, dm = v[:2 * d], v[2 * d:]
        out.append((tuple(z[0::2]), tuple(z[1::2]), tuple(dm[0::2]), tuple(dm[1::2])))
    return out


def export_field(fun: PUFun, axes: Sequence[np.ndarray], path) -> np.ndarray:
    """Write grid values in long form: one column per coordinate, then the value."""
    vals = fun.eval_grid(axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(fun.d)] + ["value"])
        for idx in np.ndindex(vals.shape):
            w.writerow([fmt(m[idx]) for m in mesh] + [fmt(vals[idx])])
    return vals


def read_field(path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    return data[:, :-1], data[:, -1]


def _params(args, fn: F.TestFunction) -> BuildParams:
    if fn.region is not None:
        defaults = {"N": 17, "tol": 1e-10}
    else:
        defaults = {"N": 129 if fn.d <= 2 else 65, "tol": 1e-16}
    kw = {"N": args.n if args.n is not None else defaults["N"],
          "tol": args.tol if args.tol is not None else defaults["tol"]}
    for key in ("t", "max_depth", "max_leaves"):
        if getattr(args, key) is not None:
            kw[key] = getattr(args, key)
    return BuildParams(**kw)


def _build(fn: F.TestFunction, params: BuildParams) -> PUFun:
    if fn.region is not None:
        return build_extension(fn.formula, get_domain(fn.region), params)
    return build(fn.formula, fn.omega, params)


def _box(fn: F.TestFunction):
    return get_domain(fn.region).bbox if fn.region is not None else fn.omega


def _print_report(r: RunReport) -> None:
    ref = ""
    if r.ref_error is not None:
        ref = f"  ref_err={r.ref_error:.3g} ref_pts={r.ref_points}"
    print(f"{r.function:32s} {r.status:6s} err={r.max_error:.3e} pts={r.stored_points:9d} "
          f"leaves={r.leaf_count:6d} build={r.build_time_s:8.3f}s eval={r.eval_time_s:7.3f}s{ref}",
          flush=True)


def cmd_run(args) -> int:
    reports = run_suite(args.suite, N=args.n, tol=args.tol, t=args.t, grid=args.grid,
                        include_g3=args.include_g3, only=args.only, progress=_print_report,
                        max_depth=args.max_depth, max_leaves=args.max_leaves)
    out = resolve_out(args.out, f"{args.suite}.csv")
    write_reports(reports, out)
    print(f"wrote {out}")
    if args.suite in ("rotate2d", "rotate3d", "arith"):
        print(f"build time max/min ratio: {time_ratio(reports):.3g}")
    if args.plot:
        from . import plotting
        fig = plotting.plot_reports(reports, out.with_suffix(".png"))
        print(f"wrote {fig}")
    return EXIT_LIMIT if any(r.status == "limit" for r in reports) else EXIT_OK


def cmd_zones(args) -> int:
    fn = F.get_function(args.function)
    fun = _build(fn, _params(args, fn))
    out = resolve_out(args.out, f"{fn.name}-zones.csv")
    rows = export_zones(fun, out)
    print(f"wrote {rows} leaves to {out}")
    if args.plot:
        from . import plotting
        print(f"wrote {plotting.plot_zones(fun, out.with_suffix('.png'))}")
    return EXIT_OK


def cmd_field(args) -> int:
    fn = F.get_function(args.function)
    fun = _build(fn, _params(args, fn))
    axes = uniform_axes(_box(fn), args.grid)
    out = resolve_out(args.out, f"{fn.name}-field.csv")
    export_field(fun, axes, out)
    print(f"wrote {out}")
    if args.plot:
        from . import plotting
        print(f"wrote {plotting.plot_field(fun, axes, out.with_suffix('.png'))}")
    return EXIT_OK


def cmd_integrate(args) -> int:
    fn = F.get_function(args.function)
    if fn.region is not None:
        raise PUFunError("integration is only available on boxes")
    fun = _build(fn, _params(args, fn))
    value = fun.integrate()
    print(f"integral {value!r}")
    if fn.analytic_integral is not None:
        exact = fn.analytic_integral
        print(f"exact {exact!r}")
        print(f"relative error {abs(value - exact) / abs(exact):.3e}")
    return EXIT_OK


def cmd_diff(args) -> int:
    fn = F.get_function(args.function)
    if fn.region is not None:
        raise PUFunError("differentiation is only available on boxes")
    j = args.dim - 1
    if not 0 <= j < fn.d:
        raise PUFunError(f"--dim must lie in 1..{fn.d}")
    fun = _build(fn, _params(args, fn))
    der = fun.diff(j)
    print(f"derivative in dimension {args.dim}: {der!r}")
    if args.check:
        rng = np.random.default_rng(args.seed)
        box = fn.omega
        h = args.step
        lo = np.asarray(box.lo) + 2 * h
        hi = np.asarray(box.hi) - 2 * h
        X = lo + (hi - lo) * rng.random((args.points, fn.d))
        e = np.zeros(fn.d)
        e[j] = h
        fd = (fn.formula(*(X + e).T) - fn.formula(*(X - e).T)) / (2 * h)
        approx = der(X)
        disc = float(np.max(np.abs(approx - fd)) / np.max(np.abs(fd)))
        print(f"max finite-difference discrepancy {disc:.3e} (relative, {args.points} points)")
    return EXIT_OK


def cmd_arith(args) -> int:
    fa, fb = F.get_function(args.f1), F.get_function(args.f2)
    if fa.region is not None or fb.region is not None or fa.omega != fb.omega:
        raise PUFunError("operands must live on the same box")
    op = op_name(args.op)
    params = _params(args, fa)
    t0 = time.perf_counter()
    s1, s2 = build(fa.formula, fa.omega, params), build(fb.formula, fb.omega, params)
    t1 = time.perf_counter()
    res = apply_binary(op, s1, s2, params)
    t2 = time.perf_counter()
    ufunc = {"add": np.add, "sub": np.subtract, "mul": np.multiply, "div": np.divide}[op]
    axes = uniform_axes(fa.omega, args.grid)
    mesh = np.meshgrid(*axes, indexing="ij")
    exact = ufunc(fa.formula(*mesh), fb.formula(*mesh))
    err = float(np.max(np.abs(res.eval_grid(axes) - exact)) / np.max(np.abs(exact)))
    print(f"operands built in {t1 - t0:.3f}s, {op} in {t2 - t1:.3f}s")
    print(f"result {res!r}")
    print(f"max relative error on {args.grid}^{fa.d} grid {err:.3e}")
    return EXIT_OK


def cmd_list(args) -> int:
    for name in F.names():
        print(name)
    print("plane2d:<angle>")
    print("plane3d:<p>,<t>")
    return EXIT_OK


def _add_build_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="samples per dimension on each leaf")
    p.add_argument("--tol", type=float, help="chopping tolerance")
    p.add_argument("--t", type=float, help="overlap parameter (> 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, help="refinement depth limit")
    p.add_argument("--max-leaves", type=int, help="leaf count limit")
    p.add_argument("--plot", action="store_true", help="also render a PNG (needs matplotlib)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pubench", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark suite")
    p.add_argument("suite", choices=SUITES)
    _add_build_opts(p)
    p.add_argument("--out", help="report path (.csv or .json)")
    p.add_argument("--grid", type=int, help="error grid points per dimension")
    p.add_argument("--only", nargs="+", help="restrict to these function names")
    p.add_argument("--include-g3", action="store_true", help="include the slow g3 rows")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("zones", help="export leaf zones and domains as CSV")
    p.add_argument("function")
    _add_build_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_zones)

    p = sub.add_parser("field", help="export grid values as CSV")
    p.add_argument("function")
    _add_build_opts(p)
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("integrate", help="integrate over the box")
    p.add_argument("function")
    _add_build_opts(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("diff", help="differentiate in one dimension")
    p.add_argument("function")
    _add_build_opts(p)
    p.add_argument("--dim", type=int, required=True, help="dimension, counted from 1")
    p.add_argument("--check", action="store_true", help="compare with centered differences")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--step", type=float, default=1e-6)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("arith", help="combine two functions with + - * /")
    p.add_argument("f1")
    p.add_argument("op", choices=["add", "sub", "mul", "div", "+", "-", "*", "/"])
    p.add_argument("f2")
    _add_build_opts(p)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(func=cmd_arith)

    p = sub.add_parser("list", help="list registered functions")
    p.set_defaults(func=cmd_list)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConstructionLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (PUFunError, ValueError, DivisionSingularityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
