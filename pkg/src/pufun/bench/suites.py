"""Benchmark suites: build, time and measure the registered test functions."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, fields
from typing import Callable, List, Optional

import numpy as np

from ..box import Box
from ..errors import ConstructionLimitError, InvalidArgumentError, PUFunError
from ..extension import build_extension, get_domain
from ..algebra import apply_binary
from ..tree import BuildParams, PUFun, build
from . import functions as F

logger = logging.getLogger(__name__)

SUITES = ("table1", "table2", "table3", "rotate2d", "rotate3d", "arith")

SUITE_DEFAULTS = {
    "table1": {"N": 129, "tol": 1e-16, "grid": 200},
    "table2": {"N": 65, "tol": 1e-16, "grid": 50},
    "table3": {"N": 17, "tol": 1e-10, "grid": 200},
    "rotate2d": {"N": 129, "tol": 1e-16, "grid": 200},
    "rotate3d": {"N": 65, "tol": 1e-16, "grid": 50},
    "arith": {"N": 129, "tol": 1e-16, "grid": 200},
}

ROTATE2D_ANGLES = 33
ROTATE3D_ANGLES = 3
ARITH_ANGLES = 5


@dataclass
class RunReport:
    function: str
    suite: str
    N: int
    t: float
    tol: float
    grid: int
    build_time_s: float
    eval_time_s: float
    max_error: float
    abs_error: float
    stored_points: int
    leaf_count: int
    tree_depth: int
    status: str = "ok"
    ref_error: Optional[float] = None
    ref_points: Optional[int] = None
    note: str = ""

    @classmethod
    def columns(cls) -> list:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def uniform_axes(box: Box, M: int) -> list:
    return [np.linspace(a, b, M) for a, b in zip(box.lo, box.hi)]


def measure_error(fun: PUFun, f: Callable, axes) -> tuple:
    """``(relative, absolute, eval_seconds)`` max error on a grid.

    The relative error divides by ``max |f|`` over the same grid. NaN
    entries of the approximant (points outside a region) are skipped.
    """
    t0 = time.perf_counter()
    approx = fun.eval_grid(axes)
    elapsed = time.perf_counter() - t0
    exact = np.asarray(f(*np.meshgrid(*axes, indexing="ij")), dtype=float)
    exact = np.broadcast_to(exact, approx.shape)
    live = ~np.isnan(approx)
    err = float(np.max(np.abs(approx[live] - exact[live])))
    scale = float(np.max(np.abs(exact[live])))
    rel = err / scale if scale > 0 else err
    return rel, err, elapsed


def _warm_up() -> None:
    build(lambda x, y: np.exp(x * y), Box.cube(2), BuildParams(N=17, tol=1e-12))


def run_function(fn: F.TestFunction, suite: str, params: BuildParams, grid: int,
                 oversample: Optional[int] = None) -> RunReport:
    """Build one function, then time grid evaluation and measure the error."""
    base = dict(function=fn.name, suite=suite, N=params.N, t=params.t, tol=params.tol, grid=grid,
                ref_error=fn.ref_error, ref_points=fn.ref_points)
    t0 = time.perf_counter()
    try:
        if fn.region is not None:
            kw = {} if oversample is None else {"oversample": oversample}
            fun = build_extension(fn.formula, get_domain(fn.region), params, **kw)
        else:
            fun = build(fn.formula, fn.omega, params)
    except ConstructionLimitError as exc:
        logger.warning("%s: %s", fn.name, exc)
        return RunReport(**base, build_time_s=time.perf_counter() - t0, eval_time_s=math.nan,
                         max_error=math.nan, abs_error=math.nan, stored_points=0,
                         leaf_count=exc.leaves or 0, tree_depth=exc.depth or 0, status="limit",
                         note=str(exc))
    except PUFunError as exc:
        logger.warning("%s: %s", fn.name, exc)
        return RunReport(**base, build_time_s=time.perf_counter() - t0, eval_time_s=math.nan,
                         max_error=math.nan, abs_error=math.nan, stored_points=0, leaf_count=0,
                         tree_depth=0, status="error", note=str(exc))
    build_time = time.perf_counter() - t0
    box = get_domain(fn.region).bbox if fn.region is not None else fn.omega
    rel, err, eval_time = measure_error(fun, fn.formula, uniform_axes(box, grid))
    note = "informational" if fn.informational else ""
    return RunReport(**base, build_time_s=build_time, eval_time_s=eval_time, max_error=rel,
                     abs_error=err, stored_points=fun.stored_points, leaf_count=fun.leaf_count,
                     tree_depth=fun.depth, note=note)


def suite_functions(suite: str, include_g3: bool = False) -> List[F.TestFunction]:
    if suite == "table1":
        return [F.get_function(n) for n in F.TABLE1]
    if suite == "table2":
        return [F.get_function(n) for n in F.TABLE2]
    if suite == "table3":
        return [F.get_function(n) for n in F.TABLE3 if include_g3 or not n.startswith("g3")]
    if suite == "rotate2d":
        return [F.get_function(f"plane2d:{t!r}") for t in rotate2d_angles()]
    if suite == "rotate3d":
        ang = np.linspace(0.0, math.pi / 4, ROTATE3D_ANGLES)
        return [F.get_function(f"plane3d:{p!r},{t!r}") for p in ang for t in ang]
    raise _unknown_suite(suite)


def _unknown_suite(suite: str) -> InvalidArgumentError:
    return InvalidArgumentError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def rotate2d_angles() -> list:
    return [float(t) for t in np.linspace(0.0, math.pi / 4, ROTATE2D_ANGLES)]


def resolve_params(suite: str, N: Optional[int] = None, tol: Optional[float] = None,
                   t: Optional[float] = None, max_depth: Optional[int] = None,
                   max_leaves: Optional[int] = None) -> BuildParams:
    if suite not in SUITE_DEFAULTS:
        raise _unknown_suite(suite)
    base = SUITE_DEFAULTS[suite]
    kw = {"N": base["N"] if N is None else N, "tol": base["tol"] if tol is None else tol}
    for key, val in (("t", t), ("max_depth", max_depth), ("max_leaves", max_leaves)):
        if val is not None:
            kw[key] = val
    return BuildParams(**kw)


def run_arith(params: BuildParams, grid: int, angles=None) -> List[RunReport]:
    """Add and multiply ``arctan(250x)`` with the rotated plane wave."""
    angles = np.linspace(0.0, math.pi / 4, ARITH_ANGLES) if angles is None else angles
    f1 = F.plane_wave_2d(0.0)
    s1 = build(f1, F.SQ2, params)
    axes = uniform_axes(F.SQ2, grid)
    out = []
    for t in angles:
        f2 = F.plane_wave_2d(float(t))
        s2 = build(f2, F.SQ2, params)
        for op, fn in (("add", np.add), ("mul", np.multiply)):
            name = f"arctan(250x) {op} plane2d:{float(t):.6g}"
            base = dict(function=name, suite="arith", N=params.N, t=params.t, tol=params.tol,
                        grid=grid)
            t0 = time.perf_counter()
            try:
                res = apply_binary(op, s1, s2, params)
            except ConstructionLimitError as exc:
                out.append(RunReport(**base, build_time_s=time.perf_counter() - t0,
                                     eval_time_s=math.nan, max_error=math.nan, abs_error=math.nan,
                                     stored_points=0, leaf_count=exc.leaves or 0,
                                     tree_depth=exc.depth or 0, status="limit", note=str(exc)))
                continue
            elapsed = time.perf_counter() - t0
            exact = lambda x, y, fn=fn, f2=f2: fn(f1(x, y), f2(x, y))
            rel, err, ev = measure_error(res, exact, axes)
            out.append(RunReport(**base, build_time_s=elapsed, eval_time_s=ev, max_error=rel,
                                 abs_error=err, stored_points=res.stored_points,
                                 leaf_count=res.leaf_count, tree_depth=res.depth))
    return out


def run_suite(suite: str, N: Optional[int] = None, tol: Optional[float] = None,
              t: Optional[float] = None, grid: Optional[int] = None, include_g3: bool = False,
              only: Optional[List[str]] = None, warm_up: bool = True,
              progress: Optional[Callable[[RunReport], None]] = None,
              max_depth: Optional[int] = None, max_leaves: Optional[int] = None) -> List[RunReport]:
    """Run every function of ``suite`` sequentially; failures are recorded per row."""
    params = resolve_params(suite, N, tol, t, max_depth, max_leaves)
    grid = SUITE_DEFAULTS[suite]["grid"] if grid is None else grid
    if warm_up:
        _warm_up()
    if suite == "arith":
        reports = run_arith(params, grid)
        if progress:
            for r in reports:
                progress(r)
        return reports
    reports = []
    for fn in suite_functions(suite, include_g3):
        if only and fn.name not in only:
            continue
        rep = run_function(fn, suite, params, grid)
        reports.append(rep)
        if progress:
            progress(rep)
    return reports


def time_ratio(reports: List[RunReport]) -> float:
    """Largest over smallest build time among successful rows."""
    times = [r.build_time_s for r in reports if r.status == "ok"]
    return max(times) / min(times) if times else math.nan
