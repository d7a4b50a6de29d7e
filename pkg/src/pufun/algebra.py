"""Arithmetic on approximants by tree merging and re-refinement."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional

import numpy as np

from .box import Box
from .errors import DivisionSingularityError, InvalidArgumentError, MergePreconditionError
from .evaluate import eval_grid
from .tree import (
    BuildParams,
    ConstructionLimitError,
    GridSampler,
    PUFun,
    TreeNode,
    _BuildState,
    build,
    finalize,
    iter_leaves,
    new_root,
    refine,
    split,
)

logger = logging.getLogger(__name__)

BINARY_OPS = {"add": np.add, "sub": np.subtract, "mul": np.multiply, "div": np.divide}
_ALIASES = {"+": "add", "-": "sub", "*": "mul", "/": "div"}

# relative slack when comparing zone endpoints
ZONE_RTOL = 1e-12


def op_name(op: str) -> str:
    name = _ALIASES.get(op, op)
    if name not in BINARY_OPS:
        raise InvalidArgumentError(f"unknown operation {op!r}")
    return name


def check_zone_match(operand: TreeNode, target: TreeNode) -> None:
    """Raise unless ``operand`` and ``target`` zones agree in every unfinished dimension."""
    for j, done in enumerate(operand.isdone):
        if done:
            continue
        w = target.zone.hi[j] - target.zone.lo[j]
        if (abs(operand.zone.lo[j] - target.zone.lo[j]) > ZONE_RTOL * w
                or abs(operand.zone.hi[j] - target.zone.hi[j]) > ZONE_RTOL * w):
            raise MergePreconditionError(
                f"zone mismatch in unfinished dimension {j}: operand "
                f"[{operand.zone.lo[j]}, {operand.zone.hi[j]}] vs merged "
                f"[{target.zone.lo[j]}, {target.zone.hi[j]}]")


def merge(op: str, n1: TreeNode, n2: TreeNode, target: TreeNode, r: int, omega: Box,
          params: BuildParams, sample: Optional[Callable] = None,
          state: Optional[_BuildState] = None, trace: Optional[dict] = None) -> None:
    """Grow ``target`` into the common refinement of the trees at ``n1`` and ``n2``.

    ``r`` is the dimension most recently split in the merged tree (0-based,
    ``-1`` before any split). When ``sample`` is given, merged leaves get
    ``op``-combined samples on their full grid for the follow-up refinement.
    """
    op = op_name(op)
    check_zone_match(n1, target)
    check_zone_match(n2, target)
    if trace is not None:
        trace["calls"] = trace.get("calls", 0) + 1
    d = target.zone.d
    target.isdone = [a and b for a, b in zip(n1.isdone, n2.isdone)]

    if n1.is_leaf and n2.is_leaf:
        if sample is not None:
            target.pending = sample(target.grid(params.N))
        return

    if n1.is_leaf or n2.is_leaf or n1.splitdim == n2.splitdim:
        j = n2.splitdim if n1.is_leaf else n1.splitdim
        split(target, j, params.t, omega, state)
        for k in (0, 1):
            a = n1 if n1.is_leaf else n1.children[k]
            b = n2 if n2.is_leaf else n2.children[k]
            merge(op, a, b, target.children[k], j, omega, params, sample, state, trace)
        return

    # different split dimensions: advance the one that comes first after r
    r1 = (n1.splitdim - r - 1) % d
    r2 = (n2.splitdim - r - 1) % d
    first = 1 if r1 <= r2 else 2
    j = n1.splitdim if first == 1 else n2.splitdim
    split(target, j, params.t, omega, state)
    for k in (0, 1):
        a = n1.children[k] if first == 1 else n1
        b = n2 if first == 1 else n2.children[k]
        merge(op, a, b, target.children[k], j, omega, params, sample, state, trace)


def sync_done_flags(root: TreeNode) -> None:
    """Clear flags on internal nodes for dimensions split somewhere below them."""

    def walk(node: TreeNode) -> set:
        if node.is_leaf:
            return set()
        below = {node.splitdim}
        for child in node.children:
            below |= walk(child)
        for j in below:
            node.isdone[j] = False
        return below

    walk(root)


def _combined_sampler(op: str, f1: PUFun, f2: PUFun, tol: float) -> GridSampler:
    fn = BINARY_OPS[op]
    guard = math.sqrt(tol)

    def sample(axes):
        a = eval_grid(f1, axes)
        b = eval_grid(f2, axes)
        if op == "div":
            small = np.abs(b) < guard
            if np.any(small):
                idx = tuple(np.argwhere(small)[0])
                loc = tuple(float(axes[k][i]) for k, i in enumerate(idx))
                raise DivisionSingularityError(
                    f"denominator {b[idx]:.3g} below {guard:.3g} at {loc}", location=loc)
        return fn(a, b)

    return GridSampler(sample, on_grid=True)


def apply_binary(op: str, f1: PUFun, f2: PUFun, params: Optional[BuildParams] = None,
                 trace: Optional[dict] = None) -> PUFun:
    """Approximate ``f1 op f2`` by merging the two trees and refining the result.

    Merged leaves are sampled from the operands' blended values and then
    refined as in a normal build, so products and quotients can split
    further. If the operand trees cannot be merged zone-consistently (which
    can happen for results of earlier arithmetic), the result is built by
    sampling from scratch.
    """
    op = op_name(op)
    if f1.omega != f2.omega:
        raise InvalidArgumentError(f"operands live on different boxes: {f1.omega!r} vs {f2.omega!r}")
    if params is None:
        params = f1.params if f1.params == f2.params else BuildParams(
            N=max(f1.params.N, f2.params.N), t=f1.params.t, tol=min(f1.params.tol, f2.params.tol),
            max_depth=max(f1.params.max_depth, f2.params.max_depth),
            max_leaves=max(f1.params.max_leaves, f2.params.max_leaves))
    omega = f1.omega
    sampler = _combined_sampler(op, f1, f2, params.tol)
    root = new_root(omega)
    state = _BuildState(params, root)
    try:
        merge(op, f1.root, f2.root, root, -1, omega, params, sampler, state, trace)
    except MergePreconditionError as exc:
        logger.info("tree merge not possible (%s); rebuilding by sampling", exc)
        if trace is not None:
            trace["fallback"] = str(exc)
        return build(sampler, omega, params)
    for lf in iter_leaves(root):
        lf.isdone = [False] * omega.d
    state.leaves = sum(1 for _ in iter_leaves(root))
    try:
        refine(root, sampler, params, omega, state)
    except ConstructionLimitError as exc:
        finalize(root)
        exc.partial = PUFun(root, params, omega)
        raise
    finalize(root)
    sync_done_flags(root)
    return PUFun(root, params, omega)


def apply_unary_sample(fun: PUFun, g: Callable, params: Optional[BuildParams] = None) -> PUFun:
    """Rebuild ``g(fun)`` from samples of the blended approximant."""
    sampler = GridSampler(lambda axes: g(eval_grid(fun, axes)), on_grid=True)
    return build(sampler, fun.omega, params if params is not None else fun.params)


def zones_refine(fine: PUFun, coarse: PUFun, rtol: float = 1e-12) -> bool:
    """True if every leaf zone of ``fine`` sits inside some leaf zone of ``coarse``."""
    for lf in fine.leaves():
        c = lf.zone.center
        node = coarse.root
        while not node.is_leaf:
            # zones of siblings share only a face, so the centre picks one child
            node = next((ch for ch in node.children if ch.zone.contains(c[None, :], 0.0)[0]),
                        node.children[0])
        if not node.zone.contains_box(lf.zone, rtol):
            return False
    return True


__all__ = [
    "BINARY_OPS", "apply_binary", "apply_unary_sample", "check_zone_match", "merge",
    "op_name", "sync_done_flags", "zones_refine",
]
