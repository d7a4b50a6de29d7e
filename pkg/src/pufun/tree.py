"""Adaptive bisection tree: zones, overlapping domains, splitting and refinement."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence

import numpy as np

from .box import Box
from .chebcore import (
    ChebInterpolant,
    chop,
    coeffs_to_values,
    grid_points,
    sum_coeff_magnitudes_except,
    values_to_coeffs,
)
from .errors import ConstructionLimitError, InvalidArgumentError, InvalidDataError

DEFAULT_T = 1.16


@dataclass(frozen=True)
class BuildParams:
    """Construction parameters.

    ``N`` is the number of Chebyshev samples per dimension on every leaf
    before chopping, ``t`` the overlap factor and ``tol`` the chopping
    tolerance.
    """

    N: int = 129
    t: float = DEFAULT_T
    tol: float = 1e-16
    max_depth: int = 30
    max_leaves: int = 2**20

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 17:
            raise InvalidArgumentError(f"N must be an integer >= 17, got {self.N}")
        if not self.t > 1.0:
            raise InvalidArgumentError(f"overlap parameter t must exceed 1, got {self.t}")
        if not 0.0 < self.tol < 1.0:
            raise InvalidArgumentError(f"tol must lie in (0, 1), got {self.tol}")
        if self.max_depth < 1 or self.max_leaves < 1:
            raise InvalidArgumentError("refinement limits must be positive")

    @classmethod
    def for_dimension(cls, d: int, **overrides) -> "BuildParams":
        """Defaults used in the experiments: N=129 in 2D, N=65 in 3D."""
        n = 129 if d <= 2 else 65
        return cls(**{"N": n, **overrides})


@dataclass(eq=False)
class LeafPayload:
    """Samples on a (possibly truncated) tensor grid and their interpolant."""

    values: np.ndarray
    interpolant: ChebInterpolant

    @property
    def degrees(self) -> tuple:
        return self.interpolant.degrees

    @property
    def grid(self) -> list:
        box = self.interpolant.box
        return [grid_points(n, a, b) for n, a, b in zip(self.values.shape, box.lo, box.hi)]

    @property
    def stored_points(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_coeffs(cls, coeffs, box: Box) -> "LeafPayload":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs_to_values(coeffs), ChebInterpolant(coeffs, box))


@dataclass(eq=False)
class TreeNode:
    zone: Box
    domain: Box
    isdone: List[bool]
    splitdim: Optional[int] = None
    children: Optional[tuple] = None
    payload: Optional[LeafPayload] = None
    depth: int = 0
    # leaf lies outside a nonrectangular domain and carries no approximation
    empty: bool = False
    # full-grid samples supplied ahead of refinement (tree merging)
    pending: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def grid(self, N: int) -> list:
        return [grid_points(N, a, b) for a, b in zip(self.domain.lo, self.domain.hi)]


def extend_zone(zone: Box, omega: Box, t: float) -> Box:
    """Grow ``zone`` about its midpoint by the factor ``t``, clipped to ``omega``."""
    if not t > 1.0:
        raise InvalidArgumentError(f"overlap parameter t must exceed 1, got {t}")
    lo, hi = [], []
    for (al, be), (a, b) in zip(zip(zone.lo, zone.hi), zip(omega.lo, omega.hi)):
        delta = 0.5 * (be - al) * (1.0 + t)
        lo.append(max(a, be - delta))
        hi.append(min(al + delta, b))
    return Box(tuple(lo), tuple(hi))


class _BuildState:
    def __init__(self, params: BuildParams, root: TreeNode, leaves: int = 1):
        self.params = params
        self.root = root
        self.leaves = leaves
        self.max_depth = 0


def split(node: TreeNode, j: int, t: float, omega: Box, state: Optional[_BuildState] = None,
          zone_hook: Optional[Callable] = None) -> None:
    """Bisect ``node`` in dimension ``j``; internal nodes forward to their children.

    ``zone_hook(child_zone, frozen)`` may replace a child's zone before its
    domain is formed; ``frozen`` is ``(j, side)`` naming the shared face.
    """
    if not node.is_leaf:
        for child in node.children:
            split(child, j, t, omega, state, zone_hook)
        return
    if node.empty:
        return
    if node.isdone[j]:
        raise InvalidArgumentError(f"cannot split dimension {j}: already resolved")
    if state is not None:
        if node.depth + 1 > state.params.max_depth:
            raise ConstructionLimitError(
                f"maximum depth {state.params.max_depth} exceeded",
                partial=state.root, depth=node.depth + 1, leaves=state.leaves)
        if state.leaves + 1 > state.params.max_leaves:
            raise ConstructionLimitError(
                f"maximum leaf count {state.params.max_leaves} exceeded",
                partial=state.root, depth=node.depth + 1, leaves=state.leaves + 1)
        state.leaves += 1
        state.max_depth = max(state.max_depth, node.depth + 1)
    a, b = node.zone.lo[j], node.zone.hi[j]
    m = 0.5 * (a + b)
    kids = []
    for k, (lo, hi) in enumerate(((a, m), (m, b))):
        zone = node.zone.replace(j, lo, hi)
        empty = False
        if zone_hook is not None:
            shrunk = zone_hook(zone, (j, 1 - k))
            if shrunk is None:
                empty = True
            else:
                zone = shrunk
        kids.append(TreeNode(zone=zone, domain=extend_zone(zone, omega, t), isdone=list(node.isdone),
                             depth=node.depth + 1, empty=empty))
    node.splitdim = j
    node.children = tuple(kids)
    node.payload = None
    node.pending = None


class GridSampler:
    """Adapter giving every target a ``sample(axes) -> array`` interface.

    Plain callables are treated as vectorized functions of ``d`` coordinate
    arrays, ``f(x, y)`` or ``f(x, y, z)``.
    """

    def __init__(self, fn: Callable, on_grid: bool = False):
        self.fn = fn
        self.on_grid = on_grid

    def __call__(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        shape = tuple(len(a) for a in axes)
        if self.on_grid:
            v = self.fn(axes)
        else:
            mesh = np.meshgrid(*axes, indexing="ij")
            v = self.fn(*mesh)
        return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()

    def points(self, X: np.ndarray) -> np.ndarray:
        """Sample at scattered ``(P, d)`` points."""
        X = np.atleast_2d(X)
        if self.on_grid:
            return np.array([self.fn([np.array([c]) for c in x]).ravel()[0] for x in X])
        v = self.fn(*X.T)
        return np.broadcast_to(np.asarray(v, dtype=float), (X.shape[0],)).copy()


def as_sampler(f) -> GridSampler:
    return f if isinstance(f, GridSampler) else GridSampler(f)


def _sample(node: TreeNode, sampler: GridSampler, N: int) -> np.ndarray:
    if node.pending is not None and node.pending.shape == (N,) * node.zone.d:
        values, node.pending = node.pending, None
    else:
        node.pending = None
        axes = node.grid(N)
        values = sampler(axes)
        if not np.all(np.isfinite(values)):
            idx = tuple(np.argwhere(~np.isfinite(values))[0])
            loc = tuple(float(axes[k][i]) for k, i in enumerate(idx))
            raise InvalidDataError(f"non-finite sample at {loc}", location=loc)
    return values


def cyclic_order(dims: Sequence[int], last: int, d: int) -> list:
    """``dims`` sorted cyclically starting just after ``last`` (``-1`` = none)."""
    return sorted(dims, key=lambda j: (j - last - 1) % d)


def leaf_step(node: TreeNode, sampler: GridSampler, params: BuildParams, omega: Box,
              state: _BuildState, last: int = -1, zone_hook=None) -> bool:
    """Sample a leaf and either finalize it or split it.

    Returns True when the leaf was split (and now needs refining again).
    """
    N, d = params.N, node.zone.d
    values = _sample(node, sampler, N)
    coeffs = values_to_coeffs(values)
    cutoffs = [chop(sum_coeff_magnitudes_except(coeffs, j), params.tol).cutoff for j in range(d)]
    # mark every resolved dimension before splitting so children inherit it
    todo = []
    for j in range(d):
        if not node.isdone[j]:
            if cutoffs[j] < N:
                node.isdone[j] = True
            else:
                todo.append(j)
    if todo:
        for j in cyclic_order(todo, last, d):
            split(node, j, params.t, omega, state, zone_hook)
        return True
    trunc = coeffs[tuple(slice(0, max(1, min(n, N))) for n in cutoffs)].copy()
    node.payload = LeafPayload.from_coeffs(trunc, node.domain)
    return False


def refine(node: TreeNode, f, params: BuildParams, omega: Optional[Box] = None,
           state: Optional[_BuildState] = None, last: int = -1) -> bool:
    """Adaptively refine the subtree at ``node`` until every leaf is resolved.

    ``last`` is the split dimension of the parent (``-1`` at the root); new
    splits proceed cyclically from it, which for a fresh build is plain
    ascending order.
    """
    sampler = as_sampler(f)
    omega = omega if omega is not None else node.domain
    if state is None:
        state = _BuildState(params, node, leaves=sum(1 for _ in iter_leaves(node)))
    stack = [(node, last)]
    # depth-first, left child first, without Python recursion limits
    while stack:
        nd, lst = stack.pop()
        if nd.is_leaf:
            if nd.empty:
                continue
            if leaf_step(nd, sampler, params, omega, state, lst):
                stack.append((nd, lst))
        else:
            for child in reversed(nd.children):
                stack.append((child, nd.splitdim))
    return True


def finalize(node: TreeNode) -> Box:
    """Set internal domains to the hull of their children's domains."""
    if node.is_leaf:
        return node.domain
    hull = None
    for child in node.children:
        if child.is_leaf and child.empty:
            continue
        dom = finalize(child)
        hull = dom if hull is None else hull.hull(dom)
    if hull is not None:
        node.domain = hull
    else:
        node.empty = True
    return node.domain


def iter_leaves(node: TreeNode) -> Iterator[TreeNode]:
    """Leaves in depth-first, left-child-first order."""
    stack = [node]
    while stack:
        nd = stack.pop()
        if nd.is_leaf:
            yield nd
        else:
            stack.extend(reversed(nd.children))


def iter_nodes(node: TreeNode) -> Iterator[TreeNode]:
    stack = [node]
    while stack:
        nd = stack.pop()
        yield nd
        if not nd.is_leaf:
            stack.extend(reversed(nd.children))


class PUFun:
    """A partition-of-unity approximant on a hyperrectangle.

    Build one with :func:`build` (or :meth:`PUFun.build`), then evaluate
    with ``fun(x)`` or :meth:`eval_grid`, differentiate, integrate and
    combine with ``+ - * /``.
    """

    def __init__(self, root: TreeNode, params: BuildParams, omega: Box):
        self.root = root
        self.params = params
        self.omega = omega

    @property
    def d(self) -> int:
        return self.omega.d

    def leaves(self) -> Iterator[TreeNode]:
        return leaves(self)

    def with_root(self, root: TreeNode) -> "PUFun":
        """Shallow copy sharing everything but the tree."""
        new = copy.copy(self)
        new.root = root
        return new

    @property
    def leaf_count(self) -> int:
        return sum(1 for _ in self.leaves())

    @property
    def stored_points(self) -> int:
        return sum(lf.payload.stored_points for lf in self.leaves() if lf.payload is not None)

    @property
    def depth(self) -> int:
        return max(lf.depth for lf in self.leaves())

    def stats(self) -> dict:
        return {"leaf_count": self.leaf_count, "stored_points": self.stored_points,
                "tree_depth": self.depth}

    def __call__(self, x):
        from .evaluate import evaluate
        return evaluate(self, x)

    def eval_grid(self, axes, counter=None):
        from .evaluate import eval_grid
        return eval_grid(self, axes, counter)

    def diff(self, j: int) -> "PUFun":
        from .evaluate import differentiate
        return differentiate(self, j)

    def integrate(self) -> float:
        from .evaluate import integrate
        return integrate(self)

    def _binary(self, other, op: str, reflected: bool = False):
        from .algebra import apply_binary, apply_unary_sample, BINARY_OPS
        if isinstance(other, PUFun):
            return apply_binary(op, other, self) if reflected else apply_binary(op, self, other)
        c = float(other)
        fn = BINARY_OPS[op]
        g = (lambda v: fn(c, v)) if reflected else (lambda v: fn(v, c))
        return apply_unary_sample(self, g)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", reflected=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", reflected=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", reflected=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", reflected=True)

    def __neg__(self):
        from .algebra import apply_unary_sample
        return apply_unary_sample(self, np.negative)

    def __repr__(self) -> str:
        return (f"PUFun(d={self.d}, omega={self.omega!r}, leaves={self.leaf_count}, "
                f"points={self.stored_points})")


def new_root(omega: Box) -> TreeNode:
    return TreeNode(zone=omega, domain=omega, isdone=[False] * omega.d)


def build(f, omega, params: Optional[BuildParams] = None) -> PUFun:
    """Adaptively approximate ``f`` on the box ``omega``.

    ``f`` is a vectorized function of ``d`` coordinate arrays.

    Raises
    ------
    ConstructionLimitError
        If ``max_depth`` or ``max_leaves`` is exceeded; the partial tree is
        attached to the exception.
    """
    omega = omega if isinstance(omega, Box) else Box.from_intervals(omega)
    params = params if params is not None else BuildParams.for_dimension(omega.d)
    root = new_root(omega)
    state = _BuildState(params, root)
    try:
        refine(root, f, params, omega, state)
    except ConstructionLimitError as exc:
        finalize(root)
        exc.partial = PUFun(root, params, omega)
        raise
    finalize(root)
    return PUFun(root, params, omega)


def leaves(fun) -> Iterator[TreeNode]:
    root = fun.root if isinstance(fun, PUFun) else fun
    return iter_leaves(root)


def copy_topology(node: TreeNode, payload_fn: Callable[[TreeNode], Optional[LeafPayload]]) -> TreeNode:
    """Deep-copy the tree structure, mapping leaf payloads through ``payload_fn``."""
    out = TreeNode(zone=node.zone, domain=node.domain, isdone=list(node.isdone),
                   splitdim=node.splitdim, depth=node.depth, empty=node.empty)
    if node.is_leaf:
        out.payload = payload_fn(node) if node.payload is not None else None
    else:
        out.children = tuple(copy_topology(c, payload_fn) for c in node.children)
    return out
