"""Approximation on nonrectangular domains by least-squares Chebyshev extension.

Leaves whose domain lies inside the region are refined exactly as on a box.
Leaves that straddle the boundary get a tensor Chebyshev polynomial fitted
in the least-squares sense to samples inside the region only. A failing fit
splits the leaf in every dimension, with child zones shrunk towards the
region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from .box import Box
from .chebcore import ChebInterpolant, cheb_vander, coeffs_to_values, grid_points
from .errors import (
    ConstructionLimitError,
    DegenerateLeafError,
    InsufficientSamplesError,
    InvalidArgumentError,
    OutOfDomainError,
)
from .evaluate import eval_grid, evaluate
from .tree import (
    BuildParams,
    PUFun,
    TreeNode,
    _BuildState,
    as_sampler,
    finalize,
    leaf_step,
    new_root,
    split,
)

# sample grid points per dimension, as a multiple of N, used when building
BUILD_OVERSAMPLE = 3
# pivots below this fraction of the largest are treated as zero
PIVOT_RTOL = 1e-14
# per-dimension resolution of the boundary search
SHRINK_SAMPLES = 64
SHRINK_RTOL = 1e-10


@dataclass(frozen=True)
class DomainSpec:
    """A region given by a vectorized membership test and a tight bounding box.

    ``inside`` maps an ``(P, d)`` array to a boolean mask of length ``P``.
    """

    inside: Callable[[np.ndarray], np.ndarray]
    bbox: Box
    name: str = "custom"

    @property
    def d(self) -> int:
        return self.bbox.d

    def contains(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.asarray(self.inside(X), dtype=bool) & self.bbox.contains(X)
        return mask

    @classmethod
    def rectangle(cls, box: Box, name: str = "box") -> "DomainSpec":
        return cls(lambda X: box.contains(X), box, name)


def _disk(X):
    return X[:, 0] ** 2 + X[:, 1] ** 2 <= 1.0


def _diamond(X):
    return np.abs(X[:, 0]) + np.abs(X[:, 1]) <= 1.0


def astroid_predicate(r: float = 1.0, angle: float = math.pi / 4) -> Callable:
    """Union of the astroid ``|x|^(2/3) + |y|^(2/3) <= r`` and its copy rotated by ``angle``."""
    c, s = math.cos(angle), math.sin(angle)

    def lobe(x, y):
        return np.abs(x) ** (2.0 / 3.0) + np.abs(y) ** (2.0 / 3.0) <= r

    def inside(X):
        x, y = X[:, 0], X[:, 1]
        return lobe(x, y) | lobe(c * x + s * y, -s * x + c * y)

    return inside


def astroid(r: float = 1.0, angle: float = math.pi / 4) -> DomainSpec:
    reach = r ** 1.5
    return DomainSpec(astroid_predicate(r, angle), Box.cube(2, -reach, reach), "astroid")


DOMAINS: Dict[str, DomainSpec] = {
    "disk": DomainSpec(_disk, Box.cube(2), "disk"),
    "diamond": DomainSpec(_diamond, Box.cube(2), "diamond"),
    "astroid": astroid(),
}


def get_domain(name: str) -> DomainSpec:
    try:
        return DOMAINS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown domain {name!r}; choose from {sorted(DOMAINS)}") from None


def _tensor_points(axes) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def extension_sample_set(leaf_domain: Box, spec: DomainSpec, N: int,
                         oversample: int = 2) -> np.ndarray:
    """Points of the ``(oversample*N)^d`` Chebyshev grid on ``leaf_domain`` inside the region.

    Raises
    ------
    DegenerateLeafError
        If no grid point lies inside.
    """
    X, mask = _sample_grid(leaf_domain, spec, oversample * N)
    if not np.any(mask):
        raise DegenerateLeafError(f"{leaf_domain!r} contains no sample inside {spec.name}")
    return X[mask]


def _sample_grid(leaf_domain: Box, spec: DomainSpec, n: int):
    axes = [grid_points(n, a, b) for a, b in zip(leaf_domain.lo, leaf_domain.hi)]
    X = _tensor_points(axes)
    return X, spec.contains(X)


def design_matrix(X: np.ndarray, box: Box, N: int) -> np.ndarray:
    """``P x N^d`` matrix of tensor Chebyshev basis values, row-major in the degrees."""
    U = box.to_unit(X)
    A = cheb_vander(U[:, 0], N)
    for j in range(1, box.d):
        Vj = cheb_vander(U[:, j], N)
        A = (A[:, :, None] * Vj[:, None, :]).reshape(X.shape[0], -1)
    return A


def basic_lstsq(A: np.ndarray, b: np.ndarray, rtol: float = PIVOT_RTOL) -> Tuple[np.ndarray, int]:
    """Basic least-squares solution by column-pivoted QR.

    Columns whose pivot falls below ``rtol`` times the largest pivot get a
    zero coefficient. Returns ``(x, rank)``.
    """
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    x = np.zeros(A.shape[1])
    if diag.size == 0 or diag[0] == 0.0:
        return x, 0
    rank = int(np.sum(diag > rtol * diag[0]))
    z = scipy.linalg.solve_triangular(R[:rank, :rank], Q[:, :rank].T @ b)
    x[piv[:rank]] = z
    return x, rank


@dataclass(eq=False)
class LsqLeafPayload:
    """Least-squares fit on a boundary leaf."""

    coeffs: np.ndarray
    sample_set: np.ndarray
    residual_rms: float
    interpolant: ChebInterpolant
    rank: int = 0

    @property
    def degrees(self) -> tuple:
        return self.interpolant.degrees

    @property
    def values(self) -> np.ndarray:
        """The fitted polynomial on the leaf's full Chebyshev grid."""
        return coeffs_to_values(self.coeffs)

    @property
    def stored_points(self) -> int:
        return int(self.coeffs.size)


def lsq_fit(f, leaf_domain: Box, spec: DomainSpec, N: int,
            min_samples: Optional[int] = None, oversample: int = 2) -> LsqLeafPayload:
    """Fit a degree ``N-1`` tensor Chebyshev polynomial to ``f`` on the inside samples.

    Samples come from :func:`extension_sample_set` with the given ``oversample``.

    Raises
    ------
    InsufficientSamplesError
        If fewer than ``min_samples`` (default ``N``) points lie inside.
    """
    X = extension_sample_set(leaf_domain, spec, N, oversample)
    floor = N if min_samples is None else min_samples
    if X.shape[0] < floor:
        raise InsufficientSamplesError(f"{X.shape[0]} samples inside {leaf_domain!r}, need {floor}")
    b = as_sampler(f).points(X)
    if not np.all(np.isfinite(b)):
        from .errors import InvalidDataError
        bad = X[np.flatnonzero(~np.isfinite(b))[0]]
        raise InvalidDataError(f"non-finite sample at {tuple(bad)}", location=tuple(bad))
    A = design_matrix(X, leaf_domain, N)
    c, rank = basic_lstsq(A, b)
    rms = float(np.linalg.norm(b - A @ c) / math.sqrt(X.shape[0]))
    coeffs = c.reshape((N,) * leaf_domain.d)
    return LsqLeafPayload(coeffs, X, rms, ChebInterpolant(coeffs, leaf_domain), rank)


def _slab_hits(spec: DomainSpec, zone: Box, j: int, c: float, n: int) -> bool:
    axes = [np.linspace(a, b, n) for a, b in zip(zone.lo, zone.hi)]
    axes[j] = np.array([c])
    return bool(np.any(spec.contains(_tensor_points(axes))))


def shrink_zone_to_domain(zone: Box, spec: DomainSpec, frozen: Optional[Tuple[int, int]] = None,
                          n: int = SHRINK_SAMPLES, rtol: float = SHRINK_RTOL) -> Box:
    """Smallest box around ``zone`` intersected with the region, up to sampling.

    ``frozen = (j, side)`` keeps face ``side`` (0 low, 1 high) of dimension
    ``j`` fixed. Free faces are located on an ``n``-per-dimension grid and
    then bisected to ``rtol`` times the zone width.

    Raises
    ------
    DegenerateLeafError
        If no sample of the zone lies inside.
    """
    axes = [np.linspace(a, b, n) for a, b in zip(zone.lo, zone.hi)]
    mask = spec.contains(_tensor_points(axes)).reshape((n,) * zone.d)
    if not np.any(mask):
        raise DegenerateLeafError(f"{zone!r} does not meet {spec.name}")
    lo, hi = list(zone.lo), list(zone.hi)
    for j in range(zone.d):
        hit = np.flatnonzero(np.any(mask, axis=tuple(k for k in range(zone.d) if k != j)))
        first, last = int(hit[0]), int(hit[-1])
        step_tol = rtol * (zone.hi[j] - zone.lo[j])
        if first > 0 and frozen != (j, 0):
            out, inn = axes[j][first - 1], axes[j][first]
            while inn - out > step_tol:
                mid = 0.5 * (out + inn)
                if _slab_hits(spec, zone, j, mid, n):
                    inn = mid
                else:
                    out = mid
            lo[j] = out
        if last < n - 1 and frozen != (j, 1):
            inn, out = axes[j][last], axes[j][last + 1]
            while out - inn > step_tol:
                mid = 0.5 * (out + inn)
                if _slab_hits(spec, zone, j, mid, n):
                    inn = mid
                else:
                    out = mid
            hi[j] = out
    return Box(tuple(lo), tuple(hi))


def _zone_hook(spec: DomainSpec):
    def hook(zone: Box, frozen):
        try:
            return shrink_zone_to_domain(zone, spec, frozen)
        except DegenerateLeafError:
            return None
    return hook


def _split_all(node: TreeNode, params: BuildParams, omega: Box, state, hook) -> None:
    node.isdone = [False] * node.zone.d
    for j in range(node.zone.d):
        split(node, j, params.t, omega, state, hook)


def refine_extension(node: TreeNode, f, spec: DomainSpec, params: BuildParams,
                     state: Optional[_BuildState] = None,
                     oversample: int = BUILD_OVERSAMPLE) -> None:
    """Refine the subtree at ``node`` until every leaf is resolved or empty."""
    sampler = as_sampler(f)
    omega = spec.bbox
    hook = _zone_hook(spec)
    if state is None:
        state = _BuildState(params, node)
    stack = [(node, -1)]
    while stack:
        nd, last = stack.pop()
        if not nd.is_leaf:
            for child in reversed(nd.children):
                stack.append((child, nd.splitdim))
            continue
        if nd.empty:
            continue
        _, mask = _sample_grid(nd.domain, spec, oversample * params.N)
        if np.all(mask):
            if leaf_step(nd, sampler, params, omega, state, last, hook):
                stack.append((nd, last))
            continue
        if not np.any(mask):
            nd.empty = True
            continue
        try:
            payload = lsq_fit(sampler, nd.domain, spec, params.N, oversample=oversample)
        except InsufficientSamplesError:
            payload = None
        if payload is not None and payload.residual_rms <= params.tol:
            nd.isdone = [False] * nd.zone.d
            nd.payload = payload
            continue
        _split_all(nd, params, omega, state, hook)
        stack.append((nd, last))


class ExtensionFun(PUFun):
    """Partition-of-unity approximant on a nonrectangular region."""

    def __init__(self, root: TreeNode, params: BuildParams, spec: DomainSpec):
        super().__init__(root, params, spec.bbox)
        self.spec = spec

    def __call__(self, x):
        X = np.asarray(x, dtype=float)
        pts = np.atleast_2d(X).reshape(-1, self.d)
        ok = self.spec.contains(pts)
        if not np.all(ok):
            bad = pts[np.flatnonzero(~ok)[0]]
            raise OutOfDomainError(f"point {tuple(bad)} lies outside {self.spec.name}")
        return evaluate(self, x)

    def eval_grid(self, axes, counter=None):
        """Grid values, NaN at points outside the region."""
        out = eval_grid(self, axes, counter)
        mask = self.spec.contains(_tensor_points(axes)).reshape(out.shape)
        out[~mask] = np.nan
        return out

    def integrate(self) -> float:
        raise NotImplementedError("integration over nonrectangular regions is not supported")

    def diff(self, j: int):
        raise NotImplementedError("differentiation of extension approximants is not supported")

    def _binary(self, other, op, reflected=False):
        raise NotImplementedError("arithmetic on extension approximants is not supported")

    def __neg__(self):
        raise NotImplementedError("arithmetic on extension approximants is not supported")


def build_extension(f, spec: DomainSpec, params: Optional[BuildParams] = None,
                    oversample: int = BUILD_OVERSAMPLE) -> ExtensionFun:
    """Approximate ``f`` on the region ``spec``; defaults ``N=17``, ``tol=1e-10``.

    Boundary leaves are fitted on the ``(oversample*N)^d`` Chebyshev grid.
    With ``oversample=2`` thin regions such as the diamond corners get fewer
    samples than unknowns and the fit degrades badly between samples.
    """
    if int(oversample) != oversample or oversample < 1:
        raise InvalidArgumentError(f"oversample must be a positive integer, got {oversample}")
    params = params if params is not None else BuildParams(N=17, tol=1e-10)
    root = new_root(spec.bbox)
    state = _BuildState(params, root)
    try:
        refine_extension(root, f, spec, params, state, int(oversample))
    except ConstructionLimitError as exc:
        finalize(root)
        exc.partial = ExtensionFun(root, params, spec)
        raise
    finalize(root)
    return ExtensionFun(root, params, spec)


def eval_extension(fun: ExtensionFun, x):
    return fun(x)


__all__ = [
    "DOMAINS", "DomainSpec", "ExtensionFun", "LsqLeafPayload", "astroid", "basic_lstsq",
    "build_extension", "design_matrix", "eval_extension", "extension_sample_set", "get_domain",
    "lsq_fit", "refine_extension", "shrink_zone_to_domain",
]
