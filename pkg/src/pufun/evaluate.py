"""Partition-of-unity blending: bumps, evaluation, derivatives, integrals."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from .box import MEMBERSHIP_RTOL, Box
from .chebcore import OpCounter
from .errors import InvalidArgumentError, OutOfDomainError
from .tree import LeafPayload, PUFun, TreeNode, copy_topology, iter_leaves

# below this the bump sum is treated as underflowed
DENOMINATOR_FLOOR = 1e-300


def psi0(x):
    """C-infinity bump ``exp(1 - 1/(1 - x^2))`` on ``(-1, 1)``, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out if out.ndim else float(out)


def bump(domain: Box, x) -> np.ndarray:
    """Tensor-product bump supported on ``domain``, equal to 1 at its center."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    U = domain.to_unit(np.atleast_2d(X))
    out = np.prod(psi0(U), axis=1)
    return float(out[0]) if single else out


def _points(fun: PUFun, x) -> Tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = np.atleast_2d(X).reshape(-1, fun.d)
    return X, single


def numden(node: TreeNode, x) -> Tuple[np.ndarray, np.ndarray]:
    """Denominator ``S`` (bump sum) and numerator ``P`` at points ``x``.

    Only children whose domain contains a point are visited for it.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    S = np.zeros(X.shape[0])
    P = np.zeros(X.shape[0])
    _numden(node, X, np.arange(X.shape[0]), S, P)
    return S, P


def _numden(node: TreeNode, X, idx, S, P) -> None:
    if node.is_leaf:
        if node.payload is None:
            return
        pts = X[idx]
        w = bump(node.domain, pts)
        live = w > 0.0
        if not np.any(live):
            return
        vals = node.payload.interpolant(pts[live])
        S[idx[live]] += w[live]
        P[idx[live]] += w[live] * vals
        return
    for child in node.children:
        if child.is_leaf and child.payload is None:
            continue
        mask = child.domain.contains(X[idx])
        if np.any(mask):
            _numden(child, X, idx[mask], S, P)


def _zone_distance(zone: Box, X: np.ndarray) -> np.ndarray:
    lo, hi = np.asarray(zone.lo), np.asarray(zone.hi)
    gap = np.maximum(np.maximum(lo - X, X - hi), 0.0)
    return np.sqrt(np.sum(gap * gap, axis=1))


def _zone_owner(node: TreeNode, X: np.ndarray, idx: np.ndarray, owner: list) -> None:
    if node.is_leaf:
        if node.payload is not None:
            owner.append((node, idx))
        return
    for child in node.children:
        if child.is_leaf and child.payload is None:
            continue
        mask = child.zone.contains(X[idx])
        if np.any(mask):
            _zone_owner(child, X, idx[mask], owner)
            idx = idx[~mask]
            if idx.size == 0:
                return


def nearest_leaf_values(fun: PUFun, X: np.ndarray) -> np.ndarray:
    """Value of the leaf whose zone contains (or is closest to) each point."""
    X = np.atleast_2d(X)
    out = np.zeros(X.shape[0])
    owner: list = []
    _zone_owner(fun.root, X, np.arange(X.shape[0]), owner)
    found = np.zeros(X.shape[0], dtype=bool)
    for lf, idx in owner:
        out[idx] = lf.payload.interpolant(X[idx])
        found[idx] = True
    rest = np.flatnonzero(~found)
    if rest.size == 0:
        return out
    # zones shrunk towards a region need not cover every point
    lvs = [lf for lf in iter_leaves(fun.root) if lf.payload is not None]
    best = np.full(rest.size, np.inf)
    which = np.full(rest.size, -1)
    for k, lf in enumerate(lvs):
        dist = _zone_distance(lf.zone, X[rest])
        better = dist < best
        best[better] = dist[better]
        which[better] = k
    for k in np.unique(which):
        sel = rest[which == k]
        out[sel] = lvs[k].payload.interpolant(X[sel])
    return out


def check_in_domain(fun: PUFun, X: np.ndarray) -> None:
    ok = fun.omega.contains(X)
    if not np.all(ok):
        bad = X[np.flatnonzero(~ok)[0]]
        raise OutOfDomainError(f"point {tuple(bad)} lies outside {fun.omega!r}")


def evaluate(fun: PUFun, x):
    """Evaluate the blended approximant at one point or an ``(P, d)`` array."""
    X, single = _points(fun, x)
    check_in_domain(fun, X)
    out = _blend(fun, X)
    return float(out[0]) if single else out


def _blend(fun: PUFun, X: np.ndarray) -> np.ndarray:
    S, P = numden(fun.root, X)
    low = S < DENOMINATOR_FLOOR
    out = np.empty(X.shape[0])
    out[~low] = P[~low] / S[~low]
    if np.any(low):
        out[low] = nearest_leaf_values(fun, X[low])
    return out


def leaf_weights(fun: PUFun, x):
    """Partition-of-unity weights: ``(leaves, W)`` with ``W[p, k] = w_k(x_p)``."""
    X, _ = _points(fun, x)
    lvs = [lf for lf in iter_leaves(fun.root) if lf.payload is not None]
    B = np.column_stack([bump(lf.domain, X) for lf in lvs])
    S = B.sum(axis=1)
    W = np.zeros_like(B)
    ok = S >= DENOMINATOR_FLOOR
    W[ok] = B[ok] / S[ok, None]
    for p in np.flatnonzero(~ok):
        dist = np.array([_zone_distance(lf.zone, X[p:p + 1])[0] for lf in lvs])
        W[p, int(np.argmin(dist))] = 1.0
    return lvs, W


def _axis_slice(axis: np.ndarray, lo: float, hi: float) -> slice:
    slack = MEMBERSHIP_RTOL * (hi - lo)
    return slice(int(np.searchsorted(axis, lo - slack, side="left")),
                 int(np.searchsorted(axis, hi + slack, side="right")))


def _leaves_touching(root: TreeNode, lo, hi):
    """Leaves whose domain meets the closed box ``[lo, hi]``, pruning by internal domains."""
    stack = [root]
    while stack:
        nd = stack.pop()
        dom = nd.domain
        slack = MEMBERSHIP_RTOL * dom.widths
        if any(dh + s < l or dl - s > h for dl, dh, l, h, s in zip(dom.lo, dom.hi, lo, hi, slack)):
            continue
        if nd.is_leaf:
            yield nd
        else:
            stack.extend(reversed(nd.children))


def eval_grid(fun: PUFun, axes: Sequence, counter: Optional[OpCounter] = None) -> np.ndarray:
    """Evaluate on the Cartesian product of sorted ``axes``.

    Each leaf evaluates its interpolant on the sub-grid inside its domain by
    nested one-dimensional contractions; the bump factors are separable.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) != fun.d:
        raise InvalidArgumentError(f"need {fun.d} axes, got {len(axes)}")
    for j, a in enumerate(axes):
        if a.ndim != 1 or np.any(np.diff(a) < 0):
            raise InvalidArgumentError("grid axes must be sorted 1-d arrays")
        iv = fun.omega.interval(j)
        slack = MEMBERSHIP_RTOL * iv.width
        if a.size and (a[0] < iv.lo - slack or a[-1] > iv.hi + slack):
            raise OutOfDomainError(f"axis {j} leaves [{iv.lo}, {iv.hi}]")
    shape = tuple(a.size for a in axes)
    S = np.zeros(shape)
    P = np.zeros(shape)
    if 0 in shape:
        return S
    lo = [a[0] for a in axes]
    hi = [a[-1] for a in axes]
    for lf in _leaves_touching(fun.root, lo, hi):
        if lf.payload is None:
            continue
        dom = lf.domain
        sl = tuple(_axis_slice(a, lo, hi) for a, lo, hi in zip(axes, dom.lo, dom.hi))
        if any(s.stop <= s.start for s in sl):
            continue
        sub = [a[s] for a, s in zip(axes, sl)]
        factors = [psi0(iv.to_unit(a)) for iv, a in zip(dom.intervals, sub)]
        w = factors[0]
        for fct in factors[1:]:
            w = np.multiply.outer(w, fct)
        if not np.any(w > 0):
            continue
        vals = lf.payload.interpolant.on_grid(sub, counter)
        S[sl] += w
        P[sl] += w * vals
    out = np.empty(shape)
    ok = S >= DENOMINATOR_FLOOR
    out[ok] = P[ok] / S[ok]
    if not np.all(ok):
        idx = np.argwhere(~ok)
        pts = np.column_stack([axes[j][idx[:, j]] for j in range(fun.d)])
        out[~ok] = nearest_leaf_values(fun, pts)
    return out


def differentiate(fun: PUFun, j: int) -> PUFun:
    """Blend of the leafwise partial derivatives in dimension ``j`` (0-based).

    The weights themselves are not differentiated.
    """
    if not 0 <= j < fun.d:
        raise InvalidArgumentError(f"dimension {j} out of range")

    def payload(node: TreeNode) -> LeafPayload:
        interp = node.payload.interpolant.derivative(j)
        return LeafPayload.from_coeffs(interp.coeffs, interp.box)

    return fun.with_root(copy_topology(fun.root, payload))


def integrate(fun: PUFun) -> float:
    """Integral over the domain, summed zone by zone with Clenshaw-Curtis."""
    total = 0.0
    for lf in iter_leaves(fun.root):
        if lf.payload is not None:
            total += lf.payload.interpolant.integral(over=lf.zone)
    return total
