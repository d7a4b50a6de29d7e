"""Chebyshev kernel: points, transforms, evaluation, chopping, quadrature.

All arrays of coefficients are dense tensors ``C[i_1, ..., i_d]`` of the
tensor-product series ``sum C T_{i_1}(x_1) ... T_{i_d}(x_d)`` on ``[-1, 1]^d``.
Point sets are the Chebyshev points of the second kind, stored in ascending
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft

from .box import Box, Interval, as_interval
from .errors import InvalidArgumentError, InvalidDataError

# shortest coefficient sequence the chopper will ever call resolved
MIN_CHOP_LENGTH = 17


class OpCounter:
    """Accumulates multiply-add counts for grid evaluation."""

    def __init__(self):
        self.madds = 0

    def add(self, n: int) -> None:
        self.madds += int(n)


def _unit_points(n: int) -> np.ndarray:
    if n == 1:
        return np.zeros(1)
    m = n - 1
    # sin form keeps the set exactly symmetric about 0
    x = np.sin(np.pi * np.arange(-m, m + 1, 2) / (2 * m))
    x[0], x[-1] = -1.0, 1.0
    return x


def grid_points(n: int, lo: float, hi: float) -> np.ndarray:
    """Like :func:`cheb_points` but also accepts ``n == 1`` (the midpoint)."""
    if n < 1:
        raise InvalidArgumentError(f"need at least one point, got {n}")
    if n == 1:
        return np.array([0.5 * (lo + hi)])
    x = 0.5 * (hi + lo) + 0.5 * (hi - lo) * _unit_points(n)
    x[0], x[-1] = lo, hi
    return x


def cheb_points(n: int, interval=(-1.0, 1.0)) -> np.ndarray:
    """Chebyshev points of the second kind on ``interval``, ascending.

    >>> cheb_points(3)
    array([-1.,  0.,  1.])
    """
    if n < 2:
        raise InvalidArgumentError(f"cheb_points needs n >= 2, got {n}")
    iv = as_interval(interval)
    return grid_points(n, iv.lo, iv.hi)


def _dct1_forward(values: np.ndarray, axis: int) -> np.ndarray:
    n = values.shape[axis]
    if n == 1:
        return values.copy()
    # ascending grid is the classical descending one reversed
    c = scipy.fft.dct(np.flip(values, axis=axis), type=1, axis=axis) / (n - 1)
    c = np.moveaxis(c, axis, 0)
    c[0] *= 0.5
    c[-1] *= 0.5
    return np.moveaxis(c, 0, axis)


def _dct1_inverse(coeffs: np.ndarray, axis: int) -> np.ndarray:
    n = coeffs.shape[axis]
    if n == 1:
        return coeffs.copy()
    c = np.moveaxis(coeffs, axis, 0).copy()
    c[0] *= 2.0
    c[-1] *= 2.0
    v = 0.5 * scipy.fft.dct(c, type=1, axis=0)
    return np.moveaxis(np.flip(v, axis=0), 0, axis)


def values_to_coeffs(values) -> np.ndarray:
    """Tensor Chebyshev coefficients of the interpolant of grid ``values``."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        bad = np.argwhere(~np.isfinite(v))[0]
        raise InvalidDataError(f"non-finite value at grid index {tuple(bad)}", location=tuple(bad))
    c = v
    for ax in range(v.ndim):
        c = _dct1_forward(c, ax)
    return c


def coeffs_to_values(coeffs, sizes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Values of a coefficient tensor on a Chebyshev grid of the given sizes."""
    c = np.asarray(coeffs, dtype=float)
    if sizes is None:
        sizes = c.shape
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != c.ndim:
        raise InvalidArgumentError("grid sizes must match coefficient dimension")
    pad = []
    for s, n in zip(sizes, c.shape):
        if s < n:
            raise InvalidArgumentError(f"grid size {s} too small for {n} coefficients")
        pad.append((0, s - n))
    v = np.pad(c, pad)
    for ax in range(v.ndim):
        v = _dct1_inverse(v, ax)
    return v


def clenshaw_eval(coeffs, x, box: Optional[Box] = None) -> float:
    """Evaluate the tensor series at one point by dimension-wise Clenshaw.

    If ``box`` is given, ``x`` is in the box's coordinates and is mapped onto
    ``[-1, 1]^d`` first.
    """
    c = np.asarray(coeffs, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if box is not None:
        x = box.to_unit(x)
    if x.shape != (c.ndim,):
        raise InvalidArgumentError(f"point of dimension {x.shape} for {c.ndim}-d coefficients")
    for j in range(c.ndim - 1, -1, -1):
        t = x[j]
        b1 = np.zeros(c.shape[:-1])
        b2 = np.zeros(c.shape[:-1])
        for k in range(c.shape[-1] - 1, 0, -1):
            b1, b2 = c[..., k] + 2.0 * t * b1 - b2, b1
        c = c[..., 0] + t * b1 - b2
    return float(c)


def cheb_vander(t, n: int, counter: Optional[OpCounter] = None) -> np.ndarray:
    """Matrix ``V[p, k] = T_k(t_p)`` for ``k < n``.

    Uses ``cos(k arccos t)`` on ``[-1, 1]`` and the three-term recurrence
    elsewhere.
    """
    t = np.asarray(t, dtype=float).ravel()
    # rounding can push mapped endpoints just past +-1
    if t.size and np.all(np.abs(t) <= 1.0 + 1e-13):
        theta = np.arccos(np.clip(t, -1.0, 1.0))
        V = np.cos(np.multiply.outer(theta, np.arange(n, dtype=float)))
    else:
        V = np.empty((t.size, n))
        V[:, 0] = 1.0
        if n > 1:
            V[:, 1] = t
        for k in range(2, n):
            V[:, k] = 2.0 * t * V[:, k - 1] - V[:, k - 2]
    if counter is not None:
        counter.add(t.size * max(n - 2, 0))
    return V


def evaluate_points(coeffs, unit_points) -> np.ndarray:
    """Evaluate at scattered points already mapped onto ``[-1, 1]^d``."""
    c = np.asarray(coeffs, dtype=float)
    X = np.atleast_2d(np.asarray(unit_points, dtype=float))
    d = c.ndim
    P = X.shape[0]
    if P == 0:
        return np.zeros(0)
    V = cheb_vander(X[:, d - 1], c.shape[-1])
    # (n_1 ... n_{d-1}, n_d) @ (n_d, P) then fold the remaining axes pointwise
    acc = c.reshape(-1, c.shape[-1]) @ V.T
    acc = acc.reshape(c.shape[:-1] + (P,))
    for j in range(d - 2, -1, -1):
        Vj = cheb_vander(X[:, j], c.shape[j])
        acc = np.einsum("...kp,pk->...p", acc, Vj)
    return acc


def evaluate_grid(coeffs, unit_axes: Sequence, counter: Optional[OpCounter] = None) -> np.ndarray:
    """Evaluate on a Cartesian grid, contracting the innermost dimension first.

    Costs ``O(M N (M + N)^(d-1))`` multiply-adds for ``M`` points and ``N``
    coefficients per dimension instead of ``O(M^d N^d)``.
    """
    out = np.asarray(coeffs, dtype=float)
    d = out.ndim
    if len(unit_axes) != d:
        raise InvalidArgumentError("need one axis per dimension")
    for j in range(d - 1, -1, -1):
        t = np.asarray(unit_axes[j], dtype=float)
        V = cheb_vander(t, out.shape[j], counter)
        if counter is not None:
            counter.add(out.size * t.size)
        out = np.moveaxis(np.tensordot(out, V, axes=([j], [1])), -1, j)
    return out


def sum_coeff_magnitudes_except(coeffs, j: int) -> np.ndarray:
    """Sum ``|C|`` over every dimension except ``j`` (0-based)."""
    c = np.abs(np.asarray(coeffs, dtype=float))
    if not 0 <= j < c.ndim:
        raise InvalidArgumentError(f"dimension {j} out of range for {c.ndim}-d array")
    others = tuple(k for k in range(c.ndim) if k != j)
    return c.sum(axis=others) if others else c


@dataclass(frozen=True)
class ChopResult:
    cutoff: int
    resolved: bool


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def standard_chop(coeffs, tol: float) -> int:
    """Number of leading coefficients needed to resolve a series to ``tol``.

    Returns the sequence length when no plateau is found. Follows the
    envelope / plateau / adjustment steps of Chebfun's ``standardChop``.
    """
    b = np.abs(np.asarray(coeffs, dtype=float)).ravel()
    n = b.size
    if n < MIN_CHOP_LENGTH:
        return n

    # step 1: monotone envelope, normalized
    m = np.maximum.accumulate(b[::-1])[::-1]
    if m[0] == 0.0:
        return 1
    env = m / m[0]

    # step 2: first plateau point
    plateau_point = None
    j2 = n
    for j in range(2, n + 1):
        j2 = _round_half_up(1.25 * j + 5)
        if j2 > n:
            return n
        e1 = env[j - 1]
        e2 = env[j2 - 1]
        if e1 == 0.0:
            plateau_point = j - 1
            break
        r = 3.0 * (1.0 - math.log(e1) / math.log(tol))
        if e2 / e1 > r:
            plateau_point = j - 1
            break
    if plateau_point is None:
        return n

    # step 3: fix the cutoff inside the plateau
    if env[plateau_point - 1] == 0.0:
        return plateau_point
    floor = tol ** (7.0 / 6.0)
    j3 = int(np.count_nonzero(env >= floor))
    if j3 < j2:
        j2 = j3 + 1
        env = env.copy()
        env[j2 - 1] = floor
    with np.errstate(divide="ignore"):
        cc = np.log10(env[:j2])
    cc = cc + np.linspace(0.0, (-1.0 / 3.0) * math.log10(tol), j2)
    d = int(np.argmin(cc)) + 1
    return max(d - 1, 1)


def chop(envelope, tol: float) -> ChopResult:
    """Decide whether a coefficient-magnitude sequence is resolved at ``tol``."""
    e = np.asarray(envelope, dtype=float).ravel()
    if e.size == 0:
        raise InvalidArgumentError("cannot chop an empty sequence")
    if not 0.0 < tol < 1.0:
        raise InvalidArgumentError(f"chop tolerance must lie in (0, 1), got {tol}")
    cutoff = standard_chop(e, tol)
    return ChopResult(cutoff=cutoff, resolved=cutoff < e.size)


def clenshaw_curtis_weights(n: int, interval=(-1.0, 1.0)) -> np.ndarray:
    """Clenshaw-Curtis weights for the ``n`` ascending Chebyshev points."""
    if n < 2:
        raise InvalidArgumentError(f"clenshaw_curtis_weights needs n >= 2, got {n}")
    iv = as_interval(interval)
    return _cc_weights(n) * (0.5 * iv.width)


def _cc_weights(n: int) -> np.ndarray:
    if n == 1:
        return np.array([2.0])
    N = n - 1
    k = np.arange(n)
    j = np.arange(1, N // 2 + 1)
    b = np.full(j.size, 2.0)
    if N % 2 == 0:
        b[-1] = 1.0
    s = (b / (4.0 * j**2 - 1.0)) @ np.cos(2.0 * np.pi * np.outer(j, k) / N)
    c = np.full(n, 2.0)
    c[0] = c[-1] = 1.0
    # symmetric, so ascending vs descending order does not matter
    return c / N * (1.0 - s)


def quadrature_weights(n: int, lo: float, hi: float) -> np.ndarray:
    """Weights for :func:`grid_points` (``n == 1`` gives the midpoint rule)."""
    return _cc_weights(n) * (0.5 * (hi - lo))


def diff_coeffs(coeffs, j: int, interval: Optional[Interval] = None) -> np.ndarray:
    """Coefficients of the partial derivative in dimension ``j`` (0-based).

    The output has one fewer coefficient in dimension ``j`` (never fewer
    than one). Pass ``interval`` to apply the chain-rule factor of the map
    from that interval onto ``[-1, 1]``.
    """
    c = np.moveaxis(np.asarray(coeffs, dtype=float), j, 0)
    n = c.shape[0]
    if n == 1:
        out = np.zeros_like(c)
    else:
        out = np.zeros((n - 1,) + c.shape[1:])
        for k in range(n - 1, 0, -1):
            nxt = out[k + 1] if k + 1 < n - 1 else 0.0
            out[k - 1] = nxt + 2.0 * k * c[k]
        out[0] *= 0.5
    if interval is not None:
        out = out * (2.0 / as_interval(interval).width)
    return np.moveaxis(out, 0, j)


@dataclass(frozen=True, eq=False)
class ChebInterpolant:
    """A tensor Chebyshev series bound to a box."""

    coeffs: np.ndarray
    box: Box

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != self.box.d:
            raise InvalidArgumentError("coefficient dimension does not match box")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, values, box: Box) -> "ChebInterpolant":
        return cls(values_to_coeffs(values), box)

    @property
    def degrees(self) -> tuple:
        return tuple(s - 1 for s in self.coeffs.shape)

    def __call__(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        return evaluate_points(self.coeffs, self.box.to_unit(X))

    def at(self, x) -> float:
        return clenshaw_eval(self.coeffs, x, self.box)

    def on_grid(self, axes: Sequence, counter: Optional[OpCounter] = None) -> np.ndarray:
        unit = [iv.to_unit(a) for iv, a in zip(self.box.intervals, axes)]
        return evaluate_grid(self.coeffs, unit, counter)

    def values(self, sizes: Optional[Sequence[int]] = None) -> np.ndarray:
        return coeffs_to_values(self.coeffs, sizes)

    def derivative(self, j: int) -> "ChebInterpolant":
        return ChebInterpolant(diff_coeffs(self.coeffs, j, self.box.interval(j)), self.box)

    def integral(self, over: Optional[Box] = None) -> float:
        """Integral over ``over`` (default: own box) by Clenshaw-Curtis.

        The polynomial is resampled on a Chebyshev grid of matching size on
        ``over``, so the rule is exact.
        """
        target = self.box if over is None else over
        sizes = self.coeffs.shape
        axes = [grid_points(n, a, b) for n, a, b in zip(sizes, target.lo, target.hi)]
        vals = self.on_grid(axes)
        for n, a, b in zip(sizes, target.lo, target.hi):
            vals = np.tensordot(quadrature_weights(n, a, b), vals, axes=([0], [0]))
        return float(vals)
