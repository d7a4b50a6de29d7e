import math

import numpy as np
import pytest

import pufun.algebra as alg
from pufun import (
    Box,
    BuildParams,
    DivisionSingularityError,
    InvalidArgumentError,
    MergePreconditionError,
    apply_binary,
    apply_unary_sample,
    build,
    merge,
)
from pufun.algebra import zones_refine
from pufun.tree import iter_leaves, new_root

FAST = BuildParams(N=33, tol=1e-10)


def f1(x, y):
    return np.arctan(100 * (x * x + y))


def f2(x, y):
    return np.arctan(100 * (x + y * y))


@pytest.fixture(scope="module")
def pair(sq2):
    p = BuildParams(N=65, tol=1e-14)
    return build(f1, sq2, p), build(f2, sq2, p)


@pytest.fixture(scope="module")
def pair_sum(pair):
    return pair[0] + pair[1]


def _random_pool(rng, n):
    pool = []
    for _ in range(n):
        th, k, c = rng.uniform(0, math.pi), rng.uniform(2, 15), rng.uniform(-0.5, 0.5)
        f = lambda x, y, th=th, k=k, c=c: np.arctan(k * (math.cos(th) * x + math.sin(th) * y * y - c))
        pool.append(build(f, Box.cube(2), FAST))
    return pool


class TestMerge:
    def test_zone_match_on_every_call(self, monkeypatch):
        rng = np.random.default_rng(7)
        pool = _random_pool(rng, 20)
        seen = {"checks": 0}
        original = alg.check_zone_match

        def spy(operand, target):
            seen["checks"] += 1
            original(operand, target)

        monkeypatch.setattr(alg, "check_zone_match", spy)
        for _ in range(100):
            i, j = rng.integers(0, len(pool), 2)
            a, b = pool[i], pool[j]
            target = new_root(a.omega)
            trace = {}
            merge("add", a.root, b.root, target, -1, a.omega, FAST, trace=trace)
            assert seen["checks"] == 2 * trace["calls"]
            seen["checks"] = 0
            for lf in iter_leaves(target):
                assert any(z.zone.contains_box(lf.zone, 1e-12) for z in iter_leaves(a.root))
                assert any(z.zone.contains_box(lf.zone, 1e-12) for z in iter_leaves(b.root))

    def test_identical_topology(self, smooth_fun):
        target = new_root(smooth_fun.omega)
        merge("mul", smooth_fun.root, smooth_fun.root, target, -1, smooth_fun.omega, smooth_fun.params)
        assert [lf.zone for lf in iter_leaves(target)] == [lf.zone for lf in smooth_fun.leaves()]

    def test_leaf_against_split(self, sq2):
        flat = build(lambda x, y: 1 + 0 * x, sq2, FAST)
        p = BuildParams(N=33, tol=1e-10, max_depth=1)
        node = new_root(sq2)
        alg.split(node, 1, p.t, sq2)
        target = new_root(sq2)
        merge("add", flat.root, node, target, -1, sq2, p,
              sample=lambda axes: np.zeros([len(a) for a in axes]))
        assert target.splitdim == 1 and all(c.pending is not None for c in target.children)

    def test_mismatch_raises(self, sq2):
        a = new_root(sq2)
        bad = new_root(Box((-1.0, -1.0), (0.5, 1.0)))
        with pytest.raises(MergePreconditionError):
            merge("add", a, a, bad, -1, sq2, FAST)

    def test_unknown_op(self, smooth_fun):
        with pytest.raises(InvalidArgumentError):
            apply_binary("pow", smooth_fun, smooth_fun)


class TestApplyBinary:
    def test_crossing_pair_sum(self, pair_sum, rng):
        X = rng.uniform(-1, 1, (1000, 2))
        assert np.max(np.abs(pair_sum(X) - f1(*X.T) - f2(*X.T))) <= 1e-10

    def test_crossing_pair_refines_both(self, pair, pair_sum):
        assert zones_refine(pair_sum, pair[0]) and zones_refine(pair_sum, pair[1])

    def test_zones_tile(self, pair_sum):
        assert sum(lf.zone.volume for lf in pair_sum.leaves()) == pytest.approx(4.0, rel=1e-12)

    def test_double(self, franke_fun, rng):
        from pufun.bench.functions import franke
        s = franke_fun + franke_fun
        X = rng.uniform(-1, 1, (10000, 2))
        assert np.max(np.abs(s(X) - 2 * franke(*X.T))) <= 1e-11

    def test_commutative(self, pair, rng):
        a = apply_binary("add", pair[0], pair[1])
        b = apply_binary("add", pair[1], pair[0])
        X = rng.uniform(-1, 1, (1000, 2))
        assert np.max(np.abs(a(X) - b(X))) <= 1e-12

    def test_plane_wave_sum(self, sq2, rng):
        p = BuildParams(N=129, tol=1e-16)
        g1 = lambda x, y: np.arctan(250 * x)
        t = math.pi / 6
        g2 = lambda x, y: np.arctan(250 * (math.cos(t) * x + math.sin(t) * y))
        s = build(g1, sq2, p) + build(g2, sq2, p)
        X = rng.uniform(-1, 1, (10000, 2))
        assert np.max(np.abs(s(X) - g1(*X.T) - g2(*X.T))) <= 1e-10

    def test_product_then_quotient(self, sq2, rng):
        p = BuildParams(N=33, tol=1e-14)
        f = build(lambda x, y: np.sin(2 * x + y), sq2, p)
        g = build(lambda x, y: 2 + np.cos(x * y), sq2, p)
        q = (f * g) / g
        X = rng.uniform(-1, 1, (1000, 2))
        assert np.max(np.abs(q(X) - np.sin(2 * X[:, 0] + X[:, 1]))) <= 1e-9

    def test_division_by_zero(self, sq2):
        p = BuildParams(N=17, tol=1e-10)
        f = build(lambda x, y: 1 + 0 * x, sq2, p)
        g = build(lambda x, y: x + 0.1 * y, sq2, p)
        with pytest.raises(DivisionSingularityError) as info:
            f / g
        assert info.value.location is not None

    def test_different_boxes(self, sq2):
        a = build(lambda x, y: x, sq2, FAST)
        b = build(lambda x, y: x, Box.cube(2, 0.0, 1.0), FAST)
        with pytest.raises(InvalidArgumentError):
            a + b

    def test_scalar_operations(self, smooth_fun, rng):
        X = rng.uniform(-1, 1, (100, 2))
        ref = smooth_fun(X)
        assert np.max(np.abs((2.0 * smooth_fun)(X) - 2 * ref)) <= 1e-12
        assert np.max(np.abs((1.0 - smooth_fun)(X) - (1 - ref))) <= 1e-12
        assert np.max(np.abs((-smooth_fun)(X) + ref)) <= 1e-12


class TestUnary:
    def test_identity(self, smooth_fun, rng):
        X = rng.uniform(-1, 1, (200, 2))
        assert np.max(np.abs(apply_unary_sample(smooth_fun, lambda v: v)(X) - smooth_fun(X))) <= 1e-12

    def test_scaling_integral(self, smooth_fun):
        c = -3.25
        scaled = apply_unary_sample(smooth_fun, lambda v: c * v)
        assert scaled.integrate() == pytest.approx(c * smooth_fun.integrate(), rel=1e-12)

    def test_exp(self, smooth_fun, rng):
        X = rng.uniform(-1, 1, (1000, 2))
        g = apply_unary_sample(smooth_fun, np.exp)
        assert np.max(np.abs(g(X) - np.exp(np.arctan(20 * (X[:, 0] - 0.3 * X[:, 1]))))) <= 1e-10
