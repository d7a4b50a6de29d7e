import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from pufun import (
    Box,
    BuildParams,
    DegenerateLeafError,
    DomainSpec,
    InsufficientSamplesError,
    InvalidArgumentError,
    OutOfDomainError,
    build,
    build_extension,
    extension_sample_set,
    get_domain,
    lsq_fit,
    shrink_zone_to_domain,
)
from pufun.chebcore import cheb_points
from pufun.extension import basic_lstsq, design_matrix

DISK = get_domain("disk")
DIAMOND = get_domain("diamond")


def random_tensor_poly(seed, deg=16):
    C = np.random.default_rng(seed).standard_normal((deg + 1, deg + 1)) / (1 + np.arange(deg + 1))[:, None]
    return lambda x, y: npcheb.chebval2d(x, y, C)


class TestSampleSet:
    def test_inside_leaf_gets_full_grid(self):
        X = extension_sample_set(Box.cube(2, -0.3, 0.3), DISK, 5)
        assert X.shape == (100, 2)

    def test_disk_count_matches_brute_force(self):
        x = cheb_points(8)
        brute = sum(1 for a in x for b in x if a * a + b * b <= 1)
        X = extension_sample_set(Box.cube(2), DISK, 4)
        assert X.shape[0] == brute
        assert np.all(np.sum(X**2, axis=1) <= 1)

    def test_outside_leaf(self):
        with pytest.raises(DegenerateLeafError):
            extension_sample_set(Box.cube(2, 0.8, 1.0), DIAMOND, 4)

    def test_unknown_domain(self):
        with pytest.raises(InvalidArgumentError):
            get_domain("torus")

    def test_predicate_respects_bbox(self):
        spec = get_domain("astroid")
        far = np.array([[spec.bbox.hi[0] + 1, 0.0]])
        assert not spec.contains(far)[0]


class TestLeastSquares:
    @pytest.mark.parametrize("spec", [DISK, DIAMOND], ids=["disk", "diamond"])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_polynomial_reproduction(self, spec, seed):
        fit = lsq_fit(random_tensor_poly(seed), spec.bbox, spec, 17)
        assert fit.residual_rms <= 1e-12

    def test_exp_on_diamond(self):
        fit = lsq_fit(lambda x, y: np.exp(x + y), DIAMOND.bbox, DIAMOND, 17, oversample=3)
        assert fit.residual_rms <= 1e-10 and fit.stored_points == 289

    def test_residual_definition(self):
        f = lambda x, y: np.abs(x) ** 1.5 + y
        fit = lsq_fit(f, DISK.bbox, DISK, 17)
        X = fit.sample_set
        resid = f(*X.T) - fit.interpolant(X)
        assert fit.residual_rms == pytest.approx(np.linalg.norm(resid) / math.sqrt(len(X)), rel=1e-8)

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamplesError):
            lsq_fit(lambda x, y: x, Box.cube(2, 0.7065, 0.7565), DISK, 17)

    def test_basic_solution_zeroes_dependent_columns(self):
        A = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        x, rank = basic_lstsq(A, np.array([1.0, 2.0, 3.0]))
        assert rank == 1 and np.count_nonzero(x) == 1
        assert np.allclose(A @ x, [1, 2, 3])

    def test_design_matrix_layout(self, rng):
        X = rng.uniform(-1, 1, (5, 2))
        A = design_matrix(X, Box.cube(2), 3)
        k = 1 * 3 + 2
        np.testing.assert_allclose(A[:, k], X[:, 0] * (2 * X[:, 1] ** 2 - 1), atol=1e-15)


class TestShrink:
    def test_inside_zone_unchanged(self):
        z = Box.cube(2, -0.2, 0.3)
        assert shrink_zone_to_domain(z, DISK) == z

    def test_quarter_disk(self):
        z = shrink_zone_to_domain(Box.cube(2, 0.0, 1.0), DISK)
        np.testing.assert_allclose(z.lo, [0, 0], atol=1e-9)
        np.testing.assert_allclose(z.hi, [1, 1], atol=1e-9)

    def test_corner_patch(self):
        z = shrink_zone_to_domain(Box.cube(2, 0.5, 1.0), DISK, frozen=(0, 0))
        assert z.lo == (0.5, 0.5)
        np.testing.assert_allclose(z.hi, [math.sqrt(3) / 2] * 2, atol=1e-9)

    def test_frozen_face_kept(self):
        z = shrink_zone_to_domain(Box((0.0, 0.5), (1.0, 1.0)), DIAMOND, frozen=(1, 1))
        assert z.hi[1] == 1.0 and z.lo[1] == 0.5
        assert z.hi[0] == pytest.approx(0.5, abs=1e-9)

    def test_contains_inside_samples(self):
        zone = Box((0.2, -0.9), (1.0, 0.1))
        z = shrink_zone_to_domain(zone, DISK)
        ax = [np.linspace(a, b, 64) for a, b in zip(zone.lo, zone.hi)]
        pts = np.column_stack([m.ravel() for m in np.meshgrid(*ax, indexing="ij")])
        assert np.all(z.contains(pts[DISK.contains(pts)]))

    def test_empty(self):
        with pytest.raises(DegenerateLeafError):
            shrink_zone_to_domain(Box.cube(2, 0.8, 1.0), DIAMOND)


class TestBuildExtension:
    def test_g1_diamond_single_leaf(self):
        fun = build_extension(lambda x, y: np.exp(x + y), DIAMOND)
        assert fun.leaf_count == 1 and fun.stored_points == 289

    def test_g1_disk_random_points(self, rng):
        fun = build_extension(lambda x, y: np.exp(x + y), DISK)
        X = rng.uniform(-1, 1, (20000, 2))
        X = X[DISK.contains(X)][:10000]
        assert np.max(np.abs(fun(X) - np.exp(X.sum(axis=1)))) <= 1e-8

    def test_g2_disk_splits(self):
        g2 = lambda x, y: 1 / ((x - 1.1) ** 2 + (y - 1.1) ** 2) ** 2
        fun = build_extension(g2, DISK)
        assert fun.leaf_count > 1
        ax = np.linspace(-1, 1, 200)
        G = fun.eval_grid([ax, ax])
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        live = ~np.isnan(G)
        assert np.max(np.abs(G[live] - g2(X, Y)[live])) <= 1e-8 * np.max(np.abs(g2(X, Y)[live]))

    def test_g4_astroid(self):
        g4 = lambda x, y: np.arctan(3 * (x * x + y))
        spec = get_domain("astroid")
        fun = build_extension(g4, spec)
        ax = [np.linspace(a, b, 200) for a, b in zip(spec.bbox.lo, spec.bbox.hi)]
        G = fun.eval_grid(ax)
        X, Y = np.meshgrid(*ax, indexing="ij")
        live = ~np.isnan(G)
        assert np.max(np.abs(G[live] - g4(X, Y)[live])) <= 1e-9

    def test_rectangle_matches_plain_build(self, rng):
        f = lambda x, y: np.arctan(5 * (x - y))
        p = BuildParams(N=17, tol=1e-10)
        box = Box.cube(2)
        ext = build_extension(f, DomainSpec.rectangle(box), p)
        ref = build(f, box, p)
        assert [lf.zone for lf in ext.leaves()] == [lf.zone for lf in ref.leaves()]
        X = rng.uniform(-1, 1, (1000, 2))
        assert np.max(np.abs(ext(X) - ref(X))) <= 1e-12

    def test_out_of_region(self):
        fun = build_extension(lambda x, y: np.exp(x + y), DIAMOND)
        with pytest.raises(OutOfDomainError):
            fun([0.9, 0.9])
        assert fun([0.5, 0.5]) == pytest.approx(math.e, rel=1e-10)

    def test_grid_outside_is_nan(self):
        fun = build_extension(lambda x, y: np.exp(x + y), DIAMOND)
        G = fun.eval_grid([np.array([-1.0, 0.0, 1.0])] * 2)
        assert np.isnan(G[0, 0]) and np.isfinite(G[1, 1])

    def test_calculus_not_supported(self):
        fun = build_extension(lambda x, y: x + y, DIAMOND)
        with pytest.raises(NotImplementedError):
            fun.integrate()
