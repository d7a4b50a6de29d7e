import csv
import json
import math

import numpy as np
import pytest
from scipy.special import erf

from pufun import Box, BuildParams, build
from pufun.bench import get_function, run_suite
from pufun.bench.cli import EXIT_INVALID, EXIT_LIMIT, EXIT_OK, export_field, export_zones, main, read_field, read_zones
from pufun.bench.functions import TABLE1, TABLE2, TABLE3, franke
from pufun.bench.suites import RunReport, rotate2d_angles


class TestRegistry:
    def test_franke_reference_values(self):
        # standard four-term formula evaluated independently
        def ref(x, y):
            return (0.75 * math.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
                    + 0.75 * math.exp(-((9 * x + 1) ** 2) / 49 - (9 * y + 1) / 10)
                    + 0.5 * math.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
                    - 0.2 * math.exp(-((9 * x - 4) ** 2) - (9 * y - 7) ** 2))
        for p in [(0.0, 0.0), (0.3, -0.7), (-1.0, 1.0)]:
            assert franke(*p) == pytest.approx(ref(*p), rel=1e-15)

    def test_finite_on_boxes(self):
        for name in TABLE1 + TABLE2:
            fn = get_function(name)
            axes = [np.linspace(a, b, 9) for a, b in zip(fn.omega.lo, fn.omega.hi)]
            assert np.all(np.isfinite(fn.formula(*np.meshgrid(*axes, indexing="ij"))))

    def test_gaussian_integral_oracle(self):
        fn = get_function("genz-gaussian-2d")
        u, a = (0.75, 0.25), (5.0, 10.0)
        exact = np.prod([math.sqrt(math.pi) / (2 * ai) * (erf(ai * (1 - ui)) + erf(ai * (1 + ui)))
                         for ui, ai in zip(u, a)])
        assert fn.analytic_integral == pytest.approx(exact, rel=1e-15)

    def test_corner_peak_exponent(self):
        f2 = get_function("genz-corner-peak-2d").formula
        f3 = get_function("genz-corner-peak-3d").formula
        assert f2(0.0, 0.0) == 1.0 and f3(0.0, 0.0, 0.0) == 1.0
        assert f2(1.0, 0.0) == pytest.approx(6.0 ** -3)
        assert f3(1.0, 0.0, 0.0) == pytest.approx(26.0 ** -4)

    def test_plane_waves(self):
        assert get_function("plane2d:0").formula(0.1, 0.7) == pytest.approx(math.atan(25.0))
        assert get_function("plane3d:0,0").formula(0.0, 0.0, 0.2) == pytest.approx(math.atan(1.0))

    def test_unknown(self):
        from pufun import InvalidArgumentError
        with pytest.raises(InvalidArgumentError):
            get_function("peg")

    def test_table3_regions(self):
        assert {get_function(n).region for n in TABLE3} == {"disk", "diamond", "astroid"}

    def test_rotate_angles(self):
        t = rotate2d_angles()
        assert len(t) == 33 and t[0] == 0.0 and t[-1] == pytest.approx(math.pi / 4)


class TestSuites:
    def test_franke_row(self):
        (r,) = run_suite("table1", only=["franke"], warm_up=False)
        assert r.status == "ok" and r.max_error <= 5e-13
        assert 9270 / 4 <= r.stored_points <= 9270 * 4

    def test_rotate_axis_aligned(self):
        from pufun.bench.suites import run_function
        r = run_function(get_function("plane2d:0"), "rotate2d", BuildParams(), 200)
        assert r.status == "ok" and r.max_error <= 1e-11

    def test_g1_diamond(self):
        (r,) = run_suite("table3", only=["g1-diamond"], warm_up=False)
        assert r.stored_points == 289 and r.max_error <= 1e-8

    def test_deterministic(self):
        a = run_suite("table1", only=["log-cliff"], warm_up=False)[0]
        b = run_suite("table1", only=["log-cliff"], warm_up=False)[0]
        assert (a.max_error, a.stored_points) == (b.max_error, b.stored_points)

    def test_limit_recorded(self):
        (r,) = run_suite("table1", only=["arctan-cliff"], warm_up=False, max_depth=2)
        assert r.status == "limit" and math.isnan(r.max_error)

    def test_unknown_suite(self):
        from pufun import InvalidArgumentError
        with pytest.raises(InvalidArgumentError):
            run_suite("table9")


class TestExports:
    def test_single_leaf_zone_row(self, tmp_path):
        fun = build(lambda x, y: x + y, Box.cube(2), BuildParams(N=17))
        assert export_zones(fun, tmp_path / "z.csv") == 1
        assert len(read_zones(tmp_path / "z.csv")) == 1

    def test_zones_tile_and_follow_curve(self, cliff_fun, tmp_path):
        export_zones(cliff_fun, tmp_path / "z.csv")
        rows = read_zones(tmp_path / "z.csv")
        area = sum((hi[0] - lo[0]) * (hi[1] - lo[1]) for lo, hi, _, _ in rows)
        assert area == pytest.approx(4.0, rel=1e-12)
        near = 0
        ys = np.linspace(-1, 1, 2001)
        for lo, hi, _, _ in rows:
            c = 0.5 * (np.array(lo) + np.array(hi))
            dist = np.min(np.hypot(-ys * ys - c[0], ys - c[1]))
            near += dist <= 0.1
        assert near >= 0.5 * len(rows)

    def test_field_round_trip(self, smooth_fun, tmp_path):
        axes = [np.linspace(-1, 1, 23), np.linspace(-1, 1, 17)]
        vals = export_field(smooth_fun, axes, tmp_path / "f.csv")
        X, v = read_field(tmp_path / "f.csv")
        assert np.array_equal(v, vals.ravel())
        assert np.array_equal(X[:, 0], np.repeat(axes[0], 17))

    def test_constant_field(self, tmp_path):
        fun = build(lambda x, y: 2.0 + 0 * x, Box.cube(2), BuildParams(N=17))
        export_field(fun, [np.linspace(-1, 1, 5)] * 2, tmp_path / "f.csv")
        _, v = read_field(tmp_path / "f.csv")
        assert np.all(v == v[0])


class TestCli:
    def test_run_csv_schema(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PUBENCH_OUT_DIR", str(tmp_path))
        assert main(["run", "table1", "--out", "r.csv"]) == EXIT_OK
        with open(tmp_path / "r.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == RunReport.columns()
        assert [r[0] for r in rows[1:]] == TABLE1

    def test_run_json(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["run", "table3", "--only", "g1-diamond", "--out", str(out)]) == EXIT_OK
        (row,) = json.loads(out.read_text())
        assert row["stored_points"] == 289

    def test_integrate(self, capsys):
        assert main(["integrate", "genz-gaussian-2d"]) == EXIT_OK
        out = capsys.readouterr().out
        rel = float(out.split("relative error")[1])
        assert rel <= 1e-11

    def test_diff_check(self, capsys):
        assert main(["diff", "cliff2d", "--dim", "1", "--check"]) == EXIT_OK
        out = capsys.readouterr().out
        assert float(out.split("discrepancy")[1].split()[0]) <= 1e-6

    def test_arith(self, capsys):
        assert main(["arith", "franke", "+", "runge", "--n", "65", "--tol", "1e-14"]) == EXIT_OK
        assert float(capsys.readouterr().out.split("grid")[-1]) <= 1e-12

    def test_zones_and_field(self, tmp_path):
        z, f = tmp_path / "z.csv", tmp_path / "f.csv"
        assert main(["zones", "franke", "--out", str(z)]) == EXIT_OK
        assert main(["field", "franke", "--grid", "20", "--out", str(f)]) == EXIT_OK
        assert len(read_zones(z)) > 1 and read_field(f)[1].size == 400

    def test_unknown_function(self, capsys):
        assert main(["integrate", "nosuch"]) == EXIT_INVALID
        assert "nosuch" in capsys.readouterr().err

    def test_unknown_suite(self):
        assert main(["run", "table9"]) == EXIT_INVALID

    def test_bad_dim(self):
        assert main(["diff", "franke", "--dim", "3"]) == EXIT_INVALID

    def test_limit_exit(self, tmp_path):
        assert main(["zones", "cliff2d", "--max-depth", "2", "--out", str(tmp_path / "z.csv")]) == EXIT_LIMIT

    def test_list(self, capsys):
        assert main(["list"]) == EXIT_OK
        assert "franke" in capsys.readouterr().out

    def test_plot(self, tmp_path):
        pytest.importorskip("matplotlib")
        z = tmp_path / "z.csv"
        assert main(["zones", "franke", "--out", str(z), "--plot"]) == EXIT_OK
        assert z.with_suffix(".png").stat().st_size > 0
