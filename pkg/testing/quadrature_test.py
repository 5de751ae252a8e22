from gapstress.geometry import InclusionShape, circle, make_gap_geometry
from gapstress.quadrature import CELL_SPEC, QuadratureError, QuadratureSpec, gauss_legendre, integrate_cell, integrate_interval, integrate_path
import numpy as np
import math, logging
import unittest
from spinner_runner import run_cases


class TestQuadrature(unittest.TestCase):
    def setUp(self):
        logging.disable(logging.CRITICAL)
        self.geom = make_gap_geometry(InclusionShape.disk(1.0), 0.01, 1.5)

    def tearDown(self):
        logging.disable(logging.NOTSET)

    def test_gauss_legendre_is_cached_and_read_only(self):
        t, w = gauss_legendre(8)
        self.assertIs(gauss_legendre(8)[0], t)
        self.assertAlmostEqual(float(w.sum()), 2.0, places=14)
        with self.assertRaises(ValueError):
            t[0] = 0.0

    def test_circle_perimeter(self):
        res = integrate_path(circle((0.3, -0.2), 1.0), lambda x, y, nx, ny: np.ones_like(x))
        self.assertAlmostEqual(res.value, 2 * math.pi, places=12)
        self.assertTrue(res.converged)

    def test_peaked_integrand(self):
        res = integrate_interval(lambda y: 1 / (0.01 + y * y), -1.0, 1.0, QuadratureSpec(rel_tol=1e-10))
        self.assertTrue(math.isclose(res.value, 20 * math.atan(10), rel_tol=1e-9))
        self.assertAlmostEqual(20 * math.atan(10), 29.42255, places=4)

    def test_reversed_interval_flips_sign(self):
        forward = integrate_interval(np.exp, 0.0, 1.0)
        backward = integrate_interval(np.exp, 1.0, 0.0)
        self.assertEqual(backward.value, -forward.value)
        self.assertAlmostEqual(forward.value, math.e - 1, places=13)
        self.assertEqual(integrate_interval(np.exp, 0.5, 0.5).value, 0.0)

    def test_vector_integrand(self):
        res = integrate_interval(lambda t: np.stack([t, t * t]), 0.0, 1.0)
        self.assertIsInstance(res.value, np.ndarray)
        np.testing.assert_allclose(res.value, [0.5, 1 / 3], rtol=1e-13)

    def test_cell_area(self):
        res = integrate_cell(self.geom, lambda x, y: np.ones_like(x), QuadratureSpec(rel_tol=1e-9))
        self.assertTrue(math.isclose(res.value, 4 * 1.005 * 1.5 - math.pi, rel_tol=1e-7))
        self.assertAlmostEqual(res.value, 2.88841, places=4)

    def test_zero_integrand(self):
        res = integrate_cell(self.geom, lambda x, y: np.zeros_like(x))
        self.assertEqual(res.value, 0.0)
        self.assertTrue(res.converged)

    def test_neck_strip_by_rows(self):
        # ∫_{|y|<L} 2X(y) dy over the strip, with support equal to X inside the neck only
        g = self.geom
        neck = lambda y: np.where(np.abs(np.asarray(y)) < g.L, g.matrix_halfwidth(y), 0.0)
        spec = QuadratureSpec(rel_tol=1e-10)
        area = integrate_cell(g, lambda x, y: np.ones_like(x), spec, support=neck, breaks_y=[g.L])
        rows = integrate_interval(lambda y: 2 * g.matrix_halfwidth(y), -g.L, g.L, spec, breakpoints=[0.0])
        self.assertTrue(math.isclose(area.value, rows.value, rel_tol=1e-8))

    def test_second_moment(self):
        g = self.geom
        spec = QuadratureSpec(rel_tol=1e-8)
        res = integrate_cell(g, lambda x, y: x * x, spec)
        rows = integrate_interval(lambda y: 2 * g.matrix_halfwidth(y) ** 3 / 3, -g.L2, g.L2, spec, breakpoints=[-g.B, 0.0, g.B])
        self.assertTrue(math.isclose(res.value, rows.value, rel_tol=1e-6))

    def test_deterministic(self):
        fn = lambda x, y: 1 / (0.01 + x * x + y * y)
        a = integrate_cell(self.geom, fn)
        b = integrate_cell(self.geom, fn)
        self.assertEqual(a.value, b.value)
        self.assertEqual(a.panels_used, b.panels_used)

    def test_tightening_refines(self):
        fn = lambda x, y: 1 / (0.01 + x * x + y * y)
        coarse = integrate_cell(self.geom, fn, QuadratureSpec(rel_tol=1e-4))
        fine = integrate_cell(self.geom, fn, QuadratureSpec(rel_tol=1e-4).tightened(1e4))
        self.assertGreaterEqual(fine.panels_used, coarse.panels_used)
        self.assertLess(fine.err_estimate, coarse.err_estimate + 1e-300)
        self.assertTrue(math.isclose(coarse.value, fine.value, rel_tol=1e-3))

    def test_narrow_gap(self):
        narrow = make_gap_geometry(InclusionShape.disk(1.0), 1e-5, 1.5)
        self.assertGreater(len(narrow.y_breakpoints()), len(self.geom.y_breakpoints()))
        res = integrate_cell(narrow, lambda x, y: np.ones_like(x), CELL_SPEC)
        self.assertTrue(res.converged)
        self.assertTrue(math.isclose(res.value, narrow.area, rel_tol=1e-5))
        # 1/(2X) integrates to 1 along every row
        res = integrate_cell(narrow, lambda x, y: 1 / (2 * narrow.matrix_halfwidth(y)), CELL_SPEC)
        self.assertTrue(math.isclose(res.value, 2 * narrow.L2, rel_tol=1e-5))

    def test_non_finite_values_raise(self):
        with self.assertRaises(QuadratureError):
            integrate_interval(lambda t: np.full_like(t, np.nan), 0.0, 1.0)

    def test_budget_exhaustion(self):
        fn = lambda x, y: 1 / (1e-6 + x * x + y * y)
        with self.assertRaises(QuadratureError):
            integrate_cell(self.geom, fn, QuadratureSpec(rel_tol=1e-12, max_panels=1, strict=True))
        res = integrate_cell(self.geom, fn, QuadratureSpec(rel_tol=1e-12, max_panels=1))
        self.assertFalse(res.converged)

    def test_spec_validation(self):
        for kwargs in [{"rel_tol": 0.0}, {"abs_tol": -1.0}, {"max_depth": 0}, {"base_order": 1}, {"max_panels": 0}]:
            with self.assertRaises(ValueError):
                QuadratureSpec(**kwargs)
        self.assertEqual(QuadratureSpec(base_order=8).high_order, 12)
        self.assertEqual(QuadratureSpec(base_order=2).high_order, 4)

    def runTest(self):
        run_cases(self, "Quadrature")


if __name__ == "__main__":
    unittest.main()
