from gapstress.elasticity import LameMaterial
from gapstress.bounds import contour_flux
from gapstress.geometry import InclusionShape, make_gap_geometry
from gapstress.kernels import KernelContext, Nucleus, gradient_mismatch, kelvin_matrix, kernel_gradient, nucleus_field, singular_displacement, singular_field, singular_stress, stress_divergence
from hypothesis import given, settings, strategies as st
import numpy as np
import math, logging
import unittest
from spinner_runner import run_cases

radii = st.floats(0.1, 3.0)
angles = st.floats(0.0, 2 * math.pi)


class TestKernels(unittest.TestCase):
    def setUp(self):
        logging.disable(logging.CRITICAL)
        self.material = LameMaterial(1.0, 1.0)
        self.geom = make_gap_geometry(InclusionShape.disk(1.0), 1e-2, 1.5)
        self.ctx = KernelContext.from_geometry(self.geom, self.material)

    def tearDown(self):
        logging.disable(logging.NOTSET)

    def test_kelvin_matrix_on_axis(self):
        G = kelvin_matrix(np.array([1.0, 0.0]), self.material)
        self.assertAlmostEqual(float(G.g11), -1 / (6 * math.pi), places=15)
        self.assertEqual(float(G.g12), 0.0)
        self.assertEqual(float(G.g21), 0.0)
        self.assertEqual(float(G.g22), 0.0)

    def test_kelvin_matrix_off_axis(self):
        G = kelvin_matrix(np.array([0.0, 1.0]), self.material)
        self.assertEqual(float(G.g11), 0.0)
        self.assertAlmostEqual(float(G.g22), -1 / (6 * math.pi), places=15)

    def test_nucleus_gradient_examples(self):
        x = np.array([1.0, 0.0])
        g = kernel_gradient(Nucleus.RADIAL, x, self.material)
        self.assertEqual((float(g.g11), float(g.g12), float(g.g21), float(g.g22)), (-1.0, 0.0, 0.0, 1.0))
        g = kernel_gradient(Nucleus.ROTATIONAL, x, self.material)
        self.assertEqual((float(g.g11), float(g.g12), float(g.g21), float(g.g22)), (0.0, -1.0, -1.0, 0.0))
        with self.assertRaises(ValueError):
            kernel_gradient(Nucleus.RADIAL, np.array([0.0, 0.0]), self.material)

    def test_kelvin_matrix_is_even(self):
        x = np.array([0.3, -0.7])
        a, b = kelvin_matrix(x, self.material), kelvin_matrix(-x, self.material)
        self.assertEqual(float((a - b).norm()), 0.0)

    def test_kelvin_matrix_rejects_origin(self):
        with self.assertRaises(ValueError):
            kelvin_matrix(np.array([0.0, 0.0]), self.material)

    def test_radial_and_rotational_nuclei(self):
        radial = nucleus_field(Nucleus.RADIAL, self.material)(np.array([2.0, 0.0]))
        np.testing.assert_allclose(radial, [0.5, 0.0], atol=1e-15)
        rot = nucleus_field(Nucleus.ROTATIONAL, self.material)(np.array([2.0, 0.0]))
        np.testing.assert_allclose(rot, [0.0, 0.5], atol=1e-15)

    @settings(max_examples=200)
    @given(st.sampled_from(list(Nucleus)), radii, angles)
    def test_nucleus_gradient_matches_finite_differences(self, which, r, theta):
        field = nucleus_field(which, self.material)
        x = np.array([r * math.cos(theta), r * math.sin(theta)])
        self.assertLess(gradient_mismatch(field, x, 1e-6 * r), 1e-6)

    @settings(max_examples=200)
    @given(st.sampled_from([1, 2]), radii, angles)
    def test_singular_gradient_matches_finite_differences(self, j, r, theta):
        field = singular_field(self.ctx, j)
        x = np.array([r * math.cos(theta), r * math.sin(theta)])
        d = min(math.dist(x, self.ctx.p1), math.dist(x, self.ctx.p2))
        if d < 0.05:
            return
        self.assertLess(gradient_mismatch(field, x, 1e-4 * d), 1e-6)

    def test_singular_displacement_vanishes_at_gap_center(self):
        for j in (1, 2):
            q = singular_displacement(self.ctx, j, np.array([0.0, 0.0]))
            np.testing.assert_allclose(q, [0.0, 0.0], atol=1e-14)

    def test_singular_displacement_rejects_poles(self):
        for j in (1, 2):
            for p in (self.ctx.p1, self.ctx.p2):
                with self.assertRaises(ValueError):
                    singular_displacement(self.ctx, j, np.array(p))
        with self.assertRaises(ValueError):
            singular_displacement(self.ctx, 3, np.array([0.0, 0.5]))

    def test_no_shear_stress_on_the_axis(self):
        s = singular_stress(self.ctx, 1, np.array([0.0, 0.0]))
        self.assertAlmostEqual(float(s.a12), 0.0, places=12)

    def test_singular_stress_is_divergence_free(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform((-1.0, -1.5), (1.0, 1.5), size=(200, 2)).T
        d = np.minimum(np.hypot(pts[0] - self.ctx.p1[0], pts[1]), np.hypot(pts[0] - self.ctx.p2[0], pts[1]))
        pts, d = pts[:, d > 0.05], d[d > 0.05]
        for j in (1, 2):
            stress = lambda p: singular_stress(self.ctx, j, p)
            div = stress_divergence(stress, pts, 1e-4 * d)
            scale = stress(pts).norm()
            self.assertLess(float((np.hypot(div[0], div[1]) * d / scale).max()), 1e-4)

    def test_contour_flux_is_radius_independent(self):
        a = self.geom.a
        for j in (1, 2):
            expected = -np.eye(2)[j - 1]
            for radius in (0.5 * a, 0.9 * a):
                flux = contour_flux(self.geom, self.material, j, self.ctx.p2, radius)
                np.testing.assert_allclose(flux, expected, atol=1e-8)
            flux = contour_flux(self.geom, self.material, j, self.ctx.p1, 0.5 * a)
            np.testing.assert_allclose(flux, -expected, atol=1e-8)

    def test_kernel_context_validation(self):
        with self.assertRaises(ValueError):
            KernelContext.from_offset(self.material, 0.0)
        with self.assertRaises(ValueError):
            KernelContext(self.material, (-0.1, 0.0), (0.2, 0.0), 0.1)

    def runTest(self):
        run_cases(self, "Kernels")


if __name__ == "__main__":
    unittest.main()
