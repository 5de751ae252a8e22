from gapstress.elasticity import LameMaterial
from gapstress.geometry import InclusionShape, make_gap_geometry
from gapstress.bounds import BoundKind, BoundResult, KellerProfile, build_dual_stress, decay_ratio, dual_lower, energy_identity_check, expected_flux, flux_identity_check, keller_test_gradient, m_constant, normalized_energy, primal_upper, unit_loading
import numpy as np
import math, logging
import unittest
from spinner_runner import run_cases


class TestBounds(unittest.TestCase):
    def setUp(self):
        logging.disable(logging.CRITICAL)
        self.material = LameMaterial(1.0, 1.0)
        self.disk = InclusionShape.disk(1.0)
        self.geom = make_gap_geometry(self.disk, 1e-2, 1.5)

    def tearDown(self):
        logging.disable(logging.NOTSET)

    def test_m_constant(self):
        self.assertAlmostEqual(m_constant(self.material, 1.0, 1), 3 * math.pi, places=14)
        self.assertAlmostEqual(m_constant(self.material, 1.0, 2), math.pi, places=14)
        self.assertAlmostEqual(m_constant(self.material, 4.0, 2), math.pi / 2, places=14)
        with self.assertRaises(ValueError):
            unit_loading(0)

    def test_bound_result_validation(self):
        with self.assertRaises(ValueError):
            BoundResult(1, BoundKind.UPPER, math.inf, 0.0)
        with self.assertRaises(ValueError):
            BoundResult(1, BoundKind.LOWER, 1.0, 0.0, diagnostics={"bc_residual": -1.0})
        r = BoundResult(1, BoundKind.UPPER, 10.0, 0.5, eps=1e-4)
        self.assertAlmostEqual(r.scaled, 0.1, places=15)
        self.assertEqual(r.interval(), (9.5, 10.5))

    def test_keller_gradient_at_gap_center(self):
        prof = KellerProfile(self.geom)
        g = keller_test_gradient(prof, 1, (np.array([0.0]), np.array([0.0])))
        self.assertAlmostEqual(float(g.g11[0]), 100.0, places=10)
        self.assertEqual(float(g.g12[0]), 0.0)
        self.assertEqual(float(g.g21[0]), 0.0)
        g = keller_test_gradient(prof, 2, (np.array([0.0]), np.array([0.0])))
        self.assertAlmostEqual(float(g.g21[0]), 100.0, places=10)
        self.assertEqual(float(g.g11[0]), 0.0)

    def test_keller_plateau(self):
        prof = KellerProfile(self.geom)
        p = (np.array([0.35]), np.array([0.8]))
        self.assertLess(float(prof.halfwidth(0.8)), 0.35)
        self.assertEqual(float(prof.psi(p)[0]), 1.0)
        self.assertEqual(float(keller_test_gradient(prof, 1, p).norm()[0]), 0.0)
        self.assertEqual(float(prof.psi((np.array([-0.35]), np.array([0.8])))[0]), 0.0)

    def test_keller_boundary_values(self):
        g = self.geom
        prof = KellerProfile(g)
        ys = np.linspace(-g.L2, g.L2, 61)
        X = g.matrix_halfwidth(ys)
        np.testing.assert_array_less(prof.halfwidth(ys), X + 1e-15)
        np.testing.assert_allclose(prof.psi((X, ys)), 1.0)
        np.testing.assert_allclose(prof.psi((-X, ys)), 0.0)

    def test_keller_extension_is_continuous(self):
        prof = KellerProfile(self.geom)
        L = self.geom.L
        self.assertAlmostEqual(float(prof.halfwidth(L - 1e-12)), float(prof.halfwidth(L + 1e-12)), places=10)
        self.assertAlmostEqual(float(prof.halfwidth_derivative(L - 1e-9)), float(prof.halfwidth_derivative(L + 1e-9)), places=6)
        self.assertAlmostEqual(float(prof.halfwidth(prof.cap_height)), self.geom.L1, places=12)

    def test_upper_bound_constant(self):
        geom = make_gap_geometry(self.disk, 1e-4, 1.5)
        for j in (1, 2):
            upper = primal_upper(geom, self.material, j)
            ratio = upper.scaled / m_constant(self.material, 1.0, j)
            self.assertGreater(ratio, 0.98)
            self.assertLess(ratio, 1.05)
            self.assertTrue(upper.converged)
            self.assertAlmostEqual(math.fsum(upper.terms.values()), upper.value, delta=1e-9 * upper.value)
            self.assertGreater(upper.terms["neck"], upper.terms["extension"])

    def test_upper_bound_grows_as_gap_closes(self):
        values = [primal_upper(make_gap_geometry(self.disk, eps, 1.5), self.material, 2).value for eps in (1e-2, 1e-3, 1e-4)]
        self.assertLess(values[0], values[1])
        self.assertLess(values[1], values[2])

    def test_flux_identity(self):
        geom = make_gap_geometry(self.disk, 1e-3, 1.5)
        for i in (1, 2):
            for j in (1, 2):
                for k in (1, 2):
                    value = flux_identity_check(geom, self.material, i, j, k)
                    self.assertLess(abs(value - expected_flux(i, j, k)), 1e-6, f"i={i} j={j} k={k}")

    def test_energy_identity(self):
        for j in (1, 2):
            deviations = []
            for eps in (1e-4, 1e-5):
                geom = make_gap_geometry(self.disk, eps, 1.5)
                raw = energy_identity_check(geom, self.material, j)
                self.assertGreater(raw, 0.0)
                deviations.append(abs(normalized_energy(geom, self.material, j, raw) - 1))
            self.assertLess(deviations[0], 0.05)
            self.assertLess(deviations[1], deviations[0])

    def test_dual_stress_structure(self):
        geom = make_gap_geometry(self.disk, 1e-3, 1.5)
        for j in (1, 2):
            d = build_dual_stress(geom, self.material, j).diagnostics(points=300)
            self.assertLess(d["div_residual"], 1e-5)
            self.assertLess(d["div_residual_c"], 1e-6)
            self.assertLess(d["bc_residual"], 1e-8)
            self.assertGreaterEqual(d["asymmetry_max"], 0.0)
            self.assertLess(d["interp_residual"], 1e-8 * max(d["sigma_c_max"], 1.0))

    def test_correction_stays_bounded(self):
        sizes = [build_dual_stress(make_gap_geometry(self.disk, eps, 1.5), self.material, 1).diagnostics(points=200)["sigma_c_max"] for eps in (1e-3, 1e-4)]
        self.assertLess(max(sizes) / min(sizes), 2.0)

    def test_lower_bound_constant(self):
        geom = make_gap_geometry(self.disk, 1e-4, 1.5)
        for j in (1, 2):
            lower = dual_lower(geom, self.material, j, points=300)
            upper = primal_upper(geom, self.material, j)
            ratio = lower.scaled / m_constant(self.material, 1.0, j)
            self.assertGreater(ratio, 0.95)
            self.assertLess(ratio, 1.02)
            self.assertLessEqual(lower.value, upper.value + lower.quadrature_err + upper.quadrature_err)
            self.assertEqual(set(lower.terms), {"I", "II", "cross"})
            self.assertAlmostEqual(math.fsum(lower.terms.values()), lower.value, delta=1e-9 * abs(lower.value))

    def test_shear_does_not_depend_on_lambda(self):
        # only the leading term is free of lambda
        geom = make_gap_geometry(self.disk, 1e-4, 1.5)
        soft = primal_upper(geom, LameMaterial(1.0, 1.0), 2).value
        stiff = primal_upper(geom, LameMaterial(5.0, 1.0), 2).value
        self.assertGreaterEqual(stiff, soft)
        self.assertTrue(math.isclose(soft, stiff, rel_tol=0.05))

    def test_extension_scales_with_longitudinal_modulus(self):
        geom = make_gap_geometry(self.disk, 1e-4, 1.5)
        for material in (LameMaterial(1.0, 1.0), LameMaterial(3.0, 1.0)):
            target = m_constant(material, 1.0, 1)
            upper = primal_upper(geom, material, 1).scaled / target
            lower = dual_lower(geom, material, 1, points=200).scaled / target
            self.assertGreater(upper, 0.98)
            self.assertLess(upper, 1.05)
            self.assertGreater(lower, 0.95)
            self.assertLess(lower, 1.02)

    def test_singular_term_carries_the_leading_order(self):
        for j in (1, 2):
            target = m_constant(self.material, 1.0, j)
            leading, correction = [], []
            for eps in (1e-3, 1e-4, 1e-5):
                terms = dual_lower(make_gap_geometry(self.disk, eps, 1.5), self.material, j, points=200).terms
                leading.append(abs(terms["I"] * math.sqrt(eps) / target - 1))
                correction.append(abs(terms["II"]))
            self.assertLess(leading[1], 0.1)
            self.assertLess(leading[2], 0.05)
            self.assertLessEqual(correction[-1], 2 * correction[0] + 1.0)

    def test_curvature_scaling(self):
        # B/√2 doubles κ0 and divides the leading term by √2
        flat = make_gap_geometry(InclusionShape.ellipse(1.0, 1.0), 1e-5, 1.5)
        sharp = make_gap_geometry(InclusionShape.ellipse(1.0, 1 / math.sqrt(2)), 1e-5, 1.5)
        a = primal_upper(flat, self.material, 2).value
        b = primal_upper(sharp, self.material, 2).value
        self.assertTrue(math.isclose(a / b, math.sqrt(2), rel_tol=0.05))
        a = dual_lower(flat, self.material, 2, points=200).value
        b = dual_lower(sharp, self.material, 2, points=200).value
        self.assertTrue(math.isclose(a / b, math.sqrt(2), rel_tol=0.05))

    def test_decay_ratio_is_stable(self):
        # |q_j| on the top edge scales like √eps
        for j in (1, 2):
            ratios = [decay_ratio(make_gap_geometry(self.disk, eps, 1.5), self.material, j) for eps in (1e-2, 1e-3, 1e-4, 1e-5)]
            self.assertGreater(min(ratios), 0.0)
            self.assertLess(max(ratios), 1.0)
            self.assertLess(max(ratios) / min(ratios), 1.1, ratios)

    def runTest(self):
        run_cases(self, "Bounds")


if __name__ == "__main__":
    unittest.main()
