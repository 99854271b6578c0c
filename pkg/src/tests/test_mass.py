"""
Test cases for the mass engine
"""

import math
import unittest

import numpy as np

from src.exceptions import ClassMismatchError, DomainError
from src.families import (ChargedTaubBolt, EguchiHanson, FamilyParams, FlatAF, FlatALE, FlatALF, Kerr,
                          ReissnerNordstrom, Schwarzschild, TaubBolt, TaubNUT)
from src.mass import (estimate_mass, exact_density, infinity_flux, infinity_flux_limit, is_monotone,
                      mass_integrand, normalization_self_check, radial_sample, reduced_fields)
from src.rods import AsymptoticClass


class TestMassIntegrand(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.theta = np.array([0.3, math.pi / 2, 2.5])

    def test_model_against_itself(self):
        """Test that the density vanishes for g = b"""
        model = FlatAF(0.0, 4.0)
        cls = model.asymptotic_class()
        s = radial_sample(model, model, cls, 50.0, self.theta)
        for kind in ('exact', 'reduced'):
            np.testing.assert_allclose(mass_integrand(s, s, kind), 0.0, atol=1e-12)

    def test_difference_is_formed_first(self):
        """Test that twisted and ALE models give exactly zero against themselves"""
        for model in (FlatAF(0.3, 2.0), FlatALE(2, 1), FlatALF(2, 1.5, 0.0)):
            s = radial_sample(model, model, model.asymptotic_class(), 1e3, self.theta)
            self.assertEqual(float(np.max(np.abs(exact_density(s, s)))), 0.0, msg=model.label())

    def test_schwarzschild_leading_term(self):
        """Test that the Schwarzschild density approaches 2M/r^2"""
        family = Schwarzschild(1.0)
        model = family.model()
        cls = family.asymptotic_class()
        r = 1e3
        s_g = radial_sample(family, model, cls, r, self.theta)
        s_b = radial_sample(model, model, cls, r, self.theta)
        for kind in ('exact', 'reduced'):
            density = mass_integrand(s_g, s_b, kind)
            np.testing.assert_allclose(density * r ** 2 / 2.0, 1.0, rtol=1e-2, err_msg=kind)

    def test_taub_nut_twist_field(self):
        """Test V - V_b = ell/(2r) + O(r^-2) for Taub-NUT"""
        family = TaubNUT(2.0)
        model = FlatALF(1, 2.0)
        cls = family.asymptotic_class()
        r = 1e4
        theta = np.array([math.pi / 2])
        _, V, _, _, _, _ = reduced_fields(radial_sample(family, model, cls, r, theta))
        _, V_b, _, _, _, _ = reduced_fields(radial_sample(model, model, cls, r, theta))
        self.assertAlmostEqual(float((V - V_b)[0]) * r, 1.0, delta=1e-3)

    def test_class_mismatch(self):
        """Test that samples of different classes are rejected"""
        theta = np.array([1.0])
        af = FlatAF(0.0, 1.0)
        alf = FlatALF(1, 1.0)
        s_af = radial_sample(af, af, af.asymptotic_class(), 10.0, theta)
        s_alf = radial_sample(alf, alf, alf.asymptotic_class(), 10.0, theta)
        with self.assertRaises(ClassMismatchError):
            mass_integrand(s_af, s_alf)


class TestEstimateMass(unittest.TestCase):
    def test_schwarzschild(self):
        """Test Schwarzschild mass 16 pi"""
        estimate = estimate_mass(Schwarzschild(1.0))
        self.assertAlmostEqual(estimate.extrapolated / (16 * math.pi), 1.0, delta=1e-3)
        self.assertGreater(estimate.fit_exponent, 0.0)
        self.assertTrue(estimate.monotone)

    def test_schwarzschild_exact_density(self):
        """Test the exact flux density on Schwarzschild"""
        estimate = estimate_mass(Schwarzschild(1.0), integrand='exact')
        self.assertAlmostEqual(estimate.extrapolated / (16 * math.pi), 1.0, delta=1e-3)

    def test_taub_bolt(self):
        """Test Taub-Bolt mass 5 pi ell^2 / 4"""
        estimate = estimate_mass(TaubBolt(2.0))
        self.assertAlmostEqual(estimate.extrapolated / (5 * math.pi), 1.0, delta=1e-3)

    def test_charged_taub_bolt(self):
        """Test charged Taub-Bolt mass 4 pi ell c"""
        family = ChargedTaubBolt(1.0, 2.0)
        self.assertAlmostEqual(family.exact_mass(), 5 * math.pi, places=12)
        estimate = estimate_mass(family)
        self.assertAlmostEqual(estimate.extrapolated / (5 * math.pi), 1.0, delta=1e-3)

    def test_taub_nut(self):
        """Test Taub-NUT mass pi ell^2"""
        estimate = estimate_mass(TaubNUT(2.0))
        self.assertAlmostEqual(estimate.extrapolated / (4 * math.pi), 1.0, delta=1e-3)

    def test_kerr(self):
        """Test Kerr mass against both closed forms"""
        estimate = estimate_mass(Kerr(2.0, 1.0))
        self.assertAlmostEqual(estimate.extrapolated / (36 * math.pi / 5), 1.0, delta=1e-3)

    def test_reissner_nordstrom(self):
        """Test the negative Reissner-Nordstrom mass -2 pi at r_plus = 1, c1 = -3"""
        family = ReissnerNordstrom(1.0, -3.0)
        self.assertAlmostEqual(family.exact_mass(), -2 * math.pi, places=12)
        estimate = estimate_mass(family)
        self.assertAlmostEqual(estimate.extrapolated / (-2 * math.pi), 1.0, delta=1e-3)

    def test_flat_ale(self):
        """Test that the ALE model has zero mass"""
        estimate = estimate_mass(FlatALE(2, 1))
        self.assertEqual(estimate.extrapolated, 0.0)

    def test_eguchi_hanson(self):
        """Test that Eguchi-Hanson has zero mass"""
        estimate = estimate_mass(EguchiHanson(1.0), radii=(10.0, 20.0, 40.0, 80.0, 160.0))
        self.assertAlmostEqual(estimate.extrapolated, 0.0, delta=1e-5)

    def test_family_params(self):
        """Test estimation from validated parameters"""
        estimate = estimate_mass(FamilyParams(family='schwarzschild', M=1.0), radii=(1e2, 1e3, 1e4))
        self.assertAlmostEqual(estimate.extrapolated / (16 * math.pi), 1.0, delta=1e-3)

    def test_quadrature_converged(self):
        """Test that doubling the quadrature beyond 128 nodes changes nothing"""
        family = Schwarzschild(1.0)
        coarse = estimate_mass(family, quad_points=128).extrapolated
        fine = estimate_mass(family, quad_points=256).extrapolated
        self.assertAlmostEqual(coarse / fine, 1.0, delta=1e-6)

    def test_self_check(self):
        """Test the normalization self-check"""
        self.assertTrue(normalization_self_check())

    def test_errors(self):
        """Test rejected classes, quadratures and radii"""
        with self.assertRaises(ClassMismatchError):
            estimate_mass(Schwarzschild(1.0), AsymptoticClass.alf(1, 4.0))
        with self.assertRaises(DomainError):
            estimate_mass(Schwarzschild(1.0), quad_points=32)
        with self.assertRaises(DomainError):
            estimate_mass(Schwarzschild(1.0), radii=(1e3, 1e2, 1e4))

    def test_monotone(self):
        """Test the monotonicity check"""
        self.assertTrue(is_monotone([1.0, 2.0, 2.5, 2.6]))
        self.assertTrue(is_monotone([0.0, 0.0, 0.0]))
        self.assertFalse(is_monotone([1.0, 2.0, 1.5]))


class TestInfinityFlux(unittest.TestCase):
    def test_identical(self):
        """Test that the flux vanishes for g = g_o"""
        family = Kerr(2.0, 1.0)
        for r in (1e2, 1e3):
            self.assertEqual(infinity_flux(family, family, r), 0.0)

    def test_kerr_against_model(self):
        """Test the Kerr flux against twice its mass"""
        family = Kerr(2.0, 1.0)
        limit = infinity_flux_limit(family, family.model())
        self.assertAlmostEqual(limit.extrapolated / (72 * math.pi / 5), 1.0, delta=1e-3)

    def test_reissner_nordstrom_against_schwarzschild(self):
        """Test twice the mass difference of RN and Schwarzschild with the same ell"""
        rn = ReissnerNordstrom(1.0, -3.0)
        partner = Schwarzschild(math.sqrt(rn.M ** 2 - rn.c1), ell=rn.ell)
        expected = 2 * (rn.exact_mass() - partner.exact_mass())
        self.assertAlmostEqual(expected, -12 * math.pi, places=10)
        limit = infinity_flux_limit(rn, partner)
        self.assertAlmostEqual(limit.extrapolated / expected, 1.0, delta=1e-3)

    def test_class_mismatch(self):
        """Test that different classes are rejected"""
        with self.assertRaises(ClassMismatchError):
            infinity_flux(Schwarzschild(1.0), TaubNUT(4.0), 100.0)


if __name__ == '__main__':
    unittest.main()
