"""
Test cases for the geometry core
"""

import math
import unittest

import numpy as np

from src import config
from src.exceptions import DomainError, IntegrabilityError
from src.families import (EuclideanR4, FlatAF, FlatALF, Kerr, ReissnerNordstrom, Schwarzschild,
                          TaubBolt)
from src.geometry import (CurvatureOracle, FieldDump, HyperbolicPoint, PerturbedSampler,
                          alpha_from_phi, h2_distance, h2_energy_density, parse_fields,
                          reconstruct_torus_matrix, reduce_torus_matrix, scalar_curvature)
from src.geometry.field_io import dump_fields
from src.rods import AsymptoticClass


def bulk_points():
    rho, z = np.meshgrid([0.5, 1.7, 5.0], [-5.0, -1.3, 0.4, 2.2, 5.0])
    return rho.ravel(), z.ravel()


class TestReduction(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.rng = np.random.default_rng(2024)

    def test_identity(self):
        """Test G = rho I"""
        fields, point = reduce_torus_matrix(3.0 * np.eye(2), 3.0)
        self.assertAlmostEqual(float(fields.Z), 0.0, places=15)
        np.testing.assert_allclose(fields.Phi, np.eye(2), atol=1e-15)
        self.assertAlmostEqual(float(point.V), 0.0, places=15)
        self.assertAlmostEqual(float(point.W), 0.0, places=15)

    def test_euclidean(self):
        """Test the Euclidean torus matrix"""
        rho, z = bulk_points()
        G = EuclideanR4().torus_matrix(rho, z)
        fields, point = reduce_torus_matrix(G, rho)
        R = np.hypot(rho, z)
        np.testing.assert_allclose(fields.Z, 0.0, atol=1e-12)
        np.testing.assert_allclose(point.V, 0.5 * np.log((R - z) / (R + z)), atol=1e-10)
        np.testing.assert_allclose(point.W, 0.0, atol=1e-12)

    def test_kerr_round_trip(self):
        """Test reduce then reconstruct on Kerr with its twist"""
        kerr = Kerr(2.0, 1.0)
        rho, z = bulk_points()
        G = kerr.torus_matrix(rho, z)
        fields, point = reduce_torus_matrix(G, rho, kerr.beta_ell)
        rebuilt = reconstruct_torus_matrix(point, fields.Z, rho, kerr.beta_ell)
        for g, g2 in zip(G, rebuilt):
            self.assertLessEqual(np.linalg.norm(g - g2), 1e-12 * np.linalg.norm(g))

    def test_random_round_trip(self):
        """Test the round trip on random matrices for several twists"""
        n = 2000
        for beta_ell in (0.0, 0.5, -0.7):
            V = self.rng.uniform(-1, 1, n)
            W = self.rng.uniform(-1, 1, n)
            Z = self.rng.uniform(-1, 1, n)
            rho = self.rng.uniform(0.1, 10.0, n)
            G = reconstruct_torus_matrix(HyperbolicPoint(V, W), Z, rho, beta_ell)
            fields, point = reduce_torus_matrix(G, rho, beta_ell)
            G2 = reconstruct_torus_matrix(point, fields.Z, rho, beta_ell)
            err = np.linalg.norm(G - G2, axis=(-2, -1))
            self.assertTrue(np.all(err <= 1e-12 * np.linalg.norm(G, axis=(-2, -1))))
            np.testing.assert_allclose(point.V, V, atol=1e-12)
            np.testing.assert_allclose(point.W, W, atol=1e-12)

    def test_unit_determinant(self):
        """Test det Phi = 1 on 10^4 random samples"""
        n = 10000
        a = self.rng.uniform(0.2, 3.0, n)
        b = self.rng.uniform(0.2, 3.0, n)
        c = self.rng.uniform(-0.9, 0.9, n) * np.sqrt(a * b)
        G = np.stack([np.stack([a, c], -1), np.stack([c, b], -1)], -2)
        fields, _ = reduce_torus_matrix(G, self.rng.uniform(0.1, 5.0, n))
        self.assertLessEqual(float(np.max(np.abs(fields.det_phi - 1))), 1e-12)

    def test_twisted_inverse(self):
        """Test the twisted inverse at the origin of the hyperbolic plane"""
        G = reconstruct_torus_matrix(HyperbolicPoint(0.0, 0.0), 0.0, 1.0, 0.5)
        self.assertAlmostEqual(float(G[0, 0]), 1.0, places=15)
        self.assertAlmostEqual(float(G[0, 1]), 0.5, places=15)
        self.assertAlmostEqual(float(G[1, 1]), 1.25, places=15)

    def test_identity_reconstruction(self):
        """Test the untwisted inverse at the origin"""
        G = reconstruct_torus_matrix(HyperbolicPoint(0.0, 0.0), 0.0, 1.0)
        np.testing.assert_allclose(G, np.eye(2), atol=1e-15)

    def test_errors(self):
        """Test rejection of non-definite matrices and rho <= 0"""
        with self.assertRaises(DomainError):
            reduce_torus_matrix(np.diag([1.0, -1.0]), 1.0)
        with self.assertRaises(DomainError):
            reduce_torus_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)
        with self.assertRaises(DomainError):
            reduce_torus_matrix(np.eye(2), 0.0)


class TestHyperbolic(unittest.TestCase):
    def test_examples(self):
        """Test distances along the coordinate geodesics"""
        origin = HyperbolicPoint(0.0, 0.0)
        self.assertEqual(float(h2_distance(origin, origin)), 0.0)
        self.assertAlmostEqual(float(h2_distance(origin, HyperbolicPoint(1.0, 0.0))), 1.0, places=14)
        self.assertAlmostEqual(float(h2_distance(HyperbolicPoint(0.0, 1.0), HyperbolicPoint(0.0, -1.0))),
                               2.0, places=14)

    def test_metric_axioms(self):
        """Test symmetry and the triangle inequality on random triples"""
        rng = np.random.default_rng(11)
        p, q, s = (HyperbolicPoint(rng.uniform(-2, 2, 1000), rng.uniform(-2, 2, 1000)) for _ in range(3))
        pq, qp = h2_distance(p, q), h2_distance(q, p)
        np.testing.assert_allclose(pq, qp, rtol=1e-14)
        self.assertTrue(np.all(pq >= 0))
        self.assertTrue(np.all(pq <= h2_distance(p, s) + h2_distance(s, q) + 1e-12))

    def test_nearby_points(self):
        """Test the small-distance limit against the metric"""
        p = HyperbolicPoint(0.3, 1.0)
        q = HyperbolicPoint(0.3 + 1e-9, 1.0)
        self.assertAlmostEqual(float(h2_distance(p, q)) / 1e-9, math.cosh(1.0), places=6)

    def test_energy_density(self):
        """Test the energy density examples"""
        self.assertEqual(float(h2_energy_density([0.0, 0.0], [0.0, 0.0], 0.3)), 0.0)
        self.assertAlmostEqual(float(h2_energy_density([1.0, 0.0], [0.0, 0.0], 0.0)), 1.0, places=15)
        self.assertAlmostEqual(float(h2_energy_density([1.0, 0.0], [0.0, 0.0], 1.0)), math.cosh(1.0) ** 2,
                               places=14)


class TestScalarCurvature(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.order = config.SCALAR_CHECK_ORDER
        self.h = config.SCALAR_CHECK_STEP

    def test_flat_model(self):
        """Test that the AF model is flat"""
        rho, z = bulk_points()
        R = scalar_curvature(FlatAF(0.3, 2.0), rho, z, self.h, self.order)
        self.assertLessEqual(float(np.max(np.abs(R))), 1e-6)

    def test_flat_model_default_stencil(self):
        """Test the default second order stencil on the AF model"""
        R = scalar_curvature(FlatAF(0.0, 1.0), 1.0, 0.5)
        self.assertLessEqual(abs(float(R)), 1e-5)

    def test_taub_bolt(self):
        """Test that Taub-Bolt is scalar-flat"""
        rho, z = bulk_points()
        R = scalar_curvature(TaubBolt(2.0), rho, z, self.h, self.order)
        self.assertLessEqual(float(np.max(np.abs(R))), 1e-6)

    def test_reissner_nordstrom(self):
        """Test that Reissner-Nordstrom is scalar-flat"""
        rho, z = bulk_points()
        R = scalar_curvature(ReissnerNordstrom(1.0, -3.0), rho, z, self.h, self.order)
        self.assertLessEqual(float(np.max(np.abs(R))), 1e-6)

    def test_stencil_domain(self):
        """Test that stencils crossing the axis are rejected"""
        with self.assertRaises(DomainError):
            scalar_curvature(FlatAF(), 1e-3, 0.0, h=1e-3)


class TestCurvatureOracle(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.cases = [
            (FlatAF(0.3, 1.0), [(1.0, 1.0), (1.3, 1.4)]),
            (EuclideanR4(), [(1.5, 0.6), (1.3, 0.4)]),
            (Kerr(2.0, 1.0), [(2.2, 1.3), (2.6, 1.5)]),
        ]

    def test_perturbed_agreement(self):
        """Test finite differences against the 4-metric oracle on perturbed metrics"""
        for family, points in self.cases:
            sampler = PerturbedSampler(family, 0.1)
            oracle = CurvatureOracle(sampler)
            for r, theta in points:
                rho, z = oracle.brill_point(r, theta)
                expected = oracle.scalar_curvature(r, theta)
                R = float(scalar_curvature(sampler, rho, z, config.SCALAR_CHECK_STEP,
                                           config.SCALAR_CHECK_ORDER))
                self.assertAlmostEqual(R, expected, delta=1e-4, msg=f"{family.label()} at {(r, theta)}")

    def test_perturbation_is_visible(self):
        """Test that the perturbation produces curvature"""
        oracle = CurvatureOracle(PerturbedSampler(FlatAF(0.0, 1.0), 0.1))
        self.assertGreater(abs(oracle.scalar_curvature(1.0, 1.0)), 1e-2)

    def test_ricci_flat_family(self):
        """Test that the oracle sees no curvature on Schwarzschild"""
        oracle = CurvatureOracle(Schwarzschild(1.0))
        for r, theta in [(2.5, 0.7), (4.0, 2.0)]:
            self.assertAlmostEqual(oracle.scalar_curvature(r, theta), 0.0, delta=1e-9)

    def test_unmodified_alf_is_curved(self):
        """Test that both evaluations agree on the curved unmodified ALF model"""
        family = FlatALF(1, 1.0)
        oracle = CurvatureOracle(family)
        rho, z = oracle.brill_point(2.0, 1.0)
        expected = oracle.scalar_curvature(2.0, 1.0)
        self.assertGreater(abs(expected), 1e-4)
        R = float(scalar_curvature(family, rho, z, config.SCALAR_CHECK_STEP, config.SCALAR_CHECK_ORDER))
        self.assertAlmostEqual(R, expected, delta=1e-6)

    def test_numeric_derivatives(self):
        """Test the numerically differentiated oracle against the symbolic one"""
        sampler = PerturbedSampler(FlatAF(0.3, 1.0), 0.1)
        symbolic = CurvatureOracle(sampler).scalar_curvature(1.0, 1.0)
        numeric = CurvatureOracle(sampler, method='numeric').scalar_curvature(1.0, 1.0)
        self.assertAlmostEqual(numeric, symbolic, delta=1e-5)

    def test_second_order_convergence(self):
        """Test that halving h quarters the error of the second order stencil"""
        sampler = PerturbedSampler(FlatAF(0.0, 1.0), 0.1)
        oracle = CurvatureOracle(sampler)
        rho, z = oracle.brill_point(1.0, 1.0)
        exact = oracle.scalar_curvature(1.0, 1.0)
        coarse = abs(float(scalar_curvature(sampler, rho, z, 4e-2, order=2)) - exact)
        fine = abs(float(scalar_curvature(sampler, rho, z, 2e-2, order=2)) - exact)
        self.assertGreater(coarse / fine, 3.0)
        self.assertLess(coarse / fine, 5.0)


class TestAlphaFromPhi(unittest.TestCase):
    def test_flat_model(self):
        """Test that the AF model gives alpha = -log ell"""
        family = FlatAF(0.3, 2.0)
        result = alpha_from_phi(family, family.rod_data(), family.asymptotic_class(),
                                [1.0, 3.0], [0.5, -2.0])
        np.testing.assert_allclose(result.alpha, -math.log(2.0), atol=1e-10)

    def test_strongly_twisted_reference(self):
        """Test the ray integral to infinity on a strongly twisted AF end"""
        family = FlatAF(1.5, 2.0)
        result = alpha_from_phi(family, family.rod_data(), family.asymptotic_class(), [2.0], [1.0])
        self.assertAlmostEqual(result.reference_alpha, -math.log(2.0), delta=1e-10)
        np.testing.assert_allclose(result.alpha, -math.log(2.0), atol=1e-10)

    def test_euclidean(self):
        """Test the Euclidean conformal factor"""
        family = EuclideanR4()
        rho = np.array([0.5, 1.0, 2.5])
        z = np.array([1.0, -0.3, 2.0])
        result = alpha_from_phi(family, family.rod_data(), family.asymptotic_class(), rho, z)
        np.testing.assert_allclose(result.alpha, -0.5 * np.log(2 * np.hypot(rho, z)), atol=1e-8)

    def test_schwarzschild(self):
        """Test Schwarzschild against its closed-form alpha"""
        family = Schwarzschild(1.0)
        rho, z = np.meshgrid([0.5, 2.0, 5.0], [-3.0, 0.0, 3.0])
        result = alpha_from_phi(family, family.rod_data(), family.asymptotic_class(), rho, z)
        self.assertLessEqual(float(np.max(np.abs(result.alpha - family.alpha(rho, z)))), 1e-6)
        self.assertLessEqual(float(np.max(result.loop_gap)), 1e-8)

    def test_path_dependence(self):
        """Test that a non-harmonic field fails the loop test"""
        def torus_matrix(rho, z):
            R = np.hypot(rho, z)
            f = 0.5 * rho * z * np.exp(-(rho ** 2 + z ** 2) / 4)
            zero = np.zeros_like(R)
            return np.stack([np.stack([(R - z) * np.exp(f), zero], -1),
                             np.stack([zero, (R + z) * np.exp(-f)], -1)], -2)

        with self.assertRaises(IntegrabilityError):
            alpha_from_phi(torus_matrix, None, AsymptoticClass.ale(1, 0), [1.0], [1.0])

    def test_axis_rejected(self):
        """Test that axis points are rejected"""
        family = FlatAF()
        with self.assertRaises(DomainError):
            alpha_from_phi(family, family.rod_data(), family.asymptotic_class(), [0.0], [1.0])


class TestFieldIO(unittest.TestCase):
    def test_dump_and_parse(self):
        """Test that a dump keeps the grid shape and header"""
        rho, z = np.meshgrid([0.5, 1.0, 1.5], [-1.0, 1.0], indexing='ij')
        dump = FieldDump(rho=rho, z=z, V=rho * z, W=0 * rho, Z=0 * rho, alpha=-np.log(rho),
                         asymptotic_class='AF(0,4)', beta=0.0, ell=4.0)
        text = dump_fields(dump)
        self.assertTrue(text.startswith('# class=AF(0,4)'))
        loaded = parse_fields(text)
        self.assertEqual(loaded.shape, (3, 2))
        self.assertEqual(loaded.asymptotic_class, 'AF(0,4)')
        self.assertEqual(loaded.ell, 4.0)
        np.testing.assert_array_equal(loaded.alpha, dump.alpha)

    def test_bad_shape(self):
        """Test that a header shape that does not fit the rows is rejected"""
        text = "# shape=4x4\nrho,z,V,W,Z,alpha\n1,0,0,0,0,0\n"
        with self.assertRaises(DomainError):
            parse_fields(text)


if __name__ == '__main__':
    unittest.main()
