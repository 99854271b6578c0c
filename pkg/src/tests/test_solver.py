"""
Test cases for the harmonic map solver and its energies
"""

import math
import os
import tempfile
import time
import unittest

import numpy as np
from pydantic import ValidationError

from src import config
from src.exceptions import ClassMismatchError, ConvergenceError, DomainError
from src.families import EguchiHanson, FlatAF, FlatALE, Kerr, ReissnerNordstrom, Schwarzschild
from src.geometry import HyperbolicPoint, PerturbedSampler, reduce_torus_matrix
from src.geometry.hyperbolic import h2_distance
from src.rods import AsymptoticClass, RodStructure
from src.solver import (TIE_U, TIE_W, PINNED, HyperbolicField, Margins, Region, SolverConfig, SolverGrid,
                        build_model_map, convexity_gap_check, corner_matrix, discrete_energy, divergence_identity_check,
                        energy, load_checkpoint, model_field, parse_grid, reduced_energy, relax, residual,
                        residual_norm, sample_field, save_checkpoint, smooth_step, z_partition)

SMALL = dict(n_rho=17, n_z=33, rho_max=12.0, z_max=12.0, omega=1.5, max_sweeps=20000)


def bump(grid: SolverGrid, amplitude: float, rho_c: float, z_c: float, radius: float) -> np.ndarray:
    """Compactly supported (1 - r^2/radius^2)^3 bump"""
    rho, z = grid.mesh()
    s = ((rho - rho_c) ** 2 + (z - z_c) ** 2) / radius ** 2
    return amplitude * np.where(s < 1, (1 - s) ** 3, 0.0)


def perturbed(fld: HyperbolicField, du=0.0, dw=0.0) -> HyperbolicField:
    return HyperbolicField(fld.grid, fld.model, fld.u + du, fld.w + dw)


class TestSolverGrid(unittest.TestCase):
    def test_graded_grid(self):
        """Test that the graded grid starts on the axis and clusters there"""
        grid = SolverConfig(**SMALL).grid()
        self.assertEqual(grid.shape, (17, 33))
        self.assertEqual(grid.rho[0], 0.0)
        self.assertAlmostEqual(grid.rho[-1], 12.0)
        self.assertLess(grid.rho[1] - grid.rho[0], grid.rho[-1] - grid.rho[-2])
        self.assertIn(0.0, grid.z)

    def test_refined(self):
        """Test that refinement halves every interval"""
        grid = SolverGrid.graded(5, 7, 4.0, 3.0)
        fine = grid.refined()
        self.assertEqual(fine.shape, (9, 13))
        np.testing.assert_array_equal(fine.rho[::2], grid.rho)
        np.testing.assert_array_equal(fine.z[::2], grid.z)

    def test_config_validation(self):
        """Test rejected solver settings"""
        with self.assertRaises(ValidationError):
            SolverConfig(n_z=32)
        with self.assertRaises(ValidationError):
            SolverConfig(omega=2.0)
        with self.assertRaises(ValidationError):
            SolverConfig(tolerance=0.0)
        with self.assertRaises(DomainError):
            SolverGrid(np.array([0.1, 1.0, 2.0]), np.array([-1.0, 0.0, 1.0]))

    def test_parse_grid(self):
        """Test NxM grid strings"""
        self.assertEqual(parse_grid('129x257'), (129, 257))
        with self.assertRaises(DomainError):
            parse_grid('129')


class TestModelMap(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        rng = np.random.default_rng(3)
        self.rho = rng.uniform(0.05, 8.0, 50)
        self.z = rng.uniform(-8.0, 8.0, 50)

    def test_af0_model(self):
        """Test V = log(rho / ell^2), W = 0 for the AF_0 model"""
        flat = FlatAF(0.0, 2.0)
        model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        V, W = model.values(self.rho, self.z)
        np.testing.assert_allclose(V, np.log(self.rho / 4.0), atol=1e-12)
        np.testing.assert_array_equal(W, 0.0)

    def test_schwarzschild_model_is_exact(self):
        """Test that the rod potentials reproduce the Schwarzschild map"""
        family = Schwarzschild(1.0)
        model = build_model_map(family.rod_data(), family.asymptotic_class())
        _, exact = reduce_torus_matrix(family.sample_brill(self.rho, self.z).G, self.rho)
        V, W = model.values(self.rho, self.z)
        np.testing.assert_allclose(V, exact.V, atol=1e-10)
        np.testing.assert_allclose(W, exact.W, atol=1e-12)

    def test_rn_rods_give_schwarzschild_model(self):
        """Test that RN rod data is modelled by the Schwarzschild map with the same rods"""
        rn = ReissnerNordstrom(1.0, -3.0)
        partner = Schwarzschild(2.0, ell=rn.ell)
        model = build_model_map(rn.rod_data(), rn.asymptotic_class())
        _, exact = reduce_torus_matrix(partner.sample_brill(self.rho, self.z).G, self.rho)
        V, _ = model.values(self.rho, self.z)
        np.testing.assert_allclose(V, exact.V, atol=1e-10)

    def test_class_mismatch(self):
        """Test that semi-infinite rods must match the class"""
        family = Schwarzschild(1.0)
        with self.assertRaises(ClassMismatchError):
            build_model_map(family.rod_data(), AsymptoticClass.ale(1, 1))

    def test_twisted_rods_without_family(self):
        """Test that twisted data is blended from corner models unless an exact geometry is given"""
        kerr = Kerr(2.0, 1.0)
        model = build_model_map(kerr.rod_data(), kerr.asymptotic_class())
        self.assertEqual(model.source, 'blend')
        V, W = model.values(self.rho, self.z)
        self.assertTrue(np.all(np.isfinite(V)) and np.all(np.isfinite(W)))
        model = build_model_map(kerr.rod_data(), kerr.asymptotic_class(), family=kerr)
        self.assertEqual(model.source, f"family:{kerr.key}")

    def test_diagonal_family_uses_rod_potentials(self):
        """Test that a static diagonal family keeps the harmonic rod potential map"""
        family = Schwarzschild(1.0)
        model = build_model_map(family.rod_data(), family.asymptotic_class(), family=family)
        self.assertEqual(model.source, 'weyl')
        self.assertTrue(model.harmonic)
        self.assertIs(model.family, family)

    def test_blend_matches_exact_singularities(self):
        """Test that the blended Eguchi-Hanson map differs from the exact one by a bounded amount on every rod"""
        eh = EguchiHanson(1.0)
        model = build_model_map(eh.rod_data(), eh.asymptotic_class())
        self.assertEqual(model.source, 'blend')
        for zz in (-1.0, 0.0, 1.0):
            rho = np.array([1e-3, 1e-4])
            z = np.full(2, zz)
            V, W = model.values(rho, z)
            _, exact = reduce_torus_matrix(eh.sample_brill(rho, z).G, rho)
            dV, dW = V - exact.V, W - exact.W
            self.assertLess(abs(dV[1] - dV[0]), 1e-2, msg=f"z={zz}")
            self.assertLess(abs(dW[1] - dW[0]), 1e-2, msg=f"z={zz}")
            self.assertGreater(max(abs(V[1] - V[0]), abs(W[1] - W[0])), 2.0, msg=f"z={zz}")

    def test_blend_is_flat_model_far_out(self):
        """Test that the blended map is the flat ALE map beyond the hand-over radius"""
        eh = EguchiHanson(1.0)
        model = build_model_map(eh.rod_data(), eh.asymptotic_class())
        rho, z = np.array([3.0, 10.0, 0.5]), np.array([5.0, -2.0, 8.0])
        V, W = model.values(rho, z)
        _, flat = reduce_torus_matrix(FlatALE(2, 1).sample_brill(rho, z).G, rho)
        np.testing.assert_allclose(V, flat.V, atol=1e-12)
        np.testing.assert_allclose(W, flat.W, atol=1e-12)

    def test_corner_matrix(self):
        """Test det G = rho^2 and the axis kernels of a corner model"""
        below, above = RodStructure(1, 0), RodStructure(2, -1)
        G = corner_matrix(below, above, 0.5, self.rho, self.z)
        np.testing.assert_allclose(np.linalg.det(G), self.rho ** 2, rtol=1e-9)
        on_axis = corner_matrix(below, above, 0.5, np.array([1e-6, 1e-6]), np.array([-1.0, 2.0]))
        np.testing.assert_allclose(on_axis[0] @ np.array([1.0, 0.0]), 0.0, atol=1e-10)
        np.testing.assert_allclose(on_axis[1] @ np.array([2.0, -1.0]), 0.0, atol=1e-10)
        with self.assertRaises(DomainError):
            corner_matrix(below, RodStructure(1, 2), 0.0, self.rho, self.z)

    def test_z_partition(self):
        """Test that the corner weights are a partition of unity"""
        z = np.linspace(-3.0, 3.0, 121)
        weights = z_partition((-1.0, 0.5, 2.0), z)
        np.testing.assert_allclose(np.sum(weights, axis=0), 1.0, atol=1e-14)
        self.assertTrue(all(np.all(w >= 0.0) for w in weights))
        self.assertEqual(float(weights[0][z <= -1.0].min()), 1.0)
        self.assertEqual(float(weights[2][z >= 2.0].min()), 1.0)
        self.assertEqual(smooth_step(0.0), 0.0)
        self.assertEqual(smooth_step(1.0), 1.0)

    def test_axis_rejected(self):
        """Test that the model is not evaluated on the axis"""
        flat = FlatAF(0.0, 1.0)
        model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        with self.assertRaises(DomainError):
            model.values(np.array([0.0]), np.array([1.0]))


class TestHyperbolicField(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.family = Schwarzschild(1.0)
        self.model = build_model_map(self.family.rod_data(), self.family.asymptotic_class())
        self.grid = SolverConfig(**SMALL).grid()

    def test_axis_kinds(self):
        """Test axis conditions per column"""
        # turning points at +-9, which are grid columns
        family = Schwarzschild(1.5)
        model = build_model_map(family.rod_data(), family.asymptotic_class())
        fld = model_field(self.grid, model)
        kinds = dict(zip(self.grid.z, fld.kinds))
        self.assertEqual(kinds[0.0], TIE_U)
        self.assertEqual(kinds[-12.0], TIE_U)
        self.assertEqual(kinds[9.0], PINNED)
        self.assertEqual(kinds[-9.0], PINNED)
        self.assertNotIn(TIE_W, fld.kinds)

    def test_axis_row_follows_first_row(self):
        """Test tied and pinned axis values"""
        rng = np.random.default_rng(5)
        fld = HyperbolicField(self.grid, self.model, rng.normal(size=self.grid.shape),
                              rng.normal(size=self.grid.shape))
        tie_u = fld.kinds == TIE_U
        np.testing.assert_array_equal(fld.u[0][tie_u], fld.u[1][tie_u])
        np.testing.assert_array_equal(fld.w[0][tie_u], 0.0)
        np.testing.assert_array_equal(fld.u[0][~tie_u], 0.0)

    def test_sampled_exact_field(self):
        """Test that the exact geometry differs from its own model only by roundoff"""
        fld = sample_field(self.family, self.grid, self.model)
        np.testing.assert_allclose(fld.u, 0.0, atol=1e-9)
        np.testing.assert_allclose(fld.w, 0.0, atol=1e-12)

    def test_non_finite_rejected(self):
        """Test that differences must be finite"""
        u = np.zeros(self.grid.shape)
        u[3, 3] = np.nan
        with self.assertRaises(DomainError):
            HyperbolicField(self.grid, self.model, u, np.zeros(self.grid.shape))

    def test_checkpoint_round_trip(self):
        """Test that a checkpoint restores the grid and the field"""
        fld = perturbed(model_field(self.grid, self.model), du=bump(self.grid, 0.1, 4.0, 1.0, 2.0))
        with tempfile.TemporaryDirectory() as tmp:
            path = save_checkpoint(fld, os.path.join(tmp, 'field.csv'))
            loaded = load_checkpoint(path, self.model)
        self.assertTrue(loaded.grid.same_as(self.grid))
        np.testing.assert_allclose(loaded.u, fld.u, atol=1e-12)
        np.testing.assert_allclose(loaded.w, fld.w, atol=1e-12)


class TestResidual(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        flat = FlatAF(0.0, 1.0)
        self.model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        self.grid = SolverConfig(**SMALL).grid()

    def test_log_rho_is_harmonic(self):
        """Test that V = log rho has a vanishing discrete residual"""
        R_V, R_W = residual(model_field(self.grid, self.model))
        self.assertLess(np.max(np.abs(R_V)), 1e-7)
        np.testing.assert_array_equal(R_W, 0.0)

    def test_bump_residual_is_local(self):
        """Test that a compact perturbation only disturbs the residual near its support"""
        du = bump(self.grid, 0.2, 6.0, 0.0, 2.0)
        R_V, _ = residual(perturbed(model_field(self.grid, self.model), du=du))
        rho, z = self.grid.mesh()
        far = np.hypot(rho - 6.0, z) > 3.6
        self.assertGreater(np.max(np.abs(R_V[~far])), 1e-3)
        self.assertLess(np.max(np.abs(R_V[far])), 1e-7)

    def test_schwarzschild_is_discrete_solution(self):
        """Test that the sampled Schwarzschild map solves the discrete equations with its rod potential model"""
        family = Schwarzschild(1.0)
        model = build_model_map(family.rod_data(), family.asymptotic_class())
        R_V, R_W = residual(sample_field(family, self.grid, model))
        self.assertLess(np.max(np.abs(R_V)), 1e-5)
        np.testing.assert_array_equal(R_W, 0.0)

    @unittest.skipUnless(config.SLOW_TESTS, "set IML_SLOW_TESTS=1 for refinement studies")
    def test_second_order(self):
        """Test that halving the mesh quarters the Kerr residual away from the axis"""
        family = Kerr(2.0, 1.0)
        model = build_model_map(family.rod_data(), family.asymptotic_class(), family=family)
        sups = []
        for n_rho, n_z in ((33, 65), (65, 129)):
            grid = SolverGrid.graded(n_rho, n_z, 20.0, 20.0)
            R_V, R_W = residual(sample_field(family, grid, model))
            rho, _ = grid.mesh()
            far = rho >= 0.5
            sups.append(max(np.max(np.abs(R_V[far])), np.max(np.abs(R_W[far]))))
        self.assertGreater(sups[0] / sups[1], 3.0)


class TestRelax(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.family = Schwarzschild(1.0)
        self.model = build_model_map(self.family.rod_data(), self.family.asymptotic_class())
        self.cfg = SolverConfig(tolerance=1e-9, **SMALL)
        self.grid = self.cfg.grid()

    def test_perturbation_relaxes_back(self):
        """Test that a perturbed Schwarzschild start converges to the same discrete map"""
        exact = sample_field(self.family, self.grid, self.model)
        base = relax(exact, self.cfg)
        start = perturbed(exact, du=bump(self.grid, 0.1, 4.0, 2.0, 3.0))
        result = relax(start, self.cfg)
        self.assertTrue(result.diagnostics.converged)
        self.assertLessEqual(result.diagnostics.residual, 1e-9)
        self.assertLess(np.max(h2_distance(result.point(), base.point())), 1e-6)
        self.assertLess(np.max(h2_distance(result.point(), exact.point())), 1e-4)

    def test_energy_history_is_monotone(self):
        """Test that every sweep lowers the discrete energy"""
        start = perturbed(sample_field(self.family, self.grid, self.model),
                          du=bump(self.grid, 0.3, 3.0, -1.0, 3.0))
        result = relax(start, self.cfg)
        history = result.diagnostics.energy_history
        self.assertAlmostEqual(history[0], discrete_energy(start), delta=1e-12 * max(1.0, abs(history[0])))
        for before, after in zip(history[:-1], history[1:]):
            self.assertLessEqual(after, before + config.SOLVER_ENERGY_SLACK * max(1.0, abs(before)))
        self.assertLess(history[-1], history[0])

    def test_af0_model_is_fixed_point(self):
        """Test that the AF_0 model needs no sweeps"""
        flat = FlatAF(0.0, 1.0)
        model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        result = relax(model_field(self.grid, model), SolverConfig(tolerance=1e-7, **SMALL))
        self.assertLessEqual(result.diagnostics.sweeps, 1)
        np.testing.assert_allclose(result.u, 0.0, atol=1e-8)

    def test_kerr_descent(self):
        """Test monotone energy for a perturbed Kerr start with twisted axis data"""
        kerr = Kerr(2.0, 1.0)
        model = build_model_map(kerr.rod_data(), kerr.asymptotic_class(), family=kerr)
        start = sample_field(kerr, self.grid, model)
        self.assertIn(TIE_W, start.kinds)
        start = perturbed(start, du=bump(self.grid, 0.05, 3.0, 0.0, 2.5), dw=bump(self.grid, 0.05, 4.0, 1.0, 2.5))
        cfg = SolverConfig(**{**SMALL, 'max_sweeps': 30, 'tolerance': 1e-14})
        try:
            history = relax(start, cfg).diagnostics.energy_history
        except ConvergenceError as e:
            history = e.diagnostics['energy_history']
            self.assertIn('field', e.diagnostics)
        for before, after in zip(history[:-1], history[1:]):
            self.assertLessEqual(after, before + config.SOLVER_ENERGY_SLACK * max(1.0, abs(before)))
        self.assertLess(history[-1], history[0])

    def test_non_convergence_reports_best_iterate(self):
        """Test that running out of sweeps raises with diagnostics"""
        start = perturbed(sample_field(self.family, self.grid, self.model),
                          du=bump(self.grid, 0.1, 4.0, 2.0, 3.0))
        cfg = SolverConfig(**{**SMALL, 'max_sweeps': 2, 'tolerance': 1e-12})
        with self.assertRaises(ConvergenceError) as ctx:
            relax(start, cfg)
        diagnostics = ctx.exception.diagnostics
        self.assertEqual(diagnostics['sweeps'], 2)
        self.assertIsInstance(diagnostics['field'], HyperbolicField)
        self.assertLessEqual(diagnostics['best_residual'], residual_norm(start))

    @unittest.skipUnless(config.SLOW_TESTS, "set IML_SLOW_TESTS=1 for the full-size solve")
    def test_full_size_solve(self):
        """Test convergence back to exact Schwarzschild on the 129x257 grid within a minute"""
        cfg = SolverConfig(n_rho=129, n_z=257, rho_max=20.0, z_max=20.0, omega=1.975,
                           tolerance=1e-8, max_sweeps=10000)
        grid = cfg.grid()
        exact = sample_field(self.family, grid, self.model)
        start = perturbed(exact, du=bump(grid, 0.1, 4.0, 2.0, 3.0))
        began = time.perf_counter()
        result = relax(start, cfg)
        elapsed = time.perf_counter() - began
        self.assertLessEqual(result.diagnostics.residual, 1e-8)
        self.assertLessEqual(result.diagnostics.sweeps, 10000)
        self.assertLessEqual(np.max(h2_distance(result.point(), exact.point())), 1e-4)
        self.assertLessEqual(elapsed, 60.0)
        history = result.diagnostics.energy_history
        for before, after in zip(history[:-1], history[1:]):
            self.assertLessEqual(after, before + config.SOLVER_ENERGY_SLACK * max(1.0, abs(before)))

    @unittest.skipUnless(config.SLOW_TESTS, "set IML_SLOW_TESTS=1 for refinement studies")
    def test_refinement_order(self):
        """Test that the discrete RN-data solution converges at second order under mesh halving"""
        rn = ReissnerNordstrom(1.0, -3.0)
        model = build_model_map(rn.rod_data(), rn.asymptotic_class())

        def solve(n_rho, n_z):
            cfg = SolverConfig(n_rho=n_rho, n_z=n_z, rho_max=20.0, z_max=20.0,
                               omega=2.0 / (1.0 + math.pi / (n_z - 1)), tolerance=1e-10, max_sweeps=20000)
            return relax(sample_field(rn, cfg.grid(), model), cfg).point()

        def gap(coarse, fine):
            return float(np.max(h2_distance(coarse, HyperbolicPoint(fine.V[1::2, ::2], fine.W[1::2, ::2]))))

        coarse, mid, fine = solve(65, 129), solve(129, 257), solve(257, 513)
        ratio = gap(coarse, mid) / gap(mid, fine)
        self.assertGreater(ratio, 2.5)
        self.assertLess(ratio, 6.0)

    def test_blended_model_descent(self):
        """Test monotone energy for Eguchi-Hanson rods relaxed from their blended model map"""
        eh = EguchiHanson(1.0)
        model = build_model_map(eh.rod_data(), eh.asymptotic_class())
        start = perturbed(model_field(self.grid, model), du=bump(self.grid, 0.05, 3.0, 0.0, 2.5))
        self.assertIn(TIE_W, start.kinds)
        cfg = SolverConfig(**{**SMALL, 'max_sweeps': 30, 'tolerance': 1e-14})
        try:
            history = relax(start, cfg).diagnostics.energy_history
        except ConvergenceError as e:
            history = e.diagnostics['energy_history']
        for before, after in zip(history[:-1], history[1:]):
            self.assertLessEqual(after, before + config.SOLVER_ENERGY_SLACK * max(1.0, abs(before)))
        self.assertLess(history[-1], history[0])


class TestEnergy(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        flat = FlatAF(0.0, 1.0)
        self.model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        self.grid = SolverGrid(np.linspace(0.0, 4.0, 41), np.linspace(-2.0, 2.0, 41))
        self.region = Region(1.0, 2.0, 0.0, 1.0)

    def test_log_rho_energy(self):
        """Test the energy of V = log rho on [1, 2] x [0, 1]"""
        value = energy(model_field(self.grid, self.model), self.region)
        self.assertAlmostEqual(value / (math.pi * math.log(2.0)), 1.0, delta=2e-3)

    def test_constant_map(self):
        """Test that a constant map has no energy"""
        fld = sample_field(lambda r, z: (np.full_like(r, 0.3), np.zeros_like(r)), self.grid, self.model)
        self.assertLess(energy(fld, self.region), 1e-4)

    def test_region_touching_axis(self):
        """Test that regions must avoid the axis"""
        with self.assertRaises(DomainError):
            Region(0.0)

    def test_schwarzschild_energy_grows_toward_axis(self):
        """Test finite energies that grow as the margin shrinks"""
        family = Schwarzschild(1.0)
        model = build_model_map(family.rod_data(), family.asymptotic_class())
        fld = model_field(SolverConfig(**SMALL).grid(), model)
        outer = energy(fld, Region(0.5))
        inner = energy(fld, Region(0.05))
        self.assertTrue(np.isfinite(inner))
        self.assertGreater(outer, 0.0)
        self.assertGreater(inner, outer)


class TestReducedEnergy(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        flat = FlatAF(0.0, 1.0)
        model = build_model_map(flat.rod_data(), flat.asymptotic_class())
        self.cfg = SolverConfig(tolerance=1e-11, **SMALL)
        self.psi_o = relax(model_field(self.cfg.grid(), model), self.cfg)
        self.grid = self.psi_o.grid
        self.margins = [Margins(0.1, 0.1, 50.0), Margins(0.01, 0.03, 100.0)]

    def test_reference_against_itself(self):
        """Test zero reduced energy and distance for psi = psi_o"""
        report = reduced_energy(self.psi_o, self.psi_o, self.margins)
        self.assertEqual(report.values, [0.0, 0.0])
        self.assertEqual(convexity_gap_check(self.psi_o, self.psi_o, self.margins), (0.0, 0.0))

    def test_bump_second_variation(self):
        """Test positive, margin-stable and quadratic reduced energy of a compact bump"""
        du = bump(self.grid, 0.05, 5.0, 0.0, 2.5)
        small = reduced_energy(perturbed(self.psi_o, du=du), self.psi_o, self.margins)
        large = reduced_energy(perturbed(self.psi_o, du=2 * du), self.psi_o, self.margins)
        self.assertGreater(small.values[0], 0.0)
        np.testing.assert_allclose(small.values[1], small.values[0], rtol=1e-12)
        self.assertAlmostEqual(small.limit / small.values[0], 1.0, delta=1e-9)
        self.assertAlmostEqual(large.limit / small.limit, 4.0, delta=1e-5)

    def test_reference_must_be_harmonic(self):
        """Test that an unrelaxed reference is refused"""
        psi_o = perturbed(self.psi_o, du=bump(self.grid, 0.05, 5.0, 0.0, 2.5))
        with self.assertRaises(DomainError):
            reduced_energy(psi_o, psi_o, self.margins)

    def test_grid_mismatch(self):
        """Test that both fields must share a grid"""
        other = model_field(SolverGrid.graded(9, 17, 12.0, 12.0), self.psi_o.model)
        with self.assertRaises(DomainError):
            reduced_energy(other, self.psi_o, self.margins)

    def test_random_perturbations_convexity(self):
        """Test that random perturbations have positive reduced energy and distance"""
        rng = np.random.default_rng(11)
        for _ in range(20):
            rho_c, z_c = rng.uniform(2.0, 8.0), rng.uniform(-5.0, 5.0)
            radius = rng.uniform(1.0, 3.0)
            amp_u, amp_w = rng.choice([-1, 1], size=2) * rng.uniform(0.05, 0.3, size=2)
            psi = perturbed(self.psi_o, du=bump(self.grid, amp_u, rho_c, z_c, radius),
                            dw=bump(self.grid, amp_w, rho_c, z_c, radius))
            lhs, rhs = convexity_gap_check(psi, self.psi_o, self.margins)
            self.assertGreater(rhs, 0.0)
            self.assertGreater(lhs, 0.0)


class TestDivergenceIdentity(unittest.TestCase):
    def test_identical_geometries(self):
        """Test that both sides vanish for g = g_o"""
        family = Schwarzschild(1.0)
        report = divergence_identity_check(family, family, Margins(0.05, 0.5, 8.0))
        self.assertLess(abs(report.boundary), 1e-8)
        self.assertLess(abs(report.bulk), 1e-5)

    def test_rn_against_schwarzschild(self):
        """Test the flux balance for RN against Schwarzschild with the same rods"""
        rn = ReissnerNordstrom(1.0, -3.0)
        partner = Schwarzschild(2.0, ell=rn.ell)
        report = divergence_identity_check(rn, partner, Margins(1e-2, 0.3, 10.0))
        self.assertGreater(abs(report.boundary), 1e-3)
        self.assertLess(report.relative, 1e-3)

    def test_perturbed_geometry(self):
        """Test the balance with a nonzero curvature term"""
        family = Schwarzschild(1.0)
        report = divergence_identity_check(PerturbedSampler(family, 0.1), family, Margins(0.05, 0.5, 8.0))
        self.assertGreater(abs(report.curvature), 1e-4)
        self.assertGreater(report.z_term, 0.0)
        self.assertLess(report.relative, 1e-3)

    def test_imbalance_shrinks_with_nodes(self):
        """Test that more Gauss nodes per panel reduce the imbalance"""
        family = Schwarzschild(1.0)
        perturbed = PerturbedSampler(family, 0.1)
        margins = Margins(0.05, 0.5, 8.0)
        coarse = divergence_identity_check(perturbed, family, margins, nodes=2)
        fine = divergence_identity_check(perturbed, family, margins, nodes=8)
        self.assertLess(fine.relative, coarse.relative)
        self.assertLess(fine.relative, 1e-3)

    def test_rod_mismatch(self):
        """Test that geometries with different rods are refused"""
        with self.assertRaises(ClassMismatchError):
            divergence_identity_check(Schwarzschild(1.0), Schwarzschild(2.0), Margins(0.05, 0.5, 20.0))


if __name__ == '__main__':
    unittest.main()
