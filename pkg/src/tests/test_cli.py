"""
Test cases for the command line interface
"""

import io
import math
import re
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path

from pydantic import ValidationError

from src import config
from src.cli import (EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, FamiliesReport, MassReport, RunConfig,
                     ScalarCheckReport, SolveReport, ValidateReport, build_parser, config_from_args, main,
                     parse_class, parse_pair)
from src.cli.reports import SCHEMA_DIR, SCHEMAS, ErrorReport, schema_for, shipped_schema
from src.comparison import RnComparisonReport
from src.exceptions import DomainError
from src.utils.serialization import read_csv

EH_RODS = "# Eguchi-Hanson\n0 1 -0.5\n1 0 0.5\n2 -1 inf\n"
REPEATED_RODS = "1 0 -1\n1 0 1\n0 1 inf\n"


class CliTestCase(unittest.TestCase):
    def setUp(self):
        """Set up test cases"""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name: str) -> Path:
        return self.dir / name

    def run_cli(self, *argv: str):
        """Run a subcommand into a report file and return (exit code, text)"""
        out = self.path('report.out')
        code = main([*argv, '-o', str(out)])
        return code, out.read_text()


class TestValidate(CliTestCase):
    def test_eguchi_hanson(self):
        """Test validating the Eguchi-Hanson rod file"""
        rods = self.path('eh.rods')
        rods.write_text(EH_RODS)
        code, text = self.run_cli('validate', '--rods', str(rods))
        self.assertEqual(code, EXIT_OK)
        report = ValidateReport.model_validate_json(text)
        self.assertTrue(report.valid)
        self.assertEqual(report.cross_section, 'L(2,1)')
        self.assertIsNone(report.rods[0].start)
        self.assertIsNone(report.rods[-1].end)
        self.assertEqual([(r.v1, r.v2) for r in report.rods], [(0, 1), (1, 0), (2, -1)])

    def test_invalid_rods(self):
        """Test that invalid rod data exits with 1 and lists the issues"""
        rods = self.path('bad.rods')
        rods.write_text(REPEATED_RODS)
        code, text = self.run_cli('validate', '--rods', str(rods))
        self.assertEqual(code, EXIT_INVALID)
        report = ValidateReport.model_validate_json(text)
        self.assertFalse(report.valid)
        self.assertIn('adjacency', [issue.kind for issue in report.issues])
        self.assertIsNone(report.cross_section)

    def test_missing_file(self):
        """Test that an unreadable rod file gives an error report"""
        code, text = self.run_cli('validate', '--rods', str(self.path('missing.rods')))
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'RodDataError')


class TestOptionParsing(unittest.TestCase):
    def test_parse_class(self):
        """Test the asymptotic class formats"""
        self.assertEqual(parse_class('af:0,4').label(), 'AF(0,4)')
        self.assertEqual(parse_class('ALF:1,2').label(), 'ALF(1,2)')
        self.assertEqual(parse_class('ale:2,1').label(), 'ALE(2,1)')
        for text in ('xx:1,2', 'af:1', 'ale:a,b', 'alf:1,2,3,4'):
            with self.assertRaises(DomainError):
                parse_class(text)

    def test_parse_pair(self):
        """Test the a,b format"""
        self.assertEqual(parse_pair('1,-3', '--rn'), (1.0, -3.0))
        self.assertEqual(parse_pair(' -2 , 2 ', '--m-range'), (-2.0, 2.0))
        for text in ('1', '1,2,3', 'a,b'):
            with self.assertRaises(DomainError):
                parse_pair(text, '--rn')

    def test_family_flags(self):
        """Test that family flags become validated parameters"""
        args = build_parser().parse_args(['mass', '--family', 'tn', '--l', '2'])
        cfg = config_from_args(args)
        self.assertEqual(cfg.family.family, 'taub-nut')
        self.assertEqual(cfg.family.ell, 2.0)
        self.assertEqual(cfg.options['integrand'], 'reduced')

    def test_solver_flags(self):
        """Test that solve flags reach the solver settings"""
        args = build_parser().parse_args(['solve', '--family', 'schwarzschild', '--M', '1',
                                          '--grid', '17x33', '--tol', '1e-9', '--omega', '1.5'])
        cfg = config_from_args(args)
        self.assertEqual((cfg.solver.n_rho, cfg.solver.n_z), (17, 33))
        self.assertEqual(cfg.solver.tolerance, 1e-9)
        self.assertEqual(cfg.solver.omega, 1.5)

    def test_missing_inputs(self):
        """Test rejected run configurations"""
        with self.assertRaises(ValidationError):
            RunConfig(subcommand='mass')
        with self.assertRaises(ValidationError):
            RunConfig(subcommand='validate')
        with self.assertRaises(ValidationError):
            RunConfig(subcommand='solve')
        with self.assertRaises(ValidationError):
            RunConfig(subcommand='families', output=Path('/nonexistent-dir/report.json'))
        with self.assertRaises(ValidationError):
            config_from_args(build_parser().parse_args(['mass', '--family', 'kerr', '--r-plus', '2']))

    def test_malformed_option(self):
        """Test that an unparsable option exits with 1 and an error report"""
        for argv in (['mass', '--family', 'taub-nut', '--l', 'two'], ['nothing'], ['solve', '--bogus']):
            buffer = io.StringIO()
            with redirect_stdout(buffer):
                code = main(argv)
            self.assertEqual(code, EXIT_INVALID)
            self.assertEqual(ErrorReport.model_validate_json(buffer.getvalue()).kind, 'UsageError')


class TestInformational(CliTestCase):
    def test_families(self):
        """Test the shipped family listing"""
        code, text = self.run_cli('families')
        self.assertEqual(code, EXIT_OK)
        report = FamiliesReport.model_validate_json(text)
        tags = [entry.family for entry in report.families]
        self.assertIn('kerr', tags)
        self.assertIn('chen-teo', tags)

    def test_schema(self):
        """Test printing and writing schemas"""
        code, text = self.run_cli('schema', 'mass')
        self.assertEqual(code, EXIT_OK)
        self.assertIn('"mass"', text)
        code, _ = self.run_cli('schema', '--write', str(self.path('schemas')))
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(self.path('schemas').joinpath('compare.schema.json').exists())
        self.assertTrue(self.path('schemas').joinpath('error.schema.json').exists())

    def test_shipped_schemas(self):
        """Test that the checked-in schemas list the fields of the report models"""
        for name in SCHEMAS:
            shipped = shipped_schema(name)
            generated = schema_for(name)
            self.assertEqual(set(shipped.get('$defs', {})), set(generated.get('$defs', {})), name)
            pairs = [(shipped, generated)] + [(shipped['$defs'][key], generated['$defs'][key])
                                              for key in shipped.get('$defs', {})]
            for ours, theirs in pairs:
                if 'properties' not in theirs:
                    continue
                self.assertEqual(list(ours['properties']), list(theirs['properties']), name)
                self.assertEqual(set(ours.get('required', [])), set(theirs.get('required', [])), name)
                self.assertFalse(ours['additionalProperties'])

    def test_requirements_are_imported(self):
        """Test that every declared requirement is imported by the package"""
        root = SCHEMA_DIR.parent
        modules = {'python-dotenv': 'dotenv'}
        lines = (root / 'requirements.txt').read_text().splitlines()
        names = [re.split(r'[<>=!~ ]', line.strip())[0] for line in lines if line.strip() and not line.startswith('#')]
        sources = [p.read_text() for p in (root / 'src').rglob('*.py') if 'tests' not in p.parts]
        for name in names:
            module = modules.get(name, name).replace('-', '_')
            pattern = re.compile(rf'^\s*(import|from) {module}\b', re.MULTILINE)
            self.assertTrue(any(pattern.search(text) for text in sources), name)
        self.assertNotIn('typing-extensions', names)

    def test_unknown_schema(self):
        """Test that an unknown schema name exits with 1"""
        code, text = self.run_cli('schema', 'nothing')
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'DomainError')


class TestSweepCommand(CliTestCase):
    def test_deterministic(self):
        """Test that a seeded sweep writes identical bytes twice"""
        argv = ('sweep', '--samples', '20', '--seed', '5')
        _, first = self.run_cli(*argv)
        code, second = self.run_cli(*argv)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(first, second)
        parsed = read_csv(first)
        self.assertEqual(parsed['columns'], ['M', 'c1', 'P', 'slack'])
        self.assertEqual(parsed['header']['seed'], '5')
        self.assertTrue(0 < len(parsed['rows']) <= 20)
        for M, c1, P, slack in parsed['rows']:
            self.assertLess(c1, M ** 2)
            self.assertGreaterEqual(P, -1e-12)

    def test_bad_range(self):
        """Test a malformed range"""
        code, text = self.run_cli('sweep', '--m-range', '1')
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'DomainError')


class TestGeometryCommands(CliTestCase):
    def test_mass(self):
        """Test the Taub-NUT mass with plot data"""
        plot = self.path('flux.csv')
        code, text = self.run_cli('mass', '--family', 'taub-nut', '--l', '2', '--dump-plot', str(plot))
        self.assertEqual(code, EXIT_OK)
        report = MassReport.model_validate_json(text)
        self.assertAlmostEqual(report.mass / (4 * math.pi), 1.0, delta=1e-3)
        self.assertLessEqual(report.rel_err, 1e-3)
        self.assertEqual(len(report.radii), len(report.flux))
        self.assertEqual(read_csv(plot.read_text())['columns'], ['r', 'flux'])

    def test_mass_from_params_file(self):
        """Test reading the family from a parameter file"""
        params = self.path('schwarzschild.params')
        params.write_text("family=schwarzschild\nM=1.0\n")
        code, text = self.run_cli('mass', '--params', str(params))
        self.assertEqual(code, EXIT_OK)
        self.assertAlmostEqual(MassReport.model_validate_json(text).mass / (16 * math.pi), 1.0, delta=1e-3)

    def test_scalar_check(self):
        """Test that Reissner-Nordstrom passes the scalar curvature check"""
        code, text = self.run_cli('scalar-check', '--family', 'rn', '--r-plus', '1', '--c1', '-3')
        self.assertEqual(code, EXIT_OK)
        report = ScalarCheckReport.model_validate_json(text)
        self.assertTrue(report.passed)
        self.assertEqual(report.points, 100)
        self.assertEqual(report.oracle, [])

    def test_bad_family_parameters(self):
        """Test that a parameter outside the family's range exits with 1"""
        code, text = self.run_cli('mass', '--family', 'kerr', '--r-plus', '1', '--a', '2')
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'DomainError')


class TestSolveCommand(CliTestCase):
    def setUp(self):
        """Set up test cases"""
        super().setUp()
        self.small = ('--grid', '17x33', '--rho-max', '12', '--z-max', '12', '--omega', '1.5')

    def test_converges(self):
        """Test a converged Schwarzschild solve"""
        code, text = self.run_cli('solve', '--family', 'schwarzschild', '--M', '1', *self.small,
                                  '--tol', '1e-9', '--max-sweeps', '20000')
        self.assertEqual(code, EXIT_OK)
        report = SolveReport.model_validate_json(text)
        self.assertTrue(report.converged)
        self.assertLessEqual(report.residual, 1e-9)
        self.assertEqual(report.grid, [17, 33])
        self.assertLess(report.distance_to_exact, 0.1)

    def test_not_converged(self):
        """Test that running out of sweeps exits with 2 and keeps the best iterate"""
        checkpoint = self.path('best.csv')
        code, text = self.run_cli('solve', '--family', 'schwarzschild', '--M', '1', *self.small,
                                  '--tol', '1e-12', '--max-sweeps', '2', '--perturb', '0.1', '--seed', '1',
                                  '--checkpoint', str(checkpoint))
        self.assertEqual(code, EXIT_NOT_CONVERGED)
        report = ErrorReport.model_validate_json(text)
        self.assertEqual(report.kind, 'ConvergenceError')
        self.assertEqual(report.diagnostics['sweeps'], 2)
        self.assertNotIn('field', report.diagnostics)
        self.assertTrue(checkpoint.exists())

    def test_rods_without_family(self):
        """Test that a rod file with no exact geometry is relaxed from a blended model map"""
        rods = self.path('eh.rods')
        rods.write_text(EH_RODS)
        code, text = self.run_cli('solve', '--rods', str(rods), '--model', 'ale:2,1', *self.small,
                                  '--max-sweeps', '3', '--tol', '1e-12')
        self.assertEqual(code, EXIT_NOT_CONVERGED)
        report = ErrorReport.model_validate_json(text)
        self.assertEqual(report.kind, 'ConvergenceError')
        self.assertEqual(report.diagnostics['sweeps'], 3)

    def test_bad_model(self):
        """Test that a malformed class exits with 1"""
        rods = self.path('eh.rods')
        rods.write_text(EH_RODS)
        code, text = self.run_cli('solve', '--rods', str(rods), '--model', 'ale:x')
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'DomainError')


class TestCompareCommand(CliTestCase):
    def test_missing_reference(self):
        """Test that compare without inputs exits with 1"""
        code, text = self.run_cli('compare', '--family', 'schwarzschild', '--M', '1')
        self.assertEqual(code, EXIT_INVALID)
        self.assertEqual(ErrorReport.model_validate_json(text).kind, 'DomainError')

    @unittest.skipUnless(config.SLOW_TESTS, "set IML_SLOW_TESTS=1 for the full comparison pipeline")
    def test_reissner_nordstrom(self):
        """Test the charged comparison against its closed form"""
        code, text = self.run_cli('compare', '--rn', '1,-3')
        self.assertEqual(code, EXIT_OK)
        report = RnComparisonReport.model_validate_json(text)
        self.assertGreater(report.gap.slack, 0.0)
        self.assertAlmostEqual(report.P, 0.1507, delta=1e-4)
        self.assertLessEqual(report.relative_error, config.COMPARISON_TOL)


if __name__ == '__main__':
    unittest.main()
