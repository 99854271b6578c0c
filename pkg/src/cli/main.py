"""
Command Line Entry Point

This module implements the argument parser, the translation of parsed
arguments into a RunConfig and the dispatch with exit codes: 0 on success,
1 on invalid input, 2 when a numeric procedure does not converge.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src import config
from src.cli.commands import HANDLERS
from src.cli.reports import ErrorReport, report_text
from src.cli.run_config import RunConfig
from src.exceptions import ClassMismatchError, ConvergenceError, DomainError, RodDataError, UsageError
from src.families import FamilyParams, load_params
from src.families.registry import normalize_keys
from src.solver import SolverConfig, parse_grid, save_checkpoint
from src.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2

FAMILY_FLAGS = ('r_plus', 'a', 'c1', 'M', 'ell', 'beta', 'k', 'p', 'q', 'kappa', 'xi', 'h_modified')


class CliParser(argparse.ArgumentParser):
    """Parser whose usage errors raise UsageError instead of exiting with 2"""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('-o', '--output', type=Path, help='write the report here instead of stdout')


def _family_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('family')
    group.add_argument('--family', help='family tag, e.g. kerr, taub-nut, rn')
    group.add_argument('--params', type=Path, help='key=value family parameter file')
    group.add_argument('--r-plus', dest='r_plus', type=float)
    group.add_argument('--a', type=float)
    group.add_argument('--c1', type=float)
    group.add_argument('--M', type=float)
    group.add_argument('--ell', '--l', dest='ell', type=float)
    group.add_argument('--beta', type=float)
    group.add_argument('--k', type=int)
    group.add_argument('--p', type=int)
    group.add_argument('--q', type=int)
    group.add_argument('--kappa', type=float)
    group.add_argument('--xi', type=float)
    group.add_argument('--h-modified', dest='h_modified', action='store_const', const=True, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog='instanton-mass', description=f"{config.APP_NAME} {config.APP_VERSION}")
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('validate', help='validate a rod file')
    _common(p)
    p.add_argument('--rods', type=Path, required=True)

    p = sub.add_parser('mass', help='mass by flux quadrature')
    _common(p)
    _family_options(p)
    p.add_argument('--integrand', choices=('reduced', 'exact'), default='reduced')
    p.add_argument('--dump-plot', type=Path, help='write (r, flux) columns')

    p = sub.add_parser('defects', help='angle defects along the rods')
    _common(p)
    _family_options(p)
    p.add_argument('--all-rods', action='store_true', help='include the semi-infinite rods')
    p.add_argument('--format', dest='output_format', choices=('json', 'csv'), default='json')
    p.add_argument('--dump-plot', type=Path, help='write (rod, z, theta) columns')

    p = sub.add_parser('solve', help='relax the harmonic map')
    _common(p)
    _family_options(p)
    p.add_argument('--rods', type=Path, help='rod file instead of a family')
    p.add_argument('--model', help='asymptotic class: af:beta,ell, alf:k,ell[,beta] or ale:p,q')
    p.add_argument('--grid', help='NxM nodes (rho x z)')
    p.add_argument('--tol', type=float)
    p.add_argument('--max-sweeps', dest='max_sweeps', type=int)
    p.add_argument('--omega', type=float)
    p.add_argument('--rho-max', dest='rho_max', type=float)
    p.add_argument('--z-max', dest='z_max', type=float)
    p.add_argument('--perturb', type=float, help='amplitude of a bump added to the start')
    p.add_argument('--seed', type=int)
    p.add_argument('--checkpoint', type=Path, help='write the field as CSV')
    p.add_argument('--dump-plot', type=Path, help='write the field dump')

    p = sub.add_parser('compare', help='slack of the mass inequality')
    _common(p)
    _family_options(p)
    p.add_argument('--rn', help='M,c1 of the Reissner-Nordstrom pair')
    p.add_argument('--reference', type=Path, help='parameter file of the equilibrium geometry')
    p.add_argument('--tol', type=float)
    p.add_argument('--all-rods', action='store_true')

    p = sub.add_parser('sweep', help='P and the slack over (M, c1)')
    _common(p)
    p.add_argument('--m-range', dest='m_range', default='-2,2')
    p.add_argument('--c1-range', dest='c1_range', default='-4,4')
    p.add_argument('--samples', type=int, default=100)
    p.add_argument('--seed', type=int, help='random points; a regular grid without it')
    p.add_argument('--pipeline', action='store_true', help='slack from the mass and defect engines')

    p = sub.add_parser('scalar-check', help='scalar curvature at bulk points')
    _common(p)
    _family_options(p)
    p.add_argument('--perturb', type=float, help='also compare a perturbed metric with the 4-metric oracle')
    p.add_argument('--oracle', choices=('symbolic', 'numeric'), default='symbolic')

    p = sub.add_parser('schema', help='JSON schema of a subcommand report')
    _common(p)
    p.add_argument('target', nargs='?')
    p.add_argument('--write', type=Path, help='write every schema into this directory')

    p = sub.add_parser('families', help='shipped families and derived constants')
    _common(p)
    return parser


def _family_params(args: argparse.Namespace) -> Optional[FamilyParams]:
    params_path = getattr(args, 'params', None)
    if params_path is not None:
        return load_params(params_path)
    tag = getattr(args, 'family', None)
    if tag is None:
        return None
    values: Dict[str, Any] = {'family': tag}
    for name in FAMILY_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    return FamilyParams(**normalize_keys(values))


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    values: Dict[str, Any] = {}
    if getattr(args, 'grid', None):
        values['n_rho'], values['n_z'] = parse_grid(args.grid)
    for flag, name in (('tol', 'tolerance'), ('max_sweeps', 'max_sweeps'), ('omega', 'omega'),
                       ('rho_max', 'rho_max'), ('z_max', 'z_max')):
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    return SolverConfig(**values)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validated RunConfig of parsed arguments"""
    options = {}
    for name in ('integrand', 'all_rods', 'model', 'perturb', 'checkpoint', 'rn', 'reference', 'tol',
                 'm_range', 'c1_range', 'samples', 'pipeline', 'oracle', 'target', 'write'):
        value = getattr(args, name, None)
        if value is not None and value is not False:
            options[name] = str(value) if isinstance(value, Path) else value
    solver = _solver_config(args) if args.subcommand == 'solve' else SolverConfig()
    return RunConfig(subcommand=args.subcommand, family=_family_params(args),
                     params_path=getattr(args, 'params', None), rods_path=getattr(args, 'rods', None),
                     solver=solver, output_format=getattr(args, 'output_format', None) or
                     ('csv' if args.subcommand == 'sweep' else 'json'),
                     output=args.output, dump_plot=getattr(args, 'dump_plot', None),
                     seed=getattr(args, 'seed', None), options=options)


def _plain(value: Any) -> Any:
    """Diagnostics reduced to JSON-friendly values"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if hasattr(value, 'tolist'):
        return value.tolist()
    return type(value).__name__


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)
        logger.info(f"Wrote {output}")


def _failure(error: Exception, output: Optional[Path], diagnostics: Optional[Dict[str, Any]] = None) -> None:
    report = ErrorReport(error=str(error), kind=type(error).__name__, diagnostics=_plain(diagnostics or {}))
    _emit(report_text(report), output)


def execute(cfg: RunConfig) -> int:
    """
    Run one subcommand

    Args:
        cfg: Validated run configuration

    Returns:
        int: Exit status
    """
    try:
        result = HANDLERS[cfg.subcommand](cfg)
    except ConvergenceError as e:
        logger.error(f"{cfg.subcommand} did not converge: {str(e)}")
        diagnostics = dict(e.diagnostics)
        best = diagnostics.pop('field', None)
        checkpoint = cfg.options.get('checkpoint')
        if best is not None and checkpoint:
            diagnostics['checkpoint'] = save_checkpoint(best, checkpoint)
        _failure(e, cfg.output, diagnostics)
        return EXIT_NOT_CONVERGED
    except (RodDataError, DomainError, ClassMismatchError, ValidationError) as e:
        logger.error(f"{cfg.subcommand} failed: {str(e)}")
        _failure(e, cfg.output)
        return EXIT_INVALID
    _emit(result.text, cfg.output)
    return result.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, configure logging and run"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        setup_logging(None)
        logger.error(f"Invalid options: {str(e)}")
        _failure(e, None)
        return EXIT_INVALID
    setup_logging(args.log_level)
    try:
        cfg = config_from_args(args)
    except (RodDataError, DomainError, ValidationError) as e:
        logger.error(f"Invalid configuration: {str(e)}")
        _failure(e, None)
        return EXIT_INVALID
    return execute(cfg)
