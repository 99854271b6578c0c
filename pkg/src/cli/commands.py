"""
Subcommands

This module implements one handler per subcommand. A handler takes the
validated RunConfig and returns the text to write (JSON or CSV) together
with its exit status; side artifacts (plot data, checkpoints) are written
by the handler itself.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from src import config
from src.cli.reports import (DefectEntry, DefectsReport, FamiliesReport, FamilyEntry, IssueEntry, MassReport,
                             OracleSample, RodEntry, ScalarCheckReport, SolveReport, ValidateReport,
                             finite_or_none, report_text, schema_for, write_schemas)
from src.cli.run_config import RunConfig, parse_class, parse_pair
from src.comparison import bold_mass, rn_comparison, sweep, sweep_csv, sweep_points, theorem_gap
from src.defects import defect_profiles
from src.exceptions import DomainError
from src.families import family_summary, load_params, shipped_examples
from src.geometry import CurvatureOracle, PerturbedSampler, dump_fields, h2_distance, scalar_curvature
from src.mass import estimate_mass
from src.rods import asymptotic_topology, load_rods, validate_rod_data
from src.solver import build_model_map, model_field, relax, sample_field, save_checkpoint
from src.utils.serialization import csv_text, dumps

logger = logging.getLogger(__name__)

SCALAR_CHECK_TOL = 1e-6
# bulk points of the scalar curvature check
SCALAR_RHO = np.geomspace(0.5, 5.0, 10)
SCALAR_Z = np.linspace(-5.0, 5.0, 10)
# (r / r_min, theta) of the 4-metric cross-check; r_min is the chart's smallest radius
ORACLE_POINTS = ((1.5, 0.7), (2.0, 1.3), (3.0, 2.0))


@dataclass
class CommandResult:
    text: str
    exit_code: int = 0


def _family(cfg: RunConfig):
    family = cfg.family.build()
    logger.info(f"Using {family.label()}")
    return family


def run_validate(cfg: RunConfig) -> CommandResult:
    """Validate a rod file; invalid data exits with 1"""
    rods = load_rods(cfg.rods_path)
    report = validate_rod_data(rods)
    cross_section = str(asymptotic_topology(rods).canonical()) if report.valid else None
    entries = [] if 'count' in report.kinds() else rods.rods
    out = ValidateReport(
        rods=[RodEntry(index=r.index, v1=r.structure.v1, v2=r.structure.v2,
                       start=finite_or_none(r.start), end=finite_or_none(r.end)) for r in entries],
        valid=report.valid,
        issues=[IssueEntry(kind=i.kind, rod_index=i.rod_index, message=i.message) for i in report.issues],
        cross_section=cross_section)
    if not report.valid:
        logger.error(f"Rod data in {cfg.rods_path} is invalid: {', '.join(report.kinds())}")
    return CommandResult(report_text(out), 0 if report.valid else 1)


def run_mass(cfg: RunConfig) -> CommandResult:
    """Mass of a family by flux quadrature and extrapolation"""
    family = _family(cfg)
    integrand = cfg.options.get('integrand', 'reduced')
    estimate = estimate_mass(family, integrand=integrand)
    exact = family.exact_mass()
    rel_err = abs(estimate.extrapolated - exact) / abs(exact) if exact != 0 else None
    out = MassReport(family=family.key, params=family.params(), model=family.asymptotic_class().label(),
                     integrand=integrand, radii=estimate.radii, flux=estimate.fluxes,
                     mass=estimate.extrapolated, exact_mass=exact, rel_err=rel_err,
                     fit_exponent=estimate.fit_exponent, monotone=estimate.monotone)
    if cfg.dump_plot is not None:
        cfg.dump_plot.write_text(csv_text(('r', 'flux'), zip(estimate.radii, estimate.fluxes),
                                          header={'family': family.label()}))
    return CommandResult(report_text(out))


def run_defects(cfg: RunConfig) -> CommandResult:
    """Defect profiles per rod, the JSON summary and the (rod, z, theta) CSV"""
    family = _family(cfg)
    all_rods = bool(cfg.options.get('all_rods', False))
    profiles = defect_profiles(family, finite_only=not all_rods)
    finite = [p for p in profiles if p.is_finite]
    out = DefectsReport(
        family=family.label(),
        rods=[DefectEntry(rod=p.rod_index, start=finite_or_none(p.start), end=finite_or_none(p.end),
                          integral=p.integral, case=p.case) for p in profiles],
        bold_mass=bold_mass(family, finite))
    rows = [(p.rod_index, z, theta) for p in profiles for z, theta in p.samples]
    table = csv_text(('rod', 'z', 'theta'), rows, header={'family': family.label()})
    if cfg.dump_plot is not None:
        cfg.dump_plot.write_text(table)
    return CommandResult(table if cfg.output_format == 'csv' else report_text(out))


def run_solve(cfg: RunConfig) -> CommandResult:
    """Relax a harmonic map on the configured grid"""
    family = _family(cfg) if cfg.family is not None else None
    model_text = cfg.options.get('model')
    if cfg.rods_path is not None:
        rods = load_rods(cfg.rods_path)
    elif family is not None:
        rods = family.rod_data()
    else:
        raise DomainError("solve needs a family or --rods")
    if model_text:
        cls = parse_class(model_text)
    elif family is not None:
        cls = family.asymptotic_class()
    else:
        raise DomainError("solve with --rods needs --model")

    grid = cfg.solver.grid()
    model = build_model_map(rods, cls, family=family)
    start = sample_field(family, grid, model) if family is not None else model_field(grid, model)
    amplitude = float(cfg.options.get('perturb', 0.0))
    if amplitude:
        start = _perturbed(start, amplitude, np.random.default_rng(cfg.seed))

    result = relax(start, cfg.solver)
    checkpoint = cfg.options.get('checkpoint')
    if checkpoint:
        save_checkpoint(result, checkpoint)
    if cfg.dump_plot is not None:
        dump_fields(result.to_dump(), cfg.dump_plot)

    distance = None
    if family is not None:
        exact = sample_field(family, grid, model)
        distance = float(np.max(h2_distance(result.point(), exact.point())))
    d = result.diagnostics
    out = SolveReport(family=family.label() if family is not None else None, model=model.source,
                      asymptotic_class=cls.label(), grid=list(grid.shape), tolerance=cfg.solver.tolerance,
                      sweeps=d.sweeps, residual=d.residual, converged=d.converged,
                      energy_history=d.energy_history, distance_to_exact=distance,
                      checkpoint=str(checkpoint) if checkpoint else None)
    return CommandResult(report_text(out))


def _perturbed(fld, amplitude: float, rng):
    """Add a smooth compact bump to V - V_bar clear of the axis and the outer boundary"""
    rho, z = fld.grid.mesh()
    rho_c = rng.uniform(0.3, 0.5) * fld.grid.rho[-1]
    z_c = rng.uniform(-0.3, 0.3) * fld.grid.z[-1]
    radius = 0.2 * min(fld.grid.rho[-1], fld.grid.z[-1])
    s = ((rho - rho_c) ** 2 + (z - z_c) ** 2) / radius ** 2
    bump = amplitude * np.where(s < 1, (1 - s) ** 3, 0.0)
    return type(fld)(fld.grid, fld.model, fld.u + bump, fld.w)


def run_compare(cfg: RunConfig) -> CommandResult:
    """Theorem gap for the RN pair (--rn M,c1) or two parameter files"""
    tol = float(cfg.options.get('tol', config.COMPARISON_TOL))
    rn = cfg.options.get('rn')
    if rn:
        M, c1 = parse_pair(rn, '--rn')
        return CommandResult(report_text(rn_comparison(M, c1, tol=tol)))
    reference = cfg.options.get('reference')
    if cfg.family is None or not reference:
        raise DomainError("compare needs --rn M,c1 or a family with --reference FILE")
    report = theorem_gap(cfg.family, load_params(reference), tol=tol,
                         all_rods=bool(cfg.options.get('all_rods', False)))
    return CommandResult(report_text(report))


def run_sweep(cfg: RunConfig) -> CommandResult:
    """CSV of (M, c1, P, slack) over random or regular parameter points"""
    M_range = parse_pair(cfg.options.get('m_range', '-2,2'), '--m-range')
    c1_range = parse_pair(cfg.options.get('c1_range', '-4,4'), '--c1-range')
    samples = int(cfg.options.get('samples', 100))
    points = sweep_points(M_range, c1_range, samples=samples, seed=cfg.seed)
    rows = sweep(points, pipeline=bool(cfg.options.get('pipeline', False)))
    header = {'seed': cfg.seed if cfg.seed is not None else 'grid', 'samples': samples,
              'm_range': f"{M_range[0]:g},{M_range[1]:g}", 'c1_range': f"{c1_range[0]:g},{c1_range[1]:g}"}
    return CommandResult(sweep_csv(rows, header=header))


def run_scalar_check(cfg: RunConfig) -> CommandResult:
    """Scalar curvature at 100 bulk points; with --perturb also against the 4-metric oracle"""
    family = _family(cfg)
    rho, z = np.meshgrid(SCALAR_RHO, SCALAR_Z, indexing='ij')
    R = scalar_curvature(family, rho.ravel(), z.ravel(), config.SCALAR_CHECK_STEP, config.SCALAR_CHECK_ORDER)
    max_abs = float(np.max(np.abs(R)))

    amplitude = cfg.options.get('perturb')
    samples: List[OracleSample] = []
    if amplitude:
        sampler = PerturbedSampler(family, float(amplitude))
        oracle = CurvatureOracle(sampler, method=cfg.options.get('oracle', 'symbolic'))
        r_min = _chart_radius(family)
        for factor, theta in ORACLE_POINTS:
            r = factor * r_min
            p_rho, p_z = oracle.brill_point(r, theta)
            expected = oracle.scalar_curvature(r, theta)
            value = float(scalar_curvature(sampler, p_rho, p_z, config.SCALAR_CHECK_STEP,
                                           config.SCALAR_CHECK_ORDER))
            samples.append(OracleSample(r=r, theta=theta, finite_difference=value, oracle=expected,
                                        difference=abs(value - expected)))

    oracle_ok = all(s.difference <= 1e-4 for s in samples)
    passed = max_abs <= SCALAR_CHECK_TOL and oracle_ok
    if not passed:
        logger.error(f"Scalar curvature check failed for {family.label()}: max |R| = {max_abs:.3e}")
    out = ScalarCheckReport(family=family.label(), points=int(R.size), max_abs_R=max_abs, tol=SCALAR_CHECK_TOL,
                            passed=passed, perturbation=float(amplitude) if amplitude else None, oracle=samples)
    return CommandResult(report_text(out), 0 if passed else 1)


def _chart_radius(family) -> float:
    """Smallest polar radius of the family's chart (1 for charts without a bolt)"""
    chart = getattr(family, 'chart', None)
    return max(1.0, float(chart.r_min)) if chart is not None else 1.0


def run_schema(cfg: RunConfig) -> CommandResult:
    """Print one schema, or write all of them to a directory"""
    directory = cfg.options.get('write')
    if directory:
        return CommandResult(dumps({'written': write_schemas(directory)}))
    target = cfg.options.get('target')
    if not target:
        raise DomainError("schema needs a subcommand name or --write DIR")
    return CommandResult(dumps(schema_for(target)))


def run_families(cfg: RunConfig) -> CommandResult:
    """Shipped families with their derived constants"""
    entries = []
    for family in shipped_examples():
        summary = family_summary(family)
        summary['derived'] = {k: (finite_or_none(v) if isinstance(v, float) else v)
                              for k, v in summary['derived'].items()}
        entries.append(FamilyEntry(**summary))
    return CommandResult(report_text(FamiliesReport(families=entries)))


HANDLERS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    'validate': run_validate,
    'mass': run_mass,
    'defects': run_defects,
    'solve': run_solve,
    'compare': run_compare,
    'sweep': run_sweep,
    'scalar-check': run_scalar_check,
    'schema': run_schema,
    'families': run_families,
}
