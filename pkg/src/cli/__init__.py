"""
Command Line Interface

This package exposes the library as subcommands:
- Argument parsing into a validated RunConfig
- One handler per subcommand (validate, mass, defects, solve, compare, sweep, scalar-check, schema, families)
- pydantic report records and their JSON schemas
- Exit codes: 0 success, 1 invalid input, 2 no convergence
"""

from .run_config import NEEDS_FAMILY, SUBCOMMANDS, RunConfig, parse_class, parse_pair
from .reports import (SCHEMAS, DefectsReport, ErrorReport, FamiliesReport, MassReport, ScalarCheckReport,
                      SolveReport, SweepRecord, ValidateReport, report_text, schema_for, shipped_schema, write_schemas)
from .commands import HANDLERS, CommandResult
from .main import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, build_parser, config_from_args, execute, main

__all__ = [
    'NEEDS_FAMILY', 'SUBCOMMANDS', 'RunConfig', 'parse_class', 'parse_pair',
    'SCHEMAS', 'DefectsReport', 'ErrorReport', 'FamiliesReport', 'MassReport', 'ScalarCheckReport',
    'SolveReport', 'SweepRecord', 'ValidateReport', 'report_text', 'schema_for', 'shipped_schema', 'write_schemas',
    'HANDLERS', 'CommandResult',
    'EXIT_INVALID', 'EXIT_NOT_CONVERGED', 'EXIT_OK', 'build_parser', 'config_from_args', 'execute', 'main',
]
