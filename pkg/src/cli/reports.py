"""
Command Line Reports

This module implements the pydantic records written by the subcommands and
the JSON schemas derived from them.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from src.comparison import RnComparisonReport, TheoremGapReport
from src.exceptions import DomainError
from src.utils.serialization import dumps

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parents[2] / 'schemas'  # shipped copies of write_schemas output


class Report(BaseModel):
    model_config = ConfigDict(extra='forbid')


class RodEntry(Report):
    index: int
    v1: int
    v2: int
    start: Optional[float] = Field(description="null for -inf")
    end: Optional[float] = Field(description="null for +inf")


class IssueEntry(Report):
    kind: str
    rod_index: Optional[int] = None
    message: str


class ValidateReport(Report):
    """Rod data and its validation issues"""
    rods: List[RodEntry]
    valid: bool
    issues: List[IssueEntry]
    cross_section: Optional[str] = None


class MassReport(Report):
    """Flux sequence and extrapolated mass of one family"""
    family: str
    params: Dict[str, Any]
    model: str
    integrand: str
    radii: List[float]
    flux: List[float]
    mass: float
    exact_mass: Optional[float] = None
    rel_err: Optional[float] = None
    fit_exponent: float
    monotone: bool


class DefectEntry(Report):
    rod: int
    start: Optional[float]
    end: Optional[float]
    integral: float
    case: str


class DefectsReport(Report):
    """Integrated defects per rod and the bold mass"""
    family: str
    rods: List[DefectEntry]
    bold_mass: Optional[float] = None


class SolveReport(Report):
    """Outcome of a relaxation run"""
    family: Optional[str] = None
    model: str
    asymptotic_class: str
    grid: List[int]
    tolerance: float
    sweeps: int
    residual: float
    converged: bool
    energy_history: List[float]
    distance_to_exact: Optional[float] = None
    checkpoint: Optional[str] = None


class OracleSample(Report):
    r: float
    theta: float
    finite_difference: float
    oracle: float
    difference: float


class ScalarCheckReport(Report):
    """Scalar curvature at bulk points, with the optional 4-metric cross-check"""
    family: str
    points: int
    max_abs_R: float
    tol: float
    passed: bool
    perturbation: Optional[float] = None
    oracle: List[OracleSample] = Field(default_factory=list)


class SweepRecord(Report):
    """One row of the sweep CSV"""
    M: float
    c1: float
    P: float
    slack: float


class FamilyEntry(Report):
    family: str
    params: Dict[str, Any]
    derived: Dict[str, Any]
    exact_mass: float
    ricci_flat: bool


class FamiliesReport(Report):
    """Shipped families with their derived constants"""
    families: List[FamilyEntry]


class ErrorReport(Report):
    """Written when a subcommand fails; diagnostics hold partial results"""
    error: str
    kind: str
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


CompareReport = Union[RnComparisonReport, TheoremGapReport]

SCHEMAS = {
    'validate': ValidateReport,
    'mass': MassReport,
    'defects': DefectsReport,
    'solve': SolveReport,
    'compare': CompareReport,
    'sweep': SweepRecord,
    'scalar-check': ScalarCheckReport,
    'families': FamiliesReport,
    'error': ErrorReport,
}


def finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def shipped_schema(subcommand: str) -> Dict[str, Any]:
    """Checked-in schema of a subcommand, read from SCHEMA_DIR"""
    if subcommand not in SCHEMAS:
        raise DomainError(f"No schema for {subcommand!r}; known: {', '.join(SCHEMAS)}")
    return json.loads((SCHEMA_DIR / f"{subcommand}.schema.json").read_text())


def schema_for(subcommand: str) -> Dict[str, Any]:
    """
    JSON schema of a subcommand's output

    Args:
        subcommand: One of the keys of SCHEMAS

    Returns:
        dict: JSON schema
    """
    try:
        target = SCHEMAS[subcommand]
    except KeyError as e:
        raise DomainError(f"No schema for {subcommand!r}; known: {', '.join(SCHEMAS)}") from e
    return TypeAdapter(target).json_schema()


def write_schemas(directory: Union[str, Path]) -> List[str]:
    """Write one <subcommand>.schema.json per subcommand"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SCHEMAS:
        path = directory / f"{name}.schema.json"
        path.write_text(dumps(schema_for(name)))
        written.append(str(path))
    logger.info(f"Wrote {len(written)} schemas to {directory}")
    return written


def report_text(report: BaseModel) -> str:
    """Fixed-precision JSON text of a report"""
    return dumps(report.model_dump())
