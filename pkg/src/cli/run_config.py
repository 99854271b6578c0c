"""
Run Configuration

This module implements the validated record a command line invocation is
turned into, together with the small text formats of the options.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.exceptions import DomainError
from src.families import FamilyParams
from src.rods import AsymptoticClass
from src.solver import SolverConfig

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('validate', 'mass', 'defects', 'solve', 'compare', 'sweep', 'scalar-check', 'schema',
               'families')

# subcommands that need a family (from flags or a parameter file)
NEEDS_FAMILY = ('mass', 'defects', 'scalar-check')


class RunConfig(BaseModel):
    """One subcommand with its inputs and outputs"""
    model_config = ConfigDict(extra='forbid')

    subcommand: Literal['validate', 'mass', 'defects', 'solve', 'compare', 'sweep', 'scalar-check', 'schema',
                        'families']
    family: Optional[FamilyParams] = None
    params_path: Optional[Path] = None
    rods_path: Optional[Path] = None
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output_format: Literal['json', 'csv'] = 'json'
    output: Optional[Path] = None
    dump_plot: Optional[Path] = None
    seed: Optional[int] = None
    options: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('output', 'dump_plot')
    @classmethod
    def writable(cls, value: Optional[Path]) -> Optional[Path]:
        if value is None:
            return value
        parent = value.expanduser().resolve().parent
        if not parent.is_dir():
            raise ValueError(f"directory {parent} does not exist")
        if value.exists() and value.is_dir():
            raise ValueError(f"{value} is a directory")
        return value

    @model_validator(mode='after')
    def inputs_present(self) -> 'RunConfig':
        if self.subcommand in NEEDS_FAMILY and self.family is None:
            raise ValueError(f"{self.subcommand} needs --family or --params")
        if self.subcommand == 'validate' and self.rods_path is None:
            raise ValueError("validate needs --rods")
        if self.subcommand == 'solve' and self.family is None and self.rods_path is None:
            raise ValueError("solve needs a family or --rods with --model")
        return self


def parse_pair(text: str, name: str) -> Tuple[float, float]:
    """Parse 'a,b' into two floats"""
    parts = [p.strip() for p in text.split(',')]
    if len(parts) != 2:
        raise DomainError(f"{name} must look like a,b, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise DomainError(f"{name} must hold two numbers, got {text!r}") from e


def parse_class(text: str) -> AsymptoticClass:
    """
    Parse an asymptotic class

    Args:
        text: 'af:beta,ell', 'alf:k,ell[,beta]' or 'ale:p,q'

    Returns:
        AsymptoticClass: The class; invalid moduli raise DomainError
    """
    tag, _, rest = text.strip().lower().partition(':')
    values = [v.strip() for v in rest.split(',') if v.strip()]
    try:
        if tag == 'af' and len(values) == 2:
            return AsymptoticClass.af(float(values[0]), float(values[1]))
        if tag == 'alf' and len(values) in (2, 3):
            beta = float(values[2]) if len(values) == 3 else 0.0
            return AsymptoticClass.alf(int(values[0]), float(values[1]), beta)
        if tag == 'ale' and len(values) == 2:
            return AsymptoticClass.ale(int(values[0]), int(values[1]))
    except ValueError as e:
        raise DomainError(f"Bad asymptotic class {text!r}: {e}") from e
    raise DomainError(f"Asymptotic class must look like af:beta,ell, alf:k,ell[,beta] or ale:p,q, got {text!r}")
