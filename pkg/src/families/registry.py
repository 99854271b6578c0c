"""
Family Registry

This module implements the lookup from family tags to the shipped
geometries, the validated FamilyParams record and the key=value parameter
file format.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.exceptions import DomainError
from src.families.black_holes import Kerr, ReissnerNordstrom, Schwarzschild
from src.families.chen_teo import ChenTeoAsymptotic
from src.families.eguchi_hanson import EguchiHanson
from src.families.models import EuclideanR4, FlatAF, FlatALE, FlatALF
from src.families.nuts_bolts import ChargedTaubBolt, TaubBolt, TaubNUT

logger = logging.getLogger(__name__)

# tag -> (constructor, required parameters, optional parameters)
FAMILIES: Dict[str, Tuple[Callable[..., Any], Tuple[str, ...], Tuple[str, ...]]] = {
    'flat-ale': (FlatALE, ('p', 'q'), ()),
    'flat-alf': (FlatALF, ('k', 'ell'), ('beta', 'h_modified')),
    'flat-af': (FlatAF, ('ell',), ('beta',)),
    'euclidean': (EuclideanR4, (), ()),
    'kerr': (Kerr, ('r_plus', 'a'), ()),
    'schwarzschild': (Schwarzschild, ('M',), ('ell',)),
    'reissner-nordstrom': (ReissnerNordstrom, ('r_plus', 'c1'), ('ell',)),
    'taub-nut': (TaubNUT, ('ell',), ()),
    'taub-bolt': (TaubBolt, ('ell',), ()),
    'charged-taub-bolt': (ChargedTaubBolt, ('r_plus', 'ell'), ()),
    'eguchi-hanson': (EguchiHanson, ('a',), ()),
    'chen-teo': (ChenTeoAsymptotic, ('kappa', 'xi'), ()),
}

ALIASES = {
    'rn': 'reissner-nordstrom',
    'eh': 'eguchi-hanson',
    'tn': 'taub-nut',
    'tb': 'taub-bolt',
    'ctb': 'charged-taub-bolt',
    'r4': 'euclidean',
    'euclidean-r4': 'euclidean',
}

# spellings accepted in parameter files and on the command line
PARAM_ALIASES = {'l': 'ell', 'rp': 'r_plus', 'r+': 'r_plus', 'm': 'M', 'c_1': 'c1'}


def canonical_tag(name: str) -> str:
    tag = name.strip().lower().replace('_', '-')
    return ALIASES.get(tag, tag)


class FamilyParams(BaseModel):
    """Validated family tag and parameters"""
    model_config = ConfigDict(extra='forbid')

    family: str
    r_plus: Optional[float] = None
    a: Optional[float] = None
    c1: Optional[float] = None
    M: Optional[float] = None
    ell: Optional[float] = None
    beta: Optional[float] = None
    k: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    kappa: Optional[float] = None
    xi: Optional[float] = None
    h_modified: Optional[bool] = None

    @field_validator('family')
    @classmethod
    def known_family(cls, value: str) -> str:
        tag = canonical_tag(value)
        if tag not in FAMILIES:
            raise ValueError(f"unknown family {value!r}; known: {', '.join(sorted(FAMILIES))}")
        return tag

    @model_validator(mode='after')
    def parameters_match(self) -> 'FamilyParams':
        _, required, optional = FAMILIES[self.family]
        given = self.given()
        missing = [name for name in required if name not in given]
        if missing:
            raise ValueError(f"family {self.family} needs {', '.join(missing)}")
        extra = [name for name in given if name not in required + optional]
        if extra:
            raise ValueError(f"family {self.family} does not take {', '.join(extra)}")
        return self

    def given(self) -> Dict[str, Any]:
        """Parameters that were given"""
        return {k: v for k, v in self.model_dump().items() if k != 'family' and v is not None}

    def build(self):
        """Construct the family; parameter invariants raise DomainError"""
        constructor = FAMILIES[self.family][0]
        family = constructor(**self.given())
        logger.debug(f"Built {family.label()}")
        return family


def build_family(params: Union[FamilyParams, Dict[str, Any]]):
    """Construct a family from params or a plain dict"""
    if not isinstance(params, FamilyParams):
        params = FamilyParams(**normalize_keys(params))
    return params.build()


def normalize_keys(values: Dict[str, Any]) -> Dict[str, Any]:
    out = {}
    for key, value in values.items():
        name = key.strip()
        name = PARAM_ALIASES.get(name.lower(), PARAM_ALIASES.get(name, name))
        out[name] = value
    return out


def parse_params(text: str) -> FamilyParams:
    """
    Parse a key=value family parameter file

    Args:
        text: File contents, e.g. 'family=kerr', 'r_plus=2.0', 'a=1.0'

    Returns:
        FamilyParams: Validated parameters
    """
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise DomainError(f"Line {number}: expected key=value, got {raw.strip()!r}")
        values[key.strip()] = value.strip()
    return FamilyParams(**normalize_keys(values))


def load_params(path: Union[str, Path]) -> FamilyParams:
    """Read a family parameter file from disk"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        logger.error(f"Error reading parameter file {path}: {str(e)}")
        raise DomainError(f"Cannot read parameter file {path}: {e}") from e
    return parse_params(text)


def family_summary(family) -> Dict[str, Any]:
    """Tag, parameters and derived constants of a family"""
    return {
        'family': family.key,
        'params': family.params(),
        'derived': family.derived(),
        'exact_mass': family.exact_mass(),
        'ricci_flat': family.ricci_flat,
    }


def shipped_examples():
    """One representative instance per shipped family"""
    return [
        FlatALE(2, 1), FlatALF(1, 2.0), FlatAF(0.0, 4.0), EuclideanR4(),
        Kerr(2.0, 1.0), Schwarzschild(1.0), ReissnerNordstrom(1.0, -3.0),
        TaubNUT(2.0), TaubBolt(2.0), ChargedTaubBolt(1.0, 2.0), EguchiHanson(1.0),
        ChenTeoAsymptotic(1.0, 0.6),
    ]
