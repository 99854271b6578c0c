"""
Field Dumps

This module implements the CSV form of reduced fields on a (rho, z) grid:
columns rho, z, V, W, Z, alpha and a '#'-prefixed header holding the
asymptotic class, beta, ell and the grid shape.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.exceptions import DomainError
from src.utils.serialization import csv_text, read_csv

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ('rho', 'z', 'V', 'W', 'Z', 'alpha')


@dataclass
class FieldDump:
    """Reduced fields sampled on a structured grid"""
    rho: np.ndarray
    z: np.ndarray
    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    alpha: np.ndarray
    asymptotic_class: str = ''
    beta: float = 0.0
    ell: float = 1.0
    extra: Dict[str, str] = field(default_factory=dict)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(np.shape(self.rho))

    def to_csv(self) -> str:
        header = {'class': self.asymptotic_class, 'beta': float(self.beta), 'ell': float(self.ell),
                  'shape': 'x'.join(str(n) for n in self.shape)}
        header.update(self.extra)
        arrays = [np.ravel(np.broadcast_to(getattr(self, name), self.shape)) for name in FIELD_COLUMNS]
        rows = zip(*(a.astype(float).tolist() for a in arrays))
        return csv_text(FIELD_COLUMNS, rows, header)


def dump_fields(fields: FieldDump, path: Optional[Union[str, Path]] = None) -> str:
    """Write a field dump to disk (or return its text)"""
    text = fields.to_csv()
    if path is not None:
        Path(path).write_text(text)
        logger.info(f"Wrote field dump {fields.shape} to {path}")
    return text


def parse_fields(text: str) -> FieldDump:
    """
    Read a field dump back into arrays

    Args:
        text: CSV text written by dump_fields

    Returns:
        FieldDump: Arrays reshaped to the recorded grid shape
    """
    data = read_csv(text)
    header = dict(data['header'])
    if tuple(data['columns']) != FIELD_COLUMNS:
        raise DomainError(f"Field dump needs columns {','.join(FIELD_COLUMNS)}, got {data['columns']}")
    table = np.asarray(data['rows'], dtype=float).reshape(-1, len(FIELD_COLUMNS))
    shape_text = header.pop('shape', '')
    try:
        shape = tuple(int(n) for n in shape_text.split('x')) if shape_text else (table.shape[0],)
        columns = {name: table[:, i].reshape(shape) for i, name in enumerate(FIELD_COLUMNS)}
    except ValueError as e:
        raise DomainError(f"Field dump shape {shape_text!r} does not match {table.shape[0]} rows") from e
    return FieldDump(
        asymptotic_class=header.pop('class', ''),
        beta=float(header.pop('beta', 0.0)),
        ell=float(header.pop('ell', 1.0)),
        extra=header,
        **columns,
    )


def load_fields(path: Union[str, Path]) -> FieldDump:
    return parse_fields(Path(path).read_text())
