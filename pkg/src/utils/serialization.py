"""
Output Serialization

This module implements the JSON and CSV writers used by the command line.
Every floating point number is written with a fixed number of significant
digits so that repeated runs produce byte-identical files.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from src import config

logger = logging.getLogger(__name__)


def format_number(value: float, digits: int = config.OUTPUT_DIGITS) -> str:
    """
    Format a float with a fixed number of significant digits

    Args:
        value: Number to format
        digits: Significant digits

    Returns:
        str: Text form; non-finite values become 'nan', 'inf' or '-inf'
    """
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return format(value, f'.{digits}g')


def _to_plain(obj: Any) -> Any:
    """Convert numpy containers and scalars to plain Python values"""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _encode(obj: Any, indent: int, level: int, digits: int) -> str:
    obj = _to_plain(obj)
    pad = ' ' * (indent * (level + 1))
    end = ' ' * (indent * level)

    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # JSON has no literal for inf/nan
        return format_number(obj, digits) if math.isfinite(obj) else 'null'
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1, digits)}"
                 for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        items = [f"{pad}{_encode(v, indent, level + 1, digits)}" for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    raise TypeError(f"Object of type {type(obj).__name__} is not serializable")


def dumps(obj: Any, indent: int = 2, digits: int = config.OUTPUT_DIGITS) -> str:
    """
    Serialize plain data to JSON text with fixed-precision numbers

    Args:
        obj: Nested dicts, lists, numbers, strings, numpy arrays
        indent: Spaces per nesting level
        digits: Significant digits for floats

    Returns:
        str: JSON text terminated by a newline
    """
    return _encode(obj, indent, 0, digits) + '\n'


def write_json(obj: Any, path: Optional[Path] = None) -> str:
    """Write JSON to a path (or return it for stdout)"""
    text = dumps(obj)
    if path is not None:
        Path(path).write_text(text)
        logger.info(f"Wrote JSON to {path}")
    return text


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]],
             header: Optional[Dict[str, Any]] = None,
             digits: int = config.OUTPUT_DIGITS) -> str:
    """
    Render rows as CSV, optionally preceded by '#'-prefixed header lines

    Args:
        columns: Column names
        rows: Row values; floats use fixed significant digits
        header: Metadata written as '# key=value' lines
        digits: Significant digits for floats

    Returns:
        str: CSV text
    """
    buffer = io.StringIO()
    if header:
        for key, value in header.items():
            if isinstance(value, float):
                value = format_number(value, digits)
            buffer.write(f"# {key}={value}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(v, digits) if isinstance(_to_plain(v), float) else _to_plain(v)
                         for v in row])
    return buffer.getvalue()


def read_csv(text: str) -> Dict[str, Any]:
    """
    Parse CSV text written by csv_text

    Args:
        text: CSV text with optional '#' header lines

    Returns:
        dict: {'header': {key: str}, 'columns': [...], 'rows': [[float, ...], ...]}
    """
    header: Dict[str, str] = {}
    body: List[str] = []
    for line in text.splitlines():
        if line.startswith('#'):
            key, _, value = line[1:].strip().partition('=')
            header[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)

    if not body:
        return {'header': header, 'columns': [], 'rows': []}

    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return {'header': header, 'columns': columns, 'rows': rows}
