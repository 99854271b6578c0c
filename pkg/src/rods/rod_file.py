"""
Rod File Format

This module implements the declarative rod file: one line per rod,
`v1 v2 z_end`, with `inf` as the end of the last rod. Blank lines and
lines starting with '#' are ignored.
"""

import logging
import math
from pathlib import Path
from typing import List, Union

from src.exceptions import RodDataError
from src.rods.rod_data import RodDataSet, RodStructure
from src.utils.serialization import format_number

logger = logging.getLogger(__name__)


def parse_rods(text: str) -> RodDataSet:
    """
    Parse rod file text

    Args:
        text: File contents

    Returns:
        RodDataSet: Parsed (not yet validated) rod data
    """
    structures: List[RodStructure] = []
    ends: List[float] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise RodDataError(f"Line {number}: expected 'v1 v2 z_end', got {raw.strip()!r}")
        try:
            v1, v2 = int(parts[0]), int(parts[1])
            z_end = float(parts[2])
        except ValueError as e:
            raise RodDataError(f"Line {number}: {e}") from e
        structures.append(RodStructure(v1, v2))
        ends.append(z_end)

    if not structures:
        raise RodDataError("Rod file contains no rods")
    if ends[-1] != math.inf:
        raise RodDataError(f"Last rod must end at inf, got {ends[-1]}")
    for n, z in enumerate(ends[:-1], start=1):
        if not math.isfinite(z):
            raise RodDataError(f"Rod {n} must have a finite end, got {z}")

    return RodDataSet(tuple(ends[:-1]), tuple(structures))


def format_rods(rods: RodDataSet) -> str:
    """Render a rod data set in the rod file format"""
    lines = []
    for rod in rods.rods:
        end = 'inf' if rod.end == math.inf else format_number(rod.end)
        lines.append(f"{rod.structure.v1} {rod.structure.v2} {end}")
    return "\n".join(lines) + "\n"


def load_rods(path: Union[str, Path]) -> RodDataSet:
    """Read a rod file from disk"""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        logger.error(f"Error reading rod file {path}: {str(e)}")
        raise RodDataError(f"Cannot read rod file {path}: {e}") from e
    rods = parse_rods(text)
    logger.info(f"Loaded {len(rods.structures)} rods from {path}")
    return rods


def save_rods(rods: RodDataSet, path: Union[str, Path]) -> None:
    """Write a rod file to disk"""
    Path(path).write_text(format_rods(rods))
    logger.info(f"Saved rod data to {path}")
