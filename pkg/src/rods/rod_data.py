"""
Rod Data Sets

This module implements rod structures, rod data sets and their validation.
A rod data set records which integer combination of the two torus Killing
fields degenerates on each interval of the axis of the orbit space.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from src.exceptions import RodDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RodStructure:
    """Integer rod vector (v1, v2)"""
    v1: int
    v2: int

    def problems(self) -> List[str]:
        """List violated invariants of this rod vector"""
        if (self.v1, self.v2) == (0, 0):
            return ["rod structure (0,0) is not allowed"]
        if math.gcd(abs(self.v1), abs(self.v2)) != 1:
            return [f"components of ({self.v1},{self.v2}) are not relatively prime"]
        return []

    @property
    def is_valid(self) -> bool:
        return not self.problems()

    def transformed(self, matrix: Sequence[Sequence[int]]) -> 'RodStructure':
        """Apply an integer change of torus basis"""
        (a, b), (c, d) = matrix
        return RodStructure(a * self.v1 + b * self.v2, c * self.v1 + d * self.v2)

    def as_tuple(self) -> Tuple[int, int]:
        return (self.v1, self.v2)

    def __str__(self) -> str:
        return f"({self.v1},{self.v2})"


def corner_determinant(a: RodStructure, b: RodStructure) -> int:
    """Determinant of the 2x2 matrix with rows a and b"""
    return a.v1 * b.v2 - a.v2 * b.v1


def corner_admissible(a: RodStructure, b: RodStructure) -> bool:
    """
    Check the admissibility condition at a corner

    Args:
        a: Rod structure before the turning point
        b: Rod structure after the turning point

    Returns:
        bool: True iff det[[a.v1, a.v2], [b.v1, b.v2]] is +1 or -1
    """
    return abs(corner_determinant(a, b)) == 1


@dataclass(frozen=True)
class Rod:
    """One axis interval [start, end] with its rod structure"""
    index: int  # 1-based position in the data set
    structure: RodStructure
    start: float  # -inf for the first rod
    end: float  # +inf for the last rod

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.start) and math.isfinite(self.end)

    @property
    def length(self) -> float:
        return self.end - self.start

    def contains(self, z: float) -> bool:
        """Strict interior test"""
        return self.start < z < self.end


@dataclass(frozen=True)
class ValidationIssue:
    """A violated rod data invariant"""
    kind: str  # 'coprimality', 'ordering', 'admissibility', 'adjacency', 'count'
    rod_index: Optional[int]
    message: str


@dataclass
class ValidationReport:
    """Result of validate_rod_data"""
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues

    def kinds(self) -> List[str]:
        return [issue.kind for issue in self.issues]

    def to_dict(self) -> dict:
        return {
            'valid': self.valid,
            'issues': [
                {'kind': i.kind, 'rod_index': i.rod_index, 'message': i.message}
                for i in self.issues
            ],
        }


@dataclass(frozen=True)
class RodDataSet:
    """
    Ordered axis rods

    turning_points holds z_1 < ... < z_N and structures holds the N+1 rod
    vectors; rod n covers [z_{n-1}, z_n] with z_0 = -inf and z_{N+1} = +inf.
    """
    turning_points: Tuple[float, ...]
    structures: Tuple[RodStructure, ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, int]],
                   turning_points: Sequence[float] = ()) -> 'RodDataSet':
        """Build a data set from integer pairs and turning points"""
        return cls(tuple(float(z) for z in turning_points),
                   tuple(RodStructure(int(a), int(b)) for a, b in pairs))

    @property
    def rods(self) -> List[Rod]:
        if len(self.structures) != len(self.turning_points) + 1:
            raise RodDataError(f"{len(self.structures)} rod structures for {len(self.turning_points)} turning points")
        edges = [-math.inf, *self.turning_points, math.inf]
        return [Rod(n + 1, s, edges[n], edges[n + 1]) for n, s in enumerate(self.structures)]

    @property
    def finite_rods(self) -> List[Rod]:
        return [rod for rod in self.rods if rod.is_finite]

    @property
    def first(self) -> RodStructure:
        return self.structures[0]

    @property
    def last(self) -> RodStructure:
        return self.structures[-1]

    def rod_at(self, z: float) -> Rod:
        """Rod whose closed interval contains z (left-most on a tie)"""
        for rod in self.rods:
            if rod.start <= z <= rod.end:
                return rod
        raise RodDataError(f"No rod contains z={z}")

    def transformed(self, matrix: Sequence[Sequence[int]]) -> 'RodDataSet':
        """Apply the same integer change of torus basis to every rod"""
        return RodDataSet(self.turning_points, tuple(s.transformed(matrix) for s in self.structures))

    def pattern(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(s.as_tuple() for s in self.structures)

    def same_rods(self, other: 'RodDataSet', tol: float = 0.0) -> bool:
        """Equal rod vectors (up to sign) and turning points within tol"""
        if len(self.structures) != len(other.structures):
            return False
        for a, b in zip(self.structures, other.structures):
            if a.as_tuple() != b.as_tuple() and a.as_tuple() != (-b.v1, -b.v2):
                return False
        return all(abs(x - y) <= tol * max(1.0, abs(x)) for x, y in
                   zip(self.turning_points, other.turning_points))

    def __str__(self) -> str:
        if len(self.structures) != len(self.turning_points) + 1:
            points = ",".join(f"{z:g}" for z in self.turning_points)
            return f"{' '.join(str(s) for s in self.structures)} at z=[{points}]"
        return " ".join(f"{rod.structure}[{rod.start:g},{rod.end:g}]" for rod in self.rods)


def validate_rod_data(rods: RodDataSet) -> ValidationReport:
    """
    Report every violated invariant of a rod data set

    Args:
        rods: Rod data set to check

    Returns:
        ValidationReport: issues in rod order; empty iff valid
    """
    report = ValidationReport()
    n_points = len(rods.turning_points)

    if len(rods.structures) != n_points + 1:
        report.issues.append(ValidationIssue(
            'count', None,
            f"{len(rods.structures)} rod structures for {n_points} turning points (expected {n_points + 1})"))

    for n, structure in enumerate(rods.structures, start=1):
        for message in structure.problems():
            report.issues.append(ValidationIssue('coprimality', n, message))

    for n in range(1, n_points):
        z_prev, z_next = rods.turning_points[n - 1], rods.turning_points[n]
        if not (z_prev < z_next):
            report.issues.append(ValidationIssue(
                'ordering', n + 1, f"turning points z_{n}={z_prev} and z_{n + 1}={z_next} are not strictly increasing"))
    for n, z in enumerate(rods.turning_points, start=1):
        if not math.isfinite(z):
            report.issues.append(ValidationIssue('ordering', n, f"turning point z_{n}={z} is not finite"))

    for n in range(1, len(rods.structures)):
        a, b = rods.structures[n - 1], rods.structures[n]
        if a.as_tuple() == b.as_tuple():
            report.issues.append(ValidationIssue(
                'adjacency', n + 1, f"rods {n} and {n + 1} share the structure {a}"))
        if not corner_admissible(a, b):
            report.issues.append(ValidationIssue(
                'admissibility', n + 1,
                f"corner between rods {n} and {n + 1}: det = {corner_determinant(a, b)}, expected +1 or -1"))

    if report.valid:
        logger.debug(f"Rod data {rods} is valid")
    else:
        logger.debug(f"Rod data {rods} has {len(report.issues)} issue(s)")
    return report
