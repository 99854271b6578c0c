"""
Reissner-Nordstrom against Schwarzschild

This module implements the closed-form check of the mass inequality for
the Reissner-Nordstrom family with mass parameter M and charge parameter
c1 against the Schwarzschild instanton with mass d = sqrt(M^2 - c1) and the
same period ell = r_plus^2 / d, so that both share their rod data. The
slack is 4 pi ell P(M, c1) with

    P(M, c1) = M - d - 2 d log((M + d) / (2 d))
             = 2 e^{-x} d (1 - e^x + x e^x),   x = log(2 d / (M + d)),

which is nonnegative and vanishes exactly for c1 = 0.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src import config
from src.comparison.gap import TheoremGapReport, theorem_gap
from src.exceptions import ConvergenceError, DomainError
from src.families import ReissnerNordstrom, Schwarzschild
from src.utils.serialization import csv_text

logger = logging.getLogger(__name__)

FORM_AGREEMENT_TOL = 1e-12
SWEEP_COLUMNS = ('M', 'c1', 'P', 'slack')


def _check_domain(M: float, c1: float) -> Tuple[float, float]:
    """(d, r_plus) for admissible parameters"""
    if not (math.isfinite(M) and math.isfinite(c1)):
        raise DomainError(f"Parameters must be finite, got M={M}, c1={c1}")
    if c1 >= M ** 2:
        raise DomainError(f"Reissner-Nordstrom needs c1 < M^2, got M={M}, c1={c1}")
    d = math.sqrt(M ** 2 - c1)
    r_plus = M + d
    if r_plus <= 0:
        raise DomainError(f"Reissner-Nordstrom needs r_plus = M + d > 0, got M={M}, c1={c1}")
    return d, r_plus


def admissible(M: float, c1: float) -> bool:
    try:
        _check_domain(M, c1)
    except DomainError:
        return False
    return True


def p_direct(M: float, c1: float) -> float:
    """P(M, c1) = M - d - 2 d log((M + d) / (2 d))"""
    d, r_plus = _check_domain(M, c1)
    return M - d - 2 * d * math.log(r_plus / (2 * d))


def p_exponential(M: float, c1: float) -> float:
    """P(M, c1) = 2 e^{-x} d (1 - e^x + x e^x) with x = log(2 d / r_plus)"""
    d, r_plus = _check_domain(M, c1)
    x = math.log(2 * d / r_plus)
    # 1 - e^x + x e^x without cancellation near x = 0
    bracket = x * math.exp(x) - math.expm1(x)
    return 2 * math.exp(-x) * d * bracket


def rn_vs_schwarzschild_P(M: float, c1: float) -> float:
    """
    P(M, c1) from both closed forms, checked against each other

    Args:
        M: Mass parameter of the Reissner-Nordstrom instanton
        c1: Charge parameter, c1 < M^2 with M + sqrt(M^2 - c1) > 0

    Returns:
        float: P(M, c1) >= 0
    """
    direct = p_direct(M, c1)
    exponential = p_exponential(M, c1)
    if abs(direct - exponential) > FORM_AGREEMENT_TOL * max(1.0, abs(direct)):
        raise ConvergenceError(f"Closed forms of P disagree at M={M}, c1={c1}: {direct!r} vs {exponential!r}",
                               {'M': M, 'c1': c1, 'direct': direct, 'exponential': exponential})
    return direct


def rn_partner(M: float, c1: float) -> Tuple[ReissnerNordstrom, Schwarzschild]:
    """The Reissner-Nordstrom instanton and its Schwarzschild partner with the same rods"""
    d, _ = _check_domain(M, c1)
    rn = ReissnerNordstrom.from_mass(M, c1)
    return rn, Schwarzschild(d, ell=rn.ell)


def closed_form_slack(M: float, c1: float) -> float:
    """4 pi ell P(M, c1) for the regular period ell = r_plus^2 / d"""
    d, r_plus = _check_domain(M, c1)
    return 4 * math.pi * (r_plus ** 2 / d) * rn_vs_schwarzschild_P(M, c1)


class RnComparisonReport(BaseModel):
    """Pipeline slack next to its closed form, both normalizations kept"""
    model_config = ConfigDict(extra='forbid')

    M: float
    c1: float
    ell: float
    P: float = Field(description="slack / (4 pi ell)")
    P_exponential: float
    closed_form_slack: float = Field(description="4 pi ell P")
    relative_error: float = Field(ge=0, description="|slack - closed_form_slack| / max(|closed_form_slack|, tol)")
    gap: TheoremGapReport


def rn_comparison(M: float, c1: float, tol: float = config.COMPARISON_TOL) -> RnComparisonReport:
    """
    Run the mass inequality pipeline on the Reissner-Nordstrom pair

    Args:
        M: Mass parameter
        c1: Charge parameter
        tol: Relative tolerance budget

    Returns:
        RnComparisonReport: The theorem gap and the closed-form bookkeeping
    """
    rn, partner = rn_partner(M, c1)
    gap = theorem_gap(rn, partner, tol=tol)
    P = rn_vs_schwarzschild_P(M, c1)
    expected = 4 * math.pi * rn.ell * P
    relative = abs(gap.slack - expected) / max(abs(expected), tol)
    if relative > tol:
        logger.warning(f"RN comparison at M={M}, c1={c1}: pipeline slack {gap.slack:.10g} "
                       f"vs closed form {expected:.10g}")
    return RnComparisonReport(M=M, c1=c1, ell=rn.ell, P=P, P_exponential=p_exponential(M, c1),
                              closed_form_slack=expected, relative_error=relative, gap=gap)


@dataclass(frozen=True)
class SweepRow:
    M: float
    c1: float
    P: float
    slack: float


def sweep_points(M_range: Tuple[float, float] = (-2.0, 2.0), c1_range: Tuple[float, float] = (-4.0, 4.0),
                 samples: int = 100, seed: Optional[int] = None) -> List[Tuple[float, float]]:
    """
    Admissible (M, c1) points, random when a seed is given, else a regular grid

    The regular grid has samples x samples nodes with c1 running from the
    lower bound to min(upper bound, M^2); random points draw c1 uniformly in
    the same interval. Inadmissible points are dropped.
    """
    if samples < 1:
        raise DomainError(f"Sweep needs at least one sample, got {samples}")
    (m_lo, m_hi), (c_lo, c_hi) = M_range, c1_range
    if m_hi < m_lo or c_hi < c_lo:
        raise DomainError(f"Empty sweep ranges M={M_range}, c1={c1_range}")

    points: List[Tuple[float, float]] = []
    if seed is None:
        for M in np.linspace(m_lo, m_hi, samples):
            top = min(c_hi, M ** 2)
            for c1 in np.linspace(c_lo, top, samples):
                points.append((float(M), float(c1)))
    else:
        rng = np.random.default_rng(seed)
        for M in rng.uniform(m_lo, m_hi, samples):
            top = min(c_hi, M ** 2)
            points.append((float(M), float(rng.uniform(c_lo, top)) if top > c_lo else float(c_lo)))
    return [p for p in points if admissible(*p)]


def sweep(points: Sequence[Tuple[float, float]], pipeline: bool = False) -> List[SweepRow]:
    """
    P and the slack at each point

    Args:
        points: (M, c1) pairs
        pipeline: Take the slack from the mass and defect engines instead of 4 pi ell P

    Returns:
        list: SweepRow per point, in input order
    """
    def row(point: Tuple[float, float]) -> SweepRow:
        M, c1 = point
        P = rn_vs_schwarzschild_P(M, c1)
        slack = rn_comparison(M, c1).gap.slack if pipeline else closed_form_slack(M, c1)
        return SweepRow(M, c1, P, slack)

    workers = min(config.THREADS, max(1, len(points)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, points))
    logger.info(f"Swept {len(rows)} points, min P = {min((r.P for r in rows), default=math.nan):.3e}")
    return rows


def sweep_csv(rows: Sequence[SweepRow], header: Optional[dict] = None) -> str:
    """CSV text with columns M, c1, P, slack"""
    return csv_text(SWEEP_COLUMNS, (astuple(r) for r in rows), header=header)
