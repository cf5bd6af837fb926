"""Convergence time against transmission power over the neighbor radius.

A node reaching r hops spends power P(r) = (r / sqrt(n))^alpha, with alpha
the path-loss exponent. Larger radii converge faster and cost more. Both
constrained programs are solved by scanning every integer radius in
[1, r_max], which is exact.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

from pydantic import BaseModel, Field

from .consts import POWER_REL_TOL
from .errors import InfeasibleError, OutOfRangeError
from .optimal import oracle_optimal
from .telemetry import get_tracer, record_sweep_point
from .topology import TopologySpec

logger = logging.getLogger(__name__)

__all__ = [
    "FrontierPoint",
    "TradeoffResult",
    "frontier",
    "min_power_given_time",
    "min_time_given_power",
    "power",
]


class FrontierPoint(BaseModel):
    r: int
    T: float
    P: float


class TradeoffResult(BaseModel):
    r_star: int | None = Field(default=None, description="Chosen radius; unset when infeasible.")
    T_at_r: float | None = None
    P_at_r: float | None = None
    feasible: bool
    frontier: list[FrontierPoint] = Field(description="Every scanned radius, by increasing r.")


def power(r: int, n: int, alpha: float) -> float:
    """P = (r / sqrt(n))^alpha"""
    if alpha <= 0:
        raise OutOfRangeError(f"Path-loss exponent must be positive, got alpha={alpha!r}")
    if r < 1 or n < 1:
        raise OutOfRangeError(f"Radius and node count must be positive, got r={r}, n={n}")
    return (r / math.sqrt(n)) ** alpha


def _point(base_spec: TopologySpec, r: int, alpha: float) -> FrontierPoint:
    spec = base_spec.with_radius(r).check()
    params = oracle_optimal(spec)
    record_sweep_point(variable="r")
    logger.debug(f"Frontier point {spec.describe()}: T={params.T!r}")
    return FrontierPoint(r=r, T=params.T, P=power(r, spec.n, alpha))


def frontier(
    base_spec: TopologySpec, r_max: int, alpha: float, *, workers: int = 1
) -> list[FrontierPoint]:
    """(r, T, P) for r = 1..r_max, T from the enumeration oracle."""
    if r_max < 1:
        raise OutOfRangeError(f"r_max must be at least 1, got {r_max}")
    power(1, base_spec.n, alpha)

    radii = range(1, r_max + 1)
    with get_tracer("torus_consensus.tradeoff").start_as_current_span(
        "tradeoff.scan",
        attributes={"tradeoff.n": base_spec.n, "tradeoff.r_max": r_max},
    ):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                points = list(executor.map(lambda r: _point(base_spec, r, alpha), radii))
        else:
            points = [_point(base_spec, r, alpha) for r in radii]

    for prev, cur in zip(points, points[1:]):
        if cur.T > prev.T:
            logger.warning(
                f"Convergence time rises from r={prev.r} to r={cur.r} "
                f"({prev.T!r} -> {cur.T!r}) on {base_spec.describe()}"
            )
    return points


def _within_power(p: float, p_max: float) -> bool:
    return p <= p_max or math.isclose(p, p_max, rel_tol=POWER_REL_TOL)


def min_time_given_power(
    base_spec: TopologySpec,
    r_max: int,
    p_max: float,
    alpha: float,
    *,
    workers: int = 1,
) -> TradeoffResult:
    """Minimize T subject to r <= r_max and P(r) <= p_max.

    Raises:
        InfeasibleError: even r = 1 exceeds the power budget
    """
    points = frontier(base_spec, r_max, alpha, workers=workers)
    feasible = [p for p in points if _within_power(p.P, p_max)]
    if not feasible:
        raise InfeasibleError(
            f"No radius in [1, {r_max}] keeps power within P_max={p_max!r} "
            f"(P(1)={points[0].P!r})",
            result=TradeoffResult(feasible=False, frontier=points),
        )

    best = min(feasible, key=lambda p: (p.T, p.r))
    if best.r != feasible[-1].r:
        logger.warning(
            f"Fastest feasible radius r={best.r} is not the largest feasible one "
            f"r={feasible[-1].r} on {base_spec.describe()}"
        )
    logger.info(
        f"Minimum time under P_max={p_max!r}: r*={best.r}, T={best.T!r}, P={best.P!r}"
    )
    return TradeoffResult(
        r_star=best.r, T_at_r=best.T, P_at_r=best.P, feasible=True, frontier=points
    )


def min_power_given_time(
    base_spec: TopologySpec,
    r_max: int,
    t_max: float,
    alpha: float,
    *,
    workers: int = 1,
) -> TradeoffResult:
    """Minimize P subject to r <= r_max and T(r) <= t_max.

    P grows with r, so the answer is the smallest radius meeting the deadline.

    Raises:
        InfeasibleError: no radius up to r_max converges fast enough
    """
    points = frontier(base_spec, r_max, alpha, workers=workers)
    for p in points:
        if p.T <= t_max:
            logger.info(
                f"Minimum power under T_max={t_max!r}: r*={p.r}, T={p.T!r}, P={p.P!r}"
            )
            return TradeoffResult(
                r_star=p.r, T_at_r=p.T, P_at_r=p.P, feasible=True, frontier=points
            )
    raise InfeasibleError(
        f"No radius in [1, {r_max}] reaches T_max={t_max!r} "
        f"(T({r_max})={points[-1].T!r})",
        result=TradeoffResult(feasible=False, frontier=points),
    )
