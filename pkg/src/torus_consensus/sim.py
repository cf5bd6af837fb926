"""Discrete average-consensus iteration on the sparse neighbor list.

Each node updates synchronously with

    x_i(t+1) = x_i(t) + h * sum_{j in N_i} (x_j(t) - x_i(t))

which is ``x(t+1) = W x(t)`` with ``W = I - hL``, evaluated without ever
materializing W.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from .consts import (
    SIM_DIVERGENCE_FACTOR,
    SIM_EPS,
    SIM_FIT_FRACTION,
    SIM_FIT_MIN_POINTS,
    SIM_SEED,
    SIM_T_MAX,
)
from .errors import InvalidSpecError, NoConvergenceError, OutOfRangeError
from .telemetry import get_tracer, record_sim_iterations
from .topology import TopologySpec, neighbor_list

logger = logging.getLogger(__name__)

__all__ = [
    "ConsensusState",
    "SimReport",
    "fit_contraction",
    "init_state",
    "run",
    "step",
]


@dataclass(frozen=True)
class ConsensusState:
    x: np.ndarray
    t: int
    x_avg: float

    @property
    def error(self) -> float:
        """e(t) = ||x(t) - x_avg * 1||_2"""
        return float(np.linalg.norm(self.x - self.x_avg))


class SimReport(BaseModel):
    iterations: int = Field(ge=0, description="Steps taken until the error target was met.")
    error_trace: list[float] = Field(description="e(t) for t = 0..iterations.")
    fitted_contraction: float = Field(
        ge=0.0, description="exp of the least-squares slope of ln e(t) over the tail."
    )
    avg_residual: float = Field(
        ge=0.0, description="max_t |mean(x(t)) - x_avg|; zero up to rounding."
    )
    seed: int


def init_state(
    spec: TopologySpec, seed: int = SIM_SEED, x0: np.ndarray | None = None
) -> ConsensusState:
    """x(0) drawn i.i.d. uniform on [0, 1) from numpy's PCG64, or ``x0`` if given."""
    spec.check()
    if x0 is None:
        x = np.random.default_rng(seed).random(spec.n)
    else:
        x = np.array(x0, dtype=np.float64).ravel()
        if x.shape != (spec.n,):
            raise InvalidSpecError(
                f"Initial vector has {x.size} entries, topology has n={spec.n}"
            )
    return ConsensusState(x=x, t=0, x_avg=float(x.mean()))


def _apply(x: np.ndarray, nbrs: np.ndarray, h: float) -> np.ndarray:
    return x + h * (x[nbrs].sum(axis=1) - nbrs.shape[1] * x)


def step(state: ConsensusState, spec: TopologySpec, h: float) -> ConsensusState:
    """One synchronous update; the input state is left untouched."""
    if h < 0:
        raise OutOfRangeError(f"Consensus parameter must be nonnegative, got h={h!r}")
    x = _apply(state.x, neighbor_list(spec), h)
    return ConsensusState(x=x, t=state.t + 1, x_avg=state.x_avg)


def fit_contraction(
    trace: list[float] | np.ndarray,
    fraction: float = SIM_FIT_FRACTION,
    min_points: int = SIM_FIT_MIN_POINTS,
) -> float:
    """Geometric decay factor of the tail of an error trace.

    Fits ln e(t) = a + b*t by least squares over the last ``fraction`` of the
    trace (at least ``min_points`` points, when available) and returns e^b.
    Returns 0.0 when fewer than two positive errors are left to fit.
    """
    errors = np.asarray(trace, dtype=np.float64)
    window = min(errors.size, max(math.ceil(fraction * errors.size), min_points))
    t = np.arange(errors.size)[errors.size - window :]
    tail = errors[errors.size - window :]
    positive = tail > 0
    if positive.sum() < 2:
        return 0.0
    slope, _ = np.polyfit(t[positive], np.log(tail[positive]), 1)
    return float(np.exp(slope))


def run(
    spec: TopologySpec,
    h: float,
    seed: int = SIM_SEED,
    eps: float = SIM_EPS,
    *,
    t_max: int = SIM_T_MAX,
    x0: np.ndarray | None = None,
    fit_fraction: float = SIM_FIT_FRACTION,
    fit_min_points: int = SIM_FIT_MIN_POINTS,
    divergence_factor: float = SIM_DIVERGENCE_FACTOR,
) -> SimReport:
    """Iterate until e(t) <= eps * e(0).

    Raises:
        OutOfRangeError: eps outside (0, 1) or negative h
        NoConvergenceError: ``t_max`` steps taken, or the error grew past
            ``divergence_factor * e(0)`` or stopped being finite
    """
    if not 0.0 < eps < 1.0:
        raise OutOfRangeError(f"eps must lie in (0, 1), got {eps!r}")
    if h < 0:
        raise OutOfRangeError(f"Consensus parameter must be nonnegative, got h={h!r}")

    state = init_state(spec, seed, x0)
    nbrs = neighbor_list(spec)
    x, x_avg = state.x, state.x_avg
    e0 = state.error
    trace = [e0]
    avg_residual = 0.0

    with get_tracer("torus_consensus.sim").start_as_current_span(
        "sim.run",
        attributes={"sim.n": spec.n, "sim.h": h, "sim.eps": eps, "sim.seed": seed},
    ) as span:
        t = 0
        # A constant vector is already at consensus.
        if np.ptp(x) > 0:
            target = eps * e0
            while trace[-1] > target:
                if t >= t_max:
                    record_sim_iterations(iterations=t, converged=False)
                    raise NoConvergenceError(
                        f"No convergence on {spec.describe()} with h={h!r} after "
                        f"{t} iterations (error {trace[-1]:.3e}, target {target:.3e})",
                        iterations=t,
                        last_error=trace[-1],
                    )
                x = _apply(x, nbrs, h)
                t += 1
                error = float(np.linalg.norm(x - x_avg))
                trace.append(error)
                avg_residual = max(avg_residual, abs(float(x.mean()) - x_avg))
                if not math.isfinite(error) or error > divergence_factor * e0:
                    record_sim_iterations(iterations=t, converged=False)
                    raise NoConvergenceError(
                        f"Consensus diverges on {spec.describe()} with h={h!r}: "
                        f"error {error:.3e} after {t} iterations from {e0:.3e}",
                        iterations=t,
                        last_error=error,
                    )
        span.set_attribute("sim.iterations", t)

    record_sim_iterations(iterations=t, converged=True)
    fitted = fit_contraction(trace, fit_fraction, fit_min_points)
    logger.info(
        f"Consensus on {spec.describe()} reached eps={eps:g} in {t} iterations "
        f"(fitted contraction {fitted:.6f})"
    )
    return SimReport(
        iterations=t,
        error_trace=trace,
        fitted_contraction=fitted,
        avg_residual=avg_residual,
        seed=seed,
    )
