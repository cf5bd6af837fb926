"""Laplacian and weight-matrix spectra of r-nearest-neighbor tori.

Every topology here is a (block-)circulant graph, so the Fourier vectors
``exp(2*pi*i * sum_i j_i u_i / k_i)`` are its eigenvectors and the eigenvalue
at index ``(j_1, ..., j_m)`` is the DFT of the stencil:

    lambda_L(j) = degree - sum_{o in stencil} cos(2*pi * sum_i j_i o_i / k_i)

For the per-axis neighborhood this separates into a sum of cycle spectra,
one per axis. The weight matrix ``W = I - hL`` shares the eigenvectors, with
eigenvalues ``1 - h * lambda_L(j)``.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
import scipy.fft
from pydantic import BaseModel, ConfigDict, Field

from .consts import DISCONNECTED_TOL, HYPOTHESIS_TOL, TIE_TOL
from .enums import Norm
from .errors import DisconnectedError, InvalidSpecError
from .telemetry import get_tracer, record_enumeration
from .topology import TopologySpec, build_stencil, neighbor_list

logger = logging.getLogger(__name__)

__all__ = [
    "EigenIndex",
    "HypothesisCheck",
    "SpectralSummary",
    "axis_spectrum",
    "check_extremal_hypothesis",
    "claimed_extremal_indices",
    "extremal_eigenvalues",
    "laplacian_eigenvalue",
    "laplacian_spectrum",
    "verify_eigenpair",
    "weight_eigenvalue",
]

EigenIndex = tuple[int, ...]

SEPARABLE = "separable"
STENCIL_DFT = "stencil_dft"


class SpectralSummary(BaseModel):
    """Extreme nontrivial Laplacian eigenvalues and where they sit."""

    model_config = ConfigDict(frozen=True)

    lambda2_L: float = Field(description="Smallest nonzero-index eigenvalue.")
    lambdaN_L: float = Field(description="Largest eigenvalue.")
    arg2_index: EigenIndex
    argmax_index: EigenIndex
    n: int = Field(description="Number of eigenvalues enumerated.")
    enumeration: str = Field(description="'separable' or 'stencil_dft'.")


class HypothesisCheck(BaseModel):
    """Whether the indices assumed by the closed forms really are extremal."""

    model_config = ConfigDict(frozen=True)

    holds: bool
    second_index: EigenIndex
    smallest_index: EigenIndex
    claimed_lambda2_L: float
    claimed_lambdaN_L: float
    lambda2_L: float
    lambdaN_L: float


def _as_index(spec: TopologySpec, idx: int | tuple[int, ...] | list[int]) -> EigenIndex:
    if isinstance(idx, (int, np.integer)):
        idx = (int(idx),)
    idx = tuple(int(j) for j in idx)
    if len(idx) != spec.m:
        raise InvalidSpecError(
            f"Eigen-index {idx} has {len(idx)} components, topology has m={spec.m}"
        )
    for j, k in zip(idx, spec.dims):
        if not 0 <= j < k:
            raise InvalidSpecError(f"Eigen-index {idx} out of bounds for dims {spec.dims}")
    return idx


def _axis_cos_sum(k: int, r: int, j: int) -> float:
    """sum_{s=1..r} cos(2*pi*j*s/k), with the phase reduced mod k."""
    s = np.arange(1, r + 1)
    return float(np.cos(2.0 * np.pi * ((j * s) % k) / k).sum())


def _require_per_axis(spec: TopologySpec, what: str) -> None:
    if spec.norm != Norm.PER_AXIS and not spec.is_cycle:
        raise InvalidSpecError(
            f"{what} covers the per-axis neighborhood only, got norm={spec.norm.value}"
        )


def axis_spectrum(k: int, r: int) -> np.ndarray:
    """Laplacian spectrum of the r-nearest-neighbor cycle on k nodes, by index."""
    j = np.arange(k)[:, None]
    s = np.arange(1, r + 1)[None, :]
    values = 2.0 * r - 2.0 * np.cos(2.0 * np.pi * ((j * s) % k) / k).sum(axis=1)
    values[0] = 0.0
    return values


def laplacian_eigenvalue(spec: TopologySpec, idx: int | tuple[int, ...]) -> float:
    """Laplacian eigenvalue at ``idx``; the all-zeros index gives exactly 0."""
    spec.check()
    idx = _as_index(spec, idx)
    if spec.norm == Norm.PER_AXIS or spec.is_cycle:
        return float(
            sum(2.0 * spec.r - 2.0 * _axis_cos_sum(k, spec.r, j) for j, k in zip(idx, spec.dims))
        )

    stencil = build_stencil(spec)
    dims = np.asarray(spec.dims)
    phase = (((np.asarray(idx) * stencil.array) % dims) / dims).sum(axis=1)
    return float(stencil.degree - np.cos(2.0 * np.pi * phase).sum())


def weight_eigenvalue(spec: TopologySpec, h: float, idx: int | tuple[int, ...]) -> float:
    """Eigenvalue of W = I - hL at ``idx`` for the per-axis neighborhood.

    (1 - 2mrh) + 2h * sum_{s=1..r} sum_{i=1..m} cos(2*pi*j_i*s/k_i)
    """
    spec.check()
    _require_per_axis(spec, "The weight-matrix eigenvalue formula")
    idx = _as_index(spec, idx)
    cos_total = sum(_axis_cos_sum(k, spec.r, j) for j, k in zip(idx, spec.dims))
    return (1.0 - 2.0 * spec.m * spec.r * h) + 2.0 * h * cos_total


def laplacian_spectrum(
    spec: TopologySpec, *, workers: int = 1, exhaustive: bool = False
) -> np.ndarray:
    """All Laplacian eigenvalues as an array of shape ``dims``.

    Per-axis topologies sum the per-axis cycle spectra unless ``exhaustive``
    is set; everything else takes the m-dimensional DFT of the stencil's
    indicator array.
    """
    spec.check()
    if (spec.norm == Norm.PER_AXIS or spec.is_cycle) and not exhaustive:
        total = np.zeros(spec.dims)
        for axis, k in enumerate(spec.dims):
            shape = [1] * spec.m
            shape[axis] = k
            total = total + axis_spectrum(k, spec.r).reshape(shape)
        return total

    stencil = build_stencil(spec)
    indicator = np.zeros(spec.dims)
    np.add.at(indicator, tuple((stencil.array % np.asarray(spec.dims)).T), 1.0)
    spectrum = stencil.degree - scipy.fft.fftn(indicator, workers=workers).real
    spectrum[(0,) * spec.m] = 0.0
    return spectrum


def _first_at_most(values: np.ndarray, bound: float) -> int:
    return int(np.flatnonzero(values <= bound)[0])


def _first_at_least(values: np.ndarray, bound: float) -> int:
    return int(np.flatnonzero(values >= bound)[0])


def _separable_extremes(spec: TopologySpec) -> SpectralSummary:
    per_axis = [axis_spectrum(k, spec.r) for k in spec.dims]

    argmax = tuple(_first_at_least(f, f.max() - TIE_TOL) for f in per_axis)
    lambda_n = float(sum(f.max() for f in per_axis))

    # Only single-axis indices can attain the minimum; among tied axes the
    # later one comes first in row-major order.
    lows = [float(f[1:].min()) for f in per_axis]
    lambda_2 = min(lows)
    best_axis = max(axis for axis, low in enumerate(lows) if low <= lambda_2 + TIE_TOL)
    best_j = 1 + _first_at_most(per_axis[best_axis][1:], lambda_2 + TIE_TOL)
    arg2 = tuple(best_j if axis == best_axis else 0 for axis in range(spec.m))

    return SpectralSummary(
        lambda2_L=lambda_2,
        lambdaN_L=lambda_n,
        arg2_index=arg2,
        argmax_index=argmax,
        n=spec.n,
        enumeration=SEPARABLE,
    )


def _dft_extremes(spec: TopologySpec, workers: int) -> SpectralSummary:
    flat = laplacian_spectrum(spec, workers=workers, exhaustive=True).ravel()
    rest = flat[1:]
    lambda_2 = float(rest.min())
    lambda_n = float(flat.max())
    arg2 = 1 + _first_at_most(rest, lambda_2 + TIE_TOL)
    argmax = _first_at_least(flat, lambda_n - TIE_TOL)

    def unravel(flat_index: int) -> EigenIndex:
        return tuple(int(c) for c in np.unravel_index(flat_index, spec.dims))

    return SpectralSummary(
        lambda2_L=lambda_2,
        lambdaN_L=lambda_n,
        arg2_index=unravel(arg2),
        argmax_index=unravel(argmax),
        n=spec.n,
        enumeration=STENCIL_DFT,
    )


@lru_cache(maxsize=1024)
def extremal_eigenvalues(
    spec: TopologySpec, *, workers: int = 1, exhaustive: bool = False
) -> SpectralSummary:
    """Enumerate every eigen-index and return lambda_2(L) and lambda_n(L).

    Ties resolve to the first index in row-major order.

    Raises:
        DisconnectedError: some nonzero index has a (numerically) zero eigenvalue
    """
    spec.check()
    separable = (spec.norm == Norm.PER_AXIS or spec.is_cycle) and not exhaustive
    method = SEPARABLE if separable else STENCIL_DFT

    with get_tracer("torus_consensus.spectra").start_as_current_span(
        "spectra.enumerate",
        attributes={"spectra.n": spec.n, "spectra.m": spec.m, "spectra.method": method},
    ):
        summary = _separable_extremes(spec) if separable else _dft_extremes(spec, workers)
    record_enumeration(method=method)

    if summary.lambda2_L <= DISCONNECTED_TOL:
        raise DisconnectedError(
            f"Topology {spec.describe()} is disconnected: eigen-index "
            f"{summary.arg2_index} has eigenvalue {summary.lambda2_L:.3e}"
        )
    logger.debug(
        f"Spectrum of {spec.describe()}: lambda2={summary.lambda2_L!r} at "
        f"{summary.arg2_index}, lambdaN={summary.lambdaN_L!r} at {summary.argmax_index}"
    )
    return summary


def verify_eigenpair(spec: TopologySpec, idx: int | tuple[int, ...]) -> float:
    """Residual of the Fourier pair at ``idx`` against the actual graph.

    Applies L through the neighbor list, independently of any eigenvalue
    formula's derivation, to the cosine and sine Fourier vectors and returns
    the larger ``||L v - lambda v||_inf``.
    """
    idx = _as_index(spec.check(), idx)
    nbrs = neighbor_list(spec)
    degree = nbrs.shape[1]
    dims = np.asarray(spec.dims)[:, None]
    coords = np.indices(spec.dims).reshape(spec.m, spec.n)
    phase = (((np.asarray(idx)[:, None] * coords) % dims) / dims).sum(axis=0)
    eigenvalue = laplacian_eigenvalue(spec, idx)

    residual = 0.0
    for v in (np.cos(2.0 * np.pi * phase), np.sin(2.0 * np.pi * phase)):
        lv = degree * v - v[nbrs].sum(axis=1)
        residual = max(residual, float(np.abs(lv - eigenvalue * v).max()))
    return residual


def claimed_extremal_indices(spec: TopologySpec) -> tuple[EigenIndex, EigenIndex]:
    """Indices the closed forms assume for lambda_2(L) and lambda_n(L).

    lambda_2 at the unit index on the largest axis; lambda_n at k_i/2 on
    even axes and (k_i-1)/2 on odd axes.
    """
    spec.check()
    largest = max(spec.dims)
    axis = max(i for i, k in enumerate(spec.dims) if k == largest)
    second = tuple(1 if i == axis else 0 for i in range(spec.m))
    smallest = tuple(k // 2 if k % 2 == 0 else (k - 1) // 2 for k in spec.dims)
    return second, smallest


def check_extremal_hypothesis(
    spec: TopologySpec, *, workers: int = 1, exhaustive: bool = False
) -> HypothesisCheck:
    """Compare the closed forms' assumed extremes with the enumerated ones."""
    _require_per_axis(spec.check(), "The closed-form extremal-index hypothesis")
    second, smallest = claimed_extremal_indices(spec)
    summary = extremal_eigenvalues(spec, workers=workers, exhaustive=exhaustive)
    claimed_2 = laplacian_eigenvalue(spec, second)
    claimed_n = laplacian_eigenvalue(spec, smallest)
    holds = (
        abs(claimed_2 - summary.lambda2_L) <= HYPOTHESIS_TOL
        and abs(claimed_n - summary.lambdaN_L) <= HYPOTHESIS_TOL
    )
    if not holds:
        logger.warning(
            f"Extremal-index hypothesis fails for {spec.describe()}: "
            f"claimed ({claimed_2!r}, {claimed_n!r}) at ({second}, {smallest}), "
            f"enumerated ({summary.lambda2_L!r}, {summary.lambdaN_L!r}) at "
            f"({summary.arg2_index}, {summary.argmax_index})"
        )
    return HypothesisCheck(
        holds=holds,
        second_index=second,
        smallest_index=smallest,
        claimed_lambda2_L=claimed_2,
        claimed_lambdaN_L=claimed_n,
        lambda2_L=summary.lambda2_L,
        lambdaN_L=summary.lambdaN_L,
    )
