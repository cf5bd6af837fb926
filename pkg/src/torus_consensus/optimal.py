"""Optimal consensus parameter h, convergence parameter gamma and time T.

The optimal single link weight equalizes the two extreme nontrivial modes of
W = I - hL:

    h     = 2 / (lambda_2(L) + lambda_n(L))
    gamma = max(|1 - h lambda_2(L)|, |1 - h lambda_n(L)|)
          = (lambda_n - lambda_2) / (lambda_n + lambda_2)
    T     = 1 / ln(1 / gamma)

The oracle takes lambda_2 and lambda_n from full enumeration. The closed
forms assume which indices are extremal (see
``spectra.check_extremal_hypothesis``) and collapse the cosine sums with the
Dirichlet kernel.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

from pydantic import BaseModel, ConfigDict, Field

from .consts import DIRICHLET_SINGULAR_TOL, GAMMA_ZERO_TOL
from .enums import Method, Norm
from .errors import InvalidSpecError, OutOfRangeError, UnsupportedParityError
from .spectra import extremal_eigenvalues
from .topology import TopologySpec

logger = logging.getLogger(__name__)

__all__ = [
    "OptimalParams",
    "closed_form_gamma",
    "closed_form_h",
    "convergence_time",
    "dirichlet_kernel",
    "gamma_for_h",
    "optimal_for_eigenvalues",
    "optimal_params",
    "oracle_optimal",
    "parity_of",
]


class OptimalParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    h: float = Field(gt=0.0, description="Consensus parameter (uniform link weight).")
    gamma: float = Field(ge=0.0, description="Convergence parameter.")
    T: float = Field(ge=0.0, description="Convergence time 1/ln(1/gamma).")
    method: Method


def dirichlet_kernel(r: int, x: float) -> float:
    """sin((r + 1/2) x) / sin(x / 2), equal to 1 + 2 sum_{j=1..r} cos(jx).

    The kernel is 2*pi periodic, so x is first reduced to [-pi, pi]; at
    multiples of 2*pi it takes its limit 2r + 1.
    """
    d = math.remainder(x, 2.0 * math.pi)
    if abs(d) <= DIRICHLET_SINGULAR_TOL:
        return 2.0 * r + 1.0
    return math.sin((r + 0.5) * d) / math.sin(d / 2.0)


def convergence_time(gamma: float) -> float:
    """T = 1 / ln(1 / gamma), natural log, with T(0) = 0."""
    if not 0.0 <= gamma < 1.0:
        raise OutOfRangeError(f"gamma must lie in [0, 1), got {gamma!r}")
    if gamma == 0.0:
        return 0.0
    return -1.0 / math.log(gamma)


def _clamp_gamma(gamma: float) -> float:
    return 0.0 if gamma <= GAMMA_ZERO_TOL else gamma


def optimal_for_eigenvalues(lambda2: float, lambda_n: float) -> tuple[float, float]:
    """Optimal (h, gamma) for a Laplacian with the given extreme eigenvalues."""
    h = 2.0 / (lambda2 + lambda_n)
    gamma = max(abs(1.0 - h * lambda2), abs(1.0 - h * lambda_n))
    return h, _clamp_gamma(gamma)


def oracle_optimal(
    spec: TopologySpec, *, workers: int = 1, exhaustive: bool = False
) -> OptimalParams:
    """Optimal parameters from the enumerated spectrum; any neighborhood rule."""
    summary = extremal_eigenvalues(spec, workers=workers, exhaustive=exhaustive)
    h, gamma = optimal_for_eigenvalues(summary.lambda2_L, summary.lambdaN_L)
    return OptimalParams(h=h, gamma=gamma, T=convergence_time(gamma), method=Method.ORACLE)


def gamma_for_h(
    spec: TopologySpec, h: float, *, workers: int = 1, exhaustive: bool = False
) -> float:
    """Spectral radius of W = I - hL on the mean-zero subspace, for any h.

    1 - h*lambda is monotone in lambda, so the extremes sit at lambda_2 and
    lambda_n. Values >= 1 mean the iteration does not converge.
    """
    summary = extremal_eigenvalues(spec, workers=workers, exhaustive=exhaustive)
    gamma = max(abs(1.0 - h * summary.lambda2_L), abs(1.0 - h * summary.lambdaN_L))
    return _clamp_gamma(gamma)


def parity_of(spec: TopologySpec) -> str:
    """'even', 'odd' or 'mixed' over all axis sizes."""
    parities = {k % 2 for k in spec.dims}
    if parities == {0}:
        return "even"
    if parities == {1}:
        return "odd"
    return "mixed"


def _cos_pi(r: int) -> float:
    return 1.0 if r % 2 == 0 else -1.0


def _second_term(dims: tuple[int, ...], r: int) -> float:
    # The second-largest eigenvalue of W lives on the largest axis.
    return dirichlet_kernel(r, 2.0 * math.pi / max(dims))


def _cycle_even(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    a = _second_term(dims, r)
    c = _cos_pi(r)
    h = 1.0 / (2 * r + 1 - 0.5 * (a + c))
    gamma = (a - c) / (4 * r + 2 - (a + c))
    return h, gamma


def _cycle_odd(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    (n,) = dims
    a = _second_term(dims, r)
    # Equal to -cos(pi(2r+1)/2n) / cos(pi/2n) for odd r; the sign flips for even r.
    b = dirichlet_kernel(r, math.pi * (n - 1) / n)
    h = 1.0 / (2 * r + 1 - 0.5 * (a + b))
    gamma = (a - b) / (4 * r + 2 - (a + b))
    return h, gamma


def _torus_even(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    a = _second_term(dims, r)
    c = _cos_pi(r)
    denominator = 1.5 + 3 * r - 0.5 * (a + 2 * c)
    h = 1.0 / denominator
    gamma = (r + 0.5 + 0.5 * (a - 2 * c)) / denominator
    return h, gamma


def _torus_odd(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    a = _second_term(dims, r)
    b1, b2 = (dirichlet_kernel(r, math.pi * (k - 1) / k) for k in dims)
    denominator = 1.5 + 3 * r - 0.5 * (a + b1 + b2)
    h = 1.0 / denominator
    gamma = (r + 0.5 + 0.5 * (a - b1 - b2)) / denominator
    return h, gamma


def _mtorus_even(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    m = len(dims)
    a = _second_term(dims, r)
    c = _cos_pi(r)
    denominator = (m + 1) * (r + 0.5) - 0.5 * a - 0.5 * m * c
    h = 1.0 / denominator
    gamma = ((m - 1) * (r + 0.5) + 0.5 * a - 0.5 * m * c) / denominator
    return h, gamma


def _mtorus_odd(dims: tuple[int, ...], r: int) -> tuple[float, float]:
    m = len(dims)
    a = math.sin((r + 0.5) * 2.0 * math.pi / max(dims)) / math.sin(math.pi / max(dims))
    lobes = sum(
        math.sin((r + 0.5) * math.pi * (k - 1) / k) / math.sin(math.pi * (k - 1) / (2 * k))
        for k in dims
    )
    h = 1.0 / ((m + 1) * (r + 0.5) - 0.5 * a - 0.5 * lobes)
    gamma = ((m - 1) * (r + 0.5) + 0.5 * (a - lobes)) / (
        (m + 1) * (r + 0.5) - 0.5 * (a + lobes)
    )
    return h, gamma


_CLOSED_FORMS = {
    (1, "even"): _cycle_even,
    (1, "odd"): _cycle_odd,
    (2, "even"): _torus_even,
    (2, "odd"): _torus_odd,
}


@lru_cache(maxsize=4096)
def _closed_form(spec: TopologySpec) -> tuple[float, float]:
    spec.check()
    if spec.norm != Norm.PER_AXIS and not spec.is_cycle:
        raise InvalidSpecError(
            f"Closed forms cover the per-axis neighborhood only, got norm={spec.norm.value}"
        )
    parity = parity_of(spec)
    if parity == "mixed":
        raise UnsupportedParityError(
            f"Mixed even/odd dims {list(spec.dims)} have no closed form; use the oracle"
        )
    fallback = _mtorus_even if parity == "even" else _mtorus_odd
    form = _CLOSED_FORMS.get((spec.m, parity), fallback)
    h, gamma = form(spec.dims, spec.r)
    return h, _clamp_gamma(gamma)


def closed_form_h(spec: TopologySpec) -> float:
    """Optimal consensus parameter from the closed forms.

    Raises:
        UnsupportedParityError: dims mix even and odd sizes
        InvalidSpecError: invalid spec, or a multi-axis L1/L-infinity neighborhood
    """
    return _closed_form(spec)[0]


def closed_form_gamma(spec: TopologySpec) -> float:
    """Optimal convergence parameter from the closed forms, in [0, 1)."""
    return _closed_form(spec)[1]


def optimal_params(
    spec: TopologySpec,
    method: Method = Method.ORACLE,
    *,
    workers: int = 1,
    exhaustive: bool = False,
) -> OptimalParams:
    if method == Method.ORACLE:
        return oracle_optimal(spec, workers=workers, exhaustive=exhaustive)
    h, gamma = _closed_form(spec)
    return OptimalParams(
        h=h, gamma=gamma, T=convergence_time(gamma), method=Method.CLOSED_FORM
    )
