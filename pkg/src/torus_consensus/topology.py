"""r-nearest-neighbor cycle and torus topologies.

A topology is translation invariant: every node sees the same symmetric set
of integer offsets (the stencil), and node ``u`` links to ``(u + o) mod dims``
for each offset ``o``. Nodes are numbered by encoding their multi-index
``(j_1, ..., j_m)`` in row-major order, which is the block-circulant layout
of the weight matrix.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse

from .consts import DENSE_MAX_NODES
from .enums import Norm
from .errors import InvalidSpecError

logger = logging.getLogger(__name__)

__all__ = [
    "Stencil",
    "TopologySpec",
    "build_stencil",
    "laplacian_matrix",
    "neighbor_list",
    "node_index",
    "node_coords",
    "weight_matrix",
]


class TopologySpec(BaseModel):
    """An m-dimensional r-nearest-neighbor torus (m = 1 is the cycle)."""

    model_config = ConfigDict(frozen=True)

    dims: tuple[int, ...] = Field(description="Nodes per axis, k_1..k_m.")
    r: int = Field(description="Neighbor radius in hops.")
    norm: Norm = Field(
        default=Norm.PER_AXIS,
        description="Neighborhood rule: 'peraxis', 'l1' or 'linf'.",
    )

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def n(self) -> int:
        return math.prod(self.dims)

    @property
    def is_cycle(self) -> bool:
        return self.m == 1

    def check(self) -> "TopologySpec":
        if self.m < 1:
            raise InvalidSpecError("A topology needs at least one dimension")
        if self.r < 1:
            raise InvalidSpecError(f"Neighbor radius must be positive, got r={self.r}")
        bad = [k for k in self.dims if k < 1]
        if bad:
            raise InvalidSpecError(f"Axis sizes must be positive, got {list(self.dims)}")
        short = [k for k in self.dims if k < 2 * self.r + 1]
        if short:
            raise InvalidSpecError(
                f"Every axis needs at least 2r+1 = {2 * self.r + 1} nodes for r={self.r}, "
                f"got dims={list(self.dims)}"
            )
        return self

    @classmethod
    def of(
        cls, dims: int | tuple[int, ...] | list[int], r: int, norm: Norm | str = Norm.PER_AXIS
    ) -> "TopologySpec":
        """Build and validate a spec; a bare int is a cycle of that many nodes."""
        if isinstance(dims, int):
            dims = (dims,)
        return cls(dims=tuple(dims), r=r, norm=Norm(norm)).check()

    def with_radius(self, r: int) -> "TopologySpec":
        return self.model_copy(update={"r": r})

    def describe(self) -> str:
        shape = "x".join(str(k) for k in self.dims)
        return f"{shape} r={self.r} {self.norm.value}"


@dataclass(frozen=True)
class Stencil:
    """Offsets of a node's neighbors; the first row of the circulant structure."""

    offsets: tuple[tuple[int, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.offsets)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.offsets, dtype=np.int64)
        arr.setflags(write=False)
        return arr


def _per_axis_offsets(m: int, r: int) -> list[tuple[int, ...]]:
    offsets = []
    for axis in range(m):
        for step in range(1, r + 1):
            for sign in (1, -1):
                vec = [0] * m
                vec[axis] = sign * step
                offsets.append(tuple(vec))
    return offsets


def _ball_offsets(m: int, r: int, norm: Norm) -> list[tuple[int, ...]]:
    offsets = []
    for vec in itertools.product(range(-r, r + 1), repeat=m):
        if not any(vec):
            continue
        size = sum(abs(c) for c in vec) if norm == Norm.L1 else max(abs(c) for c in vec)
        if size <= r:
            offsets.append(vec)
    return offsets


@lru_cache(maxsize=256)
def build_stencil(spec: TopologySpec) -> Stencil:
    """Return the symmetric offset set of ``spec``.

    Per-axis neighbors differ in exactly one coordinate by at most r (degree
    2mr). L1 and L-infinity neighbors lie in the corresponding ball of radius
    r. For a cycle the three rules give the same offsets {±1, ..., ±r}.
    """
    spec.check()
    if spec.norm == Norm.PER_AXIS or spec.is_cycle:
        offsets = _per_axis_offsets(spec.m, spec.r)
    else:
        offsets = _ball_offsets(spec.m, spec.r, spec.norm)
    return Stencil(offsets=tuple(offsets))


@lru_cache(maxsize=64)
def neighbor_list(spec: TopologySpec) -> np.ndarray:
    """Return an ``(n, degree)`` read-only array; row u lists u's neighbors.

    Column order follows the stencil's offset order.
    """
    stencil = build_stencil(spec)
    coords = np.indices(spec.dims).reshape(spec.m, spec.n)
    shifted = coords[:, :, None] + stencil.array.T[:, None, :]
    nbrs = np.ravel_multi_index(tuple(shifted), spec.dims, mode="wrap")
    nbrs.setflags(write=False)
    logger.debug(f"Built neighbor list for {spec.describe()}: {nbrs.shape}")
    return nbrs


def node_index(spec: TopologySpec, coords: tuple[int, ...]) -> int:
    return int(np.ravel_multi_index(coords, spec.dims, mode="wrap"))


def node_coords(spec: TopologySpec, u: int) -> tuple[int, ...]:
    return tuple(int(c) for c in np.unravel_index(u, spec.dims))


def laplacian_matrix(spec: TopologySpec) -> sparse.csr_matrix:
    """Sparse L = D - A assembled from the neighbor list."""
    nbrs = neighbor_list(spec)
    n, degree = nbrs.shape
    rows = np.repeat(np.arange(n), degree)
    adjacency = sparse.csr_matrix(
        (np.ones(n * degree), (rows, nbrs.ravel())), shape=(n, n)
    )
    return (sparse.identity(n, format="csr") * degree - adjacency).tocsr()


def weight_matrix(spec: TopologySpec, h: float) -> np.ndarray:
    """Dense W = I - hL: h on edges, 1 - h*deg on the diagonal."""
    if spec.n > DENSE_MAX_NODES:
        raise InvalidSpecError(
            f"Refusing to build a dense {spec.n}x{spec.n} weight matrix "
            f"(limit {DENSE_MAX_NODES} nodes)"
        )
    return np.eye(spec.n) - h * laplacian_matrix(spec).toarray()
