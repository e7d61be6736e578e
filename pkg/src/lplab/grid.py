"""Weighted quadrature grids and sampled scalar/vector fields.

The continuous objects of interest (a nonnegative measure on R^n, measurable
functions, measurable regions) are represented by a finite node list with
nonnegative cell weights, sample arrays at the nodes, and boolean node masks.
Every integral in the package is a finite weighted sum over such a grid.

All values are immutable after construction (sample and weight arrays are
marked read-only) and every operation here is pure, so shared instances are
safe to use concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError

__all__ = [
    "QuadratureGrid",
    "RegionMask",
    "ScalarField",
    "VectorField",
    "build_uniform_grid",
    "integrate",
    "truncate_region",
]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass
class QuadratureGrid:
    """Finite stand-in for (R^n, mu): nodes with nonnegative cell weights.

    Attributes:
        dimension: n, the ambient dimension.
        nodes: (N, n) array of pairwise-distinct points.
        weights: (N,) array of nonnegative cell measures.
        domain_box: (n, 2) per-axis (lower, upper) bounds.
        resolution: per-axis node counts for tensor-product grids, if known.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    domain_box: np.ndarray
    resolution: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        weights = np.asarray(self.weights, dtype=float).ravel()
        box = np.asarray(self.domain_box, dtype=float).reshape(-1, 2)
        if self.dimension < 1:
            raise InvalidArgumentError(f"dimension must be >= 1, got {self.dimension}")
        if nodes.shape[1] != self.dimension or box.shape[0] != self.dimension:
            raise InvalidArgumentError(
                f"nodes/domain_box do not match dimension {self.dimension}"
            )
        if nodes.shape[0] < 1 or nodes.shape[0] != weights.shape[0]:
            raise InvalidArgumentError(
                f"need >= 1 node and matching weights, got {nodes.shape[0]} nodes "
                f"and {weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(box)):
            raise InvalidArgumentError("grid nodes and bounds must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise InvalidArgumentError("weights must be finite and nonnegative")
        if np.unique(nodes, axis=0).shape[0] != nodes.shape[0]:
            raise InvalidArgumentError("grid nodes must be pairwise distinct")
        self.nodes = _frozen(nodes)
        self.weights = _frozen(weights)
        self.domain_box = _frozen(box)
        if self.resolution is not None:
            self.resolution = tuple(int(r) for r in self.resolution)

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def axis_length(self, axis: int = 0) -> float:
        lo, hi = self.domain_box[axis]
        return float(hi - lo)

    def axis_resolution(self, axis: int = 0) -> int:
        """Node count along one axis (distinct coordinate values if unknown)."""
        if self.resolution is not None:
            return self.resolution[axis]
        return int(np.unique(self.nodes[:, axis]).size)


def build_uniform_grid(domain_box, resolution) -> QuadratureGrid:
    """Tensor-product midpoint grid on a box; each weight is its cell volume.

    Args:
        domain_box: sequence of (lower, upper) pairs, one per axis.
        resolution: node count per axis (an int applies to every axis).

    The weights sum to the box volume exactly up to rounding.
    """
    box = np.asarray(domain_box, dtype=float).reshape(-1, 2)
    n = box.shape[0]
    if np.isscalar(resolution):
        res = (int(resolution),) * n
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != n:
        raise InvalidArgumentError(f"resolution needs {n} entries, got {len(res)}")
    if any(r < 1 for r in res):
        raise InvalidArgumentError(f"resolution must be >= 1 per axis, got {res}")
    if not np.all(np.isfinite(box)) or np.any(box[:, 0] >= box[:, 1]):
        raise InvalidArgumentError(f"bounds must be finite with lower < upper: {box.tolist()}")

    axes = [
        box[a, 0] + (np.arange(res[a]) + 0.5) * (box[a, 1] - box[a, 0]) / res[a]
        for a in range(n)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    cell = float(np.prod([(box[a, 1] - box[a, 0]) / res[a] for a in range(n)]))
    weights = np.full(nodes.shape[0], cell)
    return QuadratureGrid(n, nodes, weights, box, res)


@dataclass
class RegionMask:
    """Measurable region: a boolean inclusion flag per grid node."""

    grid: QuadratureGrid
    included: np.ndarray

    def __post_init__(self) -> None:
        included = np.asarray(self.included, dtype=bool).ravel()
        if included.shape[0] != self.grid.node_count:
            raise InvalidArgumentError(
                f"mask length {included.shape[0]} != node count {self.grid.node_count}"
            )
        self.included = _frozen(included)

    @classmethod
    def full(cls, grid: QuadratureGrid) -> "RegionMask":
        return cls(grid, np.ones(grid.node_count, dtype=bool))

    @classmethod
    def empty(cls, grid: QuadratureGrid) -> "RegionMask":
        return cls(grid, np.zeros(grid.node_count, dtype=bool))

    def measure(self) -> float:
        return float(self.grid.weights[self.included].sum())


@dataclass
class ScalarField:
    """Real-valued function sampled at the grid nodes. Samples must be finite."""

    grid: QuadratureGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float).ravel()
        if samples.shape[0] != self.grid.node_count:
            raise InvalidArgumentError(
                f"sample length {samples.shape[0]} != node count {self.grid.node_count}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("field samples must be finite (no NaN/Inf)")
        self.samples = _frozen(samples)

    @classmethod
    def constant(cls, grid: QuadratureGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.node_count, float(value)))

    def _binary(self, other: "ScalarField", op) -> "ScalarField":
        if other.grid is not self.grid:
            raise GridMismatchError("fields live on different grids")
        return ScalarField(self.grid, op(self.samples, other.samples))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return self._binary(other, np.add)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return self._binary(other, np.subtract)

    def __mul__(self, scalar: float) -> "ScalarField":
        return ScalarField(self.grid, self.samples * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.samples)


@dataclass
class VectorField:
    """m-tuple of scalar fields sharing one grid."""

    components: list

    def __post_init__(self) -> None:
        if len(self.components) < 1:
            raise InvalidArgumentError("a vector field needs at least one component")
        grid = self.components[0].grid
        for c in self.components[1:]:
            if c.grid is not grid:
                raise GridMismatchError("all components must reference the identical grid")

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def grid(self) -> QuadratureGrid:
        return self.components[0].grid

    def matrix(self) -> np.ndarray:
        """Samples stacked as an (m, N) array."""
        return np.stack([c.samples for c in self.components])

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __mul__(self, scalar: float) -> "VectorField":
        return VectorField([c * scalar for c in self.components])

    __rmul__ = __mul__


def _require_shared_grid(f: ScalarField, region: RegionMask | None) -> RegionMask:
    if region is None:
        return RegionMask.full(f.grid)
    if region.grid is not f.grid:
        raise GridMismatchError("field and region live on different grids")
    return region


def integrate(f: ScalarField, region: RegionMask | None = None) -> float:
    """Weighted sum of the samples over the included nodes. Linear in f."""
    region = _require_shared_grid(f, region)
    inc = region.included
    return float(np.dot(f.grid.weights[inc], f.samples[inc]))


def truncate_region(region: RegionMask, radius: float) -> RegionMask:
    """Intersect a region with the open Euclidean ball of the given radius.

    Monotone in the radius: a larger ball never removes nodes.
    """
    if not np.isfinite(radius) or radius <= 0.0:
        raise InvalidArgumentError(f"truncation radius must be positive, got {radius}")
    norms = np.linalg.norm(region.grid.nodes, axis=1)
    return RegionMask(region.grid, region.included & (norms < radius))
