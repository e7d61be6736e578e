"""Canonical function sequences and weak/weak* convergence probes.

The gallery provides deterministic families indexed by i >= 1:

  * ``oscillatory``  amplitude * sin(2*pi*i*base*x1),
  * ``rademacher``   amplitude * (dyadic +-1 sign pattern of depth i),
  * ``spike``        a mass-one indicator slab shrinking like 1/i,
  * ``constant``     amplitude * value, independent of i,
  * ``custom``       caller-supplied sample table per index.

The dyadic family equals sign(sin(2^i * pi * x1)) while the grid can resolve
that depth; deeper indices continue with products of the resolvable sign
patterns, which keeps values in {-1, +1}, keeps the family weakly null, and
keeps it exactly orthogonal on dyadic grids.  A resolution guard refuses any
index whose finest oscillation the grid cannot represent (at least 8 nodes
per cycle), so that aliasing cannot fake convergence.

Weak convergence against all of L^q is undecidable numerically; the probes
test a finite dictionary and classify the residual decay, reporting
``inconclusive`` when neither the convergence nor the divergence criterion
triggers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError
from .grid import QuadratureGrid, ScalarField, VectorField
from .norms import INFINITY, _check_exponent, dual_pairing

__all__ = [
    "OSCILLATORY",
    "RADEMACHER",
    "SPIKE",
    "CONSTANT",
    "CUSTOM",
    "CONVERGING",
    "NOT_CONVERGING",
    "INCONCLUSIVE",
    "SequenceSpec",
    "VectorSequenceSpec",
    "ProbeReport",
    "generate",
    "generate_vector",
    "weak_probe",
    "weak_star_probe",
    "default_probe_dictionary",
]

OSCILLATORY = "oscillatory"
RADEMACHER = "rademacher"
SPIKE = "spike"
CONSTANT = "constant"
CUSTOM = "custom"
_KINDS = (OSCILLATORY, RADEMACHER, SPIKE, CONSTANT, CUSTOM)

CONVERGING = "converging"
NOT_CONVERGING = "not-converging"
INCONCLUSIVE = "inconclusive"

# Verdict thresholds: residual must drop by this factor for "converging";
# a flat curve bounded below by the same floor reads "not-converging".
_DECAY_FACTOR = 1e-2
_FLAT_SLOPE = -0.05
_ZERO_RESIDUAL = 1e-12


@dataclass
class SequenceSpec:
    """Declarative generator of the i-th member of a scalar sequence."""

    kind: str
    amplitude: float = 1.0
    base: float = 1.0
    value: float = 0.0
    table: dict | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidArgumentError(f"unknown sequence kind {self.kind!r}")
        if self.kind == CUSTOM and self.table is None:
            raise InvalidArgumentError("custom sequences need a sample table")

    @classmethod
    def from_config(cls, raw: dict) -> "SequenceSpec":
        params = dict(raw.get("params") or {})
        table = params.pop("table", None)
        if table is not None:
            table = {int(k): np.asarray(v, dtype=float) for k, v in table.items()}
        return cls(
            kind=str(raw["kind"]).lower(),
            amplitude=float(raw.get("amplitude", 1.0)),
            base=float(params.pop("base", 1.0)),
            value=float(params.pop("value", 0.0)),
            table=table,
        )


@dataclass
class VectorSequenceSpec:
    """Componentwise sequence in the m-fold product space."""

    components: list

    def __post_init__(self) -> None:
        if len(self.components) < 1:
            raise InvalidArgumentError("need at least one component spec")

    @property
    def m(self) -> int:
        return len(self.components)


@dataclass
class ProbeReport:
    """Residual curve of a weak/weak* probe and the resulting verdict."""

    indices: np.ndarray
    residuals: np.ndarray
    verdict: str
    slope: float

    def __post_init__(self) -> None:
        if np.any(self.residuals < 0.0):
            raise InvalidArgumentError("probe residuals must be nonnegative")

    def rows(self):
        return [(int(i), float(r), self.verdict) for i, r in zip(self.indices, self.residuals)]


def _dyadic_sign(x: np.ndarray, level: int) -> np.ndarray:
    # Parity of floor(2^level * x); ldexp is an exact power-of-two scaling.
    y = np.floor(np.ldexp(x, level))
    return np.where(y % 2 == 0, 1.0, -1.0)


def _max_dyadic_level(n1: int, length: float) -> int:
    # Largest depth whose 2^(m-1) cycles over `length` keep >= 8 nodes per cycle.
    m = 0
    while 8.0 * (2.0 ** m) * length <= n1:
        m += 1
    return m  # depth m has 2^(m-1) cycles, so the loop tests depth m+1's rate


def _walsh_mask(i: int, max_level: int) -> int:
    """Bit mask of dyadic levels used by gallery index i (1-based)."""
    if i <= max_level:
        return 1 << (i - 1)
    remaining = i - max_level
    for t in range(3, 1 << max_level):
        if t & (t - 1):  # skip pure powers of two, already used
            remaining -= 1
            if remaining == 0:
                return t
    raise InvalidArgumentError(
        f"grid resolution supports only {(1 << max_level) - 1} dyadic sign "
        f"patterns; index {i} is out of range"
    )


def generate(spec: SequenceSpec, i: int, grid: QuadratureGrid) -> ScalarField:
    """Sample the i-th member of the sequence on the grid.

    Deterministic: identical (spec, i, grid) always produce identical samples.
    Raises when the grid cannot resolve the requested index (aliasing guard)
    or when a custom table has no entry for i.
    """
    if i < 1:
        raise InvalidArgumentError(f"sequence index must be >= 1, got {i}")
    x1 = grid.nodes[:, 0]
    n1 = grid.axis_resolution(0)
    length = grid.axis_length(0)

    if spec.kind == CONSTANT:
        samples = np.full(grid.node_count, spec.amplitude * spec.value)
    elif spec.kind == OSCILLATORY:
        cycles = i * spec.base * length
        if 8.0 * cycles > n1:
            raise InvalidArgumentError(
                f"resolution {n1} cannot resolve {cycles:g} cycles "
                f"(need >= 8 nodes per cycle); refusing index {i}"
            )
        samples = spec.amplitude * np.sin(2.0 * np.pi * i * spec.base * x1)
    elif spec.kind == RADEMACHER:
        max_level = _max_dyadic_level(n1, length)
        if max_level < 1:
            raise InvalidArgumentError(
                f"resolution {n1} cannot resolve any dyadic sign pattern"
            )
        mask = _walsh_mask(i, max_level)
        samples = np.ones(grid.node_count)
        level = 1
        while mask:
            if mask & 1:
                samples = samples * _dyadic_sign(x1, level)
            mask >>= 1
            level += 1
        samples = spec.amplitude * samples
    elif spec.kind == SPIKE:
        if i > n1:
            raise InvalidArgumentError(
                f"resolution {n1} cannot resolve a width-1/{i} spike"
            )
        lo = grid.domain_box[0, 0]
        slab = x1 < lo + length / i
        mass = float(grid.weights[slab].sum())
        if mass <= 0.0:
            raise InvalidArgumentError(f"spike support carries no mass at index {i}")
        # Height chosen so the slab integrates to `amplitude` exactly; this
        # equals amplitude * i * indicator when i divides the axis resolution.
        samples = np.where(slab, spec.amplitude / mass, 0.0)
    else:  # CUSTOM
        try:
            samples = np.asarray(spec.table[i], dtype=float)
        except KeyError:
            raise InvalidArgumentError(f"custom table has no entry for index {i}") from None
        samples = spec.amplitude * samples
    return ScalarField(grid, samples)


def generate_vector(spec: VectorSequenceSpec, i: int, grid: QuadratureGrid) -> VectorField:
    return VectorField([generate(c, i, grid) for c in spec.components])


def default_probe_dictionary(grid: QuadratureGrid) -> list:
    """Constant 1, every coordinate function, and x1^2.

    Bounded on the box, hence in every L^q there, including L^1.
    """
    fields = [ScalarField.constant(grid, 1.0)]
    for axis in range(grid.dimension):
        fields.append(ScalarField(grid, grid.nodes[:, axis].copy()))
    fields.append(ScalarField(grid, grid.nodes[:, 0] ** 2))
    return fields


def _loglog_slope(residuals: np.ndarray) -> float:
    idx = np.arange(1, residuals.size + 1, dtype=float)
    pos = residuals > 0.0
    if pos.sum() < 2:
        return 0.0
    coef = np.polyfit(np.log(idx[pos]), np.log(residuals[pos]), 1)
    return float(coef[0])


def _classify(residuals: np.ndarray, slope: float) -> str:
    if residuals.max() <= _ZERO_RESIDUAL:
        return CONVERGING
    first_pos = int(np.argmax(residuals > 0.0))
    initial = residuals[first_pos]
    final = residuals[-1]
    if slope < 0.0 and final < _DECAY_FACTOR * initial:
        return CONVERGING
    tail_floor = residuals[residuals.size // 2 :].min()
    if slope >= _FLAT_SLOPE and tail_floor >= _DECAY_FACTOR * initial:
        return NOT_CONVERGING
    return INCONCLUSIVE


def weak_probe(
    seq: VectorSequenceSpec,
    limit: VectorField,
    p: float,
    dictionary: list,
    horizon: int,
) -> ProbeReport:
    """Pairing residuals of u_i - u against a finite dictionary.

    residual_i = max over components j and dictionary members v of
    |<u_i^(j) - u^(j), v>|.  The verdict is ``converging`` when the log-log
    fitted slope is negative and the final residual has dropped below 1e-2 of
    the initial one, ``not-converging`` when the curve is flat and bounded
    away from zero over the last half of the horizon, else ``inconclusive``.
    """
    _check_exponent(p)
    if horizon < 8:
        raise InvalidArgumentError(f"probe horizon must be >= 8, got {horizon}")
    if not dictionary:
        raise InvalidArgumentError("the probe dictionary must be nonempty")
    if limit.m != seq.m:
        raise InvalidArgumentError(
            f"limit has {limit.m} components, sequence has {seq.m}"
        )
    grid = limit.grid
    for v in dictionary:
        if v.grid is not grid:
            raise GridMismatchError("dictionary fields live on a different grid")

    residuals = np.empty(horizon)
    for i in range(1, horizon + 1):
        worst = 0.0
        for j, comp in enumerate(seq.components):
            diff = generate(comp, i, grid) - limit.components[j]
            for v in dictionary:
                worst = max(worst, abs(dual_pairing(diff, v)))
        residuals[i - 1] = worst
    slope = _loglog_slope(residuals)
    verdict = _classify(residuals, slope)
    return ProbeReport(np.arange(1, horizon + 1), residuals, verdict, slope)


def weak_star_probe(
    seq: VectorSequenceSpec,
    limit: VectorField,
    dictionary: list,
    horizon: int,
) -> ProbeReport:
    """Weak* variant: bounded sequences paired against an L^1 dictionary."""
    return weak_probe(seq, limit, INFINITY, dictionary, horizon)
