"""Liminf inequalities for convex compositions along weakly convergent data.

Checks, on concrete sequences, that

    liminf_i  integral_Omega f(u_i) dmu  >=  integral_Omega f(u) dmu

for nonnegative continuous convex f on a convex set K containing all sampled
values, with three routes:

  * finite p (weak convergence hypothesis),
  * the sup-norm case via truncations Omega_R = Omega intersect {|x| < R}
    with monotone limit-side integrals,
  * the closed-K scenario with the nonnegativity of f dropped, where only
    the conclusion is checked.

"liminf" over an infinite sequence is realized as the infimum over the tail
half of a finite horizon; reports expose the full per-index curve so users
can judge stabilization.  The first two routes also replay the proof chain
on the realized data: Cesaro means of an extracted subsequence must decay,
the convexity inequality must hold nodewise at every k, and the integral of
the pointwise tail infimum must not exceed the tail infimum of the
integrals.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainViolationError,
    ExtractionStalledError,
    InternalConsistencyError,
    InvalidArgumentError,
    LevelStalledError,
    PreconditionViolationError,
)
from .extraction import banach_saks_extract, szlenk_extract
from .gallery import (
    CONVERGING,
    SequenceSpec,
    VectorSequenceSpec,
    default_probe_dictionary,
    generate_vector,
    weak_probe,
    weak_star_probe,
)
from .grid import RegionMask, VectorField, truncate_region
from .norms import INFINITY, _check_exponent

__all__ = [
    "SQUARED_NORM",
    "POWER",
    "MAX_AFFINE",
    "CUSTOM_FUNCTION",
    "WHOLE_SPACE",
    "BOX",
    "BALL",
    "HALFSPACES",
    "ConvexFunctionSpec",
    "ConvexSetSpec",
    "CesaroReplay",
    "LiminfReport",
    "WeakStarReport",
    "evaluate_composite",
    "jensen_check",
    "liminf_verify",
    "weak_star_verify",
    "mazur_scenario_verify",
]

SQUARED_NORM = "squared_norm"
POWER = "power"
MAX_AFFINE = "max_affine"
CUSTOM_FUNCTION = "custom"

WHOLE_SPACE = "whole_space"
BOX = "box"
BALL = "ball"
HALFSPACES = "halfspaces"

_MEMBERSHIP_TOL = 1e-12
_JENSEN_TOL = 1e-12
_PASS_TOL = 1e-6  # relative tolerance of the final liminf margin


@dataclass
class ConvexFunctionSpec:
    """Convex integrand on R^m.

    Kinds: ``squared_norm`` (|w|^2), ``power`` (|w|^q for q >= 1),
    ``max_affine`` (max(0, max_i a_i . w + b_i)), or ``custom`` with a
    vectorized evaluator mapping an (N, m) array to an (N,) array.
    """

    kind: str
    power: float = 2.0
    planes: list | None = None
    evaluator: Callable | None = None
    nonnegative: bool = True

    def __post_init__(self) -> None:
        if self.kind not in (SQUARED_NORM, POWER, MAX_AFFINE, CUSTOM_FUNCTION):
            raise InvalidArgumentError(f"unknown convex function kind {self.kind!r}")
        if self.kind == POWER and self.power < 1.0:
            raise InvalidArgumentError(f"power must be >= 1 for convexity, got {self.power}")
        if self.kind == MAX_AFFINE:
            if not self.planes:
                raise InvalidArgumentError("max_affine needs at least one (a, b) plane")
            self.planes = [(np.asarray(a, dtype=float).ravel(), float(b)) for a, b in self.planes]
        if self.kind == CUSTOM_FUNCTION and self.evaluator is None:
            raise InvalidArgumentError("custom convex functions need an evaluator")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == SQUARED_NORM:
            return np.einsum("ij,ij->i", points, points)
        if self.kind == POWER:
            return np.linalg.norm(points, axis=1) ** self.power
        if self.kind == MAX_AFFINE:
            vals = np.zeros(points.shape[0])
            for a, b in self.planes:
                vals = np.maximum(vals, points @ a + b)
            return vals
        out = np.asarray(self.evaluator(points), dtype=float).ravel()
        if out.shape[0] != points.shape[0]:
            raise InvalidArgumentError("custom evaluator returned the wrong length")
        return out

    @classmethod
    def from_config(cls, raw: dict) -> "ConvexFunctionSpec":
        params = dict(raw.get("params") or {})
        planes = params.get("planes")
        if planes is not None:
            planes = [(np.asarray(a, dtype=float), float(b)) for a, b in planes]
        return cls(
            kind=str(raw["kind"]).lower(),
            power=float(params.get("power", 2.0)),
            planes=planes,
            nonnegative=bool(raw.get("nonnegative", True)),
        )


@dataclass
class ConvexSetSpec:
    """Convex subset K of R^m with a vectorized membership test."""

    kind: str
    bounds: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float = 1.0
    halfspaces: list | None = None
    closed: bool = True

    def __post_init__(self) -> None:
        if self.kind not in (WHOLE_SPACE, BOX, BALL, HALFSPACES):
            raise InvalidArgumentError(f"unknown convex set kind {self.kind!r}")
        if self.kind == BOX:
            self.bounds = np.asarray(self.bounds, dtype=float).reshape(-1, 2)
        if self.kind == BALL:
            self.center = np.asarray(self.center, dtype=float).ravel()
            if self.radius <= 0:
                raise InvalidArgumentError(f"ball radius must be positive, got {self.radius}")
        if self.kind == HALFSPACES:
            if not self.halfspaces:
                raise InvalidArgumentError("halfspace sets need at least one (a, b)")
            self.halfspaces = [
                (np.asarray(a, dtype=float).ravel(), float(b)) for a, b in self.halfspaces
            ]

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == WHOLE_SPACE:
            return np.ones(points.shape[0], dtype=bool)
        if self.kind == BOX:
            lo = self.bounds[:, 0] - _MEMBERSHIP_TOL
            hi = self.bounds[:, 1] + _MEMBERSHIP_TOL
            return np.all((points >= lo) & (points <= hi), axis=1)
        if self.kind == BALL:
            return np.linalg.norm(points - self.center, axis=1) <= self.radius + _MEMBERSHIP_TOL
        ok = np.ones(points.shape[0], dtype=bool)
        for a, b in self.halfspaces:
            ok &= points @ a <= b + _MEMBERSHIP_TOL
        return ok

    @classmethod
    def from_config(cls, raw: dict) -> "ConvexSetSpec":
        params = dict(raw.get("params") or {})
        return cls(
            kind=str(raw["kind"]).lower(),
            bounds=params.get("bounds"),
            center=params.get("center", [0.0]),
            radius=float(params.get("radius", 1.0)),
            halfspaces=params.get("halfspaces"),
            closed=bool(raw.get("closed", True)),
        )


def _region_points(u: VectorField, region: RegionMask) -> np.ndarray:
    return u.matrix().T[region.included]


def _check_membership(points: np.ndarray, K: ConvexSetSpec, region: RegionMask, label: str):
    ok = K.contains(points)
    if not ok.all():
        local = int(np.argmin(ok))
        node_index = int(np.flatnonzero(region.included)[local])
        node = region.grid.nodes[node_index]
        raise DomainViolationError(
            f"{label}: sample {points[local].tolist()} at node {node_index} "
            f"{node.tolist()} is outside K",
            node_index=node_index,
            node=node,
        )


def _composite_values(
    f: ConvexFunctionSpec,
    u: VectorField,
    region: RegionMask,
    K: ConvexSetSpec | None,
    label: str,
) -> np.ndarray:
    if region.grid is not u.grid:
        raise InvalidArgumentError("field and region live on different grids")
    points = _region_points(u, region)
    if K is not None:
        _check_membership(points, K, region, label)
    if points.shape[0] == 0:
        return np.zeros(0)
    return f(points)


def evaluate_composite(
    f: ConvexFunctionSpec,
    u: VectorField,
    region: RegionMask | None = None,
    K: ConvexSetSpec | None = None,
) -> float:
    """Integral of f(u(x)) over the region by nodewise evaluation.

    When K is given, every included sample is checked for membership and a
    violation names the offending node.
    """
    region = region if region is not None else RegionMask.full(u.grid)
    values = _composite_values(f, u, region, K, "composite integrand")
    if values.size == 0:
        return 0.0
    return float(np.dot(region.grid.weights[region.included], values))


def jensen_check(f: ConvexFunctionSpec, points, K: ConvexSetSpec | None = None) -> float:
    """Mean of f minus f of the mean over a point set; >= 0 for convex f."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 1:
        raise InvalidArgumentError("need at least one point")
    if K is not None:
        ok = K.contains(points)
        if not ok.all():
            bad = int(np.argmin(ok))
            raise DomainViolationError(
                f"point {points[bad].tolist()} is outside K", node_index=bad
            )
    mean_of_f = float(f(points).mean())
    f_of_mean = float(f(points.mean(axis=0)[None, :])[0])
    return mean_of_f - f_of_mean


@dataclass
class CesaroReplay:
    """Proof-chain replay along an extracted subsequence."""

    indices: list
    cesaro_norms: np.ndarray
    slope: float | None
    converged: bool
    jensen_margins: np.ndarray
    fatou_margin: float | None

    def ok(self) -> bool:
        checks = [self.converged]
        if self.jensen_margins.size:
            checks.append(bool(self.jensen_margins.min() >= -_JENSEN_TOL))
        if self.fatou_margin is not None:
            checks.append(self.fatou_margin >= -_JENSEN_TOL)
        return all(checks)


@dataclass
class LiminfReport:
    """Per-index integrals, their running tail infimum, and the final margin."""

    indices: np.ndarray
    alphas: np.ndarray
    tail_infimum: np.ndarray
    limit_integral: float
    margin: float
    passed: bool
    probe: object = None
    replay: CesaroReplay | None = None

    def rows(self):
        return [
            (int(i), float(a), float(t), self.limit_integral, self.margin)
            for i, a, t in zip(self.indices, self.alphas, self.tail_infimum)
        ]


@dataclass
class WeakStarReport:
    """Truncated verifications at increasing radii."""

    radii: list
    reports: list
    limit_integrals: list
    monotone: bool
    passed: bool


def _centered_spec(
    seq: VectorSequenceSpec,
    limit: VectorField,
    grid,
    horizon: int,
    mask: np.ndarray | None = None,
) -> VectorSequenceSpec:
    """Custom spec holding u_i - u (optionally zeroed outside a mask)."""
    tables = [dict() for _ in range(seq.m)]
    for i in range(1, horizon + 1):
        u = generate_vector(seq, i, grid)
        for j in range(seq.m):
            diff = u.components[j].samples - limit.components[j].samples
            if mask is not None:
                diff = np.where(mask, diff, 0.0)
            tables[j][i] = diff
    return VectorSequenceSpec([SequenceSpec(kind="custom", table=t) for t in tables])


def _replay(
    seq: VectorSequenceSpec,
    limit: VectorField,
    f: ConvexFunctionSpec,
    region: RegionMask,
    p: float,
    horizon: int,
    szlenk_levels: int,
    restrict_extraction: bool,
) -> CesaroReplay:
    grid = limit.grid
    mask = region.included if restrict_extraction else None
    centered = _centered_spec(seq, limit, grid, horizon, mask=mask)
    try:
        if p == 1.0:
            _, trace = szlenk_extract(centered, grid, szlenk_levels, horizon)
        else:
            trace = banach_saks_extract(centered, p, grid, horizon)
    except (ExtractionStalledError, LevelStalledError) as err:
        trace = getattr(err, "trace", None)
        if trace is None or trace.length < 8:
            return CesaroReplay(
                indices=[],
                cesaro_norms=np.zeros(0),
                slope=None,
                converged=False,
                jensen_margins=np.zeros(0),
                fatou_margin=None,
            )

    values = trace.cesaro_norms
    if float(values.max()) <= 1e-12:
        slope, converged = None, True
    else:
        ks = np.arange(1, values.size + 1, dtype=float)
        pos = values > 0.0
        if int(pos.sum()) >= 2:
            slope = float(np.polyfit(np.log(ks[pos]), np.log(values[pos]), 1)[0])
        else:
            slope = 0.0
        converged = slope < -0.05

    # Jensen nodewise along the extracted family, on the region nodes only.
    inc = region.included
    w = region.grid.weights[inc]
    length = trace.length
    running_points = None
    running_f = None
    jensen_margins = np.empty(length)
    tail_start = length // 2
    tail_min_field = None
    tail_integral_min = math.inf
    for k, idx in enumerate(trace.indices, start=1):
        pts = generate_vector(seq, idx, grid).matrix().T[inc]
        fv = f(pts)
        if running_points is None:
            running_points = pts.copy()
            running_f = fv.copy()
        else:
            running_points += pts
            running_f += fv
        if fv.size == 0:
            jensen_margins[k - 1] = 0.0
            continue
        f_mean = f(running_points / k)
        jensen_margins[k - 1] = float((running_f / k - f_mean).min())
        if k > tail_start:
            integral = float(np.dot(w, f_mean))
            tail_integral_min = min(tail_integral_min, integral)
            tail_min_field = (
                f_mean.copy() if tail_min_field is None else np.minimum(tail_min_field, f_mean)
            )
    if tail_min_field is not None:
        fatou_margin = tail_integral_min - float(np.dot(w, tail_min_field))
    else:
        fatou_margin = 0.0
    return CesaroReplay(
        indices=list(trace.indices),
        cesaro_norms=values,
        slope=slope,
        converged=converged,
        jensen_margins=jensen_margins,
        fatou_margin=fatou_margin,
    )


def _verify_on_region(
    seq: VectorSequenceSpec,
    limit: VectorField,
    f: ConvexFunctionSpec,
    K: ConvexSetSpec,
    region: RegionMask,
    horizon: int,
    probe,
    replay: CesaroReplay | None,
) -> LiminfReport:
    grid = limit.grid
    try:
        limit_values = _composite_values(f, limit, region, K, "limit field")
    except DomainViolationError as err:
        raise PreconditionViolationError(
            f"values-in-K hypothesis failed for the limit: {err}",
            hypothesis="values in K",
        ) from err
    if f.nonnegative and limit_values.size and limit_values.min() < -_MEMBERSHIP_TOL:
        raise PreconditionViolationError(
            f"nonnegativity hypothesis failed on the limit: f reaches {limit_values.min()}",
            hypothesis="nonnegativity of f",
        )
    weights = region.grid.weights[region.included]
    alphas = np.empty(horizon)
    for i in range(1, horizon + 1):
        u = generate_vector(seq, i, grid)
        try:
            values = _composite_values(f, u, region, K, f"sequence member {i}")
        except DomainViolationError as err:
            raise PreconditionViolationError(
                f"values-in-K hypothesis failed at sequence index {i}: {err}",
                hypothesis="values in K",
            ) from err
        if f.nonnegative and values.size and values.min() < -_MEMBERSHIP_TOL:
            raise PreconditionViolationError(
                f"nonnegativity hypothesis failed at sequence index {i}: "
                f"f reaches {values.min()}",
                hypothesis="nonnegativity of f",
            )
        alphas[i - 1] = float(np.dot(weights, values)) if values.size else 0.0
    tail_infimum = np.minimum.accumulate(alphas[::-1])[::-1]
    limit_integral = float(np.dot(weights, limit_values)) if limit_values.size else 0.0
    margin = float(alphas[horizon // 2 :].min() - limit_integral)
    passed = margin >= -_PASS_TOL * (1.0 + abs(limit_integral))
    if replay is not None:
        passed = passed and replay.ok()
    return LiminfReport(
        indices=np.arange(1, horizon + 1),
        alphas=alphas,
        tail_infimum=tail_infimum,
        limit_integral=limit_integral,
        margin=margin,
        passed=passed,
        probe=probe,
        replay=replay,
    )


def liminf_verify(
    seq: VectorSequenceSpec,
    limit: VectorField,
    f: ConvexFunctionSpec,
    K: ConvexSetSpec,
    region: RegionMask,
    p: float,
    horizon: int,
    dictionary: list | None = None,
    szlenk_levels: int = 3,
) -> LiminfReport:
    """Tail-infimum comparison of integral f(u_i) against integral f(u).

    Hypotheses are enforced before any verdict: f must be declared (and is
    spot-checked) nonnegative, all sampled values of the sequence and the
    limit must lie in K, and the weak-convergence probe must return
    ``converging``; failures raise a precondition violation naming the
    hypothesis.  The proof chain (Cesaro extraction, nodewise convexity
    inequality at every k, pointwise-tail versus integral-tail infimum) is
    replayed on the realized data and folded into the verdict.
    """
    p = _check_exponent(p)
    if p == INFINITY:
        raise InvalidArgumentError(
            "the sup-norm route is weak_star_verify / mazur_scenario_verify"
        )
    if horizon < 8:
        raise InvalidArgumentError(f"horizon must be >= 8, got {horizon}")
    if not f.nonnegative:
        raise PreconditionViolationError(
            "nonnegativity hypothesis failed: f is declared sign-indefinite",
            hypothesis="nonnegativity of f",
        )
    grid = limit.grid
    dictionary = dictionary or default_probe_dictionary(grid)
    probe = weak_probe(seq, limit, p, dictionary, horizon)
    if probe.verdict != CONVERGING:
        raise PreconditionViolationError(
            f"weak convergence probe hypothesis failed: verdict {probe.verdict!r}",
            hypothesis="weak convergence probe",
        )
    replay = _replay(
        seq, limit, f, region, p, horizon, szlenk_levels,
        restrict_extraction=(p == 1.0),
    )
    return _verify_on_region(seq, limit, f, K, region, horizon, probe, replay)


def weak_star_verify(
    seq: VectorSequenceSpec,
    limit: VectorField,
    f: ConvexFunctionSpec,
    K: ConvexSetSpec,
    region: RegionMask,
    horizon: int,
    r_schedule,
    dictionary: list | None = None,
    szlenk_levels: int = 3,
) -> WeakStarReport:
    """Sup-norm route: verify on truncations Omega_R for an increasing R list.

    Each truncation runs the p = 1 verification with the extraction
    restricted to the truncated region; the limit-side integrals must be
    non-decreasing in R, realizing the monotone-convergence step.
    """
    radii = [float(r) for r in r_schedule]
    if not radii or any(r <= 0 for r in radii) or any(
        b <= a for a, b in zip(radii, radii[1:])
    ):
        raise InvalidArgumentError(f"R schedule must be strictly increasing positive: {radii}")
    if not f.nonnegative:
        raise PreconditionViolationError(
            "nonnegativity hypothesis failed: f is declared sign-indefinite",
            hypothesis="nonnegativity of f",
        )
    grid = limit.grid
    dictionary = dictionary or default_probe_dictionary(grid)
    probe = weak_star_probe(seq, limit, dictionary, horizon)
    if probe.verdict != CONVERGING:
        raise PreconditionViolationError(
            f"weak* convergence probe hypothesis failed: verdict {probe.verdict!r}",
            hypothesis="weak* convergence probe",
        )
    reports = []
    limit_integrals = []
    for radius in radii:
        truncated = truncate_region(region, radius)
        replay = _replay(
            seq, limit, f, truncated, 1.0, horizon, szlenk_levels,
            restrict_extraction=True,
        )
        report = _verify_on_region(seq, limit, f, K, truncated, horizon, probe, replay)
        reports.append(report)
        limit_integrals.append(report.limit_integral)
    monotone = all(
        b >= a - 1e-12 * (1.0 + abs(a))
        for a, b in zip(limit_integrals, limit_integrals[1:])
    )
    if not monotone:
        raise InternalConsistencyError(
            f"limit-side integrals decreased along the R schedule: {limit_integrals}"
        )
    passed = all(r.passed for r in reports)
    return WeakStarReport(
        radii=radii,
        reports=reports,
        limit_integrals=limit_integrals,
        monotone=monotone,
        passed=passed,
    )


def mazur_scenario_verify(
    seq: VectorSequenceSpec,
    limit: VectorField,
    f: ConvexFunctionSpec,
    K: ConvexSetSpec,
    region: RegionMask,
    horizon: int,
    dictionary: list | None = None,
) -> LiminfReport:
    """Closed-K scenario: nonnegativity of f dropped, only the conclusion checked.

    Requires K closed and a converging weak* probe; there is no proof replay
    because this route's argument lives outside the package.
    """
    if not K.closed:
        raise PreconditionViolationError(
            "the closed-K scenario needs a closed convex set",
            hypothesis="closedness of K",
        )
    if horizon < 8:
        raise InvalidArgumentError(f"horizon must be >= 8, got {horizon}")
    grid = limit.grid
    dictionary = dictionary or default_probe_dictionary(grid)
    probe = weak_star_probe(seq, limit, dictionary, horizon)
    if probe.verdict != CONVERGING:
        raise PreconditionViolationError(
            f"weak* convergence probe hypothesis failed: verdict {probe.verdict!r}",
            hypothesis="weak* convergence probe",
        )
    return _verify_on_region(seq, limit, f, K, region, horizon, probe, None)
