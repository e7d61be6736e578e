"""Scenario-driven command line: probe, extract, verify, report.

Subcommands:

  verify-lemma1   build the pointwise-inequality constants and grid-check them
  probe           weak/weak* probe of a configured sequence
  extract         subsequence extraction with trace CSV
  liminf          liminf verification (finite p, truncated sup-norm, closed-K)
  suite           run every bundled scenario; exit 0 iff all pass

Exit codes: 0 all checks passed, 1 a mathematical check failed, 2 usage,
configuration, or I/O error.  CSV bodies are deterministic (full 17-digit
precision, no timestamps); wall-clock data lives only in the manifest.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .convexity import (
    ConvexFunctionSpec,
    ConvexSetSpec,
    liminf_verify,
    mazur_scenario_verify,
    weak_star_verify,
)
from .errors import (
    ConfigError,
    ExtractionStalledError,
    InternalConsistencyError,
    InvalidArgumentError,
    LabError,
    LevelStalledError,
    PreconditionViolationError,
)
from .extraction import (
    InequalityConstants,
    banach_saks_extract,
    check_pointwise_inequality,
    szlenk_extract,
    verify_growth_bound,
)
from .gallery import (
    CONVERGING,
    NOT_CONVERGING,
    SequenceSpec,
    VectorSequenceSpec,
    default_probe_dictionary,
    generate_vector,
    weak_probe,
    weak_star_probe,
)
from .grid import RegionMask, build_uniform_grid, truncate_region
from .norms import INFINITY

__all__ = ["ScenarioConfig", "RunManifest", "load_config", "run_scenario", "main"]

_LEMMA1_DEFAULT_P = (1.1, 1.5, 2.0, 2.5, 3.0, 3.5)
_GRID_MARGIN_TOL = 1e-9
_HOMOGENEITY_TOL = 1e-9


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


@dataclass
class ScenarioConfig:
    """Validated scenario description plus the raw dictionary it came from."""

    name: str
    raw: dict
    grid: object
    p: float
    m: int
    sequence: VectorSequenceSpec
    limit: object
    region: RegionMask
    horizon: int
    extraction_mode: str
    f: ConvexFunctionSpec | None
    K: ConvexSetSpec | None
    r_schedule: list | None
    levels: int
    expect: dict
    output_dir: str

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunManifest:
    """Per-phase outcomes and output paths of one scenario run."""

    name: str
    config_digest: str
    tool_version: str
    phases: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def add_phase(self, name: str, status: str, seconds: float, detail: str = ""):
        self.phases.append(
            {"name": name, "status": status, "seconds": round(seconds, 6), "detail": detail}
        )

    @property
    def passed(self) -> bool:
        return all(p["status"] in ("pass", "skipped") for p in self.phases)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "passed": self.passed,
            "phases": self.phases,
            "outputs": self.outputs,
        }


def _parse_exponent(raw) -> float:
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity"):
            return INFINITY
        raise ConfigError(f"field 'p': unknown exponent {raw!r}")
    p = float(raw)
    if p < 1.0:
        raise ConfigError(f"field 'p': exponent must be >= 1 or 'infinity', got {p}")
    return p


def _build_region(raw, grid) -> RegionMask:
    kind = str(raw.get("type", "full")).lower()
    if kind == "full":
        return RegionMask.full(grid)
    if kind == "ball":
        return truncate_region(RegionMask.full(grid), float(raw["radius"]))
    if kind == "box":
        bounds = np.asarray(raw["bounds"], dtype=float).reshape(-1, 2)
        if bounds.shape[0] != grid.dimension:
            raise ConfigError("field 'region.bounds': wrong dimension")
        included = np.all(
            (grid.nodes >= bounds[:, 0]) & (grid.nodes <= bounds[:, 1]), axis=1
        )
        return RegionMask(grid, included)
    raise ConfigError(f"field 'region.type': unknown region {kind!r}")


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} line {err.lineno}: {err.msg}") from err
    return build_config(raw)


def build_config(raw: dict) -> ScenarioConfig:
    try:
        name = str(raw["name"])
        graw = raw["grid"]
        grid = build_uniform_grid(graw["box"], graw["resolution"])
        if int(graw.get("dimension", grid.dimension)) != grid.dimension:
            raise ConfigError("field 'grid.dimension' disagrees with the box")
        p = _parse_exponent(raw["p"])
        seq = VectorSequenceSpec(
            [SequenceSpec.from_config(c) for c in raw["sequence"]]
        )
        m = int(raw.get("m", seq.m))
        if m != seq.m:
            raise ConfigError(f"field 'm' = {m} disagrees with {seq.m} sequence components")
        limit_specs = [SequenceSpec.from_config(c) for c in raw["limit"]]
        if len(limit_specs) != m:
            raise ConfigError("field 'limit' must have one spec per component")
        limit = generate_vector(VectorSequenceSpec(limit_specs), 1, grid)
        region = _build_region(raw.get("region", {}), grid)
        horizon = int(raw["horizon"])
        if horizon < 8:
            raise ConfigError(f"field 'horizon' must be >= 8, got {horizon}")
        mode = str(raw.get("extraction", "none")).lower()
        if mode not in ("p>1", "p=1", "none"):
            raise ConfigError(f"field 'extraction': unknown mode {mode!r}")
        if mode == "p>1" and not (p != INFINITY and p > 1.0):
            raise ConfigError(f"extraction mode 'p>1' needs finite p > 1, got p={raw['p']}")
        if mode == "p=1" and p != 1.0:
            raise ConfigError(f"extraction mode 'p=1' needs p = 1, got p={raw['p']}")
        if p == INFINITY and mode != "none":
            raise ConfigError("sup-norm scenarios run their own p = 1 extraction internally")
        fraw = raw.get("f")
        f = ConvexFunctionSpec.from_config(fraw) if fraw else None
        K = ConvexSetSpec.from_config(fraw["K"]) if fraw and "K" in fraw else (
            ConvexSetSpec(kind="whole_space") if fraw else None
        )
        r_schedule = raw.get("R_schedule")
        if r_schedule is not None:
            r_schedule = [float(r) for r in r_schedule]
            if p != INFINITY:
                raise ConfigError("field 'R_schedule' applies to sup-norm scenarios only")
        levels = int(raw.get("levels", 4))
        expect = dict(raw.get("expect") or {})
        output_dir = str(raw.get("output_dir", "."))
        # surface aliasing-guard refusals as configuration errors up front
        generate_vector(seq, horizon, grid)
    except KeyError as err:
        raise ConfigError(f"missing config field {err.args[0]!r}") from None
    except (TypeError, ValueError, InvalidArgumentError) as err:
        raise ConfigError(f"invalid config value: {err}") from err
    return ScenarioConfig(
        name=name,
        raw=raw,
        grid=grid,
        p=p,
        m=m,
        sequence=seq,
        limit=limit,
        region=region,
        horizon=horizon,
        extraction_mode=mode,
        f=f,
        K=K,
        r_schedule=r_schedule,
        levels=levels,
        expect=expect,
        output_dir=output_dir,
    )


def _probe_phase(cfg: ScenarioConfig):
    dictionary = default_probe_dictionary(cfg.grid)
    if cfg.p == INFINITY:
        report = weak_star_probe(cfg.sequence, cfg.limit, dictionary, cfg.horizon)
    else:
        report = weak_probe(cfg.sequence, cfg.limit, cfg.p, dictionary, cfg.horizon)
    expected = cfg.expect.get("probe_verdict", CONVERGING)
    ok = report.verdict == expected
    detail = f"verdict={report.verdict} slope={report.slope:.3g} expected={expected}"
    return report, ok, detail


def _extract_phase(cfg: ScenarioConfig):
    if cfg.extraction_mode == "p=1":
        schedule, trace = szlenk_extract(cfg.sequence, cfg.grid, cfg.levels, cfg.horizon)
        ok = schedule.checkpoints_ok(tol=1e-9) and all(
            c.margin >= -1e-12 for c in schedule.splitting_checks
        )
        worst = min(c.margin for c in schedule.checkpoints)
        detail = f"levels={cfg.levels} picks={trace.length} worst_checkpoint_margin={worst:.3g}"
        return trace, schedule, ok, detail
    trace = banach_saks_extract(cfg.sequence, cfg.p, cfg.grid, cfg.horizon)
    detail = f"picks={trace.length} max_pairing={float(trace.pairings.max()):.3g}"
    return trace, None, True, detail


def _cesaro_phase(cfg: ScenarioConfig, trace):
    values = trace.cesaro_norms
    if float(values.max()) <= 1e-15:
        slope = None
        detail = "curve identically zero (convergence exact)"
    else:
        ks = np.arange(1, values.size + 1, dtype=float)
        pos = values > 0
        slope = float(np.polyfit(np.log(ks[pos]), np.log(values[pos]), 1)[0])
        detail = f"slope={slope:.4f}"
    ok = True
    window = cfg.expect.get("cesaro_slope")
    if window is not None and slope is not None:
        ok = ok and (window[0] <= slope <= window[1])
        detail += f" window={window}"
    drop = cfg.expect.get("cesaro_drop")
    if drop is not None:
        ratio = float(values[-1] / values[0]) if values[0] > 0 else 0.0
        ok = ok and ratio <= drop
        detail += f" drop={ratio:.4f}<= {drop}"
    return slope, ok, detail


def _liminf_phase(cfg: ScenarioConfig):
    expect_refusal = bool(cfg.expect.get("liminf_refusal", False))
    try:
        if cfg.p == INFINITY and cfg.r_schedule:
            result = weak_star_verify(
                cfg.sequence, cfg.limit, cfg.f, cfg.K, cfg.region,
                cfg.horizon, cfg.r_schedule,
            )
            report = result.reports[-1]
            ok = result.passed
            detail = (
                f"radii={result.radii} limit_integrals={[f'{v:.6g}' for v in result.limit_integrals]}"
                f" monotone={result.monotone}"
            )
        elif cfg.p == INFINITY:
            report = mazur_scenario_verify(
                cfg.sequence, cfg.limit, cfg.f, cfg.K, cfg.region, cfg.horizon
            )
            ok = report.passed
            detail = f"margin={report.margin:.6g}"
        else:
            report = liminf_verify(
                cfg.sequence, cfg.limit, cfg.f, cfg.K, cfg.region, cfg.p, cfg.horizon
            )
            ok = report.passed
            detail = f"margin={report.margin:.6g}"
            if report.replay is not None and report.replay.jensen_margins.size:
                detail += f" jensen_min={float(report.replay.jensen_margins.min()):.3g}"
    except (PreconditionViolationError, InternalConsistencyError) as err:
        if expect_refusal:
            return None, True, f"refused as expected: {err}"
        return None, False, f"refused: {err}"
    if expect_refusal:
        return report, False, "expected a refusal but verification ran"
    window = cfg.expect.get("tail_inf_range")
    if window is not None:
        tail = float(report.alphas[cfg.horizon // 2 :].min())
        ok = ok and (window[0] <= tail <= window[1])
        detail += f" tail_inf={tail:.6g} window={window}"
    return report, ok, detail


def run_scenario(cfg: ScenarioConfig, output_dir=None, phases=("probe", "extract", "liminf")) -> RunManifest:
    """Execute the configured phases in order, writing CSV reports.

    Later phases that depend on a failed hypothesis are skipped and marked.
    """
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.name, cfg.digest, __version__)

    probe_report = None
    if "probe" in phases:
        start = time.perf_counter()
        try:
            probe_report, ok, detail = _probe_phase(cfg)
            manifest.add_phase("probe", "pass" if ok else "fail", time.perf_counter() - start, detail)
        except LabError as err:
            manifest.add_phase("probe", "error", time.perf_counter() - start, str(err))
        if probe_report is not None:
            path = out / f"{cfg.name}.probe.csv"
            _write_csv(path, ("index", "residual", "verdict"), probe_report.rows())
            manifest.outputs.append(str(path))

    trace = None
    if "extract" in phases and cfg.extraction_mode != "none":
        start = time.perf_counter()
        refuted = probe_report is not None and probe_report.verdict == NOT_CONVERGING
        if "probe" in phases and refuted:
            manifest.add_phase(
                "extraction", "skipped", 0.0, "weak-convergence hypothesis refuted by the probe"
            )
        else:
            try:
                trace, schedule, ok, detail = _extract_phase(cfg)
                manifest.add_phase(
                    "extraction", "pass" if ok else "fail", time.perf_counter() - start, detail
                )
            except (ExtractionStalledError, LevelStalledError) as err:
                trace = getattr(err, "trace", None)
                manifest.add_phase("extraction", "fail", time.perf_counter() - start, str(err))

        bound_margins = None
        if cfg.extraction_mode == "p>1":
            start = time.perf_counter()
            if trace is None:
                manifest.add_phase("growth_bound", "skipped", 0.0, "no trace")
            else:
                consts = InequalityConstants.build(cfg.p)
                report = verify_growth_bound(trace, consts, cfg.p)
                ok = report.aggregate_ok() and report.stepwise_ok()
                bound_margins = report.per_step_minimum()
                manifest.add_phase(
                    "growth_bound",
                    "pass" if ok else "fail",
                    time.perf_counter() - start,
                    f"A={consts.a:.6g} B={consts.b:.6g} "
                    f"min_margin={float(report.aggregate_margins.min()):.3g}",
                )

        start = time.perf_counter()
        if trace is None:
            manifest.add_phase("cesaro", "skipped", 0.0, "no trace")
        else:
            slope, ok, detail = _cesaro_phase(cfg, trace)
            manifest.add_phase("cesaro", "pass" if ok else "fail", time.perf_counter() - start, detail)
            path = out / f"{cfg.name}.trace.csv"
            _write_csv(
                path,
                ("k", "selected_index", "max_pairing", "partial_norm_p", "cesaro_norm", "bound_margin"),
                trace.rows(bound_margins),
            )
            manifest.outputs.append(str(path))

    if "liminf" in phases and cfg.f is not None:
        start = time.perf_counter()
        report, ok, detail = _liminf_phase(cfg)
        manifest.add_phase("liminf", "pass" if ok else "fail", time.perf_counter() - start, detail)
        if report is not None:
            path = out / f"{cfg.name}.liminf.csv"
            _write_csv(
                path,
                ("i", "alpha_i", "tail_inf", "limit_integral", "margin"),
                report.rows(),
            )
            manifest.outputs.append(str(path))

    manifest_path = out / f"{cfg.name}.manifest.json"
    manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    manifest.outputs.append(str(manifest_path))
    return manifest


def _cmd_scenario(args, phases) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        manifest = run_scenario(cfg, output_dir=args.output_dir, phases=phases)
    except LabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for phase in manifest.phases:
        print(f"{cfg.name}: {phase['name']}: {phase['status']} ({phase['detail']})")
    return 0 if manifest.passed else 1


def _lemma1_rows(p_list, t_max, step, ab_range, ab_step, samples, seed):
    rows = []
    rng = np.random.default_rng(seed)
    for p in p_list:
        consts = InequalityConstants.build(p, t_max=t_max, step=step)
        grid_1d = np.arange(-ab_range, ab_range + ab_step / 2, ab_step)
        a, b = np.meshgrid(grid_1d, grid_1d, indexing="ij")
        margins = check_pointwise_inequality(p, a.ravel(), b.ravel(), consts)
        worst = float(margins.min())
        dev = 0.0
        if samples > 0:
            ra = rng.uniform(-ab_range, ab_range, samples)
            rb = rng.uniform(-ab_range, ab_range, samples)
            lam = rng.uniform(0.1, 10.0, samples)
            scaled = check_pointwise_inequality(p, lam * ra, lam * rb, consts)
            base = check_pointwise_inequality(p, ra, rb, consts)
            scale = lam ** p * (
                np.abs(ra) ** p
                + p * np.abs(ra) ** (p - 1.0) * np.abs(rb)
                + consts.a * np.abs(rb) ** p
                + np.abs(ra + rb) ** p
                + 1e-300
            )
            dev = float(np.max(np.abs(scaled - lam ** p * base) / scale))
        rows.append((p, consts.e_p, consts.a, consts.b, worst, dev))
    return rows


def _cmd_verify_lemma1(args) -> int:
    rows = _lemma1_rows(
        args.p, args.range, args.step, args.ab_range, args.ab_step,
        args.homogeneity_samples, args.seed,
    )
    ok = True
    for p, e_p, a, b, worst, dev in rows:
        line_ok = worst >= -_GRID_MARGIN_TOL and dev <= _HOMOGENEITY_TOL
        ok = ok and line_ok
        print(
            f"p={p:g} E(p)={e_p} A={a:.6g} B={b:.6g} worst_margin={worst:.3e} "
            f"homogeneity_dev={dev:.3e} [{'ok' if line_ok else 'FAIL'}]"
        )
    if args.json:
        consts = [
            InequalityConstants.build(p, t_max=args.range, step=args.step).to_json_dict()
            for p in args.p
        ]
        Path(args.json).write_text(json.dumps(consts, indent=2) + "\n")
    return 0 if ok else 1


def _bundled_scenarios():
    root = resources.files("lplab.scenarios")
    return sorted(
        (entry for entry in root.iterdir() if entry.name.endswith(".json")),
        key=lambda entry: entry.name,
    )


def _cmd_suite(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True

    rows = _lemma1_rows(list(_LEMMA1_DEFAULT_P), 100.0, 1e-3, 10.0, 0.05, 10000, args.seed)
    lemma_ok = all(
        worst >= -_GRID_MARGIN_TOL and dev <= _HOMOGENEITY_TOL
        for _, _, _, _, worst, dev in rows
    )
    all_ok = all_ok and lemma_ok
    _write_csv(
        out / "lemma1.csv",
        ("p", "E_p", "A", "B", "worst_margin", "homogeneity_dev"),
        rows,
    )
    print(f"lemma1 constants and grid check: {'PASS' if lemma_ok else 'FAIL'}")

    for entry in _bundled_scenarios():
        raw = json.loads(entry.read_text())
        cfg = build_config(raw)
        manifest = run_scenario(cfg, output_dir=out)
        status = "PASS" if manifest.passed else "FAIL"
        all_ok = all_ok and manifest.passed
        summary = ", ".join(f"{p['name']}={p['status']}" for p in manifest.phases)
        print(f"scenario {cfg.name}: {status} ({summary})")
    return 0 if all_ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lplab",
        description="Cesaro-mean extraction and convex integral inequalities "
        "on discretized function spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lem = sub.add_parser("verify-lemma1", help="pointwise inequality constants and grid check")
    lem.add_argument("--p", type=float, nargs="+", default=list(_LEMMA1_DEFAULT_P))
    lem.add_argument("--range", type=float, default=100.0, help="scan half-range for A")
    lem.add_argument("--step", type=float, default=1e-3, help="scan step for A")
    lem.add_argument("--ab-range", type=float, default=10.0)
    lem.add_argument("--ab-step", type=float, default=0.05)
    lem.add_argument("--homogeneity-samples", type=int, default=10000)
    lem.add_argument("--seed", type=int, default=20260810)
    lem.add_argument("--json", default=None, help="write the constants to this JSON file")
    lem.set_defaults(func=_cmd_verify_lemma1)

    for name, phases, help_text in (
        ("probe", ("probe",), "weak/weak* probe only"),
        ("extract", ("probe", "extract"), "extraction with trace CSV"),
        ("liminf", ("probe", "liminf"), "liminf verification"),
        ("run", ("probe", "extract", "liminf"), "full scenario pipeline"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--output-dir", default=None)
        cmd.set_defaults(func=lambda args, ph=phases: _cmd_scenario(args, ph))

    suite = sub.add_parser("suite", help="run all bundled scenarios")
    suite.add_argument("--output-dir", default="suite-out")
    suite.add_argument("--seed", type=int, default=20260810)
    suite.set_defaults(func=_cmd_suite)

    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
