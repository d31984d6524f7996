"""End-to-end evaluation runs: split, calibrate, score, measure, report.

A run is fully described by a RunConfig. The resolved config (everything
except the output directory) is echoed to config.json next to the
reports, and re-running from that echo reproduces every report file
byte-identically.

Per-method work is isolated: one method failing is recorded in
summary.csv without aborting the others. Methods may be scored on
worker threads (capped by OSR_BENCH_THREADS); files are always written
serially in the configured method order, so outputs do not depend on
scheduling.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .metrics import (
    DEFAULT_GRID,
    OosaTable,
    OscrCurve,
    normalize_scores,
    oosa_table,
    oscr_curve,
    validate_grid,
)
from .pack import FeaturePack, apply_class_split, read_pack
from .scoring import (
    VALID_METHODS,
    CalibrationModel,
    ScoreMethod,
    ScoredSet,
    fit_calibration,
    score_all,
)
from .splits import SplitSpec, split_classes, split_samples


@dataclass
class RunConfig:
    """Resolved flags for one eval run."""

    pack: str
    output_dir: str
    methods: list[str] = field(default_factory=lambda: list(VALID_METHODS))
    known_fraction: float = 0.75
    test_fraction: float = 0.10
    val_fraction: float = 0.10
    seed: int = 0
    grid: list[float] = field(default_factory=lambda: list(DEFAULT_GRID))
    temperature: float = 1.0
    maxlogit_source: str = "head"
    stratified: bool = False

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("no score methods selected")
        for name in self.methods:
            if name not in VALID_METHODS:
                raise ConfigError(f"unknown score method: {name!r}")
        if self.maxlogit_source not in ("head", "penultimate-max"):
            raise ConfigError(f"unknown maxlogit source: {self.maxlogit_source!r}")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        validate_grid(self.grid)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            known_fraction=self.known_fraction,
            test_fraction=self.test_fraction,
            val_fraction=self.val_fraction,
            seed=self.seed,
        )

    def echo(self) -> dict:
        """Everything needed to reproduce the run, minus the output dir."""
        return {
            "pack": self.pack,
            "methods": list(self.methods),
            "known_fraction": self.known_fraction,
            "test_fraction": self.test_fraction,
            "val_fraction": self.val_fraction,
            "seed": self.seed,
            "grid": list(self.grid),
            "temperature": self.temperature,
            "maxlogit_source": self.maxlogit_source,
            "stratified": self.stratified,
        }

    def score_method(self, name: str) -> ScoreMethod:
        if name == "energy":
            return ScoreMethod("energy", temperature=self.temperature)
        return ScoreMethod(name)


@dataclass
class MethodResult:
    method: str
    val: ScoredSet
    test: ScoredSet
    table: OosaTable
    curve: OscrCurve


@dataclass
class MethodFailure:
    method: str
    error: Exception


def _worker_cap(n_methods: int) -> int:
    raw = os.environ.get("OSR_BENCH_THREADS", "")
    if not raw:
        return 1
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"OSR_BENCH_THREADS must be an integer, got {raw!r}") from exc
    return max(1, min(cap, n_methods))


def prepare_pack(pack: FeaturePack, spec: SplitSpec) -> FeaturePack:
    """Apply the class-level split when the pack still spans all classes.

    Packs that already carry -1 labels had their unknowns designated
    upstream (exporter or generator) and are used as-is.
    """
    if pack.n and (pack.labels == -1).any():
        return pack
    known, _ = split_classes(pack.K, spec)
    return apply_class_split(pack, known)


def evaluate_pack(pack: FeaturePack, config: RunConfig) -> list[MethodResult | MethodFailure]:
    """Score and measure every configured method on one pack."""
    spec = config.split_spec()
    pack = prepare_pack(pack, spec)
    train, val, test = split_samples(
        pack, set(range(pack.K)), spec, stratified=config.stratified
    )

    model: CalibrationModel | None = None
    model_error: Exception | None = None
    if "costarr" in config.methods:
        try:
            model = fit_calibration(pack, train)
        except Exception as exc:
            model_error = exc

    def run_one(name: str) -> MethodResult | MethodFailure:
        if name == "costarr" and model_error is not None:
            return MethodFailure(name, model_error)
        try:
            method = config.score_method(name)
            val_scored = score_all(pack, val, method, model, config.maxlogit_source)
            test_scored = score_all(pack, test, method, model, config.maxlogit_source)
            val_norm, test_norm = normalize_scores(val_scored, test_scored)
            table = oosa_table(val_norm, test_norm, config.grid)
            curve = oscr_curve(test_norm)
            return MethodResult(name, val_norm, test_norm, table, curve)
        except Exception as exc:
            return MethodFailure(name, exc)

    workers = _worker_cap(len(config.methods))
    if workers == 1:
        return [run_one(name) for name in config.methods]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, config.methods))


def run_eval(config: RunConfig) -> list[MethodResult | MethodFailure]:
    """Execute an eval run and write all report files under output_dir."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    pack = read_pack(config.pack)
    results = evaluate_pack(pack, config)

    for result in results:
        if isinstance(result, MethodResult):
            _write_method_report(out, result)
    _write_summary(out / "summary.csv", results)
    (out / "config.json").write_text(
        json.dumps(config.echo(), indent=2, sort_keys=True) + "\n"
    )
    return results


def _write_method_report(out: Path, result: MethodResult) -> None:
    table, curve = result.table, result.curve
    report = {
        "method": result.method,
        "tau_star": table.tau_star,
        "oosa_at_tau_star": table.oosa_at_tau_star,
        "oosa_grid": [
            {"tau": float(t), "oosa": float(o)}
            for t, o in zip(table.thresholds, table.oosa)
        ],
        "auoscr": curve.auoscr,
        "oscr_points": [{"fpr": f, "ccr": c} for f, c in curve.points],
        "oosa_grid_val": [
            {"tau": float(t), "oosa": float(o)}
            for t, o in zip(table.thresholds, table.oosa_val)
        ],
    }
    (out / f"{result.method}_report.json").write_text(json.dumps(report, indent=2) + "\n")

    oosa_lines = ["tau,oosa_test,oosa_val"]
    for t, o_test, o_val in zip(table.thresholds, table.oosa, table.oosa_val):
        oosa_lines.append(f"{t:.9g},{o_test:.9g},{o_val:.9g}")
    (out / f"{result.method}_oosa.csv").write_text("\n".join(oosa_lines) + "\n")

    oscr_lines = ["fpr,ccr"]
    for f, c in curve.points:
        oscr_lines.append(f"{f:.9g},{c:.9g}")
    (out / f"{result.method}_oscr.csv").write_text("\n".join(oscr_lines) + "\n")

    result.val.write_csv(out / f"{result.method}_scores_val.csv")
    result.test.write_csv(out / f"{result.method}_scores_test.csv")


def _write_summary(path: Path, results: list[MethodResult | MethodFailure]) -> None:
    lines = ["method,status,tau_star,oosa_at_tau_star,auoscr"]
    for result in results:
        if isinstance(result, MethodResult):
            lines.append(
                f"{result.method},ok,{result.table.tau_star:.9g},"
                f"{result.table.oosa_at_tau_star:.9g},{result.curve.auoscr:.9g}"
            )
        else:
            reason = type(result.error).__name__
            lines.append(f"{result.method},error:{reason},,,")
    path.write_text("\n".join(lines) + "\n")
