"""Evaluation harness: observation-ratio sweep and obstacle-clearance study.

Both studies share one evaluation path: train on half the dataset, then for
each held-out demo plan from a prefix of the human trajectory and score the
plan against the demo's actual robot path. The sweep varies the observed
prefix fraction; the obstacle study runs at full observation with a sphere
parked on each target path's midpoint and the barrier enabled.

Reports are machine-readable (CSV + JSON); every row carries the config
hash and seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arm import ik_solve
from .datagen import split_dataset
from .errors import ValidationError
from .pipeline import TrainConfig, TrainedModels, preprocess_dataset, train_pipeline
from .planner import Obstacle, PlanConfig
from .trajectories import Dataset

DEFAULT_RATIOS = (0.2, 0.4, 0.6, 0.8, 1.0)
DEFAULT_OBSTACLE_RADIUS_M = 0.05


@dataclass(frozen=True)
class SweepConfig:
    """Evaluation knobs: observed prefix ratios, cluster count, sampling."""

    ratios: tuple[float, ...] = DEFAULT_RATIOS
    n_clusters: int = 5
    n_samples: int = 200
    seed: int = 0
    train_fraction: float = 0.5
    train: TrainConfig = field(default=None)
    plan: PlanConfig = field(default_factory=PlanConfig)

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.ratios)
        if not ratios or any(not (0.0 < r <= 1.0) for r in ratios):
            raise ValidationError("ratios must lie in (0, 1]")
        if list(ratios) != sorted(ratios):
            raise ValidationError("ratios must be sorted ascending")
        object.__setattr__(self, "ratios", ratios)
        if self.train is None:
            object.__setattr__(self, "train", TrainConfig(
                n_clusters=self.n_clusters, seed=self.seed))

    def to_dict(self) -> dict:
        return {"ratios": list(self.ratios), "n_clusters": self.n_clusters,
                "n_samples": self.n_samples, "seed": self.seed,
                "train_fraction": self.train_fraction,
                "train": self.train.to_dict(), "plan": self.plan.to_dict()}


def config_hash(config: SweepConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def resample_path(path: np.ndarray, n: int) -> np.ndarray:
    """Linear resampling of a (L, D) path to n uniform index fractions."""
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if path.shape[0] == 0:
        raise ValidationError("empty path")
    if path.shape[0] == n:
        return path.copy()
    s_old = np.linspace(0.0, 1.0, path.shape[0])
    s_new = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(s_new, s_old, path[:, d])
                            for d in range(path.shape[1])])


def rms_error(predicted: np.ndarray, target: np.ndarray,
              resample_to: int | None = None) -> float:
    """Root-mean-square pointwise Euclidean distance between two paths.

    Paths of unequal length are first resampled to ``resample_to`` (default
    50) uniform indices; equal-length paths compare directly.
    """
    predicted = np.atleast_2d(np.asarray(predicted, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    if predicted.shape[0] == 0 or target.shape[0] == 0:
        raise ValidationError("paths must be nonempty")
    if predicted.shape[0] != target.shape[0] or resample_to is not None:
        n = resample_to if resample_to is not None else 50
        predicted = resample_path(predicted, n)
        target = resample_path(target, n)
    diff = predicted - target
    return float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))


@dataclass(frozen=True)
class EvalRecord:
    """One (test demo, ratio) evaluation."""

    demo_index: int
    mode: str | None
    ratio: float
    rms: float
    descriptor_argmax: int
    d_min_mm: float | None
    seed: int


@dataclass
class SweepReport:
    rows: list[dict]
    records: list[EvalRecord]
    config_hash: str
    seed: int


def _plan_seed(seed: int, demo_index: int, ratio: float) -> int:
    return seed * 1_000_003 + demo_index * 101 + int(round(ratio * 100))


def _evaluate(models: TrainedModels, test_demos, ratios, config: SweepConfig,
              obstacles_for=None) -> list[EvalRecord]:
    planner = models.planner()
    arm = models.arm
    records = []
    for idx, demo in enumerate(test_demos):
        q_now = ik_solve(arm, demo.robot.x[0], q0=arm.q_home)
        target = demo.robot.x
        for ratio in ratios:
            n_obs = max(2, math.ceil(ratio * len(demo.human)))
            xi_obs = demo.human.prefix(n_obs)
            obstacles = obstacles_for(demo) if obstacles_for is not None else None
            seed = _plan_seed(config.seed, idx, ratio)
            result = planner.plan(xi_obs, q_now, n_samples=config.n_samples,
                                  seed=seed, obstacles=obstacles)
            records.append(EvalRecord(
                demo_index=idx, mode=demo.mode_label, ratio=ratio,
                rms=rms_error(result.ee_path, target),
                descriptor_argmax=int(np.argmax(result.descriptor)),
                d_min_mm=result.clearance_mm, seed=seed))
    return records


def run_sweep(dataset: Dataset, config: SweepConfig = SweepConfig()) -> SweepReport:
    """Observation-ratio sweep over the held-out demos."""
    train, test = split_dataset(dataset, config.seed, config.train_fraction)
    models = train_pipeline(train, config.train, plan_config=config.plan)
    test_demos = preprocess_dataset(test, models.out_len)
    records = _evaluate(models, test_demos, config.ratios, config)
    chash = config_hash(config)
    rows = []
    for ratio in config.ratios:
        vals = np.array([r.rms for r in records if r.ratio == ratio])
        rows.append({"ratio": ratio, "mean_rms": float(vals.mean()),
                     "std_rms": float(vals.std()), "n": int(vals.size),
                     "config_hash": chash, "seed": config.seed})
    return SweepReport(rows=rows, records=records, config_hash=chash,
                       seed=config.seed)


def run_obstacle_study(dataset: Dataset, config: SweepConfig = SweepConfig(),
                       obstacle: Obstacle | str | None = "target_midpoint",
                       radius_m: float = DEFAULT_OBSTACLE_RADIUS_M) -> SweepReport:
    """Full-observation runs with the log barrier enabled.

    ``obstacle`` is a fixed :class:`Obstacle`, the string ``"target_midpoint"``
    (a sphere of ``radius_m`` on each target path's midpoint), or None, which
    reproduces the plain sweep at ratio 1.0 bit-exactly.
    """
    train, test = split_dataset(dataset, config.seed, config.train_fraction)
    models = train_pipeline(train, config.train, plan_config=config.plan)
    test_demos = preprocess_dataset(test, models.out_len)

    if obstacle is None:
        obstacles_for = None
    elif isinstance(obstacle, Obstacle):
        obstacles_for = lambda demo: [obstacle]
    elif obstacle == "target_midpoint":
        def obstacles_for(demo):
            mid = demo.robot.x[len(demo.robot) // 2]
            return [Obstacle(center=mid, radius_m=radius_m)]
    else:
        raise ValidationError(f"unknown obstacle spec {obstacle!r}")

    records = _evaluate(models, test_demos, (1.0,), config, obstacles_for)
    chash = config_hash(config)
    rows = [{"run": r.demo_index, "d_min_mm": r.d_min_mm, "rms": r.rms,
             "config_hash": chash, "seed": config.seed} for r in records]
    return SweepReport(rows=rows, records=records, config_hash=chash,
                       seed=config.seed)


def write_report(report: SweepReport, out_dir, stem: str) -> tuple[Path, Path]:
    """Emit ``<stem>.csv`` and ``<stem>.json`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    if report.rows:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(report.rows[0].keys()))
            writer.writeheader()
            writer.writerows(report.rows)
    payload = {
        "config_hash": report.config_hash,
        "seed": report.seed,
        "rows": report.rows,
        "records": [
            {"demo_index": r.demo_index, "mode": r.mode, "ratio": r.ratio,
             "rms": r.rms, "descriptor_argmax": r.descriptor_argmax,
             "d_min_mm": r.d_min_mm, "seed": r.seed}
            for r in report.records
        ],
    }
    json_path.write_text(json.dumps(payload, indent=2))
    return csv_path, json_path
