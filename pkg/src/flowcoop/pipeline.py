"""Training pipeline and the serialized model artifact.

``train_pipeline`` turns a raw dataset into everything planning needs: a
flow-model bank over the human trajectories, a reward over (descriptor,
robot position) features, and the preprocessed demonstrations the planner
conditions on. ``save_artifact``/``load_artifact`` round-trip the bundle
through a single JSON file; models are rebuilt from their exact training
pairs, so a reloaded artifact predicts identically to the fresh one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arm import ArmModel, default_arm
from .errors import SchemaError
from .flow import FlowModelBank, train_bank
from .gp import SEKernel
from .planner import CooperationPlanner, PlanConfig
from .reward import RewardModel, extract_features, fit_reward, fit_reward_auto
from .trajectories import Dataset, InteractionDemo, Trajectory, preprocess

ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of the training pipeline."""

    n_clusters: int = 5
    out_len: int = 50
    flow_gain: float = 1.0
    flow_noise_var: float = 1e-4
    flow_lengthscale_scale: float = 0.2
    spatial_weight: float = 1.0
    n_inducing: int = 200
    lam: float | None = None        # None: auto-scale from the density peak
    reward_scale: float = 0.1
    seed: int = 0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "n_clusters", "out_len", "flow_gain", "flow_noise_var",
            "flow_lengthscale_scale", "spatial_weight", "n_inducing", "lam",
            "reward_scale", "seed")}


@dataclass
class TrainedModels:
    """Everything a planner or live session needs, in one bundle."""

    bank: FlowModelBank
    reward: RewardModel
    demos: list[InteractionDemo]     # preprocessed train demos
    out_len: int
    spatial_weight: float = 1.0
    arm: ArmModel = field(default_factory=default_arm)
    plan_config: PlanConfig = field(default_factory=PlanConfig)

    def planner(self) -> CooperationPlanner:
        cfg = self.plan_config
        if cfg.spatial_weight != self.spatial_weight:
            cfg = PlanConfig(**{**cfg.to_dict(), "spatial_weight": self.spatial_weight})
        return CooperationPlanner(self.arm, self.bank, self.reward, self.demos,
                                  config=cfg)


def preprocess_dataset(dataset: Dataset, out_len: int,
                       smooth_hyper: SEKernel | None = None) -> list[InteractionDemo]:
    """Smooth and resample both sides of every demo."""
    return [
        InteractionDemo(human=preprocess(d.human, smooth_hyper, out_len),
                        robot=preprocess(d.robot, smooth_hyper, out_len),
                        mode_label=d.mode_label)
        for d in dataset.demos
    ]


def train_pipeline(dataset: Dataset, config: TrainConfig = TrainConfig(),
                   plan_config: PlanConfig | None = None,
                   arm: ArmModel | None = None) -> TrainedModels:
    """Preprocess, cluster, fit per-cluster flow models, then fit the reward."""
    demos = preprocess_dataset(dataset, config.out_len)
    humans = [d.human for d in demos]
    kernel = SEKernel.isotropic_for(np.vstack([h.x for h in humans]),
                                    gain=config.flow_gain,
                                    noise_var=config.flow_noise_var,
                                    scale=config.flow_lengthscale_scale)
    bank = train_bank(humans, config.n_clusters, kernel, seed=config.seed,
                      spatial_weight=config.spatial_weight)
    features = extract_features(demos, bank, config.spatial_weight)
    if config.lam is not None:
        reward = fit_reward(features, min(config.n_inducing, len(features)),
                            config.lam, seed=config.seed)
    else:
        reward = fit_reward_auto(features, config.n_inducing, seed=config.seed,
                                 reward_scale=config.reward_scale)
    return TrainedModels(bank=bank, reward=reward, demos=demos,
                         out_len=config.out_len,
                         spatial_weight=config.spatial_weight,
                         arm=arm if arm is not None else default_arm(),
                         plan_config=plan_config if plan_config is not None else PlanConfig())


def _traj_to_dict(t: Trajectory) -> dict:
    return {"t": t.t.tolist(), "x": t.x.tolist(), "xdot": t.xdot.tolist()}


def _traj_from_dict(d: dict) -> Trajectory:
    return Trajectory(t=np.asarray(d["t"], dtype=float),
                      x=np.asarray(d["x"], dtype=float),
                      xdot=np.asarray(d["xdot"], dtype=float))


def save_artifact(models: TrainedModels, path) -> None:
    payload = {
        "version": ARTIFACT_VERSION,
        "out_len": models.out_len,
        "spatial_weight": models.spatial_weight,
        "bank": models.bank.to_dict(),
        "reward": models.reward.to_dict(),
        "arm": models.arm.to_dict(),
        "plan": models.plan_config.to_dict(),
        "demos": [
            {"mode": d.mode_label,
             "human": _traj_to_dict(d.human),
             "robot": _traj_to_dict(d.robot)}
            for d in models.demos
        ],
    }
    Path(path).write_text(json.dumps(payload))


def load_artifact(path) -> TrainedModels:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read artifact ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("version") != ARTIFACT_VERSION:
        raise SchemaError(f"{path}: unsupported artifact version "
                          f"{payload.get('version') if isinstance(payload, dict) else '?'}")
    try:
        demos = [InteractionDemo(human=_traj_from_dict(d["human"]),
                                 robot=_traj_from_dict(d["robot"]),
                                 mode_label=d.get("mode"))
                 for d in payload["demos"]]
        return TrainedModels(
            bank=FlowModelBank.from_dict(payload["bank"]),
            reward=RewardModel.from_dict(payload["reward"]),
            demos=demos,
            out_len=int(payload["out_len"]),
            spatial_weight=float(payload.get("spatial_weight", 1.0)),
            arm=ArmModel.from_dict(payload["arm"]),
            plan_config=PlanConfig.from_dict(payload["plan"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed artifact ({exc})") from exc
