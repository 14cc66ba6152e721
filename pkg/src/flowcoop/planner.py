"""Cooperative trajectory generation.

Given an observed human prefix, the planner

1. describes the motion against the trained flow bank,
2. estimates where (and how fast) the partner's hand should end up, as a
   likelihood-weighted average of the demonstrated endings,
3. maps that Cartesian goal into joint space, samples smooth joint paths
   between the current configuration and the goal (with a run-up anchor
   that imposes the estimated final heading), and
4. combines the samples, weighted by the exponentiated path reward, minus
   a log-barrier obstacle cost when obstacles are present.

The combination weights always form a probability vector, so adding a
constant to every sample's reward leaves the output untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arm import ArmModel, forward_kinematics_batch, ik_solve, joint_velocity_for
from .errors import ValidationError
from .flow import FlowModel, FlowModelBank, describe, fit_flow_model, flow_similarity
from .gp import SEKernel, apply_runup, grp_distribution, grp_sample
from .reward import RewardModel, trajectory_reward
from .trajectories import InteractionDemo, Trajectory

# Log-barrier constants; distances in millimeters.
BARRIER_ALPHA_MM = 100.0
BARRIER_BETA = -12.8
BARRIER_GAMMA = 5.73e-9
BARRIER_EPS = 1e-6
# Finite cap for deep violations where the barrier argument is nonpositive.
BARRIER_CAP = -float(np.log(1e-9)) + BARRIER_BETA

RUNUP_EPSILON = 0.01


@dataclass(frozen=True)
class Obstacle:
    """Sphere obstacle in workspace coordinates (meters)."""

    center: np.ndarray
    radius_m: float = 0.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(3)
        if self.radius_m < 0:
            raise ValidationError("radius must be >= 0")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius_m", float(self.radius_m))

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius_m": self.radius_m}

    @staticmethod
    def from_dict(d: dict) -> "Obstacle":
        return Obstacle(center=np.asarray(d["center"], dtype=float),
                        radius_m=float(d.get("radius_m", 0.0)))


def min_clearance_mm(frame_paths: np.ndarray, obstacles: list[Obstacle]) -> float:
    """Smallest surface distance (mm) from any obstacle to any frame point.

    ``frame_paths`` is (T, F, 3) or (T, 3); negative values mean penetration.
    """
    pts = np.asarray(frame_paths, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise ValidationError("empty paths")
    if not obstacles:
        raise ValidationError("no obstacles given")
    d = np.inf
    for obs in obstacles:
        dist = np.linalg.norm(pts - obs.center[None, :], axis=1) - obs.radius_m
        d = min(d, float(dist.min()))
    return d * 1000.0


def barrier_cost_from_dmin(d_min_mm: float) -> float:
    """Log-barrier value at a given clearance (millimeters)."""
    arg = BARRIER_GAMMA * (d_min_mm - BARRIER_ALPHA_MM) + BARRIER_EPS
    if arg <= 0.0:
        return BARRIER_CAP
    return -float(np.log(arg)) + BARRIER_BETA


def barrier_cost(frame_paths: np.ndarray, obstacles: list[Obstacle]) -> float:
    """Obstacle cost of a candidate plan's monitored-frame paths."""
    return barrier_cost_from_dmin(min_clearance_mm(frame_paths, obstacles))


def softmax_weights(scores: np.ndarray) -> np.ndarray:
    """Normalized exp(scores), shifted by the max for overflow safety.

    The shift makes the weights invariant to adding a constant to every
    score; the invariance is exact at the bit level whenever the shifted
    additions round exactly.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    if scores.shape[0] == 0:
        raise ValidationError("need at least one score")
    w = np.exp(scores - scores.max())
    return w / w.sum()


@dataclass(frozen=True)
class PlanConfig:
    """Planner knobs: sample count, path length, and joint-space path prior."""

    n_samples: int = 200
    path_len: int = 50
    epsilon: float = RUNUP_EPSILON
    grp_gain: float = 0.4           # rad^2 prior variance between anchors
    grp_lengthscale: float = 0.35   # fraction of the normalized time span
    grp_noise_var: float = 1e-8
    spatial_weight: float = 1.0
    ik_tol: float = 1e-3
    ik_damping: float = 0.05

    def joint_kernel(self) -> SEKernel:
        return SEKernel(gain=self.grp_gain, lengthscale=self.grp_lengthscale,
                        noise_var=self.grp_noise_var)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "n_samples", "path_len", "epsilon", "grp_gain", "grp_lengthscale",
            "grp_noise_var", "spatial_weight", "ik_tol", "ik_damping")}

    @staticmethod
    def from_dict(d: dict) -> "PlanConfig":
        return PlanConfig(**d)


@dataclass
class PlanResult:
    ee_path: np.ndarray          # (T, 3) combined end-effector path
    joint_path: np.ndarray       # (T, 7) combined joint path
    frame_paths: np.ndarray      # (T, 4, 3) combined monitored-frame paths
    weights: np.ndarray          # (n,) probability vector over samples
    rewards: np.ndarray          # (n,) per-sample path rewards
    barriers: np.ndarray | None  # (n,) per-sample obstacle costs, if any
    descriptor: np.ndarray       # (K,)
    goal_pos: np.ndarray         # (3,) estimated final hand position
    goal_vel: np.ndarray         # (3,) estimated final hand velocity
    q_goal: np.ndarray           # (7,)
    clearance_mm: float | None

    def to_dict(self) -> dict:
        return {
            "ee_path": self.ee_path.tolist(),
            "joint_path": self.joint_path.tolist(),
            "weights": self.weights.tolist(),
            "rewards": self.rewards.tolist(),
            "barriers": None if self.barriers is None else self.barriers.tolist(),
            "descriptor": self.descriptor.tolist(),
            "goal_pos": self.goal_pos.tolist(),
            "goal_vel": self.goal_vel.tolist(),
            "q_goal": self.q_goal.tolist(),
            "clearance_mm": self.clearance_mm,
        }


def estimate_final_pose(demos: list[InteractionDemo], xi_obs: Trajectory,
                        kernel: SEKernel, spatial_weight: float = 1.0
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Likelihood-weighted final hand position and velocity.

    Each demo's weight is exp(-d^2) for the observed prefix against a flow
    model of that demo's human trajectory, normalized across demos in the
    shifted log domain so far-from-everything prefixes still produce a
    proper convex combination.
    """
    if not demos:
        raise ValidationError("need at least one demonstration")
    models = [fit_flow_model(d.human, kernel) for d in demos]
    return _final_pose_from_models(models, demos, xi_obs, spatial_weight)


def _final_pose_from_models(models: list[FlowModel], demos: list[InteractionDemo],
                            xi_obs: Trajectory, spatial_weight: float
                            ) -> tuple[np.ndarray, np.ndarray]:
    d = np.array([flow_similarity(xi_obs, m, spatial_weight) for m in models])
    logw = -(d**2)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    finals = np.array([demo.robot.x[-1] for demo in demos])
    final_vels = np.array([demo.robot.xdot[-1] for demo in demos])
    return w @ finals, w @ final_vels


class CooperationPlanner:
    """Reusable planning context: trained models plus cached per-demo fits."""

    def __init__(self, arm: ArmModel, bank: FlowModelBank, reward: RewardModel,
                 demos: list[InteractionDemo], kernel: SEKernel | None = None,
                 config: PlanConfig = PlanConfig()):
        if not demos:
            raise ValidationError("planner needs the interacting demonstrations")
        self.arm = arm
        self.bank = bank
        self.reward = reward
        self.demos = list(demos)
        self.kernel = kernel if kernel is not None else bank.kernel
        self.config = config
        self._demo_models = [fit_flow_model(d.human, self.kernel) for d in self.demos]

    def final_pose(self, xi_obs: Trajectory) -> tuple[np.ndarray, np.ndarray]:
        return _final_pose_from_models(self._demo_models, self.demos, xi_obs,
                                       self.config.spatial_weight)

    def plan(self, xi_obs: Trajectory, q_now: np.ndarray, n_samples: int | None = None,
             seed: int = 0, obstacles: list[Obstacle] | None = None) -> PlanResult:
        cfg = self.config
        n = cfg.n_samples if n_samples is None else int(n_samples)
        if n < 1:
            raise ValidationError("n_samples must be >= 1")
        q_now = self.arm.check_limits(q_now)

        phi = describe(xi_obs, self.bank, cfg.spatial_weight)
        goal_pos, goal_vel = self.final_pose(xi_obs)
        q_goal = ik_solve(self.arm, goal_pos, q0=q_now, tol=cfg.ik_tol,
                          damping=cfg.ik_damping)
        qdot_goal = joint_velocity_for(self.arm, q_goal, goal_vel,
                                       damping=cfg.ik_damping)

        anchors = apply_runup([(0.0, q_now)], q_goal, qdot_goal, cfg.epsilon)
        test_times = np.linspace(0.0, 1.0, cfg.path_len)
        dist = grp_distribution(anchors, test_times, cfg.joint_kernel())
        samples = grp_sample(dist, n, seed)
        Q = np.stack(samples)                       # (n, T, 7)
        Q[:, 0, :] = q_now                          # start is known exactly
        Q = self.arm.clamp(Q)

        flatQ = Q.reshape(-1, self.arm.n_joints)
        frames = forward_kinematics_batch(self.arm, flatQ).reshape(
            n, cfg.path_len, 4, 3)
        ee = frames[:, :, 0, :]                     # hand frame paths

        rewards = np.array([trajectory_reward(self.reward, phi, ee[i])
                            for i in range(n)])
        barriers = None
        score = rewards
        if obstacles:
            barriers = np.array([barrier_cost(frames[i], obstacles)
                                 for i in range(n)])
            score = rewards - barriers

        w = softmax_weights(score)

        ee_hat = np.tensordot(w, ee, axes=1)
        q_hat = np.tensordot(w, Q, axes=1)
        frames_hat = np.tensordot(w, frames, axes=1)
        clearance = (min_clearance_mm(frames_hat, obstacles)
                     if obstacles else None)
        return PlanResult(ee_path=ee_hat, joint_path=q_hat, frame_paths=frames_hat,
                          weights=w, rewards=rewards, barriers=barriers,
                          descriptor=phi, goal_pos=goal_pos, goal_vel=goal_vel,
                          q_goal=q_goal, clearance_mm=clearance)


def plan(arm: ArmModel, bank: FlowModelBank, reward: RewardModel,
         demos: list[InteractionDemo], xi_obs: Trajectory, q_now: np.ndarray,
         n_samples: int = 200, seed: int = 0,
         obstacles: list[Obstacle] | None = None,
         config: PlanConfig = PlanConfig()) -> PlanResult:
    """One-shot planning entry point; see :class:`CooperationPlanner`."""
    planner = CooperationPlanner(arm, bank, reward, demos, config=config)
    return planner.plan(xi_obs, q_now, n_samples=n_samples, seed=seed,
                        obstacles=obstacles)
