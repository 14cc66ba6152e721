"""Synthetic interacting-demonstration generator.

Stands in for motion capture: four cooperation modes, each a pair of human
and robot waypoint templates on a desk-scale workspace, sampled as smooth
random paths around the template with a configurable deviation. Ground-truth
mode labels ride along for evaluation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .gp import SEKernel, grp_distribution, grp_sample
from .trajectories import Dataset, InteractionDemo, Trajectory

DEFAULT_NOISE_SIGMA = 0.01   # meters, comparable to capture jitter
DEFAULT_DEMOS_PER_MODE = 20
DEFAULT_DURATION_S = 5.0


@dataclass(frozen=True)
class ModeSpec:
    """One cooperation mode: paired waypoint templates plus sampling noise."""

    name: str
    human_waypoints: np.ndarray
    robot_waypoints: np.ndarray
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    n_demos: int = DEFAULT_DEMOS_PER_MODE

    def __post_init__(self):
        hw = np.atleast_2d(np.asarray(self.human_waypoints, dtype=float))
        rw = np.atleast_2d(np.asarray(self.robot_waypoints, dtype=float))
        if hw.shape[0] < 2 or rw.shape[0] < 2:
            raise ValidationError(f"mode {self.name!r}: need >= 2 waypoints per side")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be >= 0")
        if self.n_demos < 1:
            raise ValidationError("n_demos must be >= 1")
        object.__setattr__(self, "human_waypoints", hw)
        object.__setattr__(self, "robot_waypoints", rw)

    def to_dict(self) -> dict:
        return {"name": self.name,
                "human_waypoints": self.human_waypoints.tolist(),
                "robot_waypoints": self.robot_waypoints.tolist(),
                "noise_sigma": self.noise_sigma,
                "n_demos": self.n_demos}

    @staticmethod
    def from_dict(d: dict) -> "ModeSpec":
        return ModeSpec(name=d["name"],
                        human_waypoints=np.asarray(d["human_waypoints"], dtype=float),
                        robot_waypoints=np.asarray(d["robot_waypoints"], dtype=float),
                        noise_sigma=float(d.get("noise_sigma", DEFAULT_NOISE_SIGMA)),
                        n_demos=int(d.get("n_demos", DEFAULT_DEMOS_PER_MODE)))


def default_modes(noise_sigma: float = DEFAULT_NOISE_SIGMA,
                  n_demos: int = DEFAULT_DEMOS_PER_MODE) -> list[ModeSpec]:
    """Four desk-scale templates: two hand-overs and two lateral swipes.

    Workspace is in front of the arm base (x forward, y left, z up, meters);
    robot waypoints stay inside the default arm's reach. The robot responses
    arch over the table rather than cutting straight lines, like an arm
    lifting an object clear of the surface.
    """
    def mode(name, human, robot):
        return ModeSpec(name, np.array(human), np.array(robot),
                        noise_sigma=noise_sigma, n_demos=n_demos)

    return [
        mode("center_hand_over",
             [[0.65, 0.02, 0.25], [0.56, 0.01, 0.18], [0.50, 0.00, 0.14]],
             [[0.25, 0.00, 0.10], [0.33, 0.18, 0.22], [0.47, 0.00, 0.12]]),
        mode("right_hand_over",
             [[0.65, -0.28, 0.16], [0.56, -0.24, 0.13], [0.50, -0.20, 0.11]],
             [[0.25, 0.00, 0.10], [0.33, -0.26, 0.20], [0.45, -0.20, 0.12]]),
        mode("right_swipe",
             [[0.55, 0.15, 0.12], [0.57, -0.05, 0.14], [0.58, -0.25, 0.16]],
             [[0.25, 0.00, 0.10], [0.26, -0.24, 0.22], [0.40, -0.18, 0.38]]),
        mode("left_swipe",
             [[0.55, -0.15, 0.12], [0.57, 0.05, 0.14], [0.58, 0.25, 0.16]],
             [[0.25, 0.00, 0.10], [0.26, 0.24, 0.22], [0.40, 0.18, 0.38]]),
    ]


def generate(specs: list[ModeSpec], sample_rate_hz: float = 10.0, seed: int = 0,
             duration_s: float = DEFAULT_DURATION_S) -> Dataset:
    """Sample a labeled dataset: ``n_demos`` smooth paths around each template."""
    if not specs:
        raise ValidationError("need at least one mode spec")
    rng = np.random.default_rng(seed)
    n_steps = int(round(duration_s * sample_rate_hz)) + 1
    t = np.arange(n_steps) / sample_rate_hz

    demos = []
    for spec in specs:
        for _ in range(spec.n_demos):
            human = _sample_path(spec.human_waypoints, t, spec.noise_sigma, rng)
            robot = _sample_path(spec.robot_waypoints, t, spec.noise_sigma, rng)
            demos.append(InteractionDemo(
                human=Trajectory.from_points(t, human),
                robot=Trajectory.from_points(t, robot),
                mode_label=spec.name))
    return Dataset(demos=tuple(demos), sample_rate_hz=sample_rate_hz)


def _sample_path(waypoints: np.ndarray, t: np.ndarray, noise_sigma: float,
                 rng: np.random.Generator) -> np.ndarray:
    """One smooth path through the waypoints, deviating by ~noise_sigma."""
    n_wp = waypoints.shape[0]
    wp_t = np.linspace(t[0], t[-1], n_wp)
    gain = noise_sigma**2 if noise_sigma > 0 else 1.0
    kernel = SEKernel(gain=gain, lengthscale=0.35 * (t[-1] - t[0]),
                      noise_var=1e-6 * gain)
    dist = grp_distribution(list(zip(wp_t, waypoints)), t, kernel)
    if noise_sigma == 0:
        return dist.mean_path
    return grp_sample(dist, 1, seed=int(rng.integers(2**63)))[0]


def split_dataset(dataset: Dataset, seed: int = 0,
                  train_fraction: float = 0.5) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive train/test split, stratified by mode label.

    A pure function of (dataset, seed): the same inputs always produce the
    same assignment.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError("train_fraction must be in (0, 1)")
    by_mode: dict = {}
    for idx, demo in enumerate(dataset.demos):
        by_mode.setdefault(demo.mode_label, []).append(idx)
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for mode in sorted(by_mode, key=str):
        idxs = np.array(by_mode[mode])
        order = rng.permutation(len(idxs))
        n_train = max(1, int(round(train_fraction * len(idxs))))
        if n_train == len(idxs):
            n_train -= 1
        train_idx.extend(idxs[order[:n_train]])
        test_idx.extend(idxs[order[n_train:]])
    train = Dataset(demos=tuple(dataset.demos[i] for i in sorted(train_idx)),
                    sample_rate_hz=dataset.sample_rate_hz)
    test = Dataset(demos=tuple(dataset.demos[i] for i in sorted(test_idx)),
                   sample_rate_hz=dataset.sample_rate_hz)
    return train, test
