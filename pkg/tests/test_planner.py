"""Planner tests: barrier scalars, final-pose estimation, plan invariants.

The barrier reference values are frozen from a direct evaluation of the
cost expression (see the oracle helper); the planning tests run on a small
trained pipeline over the synthetic dataset.
"""

import math

import numpy as np
import pytest

from flowcoop.arm import hand_position, ik_solve
from flowcoop.datagen import default_modes, generate, split_dataset
from flowcoop.errors import ValidationError
from flowcoop.gp import SEKernel
from flowcoop.pipeline import TrainConfig, preprocess_dataset, train_pipeline
from flowcoop.planner import (BARRIER_ALPHA_MM, BARRIER_BETA, BARRIER_CAP,
                              BARRIER_EPS, BARRIER_GAMMA, Obstacle,
                              barrier_cost, barrier_cost_from_dmin,
                              estimate_final_pose, min_clearance_mm,
                              softmax_weights)
from flowcoop.trajectories import Trajectory


def barrier_oracle(d_min_mm: float) -> float:
    """Direct scalar evaluation of the log-barrier expression."""
    return -math.log(BARRIER_GAMMA * (d_min_mm - BARRIER_ALPHA_MM) + BARRIER_EPS) \
        + BARRIER_BETA


@pytest.fixture(scope="module")
def trained():
    ds = generate(default_modes(n_demos=8), seed=3)
    train, test = split_dataset(ds, seed=0)
    models = train_pipeline(train, TrainConfig(n_clusters=4, seed=0))
    test_demos = preprocess_dataset(test, models.out_len)
    return models, models.planner(), test_demos


class TestBarrier:
    def test_reference_scalars(self):
        # oracle: C(100) = -log(1e-6) - 12.8, C(180) = -log(5.73e-9*80 + 1e-6) - 12.8
        assert barrier_oracle(100.0) == pytest.approx(1.0155106, abs=1e-6)
        assert barrier_oracle(180.0) == pytest.approx(0.6381706, abs=1e-6)
        assert barrier_cost_from_dmin(100.0) == pytest.approx(barrier_oracle(100.0),
                                                              abs=1e-12)
        assert barrier_cost_from_dmin(180.0) == pytest.approx(barrier_oracle(180.0),
                                                              abs=1e-12)

    def test_monotone_decreasing(self):
        d = np.linspace(-74.0, 5000.0, 400)
        c = np.array([barrier_cost_from_dmin(x) for x in d])
        assert np.all(np.diff(c) < 0)

    def test_saturation_cap(self):
        deep = BARRIER_ALPHA_MM - BARRIER_EPS / BARRIER_GAMMA  # argument hits zero
        assert barrier_cost_from_dmin(deep - 1.0) == BARRIER_CAP
        assert barrier_cost_from_dmin(deep + 1.0) < BARRIER_CAP

    def test_min_clearance_over_frames_and_obstacles(self):
        path = np.zeros((5, 4, 3))
        path[:, 0, 0] = np.linspace(0.0, 1.0, 5)  # hand moves along x
        obstacles = [Obstacle(center=[0.5, 0.0, 0.0], radius_m=0.1),
                     Obstacle(center=[5.0, 0.0, 0.0], radius_m=0.1)]
        d = min_clearance_mm(path, obstacles)
        assert d == pytest.approx(-100.0)  # hand touches the first obstacle center

    def test_barrier_cost_uses_clearance(self):
        path = np.zeros((3, 4, 3))
        path += np.array([1.0, 0.0, 0.0])
        obs = [Obstacle(center=[1.0, 0.3, 0.0], radius_m=0.1)]
        # clearance = 300mm - 100mm = 200mm
        assert barrier_cost(path, obs) == pytest.approx(barrier_oracle(200.0),
                                                        abs=1e-12)


class TestSoftmaxWeights:
    def test_probability_vector(self):
        rng = np.random.default_rng(0)
        w = softmax_weights(rng.normal(size=50))
        assert w.min() >= 0
        assert w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_exact_shift_invariance(self):
        rng = np.random.default_rng(1)
        # quantized scores make the shifted additions exact in binary64
        s = np.round(rng.uniform(0, 4, size=200) * 2**30) / 2**30
        for c in (1.0, -3.5, 256.0):
            assert np.array_equal(((s + c) - c), s)  # exactness precondition
            assert np.array_equal(softmax_weights(s), softmax_weights(s + c))

    def test_single_score(self):
        assert np.array_equal(softmax_weights(np.array([12.3])), [1.0])

    def test_huge_scores_no_overflow(self):
        w = softmax_weights(np.array([1e6, 1e6 + 1, 1e6 - 1]))
        assert np.all(np.isfinite(w))


class TestFinalPose:
    def test_single_demo_exact(self, trained):
        models, _, test_demos = trained
        demo = models.demos[0]
        kernel = models.bank.kernel
        pos, vel = estimate_final_pose([demo], demo.human, kernel)
        assert np.array_equal(pos, demo.robot.x[-1])
        assert np.array_equal(vel, demo.robot.xdot[-1])

    def test_matching_demo_dominates(self):
        # one demo matches the observation, the others sit far away: the
        # matching demo's ending carries essentially all the weight (the
        # gain-2 kernel drives the far-demo likelihood down to exp(-9))
        from flowcoop.trajectories import InteractionDemo
        kernel = SEKernel(gain=2.0, lengthscale=0.1, noise_var=1e-6)
        t = np.arange(20) * 0.1

        def line(start, direction):
            x = np.asarray(start) + t[:, None] * np.asarray(direction)
            return Trajectory.from_points(t, x)

        near = InteractionDemo(human=line([0, 0, 0], [0.2, 0, 0]),
                               robot=line([0, 0.1, 0], [0.1, 0.1, 0]))
        far_demos = [InteractionDemo(human=line([0, 3 + i, 0], [0, 0, 0.2]),
                                     robot=line([1, 1, 1], [0.1, 0, 0]))
                     for i in range(3)]
        pos, _ = estimate_final_pose([near] + far_demos, near.human, kernel)
        assert np.linalg.norm(pos - near.robot.x[-1]) < 1e-3

    def test_convex_combination(self, trained):
        models, _, test_demos = trained
        kernel = models.bank.kernel
        finals = np.array([d.robot.x[-1] for d in models.demos])
        pos, _ = estimate_final_pose(models.demos, test_demos[0].human, kernel)
        lo = finals.min(axis=0) - 1e-12
        hi = finals.max(axis=0) + 1e-12
        assert np.all(pos >= lo) and np.all(pos <= hi)

    def test_empty_demos_rejected(self, trained):
        _, _, test_demos = trained
        with pytest.raises(ValidationError):
            estimate_final_pose([], test_demos[0].human, SEKernel(1, 1, 1e-4))


class TestPlan:
    def test_deterministic(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        a = planner.plan(demo.human, q_now, seed=11)
        b = planner.plan(demo.human, q_now, seed=11)
        assert np.array_equal(a.ee_path, b.ee_path)
        assert np.array_equal(a.joint_path, b.joint_path)
        assert np.array_equal(a.weights, b.weights)

    def test_single_sample_is_the_plan(self, trained):
        from flowcoop.arm import forward_kinematics_batch
        models, planner, test_demos = trained
        demo = test_demos[1]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, n_samples=1, seed=4)
        assert np.array_equal(res.weights, [1.0])
        fk = forward_kinematics_batch(models.arm, res.joint_path)
        assert np.array_equal(res.ee_path, fk[:, 0, :])

    def test_starts_at_current_pose(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[2]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, seed=0)
        assert np.linalg.norm(res.ee_path[0]
                              - hand_position(models.arm, q_now)) < 1e-6
        # the combined start is q_now scaled by sum(weights) = 1 - O(ulp)
        assert np.allclose(res.joint_path[0], q_now, atol=1e-12)

    def test_terminal_point_approaches_goal(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, n_samples=2000, seed=8)
        # the weighted terminal point concentrates near the goal; allow a
        # 3-sigma band of the per-sample terminal scatter
        assert np.linalg.norm(res.ee_path[-1] - res.goal_pos) < 0.01

    def test_weights_probability_vector(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[3]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, seed=2)
        assert res.weights.min() >= 0.0
        assert abs(res.weights.sum() - 1.0) < 1e-12

    def test_joint_path_within_limits(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, seed=3)
        assert np.all(res.joint_path >= models.arm.lower_limits - 1e-12)
        assert np.all(res.joint_path <= models.arm.upper_limits + 1e-12)

    def test_obstacle_on_target_midpoint_cleared(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        obs = [Obstacle(center=demo.robot.x[25], radius_m=0.05)]
        res = planner.plan(demo.human, q_now, seed=6, obstacles=obs)
        assert res.clearance_mm is not None
        assert res.clearance_mm > BARRIER_ALPHA_MM

    def test_barrier_improves_dead_center_clearance(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[1]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        base = planner.plan(demo.human, q_now, seed=7)
        obs = [Obstacle(center=base.ee_path[len(base.ee_path) // 2],
                        radius_m=0.05)]
        base_clearance = min_clearance_mm(base.frame_paths, obs)
        res = planner.plan(demo.human, q_now, seed=7, obstacles=obs)
        assert res.clearance_mm > base_clearance
        assert np.all(res.barriers is not None)

    def test_n_samples_validation(self, trained):
        models, planner, test_demos = trained
        with pytest.raises(ValidationError):
            planner.plan(test_demos[0].human, models.arm.q_home, n_samples=0)

    def test_result_export(self, trained):
        models, planner, test_demos = trained
        demo = test_demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        res = planner.plan(demo.human, q_now, seed=1)
        d = res.to_dict()
        assert len(d["ee_path"]) == len(d["joint_path"])
        assert len(d["weights"]) == len(d["rewards"])
        assert d["clearance_mm"] is None


class TestObstacleType:
    def test_negative_radius_rejected(self):
        with pytest.raises(ValidationError):
            Obstacle(center=[0, 0, 0], radius_m=-0.1)

    def test_dict_round_trip(self):
        o = Obstacle(center=[0.1, 0.2, 0.3], radius_m=0.05)
        o2 = Obstacle.from_dict(o.to_dict())
        assert np.array_equal(o.center, o2.center)
        assert o.radius_m == o2.radius_m
