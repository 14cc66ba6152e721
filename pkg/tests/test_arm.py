"""Forward kinematics, Jacobian and damped-LS IK tests."""

import numpy as np
import pytest

from flowcoop.arm import (ArmModel, IkError, default_arm, forward_kinematics,
                          forward_kinematics_batch, hand_position, ik_solve,
                          jacobian, joint_velocity_for)
from flowcoop.errors import ValidationError

ARM = default_arm()
HOME_POSITIONS = {
    "hand": [0.65, 0.0, 0.25],
    "wrist": [0.55, 0.0, 0.25],
    "elbow": [0.30, 0.0, 0.25],
    "shoulder": [0.0, 0.0, 0.25],
}


class TestForwardKinematics:
    def test_zero_pose_home_positions(self):
        frames = forward_kinematics(ARM, np.zeros(7))
        for i, name in enumerate(("hand", "wrist", "elbow", "shoulder")):
            assert np.allclose(frames[i], HOME_POSITIONS[name], atol=1e-12)

    def test_last_wrist_joint_leaves_upstream_frames(self):
        q = np.zeros(7)
        q_rot = q.copy()
        q_rot[6] = 1.1
        frames_a = forward_kinematics(ARM, q)
        frames_b = forward_kinematics(ARM, q_rot)
        assert np.allclose(frames_a[2], frames_b[2], atol=1e-12)  # elbow
        assert np.allclose(frames_a[3], frames_b[3], atol=1e-12)  # shoulder

    def test_continuous_joint_periodicity(self):
        rng = np.random.default_rng(0)
        q = rng.uniform(-0.5, 0.5, size=7)
        q2 = q.copy()
        q2[2] += 2 * np.pi  # roll joint, limits span +-2*pi
        assert np.max(np.abs(forward_kinematics(ARM, q)
                             - forward_kinematics(ARM, q2))) < 1e-9

    def test_out_of_limit_rejected(self):
        q = np.zeros(7)
        q[1] = 3.0  # pitch limit is 2.2
        with pytest.raises(ValidationError):
            forward_kinematics(ARM, q)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(1)
        Q = rng.uniform(-0.8, 0.8, size=(20, 7))
        batch = forward_kinematics_batch(ARM, Q)
        for i in range(20):
            assert np.allclose(batch[i], forward_kinematics(ARM, Q[i]), atol=1e-12)


class TestJacobian:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            q = rng.uniform(-0.9, 0.9, size=7)
            J = jacobian(ARM, q)
            eps = 1e-7
            for j in range(7):
                dq = np.zeros(7)
                dq[j] = eps
                fd = (hand_position(ARM, q + dq) - hand_position(ARM, q - dq)) / (2 * eps)
                assert np.allclose(J[:, j], fd, atol=1e-6)


class TestIK:
    def test_reaches_workspace_targets(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            target = rng.uniform([0.2, -0.25, 0.05], [0.5, 0.25, 0.4])
            q = ik_solve(ARM, target, q0=ARM.q_home)
            assert np.linalg.norm(hand_position(ARM, q) - target) < 1e-3
            ARM.check_limits(q)

    def test_unreachable_target_raises_with_target(self):
        target = np.array([2.0, 0.0, 0.0])  # beyond the 0.65 m reach
        with pytest.raises(IkError) as err:
            ik_solve(ARM, target, q0=ARM.q_home, max_iter=60)
        assert np.allclose(err.value.target, target)

    def test_joint_velocity_tracks_cartesian(self):
        rng = np.random.default_rng(4)
        q = ik_solve(ARM, np.array([0.4, 0.1, 0.2]), q0=ARM.q_home)
        xdot = rng.normal(size=3) * 0.2
        qdot = joint_velocity_for(ARM, q, xdot)
        assert np.allclose(jacobian(ARM, q) @ qdot, xdot, atol=0.02)


class TestArmModel:
    def test_requires_seven_joints(self):
        with pytest.raises(ValidationError):
            ArmModel(joints=ARM.joints[:5], tool_offset=ARM.tool_offset,
                     key_frames=ARM.key_frames)

    def test_dict_round_trip(self):
        arm2 = ArmModel.from_dict(ARM.to_dict())
        q = np.array([0.2, -0.3, 0.5, 0.7, -0.2, 0.4, 1.0])
        assert np.allclose(forward_kinematics(ARM, q),
                           forward_kinematics(arm2, q), atol=1e-15)

    def test_clamp(self):
        q = np.full(7, 10.0)
        clamped = ARM.clamp(q)
        assert np.all(clamped <= ARM.upper_limits)
