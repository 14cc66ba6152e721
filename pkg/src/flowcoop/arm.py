"""Serial-chain arm model: forward kinematics, Jacobian, damped-LS inverse.

The default arm is a 7-revolute-joint chain at tabletop scale. With all
angles at zero it points straight along +x from a shoulder 0.25 m above the
base:

    shoulder (0, 0, 0.25) -- elbow (0.30, 0, 0.25) -- wrist (0.55, 0, 0.25)
    -- hand (0.65, 0, 0.25)

Those four frames (hand, wrist, elbow, shoulder) are the ones monitored for
obstacle clearance. Roll joints are continuous (limits +-2*pi); the pitch
and pan joints carry conventional limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ValidationError

MONITORED_FRAMES = ("hand", "wrist", "elbow", "shoulder")


@dataclass(frozen=True)
class Joint:
    """Revolute joint: fixed translation into its frame, then rotation."""

    offset: np.ndarray          # (3,) translation from the parent frame
    axis: np.ndarray            # (3,) unit rotation axis
    limits: tuple[float, float]

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float).reshape(3)
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise ValidationError("joint axis must be nonzero")
        if self.limits[0] >= self.limits[1]:
            raise ValidationError("joint limits must satisfy min < max")
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "axis", axis / norm)
        object.__setattr__(self, "limits", (float(self.limits[0]), float(self.limits[1])))


@dataclass(frozen=True)
class ArmModel:
    """7-joint chain with a tool point and the 4 monitored frame indices.

    ``key_frames`` maps frame names to chain site indices: site 0 is the
    base, site i+1 the origin of joint i's frame, and site 8 the tool point.
    """

    joints: tuple[Joint, ...]
    tool_offset: np.ndarray
    key_frames: dict = field(default_factory=dict)
    q_home: np.ndarray = None

    def __post_init__(self):
        joints = tuple(self.joints)
        if len(joints) != 7:
            raise ValidationError(f"expected 7 joints, got {len(joints)}")
        tool = np.asarray(self.tool_offset, dtype=float).reshape(3)
        kf = dict(self.key_frames)
        for name in MONITORED_FRAMES:
            if name not in kf:
                raise ValidationError(f"key_frames missing {name!r}")
            if not (0 <= kf[name] <= len(joints) + 1):
                raise ValidationError(f"key frame {name!r} index out of range")
        q_home = (np.zeros(7) if self.q_home is None
                  else np.asarray(self.q_home, dtype=float).reshape(7))
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "tool_offset", tool)
        object.__setattr__(self, "key_frames", kf)
        object.__setattr__(self, "q_home", q_home)

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.limits[0] for j in self.joints])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.limits[1] for j in self.joints])

    def check_limits(self, q: np.ndarray, atol: float = 1e-9) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(self.n_joints)
        if np.any(q < self.lower_limits - atol) or np.any(q > self.upper_limits + atol):
            raise ValidationError(f"joint angles {q} violate limits")
        return q

    def clamp(self, Q: np.ndarray) -> np.ndarray:
        return np.clip(Q, self.lower_limits, self.upper_limits)

    def to_dict(self) -> dict:
        return {
            "joints": [{"offset": j.offset.tolist(), "axis": j.axis.tolist(),
                        "limits": list(j.limits)} for j in self.joints],
            "tool_offset": self.tool_offset.tolist(),
            "key_frames": self.key_frames,
            "q_home": self.q_home.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ArmModel":
        joints = tuple(Joint(offset=np.asarray(j["offset"], dtype=float),
                             axis=np.asarray(j["axis"], dtype=float),
                             limits=tuple(j["limits"])) for j in d["joints"])
        return ArmModel(joints=joints,
                        tool_offset=np.asarray(d["tool_offset"], dtype=float),
                        key_frames={k: int(v) for k, v in d["key_frames"].items()},
                        q_home=np.asarray(d.get("q_home", np.zeros(7)), dtype=float))


def default_arm() -> ArmModel:
    """The documented tabletop 7-DoF chain (link lengths 0.30/0.25/0.10 m)."""
    z, y, x = (0, 0, 1), (0, 1, 0), (1, 0, 0)
    pitch = (-2.2, 2.2)
    pan = (-2.9, 2.9)
    roll = (-2 * np.pi, 2 * np.pi)
    joints = (
        Joint(offset=(0.0, 0.0, 0.25), axis=z, limits=pan),    # shoulder pan
        Joint(offset=(0.0, 0.0, 0.0), axis=y, limits=pitch),   # shoulder lift
        Joint(offset=(0.0, 0.0, 0.0), axis=x, limits=roll),    # upper-arm roll
        Joint(offset=(0.30, 0.0, 0.0), axis=y, limits=pitch),  # elbow flex
        Joint(offset=(0.0, 0.0, 0.0), axis=x, limits=roll),    # forearm roll
        Joint(offset=(0.25, 0.0, 0.0), axis=y, limits=pitch),  # wrist flex
        Joint(offset=(0.0, 0.0, 0.0), axis=x, limits=roll),    # wrist roll
    )
    return ArmModel(joints=joints, tool_offset=(0.10, 0.0, 0.0),
                    key_frames={"hand": 8, "wrist": 6, "elbow": 4, "shoulder": 1},
                    q_home=np.array([0.0, 0.35, 0.0, 0.55, 0.0, 0.3, 0.0]))


def _axis_rotations(axis: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rodrigues rotation matrices about a fixed axis for a batch of angles."""
    c = np.cos(q)
    s = np.sin(q)
    ax, ay, az = axis
    K = np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])
    eye = np.eye(3)
    outer = np.outer(axis, axis)
    return (c[:, None, None] * eye[None]
            + s[:, None, None] * K[None]
            + (1.0 - c)[:, None, None] * outer[None])


def chain_sites(arm: ArmModel, Q: np.ndarray) -> np.ndarray:
    """Positions of all chain sites for a batch of configurations.

    ``Q`` is (n, 7); the result is (n, 9, 3): site 0 the base, site i+1 the
    origin of joint i's frame, site 8 the tool point.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[0]
    R = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    p = np.zeros((n, 3))
    sites = np.empty((n, arm.n_joints + 2, 3))
    sites[:, 0] = p
    for i, joint in enumerate(arm.joints):
        p = p + R @ joint.offset
        sites[:, i + 1] = p
        R = R @ _axis_rotations(joint.axis, Q[:, i])
    sites[:, arm.n_joints + 1] = p + R @ arm.tool_offset
    return sites


def forward_kinematics(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    """Monitored frame positions (hand, wrist, elbow, shoulder), shape (4, 3)."""
    q = arm.check_limits(q)
    return forward_kinematics_batch(arm, q[None, :])[0]


def forward_kinematics_batch(arm: ArmModel, Q: np.ndarray) -> np.ndarray:
    """Monitored frames for a batch of configurations, (n, 4, 3); no limit check."""
    sites = chain_sites(arm, Q)
    idx = [arm.key_frames[name] for name in MONITORED_FRAMES]
    return sites[:, idx]


def hand_position(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    return forward_kinematics_batch(arm, np.asarray(q, dtype=float)[None, :])[0, 0]


def jacobian(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    """Positional Jacobian of the hand point, (3, 7)."""
    q = np.asarray(q, dtype=float).reshape(arm.n_joints)
    R = np.eye(3)
    p = np.zeros(3)
    origins = np.empty((arm.n_joints, 3))
    axes = np.empty((arm.n_joints, 3))
    for i, joint in enumerate(arm.joints):
        p = p + R @ joint.offset
        origins[i] = p
        axes[i] = R @ joint.axis
        R = R @ _axis_rotations(joint.axis, q[i : i + 1])[0]
    hand = p + R @ arm.tool_offset
    return np.cross(axes, hand[None, :] - origins).T


class IkError(NumericError):
    """Iterative IK failed to reach the target; carries the target point."""

    def __init__(self, target: np.ndarray, residual: float):
        super().__init__(f"IK failed: target {np.asarray(target).tolist()} "
                         f"unreached (residual {residual * 1000:.2f} mm)")
        self.target = np.asarray(target, dtype=float)
        self.residual = residual


def ik_solve(arm: ArmModel, target: np.ndarray, q0: np.ndarray | None = None,
             tol: float = 1e-3, max_iter: int = 200,
             damping: float = 0.05) -> np.ndarray:
    """Damped least-squares IK for the hand position.

    Iterates dq = J^T (J J^T + damping^2 I)^-1 err from ``q0`` (home pose by
    default), clamping to joint limits each step; raises :class:`IkError`
    with the offending target when the residual stays above ``tol`` meters.
    """
    target = np.asarray(target, dtype=float).reshape(3)
    q = (arm.q_home if q0 is None else np.asarray(q0, dtype=float)).copy()
    q = arm.clamp(q)
    best_q, best_err = q.copy(), np.inf
    for _ in range(max_iter):
        err = target - hand_position(arm, q)
        nerr = float(np.linalg.norm(err))
        if nerr < best_err:
            best_q, best_err = q.copy(), nerr
        if nerr < tol:
            return q
        J = jacobian(arm, q)
        A = J @ J.T + damping**2 * np.eye(3)
        dq = J.T @ np.linalg.solve(A, err)
        step = float(np.linalg.norm(dq))
        if step > 0.5:
            dq *= 0.5 / step
        q = arm.clamp(q + dq)
    if best_err < tol:
        return best_q
    raise IkError(target, best_err)


def joint_velocity_for(arm: ArmModel, q: np.ndarray, xdot: np.ndarray,
                       damping: float = 0.05) -> np.ndarray:
    """Joint rates realizing a Cartesian hand velocity (damped pseudo-inverse)."""
    xdot = np.asarray(xdot, dtype=float).reshape(3)
    J = jacobian(arm, q)
    A = J @ J.T + damping**2 * np.eye(3)
    return J.T @ np.linalg.solve(A, xdot)
