"""Density-matching reward learning over (descriptor, robot position) features.

The demonstrated cooperation is summarized as a cloud of feature points: the
descriptor of the human prefix at each time step paired with the partner's
end-effector position at that step. A kernel density estimate of that cloud
is matched by a kernel reward expansion

    R(x) = sum_i alpha_i k(x, u_i)

whose weights maximize  sum_{u in U} density(u) R(u) - (lam/2) ||R||_H^2.
By stationarity the maximizer is alpha = density(U) / lam, which the tests
cross-check against a numeric optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .errors import ValidationError
from .flow import FlowModelBank, prefix_descriptors
from .gp import SEKernel
from .trajectories import InteractionDemo

DEFAULT_N_INDUCING = 200


@dataclass(frozen=True)
class FeaturePoint:
    """One (descriptor, robot position) pair; concatenation is the feature x."""

    phi: np.ndarray
    xr: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).reshape(-1)
        xr = np.asarray(self.xr, dtype=float).reshape(-1)
        if np.any(phi < -1e-9) or abs(phi.sum() - 1.0) > 1e-6:
            raise ValidationError("descriptor component must lie on the simplex")
        if not np.all(np.isfinite(xr)):
            raise ValidationError("position component must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "xr", xr)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.phi, self.xr])


def stack_features(features: list[FeaturePoint]) -> np.ndarray:
    if not features:
        raise ValidationError("empty feature list")
    return np.vstack([f.vector for f in features])


def extract_features(demos: list[InteractionDemo], bank: FlowModelBank,
                     spatial_weight: float = 1.0) -> list[FeaturePoint]:
    """Descriptor-of-prefix / robot-position pairs from every demo time step.

    For a demo of length L this emits L-1 points (prefixes start at length 2,
    a lone point having no velocity), i.e. roughly demos x length in total.
    """
    out: list[FeaturePoint] = []
    for demo in demos:
        P = prefix_descriptors(demo.human, bank, spatial_weight)
        for t in range(1, len(demo.human)):
            out.append(FeaturePoint(phi=P[t], xr=demo.robot.x[t]))
    return out


class KernelDensity:
    """Gaussian product-kernel density with per-dimension bandwidths."""

    def __init__(self, data: np.ndarray, bandwidth: np.ndarray):
        data = np.atleast_2d(np.asarray(data, dtype=float))
        bandwidth = np.asarray(bandwidth, dtype=float).reshape(-1)
        if bandwidth.shape[0] != data.shape[1]:
            raise ValidationError("one bandwidth per dimension required")
        if np.any(bandwidth <= 0):
            raise ValidationError("bandwidths must be positive")
        self.data = data
        self.bandwidth = bandwidth
        self._log_norm = -0.5 * data.shape[1] * np.log(2 * np.pi) \
            - np.sum(np.log(bandwidth))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Density at one point (scalar) or a batch (q,)."""
        single = np.ndim(x) == 1
        X = np.atleast_2d(np.asarray(x, dtype=float))
        z = (X[:, None, :] - self.data[None, :, :]) / self.bandwidth
        logk = self._log_norm - 0.5 * np.sum(z**2, axis=2)
        vals = np.exp(logk).mean(axis=1)
        return float(vals[0]) if single else vals


def scott_bandwidth(X: np.ndarray) -> np.ndarray:
    """Scott's-rule per-dimension bandwidths with a small floor."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    sd = X.std(axis=0, ddof=1) if n > 1 else np.ones(d)
    return np.maximum(sd, 1e-3) * n ** (-1.0 / (d + 4))


def estimate_density(features: list[FeaturePoint],
                     bandwidth: SEKernel | np.ndarray | None = None) -> KernelDensity:
    """KDE over the stacked features; bandwidth defaults to Scott's rule.

    An :class:`SEKernel` bandwidth contributes its per-dimension lengthscales.
    """
    X = stack_features(features)
    if bandwidth is None:
        bw = scott_bandwidth(X)
    elif isinstance(bandwidth, SEKernel):
        bw = np.broadcast_to(np.atleast_1d(bandwidth.lengthscale),
                             (X.shape[1],)).astype(float)
    else:
        bw = np.broadcast_to(np.asarray(bandwidth, dtype=float), (X.shape[1],))
    return KernelDensity(X, bw)


@dataclass(frozen=True)
class RewardModel:
    """Kernel reward expansion over inducing feature points."""

    inducing: np.ndarray        # (N_U, K+D)
    alpha: np.ndarray           # (N_U,)
    kernel: SEKernel
    lam: float
    phi_dim: int

    def __post_init__(self):
        inducing = np.atleast_2d(np.asarray(self.inducing, dtype=float))
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if inducing.shape[0] < 1 or alpha.shape[0] != inducing.shape[0]:
            raise ValidationError("need one weight per inducing point")
        if not np.all(np.isfinite(alpha)):
            raise ValidationError("weights must be finite")
        if self.lam <= 0:
            raise ValidationError("lam must be positive")
        object.__setattr__(self, "inducing", inducing)
        object.__setattr__(self, "alpha", alpha)

    def to_dict(self) -> dict:
        return {"inducing": self.inducing.tolist(),
                "alpha": self.alpha.tolist(),
                "kernel": self.kernel.to_dict(),
                "lam": self.lam,
                "phi_dim": self.phi_dim}

    @staticmethod
    def from_dict(d: dict) -> "RewardModel":
        return RewardModel(inducing=np.asarray(d["inducing"], dtype=float),
                           alpha=np.asarray(d["alpha"], dtype=float),
                           kernel=SEKernel.from_dict(d["kernel"]),
                           lam=float(d["lam"]),
                           phi_dim=int(d["phi_dim"]))


def default_reward_kernel(features: list[FeaturePoint],
                          gain: float = 1.0) -> SEKernel:
    """Separate per-dimension lengthscales for the descriptor and position
    blocks; simplex coordinates and meters are not commensurate."""
    X = stack_features(features)
    rng = X.max(axis=0) - X.min(axis=0)
    ls = 0.3 * np.where(rng > 1e-6, rng, 1.0)
    return SEKernel(gain=gain, lengthscale=ls, noise_var=1e-6)


def select_inducing(X: np.ndarray, n_inducing: int, seed: int = 0) -> np.ndarray:
    """k-means centers covering the feature cloud."""
    n_inducing = min(n_inducing, X.shape[0])
    if n_inducing == X.shape[0]:
        return X.copy()
    km = KMeans(n_clusters=n_inducing, random_state=seed, n_init=4)
    km.fit(X)
    return km.cluster_centers_


def fit_reward(features: list[FeaturePoint], n_inducing: int, lam: float,
               kernel: SEKernel | None = None, seed: int = 0,
               density: KernelDensity | None = None) -> RewardModel:
    """Fit the kernel reward: inducing points by k-means, weights density/lam."""
    if lam <= 0:
        raise ValidationError("lam must be positive")
    X = stack_features(features)
    if n_inducing > X.shape[0]:
        raise ValidationError("n_inducing exceeds feature count")
    if kernel is None:
        kernel = default_reward_kernel(features)
    U = select_inducing(X, n_inducing, seed)
    mu = (density or estimate_density(features))(U)
    return RewardModel(inducing=U, alpha=mu / lam, kernel=kernel, lam=lam,
                       phi_dim=features[0].phi.shape[0])


def fit_reward_auto(features: list[FeaturePoint], n_inducing: int = DEFAULT_N_INDUCING,
                    kernel: SEKernel | None = None, seed: int = 0,
                    reward_scale: float = 1.0) -> RewardModel:
    """Like :func:`fit_reward` with the smoothness chosen from the data.

    lam is set to the peak density over the inducing set divided by
    ``reward_scale``, so the fitted weights land in [0, reward_scale] and
    reward differences between candidate paths stay O(1) regardless of the
    feature-space volume.
    """
    density = estimate_density(features)
    X = stack_features(features)
    U = select_inducing(X, min(n_inducing, X.shape[0]), seed)
    lam = float(np.max(density(U))) / reward_scale
    return fit_reward(features, min(n_inducing, X.shape[0]), lam, kernel, seed,
                      density=density)


def reward_of(model: RewardModel, phi: np.ndarray, xr: np.ndarray) -> float:
    """Reward at one (descriptor, position) pair."""
    x = np.concatenate([np.asarray(phi, dtype=float).reshape(-1),
                        np.asarray(xr, dtype=float).reshape(-1)])
    if x.shape[0] != model.inducing.shape[1]:
        raise ValidationError("feature dimension mismatch")
    return float(model.kernel(model.inducing, x[None, :])[:, 0] @ model.alpha)


def reward_along_path(model: RewardModel, phi: np.ndarray,
                      positions: np.ndarray) -> np.ndarray:
    """Reward at every path position under one fixed descriptor, (L,)."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    phi = np.asarray(phi, dtype=float).reshape(-1)
    X = np.hstack([np.broadcast_to(phi, (positions.shape[0], phi.shape[0])),
                   positions])
    if X.shape[1] != model.inducing.shape[1]:
        raise ValidationError("feature dimension mismatch")
    return model.kernel(X, model.inducing) @ model.alpha


def trajectory_reward(model: RewardModel, phi: np.ndarray,
                      xi_r: np.ndarray) -> float:
    """Mean reward over the positions of a candidate end-effector path."""
    vals = reward_along_path(model, phi, xi_r)
    if vals.shape[0] == 0:
        raise ValidationError("empty path")
    return float(np.mean(vals))
