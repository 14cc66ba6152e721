"""Gaussian process regression and Gaussian random paths.

Two closely related tools live here:

* ``gp_fit`` / ``GPModel.predict`` -- vanilla GP regression with a squared
  exponential kernel, shared across all output dimensions (one Gram solve,
  one scalar predictive variance per query).
* ``grp_distribution`` / ``grp_sample`` -- a distribution over smooth paths
  conditioned on (time, location) anchoring points, the workhorse for
  trajectory smoothing and for sampling candidate plans.

All posteriors use a Cholesky factorization of ``K + noise_var*I`` computed
once at fit time; predictions are matrix-vector products against the cached
factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .errors import NumericError, ValidationError

# Relative jitter added to a path covariance before sampling; GRP covariances
# are near-singular when test times are dense.
SAMPLE_JITTER = 1e-8


@dataclass(frozen=True)
class SEKernel:
    """Squared exponential kernel with signal gain and observation noise.

    ``lengthscale`` may be a scalar (isotropic) or one value per input
    dimension. All parameters must be strictly positive.
    """

    gain: float = 1.0
    lengthscale: float | np.ndarray = 1.0
    noise_var: float = 1e-4

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscale, dtype=float))
        if self.gain <= 0 or self.noise_var <= 0 or np.any(ls <= 0):
            raise ValidationError("kernel parameters must be strictly positive")
        object.__setattr__(self, "lengthscale", ls if ls.size > 1 else float(ls[0]))

    def _scaled(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X / np.asarray(self.lengthscale, dtype=float)

    def __call__(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Dense Gram matrix k(A, B), shape (len(A), len(B))."""
        d2 = cdist(self._scaled(A), self._scaled(B), "sqeuclidean")
        d2 *= -0.5
        np.exp(d2, out=d2)
        d2 *= self.gain
        return d2

    def with_noise(self, noise_var: float) -> "SEKernel":
        return SEKernel(self.gain, self.lengthscale, noise_var)

    @staticmethod
    def for_inputs(X: np.ndarray, gain: float = 1.0, noise_var: float = 1e-4,
                   scale: float = 0.2) -> "SEKernel":
        """Default hyperparameters: lengthscale = ``scale`` x per-dim input range."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rng = X.max(axis=0) - X.min(axis=0)
        ls = scale * np.where(rng > 1e-12, rng, 1.0)
        return SEKernel(gain=gain, lengthscale=ls, noise_var=noise_var)

    @staticmethod
    def isotropic_for(X: np.ndarray, gain: float = 1.0, noise_var: float = 1e-4,
                      scale: float = 0.2) -> "SEKernel":
        """Single lengthscale = ``scale`` x largest per-dim input range.

        Preferred for spatial inputs whose axes share units; per-dim scaling
        would shrink the lengthscale of a nearly flat axis to the noise floor.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        extent = float(np.max(X.max(axis=0) - X.min(axis=0)))
        return SEKernel(gain=gain, lengthscale=scale * (extent if extent > 1e-12 else 1.0),
                        noise_var=noise_var)

    def to_dict(self) -> dict:
        ls = self.lengthscale
        return {
            "gain": self.gain,
            "lengthscale": ls.tolist() if isinstance(ls, np.ndarray) else ls,
            "noise_var": self.noise_var,
        }

    @staticmethod
    def from_dict(d: dict) -> "SEKernel":
        ls = d["lengthscale"]
        return SEKernel(float(d["gain"]), np.asarray(ls, dtype=float) if isinstance(ls, list) else float(ls),
                        float(d["noise_var"]))


@dataclass
class GPModel:
    """Fitted GP: inputs X (n,d), outputs Y (n,m), cached Cholesky of K+noise*I.

    Output dimensions are treated as independent and share the kernel, so one
    factorization serves every column of Y and the predictive variance is a
    single scalar per query.
    """

    kernel: SEKernel
    X: np.ndarray
    Y: np.ndarray
    _cho: tuple = field(repr=False, default=None)
    _alpha: np.ndarray = field(repr=False, default=None)

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    @property
    def output_dim(self) -> int:
        return self.Y.shape[1]

    def predict(self, xq: np.ndarray) -> tuple[np.ndarray, float]:
        """Posterior mean (m,) and scalar variance at a single query point."""
        xq = np.asarray(xq, dtype=float).reshape(1, -1)
        means, variances = self.predict_batch(xq)
        return means[0], float(variances[0])

    def predict_batch(self, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior means (q,m) and variances (q,) for a batch of queries."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        if Xq.shape[1] != self.input_dim:
            raise ValidationError(
                f"query dim {Xq.shape[1]} != model input dim {self.input_dim}")
        Ks = self.kernel(self.X, Xq)            # (n, q)
        means = Ks.T @ self._alpha              # (q, m)
        solved = cho_solve(self._cho, Ks)       # (n, q)
        variances = self.kernel.gain - np.einsum("nq,nq->q", Ks, solved)
        np.clip(variances, 0.0, None, out=variances)
        return means, variances


def gp_fit(X: np.ndarray, Y: np.ndarray, kernel: SEKernel) -> GPModel:
    """Fit a GP by factorizing K(X,X) + noise_var*I once.

    Raises :class:`NumericError` when the Gram matrix is not positive
    definite (duplicated rows with zero noise, or noise far below the
    conditioning floor); increasing ``noise_var`` or adding jitter fixes it.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] != Y.shape[0] or X.shape[0] < 1:
        raise ValidationError("X and Y must have the same, nonzero number of rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValidationError("training data must be finite")
    K = kernel(X, X)
    K[np.diag_indices_from(K)] += kernel.noise_var
    try:
        cho = cho_factor(K, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "Gram factorization failed; increase noise_var or add jitter") from exc
    alpha = cho_solve(cho, Y)
    return GPModel(kernel=kernel, X=X, Y=Y, _cho=cho, _alpha=alpha)


def gp_predict(model: GPModel, xq: np.ndarray) -> tuple[np.ndarray, float]:
    """Posterior mean and scalar variance at ``xq`` (functional spelling)."""
    return model.predict(xq)


@dataclass
class PathDistribution:
    """Gaussian distribution over paths at fixed test times.

    ``mean_path`` is (T,d), ``covariance`` (T,T) shared across output
    dimensions, ``test_times`` the T increasing time indices.
    """

    mean_path: np.ndarray
    covariance: np.ndarray
    test_times: np.ndarray
    _anchor_model: GPModel = field(repr=False, default=None)
    _trend_coef: np.ndarray = field(repr=False, default=None)

    @property
    def length(self) -> int:
        return self.test_times.shape[0]

    @property
    def dim(self) -> int:
        return self.mean_path.shape[1]


def grp_distribution(anchors, test_times: np.ndarray, kernel: SEKernel,
                     detrend: bool = True) -> PathDistribution:
    """Condition a smooth-path prior on (time, location) anchoring points.

    mean = trend + k(t_a, t_test)^T (K_a + noise*I)^-1 r_a
    cov  = K_test - k(t_a, t_test)^T (K_a + noise*I)^-1 k(t_a, t_test)

    where r_a are the anchor residuals about a least-squares linear trend.
    The trend keeps the mean path from sagging toward zero between weakly
    correlated anchors (and makes straight-line anchor sets exact); pass
    ``detrend=False`` for the plain zero-mean conditioning.
    """
    t_a, x_a = _split_anchors(anchors)
    if t_a.shape[0] < 2:
        raise ValidationError("need at least 2 anchoring points")
    if np.min(np.diff(np.sort(t_a))) <= 0:
        raise ValidationError("anchor times must be distinct")
    test_times = np.asarray(test_times, dtype=float).reshape(-1)

    if detrend:
        A = np.column_stack([np.ones_like(t_a), t_a])
        coef, *_ = np.linalg.lstsq(A, x_a, rcond=None)
        resid = x_a - A @ coef
    else:
        coef = np.zeros((2, x_a.shape[1]))
        resid = x_a

    model = gp_fit(t_a[:, None], resid, kernel)
    Ks = kernel(t_a[:, None], test_times[:, None])      # (M, T)
    trend = np.column_stack([np.ones_like(test_times), test_times]) @ coef
    mean = trend + Ks.T @ model._alpha                  # (T, d)
    K_test = kernel(test_times[:, None], test_times[:, None])
    cov = K_test - Ks.T @ cho_solve(model._cho, Ks)
    cov = 0.5 * (cov + cov.T)
    return PathDistribution(mean_path=mean, covariance=cov,
                            test_times=test_times, _anchor_model=model,
                            _trend_coef=coef)


def grp_mean_derivative(dist: PathDistribution) -> np.ndarray:
    """Analytic time derivative of the mean path at the test times, (T,d).

    Uses d/dt k(t, t_a) = -k(t, t_a) (t - t_a) / ls^2 for the SE kernel,
    plus the trend slope.
    """
    model = dist._anchor_model
    if model is None:
        raise ValidationError("distribution lacks its anchor model")
    t_a = model.X[:, 0]
    ls = float(np.asarray(model.kernel.lengthscale).reshape(-1)[0])
    t = dist.test_times
    Ks = model.kernel(t_a[:, None], t[:, None])         # (M, T)
    dKs = Ks * (-(t[None, :] - t_a[:, None]) / ls**2)   # d k(t, t_a) / dt
    deriv = dKs.T @ model._alpha
    if dist._trend_coef is not None:
        deriv = deriv + dist._trend_coef[1][None, :]
    return deriv


def grp_sample(dist: PathDistribution, n_samples: int, seed: int) -> list[np.ndarray]:
    """Draw full-covariance path samples from N(mean_path, covariance).

    Deterministic for a given seed; returns ``n_samples`` arrays of shape
    (T,d). A small relative jitter keeps the factorization of the (often
    near-singular) path covariance well posed.
    """
    if n_samples < 0:
        raise ValidationError("n_samples must be >= 0")
    if n_samples == 0:
        return []
    cov = dist.covariance.copy()
    cov[np.diag_indices_from(cov)] += SAMPLE_JITTER * max(
        float(np.max(np.diag(dist.covariance))), 1.0)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError("path covariance not PSD even after jitter") from exc
    rng = np.random.default_rng(seed)
    T, d = dist.mean_path.shape
    z = rng.standard_normal((n_samples, T, d))
    return [dist.mean_path + L @ z[i] for i in range(n_samples)]


def apply_runup(anchors, final_pos: np.ndarray, final_vel: np.ndarray,
                epsilon: float = 0.01):
    """Append a heading anchor just before the terminal one.

    Extends ``anchors`` with ``(1-epsilon, final_pos - epsilon*final_vel)``
    and ``(1, final_pos)`` so the conditioned mean path arrives at
    ``final_pos`` moving along ``final_vel``.
    """
    if not (0.0 < epsilon < 0.5):
        raise ValidationError("epsilon must lie in (0, 0.5)")
    final_pos = np.asarray(final_pos, dtype=float)
    final_vel = np.asarray(final_vel, dtype=float)
    out = [(float(t), np.asarray(x, dtype=float)) for t, x in anchors]
    out.append((1.0 - epsilon, final_pos - epsilon * final_vel))
    out.append((1.0, final_pos))
    return out


def _split_anchors(anchors) -> tuple[np.ndarray, np.ndarray]:
    times = np.array([float(t) for t, _ in anchors], dtype=float)
    locs = np.atleast_2d(np.array([np.asarray(x, dtype=float) for _, x in anchors]))
    return times, locs
