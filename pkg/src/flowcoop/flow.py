"""Motion-flow models: alignment-free similarity, clustering, descriptors.

A flow model is a GP regression from positions to velocities. The similarity
of a trajectory to a flow model averages, over the trajectory's points,

* a temporal term: cosine distance between the observed velocity and the
  model's predicted velocity at that position, and
* a spatial term: the model's predictive variance there, which grows with
  distance from the training data.

Because every point is scored against a field rather than against a matched
point of the other trajectory, no time alignment or warping is needed, and
any prefix of two or more points is a valid query. That is what makes early
recognition work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from sklearn.cluster import KMeans

from .errors import NumericError, ValidationError
from .gp import GPModel, SEKernel, gp_fit
from .trajectories import Trajectory

# Velocities below this norm carry no usable direction; their cosine term is
# fixed at 1 (mid-range) instead of dividing by zero.
ZERO_VELOCITY_NORM = 1e-12

# Cap on pooled training pairs per cluster GP; O(n^3) fit cost beyond this
# buys nothing at demo scale.
MAX_TRAIN_POINTS = 600


@dataclass(frozen=True)
class FlowModel:
    """GP velocity field of one cluster (positions in, velocities out)."""

    gp: GPModel
    cluster_id: int = 0

    def __post_init__(self):
        if self.gp.input_dim != self.gp.output_dim:
            raise ValidationError("flow GP must map positions to same-dim velocities")

    @property
    def dim(self) -> int:
        return self.gp.input_dim


@dataclass(frozen=True)
class FlowModelBank:
    """K per-cluster flow models sharing one kernel."""

    models: tuple[FlowModel, ...]
    kernel: SEKernel

    def __post_init__(self):
        models = tuple(self.models)
        if not models:
            raise ValidationError("bank needs at least one model")
        dims = {m.dim for m in models}
        if len(dims) != 1:
            raise ValidationError("bank models must share dimension")
        object.__setattr__(self, "models", models)

    def __len__(self) -> int:
        return len(self.models)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "models": [
                {"cluster_id": m.cluster_id,
                 "X": m.gp.X.tolist(),
                 "Y": m.gp.Y.tolist()}
                for m in self.models
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "FlowModelBank":
        kernel = SEKernel.from_dict(d["kernel"])
        models = tuple(
            FlowModel(gp=gp_fit(np.asarray(m["X"], dtype=float),
                                np.asarray(m["Y"], dtype=float), kernel),
                      cluster_id=int(m["cluster_id"]))
            for m in d["models"]
        )
        return FlowModelBank(models=models, kernel=kernel)


def fit_flow_model(traj_or_pairs, kernel: SEKernel, cluster_id: int = 0) -> FlowModel:
    """Fit a velocity field on one trajectory or on pooled (x, xdot) pairs."""
    if isinstance(traj_or_pairs, Trajectory):
        X, Y = traj_or_pairs.x, traj_or_pairs.xdot
    else:
        X, Y = traj_or_pairs
    return FlowModel(gp=gp_fit(X, Y, kernel), cluster_id=cluster_id)


def point_terms(xi: Trajectory, model: FlowModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-point (temporal, spatial) terms of the similarity, each (L,)."""
    if xi.dim != model.dim:
        raise ValidationError("trajectory and model dimensions differ")
    means, variances = model.gp.predict_batch(xi.x)
    return cosine_distance(xi.xdot, means), variances


def cosine_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise 1 - cos(angle); 1 when either row is (numerically) zero."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    usable = (na > ZERO_VELOCITY_NORM) & (nb > ZERO_VELOCITY_NORM)
    out = np.ones(a.shape[0])
    denom = np.where(usable, na * nb, 1.0)
    out[usable] = 1.0 - (np.sum(a * b, axis=1) / denom)[usable]
    return out


def flow_similarity(xi: Trajectory, model: FlowModel,
                    spatial_weight: float = 1.0) -> float:
    """Average temporal + spatial mismatch of ``xi`` against the flow field."""
    temporal, spatial = point_terms(xi, model)
    return float(np.mean(temporal + spatial_weight * spatial))


def flow_similarity_terms(xi: Trajectory, model: FlowModel) -> tuple[float, float]:
    """The two averaged terms separately (temporal, spatial)."""
    temporal, spatial = point_terms(xi, model)
    return float(np.mean(temporal)), float(np.mean(spatial))


def prefix_similarities(xi: Trajectory, model: FlowModel,
                        spatial_weight: float = 1.0) -> np.ndarray:
    """Similarity of every prefix xi[:t] for t = 1..L in one pass, (L,).

    Each prefix value is the running mean of the per-point terms, so the
    whole sweep costs a single batch prediction.
    """
    temporal, spatial = point_terms(xi, model)
    terms = temporal + spatial_weight * spatial
    return np.cumsum(terms) / np.arange(1, len(terms) + 1)


def pairwise_similarity(xi_i: Trajectory, xi_j: Trajectory,
                        kernel: SEKernel, spatial_weight: float = 1.0) -> float:
    """Similarity of xi_i against a flow model fitted on xi_j alone.

    Not symmetric in general: evaluation always averages over xi_i's points.
    """
    return flow_similarity(xi_i, fit_flow_model(xi_j, kernel), spatial_weight)


def build_adjacency(trajs: list[Trajectory], kernel: SEKernel,
                    spatial_weight: float = 1.0) -> np.ndarray:
    """Symmetric affinity matrix over trajectories.

    Raw entries are exp(-d(xi_i; xi_j)^2) -- the same squashing the
    descriptor uses -- and the matrix is symmetrized as (A^T + A)/2.
    """
    n = len(trajs)
    if n < 2:
        raise ValidationError("need at least 2 trajectories")
    lengths = [len(t) for t in trajs]
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    all_x = np.vstack([t.x for t in trajs])
    all_v = np.vstack([t.xdot for t in trajs])

    raw = np.empty((n, n))
    for j, xi_j in enumerate(trajs):
        model = fit_flow_model(xi_j, kernel)
        means, variances = model.gp.predict_batch(all_x)
        terms = cosine_distance(all_v, means) + spatial_weight * variances
        for i in range(n):
            seg = terms[offsets[i]:offsets[i + 1]]
            raw[i, j] = np.exp(-float(np.mean(seg)) ** 2)
    return 0.5 * (raw.T + raw)


def spectral_cluster(A: np.ndarray, K: int, seed: int = 0) -> np.ndarray:
    """Normalized spectral clustering: Laplacian, top-K eigenvectors,
    row normalization, then seeded k-means. Deterministic per seed."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, atol=1e-10):
        raise ValidationError("adjacency must be square and symmetric")
    if np.any(A < -1e-12):
        raise ValidationError("adjacency must be nonnegative")
    if not (1 <= K <= n):
        raise ValidationError(f"cluster count {K} outside [1, {n}]")
    if K == 1:
        return np.zeros(n, dtype=int)

    deg = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, 1e-300))
    L = inv_sqrt[:, None] * A * inv_sqrt[None, :]
    try:
        _, vecs = eigh(L, subset_by_index=(n - K, n - 1))
    except np.linalg.LinAlgError as exc:
        raise NumericError("eigendecomposition of the Laplacian failed") from exc
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    rows = vecs / np.maximum(norms, 1e-300)
    km = KMeans(n_clusters=K, random_state=seed, n_init=10)
    return km.fit_predict(rows).astype(int)


def train_bank(trajs: list[Trajectory], K: int, kernel: SEKernel, seed: int = 0,
               spatial_weight: float = 1.0,
               max_train_points: int = MAX_TRAIN_POINTS) -> FlowModelBank:
    """Cluster trajectories and fit one pooled flow GP per cluster."""
    if len(trajs) < K:
        raise ValidationError(f"need at least K={K} trajectories, got {len(trajs)}")
    A = build_adjacency(trajs, kernel, spatial_weight)
    labels = None
    for attempt in range(10):
        cand = spectral_cluster(A, K, seed + attempt)
        if len(np.unique(cand)) == K:
            labels = cand
            break
    if labels is None:
        raise NumericError("k-means produced an empty cluster in 10 reseeds")

    models = []
    for k in range(K):
        members = [trajs[i] for i in np.flatnonzero(labels == k)]
        X = np.vstack([t.x for t in members])
        Y = np.vstack([t.xdot for t in members])
        if X.shape[0] > max_train_points:
            keep = np.unique(np.round(
                np.linspace(0, X.shape[0] - 1, max_train_points)).astype(int))
            X, Y = X[keep], Y[keep]
        models.append(fit_flow_model((X, Y), kernel, cluster_id=k))
    return FlowModelBank(models=tuple(models), kernel=kernel)


def similarities_to_bank(xi: Trajectory, bank: FlowModelBank,
                         spatial_weight: float = 1.0) -> np.ndarray:
    """d_k(xi) for every model in the bank, (K,)."""
    return np.array([flow_similarity(xi, m, spatial_weight) for m in bank.models])


def descriptor_from_distances(d: np.ndarray) -> np.ndarray:
    """Map distances to the simplex: p_k proportional to exp(-d_k^2).

    Shifted by the smallest squared distance before exponentiation, so the
    result is finite and sums to one even when every d_k is huge.
    """
    d2 = np.asarray(d, dtype=float) ** 2
    u = np.exp(-(d2 - d2.min()))
    return u / u.sum()


def describe(xi: Trajectory, bank: FlowModelBank,
             spatial_weight: float = 1.0) -> np.ndarray:
    """Simplex motion descriptor of a trajectory (or any prefix of it)."""
    return descriptor_from_distances(similarities_to_bank(xi, bank, spatial_weight))


def prefix_descriptors(xi: Trajectory, bank: FlowModelBank,
                       spatial_weight: float = 1.0) -> np.ndarray:
    """Descriptor of every prefix xi[:t], t = 1..L, as an (L, K) matrix.

    Row t-1 equals describe(xi.prefix(t), bank); the batch form reuses one
    prediction pass per model instead of refitting per prefix.
    """
    d = np.column_stack([prefix_similarities(xi, m, spatial_weight)
                         for m in bank.models])
    d2 = d**2
    u = np.exp(-(d2 - d2.min(axis=1, keepdims=True)))
    return u / u.sum(axis=1, keepdims=True)


def validate_descriptor(p: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -atol) or np.any(p > 1 + atol) or abs(p.sum() - 1.0) > atol:
        raise ValidationError("descriptor is not on the simplex")
    return p
