"""Trajectory domain types, dataset serialization and preprocessing.

A :class:`Trajectory` couples time-stamped positions with velocities of the
same length. Velocities are derived data: serialization drops them, loading
recomputes them with the central-difference rule, and ``preprocess`` replaces
raw capture with a smooth resampled path whose velocities come from the
analytic derivative of a conditioned path mean.

Canonical dataset file format is JSON:

    {"sample_rate_hz": 10.0,
     "demos": [{"mode": "right_swipe",
                "human": {"t": [...], "x": [[x, y, z], ...]},
                "robot": {"t": [...], "x": [[...], ...]}}]}

CSV import reads one trajectory per file with columns ``t,x0,x1,...``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError
from .gp import SEKernel, grp_distribution, grp_mean_derivative

DEFAULT_RESAMPLE_LEN = 50


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped positions with velocities, all of dimension ``dim``."""

    t: np.ndarray      # (L,) seconds, strictly increasing
    x: np.ndarray      # (L, D) positions
    xdot: np.ndarray   # (L, D) velocities, position units per second

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        xdot = np.atleast_2d(np.asarray(self.xdot, dtype=float))
        if x.shape[0] != t.shape[0] or xdot.shape != x.shape:
            raise ValidationError("positions, velocities and timestamps must share length")
        if t.shape[0] < 2:
            raise ValidationError("a trajectory needs at least 2 points")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("timestamps must be strictly increasing")
        for name, arr in (("t", t), ("x", x), ("xdot", xdot)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"non-finite entries in {name}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xdot", xdot)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.t.shape[0]

    @staticmethod
    def from_points(t: np.ndarray, x: np.ndarray) -> "Trajectory":
        """Build a trajectory from raw points, velocities by central differences."""
        t = np.asarray(t, dtype=float).reshape(-1)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return Trajectory(t=t, x=x, xdot=central_differences(t, x))

    def prefix(self, n: int) -> "Trajectory":
        """First ``n`` points (n >= 2), keeping the already-computed velocities."""
        if n < 2 or n > len(self):
            raise ValidationError(f"prefix length {n} outside [2, {len(self)}]")
        return Trajectory(t=self.t[:n], x=self.x[:n], xdot=self.xdot[:n])

    def translated(self, offset: np.ndarray) -> "Trajectory":
        return Trajectory(t=self.t, x=self.x + np.asarray(offset, dtype=float),
                          xdot=self.xdot)


@dataclass(frozen=True)
class InteractionDemo:
    """One paired demonstration: the human's hand path and the partner's response."""

    human: Trajectory
    robot: Trajectory
    mode_label: str | None = None

    def __post_init__(self):
        if self.human.dim != self.robot.dim:
            raise ValidationError("human and robot trajectories must share dimension")


@dataclass(frozen=True)
class Dataset:
    demos: tuple[InteractionDemo, ...]
    sample_rate_hz: float = 10.0

    def __post_init__(self):
        demos = tuple(self.demos)
        if not demos:
            raise ValidationError("dataset must contain at least one demo")
        if self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz must be positive")
        dims = {d.human.dim for d in demos}
        if len(dims) != 1:
            raise ValidationError(f"inconsistent dimensions across demos: {sorted(dims)}")
        object.__setattr__(self, "demos", demos)

    @property
    def dim(self) -> int:
        return self.demos[0].human.dim

    def __len__(self) -> int:
        return len(self.demos)


def central_differences(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Velocity estimate: central differences inside, one-sided at the ends."""
    t = np.asarray(t, dtype=float).reshape(-1)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if t.shape[0] < 2:
        raise ValidationError("need at least 2 points to differentiate")
    if np.any(np.diff(t) <= 0):
        raise ValidationError("timestamps must be strictly increasing")
    v = np.empty_like(x)
    v[1:-1] = (x[2:] - x[:-2]) / (t[2:] - t[:-2])[:, None]
    v[0] = (x[1] - x[0]) / (t[1] - t[0])
    v[-1] = (x[-1] - x[-2]) / (t[-1] - t[-2])
    return v


def preprocess(raw, smooth_hyper: SEKernel | None = None,
               out_len: int = DEFAULT_RESAMPLE_LEN) -> Trajectory:
    """Smooth raw capture and resample to ``out_len`` uniform time indices.

    A linear trend is removed first, a smooth path posterior is conditioned on
    the residuals with the raw points as anchors, and the returned velocities
    are the analytic derivative of trend + posterior mean. Degenerate input
    (all points identical) yields a constant trajectory with zero velocities
    and a warning rather than an error.
    """
    t, x = _as_raw_arrays(raw)
    if t.shape[0] < 2:
        raise ValidationError("preprocess needs at least 2 raw points")
    if np.any(np.diff(t) <= 0):
        raise ValidationError("raw timestamps must be strictly increasing")
    if out_len < 2:
        raise ValidationError("out_len must be >= 2")

    t_out = np.linspace(t[0], t[-1], out_len)
    if float(np.max(np.ptp(x, axis=0))) < 1e-12:
        warnings.warn("degenerate input: all points identical, zero velocities")
        const = np.repeat(x[:1], out_len, axis=0)
        return Trajectory(t=t_out, x=const, xdot=np.zeros_like(const))

    if smooth_hyper is None:
        span = float(t[-1] - t[0])
        smooth_hyper = SEKernel(gain=1.0, lengthscale=0.2 * span, noise_var=1e-4)
    # grp_distribution detrends internally, which keeps this step
    # translation-equivariant and exact on straight lines.
    dist = grp_distribution(list(zip(t, x)), t_out, smooth_hyper)
    return Trajectory(t=t_out, x=dist.mean_path, xdot=grp_mean_derivative(dist))


# ---------------------------------------------------------------------------
# serialization


def save_dataset(dataset: Dataset, path) -> None:
    """Write the canonical JSON file; velocities are never serialized."""
    payload = {
        "sample_rate_hz": dataset.sample_rate_hz,
        "demos": [
            {
                "mode": d.mode_label,
                "human": {"t": d.human.t.tolist(), "x": d.human.x.tolist()},
                "robot": {"t": d.robot.t.tolist(), "x": d.robot.x.tolist()},
            }
            for d in dataset.demos
        ],
    }
    Path(path).write_text(json.dumps(payload))


def load_dataset(path, format: str = "json") -> Dataset:
    """Load a dataset; velocities are recomputed by the central-difference rule."""
    if format == "json":
        return _load_json(Path(path))
    if format == "csv":
        return _load_csv_dir(Path(path))
    raise ValidationError(f"unknown format {format!r}, expected 'json' or 'csv'")


def _load_json(path: Path) -> Dataset:
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or "demos" not in payload:
        raise SchemaError(f"{path}: top-level object with a 'demos' list expected")
    demos = []
    for i, rec in enumerate(payload["demos"]):
        try:
            human = Trajectory.from_points(rec["human"]["t"], rec["human"]["x"])
            robot = Trajectory.from_points(rec["robot"]["t"], rec["robot"]["x"])
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{path}: demo #{i} malformed ({exc})") from exc
        except ValidationError as exc:
            raise ValidationError(f"{path}: demo #{i}: {exc}") from exc
        demos.append(InteractionDemo(human=human, robot=robot,
                                     mode_label=rec.get("mode")))
    if not demos:
        raise ValidationError(f"{path}: empty demo list")
    return Dataset(demos=tuple(demos),
                   sample_rate_hz=float(payload.get("sample_rate_hz", 10.0)))


def load_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read one raw trajectory from a ``t,x0,x1,...`` CSV file."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        if _is_numeric_row(header):
            rows.append([float(v) for v in header])
        for row in reader:
            if row:
                rows.append([float(v) for v in row])
    if len(rows) < 2:
        raise SchemaError(f"{path}: need at least 2 rows")
    arr = np.asarray(rows, dtype=float)
    return arr[:, 0], arr[:, 1:]


def _load_csv_dir(path: Path) -> Dataset:
    """Pair ``<stem>_human.csv`` / ``<stem>_robot.csv`` files into demos.

    A stem of the form ``<mode>__<anything>`` contributes its mode label.
    """
    if not path.is_dir():
        raise ValidationError(f"{path}: csv format expects a directory")
    humans = {p.name[: -len("_human.csv")]: p for p in sorted(path.glob("*_human.csv"))}
    demos = []
    for stem, hp in humans.items():
        rp = path / f"{stem}_robot.csv"
        if not rp.exists():
            raise SchemaError(f"{rp}: missing robot file for {hp.name}")
        th, xh = load_trajectory_csv(hp)
        tr, xr = load_trajectory_csv(rp)
        mode = stem.split("__")[0] if "__" in stem else None
        demos.append(InteractionDemo(human=Trajectory.from_points(th, xh),
                                     robot=Trajectory.from_points(tr, xr),
                                     mode_label=mode))
    if not demos:
        raise ValidationError(f"{path}: no *_human.csv files found")
    dt = np.median(np.diff(demos[0].human.t))
    return Dataset(demos=tuple(demos), sample_rate_hz=float(1.0 / dt))


def _is_numeric_row(row) -> bool:
    try:
        [float(v) for v in row]
        return True
    except ValueError:
        return False


def _as_raw_arrays(raw) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(raw, Trajectory):
        return raw.t, raw.x
    if isinstance(raw, tuple) and len(raw) == 2 and np.ndim(raw[0]) == 1:
        return (np.asarray(raw[0], dtype=float),
                np.atleast_2d(np.asarray(raw[1], dtype=float)))
    pairs = list(raw)
    t = np.array([float(p[0]) for p in pairs])
    x = np.atleast_2d(np.array([np.asarray(p[1], dtype=float).reshape(-1) for p in pairs]))
    return t, x
