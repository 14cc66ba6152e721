"""Domain types, serialization round-trips and preprocessing oracles."""

import json

import numpy as np
import pytest

from flowcoop.errors import SchemaError, ValidationError
from flowcoop.gp import SEKernel
from flowcoop.trajectories import (Dataset, InteractionDemo, Trajectory,
                                   central_differences, load_dataset,
                                   load_trajectory_csv, preprocess,
                                   save_dataset)


def make_demo(seed=0, L=50, mode="center_hand_over"):
    rng = np.random.default_rng(seed)
    t = np.arange(L) / 10.0
    x = np.cumsum(rng.normal(scale=0.01, size=(L, 3)), axis=0)
    return InteractionDemo(human=Trajectory.from_points(t, x),
                           robot=Trajectory.from_points(t, x + 0.1),
                           mode_label=mode)


class TestTrajectoryInvariants:
    def test_strictly_increasing_timestamps(self):
        with pytest.raises(ValidationError):
            Trajectory.from_points([0.0, 0.0, 1.0], np.zeros((3, 2)))

    def test_minimum_length(self):
        with pytest.raises(ValidationError):
            Trajectory.from_points([0.0], np.zeros((1, 2)))

    def test_rejects_nan(self):
        x = np.zeros((3, 2))
        x[1, 0] = np.nan
        with pytest.raises(ValidationError):
            Trajectory.from_points([0.0, 0.1, 0.2], x)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            Trajectory(t=np.array([0.0, 1.0]), x=np.zeros((2, 3)),
                       xdot=np.zeros((3, 3)))

    def test_prefix(self):
        traj = make_demo().human
        pre = traj.prefix(10)
        assert len(pre) == 10
        assert np.array_equal(pre.x, traj.x[:10])
        with pytest.raises(ValidationError):
            traj.prefix(1)

    def test_central_differences_linear(self):
        t = np.linspace(0, 2, 21)
        v = np.array([0.3, -0.2, 1.0])
        x = t[:, None] * v[None, :]
        assert np.allclose(central_differences(t, x), v, atol=1e-12)


class TestDatasetSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        ds = Dataset(demos=tuple(make_demo(i) for i in range(2)),
                     sample_rate_hz=10.0)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_dataset(ds, p1)
        loaded = load_dataset(p1)
        save_dataset(loaded, p2)
        assert p1.read_text() == p2.read_text()
        reloaded = load_dataset(p2)
        for a, b in zip(loaded.demos, reloaded.demos):
            assert np.array_equal(a.human.t, b.human.t)
            assert np.array_equal(a.human.x, b.human.x)
            assert np.array_equal(a.human.xdot, b.human.xdot)
            assert np.array_equal(a.robot.x, b.robot.x)
            assert a.mode_label == b.mode_label
        assert loaded.sample_rate_hz == reloaded.sample_rate_hz

    def test_well_formed_two_demos(self, tmp_path):
        ds = Dataset(demos=tuple(make_demo(i) for i in range(2)))
        path = tmp_path / "ds.json"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert len(loaded) == 2
        assert len(loaded.demos[0].human) == 50

    def test_non_monotone_timestamps_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        payload = {"sample_rate_hz": 10.0, "demos": [{
            "mode": None,
            "human": {"t": [0.0, 0.2, 0.1], "x": [[0.0] * 3] * 3},
            "robot": {"t": [0.0, 0.1, 0.2], "x": [[0.0] * 3] * 3}}]}
        path.write_text(json.dumps(payload))
        with pytest.raises(ValidationError):
            load_dataset(path)

    def test_empty_demo_list_rejected(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text(json.dumps({"sample_rate_hz": 10.0, "demos": []}))
        with pytest.raises(ValidationError):
            load_dataset(path)

    def test_parse_failure_names_record(self, tmp_path):
        path = tmp_path / "broken.json"
        payload = {"sample_rate_hz": 10.0, "demos": [
            {"mode": None,
             "human": {"t": [0.0, 0.1], "x": [[0.0] * 3] * 2},
             "robot": {"t": [0.0, 0.1], "x": [[0.0] * 3] * 2}},
            {"mode": None, "human": {"t": [0.0, 0.1]}},
        ]}
        path.write_text(json.dumps(payload))
        with pytest.raises(SchemaError, match="demo #1"):
            load_dataset(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError):
            load_dataset(path)

    def test_dimension_mismatch_across_demos(self):
        d3 = make_demo()
        t = np.arange(10) / 10.0
        d2 = InteractionDemo(human=Trajectory.from_points(t, np.zeros((10, 2)) + t[:, None]),
                             robot=Trajectory.from_points(t, np.ones((10, 2)) * t[:, None]))
        with pytest.raises(ValidationError):
            Dataset(demos=(d3, d2))

    def test_csv_import(self, tmp_path):
        t = np.arange(5) / 10.0
        x = np.arange(15, dtype=float).reshape(5, 3) / 10.0
        lines = ["t,x0,x1,x2"] + [
            ",".join(str(v) for v in [t[i], *x[i]]) for i in range(5)]
        f = tmp_path / "traj.csv"
        f.write_text("\n".join(lines) + "\n")
        t2, x2 = load_trajectory_csv(f)
        assert np.allclose(t2, t) and np.allclose(x2, x)

    def test_csv_dataset_dir(self, tmp_path):
        t = np.arange(6) / 10.0
        for stem in ("right_swipe__0", "right_swipe__1"):
            for side in ("human", "robot"):
                rows = "\n".join(f"{t[i]},{0.1 * i},{0.2 * i},0.0" for i in range(6))
                (tmp_path / f"{stem}_{side}.csv").write_text("t,x0,x1,x2\n" + rows)
        ds = load_dataset(tmp_path, format="csv")
        assert len(ds) == 2
        assert ds.demos[0].mode_label == "right_swipe"
        assert ds.sample_rate_hz == pytest.approx(10.0)


class TestPreprocess:
    def test_linear_input_recovers_velocity(self):
        v = np.array([0.25, -0.1, 0.4])
        t = np.linspace(0, 5, 40)
        raw = (t, t[:, None] * v[None, :])
        out = preprocess(raw, out_len=50)
        assert len(out) == 50
        err = np.linalg.norm(out.xdot - v[None, :], axis=1)
        assert err.max() < 1e-3 * np.linalg.norm(v)

    def test_velocities_match_finite_differences_on_line(self):
        v = np.array([1.0, 2.0])
        t = np.linspace(0, 1, 30)
        out = preprocess((t, t[:, None] * v[None, :]), out_len=50)
        fd = central_differences(out.t, out.x)
        assert np.max(np.abs(out.xdot - fd)) < 1e-6 * np.max(np.abs(out.x))

    def test_degenerate_input_warns_zero_velocity(self):
        t = np.arange(10) / 10.0
        x = np.tile([0.3, 0.4, 0.5], (10, 1))
        with pytest.warns(UserWarning):
            out = preprocess((t, x))
        assert np.all(out.xdot == 0.0)
        assert np.allclose(out.x, x[0])

    def test_translation_equivariance(self):
        rng = np.random.default_rng(5)
        t = np.linspace(0, 4, 35)
        x = np.cumsum(rng.normal(scale=0.02, size=(35, 3)), axis=0)
        c = np.array([1.5, -2.0, 0.25])
        a = preprocess((t, x), out_len=50)
        b = preprocess((t, x + c), out_len=50)
        assert np.max(np.abs(b.x - (a.x + c))) < 1e-9
        assert np.max(np.abs(b.xdot - a.xdot)) < 1e-9

    def test_noisy_sine_smoothing(self):
        rng = np.random.default_rng(11)
        t = np.linspace(0, 5, 51)
        clean = np.column_stack([np.sin(2 * np.pi * t / 5.0), np.cos(2 * np.pi * t / 5.0)])
        sigma = 0.05
        noisy = clean + rng.normal(scale=sigma, size=clean.shape)
        kernel = SEKernel(gain=1.0, lengthscale=0.8, noise_var=sigma**2)
        out = preprocess((t, noisy), smooth_hyper=kernel, out_len=51)
        clean_rms = np.sqrt(np.mean((noisy - clean) ** 2))
        smoothed_rms = np.sqrt(np.mean((out.x - clean) ** 2))
        assert smoothed_rms < clean_rms

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            preprocess((np.array([0.0]), np.zeros((1, 3))))

    def test_accepts_pair_sequence(self):
        raw = [(0.0, [0.0, 0.0]), (0.5, [0.5, 0.1]), (1.0, [1.0, 0.2])]
        out = preprocess(raw, out_len=10)
        assert out.dim == 2 and len(out) == 10
