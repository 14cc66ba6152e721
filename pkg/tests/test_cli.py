"""End-to-end CLI tests: gen -> train -> describe/plan -> sweep."""

import json

import numpy as np
import pytest

from flowcoop.cli import main
from flowcoop.trajectories import load_dataset


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    modes = root / "modes.json"
    # tiny dataset keeps the pipeline fast
    from flowcoop.datagen import default_modes
    modes.write_text(json.dumps(
        [{**m.to_dict(), "n_demos": 6} for m in default_modes()]))
    data = root / "data.json"
    assert main(["gen", "--modes", str(modes), "--out", str(data),
                 "--seed", "7"]) == 0
    model = root / "model.json"
    assert main(["train", "--data", str(data), "--out", str(model),
                 "--clusters", "4", "--seed", "0"]) == 0
    return root, data, model


def test_gen_output_loads(workdir):
    _, data, _ = workdir
    ds = load_dataset(data)
    assert len(ds) == 24
    assert ds.sample_rate_hz == 10.0


def test_gen_default_modes(tmp_path):
    out = tmp_path / "d.json"
    assert main(["gen", "--out", str(out), "--seed", "1"]) == 0
    assert len(load_dataset(out)) == 80


def test_describe_command(workdir, capsys):
    root, data, model = workdir
    ds = load_dataset(data)
    demo = ds.demos[0]
    traj = root / "traj.json"
    traj.write_text(json.dumps({"t": demo.human.t.tolist(),
                                "x": demo.human.x.tolist()}))
    assert main(["describe", "--model", str(model), "--traj", str(traj)]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert abs(sum(out["p"]) - 1.0) < 1e-9
    assert 0 <= out["argmax"] < 4


def test_plan_command(workdir):
    root, data, model = workdir
    ds = load_dataset(data)
    demo = ds.demos[0]
    traj = root / "obs.json"
    traj.write_text(json.dumps({"t": demo.human.t.tolist(),
                                "x": demo.human.x.tolist()}))
    plan_out = root / "plan.json"
    assert main(["plan", "--model", str(model), "--obs", str(traj),
                 "--samples", "20", "--seed", "3",
                 "--out", str(plan_out)]) == 0
    payload = json.loads(plan_out.read_text())
    assert len(payload["ee_path"]) == 50
    assert len(payload["weights"]) == 20
    assert abs(sum(payload["weights"]) - 1.0) < 1e-9


def test_plan_with_obstacles(workdir):
    root, data, model = workdir
    ds = load_dataset(data)
    demo = ds.demos[0]
    traj = root / "obs2.json"
    traj.write_text(json.dumps({"t": demo.human.t.tolist(),
                                "x": demo.human.x.tolist()}))
    obst = root / "obstacles.json"
    obst.write_text(json.dumps([{"center": [0.36, 0.0, 0.2],
                                 "radius_m": 0.04}]))
    plan_out = root / "plan_obs.json"
    assert main(["plan", "--model", str(model), "--obs", str(traj),
                 "--obstacles", str(obst), "--samples", "20",
                 "--out", str(plan_out)]) == 0
    payload = json.loads(plan_out.read_text())
    assert payload["clearance_mm"] is not None
    assert payload["barriers"] is not None


def test_sweep_command(workdir):
    root, data, _ = workdir
    out_dir = root / "sweep_out"
    cfg = root / "sweep_cfg.json"
    cfg.write_text(json.dumps({"ratios": [0.2, 1.0], "n_samples": 30,
                               "train": {"n_clusters": 4, "n_inducing": 60}}))
    assert main(["sweep", "--data", str(data), "--out", str(out_dir),
                 "--config", str(cfg), "--seed", "5"]) == 0
    rows = json.loads((out_dir / "sweep.json").read_text())["rows"]
    assert [r["ratio"] for r in rows] == [0.2, 1.0]
    assert (out_dir / "sweep.csv").exists()


def test_obstacle_study_command(workdir):
    root, data, _ = workdir
    out_dir = root / "obs_out"
    cfg = root / "obs_cfg.json"
    cfg.write_text(json.dumps({"ratios": [1.0], "n_samples": 30,
                               "train": {"n_clusters": 4, "n_inducing": 60}}))
    assert main(["obstacle-study", "--data", str(data), "--out", str(out_dir),
                 "--config", str(cfg), "--seed", "5"]) == 0
    rows = json.loads((out_dir / "obstacle_study.json").read_text())["rows"]
    assert len(rows) == 12
    assert all(np.isfinite(r["d_min_mm"]) for r in rows)
