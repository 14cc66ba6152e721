"""Training pipeline and artifact serialization tests."""

import numpy as np
import pytest

from flowcoop.datagen import default_modes, generate
from flowcoop.errors import SchemaError
from flowcoop.flow import describe
from flowcoop.pipeline import (TrainConfig, load_artifact, save_artifact,
                               train_pipeline)
from flowcoop.reward import reward_of


@pytest.fixture(scope="module")
def models():
    ds = generate(default_modes(n_demos=4), seed=21)
    return train_pipeline(ds, TrainConfig(n_clusters=4, seed=0, n_inducing=60))


class TestTrainPipeline:
    def test_bank_size_and_dims(self, models):
        assert len(models.bank) == 4
        assert models.bank.models[0].dim == 3
        assert len(models.demos) == 16
        assert all(len(d.human) == models.out_len for d in models.demos)

    def test_reward_dimensions(self, models):
        assert models.reward.phi_dim == 4
        assert models.reward.inducing.shape[1] == 4 + 3

    def test_cluster_purity_on_train(self, models):
        # each train demo should point at its own mode's flow model
        by_mode = {}
        for demo in models.demos:
            p = describe(demo.human, models.bank)
            by_mode.setdefault(demo.mode_label, []).append(int(np.argmax(p)))
        for mode, picks in by_mode.items():
            assert len(set(picks)) == 1, f"{mode} split across clusters"
        assert len({p[0] for p in by_mode.values()}) == 4

    def test_short_prefix_recognizes_mode_cluster(self, models):
        # 20% prefixes of held-out demos still land on their mode's cluster
        ds = generate(default_modes(n_demos=4), seed=57)
        from flowcoop.pipeline import preprocess_dataset
        held_out = preprocess_dataset(ds, models.out_len)
        mode_cluster = {}
        for demo in models.demos:
            mode_cluster[demo.mode_label] = int(
                np.argmax(describe(demo.human, models.bank)))
        hits = 0
        for demo in held_out:
            p = describe(demo.human.prefix(10), models.bank)  # 20% of 50
            hits += int(np.argmax(p)) == mode_cluster[demo.mode_label]
        assert hits / len(held_out) >= 0.90


class TestArtifact:
    def test_round_trip_predictions(self, models, tmp_path):
        path = tmp_path / "model.json"
        save_artifact(models, path)
        loaded = load_artifact(path)
        assert len(loaded.bank) == len(models.bank)
        demo = models.demos[0]
        assert np.allclose(describe(demo.human, loaded.bank),
                           describe(demo.human, models.bank), atol=1e-12)
        phi = describe(demo.human, models.bank)
        assert reward_of(loaded.reward, phi, demo.robot.x[-1]) == pytest.approx(
            reward_of(models.reward, phi, demo.robot.x[-1]), abs=1e-12)
        assert np.array_equal(loaded.arm.q_home, models.arm.q_home)
        assert loaded.plan_config == models.plan_config

    def test_planner_from_reloaded_artifact(self, models, tmp_path):
        from flowcoop.arm import ik_solve
        path = tmp_path / "model.json"
        save_artifact(models, path)
        loaded = load_artifact(path)
        planner_a = models.planner()
        planner_b = loaded.planner()
        demo = models.demos[0]
        q_now = ik_solve(models.arm, demo.robot.x[0], q0=models.arm.q_home)
        a = planner_a.plan(demo.human, q_now, n_samples=20, seed=3)
        b = planner_b.plan(demo.human, q_now, n_samples=20, seed=3)
        assert np.allclose(a.ee_path, b.ee_path, atol=1e-9)

    def test_corrupted_artifact(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\"version\": 999}")
        with pytest.raises(SchemaError):
            load_artifact(path)
        path.write_text("not json at all")
        with pytest.raises(SchemaError):
            load_artifact(path)
