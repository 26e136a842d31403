import math

import numpy as np
import pytest

import nmrm


def test_generate_and_replay_oracle():
    bags = nmrm.generate_dataset("key", 20, seed=3)
    assert len(bags) == 20
    for bag in bags:
        assert bag.states.shape == (100, 2)
        h = []
        total = 0.0
        for t in range(len(bag)):
            x, y = bag.states[t]
            h, r = nmrm.oracle_step("key", h, x, y, bag.actions[t])
            assert r == bag.rewards[t]
            assert h == list(bag.hiddens[t])
            total += r
        assert total == bag.bag_return


def test_dataset_round_trip(tmp_path):
    bags = nmrm.toy_dataset("dial", 15, seed=1)
    path = tmp_path / "dial.jsonl"
    nmrm.save_dataset(bags, path)
    again = nmrm.load_dataset(path)
    assert all(a == b for a, b in zip(bags, again))


def test_label_noise_preserves_labels():
    bags = nmrm.toy_dataset("dial", 100, seed=2)
    noisy, changed = nmrm.apply_label_noise(bags, list(range(100)), 0.3, seed=5)
    assert len(changed) == 30
    assert sorted(b.bag_return for b in bags) == sorted(b.bag_return for b in noisy)


def test_untrained_model_prediction_sums():
    model = nmrm.build_model("csc", "timer", seed=4)
    states = np.random.default_rng(0).uniform(size=(50, 2))
    out = model.predict(states)
    assert len(out["rewards"]) == 50
    assert out["hiddens"].shape == (50, model.hidden_size)
    assert math.fsum(out["rewards"]) == pytest.approx(out["bag_return"], abs=1e-9)
    clone = nmrm.checkpoint_from_json(model.to_json())
    assert clone.predict(states)["rewards"] == out["rewards"]


def test_short_training_run_reports_metrics():
    bags = nmrm.toy_dataset("toggle", 200, seed=1)
    result = nmrm.train(bags, "toggle", "nn", seed=1, max_epochs=3)
    assert len(result["history"]) == 3
    assert result["test"]["count"] == 20
    assert math.isfinite(result["test"]["return_mse"])


def test_gradient_check_passes():
    for kind in nmrm.model_kinds:
        r = nmrm.gradient_check(kind, draws=3)
        assert r["passed"], r


def test_lunar_stage_switch():
    hidden, reward = nmrm.lunar_oracle([0, 0, 0, 0, 0, 0, 1, 1], 49)
    assert hidden == 50
    assert reward == 0.1 * 1.0


def test_probe_and_rl_smoke():
    model = nmrm.build_model("csc", "key", seed=2)
    trace = nmrm.run_probe(model, "key", "key_optimal")
    assert trace["oracle_return"] == 88.0
    returns = nmrm.rl_train("key", "learned_model", model, episodes=2, hidden=[8], batch_size=16, buffer=300)
    assert len(returns) == 2


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        nmrm.generate_dataset("nowhere", 5, seed=1)
