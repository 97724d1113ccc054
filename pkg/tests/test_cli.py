import csv
import io
import json
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from vqdqn import cli, vqc
from vqdqn.config import load_config, parse_config
from vqdqn.errors import CompatibilityError, ConfigError
from vqdqn.experiment import evaluate_checkpoint, format_eval_table, read_scores, EvalEpisode


def write_config(tmp_path, **doc):
    path = tmp_path / "cfg.json"
    doc.setdefault("output_dir", "out")
    path.write_text(json.dumps(doc))
    return path


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()


def test_compare_params_output():
    code, out = run_cli("compare-params", "--env", "radio", "--n", "2..5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    table = {int(r["n"]): (int(r["q_table"]), int(r["dqn"]), int(r["vq_dqn"])) for r in rows}
    assert table[2] == (8, 12, 14)
    assert table[4] == (64, 40, 28)
    assert table[5] == (125, 60, 35)
    assert table[3] == (27, 24, 21)


def test_compare_params_bad_range():
    assert run_cli("compare-params", "--n", "1..9")[0] == 1


def test_train_writes_outputs(tmp_path):
    cfg = write_config(tmp_path, env="frozen-lake-a", episodes=3, seed=4)
    code, _ = run_cli("train", str(cfg))
    assert code == 0
    out = tmp_path / "out"
    rows = read_scores(out / "scores.csv")
    assert len(rows) == 3
    assert list(rows[0]) == ["episode", "total_reward", "steps", "rolling_mean_100", "rolling_std_100", "epsilon"]
    lock = json.loads((out / "config.lock.json").read_text())
    assert lock["seed"] == 4 and lock["max_steps"] == 200
    assert lock["agent"]["replay_capacity"] == 80
    assert lock["agent"]["epsilon_schedule"] == "per-episode-decay"
    assert lock["agent"]["gamma"] == 0.99 and lock["circuit"]["observable"] == "p1"
    model, extra = vqc.load_checkpoint(out / "model.json")
    assert model.n_params == 28
    assert len(extra["optimizer"]["square_avg"]) == 28


def test_rolling_columns_brute_force(tmp_path):
    cfg = write_config(tmp_path, env="radio-a-2", episodes=12, seed=0)
    assert run_cli("train", str(cfg))[0] == 0
    rows = read_scores(tmp_path / "out" / "scores.csv")
    rewards = [r["total_reward"] for r in rows]
    for k, row in enumerate(rows, start=1):
        window = rewards[max(0, k - 100):k]
        assert row["rolling_mean_100"] == pytest.approx(np.mean(window), abs=1e-12)
        assert row["rolling_std_100"] == pytest.approx(np.std(window), abs=1e-12)


def test_zero_episodes_header_only(tmp_path):
    cfg = write_config(tmp_path, env="frozen-lake-a", episodes=0)
    assert run_cli("train", str(cfg))[0] == 0
    text = (tmp_path / "out" / "scores.csv").read_text()
    assert text == "episode,total_reward,steps,rolling_mean_100,rolling_std_100,epsilon\n"


def test_radio_defaults():
    cfg = parse_config({"env": "radio-a-4"})
    assert cfg.agent.gamma == 0.5 and cfg.observable == "z"
    assert cfg.agent.replay_capacity == 1000 and cfg.agent.epsilon_schedule == "per-step-geometric"
    assert parse_config({"env": "radio-a-4", "circuit": {"observable": "p1"}, "agent": {"gamma": 0.99}}).observable == "p1"


def test_radio_checkpoint_has_28_params(tmp_path):
    cfg = write_config(tmp_path, env="radio-a-4", episodes=1)
    assert run_cli("train", str(cfg))[0] == 0
    doc = json.loads((tmp_path / "out" / "model.json").read_text())
    assert doc["n_params"] == 28
    model, _ = vqc.load_checkpoint(tmp_path / "out" / "model.json")
    assert model.flat().size == 28


def test_reproducible_scores(tmp_path):
    cfg = write_config(tmp_path, env="radio-a-3", episodes=4, seed=2)
    run_cli("train", str(cfg))
    first = (tmp_path / "out" / "scores.csv").read_bytes()
    run_cli("train", str(cfg))
    assert (tmp_path / "out" / "scores.csv").read_bytes() == first


def test_lock_file_is_complete_and_replayable(tmp_path):
    cfg = write_config(tmp_path, env="radio-a-2", episodes=2)
    run_cli("train", str(cfg))
    lock = json.loads((tmp_path / "out" / "config.lock.json").read_text())
    defaults = load_config(cfg).to_dict()
    assert lock == defaults
    assert set(lock["agent"]) == {
        "gamma", "batch_size", "replay_capacity", "target_sync_every", "epsilon_schedule",
        "epsilon_init", "epsilon_floor", "optimizer",
    }
    assert parse_config(lock).to_dict() == lock


def test_parallel_seeds(tmp_path):
    cfg = write_config(tmp_path, env="radio-a-2", episodes=2, seed=5)
    code, out = run_cli("train", str(cfg), "--parallel-seeds", "2")
    assert code == 0
    for s in (5, 6):
        lock = json.loads((tmp_path / "out" / f"seed-{s}" / "config.lock.json").read_text())
        assert lock["seed"] == s
    a = (tmp_path / "out" / "seed-5" / "scores.csv").read_text()
    single = write_config(tmp_path, env="radio-a-2", episodes=2, seed=5, output_dir="single")
    run_cli("train", str(single))
    assert (tmp_path / "single" / "scores.csv").read_text() == a


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ({"env": "radio-a-2", "epochs": 3}, "epochs"),
        ({"env": "radio-a-2", "agent": {"gama": 0.9}}, "agent.gama"),
        ({"env": "radio-a-2", "agent": {"optimizer": {"lr": 0.1}}}, "agent.optimizer.lr"),
        ({"env": "radio-a-2", "agent": {"gamma": 2.0}}, "gamma"),
        ({"env": "missing-env"}, "env"),
        ({"env": "radio-a-2", "backend": {"kind": "gpu"}}, "backend"),
        ({"env": "radio-a-2", "episodes": "ten"}, "episodes"),
        ({"env": "radio-a-4", "backend": {"kind": "shots", "device": "ibmq-valencia", "assignment": [0, 1, 2, 3]}}, "coupling"),
    ],
)
def test_config_errors(tmp_path, doc, fragment):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ConfigError, match=fragment) as info:
        load_config(path)
    assert str(path) in str(info.value)
    code, _ = run_cli("train", str(path))
    assert code == 1


def test_missing_config_exit_code(tmp_path):
    assert run_cli("train", str(tmp_path / "nope.json"))[0] == 1


def test_eval_untrained_frozen_lake_terminates(tmp_path):
    spec = vqc.frozen_lake_circuit()
    path = tmp_path / "m.json"
    vqc.save_checkpoint(path, vqc.VqcModel.random(spec, 0))
    code, out = run_cli("eval", str(path), "frozen-lake-a", "--episodes", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("Episode") and lines[1].startswith("Total Steps") and lines[2].startswith("Total Reward")
    steps = [int(x) for x in lines[1].split("|")[1:]]
    assert all(1 <= s <= 200 for s in steps)


def test_eval_spec_mismatch(tmp_path):
    path = tmp_path / "m.json"
    vqc.save_checkpoint(path, vqc.VqcModel.random(vqc.radio_circuit(2), 0))
    with pytest.raises(CompatibilityError):
        evaluate_checkpoint(vqc.load_checkpoint(path)[0], "radio-a-4")
    assert run_cli("eval", str(path), "radio-a-4")[0] == 1


def test_eval_noisy_shots_runs(tmp_path):
    path = tmp_path / "m.json"
    vqc.save_checkpoint(path, vqc.VqcModel.random(vqc.radio_circuit(4), 0))
    code, out = run_cli("eval", str(path), "radio-a-4", "--backend", "shots", "--device", "ibmq-valencia", "--episodes", "1")
    assert code == 0 and "Total Reward" in out


def test_eval_table_layout():
    table = format_eval_table([EvalEpisode(1, 100, 100.0), EvalEpisode(2, 100, 98.0)])
    assert table.splitlines() == [
        "Episode      | 1   | 2",
        "Total Steps  | 100 | 100",
        "Total Reward | 100 | 98",
    ]
    assert "0.95" in format_eval_table([EvalEpisode(1, 6, 0.95)])


def test_runtime_error_exit_code(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, env="radio-a-2", episodes=1)

    def boom(*args, **kwargs):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert run_cli("train", str(cfg))[0] == 2


@pytest.mark.parametrize("name", ["radio-4", "frozen-lake", "radio-2-noisy"])
def test_sample_configs_load(name):
    root = Path(__file__).resolve().parents[1]
    cfg = load_config(root / "configs" / f"{name}.json")
    assert cfg.output_dir.startswith(str(root / "runs"))
