"""Experiment runner: training runs on disk, checkpoint evaluation, parameter tables."""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import envs, vqc
from .config import ExperimentConfig, device_noise, make_backend
from .errors import CompatibilityError
from .rl import EpisodeRecord, TrainResult, greedy_rollout, train
from .rl.dqn import default_spec_for

SCORES_FILE = "scores.csv"
MODEL_FILE = "model.json"
LOCK_FILE = "config.lock.json"


def write_scores(path: Path, log: list[EpisodeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=EpisodeRecord.FIELDS, lineterminator="\n")
        writer.writeheader()
        for rec in log:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.as_row().items()})


def read_scores(path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def run_experiment(cfg: ExperimentConfig) -> TrainResult:
    """Train one seed and write ``scores.csv``, ``model.json`` and ``config.lock.json``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    env = cfg.make_env()
    spec = cfg.circuit_spec(env)
    backend = make_backend(cfg.backend, spec)
    (out / LOCK_FILE).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    result = train(env, cfg.agent, cfg.seed, cfg.episodes, spec=spec, backend=backend)
    write_scores(out / SCORES_FILE, result.log)
    agent = result.agent
    extra = {
        "env": cfg.env,
        "episodes": cfg.episodes,
        "optimizer": {"square_avg": agent.opt_state.square_avg.tolist(), "step": agent.opt_state.step},
        "epsilon": agent.epsilon,
    }
    vqc.save_checkpoint(out / MODEL_FILE, agent.model, extra)
    return result


def _run_logged(cfg: ExperimentConfig) -> list[EpisodeRecord]:
    return run_experiment(cfg).log


def run_seeds(cfg: ExperimentConfig, k: int) -> list[list[EpisodeRecord]]:
    """Seeds ``seed .. seed + k - 1`` in worker processes, each in ``<output_dir>/seed-<s>``."""
    cfgs = [cfg.with_seed(s, str(Path(cfg.output_dir) / f"seed-{s}")) for s in range(cfg.seed, cfg.seed + k)]
    if k == 1:
        return [_run_logged(cfgs[0])]
    with ProcessPoolExecutor(max_workers=k) as pool:
        return list(pool.map(_run_logged, cfgs))


@dataclass(frozen=True)
class EvalEpisode:
    episode: int
    steps: int
    reward: float


def evaluate_checkpoint(
    model: vqc.VqcModel,
    env_ref: str,
    backend: str = "analytic",
    shots: int = 1024,
    device: str | None = None,
    episodes: int = 5,
    seed: int = 0,
    assignment=None,
) -> list[EvalEpisode]:
    """Greedy inference episodes with the chosen backend."""
    env = envs.make_env(env_ref)
    expected = default_spec_for(env)
    spec = model.spec
    if (spec.n_qubits, spec.measured_qubits) != (expected.n_qubits, expected.measured_qubits):
        raise CompatibilityError(
            f"checkpoint circuit ({spec.n_qubits} qubits, {spec.n_actions} outputs) does not match "
            f"environment {env_ref} ({expected.n_qubits} qubits, {env.n_actions} actions)"
        )
    if backend == "analytic":
        if device is not None:
            raise CompatibilityError("--device needs --backend shots")
        be = vqc.ANALYTIC
    else:
        noise_model = device_noise(device, spec.n_qubits, assignment) if device is not None else None
        be = vqc.Shots(shots, seed, noise_model)
    rows = []
    for ep in range(1, episodes + 1):
        reward, steps = greedy_rollout(model, env, be)
        rows.append(EvalEpisode(ep, steps, reward))
    return rows


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.2f}"


def format_eval_table(rows: list[EvalEpisode]) -> str:
    """Episode / Total Steps / Total Reward rows, one column per episode."""
    table = [
        ["Episode"] + [str(r.episode) for r in rows],
        ["Total Steps"] + [str(r.steps) for r in rows],
        ["Total Reward"] + [_fmt(r.reward) for r in rows],
    ]
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    return "\n".join(" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table)


def compare_params(env: str, channels) -> list[dict[str, int]]:
    """Parameter counts of the tabular, dense-network and circuit agents per channel count.

    The dense network is one hidden layer of ``n`` units on an ``n``-dim input.
    """
    if env != "radio":
        raise ValueError(f"compare-params supports env 'radio', got {env!r}")
    rows = []
    for n in channels:
        spec = vqc.radio_circuit(n)
        rows.append({"n": n, "q_table": n**3, "dqn": 2 * n * n + 2 * n, "vq_dqn": vqc.param_count(spec)})
    return rows
