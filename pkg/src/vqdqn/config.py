"""Experiment configuration documents (JSON).

Schema (every key optional except ``env``)::

    {
      "env": "radio-a-4",              # bundled name or path to a .txt map / .json pattern
      "seed": 0,
      "episodes": 500,
      "max_steps": 200,                # frozen-lake safety cap
      "agent": {"gamma": 0.5, "batch_size": 5, "replay_capacity": 1000,
                "target_sync_every": 20, "epsilon_schedule": "per-step-geometric",
                "epsilon_init": 1.0, "epsilon_floor": 0.01,
                "optimizer": {"learning_rate": 0.01, "alpha": 0.99, "eps": 1e-08}},
      "circuit": {"n_layers": 2, "observable": "z"},
      "backend": {"kind": "analytic"}
              | {"kind": "shots", "shots": 1024, "seed": 0,
                 "device": "ibmq-poughkeepsie" | null, "assignment": [0, 1] | null},
      "output_dir": "runs/radio-a-4"
    }

Defaults depend on the environment family. Frozen lake uses replay 80,
per-episode decay, gamma 0.99 and the P(1) readout. Radio uses replay 1000,
per-step decay, gamma 0.5 and the <Z> readout. Unknown keys are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from . import envs, noise, vqc
from .errors import ConfigError, ValidationError
from .qsim import NoiseModel
from .rl import AgentConfig, RMSpropConfig
from .rl.dqn import default_spec_for

TOP_KEYS = {"env", "seed", "episodes", "max_steps", "agent", "circuit", "backend", "output_dir"}
CIRCUIT_KEYS = {"n_layers", "observable"}
BACKEND_KEYS = {"kind", "shots", "seed", "device", "assignment"}
AGENT_KEYS = {f.name for f in fields(AgentConfig)}
OPTIMIZER_KEYS = {f.name for f in fields(RMSpropConfig)}

@dataclass(frozen=True)
class BackendConfig:
    kind: str = "analytic"
    shots: int = 1024
    seed: int = 0
    device: str | None = None
    assignment: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("analytic", "shots"):
            raise ConfigError(f"backend.kind must be 'analytic' or 'shots', got {self.kind!r}")
        if self.shots < 1:
            raise ConfigError("backend.shots must be >= 1")
        if self.kind == "analytic" and self.device is not None:
            raise ConfigError("backend.device requires backend.kind = 'shots'")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "shots": self.shots,
            "seed": self.seed,
            "device": self.device,
            "assignment": list(self.assignment) if self.assignment is not None else None,
        }


def make_backend(cfg: BackendConfig, spec: vqc.CircuitSpec):
    if cfg.kind == "analytic":
        return vqc.ANALYTIC
    model = None
    if cfg.device is not None:
        model = device_noise(cfg.device, spec.n_qubits, cfg.assignment)
    return vqc.Shots(cfg.shots, cfg.seed, model)


def device_noise(device: str, n_qubits: int, assignment=None) -> NoiseModel:
    props = noise.parse_device_file(device)
    if assignment is None:
        assignment = noise.find_chain(props, n_qubits)
    if len(assignment) != n_qubits:
        raise ConfigError(f"assignment {list(assignment)} must name {n_qubits} device qubits")
    return noise.synthesize_noise_model(props, assignment)


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    seed: int = 0
    episodes: int = 500
    max_steps: int = 200
    agent: AgentConfig = field(default_factory=AgentConfig)
    n_layers: int = 2
    observable: str = "p1"
    backend: BackendConfig = field(default_factory=BackendConfig)
    output_dir: str = "runs/experiment"

    def make_env(self):
        return envs.make_env(self.env, max_steps=self.max_steps)

    def circuit_spec(self, env=None) -> vqc.CircuitSpec:
        env = env or self.make_env()
        base = default_spec_for(env)
        return vqc.CircuitSpec(base.n_qubits, self.n_layers, base.parameterized_qubits, base.measured_qubits, self.observable)

    def to_dict(self) -> dict[str, Any]:
        """Fully resolved document; what ``config.lock.json`` records."""
        return {
            "env": self.env,
            "seed": self.seed,
            "episodes": self.episodes,
            "max_steps": self.max_steps,
            "agent": self.agent.to_dict(),
            "circuit": {"n_layers": self.n_layers, "observable": self.observable},
            "backend": self.backend.to_dict(),
            "output_dir": self.output_dir,
        }

    def with_seed(self, seed: int, output_dir: str | None = None) -> ExperimentConfig:
        doc = self.to_dict()
        doc["seed"] = seed
        if output_dir is not None:
            doc["output_dir"] = output_dir
        return parse_config(doc)


def _reject_unknown(section: str, doc: dict, allowed: set[str]) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        where = f"{section}." if section else ""
        raise ConfigError(f"unknown key(s) {', '.join(where + k for k in unknown)}")


def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected an object")
    return value


def env_family(env_ref: str) -> str:
    cfg = envs.load_env_config(env_ref)
    return "frozen-lake" if isinstance(cfg, envs.FrozenLakeMap) else "radio"


def parse_config(doc: dict[str, Any], base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown("", doc, TOP_KEYS)
    if "env" not in doc:
        raise ConfigError("env: required")
    env_ref = str(doc["env"])
    if base_dir is not None and env_ref not in envs.BUNDLED and not Path(env_ref).is_absolute():
        env_ref = str((base_dir / env_ref).resolve())
    try:
        family = env_family(env_ref)
    except ValidationError as exc:
        raise ConfigError(f"env: {exc}") from None

    agent_doc = _section(doc, "agent")
    _reject_unknown("agent", agent_doc, AGENT_KEYS)
    opt_doc = _section(agent_doc, "optimizer")
    _reject_unknown("agent.optimizer", opt_doc, OPTIMIZER_KEYS)
    agent_kwargs = {k: v for k, v in agent_doc.items() if k != "optimizer"}
    try:
        opt = RMSpropConfig(**opt_doc)
        preset = AgentConfig.frozen_lake if family == "frozen-lake" else AgentConfig.radio
        agent = preset(optimizer=opt, **agent_kwargs)
    except (TypeError, ValidationError) as exc:
        raise ConfigError(f"agent: {exc}") from None

    circuit = _section(doc, "circuit")
    _reject_unknown("circuit", circuit, CIRCUIT_KEYS)
    backend_doc = dict(_section(doc, "backend"))
    _reject_unknown("backend", backend_doc, BACKEND_KEYS)
    if backend_doc.get("assignment") is not None:
        backend_doc["assignment"] = tuple(int(q) for q in backend_doc["assignment"])
    device = backend_doc.get("device")
    if device is not None and base_dir is not None and device not in noise.BUNDLED_DEVICES and not Path(device).is_absolute():
        backend_doc["device"] = str((base_dir / device).resolve())
    try:
        backend = BackendConfig(**backend_doc)
    except (TypeError, ValidationError) as exc:
        raise ConfigError(f"backend: {exc}") from None

    output_dir = str(doc.get("output_dir", f"runs/{Path(env_ref).stem}-seed{doc.get('seed', 0)}"))
    if base_dir is not None and not Path(output_dir).is_absolute():
        output_dir = str((base_dir / output_dir).resolve())

    cfg = ExperimentConfig(
        env=env_ref,
        seed=_int(doc, "seed", 0),
        episodes=_int(doc, "episodes", 500),
        max_steps=_int(doc, "max_steps", 200),
        agent=agent,
        n_layers=_int(circuit, "n_layers", 2, "circuit."),
        observable=str(circuit.get("observable", default_spec_for(envs.make_env(env_ref)).observable)),
        backend=backend,
        output_dir=output_dir,
    )
    if cfg.episodes < 0 or cfg.max_steps < 1:
        raise ConfigError("episodes must be >= 0 and max_steps >= 1")
    try:
        spec = cfg.circuit_spec()
        if backend.kind == "shots" and backend.device is not None:
            make_backend(backend, spec)
    except ValidationError as exc:
        raise ConfigError(f"circuit/backend: {exc}") from None
    return cfg


def _int(doc: dict, key: str, default: int, prefix: str = "") -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{prefix}{key}: expected an integer, got {value!r}")
    return value


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: config file not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(doc, base_dir=path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
