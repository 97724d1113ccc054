"""Discrete environments: frozen lake and cognitive radio."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from .base import DiscreteEnv, EnvOutcome
from .frozen_lake import FrozenLakeEnv, FrozenLakeMap, fl_reset, fl_step
from .radio import RadioEnv, RadioPattern, cr_state_index, cr_step, radio_qubits

BUNDLED = (
    "frozen-lake-a", "frozen-lake-b", "frozen-lake-c",
    "radio-a-2", "radio-a-3", "radio-a-4", "radio-a-5", "radio-b-4", "radio-c-4",
)


def bundled_path(name: str) -> Path:
    suffix = ".txt" if name.startswith("frozen-lake") else ".json"
    return Path(str(resources.files(__package__).joinpath("data", name + suffix)))


def _resolve(ref) -> Path:
    if str(ref) in BUNDLED:
        return bundled_path(str(ref))
    path = Path(ref)
    if not path.exists():
        raise ConfigError(f"environment file {ref!s} does not exist (bundled names: {', '.join(BUNDLED)})")
    return path


def load_env_config(ref) -> FrozenLakeMap | RadioPattern:
    """Load a map (``.txt``) or radio pattern (``.json``) by path or bundled name."""
    path = _resolve(ref)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        unknown = set(doc) - {"label", "n_channels", "occupancy"}
        if unknown:
            raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
        try:
            return RadioPattern(int(doc["n_channels"]), tuple(doc["occupancy"]), str(doc.get("label", path.stem)))
        except KeyError as exc:
            raise ConfigError(f"{path}: missing key {exc}") from None
    name = path.stem.removeprefix("frozen-lake-")
    return FrozenLakeMap.from_text(text, name=name)


def make_env(ref, max_steps: int = 200) -> FrozenLakeEnv | RadioEnv:
    cfg = ref if isinstance(ref, (FrozenLakeMap, RadioPattern)) else load_env_config(ref)
    if isinstance(cfg, FrozenLakeMap):
        return FrozenLakeEnv(cfg, max_steps=max_steps)
    return RadioEnv(cfg)


__all__ = [
    "BUNDLED", "DiscreteEnv", "EnvOutcome", "FrozenLakeEnv", "FrozenLakeMap", "RadioEnv", "RadioPattern",
    "bundled_path", "cr_state_index", "cr_step", "fl_reset", "fl_step", "load_env_config", "make_env",
    "radio_qubits",
]
