from __future__ import annotations

from typing import NamedTuple, Protocol


class EnvOutcome(NamedTuple):
    next_state: int
    reward: float
    terminal: bool
    truncated: bool = False


class DiscreteEnv(Protocol):
    name: str
    n_states: int
    n_actions: int
    n_qubits: int

    def reset(self) -> int: ...

    def step(self, action: int) -> EnvOutcome: ...
