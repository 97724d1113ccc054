"""Cognitive-radio channel selection against a periodic primary user."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError, UsageError
from .base import EnvOutcome

REWARD_FREE = 1.0
REWARD_COLLISION = -1.0
MAX_COLLISIONS = 3
MAX_STEPS = 100


@dataclass(frozen=True)
class RadioPattern:
    n_channels: int
    occupancy: tuple[int, ...]
    label: str = "a"

    def __post_init__(self):
        occ = tuple(int(c) for c in self.occupancy)
        object.__setattr__(self, "occupancy", occ)
        if not 2 <= self.n_channels <= 5:
            raise ConfigError(f"n_channels must be in [2, 5], got {self.n_channels}")
        if len(occ) != self.n_channels:
            raise ConfigError(f"occupancy has {len(occ)} entries, expected one per time step of the {self.n_channels}-step cycle")
        for i, ch in enumerate(occ):
            if not 0 <= ch < self.n_channels:
                raise ConfigError(f"occupancy[{i}] = {ch} is not a channel in [0, {self.n_channels})")
        if sorted(occ) != list(range(self.n_channels)):
            raise ConfigError(f"occupancy {list(occ)} must visit every channel once per cycle")

    def occupied(self, time: int) -> int:
        return self.occupancy[time % self.n_channels]

    @classmethod
    def sweep(cls, n_channels: int) -> RadioPattern:
        return cls(n_channels, tuple(range(n_channels)), "a")


def radio_qubits(n_channels: int) -> int:
    # 3 channels give 9 states, which do not fit in 3 qubits
    return 4 if n_channels == 3 else n_channels


def cr_state_index(occupied_channel: int, time: int, n: int) -> int:
    if not 0 <= occupied_channel < n or time < 0:
        raise ValueError(f"invalid observation ({occupied_channel}, {time}) for {n} channels")
    return occupied_channel * n + time % n


def cr_step(pattern: RadioPattern, time: int, chosen_channel: int, collisions: int = 0) -> EnvOutcome:
    """Outcome of choosing ``chosen_channel`` at episode step ``time`` (0-based).

    ``collisions`` counts collisions earlier in the episode.
    """
    n = pattern.n_channels
    if not 0 <= chosen_channel < n:
        raise ValueError(f"channel {chosen_channel} outside [0, {n})")
    hit = chosen_channel == pattern.occupied(time)
    reward = REWARD_COLLISION if hit else REWARD_FREE
    collisions += hit
    terminal = collisions >= MAX_COLLISIONS or time + 1 >= MAX_STEPS
    nxt = cr_state_index(pattern.occupied(time + 1), time + 1, n)
    return EnvOutcome(nxt, reward, terminal)


class RadioEnv:
    def __init__(self, pattern: RadioPattern):
        self.pattern = pattern
        n = pattern.n_channels
        self.name = f"radio-{pattern.label}-{n}"
        self.n_actions = n
        self.n_states = n * n
        self.n_qubits = radio_qubits(n)
        self.time: int | None = None
        self.collisions = 0

    def reset(self) -> int:
        self.time = 0
        self.collisions = 0
        return cr_state_index(self.pattern.occupied(0), 0, self.pattern.n_channels)

    def step(self, action: int) -> EnvOutcome:
        if self.time is None:
            raise UsageError("call reset() before step()")
        out = cr_step(self.pattern, self.time, int(action), self.collisions)
        self.collisions += out.reward == REWARD_COLLISION
        self.time += 1
        if out.terminal:
            self.time = None
        return out
