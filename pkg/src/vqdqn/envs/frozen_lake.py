"""Deterministic (non-slippery) frozen-lake grid world."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from ..errors import ConfigError, UsageError
from .base import EnvOutcome

LEFT, DOWN, RIGHT, UP = 0, 1, 2, 3
ACTION_NAMES = ("LEFT", "DOWN", "RIGHT", "UP")
_MOVES = {LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1), UP: (-1, 0)}

REWARD_HOLE = -0.2
REWARD_GOAL = 1.0
REWARD_STEP = -0.01
CELL_KINDS = "SFHG"


@dataclass(frozen=True)
class FrozenLakeMap:
    grid: tuple[str, ...]
    slippery: bool = False
    name: str = "custom"

    def __post_init__(self):
        grid = tuple(row.strip() for row in self.grid if row.strip())
        object.__setattr__(self, "grid", grid)
        if not grid:
            raise ConfigError("map is empty")
        width = len(grid[0])
        for r, row in enumerate(grid):
            if len(row) != width:
                raise ConfigError(f"row {r} has {len(row)} cells, expected {width}")
            for c, ch in enumerate(row):
                if ch not in CELL_KINDS:
                    raise ConfigError(f"cell ({r}, {c}) has unknown kind {ch!r}")
        if self.slippery:
            raise ConfigError("slippery maps are not supported")
        for kind, label in (("S", "START"), ("G", "GOAL")):
            cells = [(r, c) for r, row in enumerate(grid) for c, ch in enumerate(row) if ch == kind]
            if len(cells) != 1:
                raise ConfigError(f"map needs exactly one {label} ({kind}), found {len(cells)} at {cells}")
        if self.goal_state not in reachable_states(self):
            raise ConfigError(f"GOAL at cell {divmod(self.goal_state, width)} is unreachable from START")

    @property
    def n_rows(self) -> int:
        return len(self.grid)

    @property
    def n_cols(self) -> int:
        return len(self.grid[0])

    @property
    def n_states(self) -> int:
        return self.n_rows * self.n_cols

    def cell(self, state: int) -> str:
        r, c = divmod(state, self.n_cols)
        return self.grid[r][c]

    def _find(self, kind: str) -> int:
        for r, row in enumerate(self.grid):
            c = row.find(kind)
            if c >= 0:
                return r * self.n_cols + c
        raise ConfigError(f"map has no {kind!r} cell")

    @property
    def start_state(self) -> int:
        return self._find("S")

    @property
    def goal_state(self) -> int:
        return self._find("G")

    def is_terminal(self, state: int) -> bool:
        return self.cell(state) in "HG"

    @classmethod
    def from_text(cls, text: str, name: str = "custom") -> FrozenLakeMap:
        return cls(tuple(line for line in text.splitlines()), name=name)

    def to_text(self) -> str:
        return "\n".join(self.grid) + "\n"


def move(m: FrozenLakeMap, state: int, action: int) -> int:
    r, c = divmod(state, m.n_cols)
    dr, dc = _MOVES[action]
    r = min(max(r + dr, 0), m.n_rows - 1)
    c = min(max(c + dc, 0), m.n_cols - 1)
    return r * m.n_cols + c


def reachable_states(m: FrozenLakeMap) -> set[int]:
    """States reachable from START without passing through a hole."""
    start = m._find("S")
    seen = {start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        if m.cell(s) in "HG":
            continue
        for a in _MOVES:
            nxt = move(m, s, a)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def fl_reset(m: FrozenLakeMap) -> int:
    return m.start_state


def fl_step(m: FrozenLakeMap, state: int, action: int) -> EnvOutcome:
    if action not in _MOVES:
        raise ValueError(f"action must be one of 0..3, got {action!r}")
    if m.is_terminal(state):
        raise UsageError(f"state {state} is terminal; reset the environment")
    nxt = move(m, state, action)
    kind = m.cell(nxt)
    if kind == "H":
        return EnvOutcome(nxt, REWARD_HOLE, True)
    if kind == "G":
        return EnvOutcome(nxt, REWARD_GOAL, True)
    return EnvOutcome(nxt, REWARD_STEP, False)


class FrozenLakeEnv:
    """Stateful wrapper; episodes are cut (truncated) after ``max_steps``."""

    n_actions = 4

    def __init__(self, lake: FrozenLakeMap, max_steps: int = 200):
        self.lake = lake
        self.max_steps = max_steps
        self.name = f"frozen-lake-{lake.name}"
        self.n_states = lake.n_states
        self.n_qubits = max(1, math.ceil(math.log2(self.n_states)))
        self.state: int | None = None
        self.steps = 0

    def reset(self) -> int:
        self.state = fl_reset(self.lake)
        self.steps = 0
        return self.state

    def step(self, action: int) -> EnvOutcome:
        if self.state is None:
            raise UsageError("call reset() before step()")
        out = fl_step(self.lake, self.state, int(action))
        self.steps += 1
        self.state = out.next_state
        if not out.terminal and self.steps >= self.max_steps:
            out = out._replace(truncated=True)
        if out.terminal or out.truncated:
            self.state = None
        return out
