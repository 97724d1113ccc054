"""Deep Q-learning with a variational circuit as the Q-function."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .. import vqc
from ..errors import ConfigError
from ..vqc import ANALYTIC, Analytic, CircuitSpec, Shots, VqcModel
from .optim import RMSpropConfig, RMSpropState, rmsprop_update
from .replay import ReplayBuffer, Transition

SCHEDULES = ("per-episode-decay", "per-step-geometric")
ROLLING_WINDOW = 100
# radio agents learn reliably only with a short horizon and a +/-1 readout
RADIO_GAMMA = 0.5
RADIO_OBSERVABLE = "z"


@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.99
    batch_size: int = 5
    replay_capacity: int = 1000
    target_sync_every: int = 20
    epsilon_schedule: str = "per-step-geometric"
    epsilon_init: float = 1.0
    epsilon_floor: float | None = 0.01
    optimizer: RMSpropConfig = field(default_factory=RMSpropConfig)

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.batch_size < 1 or self.replay_capacity < 1 or self.target_sync_every < 1:
            raise ConfigError("batch_size, replay_capacity and target_sync_every must be positive")
        if self.batch_size > self.replay_capacity:
            raise ConfigError("batch_size cannot exceed replay_capacity")
        if self.epsilon_schedule not in SCHEDULES:
            raise ConfigError(f"epsilon_schedule must be one of {SCHEDULES}")
        if not 0.0 <= self.epsilon_init <= 1.0:
            raise ConfigError("epsilon_init must lie in [0, 1]")
        if self.epsilon_floor is not None and not 0.0 <= self.epsilon_floor <= 1.0:
            raise ConfigError("epsilon_floor must lie in [0, 1]")
        opt = self.optimizer
        if isinstance(opt, dict):
            opt = RMSpropConfig(**opt)
            object.__setattr__(self, "optimizer", opt)
        if min(opt.learning_rate, opt.alpha, opt.eps) <= 0:
            raise ConfigError("optimizer rates must be positive")

    @classmethod
    def frozen_lake(cls, **overrides) -> AgentConfig:
        return cls(**{"replay_capacity": 80, "epsilon_schedule": "per-episode-decay", **overrides})

    @classmethod
    def radio(cls, **overrides) -> AgentConfig:
        return cls(**{"gamma": RADIO_GAMMA, "replay_capacity": 1000, "epsilon_schedule": "per-step-geometric", **overrides})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def select_action(q_values, epsilon: float, rng: np.random.Generator) -> int:
    q_values = np.asarray(q_values)
    if q_values.size == 0:
        raise ValueError("q_values is empty")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(q_values.size))
    return int(np.argmax(q_values))


def epsilon_update_frozenlake(epsilon: float, episode: int) -> float:
    return epsilon / (episode / 100 + 1)


def epsilon_update_radio(epsilon: float) -> float:
    return 0.99 * epsilon


def td_target(
    batch: Sequence[Transition], target_model: VqcModel, gamma: float, backend: Analytic | Shots = ANALYTIC
) -> np.ndarray:
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    terminal = np.array([t.terminal for t in batch], dtype=bool)
    if gamma == 0 or terminal.all():
        return rewards
    q_next = vqc.evaluate(target_model, [t.next_state for t in batch], backend)
    return rewards + np.where(terminal, 0.0, gamma * q_next.max(axis=1))


def loss_and_grad(
    model: VqcModel, batch: Sequence[Transition], y: np.ndarray, backend: Analytic | Shots = ANALYTIC
) -> tuple[float, np.ndarray]:
    """MSE over the batch, differentiated only through each taken action's output."""
    states = [t.state for t in batch]
    actions = np.array([t.action for t in batch])
    q, jac = vqc.evaluate(model, states, backend, with_grad=True)
    rows = np.arange(len(batch))
    err = y - q[rows, actions]
    loss = float(np.mean(err**2))
    grad = -2.0 * np.mean(err[:, None] * jac[rows, actions], axis=0)
    return loss, grad


class VqDqnAgent:
    """Main and target circuits, replay memory and optimizer state."""

    def __init__(
        self,
        spec: CircuitSpec,
        config: AgentConfig,
        seed: int,
        backend: Analytic | Shots = ANALYTIC,
        model: VqcModel | None = None,
    ):
        self.config = config
        self.backend = backend
        seeds = np.random.SeedSequence(seed).spawn(2)
        init_seed = int(seeds[0].generate_state(1)[0])
        self.model = model.copy() if model is not None else VqcModel.random(spec, init_seed)
        self.model.seed = seed
        self.target = self.model.copy()
        self.opt_state = RMSpropState.zeros(self.model.n_params)
        self.buffer = ReplayBuffer(config.replay_capacity)
        self.rng = np.random.default_rng(seeds[1])
        self.epsilon = config.epsilon_init
        self.steps = 0
        self.last_loss: float | None = None

    def _floor(self, eps: float) -> float:
        floor = self.config.epsilon_floor
        return eps if floor is None else max(eps, floor)

    def act(self, state: int, epsilon: float | None = None) -> int:
        eps = self.epsilon if epsilon is None else epsilon
        if eps >= 1.0:
            return int(self.rng.integers(self.model.spec.n_actions))
        q = vqc.evaluate(self.model, [state], self.backend)[0]
        return select_action(q, eps, self.rng)

    def learn(self) -> bool:
        """One gradient step on a replay sample; False while the buffer is too small."""
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            self.last_loss = None
            return False
        batch = self.buffer.sample(cfg.batch_size, self.rng)
        y = td_target(batch, self.target, cfg.gamma, self.backend)
        self.last_loss, grad = loss_and_grad(self.model, batch, y, self.backend)
        opt = cfg.optimizer
        params, self.opt_state = rmsprop_update(
            self.model.flat(), grad, self.opt_state, opt.learning_rate, opt.alpha, opt.eps
        )
        self.model = self.model.with_flat(params)
        return True

    def sync_target(self) -> None:
        self.target = self.model.copy()

    def dqn_step(self, env, state: int):
        """Act once, store the transition, learn, and sync the target on schedule."""
        action = self.act(state)
        out = env.step(action)
        self.buffer.push(Transition(state, action, float(out.reward), out.next_state, bool(out.terminal)))
        trained = self.learn()
        self.steps += 1
        if self.steps % self.config.target_sync_every == 0:
            self.sync_target()
        if self.config.epsilon_schedule == "per-step-geometric":
            self.epsilon = self._floor(epsilon_update_radio(self.epsilon))
        return out, trained

    def end_episode(self, episode: int) -> None:
        if self.config.epsilon_schedule == "per-episode-decay":
            self.epsilon = self._floor(epsilon_update_frozenlake(self.epsilon, episode))


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    total_reward: float
    steps: int
    rolling_mean_100: float
    rolling_std_100: float
    epsilon: float

    FIELDS = ("episode", "total_reward", "steps", "rolling_mean_100", "rolling_std_100", "epsilon")

    def as_row(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.FIELDS}


def rolling_stats(scores: Sequence[float], window: int = ROLLING_WINDOW) -> tuple[float, float]:
    """Mean and population std of the last ``window`` scores (all of them if fewer)."""
    tail = np.asarray(scores[-window:], dtype=np.float64)
    return float(tail.mean()), float(tail.std())


@dataclass
class TrainResult:
    log: list[EpisodeRecord]
    agent: VqDqnAgent

    @property
    def model(self) -> VqcModel:
        return self.agent.model

    def scores(self) -> list[float]:
        return [r.total_reward for r in self.log]


def run_episode(env, policy, max_steps: int | None = None) -> tuple[float, int]:
    """Roll out ``policy(state) -> action`` until the episode ends."""
    state = env.reset()
    total, steps = 0.0, 0
    while True:
        out = env.step(policy(state))
        total += out.reward
        steps += 1
        if out.terminal or out.truncated or (max_steps is not None and steps >= max_steps):
            return total, steps
        state = out.next_state


def train(
    env,
    config: AgentConfig,
    model_init_seed: int,
    episodes: int,
    spec: CircuitSpec | None = None,
    backend: Analytic | Shots = ANALYTIC,
    callback=None,
) -> TrainResult:
    """Run VQ-DQN for ``episodes`` episodes and log per-episode scores."""
    if spec is None:
        spec = default_spec_for(env)
    vqc.check_action_count(spec, env.n_actions)
    agent = VqDqnAgent(spec, config, model_init_seed, backend)
    log: list[EpisodeRecord] = []
    scores: list[float] = []
    for episode in range(episodes):
        state = env.reset()
        total, steps = 0.0, 0
        while True:
            out, _ = agent.dqn_step(env, state)
            total += out.reward
            steps += 1
            if out.terminal or out.truncated:
                break
            state = out.next_state
        # integer rewards are summed exactly; frozen-lake totals are rounded
        # to cancel float drift from repeated -0.01 steps
        total = round(total, 10)
        scores.append(total)
        mean, std = rolling_stats(scores)
        log.append(EpisodeRecord(episode + 1, total, steps, mean, std, agent.epsilon))
        agent.end_episode(episode)
        if callback is not None:
            callback(log[-1], agent)
    return TrainResult(log, agent)


def greedy_rollout(model: VqcModel, env, backend: Analytic | Shots = ANALYTIC) -> tuple[float, int]:
    def policy(s):
        return int(np.argmax(vqc.evaluate(model, [s], backend)[0]))

    total, steps = run_episode(env, policy)
    return round(total, 10), steps


def default_spec_for(env) -> CircuitSpec:
    from ..envs import RadioEnv

    if isinstance(env, RadioEnv):
        return vqc.radio_circuit(env.n_actions, observable=RADIO_OBSERVABLE)
    return vqc.frozen_lake_circuit()


__all__ = [
    "AgentConfig", "EpisodeRecord", "TrainResult", "VqDqnAgent", "default_spec_for",
    "epsilon_update_frozenlake", "epsilon_update_radio", "greedy_rollout", "loss_and_grad",
    "rolling_stats", "run_episode", "select_action", "td_target", "train",
]
