"""Tabular Q-learning and SARSA baselines."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .dqn import select_action

EpsilonSchedule = Callable[[int], float]


def _as_schedule(epsilon_schedule) -> EpsilonSchedule:
    if callable(epsilon_schedule):
        return epsilon_schedule
    value = float(epsilon_schedule)
    return lambda episode: value


def decaying_epsilon(start: float = 1.0, decay: float = 0.99, floor: float = 0.0) -> EpsilonSchedule:
    return lambda episode: max(floor, start * decay**episode)


def new_qtable(env) -> np.ndarray:
    return np.zeros((env.n_states, env.n_actions))


def qtable_param_count(env) -> int:
    return env.n_states * env.n_actions


def q_learning_baseline(env, alpha: float, gamma: float, epsilon_schedule, episodes: int, seed: int = 0):
    """Off-policy tabular updates; returns ``(table, per-episode total rewards)``."""
    rng = np.random.default_rng(seed)
    schedule = _as_schedule(epsilon_schedule)
    table = new_qtable(env)
    scores = []
    for episode in range(episodes):
        eps = schedule(episode)
        s = env.reset()
        total = 0.0
        while True:
            a = select_action(table[s], eps, rng)
            out = env.step(a)
            target = out.reward if out.terminal else out.reward + gamma * table[out.next_state].max()
            table[s, a] += alpha * (target - table[s, a])
            total += out.reward
            if out.terminal or out.truncated:
                break
            s = out.next_state
        scores.append(round(total, 10))
    return table, scores


def sarsa_baseline(env, alpha: float, gamma: float, epsilon_schedule, episodes: int, seed: int = 0):
    """On-policy tabular updates using the action actually taken next."""
    rng = np.random.default_rng(seed)
    schedule = _as_schedule(epsilon_schedule)
    table = new_qtable(env)
    scores = []
    for episode in range(episodes):
        eps = schedule(episode)
        s = env.reset()
        a = select_action(table[s], eps, rng)
        total = 0.0
        while True:
            out = env.step(a)
            total += out.reward
            if out.terminal:
                table[s, a] += alpha * (out.reward - table[s, a])
                break
            a_next = select_action(table[out.next_state], eps, rng)
            target = out.reward + gamma * table[out.next_state, a_next]
            table[s, a] += alpha * (target - table[s, a])
            if out.truncated:
                break
            s, a = out.next_state, a_next
        scores.append(round(total, 10))
    return table, scores
