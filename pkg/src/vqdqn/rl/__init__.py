from .dqn import (
    AgentConfig,
    EpisodeRecord,
    TrainResult,
    VqDqnAgent,
    default_spec_for,
    epsilon_update_frozenlake,
    epsilon_update_radio,
    greedy_rollout,
    loss_and_grad,
    rolling_stats,
    run_episode,
    select_action,
    td_target,
    train,
)
from .optim import RMSpropConfig, RMSpropState, rmsprop_update
from .replay import ReplayBuffer, Transition
from .tabular import decaying_epsilon, q_learning_baseline, qtable_param_count, sarsa_baseline

__all__ = [
    "AgentConfig", "EpisodeRecord", "RMSpropConfig", "RMSpropState", "ReplayBuffer", "TrainResult",
    "Transition", "VqDqnAgent", "decaying_epsilon", "default_spec_for", "epsilon_update_frozenlake",
    "epsilon_update_radio", "greedy_rollout", "loss_and_grad", "q_learning_baseline", "qtable_param_count",
    "rmsprop_update", "rolling_stats", "run_episode", "sarsa_baseline", "select_action", "td_target", "train",
]
