from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError


@dataclass(frozen=True)
class RMSpropConfig:
    learning_rate: float = 0.01
    alpha: float = 0.99
    eps: float = 1e-8


@dataclass
class RMSpropState:
    square_avg: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n: int) -> RMSpropState:
        return cls(np.zeros(n))


def rmsprop_update(params, grads, state: RMSpropState, lr=0.01, alpha=0.99, eps=1e-8):
    """One RMSprop step; returns ``(new_params, new_state)`` and leaves inputs untouched.

    s <- alpha * s + (1 - alpha) * g**2
    p <- p - lr * g / (sqrt(s) + eps)
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or grads.shape != state.square_avg.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.square_avg.shape}")
    if not np.all(np.isfinite(grads)):
        raise TrainingError("non-finite gradient", step=state.step + 1)
    square_avg = alpha * state.square_avg + (1.0 - alpha) * grads**2
    new_params = params - lr * grads / (np.sqrt(square_avg) + eps)
    return new_params, RMSpropState(square_avg, state.step + 1)
