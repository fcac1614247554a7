"""
Adam with bias correction, written functionally: a step returns new
parameters and a new state and never mutates its inputs.
"""
from dataclasses import dataclass, replace

import numpy as np

from app.core.exceptions import ArgumentError


@dataclass(frozen=True)
class OptimizerState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 5e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_optimizer(n_params: int, lr: float = 5e-3) -> OptimizerState:
    return OptimizerState(m=np.zeros(n_params), v=np.zeros(n_params), lr=lr)


def adam_step(state: OptimizerState, params: np.ndarray, grads: np.ndarray):
    """Return (new_params, new_state)."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != state.m.shape or grads.shape != state.m.shape:
        raise ArgumentError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, moments {state.m.shape}"
        )
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * (grads * grads)
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, m=m, v=v, step=t)
