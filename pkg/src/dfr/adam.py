"""Adam over image pixels, the solver driving the stylization loop."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass
class AdamState:
    """First/second moment estimates and hyperparameters for one image."""

    m: np.ndarray
    v: np.ndarray
    t: int
    lr: float
    beta1: float
    beta2: float
    eps: float


def adam_init(
    shape,
    lr: float = 0.002,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    if lr <= 0:
        raise ConfigurationError(f"learning rate must be positive, got {lr}")
    if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
        raise ConfigurationError(f"betas must lie in [0, 1), got {beta1}, {beta2}")
    if eps <= 0:
        raise ConfigurationError(f"eps must be positive, got {eps}")
    return AdamState(
        m=np.zeros(shape, dtype=np.float32),
        v=np.zeros(shape, dtype=np.float32),
        t=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; mutates the state, returns new params."""
    params = np.asarray(params)
    grad = np.asarray(grad)
    if params.shape != state.m.shape or grad.shape != state.m.shape:
        raise ConfigurationError(
            f"params {params.shape} / grad {grad.shape} do not match "
            f"optimizer state {state.m.shape}"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * np.square(grad)
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
