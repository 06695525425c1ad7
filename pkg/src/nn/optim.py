"""
Adam optimizer over MlpParams.
"""

from dataclasses import dataclass, replace

import numpy as np

from .mlp import MlpParams, MlpSpec


@dataclass
class AdamState:
    """
    Adam moments and hyperparameters for one network.

    Fields:
        first_moment: Running mean of gradients, shaped like the params
        second_moment: Running mean of squared gradients
        step_count: Number of updates applied so far
        learning_rate, beta1, beta2, eps_stability: Hyperparameters
    """
    first_moment: MlpParams
    second_moment: MlpParams
    step_count: int = 0
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps_stability: float = 1e-8

    @classmethod
    def fresh(
        cls,
        spec: MlpSpec,
        learning_rate: float = 2e-4,
        beta1: float = 0.5,
        beta2: float = 0.999,
        eps_stability: float = 1e-8
    ) -> 'AdamState':
        """Zero moments, step 0."""
        return cls(
            first_moment=MlpParams.zeros(spec),
            second_moment=MlpParams.zeros(spec),
            step_count=0,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            eps_stability=eps_stability,
        )

    def hyperparameters(self) -> dict:
        return {
            'learning_rate': self.learning_rate,
            'beta1': self.beta1,
            'beta2': self.beta2,
            'eps_stability': self.eps_stability,
        }


def _check_same_shapes(params: MlpParams, other: MlpParams, what: str) -> None:
    if len(params.weights) != len(other.weights):
        raise ValueError(f"{what} has {len(other.weights)} layers, params have {len(params.weights)}")
    for (name, a), (_, b) in zip(params.arrays(), other.arrays()):
        if a.shape != b.shape:
            raise ValueError(f"{what} {name} shape {b.shape} does not match params {a.shape}")


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState):
    """
    One bias-corrected Adam update.

        m <- b1 m + (1 - b1) g
        v <- b2 v + (1 - b2) g^2
        p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)

    Args:
        params: Current parameters (not modified)
        grads: Gradients with the same shapes
        state: Current optimizer state (not modified)

    Returns:
        Tuple of (new params, new state with step_count + 1)

    Raises:
        ValueError: Shape mismatch, or a non-finite gradient (message names the layer)
    """
    _check_same_shapes(params, grads, "grads")
    _check_same_shapes(params, state.first_moment, "first_moment")
    for name, g in grads.arrays():
        if not np.all(np.isfinite(g)):
            raise ValueError(f"Non-finite gradient in layer {name[1:]} ({name})")

    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t

    new_p, new_m, new_v = [], [], []
    for (_, p), (_, g), (_, m), (_, v) in zip(
        params.arrays(), grads.arrays(), state.first_moment.arrays(), state.second_moment.arrays()
    ):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        p = p - state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps_stability)
        new_p.append(p)
        new_m.append(m)
        new_v.append(v)

    def _unflatten(arrs):
        return MlpParams(list(arrs[0::2]), list(arrs[1::2]))

    new_state = replace(
        state,
        first_moment=_unflatten(new_m),
        second_moment=_unflatten(new_v),
        step_count=t,
    )
    return _unflatten(new_p), new_state
