"""
Conditional generator and discriminator.

Both networks take the normalized label (v0, phi) appended to their
ordinary input:
    G: [z, label] -> normalized trajectory
    D: [trajectory, label] -> score in (0, 1)
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.nn.mlp import MlpParams, MlpSpec, Tape, init_params, mlp_backward, mlp_forward
from src.nn.rng import Rng

LABEL_WIDTH = 2
SCORE_CLAMP = 1e-7


@dataclass
class GeneratorNet:
    spec: MlpSpec
    params: MlpParams
    noise_dim: int

    def __post_init__(self):
        if self.noise_dim < 1:
            raise ValueError(f"noise_dim must be positive, got {self.noise_dim}")
        if self.spec.in_width != self.noise_dim + LABEL_WIDTH:
            raise ValueError(
                f"Generator input width {self.spec.in_width} != noise_dim + {LABEL_WIDTH} "
                f"= {self.noise_dim + LABEL_WIDTH}"
            )
        self.params.check_shapes(self.spec, "generator params")

    @classmethod
    def build(
        cls,
        noise_dim: int,
        hidden_widths: Sequence[int],
        traj_width: int,
        rng: Rng
    ) -> 'GeneratorNet':
        """Relu hidden layers, identity output, Glorot init."""
        spec = MlpSpec((noise_dim + LABEL_WIDTH, *hidden_widths, traj_width), 'relu', 'identity')
        return cls(spec, init_params(spec, rng), noise_dim)

    @property
    def traj_width(self) -> int:
        return self.spec.out_width


@dataclass
class DiscriminatorNet:
    spec: MlpSpec
    params: MlpParams

    def __post_init__(self):
        if self.spec.out_width != 1 or self.spec.output_activation != 'sigmoid':
            raise ValueError("Discriminator must end in a single sigmoid unit")
        if self.spec.in_width <= LABEL_WIDTH:
            raise ValueError(f"Discriminator input width {self.spec.in_width} leaves no room for data")
        self.params.check_shapes(self.spec, "discriminator params")

    @classmethod
    def build(cls, traj_width: int, hidden_widths: Sequence[int], rng: Rng) -> 'DiscriminatorNet':
        """Relu hidden layers, sigmoid output, Glorot init."""
        spec = MlpSpec((traj_width + LABEL_WIDTH, *hidden_widths, 1), 'relu', 'sigmoid')
        return cls(spec, init_params(spec, rng))

    @property
    def traj_width(self) -> int:
        return self.spec.in_width - LABEL_WIDTH


def _concat(a: np.ndarray, b: np.ndarray, a_width: int, a_name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-1] != a_width:
        raise ValueError(f"{a_name} width {a.shape[-1]} does not match expected {a_width}")
    if b.shape[-1] != LABEL_WIDTH:
        raise ValueError(f"label width {b.shape[-1]} does not match expected {LABEL_WIDTH}")
    if a.ndim != b.ndim or (a.ndim == 2 and a.shape[0] != b.shape[0]):
        raise ValueError(f"{a_name} shape {a.shape} and label shape {b.shape} are not aligned")
    return np.concatenate([a, b], axis=-1)


def generate(gen: GeneratorNet, z: np.ndarray, label_norm: np.ndarray) -> Tuple[np.ndarray, Tape]:
    """
    x' = G(z | label).

    Args:
        gen: Generator
        z: Noise, (noise_dim,) or (B, noise_dim)
        label_norm: Normalized label, (2,) or (B, 2)

    Returns:
        Tuple of (normalized trajectory, tape)
    """
    return mlp_forward(gen.spec, gen.params, _concat(z, label_norm, gen.noise_dim, "z"))


def discriminate(
    disc: DiscriminatorNet,
    traj_norm: np.ndarray,
    label_norm: np.ndarray
) -> Tuple[Union[float, np.ndarray], Tape]:
    """
    D(x | label), clamped to [1e-7, 1 - 1e-7].

    Returns:
        Tuple of (score as float for one sample or (B,) array for a batch, tape)
    """
    out, tape = mlp_forward(disc.spec, disc.params, _concat(traj_norm, label_norm, disc.traj_width, "trajectory"))
    scores = np.clip(out[..., 0], SCORE_CLAMP, 1.0 - SCORE_CLAMP)
    return (float(scores) if scores.ndim == 0 else scores), tape


def discriminator_backward(
    disc: DiscriminatorNet,
    tape: Tape,
    score_grads: np.ndarray
) -> Tuple[MlpParams, np.ndarray]:
    """
    Backpropagate dL/dscore through D.

    The clamp is passed straight through; scores are only ever clamped
    where the sigmoid is already saturated.

    Returns:
        Tuple of (D parameter gradients, dL/d(trajectory part of the input))
    """
    upstream = np.asarray(score_grads, dtype=np.float64)[..., None]
    grads, input_grad = mlp_backward(disc.spec, disc.params, tape, upstream)
    return grads, input_grad[..., :disc.traj_width]


def generator_backward(gen: GeneratorNet, tape: Tape, traj_grads: np.ndarray) -> MlpParams:
    """Backpropagate dL/d(normalized trajectory) through G."""
    grads, _ = mlp_backward(gen.spec, gen.params, tape, traj_grads)
    return grads
