"""
Adversarial losses, the residual-thresholded partition and the physics penalty.

All losses are written as quantities to minimize and return their value
together with dL/dscore for every score, ready for discriminator_backward.

    Discriminator (standard):  -[mean log D(x) + mean log(1 - D(G(z)))]
    Generator (standard):      mean log(1 - D(G(z)))
    Discriminator (guided):    -[mean_{R_eps} log D + mean_{F_eps} log(1 - D)]
    Generator (guided):        mean_{F_eps} log(1 - D)
    Physics penalty:           lambda * r

An expectation over an empty index set contributes exactly zero.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.dataset.normalizer import Normalizer
from src.physics.motion import Label, Trajectory
from src.physics.oracles import BlackBoxOracle, DifferentiableOracle

from .networks import SCORE_CLAMP


def _scores(values, name: str, allow_empty: bool = False) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0 and not allow_empty:
        raise ValueError(f"{name} must not be empty")
    return np.clip(arr, SCORE_CLAMP, 1.0 - SCORE_CLAMP)


def disc_loss_gan(real_scores: Sequence[float], fake_scores: Sequence[float]) -> Tuple[float, Tuple[np.ndarray, np.ndarray]]:
    """
    Standard discriminator loss.

    Returns:
        Tuple of (loss, (dL/d real_scores, dL/d fake_scores))

    Examples:
        >>> round(disc_loss_gan([0.5], [0.5])[0], 4)
        1.3863
    """
    real = _scores(real_scores, "real_scores")
    fake = _scores(fake_scores, "fake_scores")
    loss = -(np.mean(np.log(real)) + np.mean(np.log1p(-fake)))
    real_grad = -1.0 / (real.size * real)
    fake_grad = 1.0 / (fake.size * (1.0 - fake))
    return float(loss), (real_grad, fake_grad)


def gen_loss_gan(fake_scores: Sequence[float], non_saturating: bool = False) -> Tuple[float, np.ndarray]:
    """
    Standard generator loss, mean log(1 - D), minimized as written.

    Args:
        fake_scores: D(G(z)) for the batch
        non_saturating: Minimize -mean log D instead

    Returns:
        Tuple of (loss, dL/d fake_scores)
    """
    fake = _scores(fake_scores, "fake_scores")
    if non_saturating:
        return float(-np.mean(np.log(fake))), -1.0 / (fake.size * fake)
    return float(np.mean(np.log1p(-fake))), -1.0 / (fake.size * (1.0 - fake))


@dataclass(frozen=True)
class Partition:
    """
    Split of a generated batch by physics verdict.

    Fields:
        real_like: Indices with residual <= eps (treated as true)
        fake_like: The complementary indices
        batch_size: Number of samples partitioned
        residuals: Residual of every sample, in batch order
    """
    real_like: Tuple[int, ...]
    fake_like: Tuple[int, ...]
    batch_size: int
    residuals: Tuple[float, ...] = ()

    def __post_init__(self):
        real, fake = set(self.real_like), set(self.fake_like)
        if real & fake:
            raise ValueError(f"Partition sets overlap at {sorted(real & fake)}")
        if real | fake != set(range(self.batch_size)):
            raise ValueError("Partition does not cover the batch exactly")

    @property
    def real_fraction(self) -> float:
        return len(self.real_like) / self.batch_size if self.batch_size else 0.0


def partition_by_residual(
    trajs: Sequence[Trajectory],
    labels: Sequence[Label],
    eps: float,
    oracle: BlackBoxOracle
) -> Partition:
    """
    Label generated samples true (residual <= eps) or fake.

    Args:
        trajs: Generated trajectories in physical coordinates
        labels: Their conditioning labels
        eps: Threshold, > 0; equality counts as true
        oracle: Residual referee; only mean_residual is used

    Returns:
        Partition of range(len(trajs))
    """
    if len(trajs) != len(labels):
        raise ValueError(f"{len(trajs)} trajectories but {len(labels)} labels")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    residuals = [oracle.mean_residual(t, l) for t, l in zip(trajs, labels)]
    real_like = tuple(i for i, r in enumerate(residuals) if r <= eps)
    fake_like = tuple(i for i, r in enumerate(residuals) if not r <= eps)
    return Partition(real_like, fake_like, len(trajs), tuple(residuals))


def _check_partition(scores: np.ndarray, part: Partition) -> None:
    if part.batch_size != scores.size:
        raise ValueError(f"Partition covers {part.batch_size} samples but {scores.size} scores were given")


def disc_loss_pg(scores: Sequence[float], part: Partition) -> Tuple[float, np.ndarray]:
    """
    Discriminator loss against physics verdicts.

    Returns:
        Tuple of (loss, dL/d scores)
    """
    s = _scores(scores, "scores", allow_empty=True)
    _check_partition(s, part)
    grads = np.zeros_like(s)
    loss = 0.0
    if part.real_like:
        idx = np.array(part.real_like)
        loss -= np.mean(np.log(s[idx]))
        grads[idx] = -1.0 / (idx.size * s[idx])
    if part.fake_like:
        idx = np.array(part.fake_like)
        loss -= np.mean(np.log1p(-s[idx]))
        grads[idx] = 1.0 / (idx.size * (1.0 - s[idx]))
    return float(loss), grads


def gen_loss_pg(scores: Sequence[float], part: Partition, non_saturating: bool = False) -> Tuple[float, np.ndarray]:
    """
    Generator loss over the fake-like samples only.

    Real-like samples contribute neither loss nor gradient; an empty
    fake-like set gives loss 0.

    Returns:
        Tuple of (loss, dL/d scores)
    """
    s = _scores(scores, "scores", allow_empty=True)
    _check_partition(s, part)
    grads = np.zeros_like(s)
    if not part.fake_like:
        return 0.0, grads
    idx = np.array(part.fake_like)
    if non_saturating:
        grads[idx] = -1.0 / (idx.size * s[idx])
        return float(-np.mean(np.log(s[idx]))), grads
    grads[idx] = -1.0 / (idx.size * (1.0 - s[idx]))
    return float(np.mean(np.log1p(-s[idx]))), grads


@dataclass(frozen=True)
class PiWeight:
    """Penalty weight lambda >= 0."""
    value: float = 0.1

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.value}")


def pi_penalty(
    traj_norm: np.ndarray,
    label: Label,
    normalizer: Normalizer,
    weight: PiWeight,
    oracle: DifferentiableOracle
) -> Tuple[float, np.ndarray]:
    """
    lambda * r for one normalized generator output.

    The residual is evaluated on the denormalized trajectory, so the gradient
    w.r.t. the normalized output is lambda * dr/dx * std per coordinate.

    Returns:
        Tuple of (penalty, d penalty / d traj_norm)
    """
    traj_norm = np.asarray(traj_norm, dtype=np.float64)
    if traj_norm.shape != (normalizer.traj_width,):
        raise ValueError(f"traj_norm shape {traj_norm.shape}, expected ({normalizer.traj_width},)")
    if weight.value == 0:
        return 0.0, np.zeros_like(traj_norm)
    traj = Trajectory.from_flat(normalizer.denormalize_trajectory(traj_norm))
    r = oracle.mean_residual(traj, label)
    grad = oracle.residual_gradient(traj, label) * normalizer.traj_std
    return weight.value * r, weight.value * grad


def pi_penalty_batch(
    traj_norm: np.ndarray,
    labels: List[Label],
    normalizer: Normalizer,
    weight: PiWeight,
    oracle: DifferentiableOracle
) -> Tuple[float, np.ndarray]:
    """
    Batch mean of pi_penalty.

    Returns:
        Tuple of (mean penalty, (B, 2n) gradients already divided by B)
    """
    if traj_norm.shape[0] != len(labels):
        raise ValueError(f"{traj_norm.shape[0]} trajectories but {len(labels)} labels")
    n = len(labels)
    total = 0.0
    grads = np.zeros_like(traj_norm)
    for i, label in enumerate(labels):
        p, g = pi_penalty(traj_norm[i], label, normalizer, weight, oracle)
        total += p
        grads[i] = g / n
    return total / n, grads
