"""
Residual evaluation of a trained generator on fresh labels.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.dataset.normalizer import Normalizer
from src.gan.networks import GeneratorNet, generate
from src.nn.rng import Rng
from src.physics.motion import Label, Trajectory
from src.physics.oracles import BlackBoxOracle, BlackBoxView, NewtonOracle

from .checkpoint import Checkpoint
from .config import TrainConfig
from .trainer import EVAL_STREAM

logger = logging.getLogger(__name__)


def draw_eval_labels(
    rng: Rng,
    count: int,
    v0_range: Tuple[float, float] = (1.0, 100.0),
    phi_range: Tuple[float, float] = (0.0, 90.0)
) -> List[Label]:
    """
    Uniform random labels: all speeds are drawn first, then all angles.

    Examples:
        >>> len(draw_eval_labels(Rng(1, 1), 5))
        5
    """
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    v0 = rng.uniform(v0_range[0], v0_range[1], count)
    phi = rng.uniform(phi_range[0], phi_range[1], count)
    return [Label(float(v), float(p)) for v, p in zip(v0, phi)]


def evaluate(
    gen: GeneratorNet,
    normalizer: Normalizer,
    labels: Sequence[Label],
    samples_per_label: int,
    rng: Rng,
    oracle: BlackBoxOracle
) -> List[float]:
    """
    Mean residual of freshly generated trajectories.

    For every label (in order) draws samples_per_label noise vectors,
    generates, denormalizes and asks the oracle for the residual. A
    non-finite generator output is recorded as an infinite residual.

    Returns:
        len(labels) * samples_per_label residuals, label-major
    """
    if samples_per_label < 1:
        raise ValueError(f"samples_per_label must be >= 1, got {samples_per_label}")

    residuals: List[float] = []
    n_bad = 0
    for label in labels:
        z = rng.normal((samples_per_label, gen.noise_dim))
        label_norm = np.tile(normalizer.normalize_label(label.as_array()), (samples_per_label, 1))
        traj_norm, _ = generate(gen, z, label_norm)
        for row in normalizer.denormalize_trajectory(traj_norm):
            if not np.all(np.isfinite(row)):
                n_bad += 1
                residuals.append(float('inf'))
                continue
            residuals.append(oracle.mean_residual(Trajectory.from_flat(row), label))

    if n_bad:
        logger.warning(f"⚠️  {n_bad} generated samples were non-finite")
    return residuals


def evaluate_checkpoint(
    cfg: TrainConfig,
    ckpt: Checkpoint,
    oracle: Optional[BlackBoxOracle] = None
) -> Tuple[List[Label], List[float]]:
    """
    Evaluate on cfg.eval_count labels drawn from the bounding box of the
    training grid, using the seed's evaluation stream.

    Returns:
        Tuple of (labels, residuals)
    """
    oracle = oracle if oracle is not None else BlackBoxView(NewtonOracle(cfg.physics()))
    rng = Rng(cfg.seed, EVAL_STREAM)
    v0_values, phi_values = cfg.grid()
    labels = draw_eval_labels(
        rng,
        cfg.eval_count,
        (min(v0_values), max(v0_values)),
        (min(phi_values), max(phi_values)),
    )
    residuals = evaluate(ckpt.generator, ckpt.normalizer, labels, cfg.eval_samples_per_label, rng, oracle)
    logger.info(
        f"Evaluated {len(residuals)} samples: median residual {np.median(residuals):.4g}"
    )
    return labels, residuals
