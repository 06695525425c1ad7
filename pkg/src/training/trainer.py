"""
Training pipelines.

One epoch is one optimizer iteration on one sampled mini-batch: a
discriminator step followed by a generator step.

    gan        standard conditional GAN losses throughout
    pi_gan     generator loss + lambda * r
    pg_gan     discriminator learns the physics verdict (residual <= eps),
               generator minimizes only over the samples judged fake
    pg_pi_gan  pg_gan generator loss + lambda * r

Physics-guided regimes start from a pre-trained checkpoint and only ever
see the physics through a BlackBoxOracle.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.dataset.grid import Dataset, build_dataset, sample_indices
from src.dataset.normalizer import Normalizer, fit_normalizer
from src.gan.losses import (
    PiWeight,
    disc_loss_gan,
    disc_loss_pg,
    gen_loss_gan,
    gen_loss_pg,
    partition_by_residual,
    pi_penalty_batch,
)
from src.gan.networks import (
    DiscriminatorNet,
    GeneratorNet,
    discriminate,
    discriminator_backward,
    generate,
    generator_backward,
)
from src.gan.schedule import EpsilonSchedule, epsilon_schedule
from src.nn.mlp import compose_widths
from src.nn.optim import AdamState, adam_step
from src.nn.rng import Rng
from src.physics.motion import Label, Trajectory
from src.physics.oracles import BlackBoxOracle, BlackBoxView, DifferentiableOracle, NewtonOracle
from src.storage.schema import HistoryRecord, create_history_record

from .checkpoint import Checkpoint
from .config import Regime, TrainConfig
from .history import TrainHistory

logger = logging.getLogger(__name__)

# Rng sub-streams of a seed
TRAIN_STREAM = 0
EVAL_STREAM = 1
CALIBRATION_STREAM = 2

CALIBRATION_BATCH = 512


class TrainingDivergedError(RuntimeError):
    """A loss, gradient or generator output became non-finite."""

    def __init__(self, epoch: int, stage: str, detail: str = ""):
        self.epoch = epoch
        self.stage = stage
        msg = f"Training diverged at epoch {epoch} ({stage})"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass
class _RunContext:
    """Fixed inputs of one training loop."""
    regime: Regime
    dataset: Dataset
    normalizer: Normalizer
    batch_size: int
    non_saturating: bool
    pi_weight: PiWeight
    oracle: Optional[DifferentiableOracle]
    referee: Optional[BlackBoxOracle]
    schedule: Optional[EpsilonSchedule]


@dataclass
class _RunState:
    """Mutable networks and optimizer states of a loop in progress."""
    generator: GeneratorNet
    discriminator: DiscriminatorNet
    gen_opt: AdamState
    disc_opt: AdamState
    rng: Rng

    @classmethod
    def from_checkpoint(cls, ckpt: Checkpoint) -> '_RunState':
        return cls(
            generator=GeneratorNet(ckpt.generator.spec, ckpt.generator.params, ckpt.generator.noise_dim),
            discriminator=DiscriminatorNet(ckpt.discriminator.spec, ckpt.discriminator.params),
            gen_opt=ckpt.gen_opt,
            disc_opt=ckpt.disc_opt,
            rng=Rng.from_state(ckpt.rng_state),
        )

    def to_checkpoint(self, normalizer: Normalizer, epoch: int, phase: str,
                      epsilon_scale: Optional[float]) -> Checkpoint:
        return Checkpoint(
            generator=self.generator,
            discriminator=self.discriminator,
            gen_opt=self.gen_opt,
            disc_opt=self.disc_opt,
            normalizer=normalizer,
            epoch=epoch,
            rng_state=self.rng.state,
            phase=phase,
            epsilon_scale=epsilon_scale,
        )


def dataset_for(cfg: TrainConfig) -> Dataset:
    """Pre-training dataset described by the config grid (deterministic)."""
    v0_values, phi_values = cfg.grid()
    return build_dataset(v0_values, phi_values, cfg.physics())


def initial_checkpoint(cfg: TrainConfig, dataset: Optional[Dataset] = None) -> Checkpoint:
    """
    Freshly initialized networks at epoch 0.

    The generator is initialized first, then the discriminator, both from
    the seed's training stream.
    """
    ds = dataset if dataset is not None else dataset_for(cfg)
    traj_width = cfg.physics().flat_width
    rng = Rng(cfg.seed, TRAIN_STREAM)
    gen = GeneratorNet.build(cfg.noise_dim, cfg.hidden_widths, traj_width, rng)
    disc = DiscriminatorNet.build(traj_width, cfg.hidden_widths, rng)

    def fresh(spec):
        return AdamState.fresh(spec, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)

    logger.info(
        f"Initialized G {compose_widths(gen.spec.layer_widths)} and "
        f"D {compose_widths(disc.spec.layer_widths)} (seed {cfg.seed})"
    )
    return Checkpoint(
        generator=gen,
        discriminator=disc,
        gen_opt=fresh(gen.spec),
        disc_opt=fresh(disc.spec),
        normalizer=fit_normalizer(ds),
        epoch=0,
        rng_state=rng.state,
        phase='init',
    )


def _require_finite(value, epoch: int, stage: str) -> None:
    if not np.all(np.isfinite(value)):
        raise TrainingDivergedError(epoch, stage, "non-finite value")


def _adam(params, grads, opt: AdamState, epoch: int, stage: str):
    try:
        return adam_step(params, grads, opt)
    except ValueError as e:
        raise TrainingDivergedError(epoch, stage, str(e)) from e


def _train_epoch(state: _RunState, ctx: _RunContext, epoch: int) -> HistoryRecord:
    """One discriminator step then one generator step."""
    ds, norm = ctx.dataset, ctx.normalizer
    gen, disc = state.generator, state.discriminator

    idx = sample_indices(ds, ctx.batch_size, state.rng)
    labels_phys = ds.labels[idx]
    label_norm = norm.normalize_label(labels_phys)
    z = state.rng.normal((ctx.batch_size, gen.noise_dim))

    fake_norm, g_tape = generate(gen, z, label_norm)
    _require_finite(fake_norm, epoch, "generator output")

    label_objs: List[Label] = []
    if ctx.regime.physics_guided or ctx.regime.physics_informed:
        label_objs = [Label(float(v0), float(phi)) for v0, phi in labels_phys]

    # discriminator step
    epsilon, part = None, None
    if ctx.regime.physics_guided:
        epsilon = epsilon_schedule(epoch, ctx.schedule)
        fake_phys = norm.denormalize_trajectory(fake_norm)
        part = partition_by_residual(
            [Trajectory.from_flat(row) for row in fake_phys], label_objs, epsilon, ctx.referee
        )
        scores, d_tape = discriminate(disc, fake_norm, label_norm)
        d_loss, score_grads = disc_loss_pg(scores, part)
        _require_finite(d_loss, epoch, "discriminator loss")
        d_grads, _ = discriminator_backward(disc, d_tape, score_grads)
    else:
        real_norm = norm.normalize_trajectory(ds.trajectories[idx])
        real_scores, real_tape = discriminate(disc, real_norm, label_norm)
        fake_scores, fake_tape = discriminate(disc, fake_norm, label_norm)
        d_loss, (real_grads, fake_grads) = disc_loss_gan(real_scores, fake_scores)
        _require_finite(d_loss, epoch, "discriminator loss")
        d_grads_real, _ = discriminator_backward(disc, real_tape, real_grads)
        d_grads_fake, _ = discriminator_backward(disc, fake_tape, fake_grads)
        d_grads = d_grads_real + d_grads_fake

    disc.params, state.disc_opt = _adam(disc.params, d_grads, state.disc_opt, epoch, "discriminator update")

    # generator step against the updated discriminator
    scores, d_tape = discriminate(disc, fake_norm, label_norm)
    if ctx.regime.physics_guided:
        g_loss, score_grads = gen_loss_pg(scores, part, ctx.non_saturating)
    else:
        g_loss, score_grads = gen_loss_gan(scores, ctx.non_saturating)
    _, traj_grads = discriminator_backward(disc, d_tape, score_grads)

    if ctx.regime.physics_informed and ctx.pi_weight.value > 0:
        penalty, penalty_grads = pi_penalty_batch(
            fake_norm, label_objs, norm, ctx.pi_weight, ctx.oracle
        )
        g_loss += penalty
        traj_grads = traj_grads + penalty_grads
    _require_finite(g_loss, epoch, "generator loss")

    g_grads = generator_backward(gen, g_tape, traj_grads)
    gen.params, state.gen_opt = _adam(gen.params, g_grads, state.gen_opt, epoch, "generator update")

    return create_history_record(
        epoch=epoch,
        d_loss=d_loss,
        g_loss=g_loss,
        epsilon=epsilon,
        r_frac=part.real_fraction if part is not None else None,
    )


def _run_loop(
    state: _RunState,
    ctx: _RunContext,
    start: int,
    stop: int,
    log_every: int,
    on_record: Optional[Callable[[HistoryRecord], None]] = None
) -> TrainHistory:
    history = TrainHistory()
    for epoch in range(start, stop):
        record = _train_epoch(state, ctx, epoch)
        history.append(record)
        if on_record is not None:
            on_record(record)
        if (epoch - start) % log_every == 0 or epoch == stop - 1:
            extra = ""
            if record['epsilon'] is not None:
                extra = f" | eps {record['epsilon']:.4g} | R_eps {record['r_frac']:.2f}"
            logger.info(
                f"[{ctx.regime.value}] epoch {epoch}/{stop} | "
                f"d_loss {record['d_loss']:.4f} | g_loss {record['g_loss']:.4f}{extra}"
            )
        else:
            logger.debug(f"[{ctx.regime.value}] epoch {epoch}: {record}")
    return history


def pretrain(
    cfg: TrainConfig,
    dataset: Optional[Dataset] = None,
    history: Optional[TrainHistory] = None
) -> Checkpoint:
    """
    Standard conditional-GAN training on the dataset for pretrain_epochs.

    Args:
        cfg: Run configuration (regime is ignored; pre-training is always plain GAN)
        dataset: Pre-built dataset for cfg's grid (rebuilt when omitted)
        history: Optional history that receives the pre-training records

    Returns:
        Checkpoint at epoch = pretrain_epochs, phase 'pretrain'

    Raises:
        TrainingDivergedError: Non-finite loss, gradient or output
    """
    ds = dataset if dataset is not None else dataset_for(cfg)
    ckpt = initial_checkpoint(cfg, ds)
    if cfg.pretrain_epochs == 0:
        return ckpt

    logger.info(f"Pre-training plain GAN for {cfg.pretrain_epochs} epochs (seed {cfg.seed})")
    state = _RunState.from_checkpoint(ckpt)
    ctx = _RunContext(
        regime=Regime.GAN,
        dataset=ds,
        normalizer=ckpt.normalizer,
        batch_size=cfg.batch_size,
        non_saturating=cfg.non_saturating,
        pi_weight=PiWeight(0.0),
        oracle=None,
        referee=None,
        schedule=None,
    )
    run_history = _run_loop(state, ctx, 0, cfg.pretrain_epochs, cfg.log_every)
    if history is not None:
        history.extend(run_history)
    return state.to_checkpoint(ckpt.normalizer, cfg.pretrain_epochs, 'pretrain', None)


def calibrate_epsilon_scale(
    cfg: TrainConfig,
    ckpt: Checkpoint,
    dataset: Dataset,
    referee: BlackBoxOracle
) -> float:
    """
    Scale that places the first eps band at the median residual of the
    checkpoint's generator, so that both the true and fake sets start
    non-empty.

    Uses its own Rng stream; the training stream is untouched.
    """
    rng = Rng(cfg.seed, CALIBRATION_STREAM)
    n = min(len(dataset), CALIBRATION_BATCH)
    idx = sample_indices(dataset, n, rng)
    labels_phys = dataset.labels[idx]
    z = rng.normal((n, ckpt.generator.noise_dim))
    fake_norm, _ = generate(ckpt.generator, z, ckpt.normalizer.normalize_label(labels_phys))
    fake_phys = ckpt.normalizer.denormalize_trajectory(fake_norm)
    residuals = [
        referee.mean_residual(Trajectory.from_flat(row), Label(float(v0), float(phi)))
        for row, (v0, phi) in zip(fake_phys, labels_phys)
    ]
    median = float(np.median(residuals))
    scale = max(median, 1e-12) / cfg.schedule().values[0]
    logger.info(f"Calibrated epsilon scale {scale:.6g} (median residual {median:.6g})")
    return scale


def train_regime(
    cfg: TrainConfig,
    ckpt: Optional[Checkpoint],
    oracle: Optional[BlackBoxOracle] = None,
    dataset: Optional[Dataset] = None,
    on_record: Optional[Callable[[HistoryRecord], None]] = None
) -> Tuple[Checkpoint, TrainHistory]:
    """
    Train cfg.regime from the checkpoint's epoch up to total_epochs.

    Args:
        cfg: Run configuration
        ckpt: Starting checkpoint. Required for physics-guided regimes
              (epoch >= pretrain_epochs); gan/pi_gan start from a fresh
              initialization when omitted.
        oracle: Physics oracle (default: NewtonOracle for cfg's physics).
                Physics-guided regimes only receive its black-box view.
        dataset: Pre-built dataset for cfg's grid (rebuilt when omitted)
        on_record: Callback invoked with every history record

    Returns:
        Tuple of (final checkpoint, history of the epochs run here)

    Raises:
        ValueError: Missing/early checkpoint for a guided regime, or an
                    oracle without gradients for an informed regime
        TrainingDivergedError: Non-finite loss, gradient or output
    """
    regime = cfg.regime
    oracle = oracle if oracle is not None else NewtonOracle(cfg.physics())
    if regime.physics_informed and not isinstance(oracle, DifferentiableOracle):
        raise ValueError(f"Regime {regime.value} needs a DifferentiableOracle (residual_gradient)")
    if regime.physics_guided:
        if ckpt is None:
            raise ValueError(f"Regime {regime.value} requires a pre-trained checkpoint")
        if ckpt.epoch < cfg.pretrain_epochs:
            raise ValueError(
                f"Regime {regime.value} requires a checkpoint at epoch >= {cfg.pretrain_epochs}, "
                f"got epoch {ckpt.epoch}"
            )

    ds = dataset if dataset is not None else dataset_for(cfg)
    if ckpt is None:
        ckpt = initial_checkpoint(cfg, ds)
    if ckpt.generator.traj_width != cfg.physics().flat_width:
        raise ValueError(
            f"Checkpoint generator outputs {ckpt.generator.traj_width} values, "
            f"physics expects {cfg.physics().flat_width}"
        )
    if ckpt.epoch >= cfg.total_epochs:
        logger.info(f"[{regime.value}] checkpoint already at epoch {ckpt.epoch}; nothing to do")
        return ckpt, TrainHistory()

    referee = BlackBoxView(oracle) if regime.physics_guided else None
    schedule, scale = None, ckpt.epsilon_scale
    if regime.physics_guided:
        if scale is None:
            scale = (calibrate_epsilon_scale(cfg, ckpt, ds, referee)
                     if cfg.epsilon_scale == 'auto' else float(cfg.epsilon_scale))
        schedule = cfg.schedule().scaled(scale)

    ctx = _RunContext(
        regime=regime,
        dataset=ds,
        normalizer=ckpt.normalizer,
        batch_size=cfg.batch_size,
        non_saturating=cfg.non_saturating,
        pi_weight=cfg.pi_weight() if regime.physics_informed else PiWeight(0.0),
        oracle=oracle if regime.physics_informed else None,
        referee=referee,
        schedule=schedule,
    )
    logger.info(
        f"Training {regime.display_name} from epoch {ckpt.epoch} to {cfg.total_epochs} (seed {cfg.seed})"
    )
    state = _RunState.from_checkpoint(ckpt)
    history = _run_loop(state, ctx, ckpt.epoch, cfg.total_epochs, cfg.log_every, on_record)
    final = state.to_checkpoint(ckpt.normalizer, cfg.total_epochs, regime.value, scale)
    return final, history
