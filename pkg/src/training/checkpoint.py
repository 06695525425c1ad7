"""
Checkpoints: everything needed to continue a run bit-for-bit.

Container: a numpy `.npz` archive (no pickling) holding every float64
array under a flat name plus a `meta` JSON string:

    gen_w{i}, gen_b{i}, disc_w{i}, disc_b{i}          network parameters
    gen_m_w{i}, gen_v_w{i}, ... disc_v_b{i}           Adam moments
    norm_traj_mean, norm_traj_std,
    norm_label_mean, norm_label_std                   normalizer
    meta                                              JSON: format_version, specs,
                                                      noise_dim, epoch, phase, Adam
                                                      step counts/hyperparameters,
                                                      rng state, epsilon_scale
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.dataset.normalizer import Normalizer
from src.gan.networks import DiscriminatorNet, GeneratorNet
from src.nn.mlp import MlpParams, MlpSpec
from src.nn.optim import AdamState

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class CheckpointFormatError(ValueError):
    """Unreadable or incompatible checkpoint file."""


@dataclass
class Checkpoint:
    """
    Fields:
        generator, discriminator: Networks with their current params
        gen_opt, disc_opt: Adam states
        normalizer: Fitted on the pre-training dataset
        epoch: Number of epochs completed
        rng_state: Training Rng state after the last completed epoch
        phase: 'init', 'pretrain' or the regime name that produced it
        epsilon_scale: Resolved threshold scale (None until a guided phase starts)
    """
    generator: GeneratorNet
    discriminator: DiscriminatorNet
    gen_opt: AdamState
    disc_opt: AdamState
    normalizer: Normalizer
    epoch: int
    rng_state: Dict[str, Any]
    phase: str = 'init'
    epsilon_scale: Optional[float] = None

    def equals(self, other: 'Checkpoint') -> bool:
        """Bitwise equality of every stored field."""
        a, b = _to_arrays(self), _to_arrays(other)
        if a.keys() != b.keys():
            return False
        if any(not np.array_equal(a[k], b[k]) for k in a if k != 'meta'):
            return False
        return json.loads(str(a['meta'])) == json.loads(str(b['meta']))


def _opt_meta(opt: AdamState) -> dict:
    return {'step_count': opt.step_count, **opt.hyperparameters()}


def _to_arrays(ckpt: Checkpoint) -> Dict[str, np.ndarray]:
    arrays: Dict[str, np.ndarray] = {}
    for prefix, params in (('gen', ckpt.generator.params), ('disc', ckpt.discriminator.params)):
        for name, arr in params.arrays():
            arrays[f"{prefix}_{name}"] = arr
    for prefix, opt in (('gen', ckpt.gen_opt), ('disc', ckpt.disc_opt)):
        for name, arr in opt.first_moment.arrays():
            arrays[f"{prefix}_m_{name}"] = arr
        for name, arr in opt.second_moment.arrays():
            arrays[f"{prefix}_v_{name}"] = arr
    arrays.update(ckpt.normalizer.arrays())
    meta = {
        'format_version': FORMAT_VERSION,
        'generator_spec': ckpt.generator.spec.to_dict(),
        'discriminator_spec': ckpt.discriminator.spec.to_dict(),
        'noise_dim': ckpt.generator.noise_dim,
        'epoch': ckpt.epoch,
        'phase': ckpt.phase,
        'epsilon_scale': ckpt.epsilon_scale,
        'gen_opt': _opt_meta(ckpt.gen_opt),
        'disc_opt': _opt_meta(ckpt.disc_opt),
        'rng_state': ckpt.rng_state,
    }
    arrays['meta'] = np.array(json.dumps(meta, sort_keys=True))
    return arrays


def save_checkpoint(ckpt: Checkpoint, path: Union[str, Path]) -> Path:
    """
    Write a checkpoint archive.

    Args:
        ckpt: Checkpoint to save
        path: Target file; `.npz` is appended by numpy if missing

    Returns:
        Path actually written
    """
    path = Path(path)
    if path.suffix != '.npz':
        path = path.with_suffix(path.suffix + '.npz')
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **_to_arrays(ckpt))
    logger.info(f"💾 Saved checkpoint (epoch {ckpt.epoch}, {ckpt.phase}) to {path}")
    return path


def _params(arrays, prefix: str, spec: MlpSpec) -> MlpParams:
    try:
        return MlpParams(
            [np.array(arrays[f"{prefix}_w{i}"], dtype=np.float64) for i in range(spec.n_layers)],
            [np.array(arrays[f"{prefix}_b{i}"], dtype=np.float64) for i in range(spec.n_layers)],
        )
    except KeyError as e:
        raise CheckpointFormatError(f"Checkpoint is missing array {e}") from e


def _opt(arrays, prefix: str, spec: MlpSpec, meta: dict) -> AdamState:
    return AdamState(
        first_moment=_params(arrays, f"{prefix}_m", spec),
        second_moment=_params(arrays, f"{prefix}_v", spec),
        step_count=int(meta['step_count']),
        learning_rate=float(meta['learning_rate']),
        beta1=float(meta['beta1']),
        beta2=float(meta['beta2']),
        eps_stability=float(meta['eps_stability']),
    )


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint archive.

    Raises:
        FileNotFoundError: Missing file
        CheckpointFormatError: Wrong format version or missing fields
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No checkpoint found: {path}")

    with np.load(path, allow_pickle=False) as data:
        arrays = {k: data[k] for k in data.files}

    if 'meta' not in arrays:
        raise CheckpointFormatError(f"{path} has no metadata record")
    meta = json.loads(str(arrays['meta']))
    if meta.get('format_version') != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{path} has format version {meta.get('format_version')}, expected {FORMAT_VERSION}"
        )

    try:
        gen_spec = MlpSpec.from_dict(meta['generator_spec'])
        disc_spec = MlpSpec.from_dict(meta['discriminator_spec'])
        ckpt = Checkpoint(
            generator=GeneratorNet(gen_spec, _params(arrays, 'gen', gen_spec), int(meta['noise_dim'])),
            discriminator=DiscriminatorNet(disc_spec, _params(arrays, 'disc', disc_spec)),
            gen_opt=_opt(arrays, 'gen', gen_spec, meta['gen_opt']),
            disc_opt=_opt(arrays, 'disc', disc_spec, meta['disc_opt']),
            normalizer=Normalizer.from_arrays(arrays),
            epoch=int(meta['epoch']),
            rng_state=meta['rng_state'],
            phase=meta['phase'],
            epsilon_scale=meta['epsilon_scale'],
        )
    except KeyError as e:
        raise CheckpointFormatError(f"Checkpoint metadata is missing {e}") from e

    logger.info(f"📂 Loaded checkpoint (epoch {ckpt.epoch}, {ckpt.phase}) from {path}")
    return ckpt
