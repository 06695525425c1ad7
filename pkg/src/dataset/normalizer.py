"""
Per-dimension standardization of trajectories and labels.

Network inputs and outputs live in normalized space; physics residuals are
always computed after denormalizing.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.physics.motion import Label, Trajectory

from .grid import Dataset

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class Normalizer:
    """
    Fitted means and floored standard deviations.

    Fields:
        traj_mean, traj_std: (2 n_steps,) per coordinate
        label_mean, label_std: (2,) for (v0, phi)
    """
    traj_mean: np.ndarray
    traj_std: np.ndarray
    label_mean: np.ndarray
    label_std: np.ndarray

    def __post_init__(self):
        if self.traj_mean.shape != self.traj_std.shape:
            raise ValueError("traj_mean and traj_std shapes differ")
        if self.label_mean.shape != (2,) or self.label_std.shape != (2,):
            raise ValueError("label statistics must have shape (2,)")
        if np.any(self.traj_std < STD_FLOOR) or np.any(self.label_std < STD_FLOOR):
            raise ValueError(f"standard deviations must be >= {STD_FLOOR}")

    @property
    def traj_width(self) -> int:
        return self.traj_mean.shape[0]

    def _check(self, x: np.ndarray, width: int, what: str) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape[-1] != width:
            raise ValueError(f"{what} width {arr.shape[-1]} does not match normalizer width {width}")
        return arr

    def normalize_trajectory(self, x: np.ndarray) -> np.ndarray:
        """Vector (2n,) or batch (B, 2n) of physical coordinates."""
        return (self._check(x, self.traj_width, "trajectory") - self.traj_mean) / self.traj_std

    def denormalize_trajectory(self, x: np.ndarray) -> np.ndarray:
        return self._check(x, self.traj_width, "trajectory") * self.traj_std + self.traj_mean

    def normalize_label(self, x: np.ndarray) -> np.ndarray:
        """Vector (2,) or batch (B, 2) of (v0, phi)."""
        return (self._check(x, 2, "label") - self.label_mean) / self.label_std

    def denormalize_label(self, x: np.ndarray) -> np.ndarray:
        return self._check(x, 2, "label") * self.label_std + self.label_mean

    def arrays(self) -> dict:
        return {
            'norm_traj_mean': self.traj_mean,
            'norm_traj_std': self.traj_std,
            'norm_label_mean': self.label_mean,
            'norm_label_std': self.label_std,
        }

    @classmethod
    def from_arrays(cls, arrays) -> 'Normalizer':
        return cls(
            traj_mean=np.asarray(arrays['norm_traj_mean'], dtype=np.float64),
            traj_std=np.asarray(arrays['norm_traj_std'], dtype=np.float64),
            label_mean=np.asarray(arrays['norm_label_mean'], dtype=np.float64),
            label_std=np.asarray(arrays['norm_label_std'], dtype=np.float64),
        )


def fit_normalizer(ds: Dataset) -> Normalizer:
    """
    Means and population standard deviations over every record, std floored
    at 1e-8.

    Raises:
        ValueError: Empty dataset
    """
    if len(ds) == 0:
        raise ValueError("Cannot fit a normalizer on an empty dataset")
    return Normalizer(
        traj_mean=ds.trajectories.mean(axis=0),
        traj_std=np.maximum(ds.trajectories.std(axis=0), STD_FLOOR),
        label_mean=ds.labels.mean(axis=0),
        label_std=np.maximum(ds.labels.std(axis=0), STD_FLOOR),
    )


def _resolve(x, kind: Optional[str], n: Normalizer):
    if isinstance(x, Trajectory):
        return x.flat(), 'trajectory'
    if isinstance(x, Label):
        return x.as_array(), 'label'
    arr = np.asarray(x, dtype=np.float64)
    if kind is None:
        width = arr.shape[-1]
        if width == n.traj_width and width != 2:
            kind = 'trajectory'
        elif width == 2 and n.traj_width != 2:
            kind = 'label'
        else:
            raise ValueError(f"Cannot tell trajectory from label for width {width}; pass kind=")
    if kind not in ('trajectory', 'label'):
        raise ValueError(f"kind must be 'trajectory' or 'label', got {kind!r}")
    return arr, kind


def normalize(x: Union[Trajectory, Label, np.ndarray], n: Normalizer, kind: Optional[str] = None) -> np.ndarray:
    """
    (x - mean) / std per dimension.

    Trajectories and labels are recognized by type or width; pass kind=
    when the widths coincide.
    """
    arr, kind = _resolve(x, kind, n)
    return n.normalize_trajectory(arr) if kind == 'trajectory' else n.normalize_label(arr)


def denormalize(x: np.ndarray, n: Normalizer, kind: Optional[str] = None) -> np.ndarray:
    """Exact inverse of normalize."""
    arr, kind = _resolve(x, kind, n)
    return n.denormalize_trajectory(arr) if kind == 'trajectory' else n.denormalize_label(arr)
