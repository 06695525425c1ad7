"""
Pre-training dataset over a (v0, phi) grid.

Every record is the closed-form trajectory for its label, so the dataset
has zero residual by construction.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.nn.rng import Rng
from src.physics.motion import Label, PhysicsParams, Trajectory, exact_trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """
    Labelled trajectories.

    Fields:
        labels: (N, 2) array of (v0, phi_deg)
        trajectories: (N, 2 n_steps) flattened physical trajectories
        params: Physics constants the records were generated with
    """
    labels: np.ndarray
    trajectories: np.ndarray
    params: PhysicsParams

    def __post_init__(self):
        if self.labels.ndim != 2 or self.labels.shape[1] != 2:
            raise ValueError(f"labels must have shape (N, 2), got {self.labels.shape}")
        if self.trajectories.shape != (self.labels.shape[0], self.params.flat_width):
            raise ValueError(
                f"trajectories shape {self.trajectories.shape} does not match "
                f"({self.labels.shape[0]}, {self.params.flat_width})"
            )

    def __len__(self) -> int:
        return self.labels.shape[0]

    def record(self, i: int) -> Tuple[Label, Trajectory]:
        v0, phi = self.labels[i]
        return Label(float(v0), float(phi)), Trajectory.from_flat(self.trajectories[i])


def _check_distinct(values: Sequence[float], name: str) -> None:
    if len(values) == 0:
        raise ValueError(f"{name} must not be empty")
    if len(set(values)) != len(values):
        dupes = sorted({v for v in values if list(values).count(v) > 1})
        raise ValueError(f"{name} contains duplicate entries: {dupes}")


def build_dataset(
    v0_values: Sequence[float],
    phi_values: Sequence[float],
    params: PhysicsParams
) -> Dataset:
    """
    One exact trajectory per (v0, phi) pair, v0-major order.

    Args:
        v0_values: Distinct launch speeds (m/s)
        phi_values: Distinct launch angles (degrees)
        params: Physics constants

    Returns:
        Dataset with len(v0_values) * len(phi_values) records

    Examples:
        >>> len(build_dataset(range(1, 101), range(0, 91), PhysicsParams()))
        9100
    """
    v0_values = [float(v) for v in v0_values]
    phi_values = [float(p) for p in phi_values]
    _check_distinct(v0_values, "v0_values")
    _check_distinct(phi_values, "phi_values")

    labels = np.array([(v0, phi) for v0 in v0_values for phi in phi_values], dtype=np.float64)
    trajectories = np.stack([
        exact_trajectory(Label(v0, phi), params).flat() for v0, phi in labels
    ])
    logger.info(
        f"Built dataset: {len(v0_values)} speeds x {len(phi_values)} angles = {len(labels)} records"
    )
    return Dataset(labels=labels, trajectories=trajectories, params=params)


def sample_indices(ds: Dataset, batch_size: int, rng: Rng) -> np.ndarray:
    """Record indices of a uniform sample without replacement."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    if batch_size > len(ds):
        raise ValueError(f"batch_size {batch_size} exceeds dataset size {len(ds)}")
    return rng.permutation(len(ds))[:batch_size]


def sample_batch(ds: Dataset, batch_size: int, rng: Rng) -> List[Tuple[Label, Trajectory]]:
    """
    Uniform mini-batch without replacement.

    Args:
        ds: Dataset
        batch_size: 1 <= batch_size <= len(ds)
        rng: Random source (advanced)

    Returns:
        List of (Label, Trajectory) records
    """
    return [ds.record(int(i)) for i in sample_indices(ds, batch_size, rng)]


def csv_columns(n_steps: int) -> List[str]:
    cols = ['v0', 'phi']
    for k in range(1, n_steps + 1):
        cols += [f"x{k}", f"y{k}"]
    return cols


def export_csv(ds: Dataset, path: Union[str, Path]) -> Path:
    """
    Write `v0,phi,x1,y1,...` rows, full double precision, UTF-8, LF endings.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(
        np.hstack([ds.labels, ds.trajectories]),
        columns=csv_columns(ds.params.n_steps),
    )
    df.to_csv(path, index=False, float_format='%.17g', encoding='utf-8', lineterminator='\n')
    logger.info(f"Wrote {len(ds)} records to {path}")
    return path


def import_csv(path: Union[str, Path], params: PhysicsParams) -> Dataset:
    """
    Read a dataset written by export_csv.

    Raises:
        FileNotFoundError: Missing file
        ValueError: Header does not match the physics' n_steps
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No dataset file found: {path}")
    df = pd.read_csv(path, float_precision='round_trip', encoding='utf-8')
    expected = csv_columns(params.n_steps)
    if list(df.columns) != expected:
        raise ValueError(
            f"Dataset header has {len(df.columns)} columns, expected {len(expected)} "
            f"(v0, phi and {params.n_steps} points)"
        )
    values = df.to_numpy(dtype=np.float64)
    return Dataset(labels=values[:, :2].copy(), trajectories=values[:, 2:].copy(), params=params)
