"""
Data schemas for training histories and evaluation residuals.
"""

import math
from typing import List, Optional, TypedDict


# CSV column definitions
HISTORY_COLUMNS = [
    "epoch",
    "d_loss",
    "g_loss",
    "epsilon",
    "r_frac",
]

RESIDUAL_COLUMNS = [
    "label_index",
    "v0",
    "phi",
    "sample",
    "residual",
]


class HistoryRecord(TypedDict):
    """
    One training epoch.

    Fields:
        epoch: Epoch index
        d_loss: Discriminator loss minimized this epoch
        g_loss: Generator objective minimized this epoch (penalty included)
        epsilon: Threshold in force (physics-guided regimes only, else None)
        r_frac: Fraction of the batch judged true (physics-guided regimes only, else None)
    """
    epoch: int
    d_loss: float
    g_loss: float
    epsilon: Optional[float]
    r_frac: Optional[float]


class ResidualRecord(TypedDict):
    """
    One evaluated generator sample.

    Fields:
        label_index: Index of the evaluation label
        v0: Launch speed (m/s)
        phi: Launch angle (degrees)
        sample: Sample number for that label
        residual: Mean residual of the generated trajectory
    """
    label_index: int
    v0: float
    phi: float
    sample: int
    residual: float


def create_history_record(
    epoch: int,
    d_loss: float,
    g_loss: float,
    epsilon: Optional[float] = None,
    r_frac: Optional[float] = None
) -> HistoryRecord:
    """
    Create a history record with validation.

    Raises:
        ValueError: Negative epoch or r_frac outside [0, 1]

    Examples:
        >>> rec = create_history_record(10_000, 1.2, -0.7, epsilon=5.0, r_frac=0.25)
        >>> rec['epsilon']
        5.0
    """
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    if r_frac is not None and not 0.0 <= r_frac <= 1.0:
        raise ValueError(f"r_frac must lie in [0, 1], got {r_frac}")
    return HistoryRecord(
        epoch=int(epoch),
        d_loss=float(d_loss),
        g_loss=float(g_loss),
        epsilon=None if epsilon is None else float(epsilon),
        r_frac=None if r_frac is None else float(r_frac),
    )


def create_residual_records(labels: List[tuple], samples_per_label: int, residuals: List[float]) -> List[ResidualRecord]:
    """
    Pair a flat residual list (label-major order) with its labels.

    Examples:
        >>> recs = create_residual_records([(10.0, 45.0)], 2, [0.5, 0.25])
        >>> [r['sample'] for r in recs]
        [0, 1]
    """
    if len(residuals) != len(labels) * samples_per_label:
        raise ValueError(
            f"{len(residuals)} residuals for {len(labels)} labels x {samples_per_label} samples"
        )
    records = []
    for i, (v0, phi) in enumerate(labels):
        for s in range(samples_per_label):
            records.append(ResidualRecord(
                label_index=i,
                v0=float(v0),
                phi=float(phi),
                sample=s,
                residual=float(residuals[i * samples_per_label + s]),
            ))
    return records


def parse_optional_float(value) -> Optional[float]:
    """
    Parse a CSV cell that may be empty.

    Examples:
        >>> parse_optional_float("") is None
        True
        >>> parse_optional_float("2.5")
        2.5
    """
    if value is None or value == "":
        return None
    value = float(value)
    return None if math.isnan(value) else value
