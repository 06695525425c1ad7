"""
Piecewise-constant threshold schedule for physics-guided training.

The default bands reduce eps from 5 to 0.625 in four steps:

    epoch  10,000 -> 5
    epoch  20,000 -> 2.5
    epoch  30,000 -> 1.25
    epoch  70,000 -> 0.625 (target)
"""

import bisect
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

DEFAULT_STARTS = (10_000, 20_000, 30_000, 70_000)
DEFAULT_VALUES = (5.0, 2.5, 1.25, 0.625)


@dataclass(frozen=True)
class EpsilonSchedule:
    """
    Ordered (epoch_start, epsilon) bands.

    Invariants:
        epoch_start strictly increasing, epsilon positive and non-increasing.
    """
    bands: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        bands = tuple((int(s), float(e)) for s, e in self.bands)
        object.__setattr__(self, 'bands', bands)
        if not bands:
            raise ValueError("EpsilonSchedule needs at least one band")
        for (s0, e0), (s1, e1) in zip(bands, bands[1:]):
            if s1 <= s0:
                raise ValueError(f"Band starts must strictly increase ({s0} then {s1})")
            if e1 > e0:
                raise ValueError(f"Epsilon must not increase ({e0} then {e1})")
        if any(not e > 0 for _, e in bands):
            raise ValueError("Every epsilon must be positive")

    @property
    def starts(self) -> Tuple[int, ...]:
        return tuple(s for s, _ in self.bands)

    @property
    def values(self) -> Tuple[float, ...]:
        return tuple(e for _, e in self.bands)

    @property
    def target(self) -> float:
        """Final threshold."""
        return self.bands[-1][1]

    @classmethod
    def from_lists(cls, starts: Sequence[int], values: Sequence[float]) -> 'EpsilonSchedule':
        if len(starts) != len(values):
            raise ValueError(f"{len(starts)} band starts but {len(values)} epsilon values")
        return cls(tuple(zip(starts, values)))

    @classmethod
    def default(cls) -> 'EpsilonSchedule':
        return cls.from_lists(DEFAULT_STARTS, DEFAULT_VALUES)

    @classmethod
    def geometric(
        cls,
        start_epoch: int,
        end_epoch: int,
        eps_start: float,
        eps_target: float,
        n_bands: int
    ) -> 'EpsilonSchedule':
        """
        Gradual reduction: n_bands equally spaced bands whose thresholds fall
        geometrically from eps_start to eps_target.

        Examples:
            >>> EpsilonSchedule.geometric(0, 300, 4.0, 1.0, 3).starts
            (0, 100, 200)
        """
        if n_bands < 1:
            raise ValueError(f"n_bands must be >= 1, got {n_bands}")
        if n_bands > 1 and n_bands > end_epoch - start_epoch:
            raise ValueError(
                f"n_bands ({n_bands}) exceeds the {max(end_epoch - start_epoch, 0)} epochs between "
                f"start_epoch ({start_epoch}) and end_epoch ({end_epoch}); band starts would collide"
            )
        if not (eps_start >= eps_target > 0):
            raise ValueError("Need eps_start >= eps_target > 0")
        starts = [start_epoch + (end_epoch - start_epoch) * i // n_bands for i in range(n_bands)]
        if n_bands == 1:
            values = [eps_target]
        else:
            values = list(np.geomspace(eps_start, eps_target, n_bands))
            values[0], values[-1] = eps_start, eps_target
        return cls.from_lists(starts, values)

    def scaled(self, factor: float) -> 'EpsilonSchedule':
        """Same band starts, every threshold multiplied by factor."""
        if not factor > 0:
            raise ValueError(f"Scale factor must be positive, got {factor}")
        return EpsilonSchedule(tuple((s, e * factor) for s, e in self.bands))


def epsilon_schedule(e: int, sched: EpsilonSchedule) -> float:
    """
    Threshold in force at epoch e: the latest band with epoch_start <= e.

    Raises:
        ValueError: e precedes the first band

    Examples:
        >>> epsilon_schedule(20_000, EpsilonSchedule.default())
        2.5
    """
    pos = bisect.bisect_right(sched.starts, e)
    if pos == 0:
        raise ValueError(f"Epoch {e} precedes the first epsilon band (starts at {sched.starts[0]})")
    return sched.bands[pos - 1][1]
