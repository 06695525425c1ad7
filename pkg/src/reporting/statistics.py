"""
Residual Statistics Module

Order statistics of evaluation residuals:
- Quartiles by linear interpolation at p * (n - 1)
- 1.5 IQR outlier rule and boxplot whiskers
- Per-run statistics and their average over seeds

The reported median / q1 / IQR are computed on the full sample; the
1.5 IQR rule only decides whiskers and outlier dots. Diverged samples
enter as +inf residuals and are ranked like any other value.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.training.config import Regime

WHISKER_FACTOR = 1.5
QUARTILE_PROBS = (0.25, 0.5, 0.75)


def _values(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValueError("values must not be empty")
    if np.isnan(arr).any():
        raise ValueError("values must not contain NaN")
    return arr


def _order_statistic(ordered: np.ndarray, p: float) -> float:
    # interpolation only between distinct neighbours, so inf never meets inf - inf
    h = p * (ordered.size - 1)
    lo = int(math.floor(h))
    hi = min(lo + 1, ordered.size - 1)
    frac = h - lo
    a, b = float(ordered[lo]), float(ordered[hi])
    if frac == 0.0 or a == b:
        return a
    return a + frac * (b - a)


def quartiles(values: Sequence[float]) -> Tuple[float, float, float]:
    """
    First quartile, median and third quartile.

    Examples:
        >>> quartiles([1, 2, 3, 4])
        (1.75, 2.5, 3.25)
        >>> quartiles([1, 2, float('inf'), float('inf')])
        (1.75, inf, inf)
    """
    arr = _values(values)
    if np.isfinite(arr).all():
        q1, med, q3 = np.quantile(arr, QUARTILE_PROBS, method='linear')
        return float(q1), float(med), float(q3)
    ordered = np.sort(arr)
    q1, med, q3 = (_order_statistic(ordered, p) for p in QUARTILE_PROBS)
    return q1, med, q3


def spread(q1: float, q3: float) -> float:
    """q3 - q1, zero when both quartiles are the same infinity."""
    return 0.0 if q1 == q3 else q3 - q1


def _fences(values: np.ndarray) -> Tuple[float, float, float, float, float]:
    q1, med, q3 = quartiles(values)
    iqr = spread(q1, q3)
    return q1 - WHISKER_FACTOR * iqr, q1, med, q3, q3 + WHISKER_FACTOR * iqr


def iqr_filter(values: Sequence[float]) -> Tuple[List[float], List[float]]:
    """
    Split values by the 1.5 IQR rule.

    Returns:
        Tuple of (kept, outliers), both in input order

    Examples:
        >>> iqr_filter([1, 2, 3, 4, 100])
        ([1.0, 2.0, 3.0, 4.0], [100.0])
    """
    arr = _values(values)
    lo, _, _, _, hi = _fences(arr)
    mask = (arr < lo) | (arr > hi)
    return arr[~mask].tolist(), arr[mask].tolist()


def boxplot_whiskers(values: Sequence[float]) -> Tuple[float, float, float, float, float, List[float]]:
    """
    Box geometry for one sample.

    Whiskers sit at the most extreme data inside the 1.5 IQR fences,
    never inside the box.

    Returns:
        Tuple of (lower whisker, q1, median, q3, upper whisker, outliers)
    """
    arr = _values(values)
    lo, q1, med, q3, hi = _fences(arr)
    inside = arr[(arr >= lo) & (arr <= hi)]
    outliers = arr[(arr < lo) | (arr > hi)].tolist()
    lower = min(float(inside.min()), q1)
    upper = max(float(inside.max()), q3)
    return lower, q1, med, q3, upper, outliers


class RunStats(BaseModel):
    """Residual statistics of one (regime, seed) run."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    regime: Regime
    seed: int
    median: float
    q1: float
    q3: float
    iqr: float = Field(ge=0)
    n_samples: int = Field(ge=1)
    n_outliers: int = Field(ge=0)

    @model_validator(mode='after')
    def _ordered(self) -> 'RunStats':
        if not self.q1 <= self.median <= self.q3:
            raise ValueError(f"quartiles out of order: {self.q1}, {self.median}, {self.q3}")
        return self


class AggregateStats(BaseModel):
    """Means of median, q1 and IQR over the runs of one regime."""
    model_config = ConfigDict(extra='forbid', frozen=True)

    regime: Regime
    median: float
    q1: float
    iqr: float
    run_count: int = Field(ge=1)


def run_stats(residuals: Sequence[float], regime: Regime, seed: int) -> RunStats:
    """
    Statistics of one run on the unfiltered residuals.

    Examples:
        >>> run_stats(range(101), Regime.GAN, 1).iqr
        50.0
    """
    arr = _values(residuals)
    q1, med, q3 = quartiles(arr)
    _, outliers = iqr_filter(arr)
    return RunStats(
        regime=regime,
        seed=seed,
        median=med,
        q1=q1,
        q3=q3,
        iqr=spread(q1, q3),
        n_samples=int(arr.size),
        n_outliers=len(outliers),
    )


def aggregate_runs(stats: Sequence[RunStats]) -> AggregateStats:
    """
    Average the runs of one regime.

    Raises:
        ValueError: Empty input or runs from different regimes
    """
    if not stats:
        raise ValueError("no runs to aggregate")
    regimes = {s.regime for s in stats}
    if len(regimes) != 1:
        raise ValueError(f"cannot aggregate mixed regimes: {sorted(r.value for r in regimes)}")
    return AggregateStats(
        regime=stats[0].regime,
        median=float(np.mean([s.median for s in stats])),
        q1=float(np.mean([s.q1 for s in stats])),
        iqr=float(np.mean([s.iqr for s in stats])),
        run_count=len(stats),
    )
