"""
Report emission: residual table, per-run statistics and figures.

Reads the per-run outputs of an experiment directory

    <out_dir>/<regime>/seed_<n>/residuals.csv
    <out_dir>/<regime>/seed_<n>/history.csv

and writes <out_dir>/report/{table.csv, runs.json, boxplot.svg, convergence.svg}.
"""

import json
import logging
import math
import re
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from src.storage.history_writer import load_residuals
from src.training.config import REGIME_ORDER, Regime
from src.training.history import TrainHistory

from .charts import ChartGenerator
from .statistics import AggregateStats, RunStats, aggregate_runs, run_stats

logger = logging.getLogger(__name__)

TABLE_ROWS = (
    ("Median", "median"),
    ("First quartile", "q1"),
    ("Interquartile range", "iqr"),
)

RunKey = Tuple[Regime, int]

_SEED_DIR = re.compile(r"^seed_(\d+)$")


def run_dir(out_dir: Union[str, Path], regime: Regime, seed: int) -> Path:
    """Directory holding one (regime, seed) run."""
    return Path(out_dir) / regime.value / f"seed_{seed}"


def _sorted_keys(keys) -> List[RunKey]:
    return sorted(keys, key=lambda k: (REGIME_ORDER.index(k[0]), k[1]))


def _json_safe(value):
    # strict JSON has no Infinity; diverged runs are written as "inf"
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def _scan_runs(out_dir: Path, filename: str, runs: Optional[Iterable[RunKey]] = None) -> List[Tuple[RunKey, Path]]:
    wanted = None if runs is None else set(runs)
    found = []
    for regime in REGIME_ORDER:
        regime_dir = out_dir / regime.value
        if not regime_dir.is_dir():
            continue
        for child in regime_dir.iterdir():
            match = _SEED_DIR.match(child.name)
            if not match or not (child / filename).exists():
                continue
            key = (regime, int(match.group(1)))
            if wanted is None or key in wanted:
                found.append((key, child / filename))
    return sorted(found, key=lambda kp: (REGIME_ORDER.index(kp[0][0]), kp[0][1]))


def load_run_residuals(
    out_dir: Union[str, Path],
    runs: Optional[Iterable[RunKey]] = None
) -> Dict[RunKey, List[float]]:
    """
    Residuals of the evaluated runs under out_dir.

    Args:
        out_dir: Experiment directory
        runs: (regime, seed) keys to load; every run on disk when None

    Returns:
        {(regime, seed): residuals in file order}, sorted by regime then seed
    """
    return {
        key: load_residuals(path)['residual'].astype(float).tolist()
        for key, path in _scan_runs(Path(out_dir), "residuals.csv", runs)
    }


def load_run_histories(
    out_dir: Union[str, Path],
    runs: Optional[Iterable[RunKey]] = None
) -> Dict[RunKey, TrainHistory]:
    """Training histories of the runs under out_dir (all of them when runs is None)."""
    return {key: TrainHistory.read(path) for key, path in _scan_runs(Path(out_dir), "history.csv", runs)}


def summary_table(aggregates: Sequence[AggregateStats]) -> pd.DataFrame:
    """
    Median / first quartile / IQR rows by regime columns.

    Raises:
        ValueError: No aggregates, or two aggregates for one regime
    """
    if not aggregates:
        raise ValueError("No aggregate statistics to report")
    by_regime = {a.regime: a for a in aggregates}
    if len(by_regime) != len(aggregates):
        raise ValueError("Duplicate regime in aggregate statistics")

    columns = {"Statistic": [name for name, _ in TABLE_ROWS]}
    for regime in REGIME_ORDER:
        if regime in by_regime:
            agg = by_regime[regime]
            columns[regime.display_name] = [getattr(agg, field) for _, field in TABLE_ROWS]
    return pd.DataFrame(columns)


def emit_report(
    aggregates: Sequence[AggregateStats],
    per_run: Sequence[RunStats],
    residuals_per_run: Mapping[RunKey, Sequence[float]],
    out_dir: Union[str, Path],
    histories: Optional[Mapping[RunKey, TrainHistory]] = None
) -> Dict[str, Path]:
    """
    Write table.csv, runs.json, boxplot.svg and (given physics-guided
    histories) convergence.svg into out_dir.

    Args:
        aggregates: One AggregateStats per regime
        per_run: Statistics of every run
        residuals_per_run: Raw residuals keyed by (regime, seed)
        out_dir: Report directory (created)
        histories: Training histories keyed by (regime, seed)

    Returns:
        Mapping of artifact name to written path

    Raises:
        ValueError: Empty aggregates
        OSError: out_dir not writable
    """
    table = summary_table(aggregates)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    table_path = out_dir / "table.csv"
    table.to_csv(table_path, index=False, float_format='%.6g', encoding='utf-8', lineterminator='\n')
    written['table'] = table_path

    runs = sorted(per_run, key=lambda s: (REGIME_ORDER.index(s.regime), s.seed))
    runs_path = out_dir / "runs.json"
    with open(runs_path, 'w', encoding='utf-8', newline='\n') as f:
        records = [{k: _json_safe(v) for k, v in s.model_dump().items()} for s in runs]
        json.dump(records, f, indent=2, allow_nan=False)
        f.write('\n')
    written['runs'] = runs_path

    pooled: Dict[Regime, List[float]] = {}
    for key in _sorted_keys(residuals_per_run):
        pooled.setdefault(key[0], []).extend(float(r) for r in residuals_per_run[key])

    charts = ChartGenerator(out_dir)
    if any(math.isfinite(v) for values in pooled.values() for v in values):
        written['boxplot'] = charts.create_boxplot(pooled)
    elif pooled:
        logger.warning("⚠️  Every residual is non-finite; boxplot skipped")
    if histories and any(regime.physics_guided and len(h) for (regime, _), h in histories.items()):
        written['convergence'] = charts.create_convergence_chart(histories)

    logger.info(f"📁 Report written to {out_dir}")
    return written


def build_report(
    out_dir: Union[str, Path],
    report_dir: Optional[Union[str, Path]] = None,
    runs: Optional[Iterable[RunKey]] = None
) -> Dict[str, Path]:
    """
    Compute statistics for the evaluated runs under out_dir and emit the report.

    Args:
        out_dir: Experiment directory
        report_dir: Target directory (default <out_dir>/report)
        runs: (regime, seed) keys to report; other runs on disk are ignored.
            Every run on disk when None.

    Raises:
        FileNotFoundError: No residuals.csv under out_dir, or a requested
            run has not been evaluated
    """
    out_dir = Path(out_dir)
    requested = None if runs is None else _sorted_keys(set(runs))
    residuals = load_run_residuals(out_dir, requested)
    if requested is not None:
        missing = [k for k in requested if k not in residuals]
        if missing:
            names = ", ".join(f"{r.value}/seed_{s}" for r, s in missing)
            raise FileNotFoundError(f"Requested runs not evaluated under {out_dir}: {names}")
    if not residuals:
        raise FileNotFoundError(f"No evaluated runs found under {out_dir}")

    per_run = [run_stats(values, regime, seed) for (regime, seed), values in residuals.items()]
    aggregates = []
    for regime in REGIME_ORDER:
        stats = [s for s in per_run if s.regime == regime]
        if stats:
            agg = aggregate_runs(stats)
            aggregates.append(agg)
            logger.info(
                f"{regime.display_name:>10}: median {agg.median:.4g} | q1 {agg.q1:.4g} | "
                f"IQR {agg.iqr:.4g} ({agg.run_count} runs)"
            )

    histories = load_run_histories(out_dir, requested)
    target = Path(report_dir) if report_dir is not None else out_dir / "report"
    return emit_report(aggregates, per_run, residuals, target, histories)
