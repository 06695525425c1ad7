"""
CSV persistence for training histories and evaluation residuals.
"""

import csv
from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd

from .schema import HISTORY_COLUMNS, RESIDUAL_COLUMNS, HistoryRecord, ResidualRecord


class HistoryWriter:
    """
    Appends history records to one run's `history.csv`.

    The header is written when the file is created; every append opens,
    writes and closes the file so a crashed run keeps everything written
    before the crash.
    """

    def __init__(self, path: Union[str, Path], overwrite: bool = False):
        """
        Initialize history writer.

        Args:
            path: Target CSV file (parent directories are created)
            overwrite: Remove an existing file first
        """
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if overwrite and self.path.exists():
            self.path.unlink()

    def _write(self, records: Iterable[HistoryRecord]) -> None:
        write_header = not self.path.exists()
        with open(self.path, "a", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=HISTORY_COLUMNS, lineterminator="\n")
            if write_header:
                writer.writeheader()
            writer.writerows(records)

    def append(self, record: HistoryRecord) -> None:
        """Append one epoch record."""
        self._write([record])

    def append_batch(self, records: List[HistoryRecord]) -> None:
        """Append many records in one file open."""
        if not records:
            if not self.path.exists():
                self._write([])
            return
        self._write(records)


def load_history(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read a history CSV; empty epsilon/r_frac cells become NaN.

    Raises:
        FileNotFoundError: Missing file
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No history file found: {path}")
    return pd.read_csv(path, float_precision='round_trip')


def write_residuals(path: Union[str, Path], records: List[ResidualRecord]) -> Path:
    """Write evaluation residuals as CSV (overwrites)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(records, columns=RESIDUAL_COLUMNS)
    df.to_csv(path, index=False, float_format='%.17g', encoding='utf-8', lineterminator='\n')
    return path


def load_residuals(path: Union[str, Path]) -> pd.DataFrame:
    """
    Raises:
        FileNotFoundError: Missing file
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No residuals file found: {path}")
    return pd.read_csv(path, float_precision='round_trip')
