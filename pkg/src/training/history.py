"""
Per-epoch training history.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from src.storage.history_writer import HistoryWriter, load_history
from src.storage.schema import HISTORY_COLUMNS, HistoryRecord, create_history_record, parse_optional_float


@dataclass
class TrainHistory:
    """Ordered history records; epochs strictly increase."""
    records: List[HistoryRecord] = field(default_factory=list)

    def append(self, record: HistoryRecord) -> None:
        if self.records and record['epoch'] <= self.records[-1]['epoch']:
            raise ValueError(
                f"History epochs must increase: {record['epoch']} after {self.records[-1]['epoch']}"
            )
        self.records.append(record)

    def extend(self, other: 'TrainHistory') -> None:
        for rec in other.records:
            self.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def epochs(self) -> List[int]:
        return [r['epoch'] for r in self.records]

    def column(self, name: str) -> List[Optional[float]]:
        return [r[name] for r in self.records]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=HISTORY_COLUMNS)

    def write(self, path: Union[str, Path]) -> Path:
        """Write the whole history as `history.csv` (overwrites)."""
        writer = HistoryWriter(path, overwrite=True)
        writer.append_batch(self.records)
        return writer.path

    @classmethod
    def read(cls, path: Union[str, Path]) -> 'TrainHistory':
        df = load_history(path)
        history = cls()
        for row in df.itertuples(index=False):
            history.append(create_history_record(
                epoch=int(row.epoch),
                d_loss=float(row.d_loss),
                g_loss=float(row.g_loss),
                epsilon=parse_optional_float(row.epsilon),
                r_frac=parse_optional_float(row.r_frac),
            ))
        return history
