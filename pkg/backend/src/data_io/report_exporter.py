import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import dataclasses
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from backend.src.data_io.file_writer import FileWriter
from backend.src.quantum.errors import ReportWriteError

FORMATS = ("csv", "json")

# 17 significant digits round-trip every double exactly
FLOAT_FORMAT = "%.17g"


class ReportExporter:
    """
    Turn report rows (dicts or dataclasses) into a fixed-column table and save
    it as CSV or JSON.

    Workflow:
      1) Convert each row to a plain dict (dataclasses via dataclasses.asdict)
      2) Coerce numpy scalars to Python numbers, NaN/None to missing
      3) Order columns: `columns` first (in the given order), then any extras sorted
      4) Save via FileWriter.write_csv / FileWriter.write_json

    Notes:
      - Missing values are written as empty CSV cells and JSON null.
      - Reals are written with 17 significant digits so identical rows give
        byte-identical files.
    """

    def __init__(self, rows: Sequence[Any], columns: Optional[List[str]] = None) -> None:
        if not rows:
            raise ReportWriteError("no rows to write")
        self.rows = list(rows)
        self.columns = list(columns) if columns else None

    @staticmethod
    def _coerce_scalar(x: Any) -> Any:
        if isinstance(x, np.generic):
            x = x.item()
        if isinstance(x, float) and math.isnan(x):
            return None
        return x

    def _records(self) -> List[Dict[str, Any]]:
        records = []
        for row in self.rows:
            data = dataclasses.asdict(row) if dataclasses.is_dataclass(row) else dict(row)
            records.append({k: self._coerce_scalar(v) for k, v in data.items()})
        return records

    def _ordered_columns(self, records: List[Dict[str, Any]]) -> List[str]:
        seen = []
        for rec in records:
            for key in rec:
                if key not in seen:
                    seen.append(key)
        if self.columns is None:
            return seen
        preferred = list(self.columns)
        remaining = sorted(c for c in seen if c not in preferred)
        return preferred + remaining

    def convert(self) -> pd.DataFrame:
        records = self._records()
        return pd.DataFrame(records).reindex(columns=self._ordered_columns(records))

    def to_json_records(self) -> List[Dict[str, Any]]:
        records = self._records()
        cols = self._ordered_columns(records)
        return [{c: rec.get(c) for c in cols} for rec in records]

    def save(self, path: str, fmt: str = "csv") -> str:
        if fmt == "csv":
            FileWriter.write_csv(self.convert(), path, float_format=FLOAT_FORMAT, na_rep="")
        elif fmt == "json":
            FileWriter.write_json(self.to_json_records(), path)
        else:
            raise ReportWriteError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
        return path


def emit_report(rows: Sequence[Any], fmt: str, path: str, columns: Optional[List[str]] = None) -> str:
    """
    Write rows to path as CSV (header + one line per row) or JSON (list of objects).

    Raises:
        ReportWriteError: rows are empty, the format is unknown or the path is unwritable.
    """
    return ReportExporter(rows, columns).save(path, fmt)
