import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))

import json
import pandas as pd
from typing import Any

from backend.src.quantum.errors import ReportWriteError


class FileWriter:
    """
    Utility class for writing reports. Every writer creates the parent
    directory, writes UTF-8 with '\\n' line endings and raises
    ReportWriteError when the path cannot be written.
    """

    @staticmethod
    def _ensure_parent(path: str) -> None:
        try:
            os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        except OSError as exc:
            raise ReportWriteError(f"cannot create directory for {path}: {exc}") from exc

    @staticmethod
    def write_json(data: Any, path: str, ensure_ascii: bool = False, pretty: bool = True) -> None:
        """
        Write any JSON-serializable object (dict or list) to a file, with a trailing newline.
        """
        FileWriter._ensure_parent(path)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(data, f, ensure_ascii=ensure_ascii, indent=2 if pretty else None)
                f.write("\n")
        except OSError as exc:
            raise ReportWriteError(f"cannot write {path}: {exc}") from exc

    @staticmethod
    def write_csv(df: "pd.DataFrame", path: str, **kwargs) -> None:
        """
        Write a pandas DataFrame to a CSV file.

        Args:
            df: DataFrame to write.
            path: Output file path.
            **kwargs: Additional keyword arguments forwarded to pandas.DataFrame.to_csv.

        Notes:
            - Defaults to plain UTF-8, index=False and '\\n' line endings so that
              identical frames give byte-identical files.
        """
        FileWriter._ensure_parent(path)
        kwargs.setdefault("index", False)
        kwargs.setdefault("encoding", "utf-8")
        kwargs.setdefault("lineterminator", "\n")
        try:
            df.to_csv(path, **kwargs)
        except OSError as exc:
            raise ReportWriteError(f"cannot write {path}: {exc}") from exc
