import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

import math
from pathlib import Path

import numpy as np
import pytest

from backend.src.data_io.file_reader import FileReader
from backend.src.data_io.report_exporter import ReportExporter, emit_report
from backend.src.quantum.errors import ReportWriteError
from backend.src.runner.config_loader import build_config
from backend.src.runner.sweep_runner import SWEEP_COLUMNS, run_sweep


@pytest.fixture
def rows():
    return [
        {"n": 1, "value": 0.1, "extra": None},
        {"n": 2, "value": np.float64(1 / 3), "extra": math.nan},
        {"n": 3, "value": 2.5e-17, "extra": "x"},
    ]


class TestReportExporter:
    def test_csv_lines(self, rows, tmp_path):
        path = emit_report(rows, "csv", str(tmp_path / "out" / "r.csv"), columns=["n", "value"])
        text = Path(path).read_text(encoding="utf-8")
        lines = text.split("\n")
        assert text.endswith("\n")
        assert len(lines) - 1 == 4
        assert lines[0] == "n,value,extra"
        assert lines[2] == "2,0.33333333333333331,"

    def test_json_round_trip(self, rows, tmp_path):
        path = emit_report(rows, "json", str(tmp_path / "r.json"))
        data = FileReader.read_json(path)
        assert [r["n"] for r in data] == [1, 2, 3]
        assert data[1]["value"] == 1 / 3
        assert data[1]["extra"] is None
        assert Path(path).read_text(encoding="utf-8").endswith("\n")

    def test_sweep_rows_csv(self, tmp_path):
        rows = run_sweep(build_config({"scheme": "fixed_angle", "sweep": {"n_values": [10, 20, 30]}}))
        path = emit_report(rows, "csv", str(tmp_path / "sweep.csv"), columns=SWEEP_COLUMNS)
        df = FileReader.read_csv(path)
        assert list(df.columns) == SWEEP_COLUMNS
        assert df["p_max"].tolist() == [r.p_max for r in rows]

    def test_identical_rows_identical_bytes(self, rows, tmp_path):
        a = emit_report(rows, "csv", str(tmp_path / "a.csv"))
        b = emit_report(list(rows), "csv", str(tmp_path / "b.csv"))
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()

    def test_empty_rows(self, tmp_path):
        with pytest.raises(ReportWriteError):
            emit_report([], "csv", str(tmp_path / "x.csv"))

    def test_unknown_format(self, rows, tmp_path):
        with pytest.raises(ReportWriteError, match="format"):
            ReportExporter(rows).save(str(tmp_path / "x.xml"), "xml")

    def test_unwritable_path(self, rows, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(ReportWriteError):
            emit_report(rows, "csv", str(blocker / "sub" / "x.csv"))

