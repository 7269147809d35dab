"""
Tests for the CSV reports.
"""

import math

import pandas as pd
import pytest

from perceptivenet.difftensor import GradCheckReport, GradCheckResult
from perceptivenet.reports import (
    BaseReport,
    EvalEntry,
    FilterReport,
    GradCheckFrame,
    HistoryReport,
    LossReport,
    MetricsReport,
    PerClassIoUReport,
)
from perceptivenet.training import EpochRecord, EvalResult, TrainHistory


def result(acc, miou, per_class=(0.9, 0.5)):
    return EvalResult(pixel_acc=acc, miou=miou, per_class_iou=list(per_class), loss=0.3, n_samples=4)


@pytest.fixture
def history():
    """Fixture for a three-epoch history validated on epochs 2 and 3."""
    return TrainHistory(
        variant="perceptivenet",
        seed=0,
        records=[
            EpochRecord(1, 1.2),
            EpochRecord(2, 0.9, 0.8, 0.7, 0.6),
            EpochRecord(3, 0.7, 0.6, 0.8, 0.65),
        ],
        best_epoch=3,
        test=result(0.75, 0.62),
    )


class TestBaseReport:
    """Tests for BaseReport."""

    def test_records_not_implemented(self):
        """Test the base class has no rows."""
        with pytest.raises(NotImplementedError):
            BaseReport.records([])

    def test_safe_convert_to_numeric(self):
        """Test unparseable values become NaN."""
        df = pd.DataFrame({"a": ["1", "x"], "b": ["keep", "me"]})
        out = BaseReport.safe_convert_to_numeric(df, ["a", "missing"])
        assert out["a"].iloc[0] == 1
        assert math.isnan(out["a"].iloc[1])
        assert out["b"].tolist() == ["keep", "me"]


class TestHistoryReports:
    """Tests for HistoryReport and LossReport."""

    def test_metrics_rows(self, history):
        """Test one val row per evaluated epoch and a test row at the best epoch."""
        df = HistoryReport.to_dataframe(history)
        assert list(df.columns) == ["variant", "seed", "epoch", "split", "pixel_acc", "miou"]
        assert df["split"].tolist() == ["val", "val", "test"]
        assert df["epoch"].tolist() == [2, 3, 3]
        assert df["miou"].tolist() == [0.6, 0.65, 0.62]

    def test_ablation_blocks(self, history):
        """Test several histories are stacked in order."""
        other = TrainHistory(variant="resunet", seed=0, records=[EpochRecord(1, 1.0, 0.9, 0.5, 0.4)])
        df = HistoryReport.to_dataframe([history, other])
        assert df["variant"].tolist() == ["perceptivenet"] * 3 + ["resunet"]

    def test_loss_rows(self, history):
        """Test every epoch appears with NaN validation loss when not evaluated."""
        df = LossReport.to_dataframe(history)
        assert df["train_loss"].tolist() == [1.2, 0.9, 0.7]
        assert math.isnan(df["val_loss"].iloc[0])

    def test_write_csv_round_trip(self, history, tmp_path):
        """Test the CSV reloads with full float precision."""
        path = HistoryReport.write_csv(history, tmp_path / "out" / "metrics.csv")
        df = pd.read_csv(path, float_precision="round_trip")
        assert df["miou"].tolist() == [0.6, 0.65, 0.62]
        assert "0.59999" not in path.read_text()

    def test_append(self, history, tmp_path):
        """Test appending keeps a single header."""
        path = tmp_path / "metrics.csv"
        HistoryReport.write_csv(history, path)
        HistoryReport.write_csv(history, path, append=True)
        assert len(pd.read_csv(path)) == 6


class TestMetricsReports:
    """Tests for the evaluation, per-class, gradient-check and filter reports."""

    def test_metrics_report(self):
        """Test evaluation entries become metrics rows."""
        df = MetricsReport.to_dataframe([EvalEntry("resunet", 1, None, "test", result(0.8, 0.6))])
        assert df.iloc[0]["split"] == "test"
        assert df.iloc[0]["pixel_acc"] == 0.8
        assert math.isnan(df.iloc[0]["epoch"])

    def test_per_class_rows(self, tmp_path):
        """Test one row per class, absent classes left empty in the CSV."""
        entry = EvalEntry("perceptivenet", 0, 3, "val", result(0.8, 0.7, (0.9, math.nan, 0.5)))
        path = PerClassIoUReport.write_csv([entry], tmp_path / "per_class_iou.csv")
        df = pd.read_csv(path)
        assert df["class_id"].tolist() == [0, 1, 2]
        assert math.isnan(df["iou"].iloc[1])
        assert path.read_text().splitlines()[2] == "perceptivenet,0,val,1,"

    def test_gradcheck_frame(self):
        """Test every tensor of every report becomes a row."""
        report = GradCheckReport("mix_pool", [GradCheckResult("input", 1e-9, True, 32)])
        df = GradCheckFrame.to_dataframe([report, report])
        assert len(df) == 2
        assert df["tensor"].tolist() == ["input", "input"]
        assert bool(df["passed"].iloc[0])

    def test_filter_report_keeps_names(self):
        """Test filter names stay text."""
        rows = [{"filter": "filter_000_0", "out_channel": 0, "in_channel": 0, "dc": 0.1, "peak_frequency": 0.25}]
        df = FilterReport.to_dataframe(rows)
        assert df["filter"].tolist() == ["filter_000_0"]
        assert df["peak_frequency"].tolist() == [0.25]
