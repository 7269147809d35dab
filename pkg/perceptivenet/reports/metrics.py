"""
Evaluation, per-class IoU, gradient-check and filter reports.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from ..constants import METRICS_COLUMNS
from .base import BaseReport


@dataclass
class EvalEntry:
    """One evaluation result with the identifiers the CSVs carry."""

    variant: str
    seed: int
    epoch: Optional[int]
    split: str
    result: Any


class MetricsReport(BaseReport):
    """``variant,seed,epoch,split,pixel_acc,miou`` rows from EvalEntry objects."""

    columns = METRICS_COLUMNS

    @classmethod
    def records(cls, data: Sequence[EvalEntry]) -> List[Dict[str, Any]]:
        return [
            {
                "variant": e.variant,
                "seed": e.seed,
                "epoch": e.epoch,
                "split": e.split,
                "pixel_acc": e.result.pixel_acc,
                "miou": e.result.miou,
            }
            for e in data
        ]


class PerClassIoUReport(BaseReport):
    """One row per class; classes absent from truth and prediction have an empty IoU."""

    columns = ["variant", "seed", "split", "class_id", "iou"]

    @classmethod
    def records(cls, data: Sequence[EvalEntry]) -> List[Dict[str, Any]]:
        return [
            {"variant": e.variant, "seed": e.seed, "split": e.split, "class_id": class_id, "iou": iou}
            for e in data
            for class_id, iou in enumerate(e.result.per_class_iou)
        ]


class GradCheckFrame(BaseReport):
    """Rows of one or more GradCheckReport objects."""

    columns = ["check", "tensor", "max_relative_error", "n_elements", "passed"]

    @classmethod
    def records(cls, data: Any) -> List[Dict[str, Any]]:
        reports = [data] if hasattr(data, "to_records") else list(data)
        return [row for report in reports for row in report.to_records()]


class FilterReport(BaseReport):
    """Per-kernel DC response and peak radial frequency of a first-layer bank."""

    columns = ["filter", "out_channel", "in_channel", "dc", "peak_frequency"]

    @classmethod
    def records(cls, data: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        return list(data)
