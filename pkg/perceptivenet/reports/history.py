"""
Training history reports.
"""

from typing import Any, Dict, Iterable, List

from ..constants import METRICS_COLUMNS, Splits
from .base import BaseReport


class HistoryReport(BaseReport):
    """
    Metrics CSV of a run: one ``val`` row per evaluated epoch and a final ``test`` row.
    Accepts one TrainHistory or an iterable of them (ablation runs).
    """

    columns = METRICS_COLUMNS

    @classmethod
    def records(cls, data: Any) -> List[Dict[str, Any]]:
        histories = [data] if hasattr(data, "records") else list(data)
        rows = []
        for history in histories:
            for record in history.records:
                if record.evaluated:
                    rows.append({
                        "variant": history.variant,
                        "seed": history.seed,
                        "epoch": record.epoch,
                        "split": Splits.VAL,
                        "pixel_acc": record.val_pixel_acc,
                        "miou": record.val_miou,
                    })
            if history.test is not None:
                rows.append({
                    "variant": history.variant,
                    "seed": history.seed,
                    "epoch": history.best_epoch,
                    "split": Splits.TEST,
                    "pixel_acc": history.test.pixel_acc,
                    "miou": history.test.miou,
                })
        return rows


class LossReport(BaseReport):
    """Per-epoch training and validation loss."""

    columns = ["variant", "seed", "epoch", "train_loss", "val_loss"]

    @classmethod
    def records(cls, data: Any) -> List[Dict[str, Any]]:
        histories: Iterable = [data] if hasattr(data, "records") else data
        return [
            {
                "variant": history.variant,
                "seed": history.seed,
                "epoch": record.epoch,
                "train_loss": record.train_loss,
                "val_loss": record.val_loss,
            }
            for history in histories
            for record in history.records
        ]
