"""
CSV reports built on pandas DataFrames.
"""

from .base import BaseReport
from .history import HistoryReport, LossReport
from .metrics import EvalEntry, FilterReport, GradCheckFrame, MetricsReport, PerClassIoUReport

__all__ = [
    "BaseReport",
    "EvalEntry",
    "FilterReport",
    "GradCheckFrame",
    "HistoryReport",
    "LossReport",
    "MetricsReport",
    "PerClassIoUReport",
]
