"""
Base report class.

Reports turn result objects into pandas DataFrames with a fixed column order
and write them as CSV.
"""

from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import pandas as pd

from ..utils.logging import get_logger

logger = get_logger(__name__)


class BaseReport:
    """
    Base class for all reports.

    Subclasses set ``columns`` and implement ``records``. Columns listed in
    ``text_columns`` are kept as written; the rest are coerced to numbers.
    """

    columns: Sequence[str] = ()
    text_columns: Sequence[str] = ("variant", "split", "check", "tensor", "passed", "filter")

    @classmethod
    def records(cls, data: Any) -> List[Dict[str, Any]]:
        """
        Rows of the report as dictionaries.

        Raises:
            NotImplementedError: This method must be implemented by subclasses
        """
        raise NotImplementedError("Subclasses must implement records()")

    @staticmethod
    def safe_convert_to_numeric(df: pd.DataFrame, columns: List[str]) -> pd.DataFrame:
        """
        Convert columns to numeric types, unparseable values becoming NaN.

        Args:
            df: DataFrame to modify
            columns: Column names to convert

        Returns:
            Modified copy
        """
        result = df.copy()
        for col in columns:
            if col in result.columns:
                result[col] = pd.to_numeric(result[col], errors="coerce")
        return result

    @classmethod
    def to_dataframe(cls, data: Any) -> pd.DataFrame:
        """Build the report DataFrame with the class's column order."""
        df = pd.DataFrame(cls.records(data), columns=list(cls.columns))
        numeric = [c for c in cls.columns if c not in cls.text_columns]
        return cls.safe_convert_to_numeric(df, numeric)

    @classmethod
    def write_csv(cls, data: Any, path: Union[str, Path], append: bool = False) -> Path:
        """
        Write the report as CSV.

        Args:
            data: Result object
            path: Destination file; parent directories are created
            append: Append rows (without header) when the file already exists

        Returns:
            The destination path
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = cls.to_dataframe(data)
        exists = append and path.is_file()
        df.to_csv(path, mode="a" if exists else "w", header=not exists, index=False)
        logger.info(f"Wrote {len(df)} rows to {path}")
        return path
