import sys
from typing import Optional

import pandas as pd

from money_multiplier.src.utils import ensure_directories, format_float


def format_frame(df: pd.DataFrame) -> pd.DataFrame:
    """Render float columns as shortest round-trip decimals"""
    formatted = df.copy()
    for column in formatted.columns:
        if pd.api.types.is_float_dtype(formatted[column]) or formatted[column].dtype == object:
            formatted[column] = [
                format_float(v) if isinstance(v, float) or v is None else str(v)
                for v in formatted[column]
            ]
    return formatted


def save_to_csv(df: pd.DataFrame, path: Optional[str] = None):
    """Save DataFrame to CSV, or write it to stdout when no path is given."""
    text = format_frame(df).to_csv(index=False, lineterminator="\n")
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    ensure_directories([path])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def save_report(text: str, path: Optional[str] = None):
    """Save text report."""
    if not text.endswith("\n"):
        text += "\n"
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    ensure_directories([path])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
