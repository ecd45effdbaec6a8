"""
Data formatting utilities
"""
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd

# Round-trip precision for every CSV artifact
CSV_FLOAT_FORMAT = "%.17g"


def format_number(value: Optional[float], decimals: int = 6) -> str:
    """Format number with significant digits; None and infinities spelled out"""
    if value is None:
        return "-"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.{decimals}g}"


def format_point(values: Sequence[float], decimals: int = 6) -> str:
    """(a, b, c)"""
    return "(" + ", ".join(format_number(float(v), decimals) for v in values) + ")"


def format_status(exit_code: int) -> str:
    """
    Format exit code to a run status

    Args:
        exit_code: 0, 1 or 2

    Returns:
        Status string
    """
    if exit_code == 0:
        return "ok"
    elif exit_code == 1:
        return "verification_failed"
    return "config_error"


def summary_frame(summary: Dict[str, Any]) -> pd.DataFrame:
    """Two-column (key, value) table of scalar summary entries"""
    rows = []
    for key, value in summary.items():
        if isinstance(value, float):
            text = format_number(value)
        elif isinstance(value, (list, tuple)) and all(isinstance(v, (int, float)) for v in value):
            text = format_point(value)
        else:
            text = str(value)
        rows.append({"key": key, "value": text})
    return pd.DataFrame(rows, columns=["key", "value"])


def records_frame(rows: Iterable[Dict[str, Any]], vector_columns: Sequence[str] = ()) -> pd.DataFrame:
    """
    Flatten dicts into a DataFrame, splitting list-valued columns into
    numbered columns (x -> x1, x2, ...)
    """
    flat: List[Dict[str, Any]] = []
    for row in rows:
        out = {}
        for key, value in row.items():
            if key in vector_columns and value is not None:
                for i, v in enumerate(value):
                    out[f"{key}{i + 1}"] = v
            else:
                out[key] = value
        flat.append(out)
    return pd.DataFrame(flat)


def format_table(frame: pd.DataFrame) -> str:
    """Plain-text rendering for the console"""
    if frame.empty:
        return "(empty)"
    return frame.to_string(index=False)
