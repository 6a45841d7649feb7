# strings.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Text encoding helpers for CSV floats and command-line literals.
"""Float formatting/parsing and literal parsing helpers."""

from __future__ import annotations
import math
from typing import Iterable, List, Sequence

from .errors import DataError, FormatError
from .patterns import RE_MATRIX_COL_SEP, RE_MATRIX_ROW_SEP


def format_float(x: float) -> str:
    """Shortest decimal text that parses back to the same double."""
    return repr(float(x))


def format_row(values: Iterable[float]) -> List[str]:
    return [format_float(v) for v in values]


def parse_float_row(fields: Sequence[str], line_no: int) -> List[float]:
    """
    Parse one CSV row. Non-numeric text is a format problem; NaN/Inf parse
    fine but are rejected here as data problems.
    """
    out: List[float] = []
    for col, raw in enumerate(fields, start=1):
        text = raw.strip()
        try:
            value = float(text)
        except ValueError:
            raise FormatError(f"line {line_no}, column {col}: not a number: {text!r}") from None
        if not math.isfinite(value):
            raise DataError(f"line {line_no}, column {col}: non-finite value {text!r}")
        out.append(value)
    return out


def parse_matrix_literal(text: str) -> List[List[float]]:
    """
    Parse "2,0;0,3" into [[2.0, 0.0], [0.0, 3.0]]. Rows must be equally long.
    """
    body = (text or "").strip()
    if not body:
        raise FormatError("empty matrix literal")
    rows: List[List[float]] = []
    for r, row in enumerate(RE_MATRIX_ROW_SEP.split(body), start=1):
        rows.append(parse_float_row(RE_MATRIX_COL_SEP.split(row.strip()), r))
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"ragged matrix literal: {text!r}")
    return rows
