# errors.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Exception hierarchy and pipeline stage tagging.
"""Typed errors raised by parsers, estimators, and comparisons."""

from __future__ import annotations
from contextlib import contextmanager
from typing import Iterator, Optional

import numpy as np


class LensError(Exception):
    """Base class; `stage` names the pipeline step that failed, when known."""

    def __init__(self, message: str, stage: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


class FormatError(LensError):
    """Malformed file content (ragged CSV, bad header, truncated payload)."""


class UnsupportedFormatError(FormatError):
    """Well-formed input in a format we do not read (e.g. PBM, PNG)."""


class DataError(LensError):
    """Values that violate a type invariant (non-finite, too few points, ...)."""


class ParameterError(LensError):
    """Argument outside its documented range."""


class DimensionError(LensError):
    """Requested dimension is not supported by the data."""


class InsufficientSamplesError(LensError):
    """Fewer samples than regression features."""


class DegenerateError(LensError):
    """Input carries no usable signal (zero mass, all-zero mask, no ratios)."""


class ComparisonError(LensError):
    """Two inputs cannot be compared (shape or alignment mismatch)."""


class StorageError(LensError):
    """File could not be read or written."""


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag errors raised inside the block with `name` (first tag wins)."""
    try:
        yield
    except LensError as e:
        if e.stage is None:
            e.stage = name
        raise
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as e:
        raise DataError(str(e), stage=name) from e
