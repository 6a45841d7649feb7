# utils.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Logging setup, worker sizing, and small numeric helpers used across modules.
"""Logging, environment, and numeric helpers shared by the pipeline and CLI."""


from __future__ import annotations
import logging
import os
import pathlib
import sys
from typing import Optional

import numpy as np

LOG_FORMAT = "%(asctime)s - %(message)s"


def configure_logging(verbose: bool = False, log_name: str = "manifold_lens.log") -> None:
    """
    Send diagnostics to stderr (stdout carries JSON), plus a log file when
    MANIFOLDLENS_LOG_DIR is set. Safe to call more than once.
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    has_stderr = any(
        isinstance(h, logging.StreamHandler)
        and not isinstance(h, logging.FileHandler)
        and getattr(h, "stream", None) is sys.stderr
        for h in root_logger.handlers
    )
    if not has_stderr:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root_logger.addHandler(handler)

    log_path = get_log_path(log_name)
    if log_path is None:
        return
    for handler in root_logger.handlers:
        if isinstance(handler, logging.FileHandler):
            handler_path = pathlib.Path(getattr(handler, "baseFilename", ""))
            if handler_path and handler_path.resolve() == log_path.resolve():
                return
    file_handler = logging.FileHandler(log_path, mode="w", encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root_logger.addHandler(file_handler)


def get_log_path(log_name: str = "manifold_lens.log") -> Optional[pathlib.Path]:
    log_dir_override = os.getenv("MANIFOLDLENS_LOG_DIR")
    if not log_dir_override:
        return None
    log_dir = pathlib.Path(log_dir_override)
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir / log_name


def worker_count(override: Optional[int] = None) -> int:
    """Pool size: explicit override, else CURV_THREADS, else 1."""
    if override is not None:
        return max(1, int(override))
    raw = os.getenv("CURV_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        logging.getLogger(__name__).warning("Ignoring non-integer CURV_THREADS=%r", raw)
        return 1


def numerical_rank(matrix: np.ndarray) -> int:
    """Singular values above max(m, n) * sigma_max * 2**-52 count toward rank."""
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = max(a.shape) * s[0] * np.finfo(float).eps
    return int(np.count_nonzero(s > tol))


def ensure_parent(path: pathlib.Path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
