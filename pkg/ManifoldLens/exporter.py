# exporter.py
# Copyright (c) 2026 ManifoldLens contributors
#
# JSON and CSV emission for reports, comparisons, manifests, and plotted curves.
"""Builders for versioned JSON payloads and writers for the CSV series behind the plots."""


from __future__ import annotations
import csv
import io
import json
import logging
import pathlib
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from . import models
from .errors import StorageError
from .lens_types import SCHEMA_VERSION, Manifest, ManifestEntry
from .strings import format_float
from .utils import ensure_parent

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

KIND_REPORT = "curvature_report"
KIND_COMPARISON = "curvature_comparison"
KIND_EUCLID = "euclidean_comparison"
KIND_DIMENSION = "dimension_estimate"
KIND_SYNTH = "synth_patch"
KIND_MANIFEST = "derivative_manifest"
KIND_TABLE = "range_table"


def envelope(kind: str, body: Dict[str, Any]) -> Dict[str, Any]:
    """Every JSON output starts with schema_version and kind."""
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_text(text: str, path: PathLike) -> pathlib.Path:
    p = pathlib.Path(path)
    try:
        ensure_parent(p)
        p.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot write {p}: {e}") from e
    return p


def write_json(payload: Dict[str, Any], path: PathLike) -> pathlib.Path:
    p = write_text(dumps(payload), path)
    logger.info("Wrote %s: %s", payload.get("kind", "json"), p)
    return p


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str)) else format_float(v) for v in row])
    return buf.getvalue()


# ---------- Payloads ----------
def report_payload(report: models.CurvatureReport) -> Dict[str, Any]:
    return envelope(KIND_REPORT, report.to_dict())


def comparison_payload(comparison: models.ManifoldComparison) -> Dict[str, Any]:
    return envelope(KIND_COMPARISON, comparison.to_dict())


def euclid_payload(comparison: models.EuclideanComparison, sources: Sequence[str] = ("", "")) -> Dict[str, Any]:
    body = comparison.to_dict()
    body["sources"] = list(sources)
    return envelope(KIND_EUCLID, body)


def dimension_payload(
    spectrum: models.Spectrum,
    dimension: int,
    theta: float,
    source: str = "",
) -> Dict[str, Any]:
    return envelope(KIND_DIMENSION, {
        "dimension": dimension,
        "theta": theta,
        "source": source,
        "spectrum": spectrum.to_dict(),
    })


def synth_payload(spec_dict: Dict[str, Any], oracle_dict: Dict[str, Any], patch_file: str) -> Dict[str, Any]:
    return envelope(KIND_SYNTH, {"spec": spec_dict, "oracle": oracle_dict, "patch_file": patch_file})


def table_payload(
    ranges: Dict[str, Dict[str, Any]],
    dimensions: List[Dict[str, Any]],
    lo: float,
    hi: float,
) -> Dict[str, Any]:
    return envelope(KIND_TABLE, {"range": [lo, hi], "layers": ranges, "dimensions": dimensions})


# ---------- Manifests ----------
def manifest_entry(ks: Sequence[int], file: str, truncation_error: float, channel_errors: Sequence[float]) -> ManifestEntry:
    return {
        "ks": [int(k) for k in ks],
        "file": file,
        "truncation_error": float(truncation_error),
        "channel_errors": [float(e) for e in channel_errors],
    }


def build_manifest(
    source: str,
    mode: str,
    k_max: int,
    channels: int,
    raw: bool,
    images: List[ManifestEntry],
) -> Manifest:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND_MANIFEST,
        "source": source,
        "mode": mode,
        "k_max": k_max,
        "channels": channels,
        "count": len(images),
        "raw": raw,
        "images": images,
    }


# ---------- CSV series ----------
def write_distribution_csv(values: Sequence[float], path: PathLike) -> pathlib.Path:
    """index,value with 1-based indices."""
    return write_text(_csv_text(("index", "value"), ((i, v) for i, v in enumerate(values, start=1))), path)


def write_overlay_csv(a: Sequence[float], b: Sequence[float], path: PathLike) -> pathlib.Path:
    """index,a,b: two sorted distributions on a shared axis."""
    rows = ((i, x, y) for i, (x, y) in enumerate(zip(a, b), start=1))
    return write_text(_csv_text(("index", "a", "b"), rows), path)


def write_ratio_csv(ratio: models.SimilarRatio, path: PathLike) -> pathlib.Path:
    """index,ratio,fitted for the ratio curve and its least-squares line."""
    rows = zip((int(i) for i in ratio.indices), ratio.ratios, ratio.fitted())
    return write_text(_csv_text(("index", "ratio", "fitted"), rows), path)


def write_comparison_csvs(
    comparison: models.ManifoldComparison,
    directory: PathLike,
    stem: Optional[str] = None,
) -> List[pathlib.Path]:
    """Overlay and ratio-curve CSVs for each compared distribution."""
    out_dir = pathlib.Path(directory)
    stem = stem or "comparison"
    written: List[pathlib.Path] = []
    for name, (a, b) in comparison.overlays.items():
        written.append(write_overlay_csv(a, b, out_dir / f"{stem}.{name}.overlay.csv"))
        ratio = getattr(comparison, name)
        if ratio is not None:
            written.append(write_ratio_csv(ratio, out_dir / f"{stem}.{name}.ratio.csv"))
    return written
