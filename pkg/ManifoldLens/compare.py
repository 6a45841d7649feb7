# compare.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Euclidean statistics with affine alignment, and similar ratios of curvature distributions.
"""
Two comparison tracks for index-aligned patches from two networks:

- Euclidean: vector lengths, distance-matrix agreement, cross distances,
  ranks, and an affine fit y ~ T x + b (raw, normalized, dimension-reduced).
- Curvature: ratio curve of two sorted distributions, its least-squares
  line r = k*i + b, and the similar ratio r0 = k*n/2 + b.
"""


from __future__ import annotations
import logging
from collections import defaultdict
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.spatial.distance

from . import models, tangent
from .errors import ComparisonError, DegenerateError, ParameterError
from .utils import numerical_rank

logger = logging.getLogger(__name__)


def _check_aligned(p1: models.Patch, p2: models.Patch) -> None:
    if p1.points.shape != p2.points.shape:
        raise ComparisonError(
            f"patches are not index-aligned: {p1.count}x{p1.ambient_dim} vs {p2.count}x{p2.ambient_dim}"
        )


PAIR_BLOCK_ELEMENTS = 1 << 22


def mean_pairwise_difference(x: np.ndarray, y: np.ndarray, block_rows: Optional[int] = None) -> float:
    """
    Mean of |d_x(i, j) - d_y(i, j)| over pairs i < j, accumulated over
    row blocks of about PAIR_BLOCK_ELEMENTS distances each.
    """
    n = x.shape[0]
    if n < 2:
        return 0.0
    if block_rows is None:
        block_rows = max(1, PAIR_BLOCK_ELEMENTS // n)
    if block_rows < 1:
        raise ParameterError(f"block_rows must be >= 1, got {block_rows}")
    total = 0.0
    for start in range(0, n - 1, block_rows):
        stop = min(start + block_rows, n)
        diff = np.abs(
            scipy.spatial.distance.cdist(x[start:stop], x) - scipy.spatial.distance.cdist(y[start:stop], y)
        )
        # keep columns j > i for the global row index i = start + local row
        total += float(np.triu(diff, k=start + 1).sum())
    return total / (n * (n - 1) / 2)


def euclidean_stats(
    p1: models.Patch,
    p2: models.Patch,
    fit: Optional[models.AffineFit] = None,
) -> models.EuclideanStats:
    _check_aligned(p1, p2)
    x, y = p1.points, p2.points
    return models.EuclideanStats(
        mean_length_a=float(np.mean(np.linalg.norm(x, axis=1))),
        mean_length_b=float(np.mean(np.linalg.norm(y, axis=1))),
        mean_pairwise_difference=mean_pairwise_difference(x, y),
        mean_cross_distance=float(np.mean(np.linalg.norm(x - y, axis=1))),
        rank_a=numerical_rank(x),
        rank_b=numerical_rank(y),
        fit=fit,
    )


def normalize(patch: models.Patch) -> models.Patch:
    """Zero-mean normalization only (no variance scaling)."""
    return patch.with_points(patch.points - patch.points.mean(axis=0), normalized=True)


def fit_affine(x: models.Patch, y: models.Patch, *, procrustes: bool = False) -> models.AffineFit:
    """
    (T, b) minimizing sum ||T x_i + b - y_i||^2 by least squares on [x, 1].
    T is unconstrained; procrustes=True restricts it to scale * rotation.
    L = sqrt(mean_i ||T x_i + b - y_i||^2).
    """
    _check_aligned(x, y)
    X, Y = x.points, y.points
    n, dim = X.shape
    underdetermined = n < dim + 1
    if underdetermined:
        logger.warning("Affine fit is underdetermined (n=%s < D+1=%s); minimum-norm solution", n, dim + 1)

    if procrustes:
        mx, my = X.mean(axis=0), Y.mean(axis=0)
        xc, yc = X - mx, Y - my
        R, sigma = scipy.linalg.orthogonal_procrustes(xc, yc)
        norm2 = float(np.sum(xc ** 2))
        scale = sigma / norm2 if norm2 > 0.0 else 0.0
        T = scale * R.T
        b = my - T @ mx
        method = "procrustes"
    else:
        A = np.hstack([X, np.ones((n, 1))])
        W, _, _, _ = scipy.linalg.lstsq(A, Y, lapack_driver="gelsd")
        T = W[:dim].T
        b = W[dim]
        method = "lstsq"

    mapped = X @ T.T + b
    rmse = float(np.sqrt(np.mean(np.sum((mapped - Y) ** 2, axis=1))))
    return models.AffineFit(
        T=T,
        b=b,
        rmse=rmse,
        rank_before=numerical_rank(X),
        rank_after=numerical_rank(mapped),
        method=method,
        underdetermined=underdetermined,
    )


def euclidean_comparison(
    p1: models.Patch,
    p2: models.Patch,
    theta: float = 0.90,
    dim: Optional[int] = None,
    *,
    procrustes: bool = False,
) -> models.EuclideanComparison:
    """
    Three blocks: raw patches; zero-mean normalized patches with an affine
    fit; normalized patches reduced to d principal coordinates (each in its
    own PCA basis) with an affine fit. d is the larger estimated dimension
    unless `dim` is given.
    """
    _check_aligned(p1, p2)
    dim_a = tangent.estimate_dimension(tangent.pca_spectrum(p1), theta)
    dim_b = tangent.estimate_dimension(tangent.pca_spectrum(p2), theta)
    d = max(dim_a, dim_b) if dim is None else int(dim)
    d = min(max(d, 2), p1.count, p1.ambient_dim)

    raw = euclidean_stats(p1, p2)
    n1, n2 = normalize(p1), normalize(p2)
    normalized = euclidean_stats(n1, n2, fit_affine(n1, n2, procrustes=procrustes))
    r1, r2 = tangent.reduce_dimension(n1, d), tangent.reduce_dimension(n2, d)
    reduced = euclidean_stats(r1, r2, fit_affine(r1, r2, procrustes=procrustes))
    logger.info("Euclidean comparison: d_a=%s, d_b=%s, reduced to %s", dim_a, dim_b, d)
    return models.EuclideanComparison(raw, normalized, reduced, dim_a, dim_b, d)


def similar_ratio(
    a: Sequence[float],
    b: Sequence[float],
    eps_ratio: float = 1e-9,
    floor: float = 0.0,
) -> models.SimilarRatio:
    """
    r_i = a_i / b_i over entries with |b_i| >= max(eps_ratio * max|b|, floor),
    re-indexed 1..n; ordinary least-squares line r = k*i + b; r0 = k*n/2 + b.
    `floor` is an absolute noise level of the denominator distribution.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if a_arr.shape != b_arr.shape or a_arr.ndim != 1:
        raise ComparisonError(f"distributions differ in length: {a_arr.size} vs {b_arr.size}")
    if eps_ratio < 0.0:
        raise ParameterError(f"eps_ratio must be >= 0, got {eps_ratio}")
    if floor < 0.0:
        raise ParameterError(f"noise floor must be >= 0, got {floor}")
    scale = float(np.max(np.abs(b_arr))) if b_arr.size else 0.0
    if scale == 0.0:
        raise DegenerateError("denominator distribution is identically zero")
    keep = np.abs(b_arr) >= max(eps_ratio * scale, floor)
    filtered = int(b_arr.size - np.count_nonzero(keep))
    if filtered:
        logger.warning("Filtered %s near-zero denominator entries of %s", filtered, b_arr.size)
    ratios = a_arr[keep] / b_arr[keep]
    n = ratios.size
    if n < 2:
        raise DegenerateError(f"need at least 2 ratio entries after filtering, got {n}")

    idx = np.arange(1, n + 1, dtype=float)
    di = idx - idx.mean()
    slope = float(np.dot(di, ratios - ratios.mean()) / np.dot(di, di))
    intercept = float(ratios.mean() - slope * idx.mean())
    r0 = slope * n / 2.0 + intercept
    return models.SimilarRatio(
        ratios=ratios, indices=idx, slope=slope, intercept=intercept, r0=float(r0), filtered=filtered,
    )


def range_percentage(values: Iterable[float], lo: float = 0.8, hi: float = 1.2) -> float:
    """Fraction of r0 values strictly inside (lo, hi)."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ParameterError("range percentage of an empty list")
    if not lo < hi:
        raise ParameterError(f"range needs lo < hi, got [{lo}, {hi}]")
    return float(np.count_nonzero((arr > lo) & (arr < hi)) / arr.size)


def _overlay(a: Sequence[float], b: Sequence[float]) -> Tuple[List[float], List[float]]:
    return list(map(float, a)), list(map(float, b))


def _noise_floor(report: models.CurvatureReport) -> float:
    try:
        value = float(report.provenance.get("curvature_noise", 0.0) or 0.0)
    except (TypeError, ValueError):
        return 0.0
    return value if np.isfinite(value) and value > 0.0 else 0.0


def compare_manifolds(
    report1: models.CurvatureReport,
    report2: models.CurvatureReport,
    eps_ratio: float = 1e-9,
    *,
    noise_floor: bool = True,
) -> models.ManifoldComparison:
    """
    Similar ratios of the Riemann and sectional distributions. Different
    dimensions give a mismatch result; a distribution with too few usable
    ratio entries is listed under `degenerate` instead of raising.

    With `noise_floor`, denominators below the larger `curvature_noise` of
    the two reports are dropped as well (counted in `filtered`).
    """
    floor = max(_noise_floor(report1), _noise_floor(report2)) if noise_floor else 0.0
    prov = report1.provenance
    result = models.ManifoldComparison(
        dimension_a=report1.dimension,
        dimension_b=report2.dimension,
        layer=str(prov.get("layer", "")),
        label=str(prov.get("label", "")),
        sources=(str(prov.get("source", "")), str(report2.provenance.get("source", ""))),
    )
    if not result.dimension_match:
        logger.warning("Dimension mismatch: %s vs %s; no similar ratio", report1.dimension, report2.dimension)
        return result

    pairs = {
        "riemann": (report1.riemann_distribution, report2.riemann_distribution),
        "sectional": (report1.sectional_distribution, report2.sectional_distribution),
    }
    for name, (a, b) in pairs.items():
        result.overlays[name] = _overlay(a, b)
        try:
            ratio = similar_ratio(a, b, eps_ratio, floor)
        except DegenerateError as e:
            logger.warning("No %s similar ratio: %s", name, e.message)
            result.degenerate.append(name)
            continue
        setattr(result, name, ratio)
    return result


Comparable = Union[models.ManifoldComparison, Mapping[str, Any]]


def _payload(item: Comparable) -> Mapping[str, Any]:
    return item.to_dict() if isinstance(item, models.ManifoldComparison) else item


def range_table(
    comparisons: Iterable[Comparable],
    lo: float = 0.8,
    hi: float = 1.2,
) -> Dict[str, Dict[str, Any]]:
    """Per layer: how many comparisons, and the share of Riemann/sectional r0 inside (lo, hi)."""
    grouped: Dict[str, Dict[str, List[float]]] = defaultdict(lambda: {"riemann": [], "sectional": [], "all": []})
    for item in comparisons:
        data = _payload(item)
        bucket = grouped[str(data.get("layer", ""))]
        bucket["all"].append(1.0)
        for name in ("riemann", "sectional"):
            entry = data.get(name)
            if entry:
                bucket[name].append(float(entry["r0"]))

    table: Dict[str, Dict[str, Any]] = {}
    for layer in sorted(grouped):
        bucket = grouped[layer]
        row: Dict[str, Any] = {"count": len(bucket["all"])}
        for name in ("riemann", "sectional"):
            values = bucket[name]
            row[name] = range_percentage(values, lo, hi) if values else None
            row[f"{name}_count"] = len(values)
        table[layer] = row
    return table


def dimension_table(reports: Iterable[models.CurvatureReport]) -> List[Dict[str, Any]]:
    """Mean/max/min dimension per (layer, label) over curvature reports."""
    grouped: Dict[Tuple[str, str], List[int]] = defaultdict(list)
    for report in reports:
        key = (str(report.provenance.get("layer", "")), str(report.provenance.get("label", "")))
        grouped[key].append(report.provenance.get("estimated_dimension", report.dimension))
    rows = []
    for layer, label in sorted(grouped):
        summary = tangent.dimension_summary(grouped[(layer, label)])
        rows.append({"layer": layer, "label": label, **summary})
    return rows
