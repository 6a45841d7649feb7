# tangent.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Local PCA: intrinsic dimension and the tangent/normal frame at a patch's base point.
"""PCA spectrum, dimension estimate, and the orthonormal frame anchored at the base point."""


from __future__ import annotations
import logging
from typing import Dict, Iterable, Tuple

import numpy as np
import scipy.linalg

from . import models
from .errors import DegenerateError, DimensionError, ParameterError

logger = logging.getLogger(__name__)

EIGEN_CLAMP = 1e-12


def _centered_svd(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    centered = points - points.mean(axis=0)
    _, s, vt = scipy.linalg.svd(centered, full_matrices=False)
    return s, vt


def _rank_from_singular(s: np.ndarray, shape: Tuple[int, int]) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    tol = max(shape) * s[0] * np.finfo(float).eps
    return int(np.count_nonzero(s > tol))


def pca_spectrum(patch: models.Patch) -> models.Spectrum:
    """
    Covariance eigenvalues of the mean-centered patch, descending.
    Only min(n-1, D) values are kept; the rest are structurally zero.

    Values at or below EIGEN_CLAMP * lambda_max are set to exactly 0.0. This
    is a noise floor, not just a clamp of negatives: the roundoff spectrum of
    a rank-deficient patch (about eps^2 * lambda_max) reads as zero, so
    nonzero counts give the numerical rank. Genuine directions weaker than
    1e-12 of the leading one are dropped with it.
    """
    n, dim = patch.points.shape
    s, _ = _centered_svd(patch.points)
    eig = (s ** 2) / (n - 1)
    eig = eig[: min(n - 1, dim)]
    if eig.size and eig[0] > 0.0:
        eig = np.where(eig <= EIGEN_CLAMP * eig[0], 0.0, eig)
    else:
        eig = np.zeros_like(eig)
    return models.Spectrum(eig)


def estimate_dimension(spectrum: models.Spectrum, theta: float = 0.90) -> int:
    """Smallest d whose leading eigenvalues hold at least theta of the total mass."""
    if not 0.0 < theta <= 1.0:
        raise ParameterError(f"theta must lie in (0, 1], got {theta}")
    cum = np.cumsum(spectrum.eigenvalues)
    total = float(cum[-1]) if cum.size else 0.0
    if total <= 0.0:
        raise DegenerateError("spectrum has zero total mass (all points coincide)")
    return int(np.argmax(cum >= theta * total)) + 1


def build_frame(patch: models.Patch, d: int, residual_tol: float = 1e-8) -> models.TangentFrame:
    """
    Tangent basis: the top-d principal directions of the mean-centered patch.
    Normal basis: principal directions of the residuals (points relative to
    the base, minus their tangent projection) whose singular value exceeds
    residual_tol times the largest one.

    Tangent vectors t_2..t_d are oriented so that sum(u_1**3 * u_j) >= 0.
    Residual directions below max(n, D) * eps * sigma_max(patch - base) are
    numerical noise and dropped, so a flat patch has no normal directions.
    """
    if not 0.0 <= residual_tol < 1.0:
        raise ParameterError(f"residual_tol must lie in [0, 1), got {residual_tol}")
    points = patch.points
    n, dim = points.shape
    s, vt = _centered_svd(points)
    rank = _rank_from_singular(s, points.shape)
    if d < 1 or d > min(n - 1, dim):
        raise DimensionError(f"dimension d={d} outside 1..{min(n - 1, dim)} for n={n}, D={dim}")
    if d > rank:
        raise DimensionError(f"dimension d={d} exceeds the patch rank {rank}")

    base = points[patch.base_index]
    delta = points - base
    tangent = vt[:d].copy()

    u = delta @ tangent.T
    for j in range(1, d):
        if np.sum(u[:, 0] ** 3 * u[:, j]) < 0.0:
            tangent[j] = -tangent[j]
            u[:, j] = -u[:, j]

    residual = delta - u @ tangent
    _, rs, rvt = scipy.linalg.svd(residual, full_matrices=False)
    scale = scipy.linalg.norm(delta, 2) if delta.any() else 0.0
    floor = max(n, dim) * np.finfo(float).eps * scale
    if rs.size == 0 or rs[0] <= floor:
        normal = np.zeros((0, dim))
    else:
        cut = max(residual_tol * rs[0], floor)
        normal = rvt[rs > cut]
        # project out tangent leakage and re-orthonormalize
        normal = normal - (normal @ tangent.T) @ tangent
        q, _ = scipy.linalg.qr(normal.T, mode="economic")
        normal = q.T

    frame = models.TangentFrame(base=base, tangent=tangent, normal=normal)
    logger.debug("Built frame %r (rank=%s, residual sigma_max=%.3g)", frame, rank, rs[0] if rs.size else 0.0)
    return frame


def local_coordinates(patch: models.Patch, frame: models.TangentFrame) -> models.LocalCoordinates:
    if frame.ambient_dim != patch.ambient_dim:
        raise DimensionError(f"frame lives in R^{frame.ambient_dim}, patch in R^{patch.ambient_dim}")
    delta = patch.points - frame.base
    u = delta @ frame.tangent.T
    f = delta @ frame.normal.T
    return models.LocalCoordinates(tangent=u, normal=f, base_index=patch.base_index)


def dimension_summary(dims: Iterable[int]) -> Dict[str, float]:
    """Mean/max/min estimated dimension over many patches of one class and layer."""
    values = np.asarray(list(dims), dtype=float)
    if values.size == 0:
        raise ParameterError("dimension summary needs at least one value")
    return {
        "count": int(values.size),
        "mean": float(values.mean()),
        "max": int(values.max()),
        "min": int(values.min()),
    }


def reduce_dimension(patch: models.Patch, d: int) -> models.Patch:
    """The n points in the patch's own top-d principal coordinates (mean-centered)."""
    n, dim = patch.points.shape
    if d < 2 or d > min(n, dim):
        raise DimensionError(f"reduced dimension d={d} outside 2..{min(n, dim)}")
    _, vt = _centered_svd(patch.points)
    coords = (patch.points - patch.points.mean(axis=0)) @ vt[:d].T
    logger.debug("Reduced %r to d=%s", patch, d)
    return patch.with_points(coords, normalized=True)
