# curvature.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Second fundamental form by local quadratic regression; Riemann and sectional
# curvature through the Gauss equation in flat ambient space.
"""Hessian fits, Riemann tensor, sectional curvature, and the per-patch curvature report."""


from __future__ import annotations
import logging
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from . import errors, models, tangent

logger = logging.getLogger(__name__)


def feature_count(d: int) -> int:
    """Columns of the quadratic design: intercept, d linear, d(d+1)/2 quadratic."""
    return 1 + d + d * (d + 1) // 2


def _upper_pairs(d: int) -> Tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(d, k=1)
    return iu[0], iu[1]


def design_matrix(u: np.ndarray) -> np.ndarray:
    """
    Rows [1, u_1..u_d, u_1^2..u_d^2, 2u_1u_2, .., 2u_{d-1}u_d].
    With coefficients a, the Hessian is h_ii = 2a_ii and h_ij = 2a_ij.
    """
    n, d = u.shape
    ii, jj = _upper_pairs(d)
    return np.hstack([
        np.ones((n, 1)),
        u,
        u ** 2,
        2.0 * u[:, ii] * u[:, jj],
    ])


def fit_hessians(
    coords: models.LocalCoordinates,
    d: Optional[int] = None,
    *,
    ridge: float = 0.0,
) -> models.HessianStack:
    """
    Least-squares quadratic fit of every normal coordinate over the tangent
    coordinates, f(u) ~ c + g.u + 1/2 u^T H u. Minimum-norm solution (gelsd)
    when the design is rank deficient; ridge > 0 adds sqrt(ridge) rows on the
    non-intercept coefficients.
    """
    u = np.asarray(coords.tangent, dtype=float)
    f = np.asarray(coords.normal, dtype=float)
    n = u.shape[0]
    d = coords.dimension if d is None else int(d)
    if d != u.shape[1]:
        raise errors.DimensionError(f"coordinates carry {u.shape[1]} tangent columns, expected d={d}")
    if ridge < 0.0:
        raise errors.ParameterError(f"ridge must be >= 0, got {ridge}")
    p = feature_count(d)
    if n < p:
        raise errors.InsufficientSamplesError(f"{n} samples cannot fit {p} quadratic features for d={d}")

    r = f.shape[1]
    A = design_matrix(u)
    if r == 0:
        empty = np.zeros((0, d, d))
        return models.HessianStack(d, np.zeros(0), np.zeros((0, d)), empty, np.zeros(0), design_rank=p)

    A_fit, F_fit = A, f
    if ridge > 0.0:
        penalty = np.sqrt(ridge) * np.eye(p)[1:]
        A_fit = np.vstack([A, penalty])
        F_fit = np.vstack([f, np.zeros((p - 1, r))])
    coef, _, rank, _ = scipy.linalg.lstsq(A_fit, F_fit, lapack_driver="gelsd")
    rank = int(rank)
    rank_deficient = rank < p
    if rank_deficient:
        logger.warning("Quadratic design is rank deficient (rank %s < %s); using minimum-norm fit", rank, p)

    intercepts = coef[0]
    gradients = coef[1:1 + d].T
    quad = coef[1 + d:]
    hessians = np.zeros((r, d, d))
    diag = np.arange(d)
    hessians[:, diag, diag] = 2.0 * quad[:d].T
    ii, jj = _upper_pairs(d)
    off = 2.0 * quad[d:].T
    hessians[:, ii, jj] = off
    hessians[:, jj, ii] = off

    residual = A @ coef - f
    rms = np.sqrt(np.mean(residual ** 2, axis=0))
    return models.HessianStack(
        dimension=d,
        intercepts=intercepts,
        gradients=gradients,
        hessians=hessians,
        residual_rms=rms,
        design_rank=rank,
        rank_deficient=rank_deficient,
    )


NOISE_FACTOR = 10.0


def curvature_noise(h: models.HessianStack, coords: models.LocalCoordinates) -> float:
    """
    Heuristic scale below which Riemann components are indistinguishable
    from fit error: a Hessian entry is good to about rms / rho^2 (rho the
    patch radius in tangent coordinates), and each component is a sum of
    products of two entries, so the error scales with 2 * max|H| per normal.
    """
    if h.normal_count == 0 or coords.count == 0:
        return 0.0
    rho = float(np.max(np.linalg.norm(coords.tangent, axis=1)))
    if rho == 0.0:
        return 0.0
    scale = np.max(np.abs(h.hessians), axis=(1, 2))
    return float(NOISE_FACTOR * 2.0 * np.sum(scale * h.residual_rms) / rho ** 2)


def _plane_index(d: int) -> Tuple[np.ndarray, np.ndarray]:
    planes = np.array(models.plane_pairs(d), dtype=int).reshape(-1, 2)
    return planes[:, 0], planes[:, 1]


def riemann_tensor(h: models.HessianStack) -> models.RiemannTensor:
    """R_iljk = sum_a (h_ik h_lj - h_ij h_lk), kept on canonical_pairs(d)."""
    d = h.dimension
    H = h.hessians
    i, l = _plane_index(d)
    if i.size == 0:
        return models.RiemannTensor(d, np.zeros(0))
    # rows index the (i, l) plane, columns the (j, k) plane
    h_ik = H[:, i[:, None], l[None, :]]
    h_lj = H[:, l[:, None], i[None, :]]
    h_ij = H[:, i[:, None], i[None, :]]
    h_lk = H[:, l[:, None], l[None, :]]
    full = np.einsum("apq,apq->pq", h_ik, h_lj) - np.einsum("apq,apq->pq", h_ij, h_lk)
    rows, cols = np.triu_indices(i.size)
    return models.RiemannTensor(d, full[rows, cols])


def sectional_curvatures(t: models.RiemannTensor) -> models.SectionalSet:
    """
    K_ij = R(e_i, e_j, e_j, e_i) over the orthonormal tangent basis, i.e. the
    negated diagonal (p, p) canonical entries; the round sphere is positive.
    """
    d = t.dimension
    if d < 2:
        raise errors.DimensionError(f"sectional curvature needs d >= 2, got d={d}")
    rows, cols = np.triu_indices(d * (d - 1) // 2)
    return models.SectionalSet(d, -t.components[rows == cols])


def curvature_distribution(
    source: Union[models.RiemannTensor, models.SectionalSet],
    *,
    absolute: bool = False,
) -> List[float]:
    """Canonical Riemann components or sectional values, sorted non-increasing."""
    if isinstance(source, models.RiemannTensor):
        values = np.asarray(source.components, dtype=float)
    elif isinstance(source, models.SectionalSet):
        values = np.asarray(source.values, dtype=float)
    else:
        raise errors.ParameterError(f"cannot take a distribution of {type(source).__name__}")
    if absolute:
        values = np.abs(values)
    return np.sort(values)[::-1].tolist()


def patch_curvature(
    patch: models.Patch,
    theta: float = 0.90,
    residual_tol: float = 1e-8,
    *,
    dim: Optional[int] = None,
    ridge: float = 0.0,
    absolute: bool = False,
) -> models.CurvatureReport:
    """
    Full per-patch pipeline: spectrum, dimension (or the `dim` override),
    frame, local coordinates, Hessians, Riemann tensor, sectional curvature,
    sorted distributions. Errors carry the name of the failing stage.
    """
    with errors.stage("spectrum"):
        spectrum = tangent.pca_spectrum(patch)
    with errors.stage("dimension"):
        estimated = tangent.estimate_dimension(spectrum, theta)
        d = estimated if dim is None else int(dim)
    with errors.stage("frame"):
        frame = tangent.build_frame(patch, d, residual_tol)
    with errors.stage("coordinates"):
        coords = tangent.local_coordinates(patch, frame)
    with errors.stage("hessian"):
        stack = fit_hessians(coords, d, ridge=ridge)
        noise = curvature_noise(stack, coords)
    with errors.stage("riemann"):
        tensor = riemann_tensor(stack)
    with errors.stage("sectional"):
        sectional = sectional_curvatures(tensor)
    with errors.stage("distribution"):
        riemann_dist = curvature_distribution(tensor, absolute=absolute)
        sectional_dist = curvature_distribution(sectional, absolute=absolute)

    provenance = {
        "source": patch.source,
        "label": patch.label,
        "layer": patch.layer,
        "count": patch.count,
        "ambient_dim": patch.ambient_dim,
        "estimated_dimension": estimated,
        "dimension_override": dim is not None,
        "theta": theta,
        "residual_tol": residual_tol,
        "ridge": ridge,
        "absolute": absolute,
        "normal_rank": frame.normal_rank,
        "design_rank": stack.design_rank,
        "rank_deficient": stack.rank_deficient,
        "max_residual_rms": float(stack.residual_rms.max()) if stack.residual_rms.size else 0.0,
        "spectrum_total": spectrum.total,
        "curvature_noise": noise,
    }
    logger.info(
        "Curvature for %s: d=%s, normals=%s, planes=%s",
        patch.source or patch.label or "<patch>", d, frame.normal_rank, len(sectional_dist),
    )
    return models.CurvatureReport(
        dimension=d,
        riemann_distribution=riemann_dist,
        sectional_distribution=sectional_dist,
        provenance=provenance,
    )
