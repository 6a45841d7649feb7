# models.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Data models for patches, images, frames, curvature tensors, and comparison results.
"""Domain models for patches, images, tangent frames, curvature, and comparisons."""


from __future__ import annotations
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import DataError
from .lens_types import PatchMeta


def _frozen_array(values: Any, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DataError(f"{what}: expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def plane_pairs(d: int) -> List[Tuple[int, int]]:
    """Ordered index pairs i < j, lexicographic; one per coordinate plane."""
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def canonical_pairs(d: int) -> List[Tuple[int, int]]:
    """
    (p, q) ranks into plane_pairs(d) with p <= q: one representative of each
    orbit of R_iljk under the antisymmetries and the pair exchange.
    """
    count = d * (d - 1) // 2
    return [(p, q) for p in range(count) for q in range(p, count)]


def canonical_count(d: int) -> int:
    planes = d * (d - 1) // 2
    return planes * (planes + 1) // 2


@dataclass(frozen=True, eq=False)
class Patch:
    """n points in R^D around a designated base point (row base_index)."""
    points: np.ndarray
    base_index: int = 0
    label: str = ""
    layer: str = ""
    source: str = ""
    normalized: bool = False

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise DataError(f"patch needs a non-empty 2-d point array, got shape {pts.shape}")
        n, dim = pts.shape
        if n < 2:
            raise DataError(f"patch needs at least 2 points, got {n}")
        if dim < 2:
            raise DataError(f"patch ambient dimension must be >= 2, got {dim}")
        if not np.all(np.isfinite(pts)):
            raise DataError("patch contains non-finite coordinates")
        if not 0 <= int(self.base_index) < n:
            raise DataError(f"base_index {self.base_index} outside 0..{n - 1}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "base_index", int(self.base_index))

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def base(self) -> np.ndarray:
        return self.points[self.base_index]

    def with_points(self, points: Any, **changes: Any) -> "Patch":
        return replace(self, points=points, **changes)

    def meta(self) -> PatchMeta:
        return {
            "ambient_dim": self.ambient_dim,
            "count": self.count,
            "base_index": self.base_index,
            "label": self.label,
            "layer": self.layer,
            "source": self.source,
            "normalized": self.normalized,
        }

    def __repr__(self) -> str:
        return (
            f"Patch(n={self.count}, D={self.ambient_dim}, base_index={self.base_index}, "
            f"label={self.label!r}, layer={self.layer!r})"
        )


@dataclass(frozen=True, eq=False)
class ImageMatrix:
    """One real matrix per colour channel (1 = grayscale, 3 = RGB), nominal range 0..255."""
    channels: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        chans = tuple(_frozen_array(c, 2, "image channel") for c in self.channels)
        if len(chans) not in (1, 3):
            raise DataError(f"image must have 1 or 3 channels, got {len(chans)}")
        shape = chans[0].shape
        if shape[0] < 1 or shape[1] < 1:
            raise DataError(f"image must be at least 1x1, got {shape}")
        if any(c.shape != shape for c in chans):
            raise DataError("image channels differ in shape")
        if not all(np.all(np.isfinite(c)) for c in chans):
            raise DataError("image contains non-finite values")
        object.__setattr__(self, "channels", chans)

    @property
    def rows(self) -> int:
        return int(self.channels[0].shape[0])

    @property
    def cols(self) -> int:
        return int(self.channels[0].shape[1])

    @property
    def channel_count(self) -> int:
        return len(self.channels)

    @property
    def singular_count(self) -> int:
        return min(self.rows, self.cols)

    def stacked(self) -> np.ndarray:
        """rows x cols x channels view for writers."""
        return np.stack(self.channels, axis=-1)

    def __repr__(self) -> str:
        return f"ImageMatrix({self.rows}x{self.cols}, channels={self.channel_count})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Covariance eigenvalues, non-increasing, tiny negatives clamped to 0."""
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _frozen_array(self.eigenvalues, 1, "spectrum"))

    @property
    def total(self) -> float:
        return float(np.sum(self.eigenvalues))

    def to_dict(self) -> Dict[str, Any]:
        return {"eigenvalues": self.eigenvalues.tolist(), "total": self.total}

    def __repr__(self) -> str:
        return f"Spectrum(count={self.eigenvalues.size}, total={self.total:.6g})"


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Base point, d orthonormal tangent rows, r orthonormal residual-normal rows."""
    base: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray

    def __post_init__(self) -> None:
        base = _frozen_array(self.base, 1, "frame base")
        dim = base.size
        tangent = _frozen_array(np.reshape(self.tangent, (-1, dim)), 2, "tangent basis")
        normal = _frozen_array(np.reshape(self.normal, (-1, dim)), 2, "normal basis")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "tangent", tangent)
        object.__setattr__(self, "normal", normal)

    @property
    def dimension(self) -> int:
        return int(self.tangent.shape[0])

    @property
    def normal_rank(self) -> int:
        return int(self.normal.shape[0])

    @property
    def ambient_dim(self) -> int:
        return int(self.base.size)

    def __repr__(self) -> str:
        return f"TangentFrame(d={self.dimension}, r={self.normal_rank}, D={self.ambient_dim})"


@dataclass(frozen=True, eq=False)
class LocalCoordinates:
    """Per-point tangent coordinates u (n x d) and normal coordinates f (n x r)."""
    tangent: np.ndarray
    normal: np.ndarray
    base_index: int = 0

    @property
    def count(self) -> int:
        return int(self.tangent.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.tangent.shape[1])


@dataclass(frozen=True, eq=False)
class HessianStack:
    """Quadratic fit per normal direction: f(u) ~ c + g.u + 1/2 u^T H u."""
    dimension: int
    intercepts: np.ndarray
    gradients: np.ndarray
    hessians: np.ndarray
    residual_rms: np.ndarray
    design_rank: int = 0
    rank_deficient: bool = False

    def __post_init__(self) -> None:
        d = int(self.dimension)
        hess = np.array(self.hessians, dtype=float).reshape(-1, d, d)
        if not np.all(np.isfinite(hess)):
            raise DataError("Hessian stack contains non-finite entries")
        if hess.size and np.max(np.abs(hess - np.transpose(hess, (0, 2, 1)))) > 1e-10:
            raise DataError("Hessian stack is not symmetric")
        hess.setflags(write=False)
        object.__setattr__(self, "hessians", hess)
        object.__setattr__(self, "gradients", np.array(self.gradients, dtype=float).reshape(-1, d))
        object.__setattr__(self, "intercepts", np.array(self.intercepts, dtype=float).reshape(-1))
        object.__setattr__(self, "residual_rms", np.array(self.residual_rms, dtype=float).reshape(-1))

    @property
    def normal_count(self) -> int:
        return int(self.hessians.shape[0])

    def __repr__(self) -> str:
        return f"HessianStack(d={self.dimension}, normals={self.normal_count})"


@dataclass(frozen=True, eq=False)
class RiemannTensor:
    """Canonical components R_iljk, ordered as canonical_pairs(dimension)."""
    dimension: int
    components: np.ndarray

    def __post_init__(self) -> None:
        comps = _frozen_array(self.components, 1, "riemann components")
        if comps.size != canonical_count(self.dimension):
            raise DataError(
                f"d={self.dimension} needs {canonical_count(self.dimension)} components, got {comps.size}"
            )
        object.__setattr__(self, "components", comps)

    def full(self) -> np.ndarray:
        """Rebuild the d^4 array from R_iljk = -R_lijk = -R_ilkj = R_jkil."""
        d = self.dimension
        planes = plane_pairs(d)
        out = np.zeros((d, d, d, d))
        for value, (p, q) in zip(self.components, canonical_pairs(d)):
            i, l = planes[p]
            j, k = planes[q]
            for a, b, c, e in ((i, l, j, k), (j, k, i, l)):
                out[a, b, c, e] = value
                out[b, a, c, e] = -value
                out[a, b, e, c] = -value
                out[b, a, e, c] = value
        return out

    def component(self, i: int, l: int, j: int, k: int) -> float:
        if i == l or j == k:
            return 0.0
        sign = 1.0
        if i > l:
            i, l, sign = l, i, -sign
        if j > k:
            j, k, sign = k, j, -sign
        planes = plane_pairs(self.dimension)
        p, q = planes.index((i, l)), planes.index((j, k))
        if p > q:
            p, q = q, p
        return sign * float(self.components[canonical_pairs(self.dimension).index((p, q))])

    def __repr__(self) -> str:
        return f"RiemannTensor(d={self.dimension}, components={self.components.size})"


@dataclass(frozen=True, eq=False)
class SectionalSet:
    """K_ij for the coordinate planes i < j, ordered as plane_pairs(dimension)."""
    dimension: int
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, 1, "sectional curvatures"))

    @property
    def planes(self) -> List[Tuple[int, int]]:
        return plane_pairs(self.dimension)

    def __repr__(self) -> str:
        return f"SectionalSet(d={self.dimension}, planes={self.values.size})"


@dataclass(eq=False)
class CurvatureReport:
    """Sorted curvature distributions for one patch plus where they came from."""
    dimension: int
    riemann_distribution: List[float]
    sectional_distribution: List[float]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        d = int(self.dimension)
        if d < 2:
            raise DataError(f"curvature report needs dimension >= 2, got {d}")
        self.riemann_distribution = [float(v) for v in self.riemann_distribution]
        self.sectional_distribution = [float(v) for v in self.sectional_distribution]
        if len(self.riemann_distribution) != canonical_count(d):
            raise DataError(f"riemann distribution length {len(self.riemann_distribution)} does not match d={d}")
        if len(self.sectional_distribution) != d * (d - 1) // 2:
            raise DataError(f"sectional distribution length {len(self.sectional_distribution)} does not match d={d}")
        for name, dist in (("riemann", self.riemann_distribution), ("sectional", self.sectional_distribution)):
            if any(a < b for a, b in zip(dist, dist[1:])):
                raise DataError(f"{name} distribution is not non-increasing")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension": self.dimension,
            "riemann_distribution": list(self.riemann_distribution),
            "sectional_distribution": list(self.sectional_distribution),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CurvatureReport":
        try:
            return cls(
                dimension=int(data["dimension"]),
                riemann_distribution=data["riemann_distribution"],
                sectional_distribution=data["sectional_distribution"],
                provenance=dict(data.get("provenance", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"not a curvature report: {e}") from e

    def __repr__(self) -> str:
        return (
            f"CurvatureReport(d={self.dimension}, riemann={len(self.riemann_distribution)}, "
            f"sectional={len(self.sectional_distribution)})"
        )


@dataclass(eq=False)
class AffineFit:
    """y ~ T x + b over index-aligned points, with RMSE and rank before/after."""
    T: np.ndarray
    b: np.ndarray
    rmse: float
    rank_before: int
    rank_after: int
    method: str = "lstsq"
    underdetermined: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "rmse": self.rmse,
            "rank_before": self.rank_before,
            "rank_after": self.rank_after,
            "underdetermined": self.underdetermined,
            "translation_norm": float(np.linalg.norm(self.b)),
        }


@dataclass(eq=False)
class EuclideanStats:
    """Lengths, distance-matrix agreement, cross distances, ranks (and an optional fit)."""
    mean_length_a: float
    mean_length_b: float
    mean_pairwise_difference: float
    mean_cross_distance: float
    rank_a: int
    rank_b: int
    fit: Optional[AffineFit] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "mean_length_a": self.mean_length_a,
            "mean_length_b": self.mean_length_b,
            "mean_pairwise_difference": self.mean_pairwise_difference,
            "mean_cross_distance": self.mean_cross_distance,
            "rank_a": self.rank_a,
            "rank_b": self.rank_b,
        }
        if self.fit is not None:
            out["fit"] = self.fit.to_dict()
        return out


@dataclass(eq=False)
class SimilarRatio:
    """Ratio curve a_i / b_i, its least-squares line r = k*i + b, and r0 = k*n/2 + b."""
    ratios: np.ndarray
    indices: np.ndarray
    slope: float
    intercept: float
    r0: float
    filtered: int = 0

    @property
    def n(self) -> int:
        return int(self.ratios.size)

    def fitted(self) -> np.ndarray:
        return self.slope * self.indices + self.intercept

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r0": self.r0,
            "slope": self.slope,
            "intercept": self.intercept,
            "n": self.n,
            "filtered": self.filtered,
        }


@dataclass(eq=False)
class EuclideanComparison:
    """Raw, zero-mean normalized, and dimension-reduced statistics for one patch pair."""
    raw: EuclideanStats
    normalized: EuclideanStats
    reduced: EuclideanStats
    dimension_a: int
    dimension_b: int
    reduced_dimension: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension_a": self.dimension_a,
            "dimension_b": self.dimension_b,
            "reduced_dimension": self.reduced_dimension,
            "raw": self.raw.to_dict(),
            "normalized": self.normalized.to_dict(),
            "reduced": self.reduced.to_dict(),
        }


@dataclass(eq=False)
class ManifoldComparison:
    """Similar ratios of two curvature reports plus the overlaid distributions."""
    dimension_a: int
    dimension_b: int
    riemann: Optional[SimilarRatio] = None
    sectional: Optional[SimilarRatio] = None
    degenerate: List[str] = field(default_factory=list)
    overlays: Dict[str, Tuple[List[float], List[float]]] = field(default_factory=dict)
    layer: str = ""
    label: str = ""
    sources: Tuple[str, str] = ("", "")

    @property
    def dimension_match(self) -> bool:
        return self.dimension_a == self.dimension_b

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension_a": self.dimension_a,
            "dimension_b": self.dimension_b,
            "dimension_match": self.dimension_match,
            "layer": self.layer,
            "label": self.label,
            "sources": list(self.sources),
            "riemann": self.riemann.to_dict() if self.riemann else None,
            "sectional": self.sectional.to_dict() if self.sectional else None,
            "degenerate": list(self.degenerate),
        }
