# synth.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Synthetic patches with known dimension and curvature (flat balls, sphere caps, quadratic graphs).
"""
Synthetic generators and their analytic oracles.

Every patch is drawn in local coordinates around a base point at the origin
of the generator (row 0), then embedded into R^D by a seeded rotation plus
offset. Randomness comes from numpy's PCG64 seeded through SeedSequence(seed),
spawned into three independent streams: embedding, sampling, noise.
"""


from __future__ import annotations
import enum
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from . import curvature, models
from .errors import ParameterError
from .strings import parse_matrix_literal

logger = logging.getLogger(__name__)

EMBED_STREAM, SAMPLE_STREAM, NOISE_STREAM = range(3)


class SynthKind(enum.Enum):
    FLAT = "flat"
    SPHERE = "sphere"
    GRAPH = "graph"


@dataclass(frozen=True, eq=False)
class SynthSpec:
    kind: SynthKind
    d: int
    D: int
    n: int
    rho: float
    seed: int = 0
    radius: float = 1.0
    hessians: Optional[np.ndarray] = None
    noise: float = 0.0
    offset_scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SynthKind(self.kind))
        if self.hessians is not None:
            hess = np.array(self.hessians, dtype=float).reshape(-1, self.d, self.d)
            hess.setflags(write=False)
            object.__setattr__(self, "hessians", hess)

    @property
    def normal_count(self) -> int:
        if self.kind is SynthKind.SPHERE:
            return 1
        if self.kind is SynthKind.GRAPH and self.hessians is not None:
            return int(self.hessians.shape[0])
        return 0

    def validate(self) -> None:
        p = 1 + self.d + self.d * (self.d + 1) // 2
        if self.d < 1 or self.d >= self.D:
            raise ParameterError(f"need 1 <= d < D, got d={self.d}, D={self.D}")
        if self.n < p:
            raise ParameterError(f"n={self.n} below the {p} samples a d={self.d} fit needs")
        if self.rho <= 0.0:
            raise ParameterError(f"patch radius rho must be > 0, got {self.rho}")
        if self.noise < 0.0:
            raise ParameterError(f"noise must be >= 0, got {self.noise}")
        if self.kind is SynthKind.SPHERE:
            if self.radius <= 0.0:
                raise ParameterError(f"sphere radius must be > 0, got {self.radius}")
            if self.rho >= np.pi * self.radius / 2.0:
                raise ParameterError(
                    f"patch too large: rho={self.rho} >= pi*r/2={np.pi * self.radius / 2.0:.6g}"
                )
        if self.kind is SynthKind.GRAPH:
            if self.hessians is None:
                raise ParameterError("graph patches need prescribed Hessians")
            if np.max(np.abs(self.hessians - np.transpose(self.hessians, (0, 2, 1))), initial=0.0) > 1e-12:
                raise ParameterError("prescribed Hessians must be symmetric")
        if self.d + self.normal_count > self.D:
            raise ParameterError(f"d + normals = {self.d + self.normal_count} exceeds D={self.D}")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kind": self.kind.value,
            "d": self.d,
            "D": self.D,
            "n": self.n,
            "rho": self.rho,
            "seed": self.seed,
            "noise": self.noise,
        }
        if self.kind is SynthKind.SPHERE:
            out["radius"] = self.radius
        if self.hessians is not None:
            out["hessians"] = self.hessians.tolist()
        return out


@dataclass(frozen=True, eq=False)
class Embedding:
    """x -> rotation @ pad(x) + offset."""
    rotation: np.ndarray
    offset: np.ndarray

    def apply(self, local: np.ndarray) -> np.ndarray:
        local = np.atleast_2d(local)
        dim = self.offset.size
        padded = np.zeros((local.shape[0], dim))
        padded[:, : local.shape[1]] = local
        return padded @ self.rotation.T + self.offset


@dataclass
class Oracle:
    dimension: int
    sectional: List[float]
    riemann: List[float]
    hessians: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 0, 0)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimension": self.dimension,
            "sectional_distribution": list(self.sectional),
            "riemann_distribution": list(self.riemann),
        }


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal factor of a Gaussian matrix via its SVD."""
    u, _, vt = scipy.linalg.svd(rng.standard_normal((dim, dim)))
    return u @ vt


def _streams(seed: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(3)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def embedding_for(spec: SynthSpec) -> Embedding:
    rng = _streams(spec.seed)[EMBED_STREAM]
    rotation = random_orthogonal(spec.D, rng)
    offset = rng.normal(scale=spec.offset_scale, size=spec.D)
    return Embedding(rotation=rotation, offset=offset)


def _antithetic_ball(count: int, d: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """
    count points uniform in the d-ball of radius rho, drawn as +/- pairs.
    An odd count gets one extra point at the center so the set stays symmetric.
    """
    half = count // 2
    direction = rng.standard_normal((half, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = rho * rng.random(half) ** (1.0 / d)
    v = direction * radius[:, None]
    pairs = np.vstack([v, -v])
    if count % 2:
        pairs = np.vstack([pairs, np.zeros((1, d))])
    return pairs


def _with_base(samples: np.ndarray) -> np.ndarray:
    return np.vstack([np.zeros((1, samples.shape[1])), samples])


def _finish(spec: SynthSpec, local: np.ndarray) -> models.Patch:
    points = embedding_for(spec).apply(local)
    if spec.noise > 0.0:
        points = points + _streams(spec.seed)[NOISE_STREAM].normal(scale=spec.noise, size=points.shape)
    logger.debug("Sampled %s patch: n=%s, d=%s, D=%s, seed=%s", spec.kind.value, spec.n, spec.d, spec.D, spec.seed)
    return models.Patch(
        points=points,
        base_index=0,
        label=spec.kind.value,
        source=f"synth:{spec.kind.value}:{spec.seed}",
    )


def _expect(spec: SynthSpec, kind: SynthKind) -> None:
    if spec.kind is not kind:
        raise ParameterError(f"expected a {kind.value} spec, got {spec.kind.value}")
    spec.validate()


def sample_flat(spec: SynthSpec) -> models.Patch:
    _expect(spec, SynthKind.FLAT)
    rng = _streams(spec.seed)[SAMPLE_STREAM]
    return _finish(spec, _with_base(_antithetic_ball(spec.n - 1, spec.d, spec.rho, rng)))


def sample_sphere(spec: SynthSpec) -> models.Patch:
    """Exponential map at r*e_{d+1}: p = r*(cos(t/r) e_{d+1} + sin(t/r) v/|v|), t = |v| <= rho."""
    _expect(spec, SynthKind.SPHERE)
    rng = _streams(spec.seed)[SAMPLE_STREAM]
    v = _with_base(_antithetic_ball(spec.n - 1, spec.d, spec.rho, rng))
    t = np.linalg.norm(v, axis=1)
    safe = np.where(t > 0.0, t, 1.0)
    r = spec.radius
    tangential = (r * np.sin(t / r) / safe)[:, None] * v
    local = np.hstack([tangential, (r * np.cos(t / r))[:, None]])
    # base sits at the origin of the local frame
    local[:, -1] -= r
    return _finish(spec, local)


def sample_graph(spec: SynthSpec) -> models.Patch:
    """Points (u, f(u)) with f^a(u) = 1/2 u^T H^a u."""
    _expect(spec, SynthKind.GRAPH)
    rng = _streams(spec.seed)[SAMPLE_STREAM]
    u = _with_base(_antithetic_ball(spec.n - 1, spec.d, spec.rho, rng))
    f = 0.5 * np.einsum("ni,aij,nj->na", u, spec.hessians, u)
    return _finish(spec, np.hstack([u, f]))


def sample(spec: SynthSpec) -> models.Patch:
    dispatch = {
        SynthKind.FLAT: sample_flat,
        SynthKind.SPHERE: sample_sphere,
        SynthKind.GRAPH: sample_graph,
    }
    return dispatch[spec.kind](spec)


def oracle_hessians(spec: SynthSpec) -> np.ndarray:
    if spec.kind is SynthKind.SPHERE:
        return (np.eye(spec.d) / spec.radius)[None, :, :]
    if spec.kind is SynthKind.GRAPH:
        return np.array(spec.hessians, dtype=float)
    return np.zeros((0, spec.d, spec.d))


def oracle_for(spec: SynthSpec) -> Oracle:
    """Exact curvature from the generator's second fundamental form."""
    hess = oracle_hessians(spec)
    r = hess.shape[0]
    stack = models.HessianStack(
        dimension=spec.d,
        intercepts=np.zeros(r),
        gradients=np.zeros((r, spec.d)),
        hessians=hess,
        residual_rms=np.zeros(r),
    )
    tensor = curvature.riemann_tensor(stack)
    sectional: List[float] = []
    if spec.d >= 2:
        sectional = curvature.curvature_distribution(curvature.sectional_curvatures(tensor))
    return Oracle(
        dimension=spec.d,
        sectional=sectional,
        riemann=curvature.curvature_distribution(tensor),
        hessians=hess,
    )


def parse_hessians(literals: Sequence[str], d: int) -> np.ndarray:
    """One "2,0;0,3" literal per normal direction, stacked into an (r, d, d) array."""
    mats = [np.array(parse_matrix_literal(text), dtype=float) for text in literals]
    for m in mats:
        if m.shape != (d, d):
            raise ParameterError(f"Hessian literal has shape {m.shape}, expected ({d}, {d})")
    return np.stack(mats) if mats else np.zeros((0, d, d))
