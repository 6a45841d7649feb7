# augment.py
# Copyright (c) 2026 ManifoldLens contributors
#
# SVD-based derivative images: zero selected singular values per colour channel.
"""Derivative images I' = U Sigma' V^T and the k1 x k2 x k3 trailing-value grid."""


from __future__ import annotations
import concurrent.futures
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from . import models
from .errors import DegenerateError, ParameterError
from .patterns import RE_DERIVATIVE_NAME

logger = logging.getLogger(__name__)

GRID_MODES = ("trailing", "leading")


@dataclass(frozen=True, eq=False)
class SingularMask:
    """keep[i] True keeps lambda_i, False zeroes it. At least one value is kept."""
    keep: np.ndarray

    def __post_init__(self) -> None:
        keep = np.array(self.keep, dtype=bool)
        if keep.ndim != 1 or keep.size == 0:
            raise ParameterError("singular mask must be a non-empty 1-d selection")
        if not keep.any():
            raise DegenerateError("mask zeroes every singular value (all-zero image)")
        keep.setflags(write=False)
        object.__setattr__(self, "keep", keep)

    @classmethod
    def keep_all(cls, length: int) -> "SingularMask":
        return cls(np.ones(length, dtype=bool))

    @classmethod
    def trailing_k(cls, length: int, k: int) -> "SingularMask":
        """Zero the last k singular values."""
        if not 0 <= k < length:
            raise ParameterError(f"trailing k={k} must lie in 0..{length - 1}")
        keep = np.ones(length, dtype=bool)
        if k:
            keep[length - k:] = False
        return cls(keep)

    @classmethod
    def leading_k(cls, length: int, k: int) -> "SingularMask":
        """Keep only the first k singular values."""
        if not 1 <= k <= length:
            raise ParameterError(f"leading k={k} must lie in 1..{length}")
        keep = np.zeros(length, dtype=bool)
        keep[:k] = True
        return cls(keep)

    @classmethod
    def zeroing(cls, length: int, indices: Iterable[int]) -> "SingularMask":
        keep = np.ones(length, dtype=bool)
        for i in indices:
            if not 0 <= i < length:
                raise ParameterError(f"singular index {i} outside 0..{length - 1}")
            keep[i] = False
        return cls(keep)

    @property
    def length(self) -> int:
        return int(self.keep.size)

    @property
    def kept(self) -> int:
        return int(np.count_nonzero(self.keep))


@dataclass(frozen=True)
class GridSpec:
    """k_max per channel; trailing zeroes the last k, leading keeps the first k."""
    k_max: int = 22
    channels: int = 3
    mode: str = "trailing"

    def validate(self, img: models.ImageMatrix) -> None:
        if self.mode not in GRID_MODES:
            raise ParameterError(f"grid mode must be one of {GRID_MODES}, got {self.mode!r}")
        if self.channels != img.channel_count:
            raise ParameterError(f"grid expects {self.channels} channels, image has {img.channel_count}")
        limit = img.singular_count - 1 if self.mode == "trailing" else img.singular_count
        if not 1 <= self.k_max <= limit:
            raise ParameterError(
                f"k_max={self.k_max} outside 1..{limit} for a {img.rows}x{img.cols} image ({self.mode})"
            )

    def count(self) -> int:
        return self.k_max ** self.channels

    def mask(self, length: int, k: int) -> SingularMask:
        if self.mode == "leading":
            return SingularMask.leading_k(length, k)
        return SingularMask.trailing_k(length, k)


@dataclass(frozen=True)
class ChannelSvd:
    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray

    def reconstruct(self, mask: SingularMask) -> np.ndarray:
        if mask.length != self.s.size:
            raise ParameterError(f"mask length {mask.length} does not match {self.s.size} singular values")
        return (self.u * np.where(mask.keep, self.s, 0.0)) @ self.vt


@dataclass(frozen=True, eq=False)
class DerivativeImage:
    ks: Tuple[int, ...]
    image: models.ImageMatrix
    truncation_error: float
    channel_errors: Tuple[float, ...]


def channel_svd(channel: np.ndarray) -> ChannelSvd:
    u, s, vt = scipy.linalg.svd(np.asarray(channel, dtype=float), full_matrices=False)
    return ChannelSvd(u, s, vt)


def truncation_error(singular_values: np.ndarray, mask: SingularMask) -> float:
    """||I - I'||_F = sqrt(sum of squared zeroed singular values)."""
    zeroed = np.asarray(singular_values, dtype=float)[~mask.keep]
    return float(np.sqrt(np.sum(zeroed ** 2)))


def _clamp(channels: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    return tuple(np.clip(np.rint(c), 0.0, 255.0) for c in channels)


def derivative_image(
    img: models.ImageMatrix,
    masks: Union[SingularMask, Sequence[SingularMask]],
    *,
    quantize: bool = False,
) -> models.ImageMatrix:
    """
    Per channel I' = U Sigma' V^T. The raw variant keeps exact float values;
    quantize=True clamps to 0..255 and rounds (what gets written as PGM/PPM).
    A single mask is applied to every channel.
    """
    if isinstance(masks, SingularMask):
        masks = [masks] * img.channel_count
    if len(masks) != img.channel_count:
        raise ParameterError(f"need {img.channel_count} masks, got {len(masks)}")
    out = [channel_svd(ch).reconstruct(m) for ch, m in zip(img.channels, masks)]
    return models.ImageMatrix(_clamp(out) if quantize else tuple(out))


def _channel_variants(svd: ChannelSvd, spec: GridSpec) -> List[Tuple[np.ndarray, float]]:
    out: List[Tuple[np.ndarray, float]] = []
    for k in range(1, spec.k_max + 1):
        mask = spec.mask(svd.s.size, k)
        out.append((svd.reconstruct(mask), truncation_error(svd.s, mask)))
    return out


def generate_grid(
    img: models.ImageMatrix,
    spec: GridSpec,
    *,
    quantize: bool = False,
    workers: int = 1,
) -> Iterator[DerivativeImage]:
    """
    Yield k_max ** channels derivative images in lexicographic k-tuple order.
    Channel variants are computed once (optionally on a pool) and combined
    lazily, so only one assembled image is alive per step.
    """
    spec.validate(img)
    return _grid(img, spec, quantize, workers)


def _grid(img: models.ImageMatrix, spec: GridSpec, quantize: bool, workers: int) -> Iterator[DerivativeImage]:
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        svds = list(pool.map(channel_svd, img.channels))
        variants = list(pool.map(lambda s: _channel_variants(s, spec), svds))
    if quantize:
        variants = [[(_clamp([arr])[0], err) for arr, err in chan] for chan in variants]
    logger.info(
        "Generating %s derivative images (%s, k_max=%s, channels=%s)",
        spec.count(), spec.mode, spec.k_max, spec.channels,
    )
    for ks in itertools.product(range(1, spec.k_max + 1), repeat=spec.channels):
        picked = [variants[c][k - 1] for c, k in enumerate(ks)]
        errors = tuple(err for _, err in picked)
        yield DerivativeImage(
            ks=tuple(ks),
            image=models.ImageMatrix(tuple(arr for arr, _ in picked)),
            truncation_error=float(np.sqrt(sum(e * e for e in errors))),
            channel_errors=errors,
        )


def derivative_name(stem: str, ks: Sequence[int]) -> str:
    return f"{stem}_{'_'.join(str(k) for k in ks)}"


def parse_derivative_name(name: str) -> Optional[Tuple[str, Tuple[int, ...]]]:
    m = RE_DERIVATIVE_NAME.match(name)
    if not m:
        return None
    return m.group("stem"), tuple(int(k) for k in m.group("ks").split("_"))
