# lens_types.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Shared typing aliases for on-disk JSON payloads.
"""TypedDicts describing sidecar, manifest, and report payloads."""


from __future__ import annotations
from typing import List, TypedDict


SCHEMA_VERSION = "1"


class PatchMeta(TypedDict, total=False):
    ambient_dim: int
    count: int
    base_index: int
    label: str
    layer: str
    source: str
    normalized: bool


class ManifestEntry(TypedDict):
    ks: List[int]
    file: str
    truncation_error: float
    channel_errors: List[float]


class Manifest(TypedDict):
    schema_version: str
    kind: str
    source: str
    mode: str
    k_max: int
    channels: int
    count: int
    raw: bool
    images: List[ManifestEntry]
