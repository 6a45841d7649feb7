# patchio.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Readers and writers for patch CSV + sidecar, netpbm images, frames, and reports.
"""On-disk formats: patch CSV with JSON sidecar, PGM/PPM, raw .npy images, frames, reports."""


from __future__ import annotations
import csv
import io
import json
import logging
import pathlib
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Union

import numpy as np

from . import models
from .errors import (
    DataError,
    FormatError,
    LensError,
    StorageError,
    UnsupportedFormatError,
)
from .lens_types import SCHEMA_VERSION, PatchMeta
from .patterns import RE_PNM_MAGIC
from .strings import format_row, parse_float_row
from .utils import ensure_parent

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


# ---------- Patches ----------
def sidecar_path(path: PathLike) -> pathlib.Path:
    """p.csv -> p.meta.json"""
    p = pathlib.Path(path)
    return p.with_name(p.stem + ".meta.json")


def read_sidecar(path: PathLike) -> PatchMeta:
    p = pathlib.Path(path)
    if not p.exists():
        return {}
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as e:
        raise StorageError(f"cannot read sidecar {p}: {e}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"sidecar {p} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise FormatError(f"sidecar {p} must hold a JSON object")

    meta: PatchMeta = {}
    for key in ("ambient_dim", "count", "base_index"):
        if key in data:
            value = data[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise FormatError(f"sidecar {p}: {key} must be an integer, got {value!r}")
            meta[key] = value  # type: ignore[literal-required]
    for key in ("label", "layer", "source"):
        if key in data:
            if not isinstance(data[key], str):
                raise FormatError(f"sidecar {p}: {key} must be a string")
            meta[key] = data[key]  # type: ignore[literal-required]
    if "normalized" in data:
        if not isinstance(data["normalized"], bool):
            raise FormatError(f"sidecar {p}: normalized must be true or false, got {data['normalized']!r}")
        meta["normalized"] = data["normalized"]
    return meta


def read_patch(path: PathLike) -> models.Patch:
    """
    Parse one point per CSV row. Blank lines and lines starting with '#' are
    skipped. base_index comes from the sidecar, else 0.
    """
    p = pathlib.Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"{p} is not UTF-8 text") from e
    except OSError as e:
        raise StorageError(f"cannot read patch {p}: {e}") from e

    rows: List[List[float]] = []
    width: Optional[int] = None
    reader = csv.reader(io.StringIO(text))
    try:
        for fields in reader:
            if not fields or all(not f.strip() for f in fields):
                continue
            if fields[0].lstrip().startswith("#"):
                continue
            values = parse_float_row(fields, reader.line_num)
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FormatError(
                    f"{p}: line {reader.line_num} has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    except csv.Error as e:
        raise FormatError(f"{p}: {e}") from e

    meta = read_sidecar(sidecar_path(p))
    if not rows:
        raise DataError(f"{p}: no points")
    if "count" in meta and meta["count"] != len(rows):
        raise FormatError(f"{p}: sidecar count {meta['count']} but file has {len(rows)} rows")
    if "ambient_dim" in meta and meta["ambient_dim"] != width:
        raise FormatError(f"{p}: sidecar ambient_dim {meta['ambient_dim']} but rows have {width} columns")

    patch = models.Patch(
        points=np.array(rows, dtype=float),
        base_index=meta.get("base_index", 0),
        label=meta.get("label", ""),
        layer=meta.get("layer", ""),
        source=meta.get("source", str(p)),
        normalized=meta.get("normalized", False),
    )
    logger.debug("Read patch: %s (n=%s, D=%s)", p, patch.count, patch.ambient_dim)
    return patch


def write_patch(patch: models.Patch, path: PathLike) -> None:
    """Write CSV rows with round-trip-exact floats plus the sidecar."""
    if not isinstance(patch, models.Patch):
        raise DataError("write_patch needs a Patch")
    p = pathlib.Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in patch.points:
        writer.writerow(format_row(row))
    try:
        ensure_parent(p)
        p.write_text(buf.getvalue(), encoding="utf-8")
        sidecar_path(p).write_text(json.dumps(patch.meta(), indent=2), encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot write patch {p}: {e}") from e
    logger.info("Wrote patch: %s (n=%s, D=%s)", p, patch.count, patch.ambient_dim)


# ---------- Netpbm images ----------
@dataclass
class PnmHeader:
    magic: str
    width: int
    height: int
    maxval: int
    offset: int  # first payload byte

    @property
    def channels(self) -> int:
        return 3 if self.magic in ("P3", "P6") else 1

    @property
    def is_ascii(self) -> bool:
        return self.magic in ("P2", "P3")

    @property
    def sample_count(self) -> int:
        return self.width * self.height * self.channels


class PnmReader:
    """
    Reads PGM (P2/P5) and PPM (P3/P6). Header tokens may be separated by any
    whitespace and '#' comments; binary payloads start one whitespace byte
    after maxval. Samples are big-endian 16-bit when maxval > 255.
    """

    SUPPORTED = ("P2", "P3", "P5", "P6")

    def __init__(self, data: bytes, name: str = "<bytes>") -> None:
        self.data = data
        self.name = name
        self.pos = 0

    # ---------- Public API ----------
    def parse(self) -> models.ImageMatrix:
        header = self._parse_header()
        if header.is_ascii:
            samples = self._ascii_payload(header)
        else:
            samples = self._binary_payload(header)
        if samples.size and (int(samples.min()) < 0 or int(samples.max()) > header.maxval):
            raise FormatError(f"{self.name}: sample outside 0..{header.maxval}")
        arr = samples.astype(float).reshape(header.height, header.width, header.channels)
        if header.maxval != 255:
            arr = arr * (255.0 / header.maxval)
        return models.ImageMatrix(tuple(arr[:, :, c] for c in range(header.channels)))

    # ---------- Internal parsing ----------
    def _parse_header(self) -> PnmHeader:
        m = RE_PNM_MAGIC.match(self.data)
        if not m:
            raise UnsupportedFormatError(f"{self.name}: not a netpbm file")
        magic = m.group(0).decode("ascii")
        if magic not in self.SUPPORTED:
            raise UnsupportedFormatError(f"{self.name}: netpbm variant {magic} is not supported (PGM/PPM only)")
        self.pos = m.end()
        width = self._next_int("width")
        height = self._next_int("height")
        maxval = self._next_int("maxval")
        if width < 1 or height < 1:
            raise FormatError(f"{self.name}: bad size {width}x{height}")
        if not 1 <= maxval <= 65535:
            raise FormatError(f"{self.name}: maxval {maxval} outside 1..65535")
        if self.pos >= len(self.data) or not self.data[self.pos:self.pos + 1].isspace():
            raise FormatError(f"{self.name}: truncated header")
        return PnmHeader(magic, width, height, maxval, self.pos + 1)

    def _next_token(self, what: str) -> str:
        data = self.data
        n = len(data)
        pos = self.pos
        while pos < n:
            ch = data[pos:pos + 1]
            if ch == b"#":
                end = data.find(b"\n", pos)
                pos = n if end == -1 else end + 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(f"{self.name}: truncated header (missing {what})")
        self.pos = pos
        return data[start:pos].decode("ascii", errors="replace")

    def _next_int(self, what: str) -> int:
        token = self._next_token(what)
        if not token.isdigit():
            raise FormatError(f"{self.name}: {what} is not an integer: {token!r}")
        return int(token)

    def _binary_payload(self, header: PnmHeader) -> np.ndarray:
        dtype = np.dtype(">u2") if header.maxval > 255 else np.dtype("u1")
        needed = header.sample_count * dtype.itemsize
        available = len(self.data) - header.offset
        if available < needed:
            raise FormatError(f"{self.name}: truncated payload ({available} of {needed} bytes)")
        return np.frombuffer(self.data, dtype=dtype, count=header.sample_count, offset=header.offset)

    def _ascii_payload(self, header: PnmHeader) -> np.ndarray:
        body = self.data[header.offset:].decode("ascii", errors="replace")
        tokens: List[str] = []
        for line in body.splitlines():
            tokens.extend(line.split("#", 1)[0].split())
            if len(tokens) >= header.sample_count:
                break
        if len(tokens) < header.sample_count:
            raise FormatError(f"{self.name}: truncated payload ({len(tokens)} of {header.sample_count} samples)")
        try:
            return np.array([int(t) for t in tokens[:header.sample_count]], dtype=np.int64)
        except ValueError as e:
            raise FormatError(f"{self.name}: non-integer sample: {e}") from e


def read_image(path: PathLike) -> models.ImageMatrix:
    p = pathlib.Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise StorageError(f"cannot read image {p}: {e}") from e
    img = PnmReader(data, name=str(p)).parse()
    logger.debug("Read image: %s (%sx%s, channels=%s)", p, img.rows, img.cols, img.channel_count)
    return img


def quantize(img: models.ImageMatrix) -> np.ndarray:
    """rows x cols x channels uint8 after clamping to 0..255 and rounding."""
    return np.clip(np.rint(img.stacked()), 0, 255).astype(np.uint8)


def write_image(img: models.ImageMatrix, path: PathLike) -> None:
    """Binary P5 (grayscale) or P6 (RGB), maxval 255."""
    p = pathlib.Path(path)
    magic = "P6" if img.channel_count == 3 else "P5"
    header = f"{magic}\n{img.cols} {img.rows}\n255\n".encode("ascii")
    try:
        ensure_parent(p)
        p.write_bytes(header + quantize(img).tobytes())
    except OSError as e:
        raise StorageError(f"cannot write image {p}: {e}") from e


def write_raw_image(img: models.ImageMatrix, path: PathLike) -> None:
    """Unclamped float64 channels as rows x cols x channels .npy."""
    p = pathlib.Path(path)
    try:
        ensure_parent(p)
        np.save(p, img.stacked(), allow_pickle=False)
    except OSError as e:
        raise StorageError(f"cannot write raw image {p}: {e}") from e


def read_raw_image(path: PathLike) -> models.ImageMatrix:
    p = pathlib.Path(path)
    try:
        arr = np.load(p, allow_pickle=False)
    except OSError as e:
        raise StorageError(f"cannot read raw image {p}: {e}") from e
    except ValueError as e:
        raise FormatError(f"{p}: not a raw image array: {e}") from e
    if arr.ndim != 3:
        raise FormatError(f"{p}: expected rows x cols x channels, got shape {arr.shape}")
    return models.ImageMatrix(tuple(arr[:, :, c] for c in range(arr.shape[2])))


# ---------- Frames ----------
def _frame_block_paths(path: pathlib.Path) -> tuple[pathlib.Path, pathlib.Path]:
    stem = path.name[:-len(".json")] if path.name.endswith(".json") else path.name
    return path.with_name(stem + ".tangent.csv"), path.with_name(stem + ".normal.csv")


def _write_rows(path: pathlib.Path, rows: np.ndarray) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(format_row(row))
    path.write_text(buf.getvalue(), encoding="utf-8")


def _read_rows(path: pathlib.Path, width: int) -> np.ndarray:
    rows: List[List[float]] = []
    reader = csv.reader(io.StringIO(path.read_text(encoding="utf-8")))
    for fields in reader:
        if not fields:
            continue
        values = parse_float_row(fields, reader.line_num)
        if len(values) != width:
            raise FormatError(f"{path}: line {reader.line_num} has {len(values)} columns, expected {width}")
        rows.append(values)
    return np.array(rows, dtype=float).reshape(-1, width)


def write_frame(frame: models.TangentFrame, path: PathLike) -> Dict[str, Any]:
    """JSON header at `path`, basis vectors one per row in sibling CSV blocks."""
    p = pathlib.Path(path)
    tangent_path, normal_path = _frame_block_paths(p)
    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "tangent_frame",
        "dimension": frame.dimension,
        "normal_rank": frame.normal_rank,
        "ambient_dim": frame.ambient_dim,
        "base": frame.base.tolist(),
        "tangent_file": tangent_path.name,
        "normal_file": normal_path.name,
    }
    try:
        ensure_parent(p)
        _write_rows(tangent_path, frame.tangent)
        _write_rows(normal_path, frame.normal)
        p.write_text(json.dumps(header, indent=2), encoding="utf-8")
    except OSError as e:
        raise StorageError(f"cannot write frame {p}: {e}") from e
    logger.info("Wrote frame: %s (d=%s, r=%s)", p, frame.dimension, frame.normal_rank)
    return header


def read_frame(path: PathLike) -> models.TangentFrame:
    p = pathlib.Path(path)
    header = read_json(p)
    try:
        dim = int(header["ambient_dim"])
        base = np.array([float(v) for v in header["base"]])
        tangent = _read_rows(p.with_name(header["tangent_file"]), dim)
        normal = _read_rows(p.with_name(header["normal_file"]), dim)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{p}: malformed frame header: {e}") from e
    except OSError as e:
        raise StorageError(f"cannot read frame blocks for {p}: {e}") from e
    return models.TangentFrame(base=base, tangent=tangent, normal=normal)


# ---------- Reports ----------
def read_json(path: PathLike) -> Dict[str, Any]:
    p = pathlib.Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as e:
        raise StorageError(f"cannot read {p}: {e}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"{p} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise FormatError(f"{p} must hold a JSON object")
    return data


def read_report(path: PathLike) -> models.CurvatureReport:
    data = read_json(path)
    if data.get("kind", "curvature_report") != "curvature_report":
        raise FormatError(f"{path}: expected a curvature report, got kind {data.get('kind')!r}")
    try:
        return models.CurvatureReport.from_dict(data)
    except LensError as e:
        raise FormatError(f"{path}: {e.message}") from e
