"""Bit-exact storage of feature tensors, images, labels, and manifests.

Feature tensors travel in a small binary container: a 28-byte header
(magic "FTEN", then five little-endian u32 words for version, dtype
code, stride, channels, height, width) followed by the payload in
channel-major, row-major order. Dtype codes: 1 = float32, 2 = uint16,
3 = uint8. Grayscale images use 8-bit binary PGM (P5). Label maps are
uint16 containers at stride 1 (or a PGM for small id ranges). A
manifest JSON ties one encoder's per-stride tensors to their source
image and optional label map.
"""

from __future__ import annotations

import json
import math
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    BadManifest,
    FileNotFound,
    IoFailure,
    MissingStride,
    NonFiniteValue,
    ShapeMismatch,
    TruncatedPayload,
    UnsupportedDtype,
    UnsupportedVersion,
)
from .image_ops import ScalarMap

MAGIC = b"FTEN"
VERSION = 1
HEADER = struct.Struct("<4sIIIIII")
HEADER_SIZE = HEADER.size

DTYPE_F32 = 1
DTYPE_U16 = 2
DTYPE_U8 = 3
_DTYPES = {
    DTYPE_F32: np.dtype("<f4"),
    DTYPE_U16: np.dtype("<u2"),
    DTYPE_U8: np.dtype("<u1"),
}

FEATURE_STRIDES = (4, 8, 16, 32)


@dataclass(frozen=True)
class FeatureTensor:
    """One stage of an encoder pyramid: float32 values shaped (C, H, W)."""

    data: np.ndarray
    stride: int

    def __post_init__(self):
        d = np.ascontiguousarray(self.data, dtype=np.float32)
        if d.ndim != 3:
            raise ValueError(f"feature tensor must be 3-D (C, H, W), got shape {d.shape}")
        if min(d.shape) < 1:
            raise ValueError(f"feature tensor dimensions must be >= 1, got {d.shape}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        object.__setattr__(self, "data", d)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class LabelMap:
    """Integer segment ids on the full-resolution pixel grid; 0 = ignore."""

    ids: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.ids)
        if a.ndim != 2:
            raise ValueError(f"label map must be 2-D, got shape {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueError("label map must hold integers")
        if a.size and a.min() < 0:
            raise ValueError("label ids must be non-negative")
        object.__setattr__(self, "ids", a.astype(np.uint16))

    @property
    def height(self) -> int:
        return self.ids.shape[0]

    @property
    def width(self) -> int:
        return self.ids.shape[1]


@dataclass(frozen=True)
class EncoderFeatureSet:
    """All four pyramid stages of one encoder on one image."""

    encoder_id: str
    image: ScalarMap
    tensors: dict[int, FeatureTensor]
    label_map: LabelMap | None = None

    def __post_init__(self):
        for s in FEATURE_STRIDES:
            if s not in self.tensors:
                raise MissingStride(s)
        for s, t in self.tensors.items():
            if s not in FEATURE_STRIDES:
                raise BadManifest(f"unsupported stride {s}; expected one of {FEATURE_STRIDES}")
            if t.stride != s:
                raise BadManifest(f"tensor at key {s} declares stride {t.stride}")
            _check_stage_shape(s, t, self.image.height, self.image.width)
        if self.label_map is not None and (
            self.label_map.height != self.image.height or self.label_map.width != self.image.width
        ):
            raise ShapeMismatch(
                f"label map {self.label_map.height}x{self.label_map.width} does not match "
                f"image {self.image.height}x{self.image.width}"
            )

    def stages(self) -> list[tuple[int, FeatureTensor]]:
        return [(s, self.tensors[s]) for s in FEATURE_STRIDES]


def _check_stage_shape(stride: int, t: FeatureTensor, img_h: int, img_w: int) -> None:
    # One pixel of slack per axis absorbs encoder-specific rounding.
    want_h = math.ceil(img_h / stride)
    want_w = math.ceil(img_w / stride)
    if abs(t.height - want_h) > 1 or abs(t.width - want_w) > 1:
        raise ShapeMismatch(
            f"stride {stride} stage is {t.height}x{t.width}, expected about {want_h}x{want_w}"
        )


def _read_container(path: str | Path) -> tuple[int, int, np.ndarray]:
    """Read any container; returns (dtype_code, stride, array shaped (C, H, W))."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFound(str(p))
    try:
        blob = p.read_bytes()
    except OSError as err:
        raise IoFailure(f"{p}: {err}") from err
    if len(blob) < HEADER_SIZE:
        if blob[:4] != MAGIC[: min(4, len(blob))]:
            raise BadMagic(f"{p}: bad magic at offset 0")
        raise TruncatedPayload(f"{p}: header cut short at offset {len(blob)}")
    magic, version, dtype_code, stride, c, h, w = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise BadMagic(f"{p}: bad magic at offset 0")
    if version != VERSION:
        raise UnsupportedVersion(f"{p}: version {version}, expected {VERSION}")
    if dtype_code not in _DTYPES:
        raise UnsupportedDtype(f"{p}: dtype code {dtype_code}")
    if min(c, h, w) < 1:
        raise TruncatedPayload(f"{p}: zero dimension in header ({c}, {h}, {w})")
    dt = _DTYPES[dtype_code]
    need = HEADER_SIZE + c * h * w * dt.itemsize
    if len(blob) < need:
        raise TruncatedPayload(f"{p}: payload cut short at offset {len(blob)}, need {need} bytes")
    if len(blob) > need:
        raise TruncatedPayload(f"{p}: {len(blob) - need} trailing bytes after payload")
    flat = np.frombuffer(blob, dtype=dt, count=c * h * w, offset=HEADER_SIZE)
    if dtype_code == DTYPE_F32:
        finite = np.isfinite(flat)
        if not finite.all():
            i = int(np.argmin(finite))
            raise NonFiniteValue(f"{p}: non-finite value at offset {HEADER_SIZE + i * dt.itemsize}")
    return dtype_code, stride, flat.reshape(c, h, w).copy()


def read_feature_tensor(path: str | Path) -> FeatureTensor:
    dtype_code, stride, data = _read_container(path)
    if dtype_code != DTYPE_F32:
        raise UnsupportedDtype(f"{path}: feature tensors must be float32 (code {DTYPE_F32})")
    return FeatureTensor(data.astype(np.float32), stride)


def write_feature_tensor(t: FeatureTensor, path: str | Path) -> None:
    if not np.isfinite(t.data).all():
        raise NonFiniteValue(f"refusing to write non-finite tensor to {path}")
    header = HEADER.pack(MAGIC, VERSION, DTYPE_F32, t.stride, t.channels, t.height, t.width)
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    _write_bytes(Path(path), header + payload)


def write_label_map(labels: LabelMap, path: str | Path) -> None:
    header = HEADER.pack(MAGIC, VERSION, DTYPE_U16, 1, 1, labels.height, labels.width)
    payload = np.ascontiguousarray(labels.ids, dtype="<u2").tobytes()
    _write_bytes(Path(path), header + payload)


def load_label_map(path: str | Path) -> LabelMap:
    """Load segment ids from a uint16 container or an 8-bit PGM."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFound(str(p))
    if _looks_like_pgm(p):
        gray = _read_pgm_raw(p)
        return LabelMap(gray.astype(np.uint16))
    dtype_code, _, data = _read_container(p)
    if dtype_code != DTYPE_U16:
        raise UnsupportedDtype(f"{p}: label maps must be uint16 (code {DTYPE_U16})")
    if data.shape[0] != 1:
        raise ShapeMismatch(f"{p}: label map must have one channel, got {data.shape[0]}")
    return LabelMap(data[0])


def _looks_like_pgm(p: Path) -> bool:
    try:
        with open(p, "rb") as fh:
            return fh.read(2) == b"P5"
    except OSError as err:
        raise IoFailure(f"{p}: {err}") from err


def _read_pgm_raw(p: Path) -> np.ndarray:
    try:
        blob = p.read_bytes()
    except OSError as err:
        raise IoFailure(f"{p}: {err}") from err
    # Header: "P5", width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed, then one whitespace byte before the raster.
    pos = 0
    tokens = []
    while len(tokens) < 4:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)").match(blob, pos)
        if not m:
            raise BadMagic(f"{p}: malformed PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise BadMagic(f"{p}: not a binary PGM")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as err:
        raise BadMagic(f"{p}: malformed PGM header") from err
    if maxval <= 0 or maxval > 255:
        raise UnsupportedDtype(f"{p}: only 8-bit PGM supported, maxval {maxval}")
    pos += 1
    need = pos + width * height
    if len(blob) < need:
        raise TruncatedPayload(f"{p}: raster cut short at offset {len(blob)}, need {need} bytes")
    raster = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
    return raster.reshape(height, width).copy()


def read_pgm(path: str | Path) -> ScalarMap:
    """Read an 8-bit binary PGM as intensities in [0, 1]."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFound(str(p))
    gray = _read_pgm_raw(p)
    return ScalarMap((gray.astype(np.float32) / 255.0), "raw")


def write_pgm(m: ScalarMap, path: str | Path) -> None:
    """Write intensities in [0, 1] as an 8-bit binary PGM."""
    v = m.values.astype(np.float64)
    if v.min() < 0.0 or v.max() > 1.0:
        raise ValueError("PGM output expects values in [0, 1]")
    raster = np.rint(v * 255.0).astype(np.uint8)
    header = f"P5\n{m.width} {m.height}\n255\n".encode("ascii")
    _write_bytes(Path(path), header + raster.tobytes())


def _write_bytes(p: Path, blob: bytes) -> None:
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_suffix(p.suffix + ".tmp")
        tmp.write_bytes(blob)
        tmp.replace(p)
    except OSError as err:
        raise IoFailure(f"{p}: {err}") from err


def load_manifest(path: str | Path) -> EncoderFeatureSet:
    """Load an encoder manifest and everything it references.

    Stage paths are resolved relative to the manifest's directory, and
    stage order in the file is irrelevant. Every stride in
    FEATURE_STRIDES must appear exactly once, and each stage's grid must
    match ceil(image / stride) within one pixel per axis.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFound(str(p))
    try:
        doc = json.loads(p.read_text())
    except OSError as err:
        raise IoFailure(f"{p}: {err}") from err
    except json.JSONDecodeError as err:
        raise BadManifest(f"{p}: invalid JSON ({err})") from err
    if not isinstance(doc, dict):
        raise BadManifest(f"{p}: manifest must be a JSON object")

    encoder_id = doc.get("encoder_id")
    if not isinstance(encoder_id, str) or not encoder_id:
        raise BadManifest(f"{p}: missing or empty encoder_id")
    image_rel = doc.get("image")
    if not isinstance(image_rel, str):
        raise BadManifest(f"{p}: missing image path")
    stages = doc.get("stages")
    if not isinstance(stages, list) or not stages:
        raise BadManifest(f"{p}: missing stages list")

    base = p.parent
    image = read_pgm(base / image_rel)

    label_rel = doc.get("label_map")
    label_map = None
    if label_rel is not None:
        if not isinstance(label_rel, str):
            raise BadManifest(f"{p}: label_map must be a path or null")
        label_map = load_label_map(base / label_rel)

    tensors: dict[int, FeatureTensor] = {}
    for i, stage in enumerate(stages):
        if not isinstance(stage, dict) or "stride" not in stage or "path" not in stage:
            raise BadManifest(f"{p}: stage {i} needs stride and path")
        stride = stage["stride"]
        if not isinstance(stride, int) or stride not in FEATURE_STRIDES:
            raise BadManifest(f"{p}: stage {i} stride {stride!r} not in {FEATURE_STRIDES}")
        if stride in tensors:
            raise BadManifest(f"{p}: duplicate stage for stride {stride}")
        t = read_feature_tensor(base / stage["path"])
        if t.stride != stride:
            raise BadManifest(
                f"{p}: stage file for stride {stride} declares stride {t.stride}"
            )
        tensors[stride] = t

    return EncoderFeatureSet(encoder_id, image, tensors, label_map)


def save_feature_set(fs: EncoderFeatureSet, out_dir: str | Path) -> Path:
    """Write a feature set plus manifest under out_dir; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_pgm(fs.image, out / "image.pgm")
    doc: dict = {"encoder_id": fs.encoder_id, "image": "image.pgm", "label_map": None}
    if fs.label_map is not None:
        write_label_map(fs.label_map, out / "labels.ften")
        doc["label_map"] = "labels.ften"
    doc["stages"] = []
    for stride, tensor in fs.stages():
        name = f"stage_{stride:02d}.ften"
        write_feature_tensor(tensor, out / name)
        doc["stages"].append({"stride": stride, "path": name})
    manifest = out / "manifest.json"
    _write_bytes(manifest, (json.dumps(doc, indent=2) + "\n").encode("ascii"))
    return manifest
