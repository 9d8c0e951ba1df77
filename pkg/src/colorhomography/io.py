"""Patch CSV files, PPM/PNG chart images and atomic JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .colorspace import lab_to_xyz, srgb_decode, srgb_to_xyz, xyz_to_linear_rgb
from .errors import InputError

__all__ = [
    "ENCODINGS",
    "GridSpec",
    "load_patch_csv",
    "save_patch_csv",
    "format_patch_csv",
    "read_image",
    "read_ppm",
    "write_ppm",
    "extract_grid",
    "atomic_write",
    "dump_json",
    "write_json",
]

ENCODINGS = ("linear", "srgb8", "lab")
_HEADERS = {"linear": ("r", "g", "b"), "srgb8": ("r", "g", "b"), "lab": ("l", "a", "b")}


def load_patch_csv(path, encoding: str = "linear") -> np.ndarray:
    """Read an ``R,G,B`` CSV into an ``(n, 3)`` linear RGB array.

    A fourth ``label`` column is allowed and ignored. ``encoding="srgb8"``
    decodes 8-bit sRGB values and ``encoding="lab"`` reads an ``L,a,b``
    file; both are converted to linear RGB.
    """
    if encoding not in ENCODINGS:
        raise InputError(f"unknown encoding {encoding!r}")
    expected = _HEADERS[encoding]
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    rows = []
    width = None
    reader = csv.reader(io.StringIO(text))
    for line_no, fields in enumerate(reader, start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if width is None:
            names = tuple(f.strip().lower() for f in fields)
            if names[:3] != expected or len(names) > 4 or (len(names) == 4 and names[3] != "label"):
                raise InputError(f"line {line_no}: expected header {','.join(expected).upper()}[,label]")
            width = len(names)
            continue
        if len(fields) != width and not (width == 4 and len(fields) == 3):
            raise InputError(f"line {line_no}: expected {3 if width == 3 else '3 or 4'} fields, got {len(fields)}")
        try:
            values = [float(f) for f in fields[:3]]
        except ValueError:
            raise InputError(f"line {line_no}: could not parse number") from None
        if not all(math.isfinite(v) for v in values):
            raise InputError(f"line {line_no}: non-finite value")
        rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    if encoding == "srgb8":
        return xyz_to_linear_rgb(srgb_to_xyz(data))
    if encoding == "lab":
        return xyz_to_linear_rgb(lab_to_xyz(data))
    return data


def format_patch_csv(patches, labels=None) -> str:
    patches = np.asarray(patches, dtype=float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["R", "G", "B"] + (["label"] if labels is not None else []))
    for i, row in enumerate(patches):
        cells = [format(float(v), ".17g") for v in row]
        if labels is not None:
            cells.append(labels[i])
        writer.writerow(cells)
    return buf.getvalue()


def save_patch_csv(path, patches, labels=None) -> None:
    atomic_write(path, format_patch_csv(patches, labels))


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    # json emits floats with repr(), the shortest round-trip form.
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj) -> None:
    atomic_write(path, dump_json(obj))


# --- images -----------------------------------------------------------------


def _ppm_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise InputError("truncated PPM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a P3 or P6 PPM into an ``(h, w, 3)`` float array in [0, 1]."""
    magic = data[:2]
    if magic not in (b"P3", b"P6"):
        raise InputError(f"unsupported image format: magic {magic!r} is not P3/P6 PPM")
    try:
        (w, h, maxval), pos = _ppm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise InputError("malformed PPM header") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise InputError("malformed PPM header")
    count = w * h * 3
    if magic == b"P3":
        values = data[pos:].split()
        if len(values) < count:
            raise InputError("truncated PPM pixel data")
        pixels = np.array(values[:count], dtype=np.int64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos : pos + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise InputError("truncated PPM pixel data")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if pixels.max(initial=0) > maxval:
        raise InputError("PPM sample exceeds maxval")
    return pixels.reshape(h, w, 3) / float(maxval)


def write_ppm(path, image, maxval: int = 255) -> None:
    """Write an ``(h, w, 3)`` array of values in [0, 1] as binary P6."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    h, w = img.shape[:2]
    q = np.round(img * maxval).astype(">u2" if maxval > 255 else "u1")
    atomic_write(path, f"P6\n{w} {h}\n{maxval}\n".encode() + q.tobytes())


def read_image(path, encoding: str = "linear") -> np.ndarray:
    """Load a chart image as ``(h, w, 3)`` linear RGB.

    PPM (P3/P6) is always supported; PNG needs Pillow. With
    ``encoding="srgb8"`` pixel values are gamma-decoded.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:
            raise InputError("unsupported image format: PNG support needs Pillow") from None
        with Image.open(io.BytesIO(data)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=float) / 255.0
    else:
        arr = read_ppm(data)
    if encoding == "srgb8":
        return srgb_decode(arr)
    if encoding != "linear":
        raise InputError(f"unsupported image encoding {encoding!r}")
    return arr


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    inset: float = 0.25

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 4:
            raise InputError("grid must have at least 4 cells")
        if not 0.0 <= self.inset < 0.5:
            raise InputError("inset must be in [0, 0.5)")


def _coverage(length: int, cells: int, inset: float) -> np.ndarray:
    """``(cells, length)`` weights: overlap of each pixel with each trimmed cell."""
    size = length / cells
    lo = np.arange(cells) * size + inset * size
    hi = lo + (1.0 - 2.0 * inset) * size
    if hi[0] - lo[0] < 1.0:
        raise InputError("inset leaves no pixels in a grid cell")
    px = np.arange(length)
    return np.clip(np.minimum(hi[:, None], px + 1.0) - np.maximum(lo[:, None], px), 0.0, None)


def extract_grid(image, spec: GridSpec) -> np.ndarray:
    """Mean RGB of each cell of an axis-aligned patch grid, row-major.

    Each cell drops ``spec.inset`` of its width and height at every border.
    Pixels straddling the trimmed border count by their covered fraction,
    so replicating every pixel k-by-k leaves the result unchanged.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InputError(f"expected an (h, w, 3) image, got shape {img.shape}")
    h, w = img.shape[:2]
    if h < spec.rows or w < spec.cols:
        raise InputError(f"image {w}x{h} is smaller than the {spec.cols}x{spec.rows} grid")
    wy = _coverage(h, spec.rows, spec.inset)
    wx = _coverage(w, spec.cols, spec.inset)
    sums = np.einsum("ry,yxc,sx->rsc", wy, img, wx)
    area = wy.sum(axis=1)[:, None] * wx.sum(axis=1)[None, :]
    return (sums / area[..., None]).reshape(-1, 3)
