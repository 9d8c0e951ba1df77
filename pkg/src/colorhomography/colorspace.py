"""Conversions between linear RGB, RGI, chromaticity, sRGB, XYZ and CIE Lab.

All colors are row vectors and every matrix acts on the right, so a batch of
``n`` colors is an ``(n, 3)`` array ``X`` and a linear map is ``X @ M``.
Functions accept a single triple or any ``(..., 3)`` stack.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericWarning

__all__ = [
    "RGI_MATRIX",
    "RGI_MATRIX_INV",
    "WhitePoint",
    "D65",
    "LINEAR_SRGB_TO_XYZ",
    "rgb_to_rgi",
    "rgi_to_rgb",
    "rgb_to_chromaticity",
    "dehomogenize",
    "srgb_decode",
    "srgb_encode",
    "srgb_to_xyz",
    "linear_rgb_to_xyz",
    "xyz_to_linear_rgb",
    "xyz_to_lab",
    "lab_to_xyz",
    "linear_rgb_to_lab",
    "delta_e",
]

# [R G B] @ RGI_MATRIX == [R, G, R+G+B]
RGI_MATRIX = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
RGI_MATRIX_INV = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class WhitePoint:
    """Reference white used for every Lab computation."""

    name: str
    observer: str
    xyz: tuple[float, float, float]


D65 = WhitePoint("D65", "2", (0.95047, 1.0, 1.08883))

# sRGB primaries scaled to the D65 white above, transposed so that
# xyz = rgb @ LINEAR_SRGB_TO_XYZ.
LINEAR_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
).T
XYZ_TO_LINEAR_SRGB = np.linalg.inv(LINEAR_SRGB_TO_XYZ)

_LAB_DELTA = 6.0 / 29.0


def _as_triples(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (3,):
        raise InputError(f"expected color triples with trailing dimension 3, got shape {arr.shape}")
    return arr


def rgb_to_rgi(rgb) -> np.ndarray:
    """Map linear RGB rows to homogeneous red-green-intensity triples."""
    rgb = _as_triples(rgb)
    rgi = rgb @ RGI_MATRIX
    if np.any(np.all(rgb == 0.0, axis=-1)):
        raise InputError("black pixel has no chromaticity")
    return rgi


def rgi_to_rgb(rgi) -> np.ndarray:
    return _as_triples(rgi) @ RGI_MATRIX_INV


def rgb_to_chromaticity(rgb) -> np.ndarray:
    """Return ``(..., 2)`` rg-chromaticities ``(R, G) / (R + G + B)``."""
    rgb = _as_triples(rgb)
    total = rgb.sum(axis=-1, keepdims=True)
    if np.any(total <= 0.0):
        raise InputError("black pixel has no chromaticity")
    return rgb[..., :2] / total


def dehomogenize(c) -> np.ndarray:
    """Return ``(p / w, q / w)`` for homogeneous triples ``(p, q, w)``.

    Raises:
        InputError: if ``|w|`` is below ``1e-12 * max(|p|, |q|, 1)``.
    """
    c = _as_triples(c)
    w = c[..., 2:]
    scale = np.maximum(np.maximum(np.abs(c[..., :1]), np.abs(c[..., 1:2])), 1.0)
    if np.any(np.abs(w) <= 1e-12 * scale):
        raise InputError("point at infinity cannot be dehomogenized")
    return c[..., :2] / w


def srgb_decode(v) -> np.ndarray:
    """Expand gamma-encoded sRGB values in [0, 1] to linear light."""
    v = np.asarray(v, dtype=float)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def srgb_encode(v) -> np.ndarray:
    """Inverse of :func:`srgb_decode`; the input is clipped to [0, 1] first."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    return np.where(v <= 0.0031308, 12.92 * v, 1.055 * v ** (1.0 / 2.4) - 0.055)


def srgb_to_xyz(srgb8) -> np.ndarray:
    """Decode 8-bit sRGB triples to CIE XYZ (D65, Y of white = 1)."""
    v = _as_triples(srgb8)
    if np.any((v < 0) | (v > 255)) or np.any(v != np.round(v)):
        raise InputError("invalid 8-bit value: components must be integers in [0, 255]")
    return linear_rgb_to_xyz(srgb_decode(v / 255.0))


def linear_rgb_to_xyz(rgb) -> np.ndarray:
    return _as_triples(rgb) @ LINEAR_SRGB_TO_XYZ


def xyz_to_linear_rgb(xyz) -> np.ndarray:
    return _as_triples(xyz) @ XYZ_TO_LINEAR_SRGB


def xyz_to_lab(xyz, white: WhitePoint = D65) -> np.ndarray:
    """CIE 1976 L*a*b* of XYZ relative to ``white``.

    Negative XYZ components are clamped to zero and a :class:`NumericWarning`
    is issued.
    """
    xyz = _as_triples(xyz)
    if np.any(xyz < 0.0):
        warnings.warn("negative XYZ clamped to 0 before Lab conversion", NumericWarning, stacklevel=2)
        xyz = np.maximum(xyz, 0.0)
    t = xyz / np.asarray(white.xyz)
    f = np.where(
        t > _LAB_DELTA**3,
        np.cbrt(t),
        t / (3.0 * _LAB_DELTA**2) + 4.0 / 29.0,
    )
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_xyz(lab, white: WhitePoint = D65) -> np.ndarray:
    lab = _as_triples(lab)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f > _LAB_DELTA, f**3, 3.0 * _LAB_DELTA**2 * (f - 4.0 / 29.0))
    return t * np.asarray(white.xyz)


def linear_rgb_to_lab(rgb, white: WhitePoint = D65) -> np.ndarray:
    return xyz_to_lab(linear_rgb_to_xyz(rgb), white)


def delta_e(x, y) -> np.ndarray | float:
    """CIE 1976 color difference: Euclidean distance between Lab triples."""
    d = np.linalg.norm(_as_triples(x) - _as_triples(y), axis=-1)
    return float(d) if d.ndim == 0 else d
