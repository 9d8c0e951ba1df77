"""3x3 homographies acting on homogeneous chromaticity triples.

Points are row vectors: a homography ``H`` sends ``c`` to ``c @ H``. Two
matrices that differ by a nonzero factor describe the same map, and
:func:`canonical` picks one representative (unit Frobenius norm, largest
entry positive). ``h33`` is never used for normalization because color
homographies can have ``h33`` close to zero.
"""

from __future__ import annotations

import json
from typing import Literal

import numpy as np

from .colorspace import (
    RGI_MATRIX,
    RGI_MATRIX_INV,
    dehomogenize,
    linear_rgb_to_lab,
    rgb_to_chromaticity,
    rgb_to_rgi,
)
from .errors import DegenerateConfigurationError, InputError

__all__ = [
    "Metric",
    "canonical",
    "is_full_rank",
    "apply",
    "conjugate_construct",
    "estimate_dlt",
    "reprojection_error",
    "to_json",
    "from_json",
    "conjugation_deviation",
]

Metric = Literal["chromaticity", "lab"]

DEFAULT_DEGENERACY_RATIO = 10.0
# Rank-7 design matrices show up as sigma_8 at the rounding level of sigma_1.
_RANK_TOL = 1e-9


def canonical(h) -> np.ndarray:
    """Scale ``h`` to unit Frobenius norm with its largest entry positive.

    Entries whose magnitude is within 1e-9 of the maximum count as tied,
    and the first in row-major order decides the sign.
    """
    h = np.asarray(h, dtype=float)
    norm = np.linalg.norm(h)
    if norm == 0.0 or not np.isfinite(norm):
        raise InputError("cannot normalize a zero or non-finite matrix")
    h = h / norm
    flat = np.abs(h).ravel()
    lead = int(np.argmax(flat >= flat.max() * (1.0 - 1e-9)))
    return h if h.flat[lead] > 0 else -h


def is_full_rank(h, tol: float = 1e-12) -> bool:
    h = np.asarray(h, dtype=float)
    return bool(abs(np.linalg.det(h)) > tol * np.linalg.norm(h) ** 3)


def apply(h, c) -> np.ndarray:
    """Map homogeneous triple(s) ``c`` through ``h`` (returns ``c @ h``)."""
    c = np.asarray(c, dtype=float)
    out = c @ np.asarray(h, dtype=float)
    scale = np.linalg.norm(c, axis=-1) * np.linalg.norm(h)
    if np.any(np.linalg.norm(out, axis=-1) <= 1e-14 * scale):
        raise InputError("homography maps to undefined point")
    return out


def conjugate_construct(m) -> np.ndarray:
    """Chromaticity homography induced by an RGB-space linear map ``m``.

    If RGBs change as ``rho -> rho @ m`` then RGI triples change as
    ``c -> c @ H`` with ``H = C^-1 m C``; the result is returned in
    canonical form.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not is_full_rank(m):
        raise InputError("rank-deficient linear map")
    return canonical(RGI_MATRIX_INV @ m @ RGI_MATRIX)


def _normalizer(pts: np.ndarray):
    """Similarity transforms moving each point set's centroid to the origin
    with mean radius sqrt(2). ``pts`` is ``(T, n, 2)``; returns ``(T, 3, 3)``
    matrices in column-vector convention and a validity mask."""
    centroid = pts.mean(axis=1)
    radius = np.linalg.norm(pts - centroid[:, None, :], axis=2).mean(axis=1)
    ok = radius > 1e-12
    s = np.sqrt(2.0) / np.where(ok, radius, 1.0)
    t = np.zeros((pts.shape[0], 3, 3))
    t[:, 0, 0] = s
    t[:, 1, 1] = s
    t[:, 0, 2] = -s * centroid[:, 0]
    t[:, 1, 2] = -s * centroid[:, 1]
    t[:, 2, 2] = 1.0
    return t, ok


def _dlt_batch(src: np.ndarray, dst: np.ndarray, degeneracy_ratio: float = DEFAULT_DEGENERACY_RATIO):
    """Normalized DLT for a stack of correspondence sets.

    ``src`` and ``dst`` are ``(T, n, 2)`` affine chromaticities. Returns
    ``(T, 3, 3)`` canonical homographies (row-vector convention) and a
    boolean mask of non-degenerate solutions.
    """
    n_sets, n = src.shape[:2]
    t_src, ok_src = _normalizer(src)
    t_dst, ok_dst = _normalizer(dst)
    x = np.einsum("tij,tnj->tni", t_src[:, :2, :2], src) + t_src[:, None, :2, 2]
    u = np.einsum("tij,tnj->tni", t_dst[:, :2, :2], dst) + t_dst[:, None, :2, 2]

    # Column convention u ~ G x; the row-vector homography is G^T.
    rows = max(2 * n, 9)
    a = np.zeros((n_sets, rows, 9))
    xh = np.concatenate([x, np.ones((n_sets, n, 1))], axis=2)
    a[:, 0 : 2 * n : 2, 3:6] = -xh
    a[:, 0 : 2 * n : 2, 6:9] = u[:, :, 1:2] * xh
    a[:, 1 : 2 * n : 2, 0:3] = xh
    a[:, 1 : 2 * n : 2, 6:9] = -u[:, :, 0:1] * xh

    _, sv, vt = np.linalg.svd(a)
    g_norm = vt[:, -1, :].reshape(n_sets, 3, 3)
    ok = ok_src & ok_dst
    ok &= sv[:, 7] > _RANK_TOL * sv[:, 0]
    ok &= sv[:, 7] >= degeneracy_ratio * sv[:, 8]

    g = np.linalg.solve(t_dst, g_norm @ t_src)
    h = np.swapaxes(g, 1, 2)
    norms = np.linalg.norm(h, axis=(1, 2))
    h = h / norms[:, None, None]
    det = np.abs(np.linalg.det(h))
    ok &= det > 1e-12
    flat = np.abs(h).reshape(n_sets, 9)
    lead = np.argmax(flat >= flat.max(axis=1, keepdims=True) * (1.0 - 1e-9), axis=1)
    sign = np.sign(h.reshape(n_sets, 9)[np.arange(n_sets), lead])
    h = h * np.where(sign == 0, 1.0, sign)[:, None, None]
    return h, ok


def estimate_dlt(src, dst, degeneracy_ratio: float = DEFAULT_DEGENERACY_RATIO) -> np.ndarray:
    """Least-squares homography with ``src @ H ~ dst`` from >= 4 pairs.

    Args:
        src, dst: ``(n, 3)`` homogeneous chromaticities (or ``(n, 2)``
            affine ones) of corresponding points.
        degeneracy_ratio: minimum accepted ratio between the two smallest
            singular values of the design matrix.

    Returns:
        The homography in canonical form. For exactly four points in
        general position it interpolates them.

    Raises:
        InputError: fewer than four pairs or mismatched shapes.
        DegenerateConfigurationError: the pairs do not pin down ``H``.
    """
    src_xy = _affine(src)
    dst_xy = _affine(dst)
    if src_xy.shape != dst_xy.shape:
        raise InputError("source and target point sets differ in shape")
    if len(src_xy) < 4:
        raise InputError(f"insufficient points: need at least 4 correspondences, got {len(src_xy)}")
    h, ok = _dlt_batch(src_xy[None], dst_xy[None], degeneracy_ratio)
    if not ok[0]:
        raise DegenerateConfigurationError("degenerate configuration: correspondences do not determine a homography")
    return h[0]


def _affine(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] not in (2, 3):
        raise InputError(f"expected (n, 2) or (n, 3) points, got shape {p.shape}")
    return p if p.shape[1] == 2 else dehomogenize(p)


def _chroma_rows(c: np.ndarray, w: np.ndarray, w_tol: np.ndarray) -> np.ndarray:
    """Dehomogenize without raising: points at infinity become NaN."""
    with np.errstate(divide="ignore", invalid="ignore"):
        xy = c[..., :2] / w[..., None]
    xy[np.abs(w) <= w_tol] = np.nan
    return xy


def _finite_chroma(c: np.ndarray) -> np.ndarray:
    w = c[..., 2]
    tol = 1e-12 * np.maximum(np.maximum(np.abs(c[..., 0]), np.abs(c[..., 1])), 1.0)
    return _chroma_rows(c, w, tol)


def _rgb_from_chroma(xy: np.ndarray, intensity: np.ndarray) -> np.ndarray:
    rgb = np.stack([xy[..., 0], xy[..., 1], 1.0 - xy[..., 0] - xy[..., 1]], axis=-1)
    return np.maximum(rgb * intensity[..., None], 0.0)


def _batch_errors(hs: np.ndarray, src: np.ndarray, dst: np.ndarray, metric: Metric, intensity: np.ndarray | None):
    """Per-pair errors for a stack of homographies, shape ``(T, n)``."""
    mapped = _finite_chroma(np.einsum("nj,tjk->tnk", src, hs))
    target = _finite_chroma(dst)
    if metric == "chromaticity":
        err = np.linalg.norm(mapped - target[None], axis=2)
    elif metric == "lab":
        if intensity is None:
            intensity = dst[:, 2]
        intensity = np.asarray(intensity, dtype=float)
        lab_target = linear_rgb_to_lab(_rgb_from_chroma(target, intensity))
        bad = ~np.isfinite(mapped).all(axis=2)
        rgb_mapped = _rgb_from_chroma(np.where(bad[..., None], 0.0, mapped), intensity[None])
        err = np.linalg.norm(linear_rgb_to_lab(rgb_mapped) - lab_target[None], axis=2)
        err[bad] = np.nan
    else:
        raise InputError(f"unknown metric {metric!r}")
    return np.where(np.isnan(err), np.inf, err)


def reprojection_error(h, src, dst, metric: Metric = "chromaticity", intensity=None) -> np.ndarray:
    """Per-pair error of ``h`` on the correspondences ``src -> dst``.

    ``metric="chromaticity"`` is the Euclidean distance between the mapped
    and target rg-chromaticities. ``metric="lab"`` rebuilds an RGB for the
    mapped and target chromaticities at the target's intensity (``dst``'s
    third coordinate unless ``intensity`` is given) and returns their CIE76
    difference. Pairs mapped to infinity get an infinite error.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 3:
        raise InputError("src and dst must be matching (n, 3) homogeneous arrays")
    return _batch_errors(np.asarray(h, dtype=float)[None], src, dst, metric, intensity)[0]


def to_json(h) -> str:
    """Serialize as a 9-element row-major JSON array."""
    return json.dumps([float(v) for v in np.asarray(h, dtype=float).ravel()])


def from_json(text: str) -> np.ndarray:
    values = json.loads(text)
    if not isinstance(values, list) or len(values) != 9:
        raise InputError("homography JSON must be a 9-element array")
    return np.array(values, dtype=float).reshape(3, 3)


def conjugation_deviation(samples: int = 1000, seed: int = 0) -> float:
    """Largest gap between ``chromaticity(rho @ M)`` and the chromaticity
    obtained by mapping ``rgi(rho)`` through ``conjugate_construct(M)``.

    Draws Gaussian ``M`` and RGBs uniform in [0.01, 1] until ``samples``
    pairs with a positive mapped component sum are collected.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < samples:
        m = rng.normal(size=(3, 3))
        rho = rng.uniform(0.01, 1.0, 3)
        mapped = rho @ m
        if mapped.sum() <= 0.0 or not is_full_rank(m):
            continue
        via_h = dehomogenize(apply(conjugate_construct(m), rgb_to_rgi(rho)))
        worst = max(worst, float(np.abs(via_h - rgb_to_chromaticity(mapped)).max()))
        done += 1
    return worst
