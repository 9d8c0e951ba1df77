"""Robust color homography estimation by random 4-point consensus.

Randomness comes from :func:`numpy.random.default_rng` (PCG64) seeded with
an explicit integer, so a given ``(pairs, config)`` always yields the same
result. Trials are generated and scored in blocks; block boundaries do not
change the random stream or the winner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .als import AlsConfig, als_solve
from .errors import InputError, SolverError
from .homography import (
    DEFAULT_DEGENERACY_RATIO,
    Metric,
    _batch_errors,
    _dlt_batch,
    _finite_chroma,
    canonical,
    conjugate_construct,
)

__all__ = ["RansacConfig", "RansacResult", "sample_indices", "ransac_solve", "DEFAULT_THRESHOLDS"]

DEFAULT_THRESHOLDS = {"lab": 2.0, "chromaticity": 0.02}
SAMPLE_SIZE = 4
_BLOCK = 256


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 2000
    inlier_threshold: float | None = None
    seed: int = 0
    metric: Metric = "chromaticity"
    min_inliers: int = 4
    refit: str = "dlt"
    degeneracy_ratio: float = DEFAULT_DEGENERACY_RATIO

    def __post_init__(self):
        if self.iterations < 1:
            raise InputError("iterations must be at least 1")
        if self.metric not in DEFAULT_THRESHOLDS:
            raise InputError(f"unknown metric {self.metric!r}")
        if self.inlier_threshold is not None and not self.inlier_threshold > 0:
            raise InputError("inlier threshold must be positive")
        if self.refit not in ("dlt", "als"):
            raise InputError(f"unknown refit {self.refit!r}")
        if self.min_inliers < SAMPLE_SIZE:
            raise InputError("min_inliers must be at least 4")

    @property
    def threshold(self) -> float:
        if self.inlier_threshold is None:
            return DEFAULT_THRESHOLDS[self.metric]
        return self.inlier_threshold


@dataclass
class RansacResult:
    h: np.ndarray
    inlier_mask: np.ndarray
    consensus_error: float
    trials_used: int
    als: object = None

    def to_dict(self) -> dict:
        out = self.als.to_dict() if self.als is not None else {}
        out["H"] = [float(v) for v in canonical(self.h).ravel()]
        out["inlier_mask"] = [bool(v) for v in self.inlier_mask]
        out["consensus_error"] = float(self.consensus_error)
        out["trials_used"] = int(self.trials_used)
        return out


def sample_indices(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``k`` distinct indices from ``range(n)`` uniformly.

    Consumes exactly ``n`` doubles from ``rng``, so ``t`` consecutive calls
    match one ``(t, n)`` block draw.
    """
    if k > n:
        raise InputError(f"insufficient population: cannot draw {k} of {n}")
    return np.argsort(rng.random(n), kind="stable")[:k]


def _sample_block(n: int, k: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    return np.argsort(rng.random((trials, n)), axis=1, kind="stable")[:, :k]


def _mean_inlier_error(errors: np.ndarray, mask: np.ndarray) -> float:
    return float(errors[mask].mean())


def ransac_solve(src, dst, config: RansacConfig | None = None, rgb=None) -> RansacResult:
    """Best-consensus homography mapping ``src`` to ``dst`` chromaticities.

    Args:
        src, dst: ``(n, 3)`` homogeneous triples, typically RGI values.
        config: sampling and scoring parameters.
        rgb: optional ``(source_rgb, target_rgb)`` pair of ``(n, 3)``
            arrays, required when ``config.refit == "als"``.

    The winning trial has the most inliers, then the lowest mean inlier
    error, then the lowest trial index. The final model is refit on its
    inliers and kept only if it does not raise the mean inlier error.

    Raises:
        InputError: fewer than 4 pairs, or ALS refit requested without RGBs.
        SolverError: "no consensus" when no trial reaches ``min_inliers``.
    """
    cfg = config or RansacConfig()
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 3:
        raise InputError("src and dst must be matching (n, 3) arrays")
    n = len(src)
    if n < SAMPLE_SIZE:
        raise InputError(f"insufficient points: need at least 4 correspondences, got {n}")
    if cfg.refit == "als" and rgb is None:
        raise InputError("ALS refit needs the raw RGB patch sets")

    src_xy = _finite_chroma(src)
    dst_xy = _finite_chroma(dst)
    threshold = cfg.threshold
    rng = np.random.default_rng(cfg.seed)

    best_key = None
    best = None
    trials_used = 0
    for start in range(0, cfg.iterations, _BLOCK):
        size = min(_BLOCK, cfg.iterations - start)
        idx = _sample_block(n, SAMPLE_SIZE, size, rng)
        s_xy, d_xy = src_xy[idx], dst_xy[idx]
        finite = np.isfinite(s_xy).all(axis=(1, 2)) & np.isfinite(d_xy).all(axis=(1, 2))
        hs, ok = _dlt_batch(np.nan_to_num(s_xy), np.nan_to_num(d_xy), cfg.degeneracy_ratio)
        ok &= finite
        if not ok.any():
            continue
        trials_used += int(ok.sum())
        errors = _batch_errors(hs[ok], src, dst, cfg.metric, None)
        inliers = errors < threshold
        counts = inliers.sum(axis=1)
        with np.errstate(invalid="ignore"):
            mean_err = np.where(counts > 0, np.where(inliers, errors, 0.0).sum(axis=1) / np.maximum(counts, 1), np.inf)
        trial_ids = start + np.flatnonzero(ok)
        # lexsort: last key is primary
        order = np.lexsort((trial_ids, mean_err, -counts))
        j = order[0]
        key = (-int(counts[j]), float(mean_err[j]), int(trial_ids[j]))
        if best_key is None or key < best_key:
            best_key = key
            best = (hs[ok][j], inliers[j], errors[j])

    if best is None or -best_key[0] < cfg.min_inliers:
        raise SolverError("no consensus: no sample reached the minimum inlier count")

    h_raw, mask, raw_errors = best
    raw_score = _mean_inlier_error(raw_errors, mask)
    h_final, final_score = h_raw, raw_score
    als_result = None

    if cfg.refit == "als":
        rgb_src, rgb_dst = (np.asarray(x, dtype=float) for x in rgb)
        als_result = als_solve(rgb_src[mask], rgb_dst[mask], AlsConfig())
        candidate = conjugate_construct(als_result.h)
        ok = True
    elif mask.sum() > SAMPLE_SIZE:
        cand, ok_arr = _dlt_batch(src_xy[mask][None], dst_xy[mask][None], cfg.degeneracy_ratio)
        candidate, ok = cand[0], bool(ok_arr[0])
    else:
        ok = False
    if ok:
        cand_errors = _batch_errors(candidate[None], src, dst, cfg.metric, None)[0]
        cand_score = _mean_inlier_error(cand_errors, mask)
        if cand_score <= raw_score:
            h_final, final_score = candidate, cand_score
        else:
            als_result = None

    return RansacResult(
        h=canonical(h_final),
        inlier_mask=mask.copy(),
        consensus_error=final_score,
        trials_used=trials_used,
        als=als_result,
    )
