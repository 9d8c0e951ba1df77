"""Camera color correction and its CIE Lab evaluation.

The evaluation protocol fits each method on shading-contaminated chart
RGBs, applies the fitted matrix to the shading-corrected RGBs (chart divided
by a gray card shot in the same place) and scores the result against the
reference in Lab.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .als import AlsConfig, AlsResult, als_solve
from .colorspace import (
    D65,
    WhitePoint,
    linear_rgb_to_lab,
    rgb_to_rgi,
    srgb_decode,
    srgb_encode,
)
from .errors import InputError, NumericWarning, SolverError
from .homography import canonical
from .ransac import RansacConfig, RansacResult, ransac_solve

__all__ = [
    "METHODS",
    "METHOD_ALIASES",
    "CorrectionMatrix",
    "DeltaEStats",
    "ChartMeasurement",
    "MethodEvaluation",
    "fit_least_squares",
    "fit_homography",
    "fit",
    "apply_correction",
    "shading_correct",
    "quantile",
    "evaluate",
]

METHODS = ("least_squares", "homography_als", "homography_ransac")
METHOD_ALIASES = {"ls": "least_squares", "als": "homography_als", "ransac": "homography_ransac"}

LabPath = Literal["linear", "srgb8"]


@dataclass(frozen=True)
class CorrectionMatrix:
    """3x3 map from camera RGB rows to reference RGB rows (``rgb @ matrix``)."""

    matrix: np.ndarray
    method: str
    als: AlsResult | None = field(default=None, compare=False, repr=False)
    ransac: RansacResult | None = field(default=None, compare=False, repr=False)

    @property
    def canonical(self) -> np.ndarray:
        return canonical(self.matrix)

    def to_dict(self) -> dict:
        out = {"method": self.method, "matrix": [float(v) for v in self.matrix.ravel()]}
        if self.ransac is not None:
            out.update(self.ransac.to_dict())
        if self.als is not None:
            out.update(self.als.to_dict())
        return out


@dataclass(frozen=True)
class DeltaEStats:
    mean: float
    median: float
    q95: float
    max: float

    @classmethod
    def from_values(cls, values) -> "DeltaEStats":
        v = np.asarray(values, dtype=float)
        return cls(float(v.mean()), quantile(v, 0.5), quantile(v, 0.95), float(v.max()))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mean, self.median, self.q95, self.max)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "q95": self.q95, "max": self.max}


@dataclass
class ChartMeasurement:
    """Corresponding patch sets for one chart, all in the same row order.

    ``observed`` are raw camera RGBs, ``reference`` the target linear RGBs.
    Either ``shading_corrected`` or ``gray`` must be present for
    :func:`evaluate`.
    """

    observed: np.ndarray
    reference: np.ndarray
    shading_corrected: np.ndarray | None = None
    gray: np.ndarray | None = None

    def __post_init__(self):
        self.observed = _patches(self.observed, "observed")
        self.reference = _patches(self.reference, "reference")
        n = len(self.observed)
        for name in ("reference", "shading_corrected", "gray"):
            value = getattr(self, name)
            if value is None:
                continue
            value = _patches(value, name)
            setattr(self, name, value)
            if len(value) != n:
                raise InputError(f"{name} has {len(value)} rows, observed has {n}")


@dataclass
class MethodEvaluation:
    correction: CorrectionMatrix
    stats: DeltaEStats
    delta_e: np.ndarray
    clamped: int


def _patches(x, name: str = "patches") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InputError(f"{name} must be an (n, 3) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def _check_fit_inputs(observed, reference):
    observed = _patches(observed, "observed")
    reference = _patches(reference, "reference")
    if observed.shape != reference.shape:
        raise InputError(f"observed {observed.shape} and reference {reference.shape} differ in shape")
    return observed, reference


def fit_least_squares(observed, reference) -> CorrectionMatrix:
    """Plain linear regression ``observed @ M ~ reference`` with no shading model."""
    observed, reference = _check_fit_inputs(observed, reference)
    m, _, rank, _ = np.linalg.lstsq(observed, reference, rcond=None)
    if rank < 3:
        warnings.warn("observed patches are rank deficient; using minimum-norm solution", NumericWarning, stacklevel=2)
    return CorrectionMatrix(m, "least_squares")


def _match_exposure(h: np.ndarray, observed: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Fix the free global scale of a shading-invariant fit.

    The scale is chosen so that the shading-free input implied by the
    reference (``reference @ inv(h)``) has the same mean row sum as the
    observed patches, the same exposure convention :func:`shading_correct`
    uses.
    """
    implied = reference @ np.linalg.inv(h)
    return h * (implied.sum() / observed.sum())


def fit_homography(
    observed,
    reference,
    solver: str = "als",
    als_config: AlsConfig | None = None,
    ransac_config: RansacConfig | None = None,
) -> CorrectionMatrix:
    """Shading-invariant 3x3 correction.

    ``solver="als"`` fits ``D @ observed @ H ~ reference`` on all patches
    and keeps ``H``. ``solver="ransac"`` first finds the chromaticity
    consensus set and then runs the same ALS fit on its inliers. The
    per-patch shading is discarded and the global scale set by
    exposure matching.
    """
    observed, reference = _check_fit_inputs(observed, reference)
    if solver == "als":
        result = als_solve(observed, reference, als_config)
        h = _match_exposure(result.h, observed, reference)
        return CorrectionMatrix(h, "homography_als", als=result)
    if solver == "ransac":
        consensus = ransac_solve(rgb_to_rgi(observed), rgb_to_rgi(reference), ransac_config)
        mask = consensus.inlier_mask
        result = als_solve(observed[mask], reference[mask], als_config)
        h = _match_exposure(result.h, observed[mask], reference[mask])
        return CorrectionMatrix(h, "homography_ransac", als=result, ransac=consensus)
    raise InputError(f"unknown homography solver {solver!r}")


def fit(method: str, observed, reference, als_config=None, ransac_config=None) -> CorrectionMatrix:
    """Dispatch on a method tag from :data:`METHODS` (or its short alias)."""
    method = METHOD_ALIASES.get(method, method)
    if method == "least_squares":
        return fit_least_squares(observed, reference)
    if method == "homography_als":
        return fit_homography(observed, reference, "als", als_config=als_config)
    if method == "homography_ransac":
        return fit_homography(observed, reference, "ransac", als_config=als_config, ransac_config=ransac_config)
    raise InputError(f"unknown method {method!r}")


def apply_correction(m, rgbs) -> tuple[np.ndarray, int]:
    """Return ``(rgbs @ M clamped at 0, number of clamped entries)``."""
    matrix = m.matrix if isinstance(m, CorrectionMatrix) else np.asarray(m, dtype=float)
    out = _patches(rgbs) @ matrix
    negative = out < 0.0
    return np.where(negative, 0.0, out), int(negative.sum())


def shading_correct(chart, gray) -> np.ndarray:
    """Divide chart RGBs by co-located gray-card RGBs.

    The quotient is rescaled so that its mean row sum equals the chart's,
    which keeps the overall exposure of the input.
    """
    chart = _patches(chart, "chart")
    gray = np.asarray(gray, dtype=float)
    if gray.ndim == 1:
        gray = gray[:, None]
    try:
        gray = np.broadcast_to(gray, chart.shape)
    except ValueError:
        raise InputError(f"gray reference shape {gray.shape} does not match chart {chart.shape}") from None
    if not np.all(np.isfinite(gray)) or np.any(gray <= 0.0):
        raise InputError("invalid gray reference: entries must be positive")
    out = chart / gray
    return out * (chart.sum() / out.sum())


def quantile(values, q: float) -> float:
    """Linearly interpolated quantile at sorted position ``q * (n - 1)``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise InputError("no data for quantile")
    if not 0.0 <= q <= 1.0:
        raise InputError("quantile level must be in [0, 1]")
    return float(np.quantile(v, q, method="linear"))


def _to_lab(rgb: np.ndarray, lab_path: LabPath, white: WhitePoint) -> np.ndarray:
    if lab_path == "linear":
        return linear_rgb_to_lab(rgb, white)
    if lab_path == "srgb8":
        encoded = np.round(srgb_encode(rgb) * 255.0) / 255.0
        return linear_rgb_to_lab(srgb_decode(encoded), white)
    raise InputError(f"unknown Lab path {lab_path!r}")


def evaluate(
    measurement: ChartMeasurement,
    methods=METHODS,
    lab_path: LabPath = "linear",
    white: WhitePoint = D65,
    als_config: AlsConfig | None = None,
    ransac_config: RansacConfig | None = None,
) -> dict[str, MethodEvaluation]:
    """Run the two-step protocol for each method.

    Raises:
        SolverError: "protocol inputs incomplete" when neither shading
            corrected RGBs nor a gray reference is available.
    """
    if measurement.shading_corrected is not None:
        target_input = measurement.shading_corrected
    elif measurement.gray is not None:
        target_input = shading_correct(measurement.observed, measurement.gray)
    else:
        raise SolverError("protocol inputs incomplete: need shading-corrected patches or a gray reference")

    lab_reference = _to_lab(np.maximum(measurement.reference, 0.0), lab_path, white)
    results = {}
    for method in methods:
        correction = fit(method, measurement.observed, measurement.reference, als_config, ransac_config)
        corrected, clamped = apply_correction(correction, target_input)
        errors = np.linalg.norm(_to_lab(corrected, lab_path, white) - lab_reference, axis=1)
        results[correction.method] = MethodEvaluation(correction, DeltaEStats.from_values(errors), errors, clamped)
    return results
