"""Seeded synthetic charts with known correction and shading."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correction import ChartMeasurement, shading_correct
from .errors import InputError

__all__ = ["SynthSpec", "SyntheticChart", "random_correction", "generate_synthetic"]

MODES = ("random-full-rank", "random-diagonal")


@dataclass(frozen=True)
class SynthSpec:
    n_patches: int = 24
    shading_low: float = 0.5
    shading_high: float = 1.5
    noise_sigma: float = 0.0
    mode: str = "random-full-rank"
    seed: int = 0

    def __post_init__(self):
        if self.n_patches < 4:
            raise InputError("need at least 4 patches")
        if not 0 < self.shading_low <= self.shading_high:
            raise InputError("shading bounds must satisfy 0 < low <= high")
        if self.noise_sigma < 0:
            raise InputError("noise_sigma must be non-negative")
        if self.mode not in MODES:
            raise InputError(f"unknown mode {self.mode!r}; expected one of {MODES}")


@dataclass
class SyntheticChart:
    measurement: ChartMeasurement
    correction: np.ndarray
    shading: np.ndarray
    unshaded: np.ndarray

    def ground_truth(self) -> dict:
        return {
            "M": [float(v) for v in self.correction.ravel()],
            "D": [float(v) for v in self.shading],
        }


def random_correction(rng: np.random.Generator, mode: str = "random-full-rank") -> np.ndarray:
    """A camera-to-reference matrix shaped like a real color correction.

    Full-rank draws have gains in [1.2, 2.0] on the diagonal and crosstalk
    in [-0.6, 0] elsewhere; diagonal draws are per-channel gains in
    [0.5, 2.0].
    """
    if mode == "random-diagonal":
        return np.diag(rng.uniform(0.5, 2.0, 3))
    off = rng.uniform(-0.6, 0.0, (3, 3))
    return np.diag(rng.uniform(1.2, 2.0, 3)) + off * (1.0 - np.eye(3))


def generate_synthetic(spec: SynthSpec) -> SyntheticChart:
    """Draw a chart whose true correction maps observed onto reference.

    Reference patches are uniform in [0.05, 0.95]^3. The camera sees
    ``reference @ inv(M)``, which is then shaded per patch by a factor
    from ``U[shading_low, shading_high]`` and optionally perturbed by
    relative Gaussian noise. The shading-corrected patches are the
    noiseless camera values after gray-card division.
    """
    rng = np.random.default_rng(spec.seed)
    reference = rng.uniform(0.05, 0.95, (spec.n_patches, 3))
    while True:
        m = random_correction(rng, spec.mode)
        unshaded = reference @ np.linalg.inv(m)
        if unshaded.min() > 0.0:
            break
    shading = rng.uniform(spec.shading_low, spec.shading_high, spec.n_patches)
    shaded = shading[:, None] * unshaded
    corrected = shading_correct(shaded, shading)
    observed = shaded
    if spec.noise_sigma > 0:
        observed = shaded * (1.0 + spec.noise_sigma * rng.standard_normal(shaded.shape))
    measurement = ChartMeasurement(observed=observed, reference=reference, shading_corrected=corrected)
    return SyntheticChart(measurement, m, shading, unshaded)
