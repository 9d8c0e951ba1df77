"""Color homography: shading-invariant color mapping between photometric views."""

from .als import AlsConfig, AlsResult, als_solve, solve_h, solve_shading
from .colorspace import (
    D65,
    delta_e,
    dehomogenize,
    linear_rgb_to_lab,
    rgb_to_chromaticity,
    rgb_to_rgi,
    srgb_to_xyz,
    xyz_to_lab,
)
from .correction import (
    ChartMeasurement,
    CorrectionMatrix,
    DeltaEStats,
    apply_correction,
    evaluate,
    fit_homography,
    fit_least_squares,
    quantile,
    shading_correct,
)
from .errors import ColorHomographyError, DegenerateConfigurationError, InputError, NumericWarning, SolverError
from .homography import apply, canonical, conjugate_construct, estimate_dlt, reprojection_error
from .ransac import RansacConfig, RansacResult, ransac_solve, sample_indices
from .synthetic import SynthSpec, generate_synthetic

__version__ = "0.1.0"
