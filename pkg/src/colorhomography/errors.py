"""Exception and warning types shared across the package."""


class ColorHomographyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ColorHomographyError, ValueError):
    """Invalid or malformed input data (CLI exit code 2)."""


class SolverError(ColorHomographyError, RuntimeError):
    """A solver could not produce a result (CLI exit code 3)."""


class DegenerateConfigurationError(SolverError):
    """Point correspondences do not determine a unique homography."""


class NumericWarning(UserWarning):
    """Input was silently repaired (clamped, floored) to keep a result defined."""
