"""Alternating least squares for ``D A H ~ B``.

``A`` and ``B`` are ``(n, 3)`` RGB patch sets, ``D`` is a per-row positive
shading factor and ``H`` a 3x3 color map. Each iteration solves exactly for
the shading with the current estimate fixed, then for the map, and folds
both into the running estimate ``A_i = D_i A_{i-1} H_i``. The accumulated
``D`` (entrywise product) and ``H`` (ordered matrix product) therefore
satisfy ``D A H == A_final``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericWarning, SolverError
from .homography import canonical

__all__ = ["AlsConfig", "AlsResult", "solve_shading", "solve_h", "als_solve"]


@dataclass(frozen=True)
class AlsConfig:
    """Stopping rule and shading floor for :func:`als_solve`.

    ``epsilon`` bounds the Frobenius norm of the change in the running
    estimate between iterations.
    """

    epsilon: float = 1e-12
    max_iterations: int = 1000
    shading_floor: float = 1e-8

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be at least 1")
        if not self.shading_floor > 0:
            raise InputError("shading_floor must be positive")


@dataclass
class AlsResult:
    h: np.ndarray
    d: np.ndarray
    residuals: list[float]
    iterations: int
    converged: bool
    rank_deficient: bool = False
    monotone: bool = True
    estimate: np.ndarray = field(default=None, repr=False)

    @property
    def h_canonical(self) -> np.ndarray:
        return canonical(self.h)

    def to_dict(self) -> dict:
        return {
            "H": [float(v) for v in self.h_canonical.ravel()],
            "D": [float(v) for v in self.d],
            "residuals": [float(v) for v in self.residuals],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3 or a.shape != b.shape:
        raise InputError(f"patch sets must be matching (n, 3) arrays, got {a.shape} and {b.shape}")
    return a, b


def solve_shading(a, b, floor: float = 1e-8) -> np.ndarray:
    """Per-row least-squares scale ``d_i = <a_i, b_i> / <a_i, a_i>``.

    Values below ``floor`` are raised to it; all-zero rows of ``a`` get
    ``floor`` and trigger a :class:`NumericWarning`.
    """
    a, b = _check_pair(a, b)
    norm2 = np.einsum("ij,ij->i", a, a)
    zero = norm2 == 0.0
    if np.any(zero):
        warnings.warn(f"{int(zero.sum())} zero row(s) in shading solve", NumericWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.einsum("ij,ij->i", a, b) / norm2
    d[zero] = floor
    return np.maximum(d, floor)


def solve_h(da, b) -> tuple[np.ndarray, int]:
    """Least-squares ``H`` minimizing ``||da @ H - b||_F``.

    Uses an SVD-based solver, which returns the minimum-norm solution when
    ``da`` is rank deficient. Returns ``(H, rank)``.
    """
    da, b = _check_pair(da, b)
    h, _, rank, _ = np.linalg.lstsq(da, b, rcond=None)
    return h, int(rank)


def als_solve(a, b, config: AlsConfig | None = None) -> AlsResult:
    """Jointly fit shading and a 3x3 map so that ``diag(d) @ a @ h ~ b``.

    Args:
        a: ``(n, 3)`` source RGBs, ``n >= 4``.
        b: ``(n, 3)`` target RGBs in the same row order.
        config: stopping rule; defaults to :class:`AlsConfig()`.

    Returns:
        An :class:`AlsResult` whose ``residuals[i]`` is ``||A_{i+1} - B||_F``.

    Raises:
        SolverError: if the first iteration increases the residual, which
            only happens for badly scaled input.
    """
    cfg = config or AlsConfig()
    a, b = _check_pair(a, b)
    if len(a) < 4:
        raise InputError(f"insufficient points: need at least 4 patches, got {len(a)}")
    if np.any(np.all(a <= 0.0, axis=1)):
        raise InputError("every source patch needs a positive component")

    b_norm = np.linalg.norm(b)
    previous = np.linalg.norm(a - b)
    current = a
    d_total = np.ones(len(a))
    h_total = np.eye(3)
    residuals: list[float] = []
    rank_deficient = False
    monotone = True
    converged = False

    for it in range(1, cfg.max_iterations + 1):
        d = solve_shading(current, b, cfg.shading_floor)
        shaded = d[:, None] * current
        h, rank = solve_h(shaded, b)
        rank_deficient |= rank < 3
        updated = shaded @ h
        residual = float(np.linalg.norm(updated - b))
        slack = 1e-12 * (previous + b_norm)
        if residual > previous + slack:
            if it == 1:
                raise SolverError("no progress: first ALS iteration increased the residual")
            monotone = False
        residuals.append(residual)
        step = np.linalg.norm(updated - current)
        d_total *= d
        h_total = h_total @ h
        current = updated
        previous = residual
        if step < cfg.epsilon:
            converged = True
            break

    if rank_deficient:
        warnings.warn("rank-deficient shaded patches; H is a minimum-norm solution", NumericWarning, stacklevel=2)
    if not monotone:
        warnings.warn("ALS residual increased between iterations", NumericWarning, stacklevel=2)
    return AlsResult(
        h=h_total,
        d=d_total,
        residuals=residuals,
        iterations=it,
        converged=converged,
        rank_deficient=rank_deficient,
        monotone=monotone,
        estimate=current,
    )
