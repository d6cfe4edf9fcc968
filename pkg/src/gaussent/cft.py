"""Conformal signatures of entanglement: log-sin profile and log-size growth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GaussentError

FREE_BOSON_SLOPE = 1.0 / 3.0


class FitError(GaussentError, ValueError):
    """The least-squares problem is degenerate or underdetermined."""


@dataclass(frozen=True)
class FitResult:
    slope: float
    offset: float
    rms_residual: float
    max_residual: float
    n_points: int
    covariance: np.ndarray

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "offset": self.offset,
            "rms_residual": self.rms_residual,
            "max_residual": self.max_residual,
            "n_points": self.n_points,
            "covariance": np.asarray(self.covariance).tolist(),
        }


def _log(x, base):
    return np.log(x) if base in ("e", math.e) else np.log(x) / math.log(base)


def holzhey_entropy(sigma: float, lambda_total: float, epsilon: float, c_total: float = 2.0, base=2) -> float:
    """CFT entropy of a fraction ``sigma`` of a system of length ``lambda_total``."""
    if not 0 < sigma < 1:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    if not (lambda_total > 0 and epsilon > 0):
        raise DomainError("system length and cutoff must be positive")
    arg = lambda_total / (math.pi * epsilon) * math.sin(math.pi * sigma)
    return float(c_total / 6.0 * _log(arg, base))


def _ols(x: np.ndarray, y: np.ndarray, slope: float | None = None, anchor: np.ndarray | None = None) -> FitResult:
    n = len(x)
    if slope is None:
        if n < 3:
            raise FitError(f"need at least 3 points, got {n}")
        design = np.column_stack([x, np.ones(n)])
        coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
        if rank < 2:
            raise FitError("degenerate design matrix: all abscissae are equal")
        b, a = float(coef[0]), float(coef[1])
        resid = y - design @ coef
        dof = max(n - 2, 1)
        cov = float(resid @ resid) / dof * np.linalg.inv(design.T @ design)
    else:
        if n < 1:
            raise FitError("no points to fit")
        b = float(slope)
        shifted = y - b * x
        a = float(np.mean(shifted if anchor is None else shifted[anchor]))
        resid = shifted - a
        var_a = float(resid @ resid) / max(n - 1, 1) / n
        cov = np.array([[0.0, 0.0], [0.0, var_a]])
    rms = float(np.sqrt(np.mean(resid**2)))
    return FitResult(b, a, rms, float(np.max(np.abs(resid))), n, cov)


def fit_log_sin(points, slope: float | None = None, anchor_ends: bool = False,
                trim: bool = False, base=2) -> FitResult:
    """Fit ``S = b log(sin(pi sigma)) + a`` to ``(sigma, S)`` pairs.

    With ``slope`` given only ``a`` is fitted; ``anchor_ends`` then takes
    ``a`` from the smallest and largest ``sigma`` alone.  ``trim`` drops
    those two edge points before fitting.
    """
    pts = np.asarray(sorted(points), dtype=float).reshape(-1, 2)
    if trim:
        pts = pts[1:-1]
    sigma, s = pts[:, 0], pts[:, 1]
    if np.any(sigma <= 0) or np.any(sigma >= 1):
        raise DomainError("sigma must lie in (0, 1)")
    x = _log(np.sin(np.pi * sigma), base)
    anchor = None
    if anchor_ends:
        if slope is None:
            raise FitError("anchor_ends requires a fixed slope")
        anchor = np.array([0, len(x) - 1])
    return _ols(x, s, slope, anchor)


def fit_size_scaling(points, base=2) -> FitResult:
    """Fit ``S = slope log(N) + a`` to ``(N, S)`` pairs."""
    pts = np.asarray(sorted(points), dtype=float).reshape(-1, 2)
    if np.any(pts[:, 0] <= 0):
        raise DomainError("system sizes must be positive")
    return _ols(_log(pts[:, 0], base), pts[:, 1])


def is_conformal(fit: FitResult, target: float = FREE_BOSON_SLOPE,
                 slope_tol: float = 0.05, rms_tol: float = 0.05) -> bool:
    """Verdict: slope near ``target`` and small residual scatter."""
    return abs(fit.slope - target) <= slope_tol and fit.rms_residual <= rms_tol
