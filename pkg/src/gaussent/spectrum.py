"""Exact spectrum of a Gaussian density matrix and the measures built on it.

A Gaussian density matrix with real kernel parameters can be rotated and
rescaled into a product of single-mode kernels

    rho0(x, x') ~ exp[-1/2 (x^2 + x'^2) + eta x x'],   0 <= eta < 1,

each of which has the geometric spectrum ``(1 - xi) xi**n`` with
``xi = eta / (1 + sqrt(1 - eta**2))``.  Everything downstream (entropy,
``E_M``, the largest eigenvalues) is a function of the ``xi_i`` alone.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError, NonNormalizableError, UnsupportedOracleInput, ValidationError
from .state import (
    MAX_CONDITION,
    KernelParams,
    MomentSet,
    moments_from_params,
    params_from_moments,
    symplectic_values,
    validate,
)

log = logging.getLogger(__name__)

UPPER_ETA_TOL = 1e-9
NEGATIVE_ETA_TOL = 1e-12
# C'' below this fraction of |A'| is treated as rounding noise.
IMAG_C_TOL = 1e-10


@dataclass(frozen=True)
class ModeSpectrum:
    """Per-mode ratios ``xi`` (descending) with the matching ``eta`` and ``mu``.

    ``method`` records which reduction produced the values: ``"eta"`` for the
    real orthogonal reduction, ``"williamson"`` for the phase-space fallback
    used when the kernel has a non-negligible imaginary part of ``C``.
    """

    xi: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    lambda0: float
    n_clamped: int = 0
    method: str = "eta"

    @property
    def n_modes(self) -> int:
        return len(self.xi)

    @classmethod
    def from_xi(cls, xi) -> "ModeSpectrum":
        """Build a spectrum directly from mode ratios (mostly for tests and reports)."""
        xi = np.sort(np.atleast_1d(np.asarray(xi, dtype=float)))[::-1]
        if np.any(xi < 0) or np.any(xi >= 1):
            raise DomainError("mode ratios must lie in [0, 1)")
        return cls._assemble(xi, eta_from_xi(xi))

    @classmethod
    def _assemble(cls, xi, eta, n_clamped=0, method="eta") -> "ModeSpectrum":
        order = np.argsort(-xi, kind="stable")
        xi, eta = xi[order], eta[order]
        for arr in (xi, eta):
            arr.setflags(write=False)
        mu = (1.0 + xi) / (1.0 - xi)
        mu.setflags(write=False)
        lambda0 = float(np.exp(np.sum(np.log1p(-xi))))
        return cls(xi, eta, mu, lambda0, n_clamped, method)


def xi_from_eta(eta):
    """Map a single-mode kernel coupling ``eta`` to its eigenvalue ratio ``xi``."""
    arr = np.asarray(eta, dtype=float)
    if np.any(arr < 0) or np.any(arr >= 1) or np.any(~np.isfinite(arr)):
        raise DomainError(f"eta must lie in [0, 1), got {eta!r}")
    out = arr / (1.0 + np.sqrt((1.0 - arr) * (1.0 + arr)))
    return float(out) if out.ndim == 0 else out


def eta_from_xi(xi):
    """Inverse of :func:`xi_from_eta`."""
    arr = np.asarray(xi, dtype=float)
    out = 2.0 * arr / (1.0 + arr * arr)
    return float(out) if out.ndim == 0 else out


def reduce_to_product_form(a_real: np.ndarray, c_real: np.ndarray) -> np.ndarray:
    """Eigenvalues ``eta_i`` of the rescaled coupling matrix.

    Diagonalise ``A' = O a O^T``, rescale by ``a**-1/2`` so the ``A`` part
    becomes the identity, then diagonalise the remaining symmetric coupling.
    Returned in ascending order, unclamped.
    """
    a_vals, o = np.linalg.eigh(0.5 * (a_real + a_real.T))
    if a_vals[0] <= 0:
        raise ValidationError(f"A' is not positive definite: eigenvalue {a_vals[0]:.6g}")
    scaled = o / np.sqrt(a_vals)
    inner = scaled.T @ c_real @ scaled
    return np.linalg.eigvalsh(0.5 * (inner + inner.T))


def _noise_floor(theta: KernelParams) -> float:
    # rounding in A' - C' is amplified by its condition number
    w = np.linalg.eigvalsh(theta.a_real - theta.c_real)
    cond = w[-1] / w[0] if w[0] > 0 else np.inf
    return NEGATIVE_ETA_TOL * max(1.0, cond)


def _clamp_eta(eta: np.ndarray, floor: float) -> tuple[np.ndarray, int]:
    eta = np.array(eta, dtype=float)
    if eta[0] < -floor:
        raise ValidationError(
            f"negative kernel coupling eta = {eta[0]:.3g}; C must be positive semidefinite"
        )
    if not np.all(np.isfinite(eta)) or eta[-1] > 1.0 + UPPER_ETA_TOL:
        raise NonNormalizableError(f"eta = {eta[-1]:.12g} >= 1: state is not normalisable")
    clamped = int(np.count_nonzero(eta >= 1.0))
    if clamped:
        log.warning("clamped %d eta value(s) just above 1", clamped)
        eta[eta >= 1.0] = np.nextafter(1.0, 0.0)
    eta[eta < 0] = 0.0
    return eta, clamped


def _is_real_kernel(theta: KernelParams) -> bool:
    scale = float(np.max(np.abs(theta.a_real)))
    return float(np.max(np.abs(theta.c_imag), initial=0.0)) <= IMAG_C_TOL * scale


def mode_spectrum_from_params(theta: KernelParams, strict: bool = False) -> ModeSpectrum:
    """Mode spectrum of the state described by ``theta``.

    ``A''`` never affects the spectrum and is ignored.  When ``C''`` is
    non-negligible no real point transformation separates the kernel, so the
    spectrum is taken from the Williamson values of the moment covariance.
    """
    if strict:
        validate(theta).raise_if_failed()
    if not _is_real_kernel(theta):
        return _williamson_spectrum(moments_from_params(theta))
    eta = reduce_to_product_form(theta.a_real, theta.c_real)
    eta, clamped = _clamp_eta(eta, _noise_floor(theta))
    return ModeSpectrum._assemble(xi_from_eta(eta), eta, clamped, "eta")


def _williamson_spectrum(xi_set: MomentSet) -> ModeSpectrum:
    mu = symplectic_values(xi_set)
    if mu.min() < 1.0 - 1e-9:
        raise ValidationError(f"unphysical state: symplectic value {mu.min():.6g} < 1")
    mu = np.maximum(mu, 1.0)
    xi = (mu - 1.0) / (mu + 1.0)
    if np.any(xi >= 1.0):
        raise NonNormalizableError("symplectic value is infinite")
    return ModeSpectrum._assemble(xi, eta_from_xi(xi), 0, "williamson")


def mode_spectrum_from_moments(
    xi_set: MomentSet, strict: bool = False, max_condition: float = MAX_CONDITION
) -> ModeSpectrum:
    """Mode spectrum from moments; the means play no role."""
    theta = params_from_moments(xi_set, strict=strict, max_condition=max_condition)
    return mode_spectrum_from_params(theta)


def symplectic_oracle(xi_set: MomentSet) -> np.ndarray:
    """``mu_i`` from the normal-mode formula ``mu**2 = eig(4 Q P)``; ``S = 0`` only."""
    scale = max(np.max(np.abs(xi_set.q_mat)), np.max(np.abs(xi_set.p_mat)))
    if np.max(np.abs(xi_set.s_mat)) > 1e-14 * scale:
        raise UnsupportedOracleInput("symplectic_oracle requires S = 0")
    chol = np.linalg.cholesky(0.5 * (xi_set.q_mat + xi_set.q_mat.T))
    w = np.linalg.eigvalsh(4.0 * chol.T @ xi_set.p_mat @ chol)
    return np.sort(np.sqrt(np.clip(w, 0.0, None)))[::-1]


def grid_oracle(theta: KernelParams, grid_points: int, box_halfwidth: float) -> np.ndarray:
    """Brute-force eigenvalues of the kernel sampled on a uniform grid.

    Only for one or two modes; the matrix has ``grid_points**N`` rows.
    """
    n = theta.n_modes
    if n > 2:
        raise UnsupportedOracleInput("grid_oracle supports at most two modes")
    if grid_points > 200:
        raise UnsupportedOracleInput("grid_oracle supports at most 200 points per axis")
    if grid_points**n > 6400:
        raise UnsupportedOracleInput("two-mode grid limited to 80 points per axis")
    axis = np.linspace(-box_halfwidth, box_halfwidth, grid_points)
    h = axis[1] - axis[0]
    pts = np.stack([g.ravel() for g in np.meshgrid(*([axis] * n), indexing="ij")], axis=1)

    a, c, d = theta.a, theta.c, theta.d
    quad = np.einsum("ai,ij,aj->a", pts, a, pts)
    lin = pts @ d
    expo = (
        -0.5 * quad[:, None]
        - 0.5 * np.conj(quad)[None, :]
        + pts @ c @ pts.T
        + lin[:, None]
        + np.conj(lin)[None, :]
    )
    amc = theta.a_real - theta.c_real
    log_norm = 0.5 * (np.linalg.slogdet(amc)[1] - n * np.log(np.pi))
    log_norm -= theta.d_real @ np.linalg.solve(amc, theta.d_real)
    kernel = np.exp(expo + log_norm) * h**n
    kernel = 0.5 * (kernel + kernel.conj().T)
    return np.sort(np.linalg.eigvalsh(kernel))[::-1]


def _log(base) -> float:
    return 1.0 if base in ("e", math.e) else math.log(base)


def entropy_terms(spec: ModeSpectrum, base=2) -> np.ndarray:
    """Per-mode entropy contributions, sorted descending.  ``base`` is 2 or ``"e"``."""
    xi = np.asarray(spec.xi, dtype=float)
    safe = np.where(xi > 0, xi, 1.0)
    xlogx = np.where(xi > 0, xi * np.log(safe), 0.0)
    terms = -(np.log1p(-xi) + xlogx / (1.0 - xi)) / _log(base)
    return np.sort(np.maximum(terms, 0.0))[::-1]


def entropy(spec: ModeSpectrum, base=2) -> float:
    """Von Neumann entropy (ebits by default)."""
    return float(np.sum(entropy_terms(spec, base)))


def product_identification(spec: ModeSpectrum, m: int) -> float:
    """``E_M = 1 - tr rho**M`` in closed form."""
    if int(m) != m or m < 2:
        raise DomainError(f"M must be an integer >= 2, got {m!r}")
    xi = np.asarray(spec.xi, dtype=float)
    log_trace = np.sum(m * np.log1p(-xi) - np.log1p(-(xi**m)))
    return float(-np.expm1(log_trace))


@dataclass(frozen=True, order=True)
class EigenvalueRecord:
    occupation: tuple[int, ...]
    value: float


def iter_eigenvalues(spec: ModeSpectrum) -> Iterator[EigenvalueRecord]:
    """Yield eigenvalues ``Lambda0 * prod xi_i**n_i`` in non-increasing order.

    Best-first search: each occupation vector is reached along exactly one
    path (increments only at or after the last incremented mode), and a
    child is never larger than its parent, so a heap pops them in order.
    Ties come out in lexicographic order of the occupation vector.
    """
    xi = [float(x) for x in spec.xi]
    n = len(xi)
    start = (0,) * n
    heap = [(-spec.lambda0, start, 0)]
    while heap:
        neg, occ, last = heapq.heappop(heap)
        yield EigenvalueRecord(occ, -neg)
        for j in range(last, n):
            if xi[j] == 0.0:
                continue
            child = occ[:j] + (occ[j] + 1,) + occ[j + 1:]
            heapq.heappush(heap, (neg * xi[j], child, j))


def top_eigenvalues(spec: ModeSpectrum, k: int) -> list[EigenvalueRecord]:
    """The ``k`` largest density-matrix eigenvalues (fewer if the rest vanish)."""
    if k < 1:
        raise DomainError("k must be at least 1")
    return list(itertools.islice(iter_eigenvalues(spec), k))
