"""Ground state of the discretised Klein-Gordon chain and its subregions.

The chain has ``N`` sites with lattice constant ``a`` and mass ``kappa``; the
normal modes have wavenumbers ``k_m = pi (2m + alpha) / N`` and frequencies

    omega_k**2 = (4 / a**2) sin(k/2)**2 + kappa**2.

``alpha = 0`` keeps the ``k = 0`` zero mode (periodic field), ``alpha = 1``
shifts the grid by half a step and removes it (antiperiodic field).

Only ``kappa * a`` enters the entanglement, so the unit convention matters.
:meth:`ChainConfig.with_length` holds the total length ``Lambda = a N`` fixed
(``kappa`` in units of ``1/Lambda``); the plain constructor fixes ``a``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError
from .spectrum import ModeSpectrum, entropy, mode_spectrum_from_moments
from .state import MomentSet


class ZeroModeError(DomainError):
    """The zero mode of a massless periodic chain makes ``Q`` diverge."""


@dataclass(frozen=True)
class ChainConfig:
    n_sites: int
    mass: float
    alpha: int = 0
    lattice_const: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise DomainError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        if self.alpha not in (0, 1):
            raise DomainError(f"alpha must be 0 or 1, got {self.alpha!r}")
        if not self.lattice_const > 0:
            raise DomainError(f"lattice constant must be positive, got {self.lattice_const!r}")
        if not self.mass >= 0:
            raise DomainError(f"mass must be non-negative, got {self.mass!r}")
        if self.alpha == 0 and self.mass == 0:
            raise ZeroModeError("kappa = 0 with alpha = 0: the zero mode makes Q diverge")

    @classmethod
    def with_length(cls, n_sites: int, mass: float, alpha: int = 0, length: float = 1.0):
        """Chain of total length ``length`` (lattice constant ``length / n_sites``)."""
        return cls(n_sites, mass, alpha, length / n_sites)

    @property
    def system_length(self) -> float:
        return self.lattice_const * self.n_sites


@dataclass(frozen=True)
class Region:
    """Contiguous block of ``length`` sites starting at ``start``, wrapping cyclically."""

    start: int
    length: int

    def indices(self, n_sites: int) -> np.ndarray:
        if self.length < 1:
            raise DomainError("region must contain at least one site")
        if self.length > n_sites:
            raise DomainError(f"region length {self.length} exceeds chain size {n_sites}")
        if not 0 <= self.start < n_sites:
            raise DomainError(f"region start {self.start} outside 0..{n_sites - 1}")
        return (self.start + np.arange(self.length)) % n_sites

    def fraction(self, n_sites: int) -> float:
        return self.length / n_sites


def half_region(config: ChainConfig, sigma: float = 0.5) -> Region:
    """Region of ``floor(sigma N)`` sites (at least one) starting at site 0."""
    return Region(0, max(1, int(sigma * config.n_sites)))


def dispersion(k, config: ChainConfig):
    """Mode frequency ``omega_k``."""
    a = config.lattice_const
    return np.sqrt((4.0 / a**2) * np.sin(np.asarray(k) / 2.0) ** 2 + config.mass**2)


def wavevectors(config: ChainConfig) -> np.ndarray:
    """Allowed wavenumbers, ordered by ``m = 0..N-1`` and folded into (-pi, pi]."""
    n = config.n_sites
    k = np.pi * (2 * np.arange(n) + config.alpha) / n
    return np.where(k > np.pi, k - 2 * np.pi, k)


@functools.lru_cache(maxsize=64)
def ground_state_moments(config: ChainConfig) -> MomentSet:
    """Moment set of the chain's ground state (``S = 0``, zero means).

    ``Q`` and ``P`` are symmetric Toeplitz; the ``+k``/``-k`` pairs are
    combined analytically, so only cosines appear.
    """
    n = config.n_sites
    k = wavevectors(config)
    omega = dispersion(k, config)
    if np.any(omega == 0):
        raise ZeroModeError("a mode has zero frequency")
    cos = np.cos(np.outer(np.arange(n), k))
    q_row = cos @ (1.0 / omega) / (2 * n)
    p_row = cos @ omega / (2 * n)
    return MomentSet(toeplitz(q_row), toeplitz(p_row))


def coupling_matrix(config: ChainConfig) -> np.ndarray:
    """Coupling matrix ``Omega`` whose exact ground state is :func:`ground_state_moments`.

    Nearest-neighbour Laplacian with a ``+1`` (periodic) or ``-1``
    (antiperiodic) sign on the bond that closes the ring.
    """
    n = config.n_sites
    wrap = 1.0 if config.alpha == 0 else -1.0
    shift = np.zeros((n, n))
    for i in range(n):
        j = i + 1
        shift[i, j % n] += 1.0 if j < n else wrap
    lap = (2.0 * np.eye(n) - shift - shift.T) / config.lattice_const**2
    return lap + config.mass**2 * np.eye(n)


def reduce_region(xi_set: MomentSet, region: Region) -> MomentSet:
    """Moments of the reduced state on ``region`` (principal sub-blocks)."""
    idx = region.indices(xi_set.n_modes)
    block = np.ix_(idx, idx)
    return MomentSet(
        xi_set.q_mat[block],
        xi_set.p_mat[block],
        xi_set.s_mat[block],
        xi_set.mean_q[idx],
        xi_set.mean_p[idx],
    )


def region_spectrum(config: ChainConfig, region: Region, dps: int | None = None) -> ModeSpectrum:
    """Mode spectrum of the reduced ground state on ``region``.

    Double precision resolves mode ratios down to roughly ``1e-13``; below
    that the values are rounding noise.  Passing ``dps`` (decimal digits,
    e.g. 40) recomputes the block correlations and their symplectic values
    in extended precision, which resolves ratios down to roughly
    ``10**-dps``; smaller ones come back as zero.
    """
    if dps is None:
        return mode_spectrum_from_moments(reduce_region(ground_state_moments(config), region))
    return ModeSpectrum.from_xi(_extended_region_xi(config, region, int(dps)))


def _extended_region_xi(config: ChainConfig, region: Region, dps: int) -> np.ndarray:
    import mpmath

    if dps < 16:
        raise DomainError("extended precision needs at least 16 digits")
    idx = region.indices(config.n_sites)
    n, ell = config.n_sites, len(idx)
    with mpmath.workdps(dps):
        a, kappa = mpmath.mpf(config.lattice_const), mpmath.mpf(config.mass)
        k = [mpmath.pi * (2 * m + config.alpha) / n for m in range(n)]
        omega = [mpmath.sqrt(4 / a**2 * mpmath.sin(x / 2) ** 2 + kappa**2) for x in k]
        if any(w == 0 for w in omega):
            raise ZeroModeError("a mode has zero frequency")
        q_row, p_row = {}, {}
        for dist in {abs(int(i) - int(j)) for i in idx for j in idx}:
            cos = [mpmath.cos(dist * x) for x in k]
            q_row[dist] = mpmath.fsum(c / w for c, w in zip(cos, omega)) / (2 * n)
            p_row[dist] = mpmath.fsum(c * w for c, w in zip(cos, omega)) / (2 * n)
        q = mpmath.matrix(ell, ell)
        p = mpmath.matrix(ell, ell)
        for r, i in enumerate(idx):
            for c, j in enumerate(idx):
                # Toeplitz in |i - j| (not circulant when alpha = 1)
                q[r, c] = q_row[abs(int(i) - int(j))]
                p[r, c] = p_row[abs(int(i) - int(j))]
        # S = 0: mu**2 are the eigenvalues of 4 L^T P L with Q = L L^T
        chol = mpmath.cholesky(q)
        mu_sq = mpmath.eigsy(4 * (chol.T * p * chol), eigvals_only=True)
        xi = []
        for value in mu_sq:
            mu = mpmath.sqrt(max(value, 1))
            xi.append(float((mu - 1) / (mu + 1)))
    return np.array(xi)


def region_entropy(config: ChainConfig, region: Region, base=2, dps: int | None = None) -> float:
    """Entanglement entropy of ``region`` with the rest of the chain."""
    return entropy(region_spectrum(config, region, dps), base)
