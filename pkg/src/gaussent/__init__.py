"""Gaussian bosonic states: moments, exact spectra, entanglement and the harmonic chain."""

__version__ = "0.1.0"

from .state import (  # noqa: E402
    KernelParams,
    MomentSet,
    ValidationReport,
    moments_from_params,
    params_from_moments,
    symplectic_values,
    validate,
)
from .spectrum import (  # noqa: E402
    EigenvalueRecord,
    ModeSpectrum,
    entropy,
    entropy_terms,
    grid_oracle,
    mode_spectrum_from_moments,
    mode_spectrum_from_params,
    product_identification,
    symplectic_oracle,
    top_eigenvalues,
    xi_from_eta,
)
from .chain import (  # noqa: E402
    ChainConfig,
    Region,
    coupling_matrix,
    dispersion,
    ground_state_moments,
    reduce_region,
    region_entropy,
    region_spectrum,
    wavevectors,
)
from .dynamics import QuadraticModel, Trajectory, evolve, evolve_params, moment_derivatives  # noqa: E402
from .cft import FitResult, fit_log_sin, fit_size_scaling, holzhey_entropy, is_conformal  # noqa: E402
