"""Single-magnon state transfer in a Heisenberg chain under a tan^2 field."""

__version__ = "0.1.0"

from .dynamics import (
    FidelitySeries,
    WavePacket,
    evolve_chebyshev,
    evolve_spectral,
    fidelity,
    fidelity_series,
    find_max_fidelity,
    gaussian_packet,
)
from .errors import (
    BoundaryTruncationError,
    ChebyshevBudgetError,
    ConvergenceError,
    InvalidConfigError,
    SingularityError,
)
from .model import (
    ChainConfig,
    Hamiltonian,
    PotentialKind,
    analytic_energy,
    analytic_strong_field_energy,
    build_hamiltonian,
    derive_b0,
    derive_lambda,
    potential_at,
    reflect,
)
from .spectral import SpectralData, SpmcReport, diagonalize, eigenstate_parity, level_spacings, spmc_check

__all__ = [
    "BoundaryTruncationError",
    "ChainConfig",
    "ChebyshevBudgetError",
    "ConvergenceError",
    "FidelitySeries",
    "Hamiltonian",
    "InvalidConfigError",
    "PotentialKind",
    "SingularityError",
    "SpectralData",
    "SpmcReport",
    "WavePacket",
    "analytic_energy",
    "analytic_strong_field_energy",
    "build_hamiltonian",
    "derive_b0",
    "derive_lambda",
    "diagonalize",
    "eigenstate_parity",
    "evolve_chebyshev",
    "evolve_spectral",
    "fidelity",
    "fidelity_series",
    "find_max_fidelity",
    "gaussian_packet",
    "level_spacings",
    "potential_at",
    "reflect",
    "spmc_check",
]
