"""Exact many-body eigenenergies of the constant-pairing Hamiltonian.

The eigenenergy of n pairs is the sum of n coupled pair energies obtained as
simultaneous roots of the Richardson equations. Three representations are
supported: a discrete (box) spectrum, a real continuum entering through a
single-particle level density, and a complex-energy spectrum with resonance
poles. A brute-force seniority-zero diagonalization provides ground truth for
discrete problems.
"""

from .continuum import (
    ContinuumMode,
    ContinuumProblem,
    QuadratureRule,
    default_cutoff,
    integral_term,
    make_quadrature,
    residual_complex,
    residual_continuum,
    solve_continuum,
)
from .errors import (
    CapacityError,
    CollisionError,
    ConfigError,
    ContourError,
    NonconvergenceError,
    SingularityError,
)
from .oracle import (
    ComparisonReport,
    ConfigBasis,
    build_basis,
    build_hamiltonian,
    compare,
    lowest_eigenvalues,
)
from .richardson import (
    IdentityReport,
    PairSolution,
    SolverSettings,
    ground_occupation,
    jacobian_discrete,
    residual_discrete,
    seed_g0,
    solve_discrete,
    total_energy,
    verify_identities,
)
from .spectrum import (
    DensityKind,
    DensityTable,
    Level,
    PairingProblem,
    Resonance,
    box_level_histogram,
    box_spectrum,
    lorentzian_density,
    split_density,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CollisionError",
    "ComparisonReport",
    "ConfigBasis",
    "ConfigError",
    "ContinuumMode",
    "ContinuumProblem",
    "ContourError",
    "DensityKind",
    "DensityTable",
    "IdentityReport",
    "Level",
    "NonconvergenceError",
    "PairSolution",
    "PairingProblem",
    "QuadratureRule",
    "Resonance",
    "SingularityError",
    "SolverSettings",
    "box_level_histogram",
    "box_spectrum",
    "build_basis",
    "build_hamiltonian",
    "compare",
    "default_cutoff",
    "ground_occupation",
    "integral_term",
    "jacobian_discrete",
    "lorentzian_density",
    "lowest_eigenvalues",
    "make_quadrature",
    "residual_complex",
    "residual_continuum",
    "residual_discrete",
    "seed_g0",
    "solve_continuum",
    "solve_discrete",
    "split_density",
    "total_energy",
    "verify_identities",
]
