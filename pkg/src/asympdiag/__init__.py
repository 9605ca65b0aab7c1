"""Asymptotic eigenvalue, diagonaliser and eigenprojection expansions of
parameter-dependent matrix families, with applications to hyperbolic
polynomial roots, asymptotic ODE integration and a thermo-elastic model."""

from .block import (
    AssumptionReport,
    NondegeneracyResult,
    SchemeTrace,
    block_diagonalize,
    check_assumption,
    nondegeneracy_order,
)
from .errors import AsympdiagError
from .hyperbolic import (
    HyperbolicPolynomial,
    RootExpansion,
    check_low_order_vanishing,
    companion_series,
    root_expansion,
    unit_directions,
)
from .matrixcore import (
    EigenDecomposition,
    Partition,
    PartitionFiltration,
    bdiag,
    eig,
    group_eigenvalues,
    is_diagonable,
    sylvester_offdiag_solve,
)
from .oracle import (
    BranchMatch,
    convergence_order,
    exact_projection,
    match_branches,
    sample_spectrum,
)
from .series import MatrixSeries
from .standard import (
    DiagonalizationResult,
    diagonalize,
    eigenprojection,
    residual,
    spectral_bound,
)
from .thermoelastic import (
    ThermoParams,
    build_family,
    large_xi_expansion,
    small_xi_expansion,
    verify_spectral_signs,
)
from .wkb import (
    OdeFamily,
    WkbSolution,
    asymptotic_diagonalize_ode,
    fundamental_diagonal,
    peano_baker,
    rk_reference,
    wkb_solution,
    wkb_solve,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "AsympdiagError",
    "BranchMatch",
    "DiagonalizationResult",
    "EigenDecomposition",
    "HyperbolicPolynomial",
    "MatrixSeries",
    "NondegeneracyResult",
    "OdeFamily",
    "Partition",
    "PartitionFiltration",
    "RootExpansion",
    "SchemeTrace",
    "ThermoParams",
    "WkbSolution",
    "bdiag",
    "block_diagonalize",
    "build_family",
    "check_assumption",
    "check_low_order_vanishing",
    "companion_series",
    "convergence_order",
    "diagonalize",
    "eig",
    "eigenprojection",
    "exact_projection",
    "fundamental_diagonal",
    "group_eigenvalues",
    "is_diagonable",
    "large_xi_expansion",
    "match_branches",
    "nondegeneracy_order",
    "peano_baker",
    "residual",
    "rk_reference",
    "root_expansion",
    "sample_spectrum",
    "small_xi_expansion",
    "spectral_bound",
    "sylvester_offdiag_solve",
    "unit_directions",
    "verify_spectral_signs",
    "wkb_solution",
    "wkb_solve",
    "asymptotic_diagonalize_ode",
]
