"""Desk-scale numerical laboratory for the massless Nelson model.

Truncated Fock spaces over momentum-shell grids, fiber Hamiltonians at fixed
total momentum, an infrared cutoff cascade with coherent (Weyl) dressing,
sparse extremal eigensolvers with contour and Neumann projectors, dispersion
scans, and scattering-phase diagnostics, plus a CLI that writes CSV reports.
"""

from .errors import (
    AccuracyError,
    BudgetError,
    ConditioningError,
    ConfigError,
    ContractError,
    DivergenceError,
    GeometryError,
    InvalidShellError,
    IterationError,
    NelsonLabError,
    PhaseUndefinedError,
    TruncationError,
    VelocityDomainError,
    WindowError,
)
from .fock import (
    CompositeOps,
    FockBasis,
    ModeGrid,
    SparseOperator,
    StateVector,
    angular_rule,
    basis_dimension,
    build_grid,
    composite_ops,
    concat_grids,
    enumerate_basis,
    expectation,
    ladder_ops,
)
from .hamiltonian import (
    DressingSpec,
    PhysParams,
    WeylResult,
    apply_weyl,
    assemble_dressed_hamiltonian,
    assemble_fiber_hamiltonian,
    dressing_generator,
    ground_constant,
    make_dressing,
    pi_operators,
)

__version__ = "0.1.0"
