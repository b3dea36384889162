"""Dense verification of surface-corrected factorization for spin dynamics.

The package splits into: `geometry` (lattices and cut geometry), `decay`
(decay profiles and summability constants), `interactions` (interaction
families and operator assembly), `dynamics` (cocycle integration),
`bounds` (every inequality, measured and evaluated) and `harness`/`config`/
`cli` (experiment orchestration).
"""

from .geometry import (
    Lattice,
    Region,
    UNREACHABLE,
    annulus,
    boundary_sets,
    co_collar,
    cycle,
    fat_boundary_constant,
    fattening,
    grid,
    inner_boundary,
    is_crossing,
    path,
    region,
    shell_profile,
    surface_collar,
)
from .decay import (
    DecayConstants,
    DecayProfile,
    ExponentialEnvelope,
    PowerLawWeight,
    StretchedExponentialEnvelope,
    lattice_constants,
    tail_sum,
    validate_profile,
)
from .interactions import (
    Constant,
    InteractionFamily,
    InteractionTerm,
    Ramp,
    Sinusoid,
    VelocityData,
    assemble_hamiltonian,
    coupling_norm,
    crossing_defect,
    crossing_generator,
    embed,
    heisenberg,
    long_range_zz,
    surface_energy,
    tfim,
)
from .dynamics import (
    CocycleTrajectory,
    FactorizationResult,
    IntegratorSettings,
    UnitarityError,
    conjugate,
    factorization_error,
    integrate_cocycle,
    integrate_surface_cocycle,
    spectral_norm,
)
from .bounds import (
    BoundReport,
    defect_rhs,
    defect_sup,
    factorization_rhs,
    lieb_robinson_lhs,
    lieb_robinson_rhs,
    restriction_gap,
    surface_norm_rhs,
    surface_norm_sup,
)
from .config import ConfigError, ExperimentConfig, load_config
from .harness import ExperimentReport, emit, run_factorization_sweep, run_lr_sweep

__version__ = "0.1.0"
