"""Continuous-spectrum weakly nonlinear dynamics of axisymmetric Taylor-Couette flow.

Linear stability eigenmodes and adjoints on a Chebyshev annulus grid, triad
and quartet interaction kernels, time integration of the amplitude-density
equation on a truncated wavenumber grid, reduced (monochromatic / envelope /
mean-flow-coupled) models, and torque/energy diagnostics.
"""

__version__ = "0.1.0"

from .errors import (
    BranchTrackingError,
    CacheError,
    ConfigError,
    CouetteSpectrumError,
    DependencyError,
    EigensolverError,
    NumericalError,
    RegimeError,
    SingularSolveError,
    StepFailureError,
)
from .flow_config import (
    FlowConfig,
    base_flow_profile,
    couette_base_kinetic_energy,
    taylor_number,
)
from .radial import RadialGrid, build_grid, solve_bordered
from .linear_stability import (
    AdjointMode,
    EigenMode,
    ModeSet,
    adjoint_mode,
    build_mode_set,
    critical_point,
    growth_curve,
    leading_mode,
    leading_sigma,
    neutral_band,
)
from .kernels import (
    ForcingProfile,
    KernelBuilder,
    KernelTables,
    SecondOrderField,
    assemble_tables,
    quadratic_forcing,
)
from .evolution import (
    ConvolutionPlan,
    EquilibriumReport,
    EvolutionParams,
    SelectionRow,
    SpectrumState,
    evolve,
    make_state,
    mode_mask,
    quartet_integral,
    selection_sweep,
    step,
    triad_integral,
)
from .reduced import (
    GinzburgLandauCoefficients,
    LandauModel,
    MeanFlowCoupledModel,
    gl_coefficients,
    landau_constant,
    landau_equilibrium_curve,
    landau_evolution,
    landau_model,
    meanflow_coupled_coefficients,
    meanflow_coupled_evolution,
    meanflow_fixed_point,
)
from .diagnostics import (
    TorqueReport,
    couette_wall_shear,
    perturbation_kinetic_energy,
    reconstruct_velocity,
    torque_ratio,
    torque_vs_reynolds,
)
from .cache import (
    get_or_build_tables,
    load_snapshot,
    load_tables,
    save_snapshot,
    save_tables,
    table_config_hash,
)
from .presets import RunConfig, preset
