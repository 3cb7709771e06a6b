"""Exterior sphere scattering with mixed boundary conditions and
regularized boundary-control synthesis of low-visibility far fields."""

from .config import ConfigError, RunConfig, load_config
from .control import (
    ControlBasis,
    ControlFunction,
    SynthesisResult,
    assemble_control_operator,
    compute_A0,
    density_experiment,
    gram_matrix,
    synthesize,
)
from .farfield import (
    FarFieldPattern,
    absorption_slack,
    eval_pattern,
    far_field,
    optical_theorem_residual,
    reciprocity_residual,
    sigma,
    sigma_by_quadrature,
)
from .incident import BCVariant, WaveContext, plane_wave_coefficients, plane_wave_field
from .mie_oracle import (
    MieSolution,
    impedance_sphere,
    mie_coefficients,
    mie_far_field,
    mie_sigma,
    soft_sphere,
)
from .solver import (
    BoundarySystem,
    IllPosedError,
    NonConvergenceError,
    RadiatingField,
    SolveReport,
    SolverError,
    boundary_system,
    clear_system_cache,
    default_l_max,
    solve_scatter,
)
from .sphere_grid import CapRegion, SurfaceGrid, build_grid, cap_mask, in_cap

__version__ = "0.1.0"

__all__ = [
    "BCVariant",
    "BoundarySystem",
    "CapRegion",
    "ConfigError",
    "ControlBasis",
    "ControlFunction",
    "FarFieldPattern",
    "IllPosedError",
    "MieSolution",
    "NonConvergenceError",
    "RadiatingField",
    "RunConfig",
    "SolveReport",
    "SolverError",
    "SurfaceGrid",
    "SynthesisResult",
    "WaveContext",
    "absorption_slack",
    "assemble_control_operator",
    "boundary_system",
    "build_grid",
    "cap_mask",
    "clear_system_cache",
    "compute_A0",
    "default_l_max",
    "density_experiment",
    "eval_pattern",
    "far_field",
    "gram_matrix",
    "impedance_sphere",
    "in_cap",
    "load_config",
    "mie_coefficients",
    "mie_far_field",
    "mie_sigma",
    "optical_theorem_residual",
    "plane_wave_coefficients",
    "plane_wave_field",
    "reciprocity_residual",
    "sigma",
    "sigma_by_quadrature",
    "solve_scatter",
    "soft_sphere",
    "synthesize",
]
