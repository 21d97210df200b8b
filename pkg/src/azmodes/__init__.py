"""Spectral-in-angle solver for the buoyant axisymmetric-plus-harmonics system.

The velocity and the weighted temperature are expanded in azimuthal
harmonics of a base wavenumber N (an axisymmetric lead part plus K
sin/cos pairs); the coefficients live on a cell-centered (r, z) grid and
evolve under an IMEX scheme with exact per-family incompressibility
projection.  See the individual modules for the discrete conventions:

    grid         stencils, parity ghosts, quadrature, weighted norms
    state        field containers, config, snapshot i/o
    initial_data divergence-free bump construction
    nonlinear    quadratic interactions (convolution + sampling oracle)
    elliptic     projections and the singular cylindrical operator
    timestepper  IMEX stepping and run orchestration
    diagnostics  energy functionals, component norms, scaling fits
    assembly     physical reconstruction and the full-PDE residual
    cli          command-line entry point
"""

__version__ = "0.1.0"

from .grid import (EVEN, Grid, ODD, apply_diff, build_grid, d_r, d_rr, d_z,
                   d_zz, integrate, laplacian, lp_norm_weighted, m_norm,
                   vector_lp_norm, weight_drift)
from .state import (EnergyParams, LeadFields, ModeFields, ModeSources,
                    RunConfig, SourceSet, SpectralState, load_npz, save_npz,
                    states_allclose, validate_state)
from .initial_data import (BumpParams, InitialTuple, compatibility_residual,
                           init_state, make_stream_data)
from .nonlinear import (compute_sources, lead_sources, linear_couplings,
                        mode_sources, pseudospectral_oracle)
from .elliptic import (EllipticError, EllipticProblem, FamilyProjector,
                       buoyant_pressure_part, pressure_identity_residual,
                       project_family, project_state, projector_for,
                       prop_decay_chart, solve_Lm)
from .timestepper import StepError, Stepper, cfl_dt, imex_step, run
from .diagnostics import (DiagnosticsRecord, EnergyAccumulators,
                          component_norms, divergence_residual,
                          energy_functionals, record_row, scaling_fit)
from .assembly import (assemble, assembled_norms, dump_fields, pde_residual,
                       spectral_l2_norms, u_L5_power)

__all__ = [
    "EVEN", "Grid", "ODD", "apply_diff", "build_grid", "d_r", "d_rr", "d_z",
    "d_zz", "integrate", "laplacian", "lp_norm_weighted", "m_norm",
    "vector_lp_norm", "weight_drift",
    "EnergyParams", "LeadFields", "ModeFields", "ModeSources", "RunConfig",
    "SourceSet", "SpectralState", "load_npz", "save_npz", "states_allclose",
    "validate_state",
    "BumpParams", "InitialTuple", "compatibility_residual", "init_state",
    "make_stream_data",
    "compute_sources", "lead_sources", "linear_couplings", "mode_sources",
    "pseudospectral_oracle",
    "EllipticError", "EllipticProblem", "FamilyProjector",
    "buoyant_pressure_part", "pressure_identity_residual", "project_family",
    "project_state", "projector_for", "prop_decay_chart", "solve_Lm",
    "StepError", "Stepper", "cfl_dt", "imex_step", "run",
    "DiagnosticsRecord", "EnergyAccumulators", "component_norms",
    "divergence_residual", "energy_functionals", "record_row", "scaling_fit",
    "assemble", "assembled_norms", "dump_fields", "pde_residual",
    "spectral_l2_norms", "u_L5_power",
    "__version__",
]
