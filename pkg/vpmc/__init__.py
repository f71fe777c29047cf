"""
vpmc - Moment-based optimal control of the 1D Vlasov-Poisson system

Hermite moment closure, semi-Lagrangian kinetic and moment solvers, a
continuous-adjoint gradient and an adaptive momentum optimizer for static
external fields that suppress two-stream and bump-on-tail instabilities.
"""

from .utils import apply_thread_cap

# Must run before numpy loads its BLAS
apply_thread_cap()

from importlib.metadata import version

__version__ = version("vpmc")
__author__ = "vpmc contributors"
__license__ = "CC0-1.0"

from .errors import (
    ArgumentError,
    ConfigError,
    FormatError,
    ModelError,
    NumericError,
    SequencingError,
    VPMCError,
)

from .hermite import (
    Equilibrium,
    HermiteBasis,
    VelocityQuadrature,
    eval_htilde,
    project_moments,
    reconstruct_profile,
    tail_decay_check,
)

from .field import (
    ControlParams,
    Grid1D,
    basis_function,
    eval_control,
    solve_poisson,
)

from .msolver import (
    MomentField,
    MomentSystem,
    build_system,
    closed_system,
    integrate,
    project_initial,
    strang_step,
)

from .kinetic import (
    PhaseSpaceField,
    moments_of,
    run_vp,
    vp_step,
)

from .adjoint import (
    GradientVector,
    adjoint_step,
    assemble_gradient,
    loss,
)

from .optim import (
    Hyperparameters,
    OptimState,
    jacobs_update,
    momentum_update,
    optimize,
)

from .diag import (
    TimeSeriesRecord,
    electric_energy,
    kinetic_perturbation,
    l2_bound_check,
    reconstruct_fN,
)

__all__ = [
    # Version info
    "__version__",
    "__author__",
    "__license__",

    # Errors
    "VPMCError",
    "ArgumentError",
    "ConfigError",
    "FormatError",
    "ModelError",
    "NumericError",
    "SequencingError",

    # Hermite basis and equilibria
    "Equilibrium",
    "HermiteBasis",
    "VelocityQuadrature",
    "eval_htilde",
    "project_moments",
    "reconstruct_profile",
    "tail_decay_check",

    # Field and control
    "ControlParams",
    "Grid1D",
    "basis_function",
    "eval_control",
    "solve_poisson",

    # Solvers
    "MomentField",
    "MomentSystem",
    "build_system",
    "closed_system",
    "integrate",
    "project_initial",
    "strang_step",
    "PhaseSpaceField",
    "moments_of",
    "run_vp",
    "vp_step",

    # Adjoint and optimizer
    "GradientVector",
    "adjoint_step",
    "assemble_gradient",
    "loss",
    "Hyperparameters",
    "OptimState",
    "jacobs_update",
    "momentum_update",
    "optimize",

    # Diagnostics
    "TimeSeriesRecord",
    "electric_energy",
    "kinetic_perturbation",
    "l2_bound_check",
    "reconstruct_fN",
]

# Orchestration lives in submodules:
# from vpmc.commands import run_optimize, run_evaluate
# from vpmc.verify import run_properties
