"""
Schema definitions for run configurations.

Each dotted config section (``grid.nx``, ``optimizer.eta0``, ...) maps to one
Pydantic model; RunConfig nests them. Values arrive as text from config files
and ``--set`` overrides and are coerced by Pydantic.
"""

import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .field import Grid1D
from .hermite import Equilibrium
from .optim import Hyperparameters
from .utils import DEFAULT_OUTPUT_DIR


MODES = ("solve-vp", "solve-moments", "optimize", "evaluate", "plot")

# |Σ weights − 1| allowed for the equilibrium mixture
UNIT_MASS_TOL = 1e-12


class Section(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class EquilibriumConfig(Section):
    kind: Literal['maxwellian', 'two_stream', 'bump_on_tail'] = Field(
        description="Equilibrium distribution μ(v)"
    )
    v_bar: float = Field(default=2.4, description="Beam velocity of the two-stream equilibrium")
    omega1: float = Field(default=0.8, ge=0, description="Bulk weight of the bump-on-tail equilibrium")
    omega2: float = Field(default=0.2, ge=0, description="Bump weight of the bump-on-tail equilibrium")
    u: float = Field(default=3.5, description="Bump center velocity")
    v_t: float = Field(default=0.5, gt=0, description="Bump variance")

    @model_validator(mode='after')
    def check_unit_mass(self):
        total = self.build().total_weight
        if abs(total - 1.0) > UNIT_MASS_TOL:
            raise ValueError(f"omega1 + omega2 must be 1 for a unit-mass equilibrium, got {total:g}")
        return self

    def build(self) -> Equilibrium:
        if self.kind == 'maxwellian':
            return Equilibrium.maxwellian()
        if self.kind == 'two_stream':
            return Equilibrium.two_stream(self.v_bar)
        return Equilibrium.bump_on_tail(self.omega1, self.omega2, self.u, self.v_t)


class GridConfig(Section):
    length: float = Field(default=10.0 * math.pi, gt=0, description="Periodic domain length L")
    nx: int = Field(default=100, ge=4, description="Spatial nodes")
    v_min: float = Field(default=-8.0, description="Lower velocity bound")
    v_max: float = Field(default=8.0, description="Upper velocity bound")
    nv: int = Field(default=200, ge=2, description="Velocity nodes (both ends included)")

    @model_validator(mode='after')
    def check_velocity_range(self):
        if self.v_max <= self.v_min:
            raise ValueError(f"v_max ({self.v_max}) must exceed v_min ({self.v_min})")
        return self

    def build(self) -> Grid1D:
        return Grid1D(self.length, self.nx, self.v_min, self.v_max, self.nv)


class PerturbationConfig(Section):
    shape: Literal['cos', 'sin'] = Field(default='cos', description="Spatial shape of the initial perturbation")
    wavenumber: float = Field(default=0.2, description="Perturbation wavenumber")
    amplitude: float = Field(default=1e-3, ge=0, description="Perturbation strength ε")


class PlasmaConfig(Section):
    rho_ion: Union[Literal['auto'], float] = Field(
        default=1.0, description="Ion background density, or 'auto' for the mean initial density"
    )


class MomentsConfig(Section):
    order: int = Field(default=30, ge=1, description="Truncation order N")
    cfl: float = Field(default=3.0, gt=0, description="max|λ|·Δt/Δx of the moment solver")


class ControlConfig(Section):
    modes: int = Field(default=10, ge=0, description="Number K of sine/cosine modes")
    wavenumber: float = Field(default=0.2, gt=0, description="Base wavenumber of the control basis")


class RunSection(Section):
    horizon: float = Field(gt=0, description="Control horizon T")
    extend: Optional[float] = Field(default=None, gt=0, description="Evaluation horizon beyond T")
    stride: int = Field(default=1, ge=1, description="Diagnostic output stride in steps")

    @model_validator(mode='after')
    def check_extend(self):
        if self.extend is not None and self.extend < self.horizon:
            raise ValueError(f"extend ({self.extend}) must not be below horizon ({self.horizon})")
        return self


class KineticConfig(Section):
    dt: float = Field(default=0.1, gt=0, description="Time step of the Vlasov solver")


class OptimizerConfig(Section):
    eta0: float = Field(default=0.1, gt=0, description="Initial learning rate")
    beta: float = Field(default=0.9, ge=0, lt=1, description="Momentum factor")
    gamma: float = Field(default=0.3, ge=0, lt=1, description="Learning-rate shrink on sign change")
    theta: float = Field(default=0.7, ge=0, le=1, description="Gradient smoothing factor")
    kappa: Optional[float] = Field(default=None, ge=0, description="Learning-rate increment (eta0/10 when unset)")
    max_iter: int = Field(default=1000, ge=1, description="Maximum gradient evaluations")
    grad_tol: float = Field(default=1e-3, ge=0, description="Stop when the gradient ∞-norm falls below")
    gradient: Literal['adjoint', 'exact'] = Field(default='adjoint', description="Gradient source")
    fd_step: float = Field(default=1e-5, gt=0, description="Central-difference step of the exact gradient")
    model: Literal['moments', 'kinetic'] = Field(default='moments', description="Constraint model")
    time_rule: Literal['trapezoid', 'midpoint'] = Field(default='trapezoid',
                                                       description="Time quadrature of the adjoint gradient")

    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(self.eta0, self.beta, self.gamma, self.theta, self.kappa,
                               self.max_iter, self.grad_tol)


class OutputConfig(Section):
    dir: str = Field(default=DEFAULT_OUTPUT_DIR, description="Output directory")


class RunConfig(Section):
    mode: Literal['solve-vp', 'solve-moments', 'optimize', 'evaluate', 'plot']
    equilibrium: EquilibriumConfig
    grid: GridConfig = GridConfig()
    perturbation: PerturbationConfig = PerturbationConfig()
    plasma: PlasmaConfig = PlasmaConfig()
    moments: MomentsConfig = MomentsConfig()
    control: ControlConfig = ControlConfig()
    run: RunSection
    kinetic: KineticConfig = KineticConfig()
    optimizer: OptimizerConfig = OptimizerConfig()
    output: OutputConfig = OutputConfig()


# Sections addressable with dotted keys
SECTIONS = {
    'equilibrium': EquilibriumConfig,
    'grid': GridConfig,
    'perturbation': PerturbationConfig,
    'plasma': PlasmaConfig,
    'moments': MomentsConfig,
    'control': ControlConfig,
    'run': RunSection,
    'kinetic': KineticConfig,
    'optimizer': OptimizerConfig,
    'output': OutputConfig,
}

REQUIRED_KEYS = ('mode', 'equilibrium.kind', 'run.horizon')


def known_keys():
    """All dotted keys accepted by RunConfig"""
    keys = {'mode'}
    for section, model in SECTIONS.items():
        keys.update(f"{section}.{name}" for name in model.model_fields)
    return keys
