#!/usr/bin/env python3
"""
Subcommand orchestration

Each run_* function takes a resolved RunConfig, runs the solvers and writes
its artifacts into config.output.dir.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .adjoint import MomentObjective
from .diag import TimeSeriesRecord, electric_energy, kinetic_perturbation, moment_misfit, reconstruct_fN
from .errors import ConfigError
from .field import QUADRATURE_NEUTRALITY_TOL, ControlParams, FieldState, Grid1D, solve_poisson
from .hermite import Equilibrium
from .kinetic import KineticObjective, PhaseSpaceField, field_of, initial_phase_space, moments_of, run_vp
from .msolver import MomentSystem, Trajectory, closed_system, equilibrium_moments, integrate, project_initial
from .optim import ABORTED, CONVERGED, MAX_ITER, OptimResult, optimize
from .plot import render_plots
from .schema import RunConfig
from .snapshot import (read_params, write_kinetic_csv, write_kinetic_snapshot, write_moment_csv,
                       write_moment_trajectory, write_params, write_run_log, write_series, write_sweep)
from .utils import ensure_output_dir


@dataclass(frozen=True)
class Problem:
    """Grid, equilibrium, initial data and ion density of a configured run"""
    config: RunConfig
    grid: Grid1D
    equilibrium: Equilibrium
    initial: PhaseSpaceField
    rho_ion: float

    @property
    def out(self) -> Path:
        return ensure_output_dir(Path(self.config.output.dir))

    def m_bar(self, N: int) -> np.ndarray:
        return equilibrium_moments(self.equilibrium, N, self.grid)

    def system(self, N: int) -> MomentSystem:
        return closed_system(self.equilibrium, N, self.grid)

    def zero_control(self) -> ControlParams:
        return ControlParams.zeros(self.config.control.modes, self.config.control.wavenumber)


def setup(config: RunConfig) -> Problem:
    grid = config.grid.build()
    equilibrium = config.equilibrium.build()
    perturbation = config.perturbation
    initial = initial_phase_space(equilibrium, grid, perturbation.shape,
                                  perturbation.wavenumber, perturbation.amplitude)
    rho_ion = config.plasma.rho_ion
    if rho_ion == 'auto':
        rho_ion = float(np.mean(initial.density()))
    return Problem(config, grid, equilibrium, initial, float(rho_ion))


class SeriesRecorder:
    """Collect TimeSeriesRecords from a kinetic run every ``stride`` steps

    The last observed state is always recorded; repeated observations of the
    same time (a run continued from its final state) are ignored.
    """

    def __init__(self, problem: Problem, stride: int = 1):
        self.problem = problem
        self.stride = stride
        self.N = problem.config.moments.order
        self.m_bar = problem.m_bar(self.N)
        self.records: List[TimeSeriesRecord] = []
        self._count = 0
        self._last: Optional[Tuple[PhaseSpaceField, FieldState]] = None
        self._last_recorded = False

    def _record(self, state: PhaseSpaceField, field: FieldState) -> None:
        grid = self.problem.grid
        self.records.append(TimeSeriesRecord(
            state.time,
            kinetic_perturbation(state, self.problem.equilibrium),
            electric_energy(field.E, grid),
            moment_misfit(moments_of(state, self.N), self.m_bar, grid.dx),
        ))

    def __call__(self, state: PhaseSpaceField, field: FieldState) -> None:
        if self._last is not None and state.time <= self._last[0].time:
            return
        self._last = (state, field)
        self._last_recorded = self._count % self.stride == 0
        if self._last_recorded:
            self._record(state, field)
        self._count += 1

    def close(self) -> List[TimeSeriesRecord]:
        if self._last is not None and not self._last_recorded:
            self._record(*self._last)
            self._last_recorded = True
        return self.records


def moment_series(problem: Problem, trajectory: Trajectory, stride: int = 1) -> List[TimeSeriesRecord]:
    """Diagnostics along a moment trajectory; J is evaluated on the reconstruction f_N"""
    N = trajectory.final.N
    m_bar = problem.m_bar(N)
    grid = problem.grid
    indices = list(range(0, len(trajectory), stride))
    if indices[-1] != len(trajectory) - 1:
        indices.append(len(trajectory) - 1)
    records = []
    for index in indices:
        state = trajectory.states[index]
        f_N = reconstruct_fN(state, problem.equilibrium, grid, m_bar)
        E = solve_poisson(state.density(), problem.rho_ion, grid,
                          neutrality_tol=QUADRATURE_NEUTRALITY_TOL).E
        records.append(TimeSeriesRecord(state.time, kinetic_perturbation(f_N, problem.equilibrium),
                                        electric_energy(E, grid), moment_misfit(state, m_bar, grid.dx)))
    return records


def _load_control(problem: Problem, params_path: Optional[Path]) -> ControlParams:
    if params_path is None:
        return problem.zero_control()
    return read_params(Path(params_path), problem.config.control.wavenumber)


def _write_phase_space(out: Path, name: str, state: PhaseSpaceField) -> None:
    write_kinetic_snapshot(out / f"{name}.vpkin", state)
    write_kinetic_csv(out / f"{name}.csv", state)


def run_solve_vp(config: RunConfig, params_path: Optional[Path] = None, progress: bool = False) -> Dict[str, float]:
    """Kinetic run to the horizon with a fixed control field"""
    problem = setup(config)
    params = _load_control(problem, params_path)
    out = problem.out
    recorder = SeriesRecorder(problem, config.run.stride)
    final = run_vp(problem.initial, params, config.run.horizon, config.kinetic.dt, problem.rho_ion,
                   recorder, progress)
    records = recorder.close()
    write_series(out / "series.csv", records)
    _write_phase_space(out, "f_0", problem.initial)
    _write_phase_space(out, "f_T", final)
    print(f"Kinetic run to t = {final.time:g}: J = {records[-1].J:.6e}, "
          f"E_energy = {records[-1].E_energy:.6e}")
    return {"J_T": records[-1].J, "E_energy_T": records[-1].E_energy}


def run_solve_moments(config: RunConfig, params_path: Optional[Path] = None,
                      progress: bool = False) -> Dict[str, float]:
    """Moment-system run to the horizon with a fixed control field"""
    problem = setup(config)
    params = _load_control(problem, params_path)
    out = problem.out
    N = config.moments.order
    sys = problem.system(N)
    initial = project_initial(problem.initial, N, problem.grid)
    trajectory = integrate(initial, sys, params, config.run.horizon, problem.grid, config.moments.cfl,
                           problem.rho_ion, progress)
    stride = config.run.stride
    states = list(trajectory.states[::stride])
    if states[-1] is not trajectory.final:
        states.append(trajectory.final)
    write_moment_trajectory(out / "moments.vpmom", states)
    write_moment_csv(out / "moments_T.csv", trajectory.final, problem.grid)
    records = moment_series(problem, trajectory, stride)
    write_series(out / "series.csv", records)
    print(f"Moment run (N = {N}, {len(trajectory) - 1} steps) to t = {trajectory.final.time:g}: "
          f"misfit = {records[-1].moment_misfit:.6e}")
    return {"loss_T": records[-1].moment_misfit, "E_energy_T": records[-1].E_energy}


def build_objective(problem: Problem, N: int):
    """Optimizer objective for the configured constraint model"""
    config = problem.config
    opt = config.optimizer
    if opt.model == 'kinetic':
        return KineticObjective(problem.initial, problem.equilibrium, config.run.horizon,
                                config.control.modes, config.kinetic.dt, problem.rho_ion,
                                config.control.wavenumber, opt.fd_step)
    initial = project_initial(problem.initial, N, problem.grid)
    return MomentObjective(initial, problem.system(N), problem.m_bar(N), problem.grid, config.run.horizon,
                           config.control.modes, config.moments.cfl, problem.rho_ion,
                           config.control.wavenumber, opt.gradient, opt.fd_step, opt.time_rule)


def _optimize(problem: Problem, N: int, progress: bool) -> Tuple[OptimResult, ControlParams]:
    config = problem.config
    objective = build_objective(problem, N)
    result = optimize(objective, config.optimizer.hyperparameters(), progress=progress)
    params = ControlParams.from_vector(result.params, config.control.modes, config.control.wavenumber)
    if result.error:
        print(f"⚠️  Optimization aborted: {result.error}")
    print(f"Optimization (N = {N}) stopped after {result.iterations} iterations "
          f"[{result.status}], best loss = {result.loss:.6e}")
    return result, params


def _kinetic_end_state(problem: Problem, params: ControlParams, horizon: float,
                       progress: bool = False) -> Tuple[float, float]:
    final = run_vp(problem.initial, params, horizon, problem.config.kinetic.dt, problem.rho_ion,
                   progress=progress)
    E = field_of(final, problem.rho_ion).E
    return kinetic_perturbation(final, problem.equilibrium), electric_energy(E, problem.grid)


def combined_status(statuses: Sequence[str]) -> str:
    """Aborted if any run aborted, converged only if every run converged"""
    if ABORTED in statuses:
        return ABORTED
    if all(status == CONVERGED for status in statuses):
        return CONVERGED
    return MAX_ITER


def run_optimize(config: RunConfig, orders: Optional[Sequence[int]] = None, progress: bool = False) -> str:
    """Optimize the control field; with ``orders`` sweep the moment count

    Returns:
        Optimizer status (converged, max_iter or aborted)
    """
    if orders and config.optimizer.model == 'kinetic':
        raise ConfigError("--orders sweeps the moment count and needs optimizer.model = moments",
                          key='optimizer.model')
    problem = setup(config)
    out = problem.out

    if orders:
        rows = []
        statuses = []
        for N in orders:
            result, params = _optimize(problem, N, progress)
            write_params(out / f"params_N{N}.csv", params)
            J_T, energy_T = _kinetic_end_state(problem, params, config.run.horizon, progress)
            rows.append((N, result.loss, J_T, energy_T))
            statuses.append(result.status)
            print(f"  N = {N}: kinetic J(T) = {J_T:.6e}, E_energy(T) = {energy_T:.6e}")
        write_sweep(out / "sweep.csv", rows)
        return combined_status(statuses)

    N = config.moments.order
    result, params = _optimize(problem, N, progress)
    write_params(out / "params.csv", params)
    write_run_log(out / "run_log.csv", result.records)
    if config.optimizer.model == 'moments':
        initial = project_initial(problem.initial, N, problem.grid)
        trajectory = integrate(initial, problem.system(N), params, config.run.horizon, problem.grid,
                               config.moments.cfl, problem.rho_ion)
        records = moment_series(problem, trajectory, config.run.stride)
    else:
        recorder = SeriesRecorder(problem, config.run.stride)
        run_vp(problem.initial, params, config.run.horizon, config.kinetic.dt, problem.rho_ion, recorder)
        records = recorder.close()
    write_series(out / "series.csv", records)
    print(f"📄 Parameters: {out / 'params.csv'}")
    return result.status


def _evaluate_into(problem: Problem, params: ControlParams, out: Path, progress: bool) -> Dict[str, float]:
    config = problem.config
    ensure_output_dir(out)
    recorder = SeriesRecorder(problem, config.run.stride)
    dt = config.kinetic.dt
    state_T = run_vp(problem.initial, params, config.run.horizon, dt, problem.rho_ion, recorder, progress)
    summary = {"J_T": kinetic_perturbation(state_T, problem.equilibrium),
               "E_energy_T": electric_energy(field_of(state_T, problem.rho_ion).E, problem.grid)}
    _write_phase_space(out, "f_0", problem.initial)
    _write_phase_space(out, "f_T", state_T)

    extend = config.run.extend
    if extend is not None and extend > config.run.horizon:
        state_ext = run_vp(state_T, params, extend - config.run.horizon, dt, problem.rho_ion,
                           recorder, progress)
        summary["J_extend"] = kinetic_perturbation(state_ext, problem.equilibrium)
        summary["E_energy_extend"] = electric_energy(field_of(state_ext, problem.rho_ion).E, problem.grid)
        _write_phase_space(out, "f_extend", state_ext)
    write_series(out / "series.csv", recorder.close())
    return summary


def run_evaluate(config: RunConfig, params_path: Path, baseline: bool = False,
                 progress: bool = False) -> Dict[str, Dict[str, float]]:
    """Kinetic evaluation of an optimized field at 0, T and the extension horizon"""
    problem = setup(config)
    params = read_params(Path(params_path), config.control.wavenumber)
    out = problem.out
    if Path(params_path).resolve() != (out / "params.csv").resolve():
        write_params(out / "params.csv", params)

    summaries = {"controlled": _evaluate_into(problem, params, out, progress)}
    if baseline:
        zero = ControlParams.zeros(params.K, params.wavenumber)
        summaries["uncontrolled"] = _evaluate_into(problem, zero, out / "baseline", progress)
    for label, summary in summaries.items():
        print(f"{label}: " + ", ".join(f"{key} = {value:.6e}" for key, value in summary.items()))
    return summaries


def run_plot(input_dir: Path, output_dir: Path, grid: Optional[Grid1D] = None,
             wavenumber: float = 0.2) -> List[Path]:
    written = render_plots(input_dir, output_dir, grid, wavenumber)
    for path in written:
        print(f"📄 {path}")
    if not written:
        print(f"No plottable artifacts in {input_dir}")
    return written
