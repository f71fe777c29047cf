#!/usr/bin/env python3
"""
Tests for plot.py SVG rendering
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from vpmc.diag import TimeSeriesRecord
from vpmc.errors import FormatError
from vpmc.field import ControlParams, Grid1D
from vpmc.hermite import Equilibrium
from vpmc.kinetic import initial_phase_space
from vpmc.plot import plot_control, plot_heatmap, plot_history, render_plots
from vpmc.snapshot import write_kinetic_csv, write_params, write_series


GRID = Grid1D(nx=16, nv=24)


def decaying_series(rate):
    return [TimeSeriesRecord(0.1 * i, np.exp(-rate * i), 1e-4 * np.exp(-rate * i), 0.0) for i in range(20)]


class TestPlotHistory:
    """Tests for history plots"""

    def test_deterministic_bytes(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            series = {"controlled": decaying_series(0.3), "uncontrolled": decaying_series(-0.1)}
            first = plot_history(series, Path(temp_dir) / "a.svg").read_bytes()
            second = plot_history(series, Path(temp_dir) / "b.svg").read_bytes()
            assert first == second
            assert first.lstrip().startswith(b"<?xml")
            assert b"<svg" in first

    def test_empty_series(self):
        """No records still produce a valid, empty plot"""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = plot_history({"run": []}, Path(temp_dir) / "history.svg")
            assert b"<svg" in path.read_bytes()

    def test_zero_values_skipped(self):
        """Exact zeros are left out of log axes"""
        with tempfile.TemporaryDirectory() as temp_dir:
            records = [TimeSeriesRecord(0.0, 0.0, 0.0, 0.0), TimeSeriesRecord(1.0, 1e-3, 1e-5, 0.0)]
            path = plot_history({"run": records}, Path(temp_dir) / "history.svg")
            assert path.exists()


class TestSinglePlots:
    """Tests for control and heatmap plots"""

    def test_control_profile(self):
        params = ControlParams(np.array([0.5]), np.array([0.0, -0.2]))
        with tempfile.TemporaryDirectory() as temp_dir:
            first = plot_control(params, GRID, Path(temp_dir) / "c1.svg").read_bytes()
            second = plot_control(params, GRID, Path(temp_dir) / "c2.svg").read_bytes()
            assert first == second

    def test_heatmap_of_equilibrium(self):
        mu = Equilibrium.two_stream()
        state = initial_phase_space(mu, GRID, amplitude=0.0)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = plot_heatmap(GRID.x, GRID.v, state.values, Path(temp_dir) / "sub" / "f.svg", "f_0")
            assert path.exists()


class TestRenderPlots:
    """Tests for rendering a run directory"""

    def test_all_artifacts(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            run = Path(temp_dir) / "run"
            write_series(run / "series.csv", decaying_series(0.2))
            write_series(run / "baseline" / "series.csv", decaying_series(-0.2))
            write_params(run / "params.csv", ControlParams.zeros(2))
            write_kinetic_csv(run / "f_T.csv", initial_phase_space(Equilibrium.maxwellian(), GRID))

            written = render_plots(run, run / "plots", GRID)
            names = sorted(path.name for path in written)
            assert names == ["control.svg", "f_T.svg", "history.svg"]

    def test_empty_directory(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            assert render_plots(Path(temp_dir), Path(temp_dir) / "plots") == []

    def test_malformed_series(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            run = Path(temp_dir)
            (run / "series.csv").write_text("t,J,E_energy,moment_misfit\n0,1,2,3\n0.1,x,2,3\n")
            with pytest.raises(FormatError) as excinfo:
                render_plots(run, run / "plots")
            assert excinfo.value.line == 3
