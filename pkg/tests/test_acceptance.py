#!/usr/bin/env python3
"""
Full-size experiment checks

Each test runs a complete preset (minutes, not seconds) and is deselected by
default; run with ``pytest -m slow``.
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from vpmc.commands import run_evaluate, run_optimize, run_solve_moments, run_solve_vp
from vpmc.config import parse_config
from vpmc.snapshot import read_series


pytestmark = pytest.mark.slow


def series_at(records, t):
    """Record closest to time t"""
    return min(records, key=lambda record: abs(record.time - t))


def resolve(mode, preset, out, *overrides):
    return parse_config(mode, preset, overrides=list(overrides), output_dir=out)


class TestTwoStream:
    """Two-stream preset: baseline growth and moment-based control"""

    def test_uncontrolled_baseline(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            run_solve_vp(resolve('solve-vp', 'two-stream', out, "run.horizon=40"))
            records = read_series(out / "series.csv")
            at_30 = series_at(records, 30.0)
            at_40 = series_at(records, 40.0)
            assert 0.115 <= at_30.J <= 0.46
            assert 0.225 <= at_40.J <= 0.9
            assert 0.375 <= at_30.E_energy <= 1.5
            assert 0.89 <= at_40.E_energy <= 3.56

    def test_unperturbed_stays_at_equilibrium(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            summary = run_solve_vp(resolve('solve-vp', 'two-stream', out, "perturbation.amplitude=0"))
            assert summary["J_T"] <= 1e-20
            moments = run_solve_moments(resolve('solve-moments', 'two-stream', out / "moments",
                                                "perturbation.amplitude=0"))
            assert moments["loss_T"] <= 1e-20

    def test_uncontrolled_moment_run_tracks_kinetic(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            kinetic = run_solve_vp(resolve('solve-vp', 'two-stream', out / "kinetic"))
            moments = run_solve_moments(resolve('solve-moments', 'two-stream', out / "moments"))
            assert 2 / 3 <= moments["E_energy_T"] / kinetic["E_energy_T"] <= 1.5
            # the e^{v²/2}-weighted moment norm dominates the plain L² norm of J
            assert moments["loss_T"] >= kinetic["J_T"]

    def test_control_efficacy(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            run_optimize(resolve('optimize', 'two-stream', out))
            summaries = run_evaluate(resolve('evaluate', 'two-stream', out), out / "params.csv")
            controlled = summaries["controlled"]
            assert controlled["J_T"] <= 1e-3
            assert controlled["E_energy_T"] <= 1e-3
            assert controlled["J_extend"] <= 1e-2

    def test_moment_count_trend(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            run_optimize(resolve('optimize', 'two-stream', out), orders=[10, 20, 30])
            lines = (out / "sweep.csv").read_text().splitlines()[1:]
            J = {int(line.split(',')[0]): float(line.split(',')[2]) for line in lines}
            assert J[20] <= 2 * J[10]
            assert J[30] <= 2 * J[20]
            assert J[30] * 5 <= J[10]


class TestBumpOnTail:
    """Bump-on-tail preset: field suppression through the extended horizon"""

    def test_energy_suppression(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir)
            run_optimize(resolve('optimize', 'bump-on-tail', out))
            summaries = run_evaluate(resolve('evaluate', 'bump-on-tail', out), out / "params.csv",
                                     baseline=True)
            controlled = summaries["controlled"]
            uncontrolled = summaries["uncontrolled"]
            assert controlled["E_energy_T"] * 100 <= uncontrolled["E_energy_T"]

            records = read_series(out / "series.csv")
            assert max(record.J for record in records) <= 1e-2
            assert np.isclose(records[-1].time, 60.0)
