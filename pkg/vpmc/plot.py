#!/usr/bin/env python3
"""
SVG rendering of run artifacts

History plots (log-scale J and electric energy), control profiles H(x) and
phase-space heatmaps f(x, v). Output bytes are deterministic: fixed figure
sizes, a fixed SVG hash salt and no date metadata.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from .diag import TimeSeriesRecord
from .field import ControlParams, Grid1D, eval_control
from .snapshot import read_kinetic_csv, read_params, read_series
from .utils import ensure_output_dir


FIGURE_SIZE = (6.4, 4.0)

plt.rcParams['svg.hashsalt'] = 'vpmc'
plt.rcParams['svg.fonttype'] = 'path'


def _save(fig, path: Path) -> Path:
    path = Path(path)
    ensure_output_dir(path.parent)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def plot_history(series: Dict[str, Sequence[TimeSeriesRecord]], path: Path) -> Path:
    """J(t) and 𝓔_e(t) on log axes, one curve per labeled series"""
    fig, axes = plt.subplots(1, 2, figsize=(2 * FIGURE_SIZE[0], FIGURE_SIZE[1]))
    for ax, name, title in zip(axes, ("J", "E_energy"), ("Perturbation J(t)", "Electric energy")):
        for label, records in series.items():
            t = np.array([r.time for r in records])
            values = np.array([getattr(r, name) for r in records])
            # log axes cannot show exact zeros
            positive = values > 0
            if np.any(positive):
                ax.plot(t[positive], values[positive], label=label)
        ax.set_yscale('log')
        ax.set_xlabel("t")
        ax.set_title(title)
        if ax.lines:
            ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_control(params: ControlParams, grid: Grid1D, path: Path) -> Path:
    """H(x) over the periodic domain"""
    x = np.linspace(0.0, grid.length, 4 * grid.nx + 1)
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    ax.plot(x, eval_control(params, x))
    ax.set_xlabel("x")
    ax.set_ylabel("H(x)")
    ax.set_xlim(0.0, grid.length)
    fig.tight_layout()
    return _save(fig, path)


def plot_heatmap(x, v, values, path: Path, title: Optional[str] = None) -> Path:
    """f(x, v) with x horizontal and v vertical"""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    image = ax.imshow(np.asarray(values, dtype=float).T, origin='lower', aspect='auto',
                      extent=(x[0], x[-1], v[0], v[-1]), cmap='viridis')
    fig.colorbar(image, ax=ax, label="f")
    ax.set_xlabel("x")
    ax.set_ylabel("v")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def render_plots(input_dir: Path, output_dir: Path, grid: Optional[Grid1D] = None,
                 wavenumber: float = 0.2) -> List[Path]:
    """Render every documented artifact found in ``input_dir``

    series.csv (and baseline/series.csv) → history.svg, params.csv →
    control.svg, f_*.csv → f_*.svg.

    Raises:
        FormatError: Malformed input CSV (with line number)
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    grid = grid or Grid1D()
    written = []

    series = {}
    if (input_dir / "series.csv").exists():
        series["controlled" if (input_dir / "baseline" / "series.csv").exists() else "run"] = \
            read_series(input_dir / "series.csv")
    if (input_dir / "baseline" / "series.csv").exists():
        series["uncontrolled"] = read_series(input_dir / "baseline" / "series.csv")
    if series:
        written.append(plot_history(series, output_dir / "history.svg"))

    if (input_dir / "params.csv").exists():
        params = read_params(input_dir / "params.csv", wavenumber)
        written.append(plot_control(params, grid, output_dir / "control.svg"))

    for snapshot in sorted(input_dir.glob("f_*.csv")):
        x, v, values = read_kinetic_csv(snapshot)
        written.append(plot_heatmap(x, v, values, output_dir / f"{snapshot.stem}.svg", snapshot.stem))
    return written
