#!/usr/bin/env python3
"""
Artifact file formats

Binary trajectories (little endian, row-major doubles):
    VPMOM1: magic, uint32 n_times, n_moments, n_x, float64 times[n_times],
            float64 values[n_times][n_moments][n_x]
    VPKIN1: magic, uint32 n_x, n_v, float64 time, float64 values[n_x][n_v]

CSV tables: moment snapshot ``x,m0,...,mN``, kinetic snapshot ``x,v,f``,
control parameters ``k,type,value``, time series ``t,J,E_energy,moment_misfit``,
run log ``iter,loss,grad_inf_norm,elapsed_s``, sweep ``N,loss,J_T,E_energy_T``.
"""

from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .csv_manager import CSVManager
from .diag import SERIES_HEADER, TimeSeriesRecord
from .errors import FormatError
from .field import ControlParams, Grid1D
from .kinetic import PhaseSpaceField
from .msolver import MomentField
from .optim import RunRecord


MOMENT_MAGIC = b"VPMOM1"
KINETIC_MAGIC = b"VPKIN1"

PARAMS_HEADER = ["k", "type", "value"]
RUN_LOG_HEADER = ["iter", "loss", "grad_inf_norm", "elapsed_s"]
SWEEP_HEADER = ["N", "loss", "J_T", "E_energy_T"]
KINETIC_HEADER = ["x", "v", "f"]


def moment_header(N: int) -> List[str]:
    return ["x"] + [f"m{n}" for n in range(N + 1)]


def _write_bytes(path: Path, chunks: Iterable[bytes]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_suffix(path.suffix + '.tmp')
    with open(temp_path, 'wb') as f:
        for chunk in chunks:
            f.write(chunk)
    temp_path.replace(path)


class _Reader:
    """Sequential little-endian reader over a byte buffer"""

    def __init__(self, path: Path):
        self.path = Path(path)
        if not self.path.exists():
            raise FormatError("File not found", path=str(self.path))
        self.data = self.path.read_bytes()
        self.offset = 0

    def take(self, dtype: str, count: int) -> np.ndarray:
        size = np.dtype(dtype).itemsize * count
        if self.offset + size > len(self.data):
            raise FormatError(f"Truncated file at byte {self.offset}", path=str(self.path))
        values = np.frombuffer(self.data, dtype=dtype, count=count, offset=self.offset)
        self.offset += size
        return values

    def magic(self, expected: bytes) -> None:
        found = self.data[:len(expected)]
        if found != expected:
            raise FormatError(f"Bad magic {found!r}, expected {expected!r}", path=str(self.path))
        self.offset = len(expected)

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise FormatError(f"{len(self.data) - self.offset} trailing bytes", path=str(self.path))


def write_moment_trajectory(path: Path, states: Sequence[MomentField]) -> None:
    """Write moment snapshots in the VPMOM1 format"""
    if not states:
        raise ValueError("No moment states to write")
    values = np.stack([state.values for state in states])
    times = np.array([state.time for state in states], dtype='<f8')
    dims = np.array(values.shape, dtype='<u4')
    _write_bytes(path, [MOMENT_MAGIC, dims.tobytes(), times.tobytes(),
                        np.ascontiguousarray(values, dtype='<f8').tobytes()])


def read_moment_trajectory(path: Path) -> List[MomentField]:
    """Read a VPMOM1 file back into moment snapshots

    Raises:
        FormatError: Bad magic, truncated or oversized file
    """
    reader = _Reader(path)
    reader.magic(MOMENT_MAGIC)
    n_times, n_moments, n_x = (int(d) for d in reader.take('<u4', 3))
    times = reader.take('<f8', n_times)
    values = reader.take('<f8', n_times * n_moments * n_x).reshape(n_times, n_moments, n_x)
    reader.finish()
    return [MomentField(values[i].astype(float), float(times[i])) for i in range(n_times)]


def write_kinetic_snapshot(path: Path, state: PhaseSpaceField) -> None:
    """Write a phase-space snapshot in the VPKIN1 format"""
    dims = np.array(state.values.shape, dtype='<u4')
    _write_bytes(path, [KINETIC_MAGIC, dims.tobytes(), np.array([state.time], dtype='<f8').tobytes(),
                        np.ascontiguousarray(state.values, dtype='<f8').tobytes()])


def read_kinetic_snapshot(path: Path, grid: Grid1D) -> PhaseSpaceField:
    """Read a VPKIN1 file; dimensions must match ``grid``"""
    reader = _Reader(path)
    reader.magic(KINETIC_MAGIC)
    n_x, n_v = (int(d) for d in reader.take('<u4', 2))
    if (n_x, n_v) != (grid.nx, grid.nv):
        raise FormatError(f"Snapshot is {n_x}x{n_v}, grid is {grid.nx}x{grid.nv}", path=str(reader.path))
    time = float(reader.take('<f8', 1)[0])
    values = reader.take('<f8', n_x * n_v).reshape(n_x, n_v)
    reader.finish()
    return PhaseSpaceField(values.astype(float), grid, time)


def write_moment_csv(path: Path, state: MomentField, grid: Grid1D) -> None:
    table = CSVManager(path, moment_header(state.N))
    for j, x in enumerate(grid.x):
        table.append([float(x)] + [float(value) for value in state.values[:, j]])
    table.save()


def read_moment_csv(path: Path) -> Tuple[np.ndarray, MomentField]:
    """Return (x nodes, moments) from a moment snapshot CSV"""
    table = CSVManager(path)
    table.load()
    if not table.header or table.header[0] != "x" or table.header[1:] != moment_header(len(table.header) - 2)[1:]:
        raise FormatError(f"Unexpected header {','.join(table.header)!r}", path=str(path), line=1)
    x = table.column("x")
    values = np.array([table.column(name) for name in table.header[1:]])
    return x, MomentField(values)


def write_kinetic_csv(path: Path, state: PhaseSpaceField) -> None:
    """Long-format ``x,v,f`` table, x outer and v inner"""
    table = CSVManager(path, KINETIC_HEADER)
    grid = state.grid
    for j, x in enumerate(grid.x):
        for l, v in enumerate(grid.v):
            table.append([float(x), float(v), float(state.values[j, l])])
    table.save()


def read_kinetic_csv(path: Path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (x nodes, v nodes, values of shape (nx, nv)) from a long-format table

    Raises:
        FormatError: Rows do not form a complete x-major grid
    """
    table = CSVManager(path, KINETIC_HEADER)
    table.load()
    x_col = table.column("x")
    v_col = table.column("v")
    f_col = table.column("f")
    x = np.unique(x_col)
    v = np.unique(v_col)
    if x.size * v.size != f_col.size:
        raise FormatError(f"{f_col.size} rows do not form a {x.size}x{v.size} grid", path=str(path))
    if np.any(x_col.reshape(x.size, v.size) != x[:, None]) or np.any(v_col.reshape(x.size, v.size) != v[None, :]):
        raise FormatError("Rows are not ordered x-major with ascending v", path=str(path))
    return x, v, f_col.reshape(x.size, v.size)


def write_params(path: Path, params: ControlParams) -> None:
    table = CSVManager(path, PARAMS_HEADER)
    for (k, parity), value in zip(params.labels(), params.as_vector()):
        table.append([k, parity, float(value)])
    table.save()


def read_params(path: Path, wavenumber: float = 0.2) -> ControlParams:
    """Load a ``k,type,value`` table with sines 1..K and cosines 0..K

    Raises:
        FormatError: Unknown type, duplicate or missing mode, non-numeric field
    """
    table = CSVManager(path, PARAMS_HEADER)
    table.load()
    entries = {}
    for line_num, (k_text, parity, value_text) in zip(table.line_numbers, table.data):
        try:
            k = int(k_text)
            value = float(value_text)
        except ValueError:
            raise FormatError(f"Invalid row {k_text},{parity},{value_text}", path=str(path), line=line_num) from None
        if parity not in ("sin", "cos"):
            raise FormatError(f"Unknown type {parity!r}", path=str(path), line=line_num)
        if (k, parity) in entries:
            raise FormatError(f"Duplicate entry for {parity} mode {k}", path=str(path), line=line_num)
        entries[(k, parity)] = value

    K = max((k for k, parity in entries if parity == "sin"), default=0)
    expected = set(ControlParams.zeros(K).labels())
    if set(entries) != expected:
        missing = sorted(expected - set(entries))
        extra = sorted(set(entries) - expected)
        raise FormatError(f"Incomplete control basis (missing {missing}, unexpected {extra})", path=str(path))
    alpha = [entries[(k, "sin")] for k in range(1, K + 1)]
    beta = [entries[(k, "cos")] for k in range(K + 1)]
    return ControlParams(np.array(alpha), np.array(beta), wavenumber)


def write_series(path: Path, records: Sequence[TimeSeriesRecord]) -> None:
    table = CSVManager(path, SERIES_HEADER)
    for record in records:
        table.append([float(value) for value in record.as_row()])
    table.save()


def read_series(path: Path) -> List[TimeSeriesRecord]:
    table = CSVManager(path, SERIES_HEADER)
    table.load()
    columns = [table.column(name) for name in SERIES_HEADER]
    return [TimeSeriesRecord(*(float(c[i]) for c in columns)) for i in range(len(table.data))]


def write_run_log(path: Path, records: Sequence[RunRecord]) -> None:
    table = CSVManager(path, RUN_LOG_HEADER)
    for record in records:
        table.append([record.iter, record.loss, record.grad_inf_norm, record.elapsed_s])
    table.save()


def write_sweep(path: Path, rows: Sequence[Tuple[int, float, float, float]]) -> None:
    table = CSVManager(path, SWEEP_HEADER)
    for N, loss_value, J_T, energy_T in rows:
        table.append([int(N), float(loss_value), float(J_T), float(energy_T)])
    table.save()
