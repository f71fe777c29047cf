#!/usr/bin/env python3
"""
CSV file management functionality

Provides the header + rows table used by every vpmc artifact (time series,
run logs, parameter files, snapshots).
"""

from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import FormatError
from .utils import format_number


def format_field(value) -> str:
    """Format a single CSV field; floats use 17 significant digits"""
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    text = str(value)
    if ',' in text or '\n' in text or '\r' in text:
        raise ValueError(f"Field cannot contain separators: {text!r}")
    return text


class CSVManager:
    """CSV file management"""

    def __init__(self, csv_path: Path, header: Optional[Sequence[str]] = None):
        """Initialize CSV manager

        Args:
            csv_path: Path to the CSV file
            header: Expected header; enforced on load when given
        """
        self._csv_path = Path(csv_path)
        self.expected_header = list(header) if header is not None else None
        self.header: List[str] = list(header) if header is not None else []
        self.data: List[List[str]] = []
        self.line_numbers: List[int] = []

    @property
    def csv_path(self) -> Path:
        """Path to CSV file"""
        return self._csv_path

    def append(self, row: Iterable) -> None:
        """Append a row of values"""
        fields = [format_field(value) for value in row]
        if self.header and len(fields) != len(self.header):
            raise ValueError(f"Row has {len(fields)} fields, header has {len(self.header)}")
        self.data.append(fields)

    def load(self) -> None:
        """Load data from CSV file

        Raises:
            FormatError: Missing file, header mismatch or ragged row
        """
        path = str(self.csv_path)
        if not self.csv_path.exists():
            raise FormatError("File not found", path=path)

        with open(self.csv_path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()

        if not lines:
            raise FormatError("Empty file (missing header)", path=path, line=1)

        header = lines[0].strip().split(',')
        if self.expected_header is not None and header != self.expected_header:
            raise FormatError(f"Unexpected header {','.join(header)!r}, "
                              f"expected {','.join(self.expected_header)!r}", path=path, line=1)
        self.header = header
        self.data = []
        self.line_numbers = []
        for line_num, line in enumerate(lines[1:], 2):
            line = line.strip()
            if not line:
                continue
            row = line.split(',')
            if len(row) != len(header):
                raise FormatError(f"Expected {len(header)} fields, got {len(row)}", path=path, line=line_num)
            self.data.append(row)
            self.line_numbers.append(line_num)

    def column(self, name: str) -> np.ndarray:
        """Return a numeric column as float array

        Raises:
            FormatError: Non-numeric value (reports the line number)
        """
        index = self.header.index(name)
        values = []
        for row_num, row in enumerate(self.data):
            try:
                values.append(float(row[index]))
            except ValueError:
                raise FormatError(f"Non-numeric value {row[index]!r} in column {name!r}",
                                  path=str(self.csv_path), line=self._line_of(row_num)) from None
        return np.array(values, dtype=float)

    def _line_of(self, row_num: int) -> int:
        if row_num < len(self.line_numbers):
            return self.line_numbers[row_num]
        return row_num + 2

    def save(self) -> None:
        """Save data to CSV file"""
        self.csv_path.parent.mkdir(parents=True, exist_ok=True)
        # Save to temporary file
        temp_path = self.csv_path.with_suffix(self.csv_path.suffix + '.tmp')
        with open(temp_path, 'w', encoding='utf-8', newline='\n') as f:
            if self.header:
                f.write(','.join(self.header) + '\n')
            for row in self.data:
                f.write(','.join(row) + '\n')

        # Atomic operation with rename
        temp_path.replace(self.csv_path)
