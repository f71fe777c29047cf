#!/usr/bin/env python3
"""
Shared helpers

Thread capping, number formatting and output directory handling.
"""

import os
from pathlib import Path


# Default output directory name
DEFAULT_OUTPUT_DIR = "vpmc-out"

# Environment variable that caps internal parallelism
THREADS_ENV = "VPMC_THREADS"

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def thread_count() -> int:
    """Number of worker threads allowed by VPMC_THREADS (1 when unset or invalid)"""
    value = os.environ.get(THREADS_ENV, "")
    try:
        count = int(value)
    except ValueError:
        return 1
    return max(count, 1)


def apply_thread_cap() -> None:
    """Propagate VPMC_THREADS to the BLAS/OpenMP variables

    Only effective before numpy is first imported; explicit user settings win.
    """
    if THREADS_ENV not in os.environ:
        return
    for name in _THREAD_VARS:
        os.environ.setdefault(name, str(thread_count()))


def format_number(value: float) -> str:
    """Format a float with 17 significant digits (round-trip exact)"""
    return f"{float(value):.17g}"


def ensure_output_dir(path: Path) -> Path:
    """Create output directory if needed and return it"""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
