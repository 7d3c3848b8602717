"""File formats: magnetization snapshots and the CSV export schemas.

All numbers are written with 17 significant digits, which round-trips IEEE
doubles bit-exactly and keeps byte output deterministic for identical
inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import SpinField
from .errors import ContractViolationError
from .planner import ProtocolSolution
from .spectral import SpectrumResult

SNAPSHOT_MAGIC = "MMS1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_snapshot(s: SpinField, path: str) -> None:
    """Write a text snapshot: header ``MMS1 nx ny dx dy thickness`` then
    nx*ny lines of ``mx my mz``, row-major (x index varies slowest)."""
    lines = [f"{SNAPSHOT_MAGIC} {s.nx} {s.ny} {_fmt(s.dx)} {_fmt(s.dy)} {_fmt(s.thickness)}"]
    flat = s.m.reshape(-1, 3)
    for row in flat:
        lines.append(f"{_fmt(row[0])} {_fmt(row[1])} {_fmt(row[2])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_snapshot(path: str) -> SpinField:
    """Read a snapshot written by :func:`save_snapshot` (bit-exact)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != SNAPSHOT_MAGIC:
            raise ContractViolationError(f"{path}: not a {SNAPSHOT_MAGIC} snapshot")
        nx, ny = int(header[1]), int(header[2])
        dx, dy, thickness = (float(v) for v in header[3:6])
        m = np.empty((nx * ny, 3))
        for k in range(nx * ny):
            parts = fh.readline().split()
            if len(parts) != 3:
                raise ContractViolationError(
                    f"{path}: truncated snapshot at cell line {k + 1}"
                )
            m[k] = [float(p) for p in parts]
    return SpinField(nx, ny, dx, dy, thickness, m.reshape(nx, ny, 3))


def write_spectrum_csv(spec: SpectrumResult, path: str) -> None:
    """``freq_hz,amp_re,amp_im`` rows in ascending frequency."""
    lines = ["freq_hz,amp_re,amp_im"]
    freqs = spec.frequencies
    for f, amp in zip(freqs, spec.bins):
        lines.append(f"{_fmt(f)},{_fmt(amp.real)},{_fmt(amp.imag)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_odmr_csv(freqs: np.ndarray, pl: np.ndarray, path: str) -> None:
    """PL spectra reuse the spectrum schema: PL in amp_re, amp_im = 0."""
    lines = ["freq_hz,amp_re,amp_im"]
    for f, v in zip(freqs, pl):
        lines.append(f"{_fmt(f)},{_fmt(v)},0")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_sweep_csv(axis1: np.ndarray, axis2: np.ndarray,
                    values: np.ndarray, path: str) -> None:
    """``axis1,axis2,value`` rows, row-major over (axis1, axis2)."""
    values = np.asarray(values)
    if values.shape != (len(axis1), len(axis2)):
        raise ContractViolationError(
            f"value matrix shape {values.shape} does not match axes "
            f"({len(axis1)}, {len(axis2)})"
        )
    lines = ["axis1,axis2,value"]
    for i, a in enumerate(axis1):
        for j, b in enumerate(axis2):
            lines.append(f"{_fmt(a)},{_fmt(b)},{_fmt(values[i, j])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_protocols_csv(solutions: Sequence[ProtocolSolution], path: str) -> None:
    """``a,b,branch,f1_hz,f2_hz,order`` rows in the given order."""
    lines = ["a,b,branch,f1_hz,f2_hz,order"]
    for s in solutions:
        lines.append(f"{s.a},{s.b},{s.branch},{_fmt(s.f1)},{_fmt(s.f2)},{s.order}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_table_csv(header: Sequence[str], rows: Sequence[Sequence], path: str) -> None:
    """Generic table: numbers via the 17-digit format, everything else str()."""
    def cell(v) -> str:
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return _fmt(v)
        return str(v)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
