"""Spin-1 defect-centre readout model.

ESR frequencies come from exact diagonalization of the ground-state
Hamiltonian H/h = D*Sz^2 + gamma_e*(B.S) in each defect axis frame, so the
off-axis quadratic shifts come out right, not just the axial linear ones.
Photoluminescence dips use a saturating Lorentzian lineshape; line
amplitudes saturate as s/(1+s) with s = (B_perp/B_sat)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolationError
from .spectral import SpectrumResult

_SQ = 1.0 / math.sqrt(3.0)
#: tetrahedral <111>-family defect axes
DEFAULT_AXES = (
    (_SQ, _SQ, _SQ),
    (_SQ, -_SQ, -_SQ),
    (-_SQ, _SQ, -_SQ),
    (-_SQ, -_SQ, _SQ),
)

# spin-1 operators in the (ms = +1, 0, -1) basis
_SZ = np.diag([1.0, 0.0, -1.0]).astype(complex)
_SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / math.sqrt(2.0)
_SY = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / math.sqrt(2.0)

_B_GUARD = 0.1  # tesla; beyond this the ground-state-only model is not trusted


@dataclass(frozen=True)
class NVModel:
    """Ensemble parameters: zero-field splitting D (Hz), gyromagnetic ratio
    (Hz/T), defect axes, Lorentzian FWHM (Hz), maximum dip contrast and the
    transverse drive amplitude (T) that half-saturates a line."""

    zfs_hz: float = 2.870e9
    gamma_hz_per_t: float = 2.8024e10
    axes: tuple[tuple[float, float, float], ...] = DEFAULT_AXES
    linewidth_hz: float = 8.0e6
    contrast_max: float = 0.02
    b_sat_t: float = 1.0e-4

    def __post_init__(self):
        if self.zfs_hz <= 0:
            raise ContractViolationError("zero-field splitting must be > 0")
        if self.linewidth_hz <= 0:
            raise ContractViolationError("linewidth must be > 0")
        if not 0 <= self.contrast_max < 1:
            raise ContractViolationError("contrast_max must lie in [0, 1)")
        if self.b_sat_t <= 0:
            raise ContractViolationError("b_sat_t must be > 0")
        axes = tuple(tuple(float(c) for c in ax) for ax in self.axes)
        for ax in axes:
            if abs(math.sqrt(sum(c * c for c in ax)) - 1.0) > 1e-9:
                raise ContractViolationError("defect axes must be unit vectors")
        object.__setattr__(self, "axes", axes)


@dataclass(frozen=True)
class ESRPair:
    """The two ground-state transition frequencies for one defect axis."""

    f_plus: float
    f_minus: float
    axis_index: int = 0

    def __post_init__(self):
        if not (self.f_plus >= self.f_minus > 0):
            raise ContractViolationError("need f_plus >= f_minus > 0")

    @property
    def frequencies(self) -> tuple[float, float]:
        return (self.f_plus, self.f_minus)


def _axis_frame(axis: Sequence[float]) -> np.ndarray:
    z = np.asarray(axis, dtype=float)
    z = z / np.linalg.norm(z)
    ref = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(ref, z)) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    x = np.cross(ref, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.stack([x, y, z])


def esr_frequencies(nv: NVModel, b_field, axis_index: int = 0) -> ESRPair:
    """Transition frequencies f+- for the given axis under field B (tesla).

    Diagonalizes the 3x3 Hamiltonian and takes the transitions out of the
    eigenstate with the largest ms = 0 character.
    """
    b = np.asarray(b_field, dtype=float)
    if b.shape != (3,):
        raise ContractViolationError("b_field must be a 3-vector in tesla")
    if np.linalg.norm(b) >= _B_GUARD:
        raise ContractViolationError(
            f"|B| = {np.linalg.norm(b):.3g} T exceeds the {_B_GUARD} T model guard"
        )
    if not 0 <= axis_index < len(nv.axes):
        raise ContractViolationError(f"axis_index {axis_index} out of range")
    frame = _axis_frame(nv.axes[axis_index])
    bx, by, bz = frame @ b
    ham = nv.zfs_hz * (_SZ @ _SZ) + nv.gamma_hz_per_t * (bx * _SX + by * _SY + bz * _SZ)
    evals, evecs = np.linalg.eigh(ham)
    ground = int(np.argmax(np.abs(evecs[1, :]) ** 2))
    others = [i for i in range(3) if i != ground]
    f_lo, f_hi = sorted(abs(evals[i] - evals[ground]) for i in others)
    return ESRPair(f_plus=float(f_hi), f_minus=float(f_lo), axis_index=axis_index)


def esr_all_axes(nv: NVModel, b_field) -> tuple[ESRPair, ...]:
    """ESR pairs for every defect axis."""
    return tuple(esr_frequencies(nv, b_field, i) for i in range(len(nv.axes)))


def _lorentzian(detuning: float, fwhm: float) -> float:
    hw = 0.5 * fwhm
    return hw * hw / (detuning * detuning + hw * hw)


def line_dip(nv: NVModel, f_line: float, b_perp: float,
             esr_freqs: Iterable[float]) -> float:
    """PL dip caused by one drive line against a set of ESR frequencies."""
    if b_perp < 0:
        raise ContractViolationError("drive amplitude must be >= 0")
    s = (b_perp / nv.b_sat_t) ** 2
    sat = s / (1.0 + s)
    return sum(
        nv.contrast_max * sat * _lorentzian(f_line - fe, nv.linewidth_hz)
        for fe in esr_freqs
    )


def odmr_spectrum(nv: NVModel, drive_lines: Sequence[tuple[float, float]],
                  esr_pairs: Sequence[ESRPair], probe_freqs) -> np.ndarray:
    """Relative PL over a probe frequency grid.

    ``drive_lines`` are (frequency Hz, transverse amplitude T) pairs.  Each
    line darkens only the probe points coinciding with its own frequency;
    its depth depends on the detuning from every ESR line through the
    Lorentzian.  PL = 1 away from all drive lines.
    """
    probe = np.asarray(probe_freqs, dtype=float)
    pl = np.ones_like(probe)
    esr_freqs = [f for pair in esr_pairs for f in pair.frequencies]
    for f_line, b_perp in drive_lines:
        dip = line_dip(nv, f_line, b_perp, esr_freqs)
        mask = np.isclose(probe, f_line, rtol=1e-12, atol=1e-6)
        pl[mask] -= dip
    return np.clip(pl, 0.0, None)


def detectable(spec: SpectrumResult, esr: ESRPair, kappa_t: float,
               threshold_t: float) -> dict[str, bool]:
    """Whether the converted stray field clears a detection threshold.

    The simulated magnetization amplitude at each ESR branch frequency is
    scaled by the stray-field coupling ``kappa_t`` (tesla per unit of
    normalized magnetization) and compared against ``threshold_t``.
    """
    if kappa_t < 0 or threshold_t < 0:
        raise ContractViolationError("kappa_t and threshold_t must be >= 0")
    return {
        "plus": kappa_t * abs(spec.amplitude_at(esr.f_plus)) > threshold_t,
        "minus": kappa_t * abs(spec.amplitude_at(esr.f_minus)) > threshold_t,
    }


def rabi_frequency(nv: NVModel, b1_perp_t: float) -> float:
    """Rabi frequency of a resonant transverse drive, rotating-wave
    convention: Omega = gamma_e * B1 / 2."""
    if b1_perp_t < 0:
        raise ContractViolationError("drive amplitude must be >= 0")
    return 0.5 * nv.gamma_hz_per_t * b1_perp_t


def simulate_rabi(rabi_hz: float, t_decay: float | None, duration: float,
                  dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Ground-population trace P0(tau) = (1 + exp(-tau/T)*cos(2*pi*Omega*tau))/2.

    ``t_decay = None`` (or inf) disables decay.  Requires dt < 1/(20*Omega).
    """
    if rabi_hz < 0:
        raise ContractViolationError("rabi_hz must be >= 0")
    if dt <= 0 or duration <= 0:
        raise ContractViolationError("duration and dt must be > 0")
    if rabi_hz > 0 and dt >= 1.0 / (20.0 * rabi_hz):
        raise ContractViolationError(
            f"dt = {dt:.3e} s undersamples the oscillation (need < {1.0 / (20.0 * rabi_hz):.3e} s)"
        )
    tau = np.arange(int(math.floor(duration / dt)) + 1) * dt
    if t_decay is None or math.isinf(t_decay):
        envelope = np.ones_like(tau)
    elif t_decay <= 0:
        raise ContractViolationError("t_decay must be > 0, None or inf")
    else:
        envelope = np.exp(-tau / t_decay)
    p0 = 0.5 * (1.0 + envelope * np.cos(2.0 * math.pi * rabi_hz * tau))
    return tau, p0


def conversion_efficiency(rabi_converted_hz: float, rabi_reference_hz: float) -> float:
    """Energy conversion ratio from two Rabi frequencies: (Oc/Or)^2.

    Rabi frequency is proportional to drive amplitude, so the squared ratio
    is the energy (power) ratio of converted to reference tone.
    """
    if rabi_reference_hz <= 0:
        raise ContractViolationError("reference Rabi frequency must be > 0")
    if rabi_converted_hz < 0:
        raise ContractViolationError("converted Rabi frequency must be >= 0")
    return (rabi_converted_hz / rabi_reference_hz) ** 2
