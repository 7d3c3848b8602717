"""FFT spectra, harmonic/mixing amplitude readout and the polynomial
susceptibility oracle.

Spectra use a rectangular window and assume coherent sampling (the record
covers an integer number of periods of every analyzed tone), so amplitudes
land exactly on bins and compare directly against closed forms.  One-sided
amplitude normalization: a pure real sine of amplitude A gives |bin| = A.

Complex-amplitude convention for the oracle: a real tone
``A*cos(2*pi*f*t + phi)`` corresponds to the complex amplitude
``H = (A/2)*exp(-i*phi)`` of ``H*exp(-i*2*pi*f*t) + c.c.``.  A mixing term
with complex amplitude c at frequency f > 0 therefore shows up in a real
signal's spectrum with |bin| = 2|c|; the DC term appears as-is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Tone
from .errors import ContractViolationError
from .llg import TimeSeries

_COMPONENTS = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class ChiSet:
    """Real susceptibility coefficients, linear term first."""

    chi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(float(c) for c in self.chi))
        if len(self.chi) < 1:
            raise ContractViolationError("ChiSet needs at least the linear coefficient")

    @property
    def order(self) -> int:
        return len(self.chi)


@dataclass(frozen=True)
class MixingTerm:
    """One closed-form mixing product: |n1*f1 + n2*f2| and its complex
    amplitude in the exponential convention."""

    frequency: float
    amplitude: complex
    label: tuple[int, int]

    @property
    def real_signal_amplitude(self) -> float:
        """Magnitude this term contributes to a real signal's spectrum."""
        scale = 1.0 if self.frequency == 0.0 else 2.0
        return scale * abs(self.amplitude)


@dataclass
class SpectrumResult:
    """One-sided, amplitude-normalized spectrum with bin width df = 1/duration."""

    df: float
    bins: np.ndarray
    n_samples: int

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=complex)
        if self.df <= 0:
            raise ContractViolationError("df must be > 0")

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(len(self.bins)) * self.df

    @property
    def f_nyquist(self) -> float:
        return 0.5 * self.n_samples * self.df

    def bin_index(self, f: float) -> int:
        """Index of the bin centred at f; f must sit on a bin centre."""
        pos = f / self.df
        k = int(round(pos))
        if abs(pos - k) > 1e-6 * max(1.0, abs(pos)):
            raise ContractViolationError(
                f"{f:.9g} Hz is not on a bin centre; nearest bin is {k * self.df:.9g} Hz"
            )
        if k < 0 or k >= len(self.bins):
            raise ContractViolationError(
                f"{f:.9g} Hz is outside the spectrum (Nyquist {self.f_nyquist:.9g} Hz)"
            )
        return k

    def amplitude_at(self, f: float) -> complex:
        return complex(self.bins[self.bin_index(f)])

    def power(self) -> float:
        """Mean-square signal power implied by the one-sided amplitudes
        (equals the time-domain mean of x^2, Parseval)."""
        mags = np.abs(self.bins)
        p = mags[0] ** 2
        if self.n_samples % 2 == 0:
            p += 0.5 * np.sum(mags[1:-1] ** 2) + mags[-1] ** 2
        else:
            p += 0.5 * np.sum(mags[1:] ** 2)
        return float(p)


def _one_sided(x: np.ndarray) -> np.ndarray:
    n = len(x)
    amps = np.fft.rfft(x) / n
    if n % 2 == 0:
        amps[1:-1] *= 2.0
    else:
        amps[1:] *= 2.0
    return amps


def fft_spectrum(ts: TimeSeries, component: str = "z") -> SpectrumResult:
    """Spectrum of one component of the spatially averaged magnetization."""
    x = ts.component(component)
    if len(x) < 4:
        raise ContractViolationError("need at least 4 samples for a spectrum")
    return SpectrumResult(df=1.0 / ts.duration, bins=_one_sided(x), n_samples=len(x))


def harmonic_amplitude(spec: SpectrumResult, f_pump: float, n: int) -> complex:
    """Complex amplitude of the n-th harmonic of f_pump."""
    if n < 0:
        raise ContractViolationError("harmonic order must be >= 0")
    return spec.amplitude_at(n * f_pump)


def mixing_amplitude(spec: SpectrumResult, f1: float, f2: float,
                     a: int, b: int) -> complex:
    """Complex amplitude at the mixing frequency |a*f1 + b*f2|."""
    return spec.amplitude_at(abs(a * f1 + b * f2))


def spatial_mode_map(ts: TimeSeries, f: float) -> tuple[np.ndarray, float]:
    """Per-cell |m_z| spectral amplitude at frequency f, plus its spatial mean.

    Requires the run to have recorded per-cell m_z.  Uses a single-bin
    projection, identical to the corresponding FFT bin.
    """
    if ts.mz_cells is None:
        raise ContractViolationError(
            "per-cell data absent: run with record_per_cell enabled"
        )
    n = ts.n_samples
    df = 1.0 / ts.duration
    pos = f / df
    k = int(round(pos))
    if abs(pos - k) > 1e-6 * max(1.0, abs(pos)):
        raise ContractViolationError(
            f"{f:.9g} Hz is not on a bin centre; nearest bin is {k * df:.9g} Hz"
        )
    if k < 0 or k > n // 2:
        raise ContractViolationError(f"{f:.9g} Hz is beyond Nyquist")
    phase = np.exp(-2j * math.pi * k * np.arange(n) / n)
    coeff = np.tensordot(phase, ts.mz_cells, axes=(0, 0)) / n
    doubled = 0 < k and not (n % 2 == 0 and k == n // 2)
    amp = np.abs(coeff) * (2.0 if doubled else 1.0)
    return amp, float(amp.mean())


def polynomial_response(h: np.ndarray, chi: ChiSet | Sequence[float]) -> np.ndarray:
    """Pointwise M(t) = chi1*H(t) + chi2*H(t)^2 + ... (Horner form)."""
    coeffs = chi.chi if isinstance(chi, ChiSet) else tuple(float(c) for c in chi)
    if len(coeffs) < 1:
        raise ContractViolationError("need at least the linear coefficient")
    h = np.asarray(h, dtype=float)
    acc = np.full_like(h, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = c + h * acc
    return h * acc


def second_order_mixing_terms(h1: complex, h2: complex, f1: float, f2: float,
                              chi2: float) -> list[MixingTerm]:
    """Closed-form second-order products of a two-tone drive.

    ``h1``/``h2`` are complex tone amplitudes in the exponential convention
    (see module docstring).  Returns exactly the five products
    2f1, 2f2, f1+f2, |f1-f2| and DC.
    """
    if f1 == f2:
        raise ContractViolationError(
            "degenerate tones (f1 == f2): use the harmonic path instead"
        )
    h1 = complex(h1)
    h2 = complex(h2)
    return [
        MixingTerm(2.0 * f1, chi2 * h1 * h1, (2, 0)),
        MixingTerm(2.0 * f2, chi2 * h2 * h2, (0, 2)),
        MixingTerm(f1 + f2, 2.0 * chi2 * h1 * h2, (1, 1)),
        MixingTerm(abs(f1 - f2), 2.0 * chi2 * h1 * h2.conjugate(), (1, -1)),
        MixingTerm(0.0, 2.0 * chi2 * (abs(h1) ** 2 + abs(h2) ** 2), (0, 0)),
    ]


def tone_complex_amplitude(tone: Tone) -> complex:
    """Exponential-convention amplitude of a drive tone.

    ``amp*sin(wt + phi) = amp*cos(wt + phi - pi/2)`` maps to
    ``(amp/2)*exp(-i*(phi - pi/2))``.
    """
    return 0.5 * tone.amplitude * np.exp(-1j * (tone.phase - 0.5 * math.pi))


def dominant_frequency(ts: TimeSeries, component: str = "z",
                       fmin: float = 0.0) -> float:
    """Frequency of the strongest spectral peak at or above fmin.

    Complex-ratio bin interpolation (exact for a rectangular-window tone)
    refines the peak to a small fraction of a bin; intended for ringdown
    frequency readout where the tone is not bin-aligned.
    """
    x = ts.component(component)
    n = len(x)
    if n < 8:
        raise ContractViolationError("need at least 8 samples to locate a peak")
    bins = np.fft.rfft(x - x.mean())
    mags = np.abs(bins)
    df = 1.0 / ts.duration
    k_min = max(1, int(math.ceil(fmin / df)))
    if k_min >= len(mags):
        raise ContractViolationError("fmin is beyond Nyquist")
    k = k_min + int(np.argmax(mags[k_min:]))
    if 0 < k < len(mags) - 1:
        den = 2.0 * bins[k] - bins[k - 1] - bins[k + 1]
        if den != 0.0:
            delta = -float(np.real((bins[k + 1] - bins[k - 1]) / den))
            if abs(delta) <= 0.5:
                return float((k + delta) * df)
    return float(k * df)
