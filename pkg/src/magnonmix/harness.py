"""Experiment pipelines and sweep orchestration.

Maps run in one of two modes: ``analytic`` composes the planner and the
readout lineshape (seconds for thousands of cells), ``full-sim`` runs the
micromagnetic pipeline per cell and is guarded by ``full_sim_budget``.
Sweep cells are independent; results are keyed by cell index, so output is
identical for any thread count.  Progress goes to stderr only.
"""

from __future__ import annotations

import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import io as fileio
from .core import DriveSpec, MaterialMap, SpinField, Tone
from .errors import ConfigurationError, ContractViolationError
from .llg import plan_coherent_run, relax, run, stability_dt_max
from .nv import ESRPair, esr_all_axes
from .planner import ProtocolSolution, fingerprint
from .scenario import Scenario
from .spectral import SpectrumResult, fft_spectrum, harmonic_amplitude, spatial_mode_map
from .textures import TextureSpec, WallMetrics, build_texture, wall_metrics


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def map_indexed(func: Callable[[int], object], n: int, threads: int) -> list:
    """func(i) for i in range(n) on a worker pool; results in index order."""
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    if workers == 1 or n <= 1:
        return [func(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(n)))


@dataclass
class SweepResult:
    """Scalar observable over a 2-D parameter sweep, row-major."""

    axis_names: tuple[str, str]
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.axis1 = np.asarray(self.axis1, dtype=float)
        self.axis2 = np.asarray(self.axis2, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.axis1), len(self.axis2)):
            raise ContractViolationError(
                f"sweep matrix shape {self.values.shape} != "
                f"({len(self.axis1)}, {len(self.axis2)})"
            )

    def to_csv(self, path: str) -> None:
        fileio.write_sweep_csv(self.axis1, self.axis2, self.values, path)


@dataclass
class TextureRow:
    """Per-texture outcome.  ``amplitude`` is the harmonic bin of the
    spatially averaged m_z; ``map_amplitude`` is the spatial mean of the
    per-cell harmonic amplitude map (phase-cancellation free; None when
    per-cell recording was off)."""

    label: str
    metrics: WallMetrics
    amplitude: float
    map_amplitude: float | None = None


@dataclass
class HarmonicExperimentResult:
    harmonic: int
    f_pump: float
    rows: list[TextureRow]
    spectra: dict[str, SpectrumResult]
    mode_maps: dict[str, np.ndarray]

    def table(self) -> tuple[list[str], list[list]]:
        header = ["texture", "wall_count", "total_length_m", "mean_width_m",
                  "amplitude", "map_amplitude"]
        rows = [[r.label, r.metrics.wall_count, r.metrics.total_length,
                 r.metrics.mean_width, r.amplitude,
                 "" if r.map_amplitude is None else r.map_amplitude]
                for r in self.rows]
        return header, rows

    def to_csv(self, path: str) -> None:
        header, rows = self.table()
        fileio.write_table_csv(header, rows, path)


@dataclass
class SensingReport:
    f2: float
    solutions: list[ProtocolSolution]
    warning: str | None = None
    verification: dict | None = None


def texture_label(spec: TextureSpec) -> str:
    if spec.kind == "multi-step":
        return f"multi-step({spec.n_walls})"
    return spec.kind


def prepare_texture_state(sc: Scenario, spec: TextureSpec,
                          bias: tuple[float, float, float] = (0.0, 0.0, 0.0),
                          ) -> tuple[SpinField, MaterialMap, WallMetrics]:
    """Build the texture on the scenario grid and relax it.

    Relaxation runs at zero applied field by default (remanent-state
    preparation): a static bias exerts a Zeeman pressure that sweeps free
    walls out of the grid, whereas the drive bias is switched on only for
    the dynamic run and its transient is absorbed by the settle stretch.
    """
    template = sc.template()
    s0, mat = build_texture(spec, template, sc.material_map())
    relaxed = relax(s0, mat, DriveSpec(bias=bias),
                    tol=sc.integrator.relax_tolerance_t,
                    max_steps=sc.integrator.relax_max_steps,
                    demag_mode=sc.integrator.demag_mode)
    return relaxed, mat, wall_metrics(relaxed)


def run_harmonic_experiment(sc: Scenario) -> HarmonicExperimentResult:
    """Relax, drive and analyze each configured texture; report the spatially
    averaged m_z amplitude at the configured harmonic of the pump."""
    if len(sc.drive.tones) != 1:
        raise ConfigurationError("the harmonic experiment needs a single-tone drive")
    tone = sc.drive.tones[0]
    n = sc.analysis.harmonic
    dt_max = stability_dt_max(sc.template(), sc.material_map(), sc.drive,
                              sc.integrator.demag_mode)
    plan = sc.run_plan(dt_max=dt_max)
    if n * tone.frequency >= 0.5 * plan.f_sample:
        raise ConfigurationError(
            f"harmonic {n} of {tone.frequency:.4g} Hz is beyond the plan's "
            f"Nyquist {0.5 * plan.f_sample:.4g} Hz; raise integrator.f_ceiling_hz"
        )
    cfg = plan.config(record_per_cell=sc.integrator.record_per_cell)

    rows: list[TextureRow] = []
    spectra: dict[str, SpectrumResult] = {}
    maps: dict[str, np.ndarray] = {}
    for spec in sc.texture_list():
        label = texture_label(spec)
        _progress(f"harmonics: {label}: relaxing")
        state, mat, metrics = prepare_texture_state(sc, spec)
        _progress(f"harmonics: {label}: running {plan.n_samples} samples")
        series, _ = run(state, mat, sc.drive, plan.duration, cfg,
                        demag_mode=sc.integrator.demag_mode, settle=plan.settle)
        spectrum = fft_spectrum(series, "z")
        amp = abs(harmonic_amplitude(spectrum, tone.frequency, n))
        map_amp = None
        if cfg.record_per_cell:
            maps[label], map_amp = spatial_mode_map(series, n * tone.frequency)
        rows.append(TextureRow(label=label, metrics=metrics, amplitude=amp,
                               map_amplitude=map_amp))
        spectra[label] = spectrum
    return HarmonicExperimentResult(harmonic=n, f_pump=tone.frequency,
                                    rows=rows, spectra=spectra, mode_maps=maps)


def _lorentzian_array(detuning: np.ndarray, fwhm: float) -> np.ndarray:
    hw = 0.5 * fwhm
    return hw * hw / (detuning * detuning + hw * hw)


def _harmonic_line_amplitudes(sc: Scenario) -> np.ndarray:
    """Drive amplitude assigned to harmonics 1..max_harmonic in analytic
    maps: geometric decay of the RF amplitude with harmonic order."""
    b_rf = max((t.amplitude for t in sc.drive.tones), default=8e-4)
    orders = np.arange(1, sc.nv.max_harmonic + 1)
    return b_rf * sc.nv.harmonic_decay ** (orders - 1)


def run_odmr_map(sc: Scenario, mode: str | None = None,
                 threads: int | None = None) -> SweepResult:
    """PL over (bias magnitude, pump frequency).

    Analytic mode places a converted line at every harmonic n*f_pump with a
    geometrically decaying amplitude and evaluates the readout lineshape
    against the ESR branches of all defect axes.  Full-sim mode runs the
    micromagnetic pipeline per cell (budget-guarded) and takes the line
    amplitudes from the simulated spectrum instead.
    """
    mode = mode or sc.mode
    threads = sc.threads if threads is None else threads
    bias_vals = sc.sweep.bias_t.values()
    f_vals = sc.sweep.f_pump_hz.values()
    axis = np.asarray(sc.sweep.bias_axis)
    nvm = sc.nv_model()

    if mode == "analytic":
        amps = _harmonic_line_amplitudes(sc)
        s = (amps / nvm.b_sat_t) ** 2
        sat = (s / (1.0 + s))[:, None, None]
        orders = np.arange(1, sc.nv.max_harmonic + 1)[:, None]

        def row(i: int) -> np.ndarray:
            pairs = esr_all_axes(nvm, axis * bias_vals[i])
            esr = np.array([f for p in pairs for f in p.frequencies])
            lines = orders * f_vals[None, :]
            detun = lines[:, :, None] - esr[None, None, :]
            dips = nvm.contrast_max * (sat * _lorentzian_array(detun, nvm.linewidth_hz))
            return np.clip(1.0 - dips.sum(axis=(0, 2)), 0.0, None)

        _progress(f"odmr-map analytic: {len(bias_vals)}x{len(f_vals)} cells")
        values = np.stack(map_indexed(row, len(bias_vals), threads))
        return SweepResult(("bias_t", "f_pump_hz"), bias_vals, f_vals, values)

    if mode != "full-sim":
        raise ConfigurationError(f"unknown mode {mode!r}; expected analytic or full-sim")

    n_cells = len(bias_vals) * len(f_vals)
    if n_cells > sc.full_sim_budget:
        raise ConfigurationError(
            f"full-sim map of {len(bias_vals)}x{len(f_vals)} = {n_cells} cells "
            f"exceeds the budget of {sc.full_sim_budget}; shrink the sweep or "
            f"raise full_sim_budget"
        )

    def cell(k: int) -> float:
        i, j = divmod(k, len(f_vals))
        _progress(f"odmr-map full-sim: cell {k + 1}/{n_cells}")
        bias_vec = tuple(axis * bias_vals[i])
        f_pump = float(round(f_vals[j]))
        spectrum = _simulate_spectrum(sc, bias_vec, (f_pump,))
        pairs = esr_all_axes(nvm, np.asarray(bias_vec))
        return _pl_from_spectrum(sc, nvm, spectrum, pairs,
                                 [n * f_pump for n in range(1, sc.nv.max_harmonic + 1)])

    flat = map_indexed(cell, n_cells, threads)
    values = np.array(flat).reshape(len(bias_vals), len(f_vals))
    return SweepResult(("bias_t", "f_pump_hz"), bias_vals, f_vals, values)


def _simulate_spectrum(sc: Scenario, bias_vec: tuple[float, float, float],
                       freqs: Sequence[float]) -> SpectrumResult:
    """Prepare the scenario texture (zero-field relax) and drive it under
    ``bias_vec`` with tones at ``freqs`` (amplitudes/axes from the scenario
    drive, cycled)."""
    base = sc.drive.tones or (Tone(amplitude=8e-4, frequency=287e6),)
    tones = tuple(
        Tone(amplitude=base[i % len(base)].amplitude, frequency=f,
             phase=base[i % len(base)].phase, axis=base[i % len(base)].axis)
        for i, f in enumerate(freqs)
    )
    drive = DriveSpec(bias=bias_vec, tones=tones)
    state, mat, _ = prepare_texture_state(sc, sc.texture)
    esr_top = sc.nv.zfs_hz + sc.nv.gamma_hz_per_t * float(np.linalg.norm(bias_vec))
    ceiling = sc.integrator.f_ceiling_hz
    if ceiling is None:
        ceiling = 1.05 * max([esr_top, *freqs])
    plan = plan_coherent_run([t.frequency for t in tones],
                             n_periods=sc.integrator.n_periods,
                             f_ceiling=ceiling,
                             sample_every=sc.integrator.sample_every,
                             settle_periods=sc.integrator.settle_periods,
                             dt_max=stability_dt_max(state, mat, drive,
                                                     sc.integrator.demag_mode))
    series, _ = run(state, mat, drive, plan.duration, plan.config(),
                    demag_mode=sc.integrator.demag_mode, settle=plan.settle)
    return fft_spectrum(series, "z")


def _pl_from_spectrum(sc: Scenario, nvm, spectrum: SpectrumResult,
                      pairs: Sequence[ESRPair], line_freqs: Sequence[float]) -> float:
    """PL at one sweep cell from a simulated spectrum: each candidate line
    frequency reads its nearest coherent bin, scaled by the stray-field
    coupling, and dips against every ESR branch."""
    esr = [f for p in pairs for f in p.frequencies]
    nyq = spectrum.f_nyquist
    dip = 0.0
    for f_line in line_freqs:
        if f_line <= 0 or f_line >= nyq:
            continue
        k = int(round(f_line / spectrum.df))
        stray = sc.nv.kappa_t * abs(spectrum.bins[k])
        s = (stray / nvm.b_sat_t) ** 2
        sat = s / (1.0 + s)
        for fe in esr:
            dip += nvm.contrast_max * sat * _lorentzian_array(
                np.array(f_line - fe), nvm.linewidth_hz)
    return float(max(1.0 - dip, 0.0))


def _normalized_pairs(max_order: int):
    """(a, b) with |a|+|b| <= max_order, leading coefficient positive."""
    for a in range(0, max_order + 1):
        for b in range(-(max_order - a), max_order - a + 1):
            if a == 0 and b <= 0:
                continue
            yield a, b


def run_two_tone_map(sc: Scenario, mode: str | None = None,
                     threads: int | None = None) -> SweepResult:
    """Mark (f1, f2) cells where some integer combination |a*f1 + b*f2| of
    order <= planner.max_order lands within half a linewidth of an ESR
    branch (analytic), or where the simulated spectrum dips (full-sim)."""
    mode = mode or sc.mode
    threads = sc.threads if threads is None else threads
    f1_vals = sc.sweep.f1_hz.values()
    f2_vals = sc.sweep.f2_hz.values()
    nvm = sc.nv_model()
    pairs = esr_all_axes(nvm, np.asarray(sc.drive.bias))
    esr = [f for p in pairs for f in p.frequencies]
    tol = 0.5 * nvm.linewidth_hz

    if mode == "analytic":
        _progress(f"two-tone-map analytic: {len(f1_vals)}x{len(f2_vals)} cells")
        f1g = f1_vals[:, None]
        f2g = f2_vals[None, :]
        marked = np.zeros((len(f1_vals), len(f2_vals)), dtype=bool)
        for a, b in _normalized_pairs(sc.planner.max_order):
            lhs = a * f1g + b * f2g
            for fe in esr:
                marked |= np.abs(lhs - fe) <= tol
                marked |= np.abs(lhs + fe) <= tol
        return SweepResult(("f1_hz", "f2_hz"), f1_vals, f2_vals,
                           marked.astype(float))

    if mode != "full-sim":
        raise ConfigurationError(f"unknown mode {mode!r}; expected analytic or full-sim")

    n_cells = len(f1_vals) * len(f2_vals)
    if n_cells > sc.full_sim_budget:
        raise ConfigurationError(
            f"full-sim map of {len(f1_vals)}x{len(f2_vals)} = {n_cells} cells "
            f"exceeds the budget of {sc.full_sim_budget}; shrink the sweep or "
            f"raise full_sim_budget"
        )

    def cell(k: int) -> float:
        i, j = divmod(k, len(f2_vals))
        _progress(f"two-tone-map full-sim: cell {k + 1}/{n_cells}")
        f1 = float(round(f1_vals[i]))
        f2 = float(round(f2_vals[j]))
        spectrum = _simulate_spectrum(sc, sc.drive.bias, (f1, f2))
        return _pl_from_spectrum(sc, nvm, spectrum, pairs, esr)

    flat = map_indexed(cell, n_cells, threads)
    values = np.array(flat).reshape(len(f1_vals), len(f2_vals))
    return SweepResult(("f1_hz", "f2_hz"), f1_vals, f2_vals, values)


def run_sensing_plan(sc: Scenario, f2_target: float,
                     verify: bool = False) -> SensingReport:
    """Protocols and expected pump-sweep fingerprint for a target frequency,
    optionally verified by a two-tone simulation of the leading plan."""
    if f2_target <= 0:
        raise ContractViolationError("f2_target must be > 0")
    nvm = sc.nv_model()
    pairs = esr_all_axes(nvm, np.asarray(sc.drive.bias))
    solutions = fingerprint(f2_target, pairs, max_order=sc.planner.max_order,
                            f1_band=sc.planner.f1_band_hz)
    # plans that couple to the target lead; pump-only harmonic peaks (b = 0)
    # are fingerprint context and go last
    solutions.sort(key=lambda s: (s.b == 0, s.order, s.f1, s.a, s.b))
    warning = None
    if not solutions:
        warning = (f"no conversion protocol of order <= {sc.planner.max_order} "
                   f"reaches an ESR branch from f2 = {f2_target:.6g} Hz "
                   f"within the pump band")
    verification = None
    if verify and solutions:
        lead = next((s for s in solutions if s.a != 0 and s.b != 0), None)
        if lead is not None:
            f1 = float(round(lead.f1))
            f2 = float(round(f2_target))
            _progress(f"sensing-plan: verifying (a={lead.a}, b={lead.b}) "
                      f"with f1 = {f1:.6g} Hz")
            spectrum = _simulate_spectrum(sc, sc.drive.bias, (f1, f2))
            k = int(round(lead.esr / spectrum.df))
            f_bin = k * spectrum.df
            amp_t = sc.nv.kappa_t * abs(spectrum.bins[k])
            threshold = sc.nv.threshold_t
            if threshold is None:
                threshold = 0.5 * amp_t
            verification = {
                "a": lead.a, "b": lead.b, "f1_hz": f1, "f2_hz": f2,
                "esr_hz": lead.esr, "bin_hz": f_bin,
                "stray_amplitude_t": amp_t, "threshold_t": threshold,
                "detected": bool(amp_t > threshold),
            }
    return SensingReport(f2=f2_target, solutions=solutions, warning=warning,
                         verification=verification)


def export(result, path: str, fmt: str = "csv") -> None:
    """Write a result in its owning module's schema.

    ``csv``: SweepResult, SpectrumResult, HarmonicExperimentResult or a
    protocol list.  ``snapshot``: a SpinField in the text snapshot format.
    """
    if fmt == "snapshot":
        if not isinstance(result, SpinField):
            raise ConfigurationError("snapshot format applies to magnetization states")
        fileio.save_snapshot(result, path)
        return
    if fmt != "csv":
        raise ConfigurationError(f"unknown export format {fmt!r}; expected csv or snapshot")
    if isinstance(result, SweepResult):
        result.to_csv(path)
    elif isinstance(result, SpectrumResult):
        fileio.write_spectrum_csv(result, path)
    elif isinstance(result, HarmonicExperimentResult):
        result.to_csv(path)
    elif isinstance(result, (list, tuple)) and all(
            isinstance(x, ProtocolSolution) for x in result):
        fileio.write_protocols_csv(list(result), path)
    else:
        raise ConfigurationError(f"no csv schema for {type(result).__name__}")
