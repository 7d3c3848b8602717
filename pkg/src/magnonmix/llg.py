"""Fixed-step RK4 time integration of the Landau-Lifshitz-Gilbert equation.

The equation of motion per cell is

    dm/dt = -gamma/(1+alpha^2) * (m x B_eff + alpha * m x (m x B_eff))

with ``B_eff = mu0 * H_eff`` in tesla and gamma the electron gyromagnetic
ratio in rad/s/T.  Every step renormalizes the cell vectors, so unit norm is
preserved to machine precision for arbitrarily long runs.

The inner kernel works on a component-contiguous (3, nx, ny) layout with
preallocated stage buffers; stage states are not unit vectors, which is fine
because every field term is linear in m.  Fixed-step RK4 is only
conditionally stable: the stiffest mode is the zone-edge exchange wave, and
:func:`run` refuses time steps outside the stability region (see
:func:`stability_dt_max`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import core
from .core import GAMMA_LL, MU0, DriveSpec, MaterialMap, SpinField
from .errors import (
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DivergenceError,
)

#: margin inside the RK4 imaginary-axis stability bound (2*sqrt(2))
_STABILITY_SAFETY = 2.5


@dataclass
class IntegratorConfig:
    """Fixed-step integration settings.

    ``dt`` must resolve the fastest dynamics (:func:`run` enforces
    ``dt <= 1/(50*f_max)`` with f_max the larger of the highest drive
    frequency and the initial Larmor frequency on the grid) and stay inside
    the RK4 stability region of the stiffest field term.
    """

    dt: float
    sample_every: int = 1
    record_per_cell: bool = False
    method: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be > 0")
        if self.sample_every < 1 or int(self.sample_every) != self.sample_every:
            raise ConfigurationError("sample_every must be an integer >= 1")
        if self.method != "rk4":
            raise ConfigurationError("only the fixed-step rk4 method is supported")


@dataclass
class TimeSeries:
    """Uniformly sampled magnetization record.

    ``samples`` holds the spatial average of m, shape (n, 3).  When per-cell
    recording was enabled, ``mz_cells`` holds m_z per cell, shape
    (n, nx, ny).  ``t0`` is the absolute time of the first sample.
    """

    dt_sample: float
    samples: np.ndarray
    mz_cells: np.ndarray | None = None
    t0: float = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 3:
            raise ContractViolationError("samples must have shape (n, 3)")
        if self.samples.shape[0] < 2:
            raise ContractViolationError("a time series needs at least 2 samples")
        if self.dt_sample <= 0:
            raise ContractViolationError("dt_sample must be > 0")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt_sample

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) * self.dt_sample

    def component(self, name: str) -> np.ndarray:
        idx = {"x": 0, "y": 1, "z": 2}.get(name)
        if idx is None:
            raise ContractViolationError(f"component must be x, y or z, got {name!r}")
        return self.samples[:, idx]


def _damping_factor(alpha):
    a = np.asarray(alpha, dtype=float)
    if a.ndim == 2:
        a = a[:, :, None]
    return a


def llg_rhs(s: SpinField, h: np.ndarray, mat: MaterialMap,
            alpha=None) -> np.ndarray:
    """Per-cell dm/dt (1/s) for state ``s`` under effective field ``h`` (A/m).

    ``alpha`` overrides the material damping (scalar or per-cell array);
    0 is allowed here for undamped precession checks even though material
    maps require alpha > 0.
    """
    if h.shape != s.m.shape:
        raise ContractViolationError(
            f"field shape {h.shape} does not match state {s.m.shape}"
        )
    if mat.shape != (s.nx, s.ny):
        raise ContractViolationError("material grid does not match state")
    a = _damping_factor(mat.alpha if alpha is None else alpha)
    bt = MU0 * h
    mxb = np.cross(s.m, bt)
    mxmxb = np.cross(s.m, mxb)
    return -(GAMMA_LL / (1.0 + a * a)) * (mxb + a * mxmxb)


class _Kernel:
    """LLG right-hand side and RK4 stepping on (3, nx, ny) arrays with
    reusable buffers.  Kept numerically in lockstep with the public field
    operations in :mod:`core` (pinned by tests)."""

    def __init__(self, s: SpinField, mat: MaterialMap, drive: DriveSpec,
                 demag_mode: str, alpha):
        if mat.shape != (s.nx, s.ny):
            raise ContractViolationError("material grid does not match state")
        if demag_mode not in core.DEMAG_MODES:
            raise ConfigurationError(
                f"unknown demag mode {demag_mode!r}; expected one of {core.DEMAG_MODES}"
            )
        shape = (3, s.nx, s.ny)
        self.inv_dx2 = 1.0 / (s.dx * s.dx)
        self.inv_dy2 = 1.0 / (s.dy * s.dy)
        self.square_cells = s.dx == s.dy
        scale = self.inv_dx2 if self.square_cells else 1.0
        self.ex_factor = 2.0 * mat.Aex / (MU0 * mat.Ms) * scale
        self.ku_factor = 2.0 * mat.Ku / (MU0 * mat.Ms)
        self.u = np.ascontiguousarray(mat.easy_axis.transpose(2, 0, 1))
        self.Ms = mat.Ms
        self.local_demag = demag_mode == "thin-film-local"
        self.drive = drive
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0) or np.any(a > 1):
            raise ContractViolationError("alpha must lie in [0, 1]")
        self.alpha = a if a.ndim == 0 else np.ascontiguousarray(a)
        # both torque terms are linear in B = mu0*H, so mu0 folds in here
        self.pref = -GAMMA_LL * MU0 / (1.0 + self.alpha * self.alpha)
        self._h = np.empty(shape)
        self._g = np.empty(shape)
        self._dc = np.empty(shape)
        self._k = [np.empty(shape) for _ in range(4)]
        self._mt = np.empty(shape)
        self._t1 = np.empty((s.nx, s.ny))
        self._t2 = np.empty((s.nx, s.ny))

    def field_into(self, h: np.ndarray, m: np.ndarray, t: float) -> None:
        """Effective field in A/m for a raw (3, nx, ny) magnetization."""
        g = self._g
        # x-direction second difference with mirror edges
        np.subtract(m[:, 2:, :], m[:, 1:-1, :], out=h[:, 1:-1, :])
        h[:, 1:-1, :] += m[:, :-2, :]
        h[:, 1:-1, :] -= m[:, 1:-1, :]
        np.subtract(m[:, 1, :], m[:, 0, :], out=h[:, 0, :])
        np.subtract(m[:, -2, :], m[:, -1, :], out=h[:, -1, :])
        if not self.square_cells:
            h *= self.inv_dx2
        # y-direction
        np.subtract(m[:, :, 2:], m[:, :, 1:-1], out=g[:, :, 1:-1])
        g[:, :, 1:-1] += m[:, :, :-2]
        g[:, :, 1:-1] -= m[:, :, 1:-1]
        np.subtract(m[:, :, 1], m[:, :, 0], out=g[:, :, 0])
        np.subtract(m[:, :, -2], m[:, :, -1], out=g[:, :, -1])
        if not self.square_cells:
            g *= self.inv_dy2
        h += g
        h *= self.ex_factor
        # uniaxial anisotropy
        t1, t2 = self._t1, self._t2
        np.multiply(self.u[0], m[0], out=t1)
        np.multiply(self.u[1], m[1], out=t2)
        t1 += t2
        np.multiply(self.u[2], m[2], out=t2)
        t1 += t2
        t1 *= self.ku_factor
        for c in range(3):
            np.multiply(t1, self.u[c], out=t2)
            h[c] += t2
        # local thin-film demag
        if self.local_demag:
            np.multiply(self.Ms, m[2], out=t2)
            h[2] -= t2
        # uniform applied field
        b = self.drive.flux_at(t)
        h[0] += b[0] / MU0
        h[1] += b[1] / MU0
        h[2] += b[2] / MU0

    def _cross_into(self, out: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
        t = self._t1
        np.multiply(a[1], b[2], out=out[0])
        np.multiply(a[2], b[1], out=t)
        out[0] -= t
        np.multiply(a[2], b[0], out=out[1])
        np.multiply(a[0], b[2], out=t)
        out[1] -= t
        np.multiply(a[0], b[1], out=out[2])
        np.multiply(a[1], b[0], out=t)
        out[2] -= t

    def rhs_into(self, out: np.ndarray, m: np.ndarray, t: float) -> None:
        h = self._h
        self.field_into(h, m, t)
        self._cross_into(out, m, h)          # m x H
        self._cross_into(self._dc, m, out)   # m x (m x H)
        self._dc *= self.alpha
        out += self._dc
        out *= self.pref

    def rk4_into(self, out: np.ndarray, m: np.ndarray, t: float, dt: float) -> None:
        k1, k2, k3, k4 = self._k
        mt = self._mt
        self.rhs_into(k1, m, t)
        np.multiply(k1, 0.5 * dt, out=mt)
        mt += m
        self.rhs_into(k2, mt, t + 0.5 * dt)
        np.multiply(k2, 0.5 * dt, out=mt)
        mt += m
        self.rhs_into(k3, mt, t + 0.5 * dt)
        np.multiply(k3, dt, out=mt)
        mt += m
        self.rhs_into(k4, mt, t + dt)
        k2 += k3
        k2 *= 2.0
        k1 += k4
        k1 += k2
        k1 *= dt / 6.0
        np.add(m, k1, out=out)

    def renormalize(self, m: np.ndarray) -> None:
        t1, t2 = self._t1, self._t2
        np.multiply(m[0], m[0], out=t1)
        np.multiply(m[1], m[1], out=t2)
        t1 += t2
        np.multiply(m[2], m[2], out=t2)
        t1 += t2
        np.sqrt(t1, out=t1)
        m /= t1


def _to_internal(m: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(m.transpose(2, 0, 1))


def _to_public(m: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(m.transpose(1, 2, 0))


def _check_finite(m: np.ndarray, t: float) -> None:
    if np.isfinite(m).all():
        return
    bad = np.argwhere(~np.isfinite(m).all(axis=0))[0]
    raise DivergenceError((int(bad[0]), int(bad[1])), t)


def stability_dt_max(s: SpinField, mat: MaterialMap, drive: DriveSpec,
                     demag_mode: str = "thin-film-local") -> float:
    """Largest stable RK4 step for the stiffest linear mode of the grid.

    Bounds the fastest precession rate by the worst-case sum of the
    zone-edge exchange field, the local demag field, the anisotropy field
    and the applied field, with a safety margin inside the RK4 stability
    region |omega*dt| < 2*sqrt(2).
    """
    k2_edge = 4.0 / (s.dx * s.dx) + 4.0 / (s.dy * s.dy)
    b = 2.0 * mat.Aex / mat.Ms * k2_edge + 2.0 * mat.Ku / mat.Ms
    if demag_mode == "thin-film-local":
        b = b + MU0 * mat.Ms
    b_stiff = float(np.max(b))
    b_stiff += float(np.linalg.norm(drive.bias)) + sum(
        t.amplitude for t in drive.tones
    )
    return _STABILITY_SAFETY / (GAMMA_LL * b_stiff)


def check_timestep(dt: float, s: SpinField, mat: MaterialMap, drive: DriveSpec,
                   demag_mode: str = "thin-film-local") -> None:
    """Enforce the resolution rule dt <= 1/(50*f_max) and RK4 stability."""
    h0 = core.effective_field(s, mat, drive, 0.0, demag_mode)
    b_max = MU0 * float(np.max(np.linalg.norm(h0, axis=2)))
    f_larmor = GAMMA_LL * b_max / (2.0 * math.pi)
    f_max = max(drive.max_frequency(), f_larmor)
    if f_max > 0 and dt > 1.0 / (50.0 * f_max):
        raise ConfigurationError(
            f"dt = {dt:.3e} s does not resolve the fastest dynamics "
            f"(f_max = {f_max:.3e} Hz needs dt <= {1.0 / (50.0 * f_max):.3e} s)"
        )
    dt_stab = stability_dt_max(s, mat, drive, demag_mode)
    if dt > dt_stab:
        raise ConfigurationError(
            f"dt = {dt:.3e} s is outside the RK4 stability region of the "
            f"stiffest mode (need dt <= {dt_stab:.3e} s); raise sample_every "
            f"or the analysis ceiling"
        )


def step(s: SpinField, mat: MaterialMap, drive: DriveSpec, t: float,
         cfg: IntegratorConfig, demag_mode: str = "thin-film-local",
         alpha=None) -> SpinField:
    """One RK4 step from t to t + cfg.dt, renormalized.

    The time-dependent drive is evaluated at the RK4 stage times.  The dt
    invariants are the caller's responsibility here; :func:`run` validates
    them once per run.  ``alpha`` overrides the material damping.
    """
    kern = _Kernel(s, mat, drive, demag_mode, mat.alpha if alpha is None else alpha)
    m = _to_internal(s.m)
    out = np.empty_like(m)
    kern.rk4_into(out, m, t, cfg.dt)
    kern.renormalize(out)
    _check_finite(out, t + cfg.dt)
    return s.with_m(_to_public(out))


def relax(s: SpinField, mat: MaterialMap, drive: DriveSpec, tol: float = 1e-6,
          max_steps: int = 1_000_000, demag_mode: str = "thin-film-local",
          dt0: float | None = None) -> SpinField:
    """Drive the state to a local energy minimum under the static bias.

    Integrates with damping forced to alpha = 1 (precession retained) until
    the worst per-cell torque |m x B_eff| drops below ``tol`` (tesla).
    Steps are accepted only if the total energy does not increase; rejected
    steps halve dt, accepted ones grow it inside the stability bound.
    """
    if tol <= 0:
        raise ContractViolationError("tol must be > 0")
    if any(tone.amplitude > 0 for tone in drive.tones):
        raise ContractViolationError("relax expects a bias-only drive (no RF tones)")
    static = drive.bias_only()
    kern = _Kernel(s, mat, static, demag_mode, 1.0)

    def torque_of(m):
        kern.field_into(kern._h, m, 0.0)
        kern._h *= MU0
        kern._cross_into(kern._g, m, kern._h)
        return float(np.max(np.sqrt(np.sum(kern._g * kern._g, axis=0))))

    def energy_of(m):
        return core.total_energy(s.with_m(_to_public(m)), mat, static, 0.0, demag_mode)

    m = _to_internal(s.m)
    if torque_of(m) < tol:
        return s.copy()

    dt_cap = stability_dt_max(s, mat, static, demag_mode)
    dt = dt0 if dt0 is not None else 0.05 * dt_cap
    energy = energy_of(m)
    trial = np.empty_like(m)
    rejects = 0
    torque = math.inf
    for n in range(1, max_steps + 1):
        kern.rk4_into(trial, m, 0.0, dt)
        kern.renormalize(trial)
        _check_finite(trial, n * dt)
        e_trial = energy_of(trial)
        if e_trial <= energy:
            m, trial = trial, m
            energy = e_trial
            rejects = 0
            dt = min(dt * 1.2, dt_cap)
            torque = torque_of(m)
            if torque < tol:
                return s.with_m(_to_public(m))
        else:
            dt *= 0.5
            rejects += 1
            if rejects > 80:
                raise ConvergenceError(n, torque_of(m), tol)
    raise ConvergenceError(max_steps, torque_of(m), tol)


def run(s: SpinField, mat: MaterialMap, drive: DriveSpec, duration: float,
        cfg: IntegratorConfig, demag_mode: str = "thin-film-local",
        settle: float = 0.0, alpha=None) -> tuple[TimeSeries, SpinField]:
    """Integrate for ``duration`` seconds and record the sampled series.

    ``duration`` must be an integer number of steps, an integer number of
    samples, and an integer number of periods of every drive tone (coherent
    sampling; see :func:`plan_coherent_run`).  An optional unrecorded
    ``settle`` stretch runs first and does not need to be tone-commensurate.
    ``alpha`` overrides the material damping.  Returns the series and the
    final state.
    """
    check_timestep(cfg.dt, s, mat, drive, demag_mode)

    n_steps_f = duration / cfg.dt
    n_steps = int(round(n_steps_f))
    if n_steps < 1 or abs(n_steps_f - n_steps) > 1e-6:
        raise ConfigurationError(
            f"duration {duration:.6e} s is not an integer number of dt = {cfg.dt:.6e} s steps"
        )
    if n_steps % cfg.sample_every != 0:
        raise ConfigurationError(
            f"step count {n_steps} is not divisible by sample_every = {cfg.sample_every}"
        )
    n_samples = n_steps // cfg.sample_every
    if n_samples < 2:
        raise ConfigurationError("run would record fewer than 2 samples")
    for tone in drive.tones:
        periods = duration * tone.frequency
        if abs(periods - round(periods)) > 1e-6:
            raise ConfigurationError(
                f"duration {duration:.6e} s is not an integer number of periods "
                f"of the {tone.frequency:.6e} Hz tone ({periods:.9g} periods)"
            )
    n_settle = int(round(settle / cfg.dt)) if settle > 0 else 0
    if n_settle and abs(settle / cfg.dt - n_settle) > 1e-6:
        raise ConfigurationError("settle must be an integer number of dt steps")

    kern = _Kernel(s, mat, drive, demag_mode,
                   mat.alpha if alpha is None else alpha)
    m = _to_internal(s.m)
    out = np.empty_like(m)
    dt = cfg.dt
    for k in range(n_settle):
        kern.rk4_into(out, m, k * dt, dt)
        kern.renormalize(out)
        m, out = out, m
        _check_finite(m, (k + 1) * dt)

    averages = np.empty((n_samples, 3))
    mz = np.empty((n_samples, s.nx, s.ny)) if cfg.record_per_cell else None
    t0 = n_settle * dt
    for k in range(n_steps):
        if k % cfg.sample_every == 0:
            j = k // cfg.sample_every
            averages[j] = m.mean(axis=(1, 2))
            if mz is not None:
                mz[j] = m[2]
        t = t0 + k * dt
        kern.rk4_into(out, m, t, dt)
        kern.renormalize(out)
        m, out = out, m
        _check_finite(m, t + dt)

    series = TimeSeries(dt_sample=cfg.sample_every * dt, samples=averages,
                        mz_cells=mz, t0=t0)
    return series, s.with_m(_to_public(m))


@dataclass(frozen=True)
class RunPlan:
    """Coherent run geometry: every analyzed frequency lands on an FFT bin."""

    dt: float
    sample_every: int
    duration: float
    settle: float
    base_freq_hz: int
    f_sample: float
    n_samples: int

    @property
    def df(self) -> float:
        return 1.0 / self.duration

    def config(self, record_per_cell: bool = False) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, sample_every=self.sample_every,
                                record_per_cell=record_per_cell)


def plan_coherent_run(tone_freqs: Sequence[float], n_periods: int = 20,
                      f_ceiling: float | None = None, sample_every: int = 50,
                      settle_periods: int = 0,
                      dt_max: float | None = None) -> RunPlan:
    """Choose dt, sampling and duration so the record covers ``n_periods``
    of the tones' common period and the sample rate exceeds twice
    ``1.2 * f_ceiling`` while staying bin-aligned.

    Tone frequencies must be integer hertz so the common period is exact
    (any lab frequency rounds to the hertz without loss at these scales).
    ``f_ceiling`` defaults to 30x the highest tone.  When ``dt_max`` is
    given (usually :func:`stability_dt_max`), ``sample_every`` is raised
    until the internal step fits under it; the sample grid is unchanged, so
    coherence is preserved.
    """
    if not tone_freqs:
        raise ConfigurationError("coherent planning needs at least one tone")
    if n_periods < 1 or sample_every < 1:
        raise ConfigurationError("n_periods and sample_every must be >= 1")
    ints = []
    for f in tone_freqs:
        fi = int(round(f))
        if fi <= 0 or abs(f - fi) > 1e-3:
            raise ConfigurationError(
                f"tone frequency {f!r} Hz is not a positive integer hertz value"
            )
        ints.append(fi)
    g = math.gcd(*ints) if len(ints) > 1 else ints[0]
    f_pump = max(ints)
    if f_ceiling is None:
        f_ceiling = 30.0 * f_pump
    f_nyquist = 1.2 * f_ceiling
    mult = max(1, math.ceil(2.0 * f_nyquist / g))
    f_sample = float(g) * mult
    if dt_max is not None:
        if dt_max <= 0:
            raise ConfigurationError("dt_max must be > 0")
        sample_every = max(sample_every, math.ceil(1.0 / (f_sample * dt_max) - 1e-9))
    n_samples = n_periods * mult
    duration = n_samples / f_sample
    dt = 1.0 / (f_sample * sample_every)
    settle = settle_periods * mult / f_sample
    return RunPlan(dt=dt, sample_every=sample_every, duration=duration,
                   settle=settle, base_freq_hz=g, f_sample=f_sample,
                   n_samples=n_samples)
