"""Integrator behaviour: torque law, RK4 order, norm preservation, relax, run."""

import math

import numpy as np
import pytest

from magnonmix.core import (
    GAMMA_LL,
    MU0,
    DriveSpec,
    MaterialMap,
    SpinField,
    Tone,
    effective_field,
    kittel_frequency,
    total_energy,
)
from magnonmix.errors import (
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DivergenceError,
)
from magnonmix.llg import (
    IntegratorConfig,
    TimeSeries,
    _check_finite,
    check_timestep,
    llg_rhs,
    plan_coherent_run,
    relax,
    run,
    stability_dt_max,
    step,
)
from magnonmix.spectral import dominant_frequency

from oracles import damped_precession


def single_spin(direction=(1, 0, 0)):
    """Smallest legal grid; with uniform fields it behaves as one macrospin."""
    s = SpinField.uniform(2, 2, direction=direction)
    mat = MaterialMap.uniform(2, 2, Aex=0.0, Ku=0.0)
    return s, mat


class TestRhs:
    def test_parallel_gives_zero(self):
        s, mat = single_spin((0, 0, 1))
        h = np.zeros((2, 2, 3))
        h[:, :, 2] = 1e4
        assert np.abs(llg_rhs(s, h, mat)).max() == 0.0

    def test_pure_precession_direction(self):
        # m = x, B = B z, alpha = 0 -> dm/dt = +gamma*B*y
        s, mat = single_spin((1, 0, 0))
        b = 2e-3
        h = np.zeros((2, 2, 3))
        h[:, :, 2] = b / MU0
        rhs = llg_rhs(s, h, mat, alpha=0.0)
        np.testing.assert_allclose(rhs[:, :, 1], GAMMA_LL * b, rtol=1e-12)
        assert np.abs(rhs[:, :, 0]).max() == 0.0
        assert np.abs(rhs[:, :, 2]).max() == 0.0

    def test_damped_magnitude_perpendicular(self):
        # |dm/dt| = gamma*B*sqrt(1+a^2)/(1+a^2) for m perpendicular to B
        s, mat = single_spin((1, 0, 0))
        b = 1e-3
        h = np.zeros((2, 2, 3))
        h[:, :, 2] = b / MU0
        for a in (0.1, 0.5, 1.0):
            rhs = llg_rhs(s, h, mat, alpha=a)
            expected = GAMMA_LL * b * math.sqrt(1 + a * a) / (1 + a * a)
            np.testing.assert_allclose(np.linalg.norm(rhs, axis=2), expected,
                                       rtol=1e-12)

    def test_shape_mismatch(self):
        s, mat = single_spin()
        with pytest.raises(ContractViolationError):
            llg_rhs(s, np.zeros((3, 2, 3)), mat)


class TestStep:
    def test_zero_field_leaves_state(self):
        s, mat = single_spin((0.6, 0.0, 0.8))
        out = step(s, mat, DriveSpec(), 0.0, IntegratorConfig(dt=1e-12),
                   demag_mode="none")
        np.testing.assert_allclose(out.m, s.m, atol=1e-15)

    def test_norm_preserved_over_many_steps(self):
        s = SpinField.uniform(4, 4, direction=(1, 0, 0))
        mat = MaterialMap.uniform(4, 4)
        drive = DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(8e-4, 287e6),))
        cfg = IntegratorConfig(dt=1e-12)
        cur = s
        for k in range(200):
            cur = step(cur, mat, drive, k * cfg.dt, cfg)
        assert np.abs(np.linalg.norm(cur.m, axis=2) - 1.0).max() <= 1e-9

    def test_divergence_error_names_cell(self):
        m = np.ones((2, 3, 3))
        m[1, 2] = np.nan
        with pytest.raises(DivergenceError) as err:
            _check_finite(np.ascontiguousarray(m.transpose(2, 0, 1)), 1.5e-9)
        assert err.value.cell == (1, 2)
        assert "1.5" in str(err.value)

    def test_divergent_drive_raises(self):
        s, mat = single_spin()
        drive = DriveSpec(bias=(float("inf"), 0, 0))
        with pytest.raises(DivergenceError):
            step(s, mat, drive, 0.0, IntegratorConfig(dt=1e-12), demag_mode="none")


class TestPrecessionAccuracy:
    def test_larmor_frequency(self):
        # alpha = 0, B = 1 mT: phase advances at gamma*B
        s, mat = single_spin((1, 0, 0))
        b = 1e-3
        drive = DriveSpec(bias=(0, 0, b))
        f_l = GAMMA_LL * b / (2 * math.pi)
        dt = 1.0 / (200.0 * f_l)
        n = round(10 / (f_l * dt))
        ts, _ = run(s, mat, drive, n * dt, IntegratorConfig(dt=dt),
                    demag_mode="none", alpha=0.0)
        phase = np.unwrap(np.arctan2(ts.samples[:, 1], ts.samples[:, 0]))
        advance = phase[-1] - phase[0]
        expected = GAMMA_LL * b * (ts.times[-1] - ts.times[0])
        assert advance == pytest.approx(expected, rel=1e-6)

    def test_alignment_conserved_without_damping(self):
        # m.B_hat drift stays below 1e-8 over 1e4 steps
        theta = math.radians(40)
        s, mat = single_spin((math.sin(theta), 0.0, math.cos(theta)))
        drive = DriveSpec(bias=(0, 0, 1e-3))
        dt = 1.0 / (1000.0 * GAMMA_LL * 1e-3 / (2 * math.pi))
        ts, final = run(s, mat, drive, 10_000 * dt,
                        IntegratorConfig(dt=dt, sample_every=100),
                        demag_mode="none", alpha=0.0)
        assert abs(final.m[0, 0, 2] - math.cos(theta)) < 1e-8
        assert np.abs(ts.samples[:, 2] - math.cos(theta)).max() < 1e-8

    def test_damped_approach_is_monotone(self):
        s, mat = single_spin((1, 0, 0))
        drive = DriveSpec(bias=(0, 0, 1e-3))
        cfg = IntegratorConfig(dt=2e-11)
        cur = s
        proj = []
        for k in range(2600):
            cur = step(cur, mat, drive, k * cfg.dt, cfg, demag_mode="none",
                       alpha=0.5)
            proj.append(cur.m[0, 0, 2])
        proj = np.array(proj)
        assert np.all(np.diff(proj) > -1e-12)
        assert proj[-1] > 0.99

    def test_rk4_order_static_field(self):
        # halving dt cuts the error by ~16 against the closed-form solution
        theta0 = math.radians(60)
        b = 5e-2
        alpha = 0.1
        t_end = 2e-10

        def final_m(dt):
            s, mat = single_spin((math.sin(theta0), 0.0, math.cos(theta0)))
            cfg = IntegratorConfig(dt=dt)
            cur = s
            for k in range(round(t_end / dt)):
                cur = step(cur, mat, DriveSpec(bias=(0, 0, b)), k * dt, cfg,
                           demag_mode="none", alpha=alpha)
            return cur.m[0, 0]

        exact = damped_precession(theta0, 0.0, b, GAMMA_LL, alpha, t_end)
        e1 = np.linalg.norm(final_m(2e-12) - exact)
        e2 = np.linalg.norm(final_m(1e-12) - exact)
        assert 16 * 0.7 < e1 / e2 < 16 * 1.3

    def test_rk4_order_time_dependent_drive(self):
        # Richardson ratio with an RF tone: wrong stage times would break it
        b = 5e-3
        f = 2e9
        drive = DriveSpec(bias=(0, 0, b), tones=(Tone(1e-3, f, 0.3, (1, 0, 0)),))

        def final_m(dt):
            s, mat = single_spin((1, 0, 0))
            cfg = IntegratorConfig(dt=dt)
            cur = s
            for k in range(round(4e-10 / dt)):
                cur = step(cur, mat, drive, k * dt, cfg, demag_mode="none",
                           alpha=0.2)
            return cur.m[0, 0]

        d1 = np.linalg.norm(final_m(4e-12) - final_m(2e-12))
        d2 = np.linalg.norm(final_m(2e-12) - final_m(1e-12))
        assert 16 * 0.7 < d1 / d2 < 16 * 1.3


class TestRelax:
    def test_already_converged_returns_input(self):
        s, mat0 = single_spin((1, 0, 0))
        mat = MaterialMap.uniform(2, 2, Ku=0.0)
        out = relax(s, mat, DriveSpec(bias=(1e-3, 0, 0)), demag_mode="none")
        np.testing.assert_array_equal(out.m, s.m)

    def test_tilted_spin_aligns_with_bias(self):
        th = math.radians(10)
        s = SpinField.uniform(2, 2, direction=(math.cos(th), math.sin(th), 0))
        mat = MaterialMap.uniform(2, 2, Ku=0.0)
        out = relax(s, mat, DriveSpec(bias=(1e-3, 0, 0)), tol=1e-8,
                    demag_mode="none")
        angle = math.degrees(math.acos(min(1.0, out.m[0, 0, 0])))
        assert angle < 0.1

    @pytest.mark.parametrize("seed", [0, 1])
    def test_energy_never_above_input(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(6, 4, 3))
        m /= np.linalg.norm(m, axis=2)[:, :, None]
        s = SpinField(6, 4, 5e-9, 5e-9, 15e-9, m)
        mat = MaterialMap.uniform(6, 4)
        drive = DriveSpec(bias=(1e-3, 0, 0))
        out = relax(s, mat, drive, tol=1e-5)
        assert total_energy(out, mat, drive) <= total_energy(s, mat, drive)

    def test_rejects_rf_drive(self):
        s, mat0 = single_spin()
        mat = MaterialMap.uniform(2, 2)
        with pytest.raises(ContractViolationError):
            relax(s, mat, DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(1e-4, 1e8),)))

    def test_iteration_cap_raises(self):
        th = math.radians(30)
        s = SpinField.uniform(2, 2, direction=(math.cos(th), math.sin(th), 0))
        mat = MaterialMap.uniform(2, 2, Ku=0.0)
        with pytest.raises(ConvergenceError) as err:
            relax(s, mat, DriveSpec(bias=(1e-3, 0, 0)), tol=1e-12, max_steps=3,
                  demag_mode="none")
        assert err.value.torque > 0


class TestRun:
    def test_zero_amplitude_tone_constant_series(self):
        s, _ = single_spin((1, 0, 0))
        mat = MaterialMap.uniform(2, 2, Aex=0.0, Ku=0.0)
        f = 1e8
        drive = DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(0.0, f),))
        dt = 1e-11
        n = round(2 / f / dt)
        ts, _ = run(s, mat, drive, n * dt, IntegratorConfig(dt=dt),
                    demag_mode="none")
        assert np.abs(ts.samples - ts.samples[0]).max() <= 1e-12

    def test_resonant_tone_grows_oscillation(self):
        # alpha = 0, transverse tone at the Larmor frequency pumps the spin
        s, mat = single_spin((0, 0, 1))
        b = 2e-3
        f_l = GAMMA_LL * b / (2 * math.pi)
        f = round(f_l)
        drive = DriveSpec(bias=(0, 0, b), tones=(Tone(2e-5, f, 0.0, (1, 0, 0)),))
        plan = plan_coherent_run([f], n_periods=40, f_ceiling=3 * f,
                                 sample_every=20)
        ts, _ = run(s, mat, drive, plan.duration, plan.config(),
                    demag_mode="none", alpha=0.0)
        tilt = np.hypot(ts.samples[:, 0], ts.samples[:, 1])
        third = len(tilt) // 3
        assert tilt[:third].max() < tilt[third:2 * third].max() < tilt[2 * third:].max()

    def test_incommensurate_duration_rejected(self):
        s, mat = single_spin()
        drive = DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(1e-4, 1e8),))
        dt = 1e-11
        with pytest.raises(ConfigurationError):
            run(s, mat, drive, 1.5e-8 + 3e-9, IntegratorConfig(dt=dt),
                demag_mode="none")

    def test_sample_every_must_divide_steps(self):
        s, mat = single_spin()
        drive = DriveSpec(bias=(1e-3, 0, 0))
        with pytest.raises(ConfigurationError):
            run(s, mat, drive, 10e-11, IntegratorConfig(dt=1e-11, sample_every=3),
                demag_mode="none")

    def test_per_cell_recording_shape(self):
        s = SpinField.uniform(4, 3)
        mat = MaterialMap.uniform(4, 3, Aex=0.0, Ku=0.0)
        drive = DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(1e-4, 1e9),))
        plan = plan_coherent_run([int(1e9)], n_periods=2, f_ceiling=2e9,
                                 sample_every=10)
        ts, _ = run(s, mat, drive, plan.duration,
                    plan.config(record_per_cell=True), demag_mode="none")
        assert ts.mz_cells.shape == (ts.n_samples, 4, 3)

    def test_timestep_resolution_guard(self):
        s, mat = single_spin()
        drive = DriveSpec(bias=(1e-3, 0, 0), tones=(Tone(1e-4, 1e9),))
        with pytest.raises(ConfigurationError):
            check_timestep(1e-10, s, mat, drive, "none")

    def test_timestep_stability_guard(self):
        s = SpinField.uniform(8, 8)  # 5 nm cells, default exchange
        mat = MaterialMap.uniform(8, 8)
        drive = DriveSpec(bias=(1e-3, 0, 0))
        dt_max = stability_dt_max(s, mat, drive)
        assert dt_max < 2e-12
        with pytest.raises(ConfigurationError):
            check_timestep(2.0 * dt_max, s, mat, drive)


class TestKittel:
    @pytest.mark.slow
    def test_uniform_film_ringdown_matches_kittel(self):
        b = 5e-3
        th = math.radians(2)
        s = SpinField.uniform(64, 16, direction=(math.cos(th), math.sin(th), 0))
        mat = MaterialMap.uniform(64, 16, Ku=0.0)
        drive = DriveSpec(bias=(b, 0, 0))
        dt = 1.25e-12
        n = round(40e-9 / dt)
        ts, _ = run(s, mat, drive, n * dt, IntegratorConfig(dt=dt, sample_every=8),
                    alpha=0.002)
        f_peak = dominant_frequency(ts, "y", fmin=2e8)
        assert f_peak == pytest.approx(kittel_frequency(b, 1e6), rel=0.02)


class TestTimeSeries:
    def test_needs_two_samples(self):
        with pytest.raises(ContractViolationError):
            TimeSeries(dt_sample=1e-9, samples=np.zeros((1, 3)))

    def test_component_selector(self):
        ts = TimeSeries(dt_sample=1e-9, samples=np.arange(12.0).reshape(4, 3))
        np.testing.assert_array_equal(ts.component("y"), [1.0, 4.0, 7.0, 10.0])
        with pytest.raises(ContractViolationError):
            ts.component("w")


class TestPlanCoherentRun:
    def test_single_tone_defaults(self):
        plan = plan_coherent_run([287e6])
        # ceiling 30x pump, Nyquist margin 1.2 -> 72 samples per period
        assert plan.f_sample == 72 * 287e6
        assert plan.n_samples == 20 * 72
        assert plan.dt == pytest.approx(1.0 / (plan.f_sample * 50), rel=1e-12)
        assert plan.duration * 287e6 == pytest.approx(20, rel=1e-12)
        # harmonics land on bins
        for n in range(1, 31):
            pos = n * 287e6 / plan.df
            assert abs(pos - round(pos)) < 1e-6

    def test_two_tone_common_period(self):
        plan = plan_coherent_run([300e6, 200e6], n_periods=3, f_ceiling=1e9)
        assert plan.base_freq_hz == 100_000_000
        for f in (300e6, 200e6, 100e6, 500e6):
            periods = plan.duration * f
            assert abs(periods - round(periods)) < 1e-9

    def test_dt_max_bumps_sample_every(self):
        plan = plan_coherent_run([287e6], sample_every=10, dt_max=3.87e-12)
        assert plan.dt <= 3.87e-12
        assert plan.sample_every > 10

    def test_non_integer_tone_rejected(self):
        with pytest.raises(ConfigurationError):
            plan_coherent_run([287e6 + 0.5])
