"""Stripe texture construction and wall measurement."""

import math

import numpy as np
import pytest

from magnonmix.core import DriveSpec, MaterialMap, SpinField
from magnonmix.errors import ConfigurationError
from magnonmix.llg import relax
from magnonmix.textures import TextureSpec, build_texture, wall_metrics

from oracles import tanh_wall_profile


def sign_change_columns(m):
    """Columns i where the row-averaged m_x flips sign between i and i+1."""
    mx = m[:, :, 0].mean(axis=1)
    return [i for i in range(len(mx) - 1) if mx[i] * mx[i + 1] < 0]


class TestTextureSpec:
    def test_kind_fixes_wall_count(self):
        assert TextureSpec("uniform").wall_count == 0
        assert TextureSpec("one-step").wall_count == 1
        assert TextureSpec("two-step").wall_count == 2
        assert TextureSpec("multi-step", n_walls=7).wall_count == 7

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            TextureSpec("three-step")

    def test_unknown_stabilization(self):
        with pytest.raises(ConfigurationError):
            TextureSpec("one-step", stabilization="pinning")


class TestBuildTexture:
    def test_uniform_all_plus_x(self):
        s, _ = build_texture(TextureSpec("uniform"), SpinField.uniform(16, 8),
                             MaterialMap.uniform(16, 8))
        assert np.all(s.m[:, :, 0] == 1.0)

    def test_one_step_sign_change_at_mid_grid(self):
        tmpl = SpinField.uniform(256, 64)
        s, _ = build_texture(TextureSpec("one-step"), tmpl,
                             MaterialMap.uniform(256, 64))
        cols = sign_change_columns(s.m)
        assert cols == [127]

    def test_multi_step_equally_spaced(self):
        tmpl = SpinField.uniform(256, 64)
        s, _ = build_texture(TextureSpec("multi-step", n_walls=5), tmpl,
                             MaterialMap.uniform(256, 64))
        cols = sign_change_columns(s.m)
        assert len(cols) == 5
        gaps = np.diff(cols)
        assert gaps.max() - gaps.min() <= 1

    def test_unit_norm_everywhere(self):
        tmpl = SpinField.uniform(64, 8)
        s, _ = build_texture(TextureSpec("multi-step", n_walls=3), tmpl,
                             MaterialMap.uniform(64, 8))
        assert np.abs(np.linalg.norm(s.m, axis=2) - 1.0).max() < 1e-12

    def test_stripes_too_narrow(self):
        tmpl = SpinField.uniform(16, 8)
        with pytest.raises(ConfigurationError):
            build_texture(TextureSpec("multi-step", n_walls=5), tmpl,
                          MaterialMap.uniform(16, 8))

    def test_anisotropy_stripes_sets_easy_axis(self):
        tmpl = SpinField.uniform(32, 8)
        mat_in = MaterialMap.uniform(32, 8, easy_axis=(0, 0, 1))
        _, mat = build_texture(TextureSpec("one-step"), tmpl, mat_in)
        np.testing.assert_array_equal(mat.easy_axis[..., 0], 1.0)
        # input untouched
        np.testing.assert_array_equal(mat_in.easy_axis[..., 2], 1.0)

    def test_init_only_keeps_material(self):
        tmpl = SpinField.uniform(32, 8)
        mat_in = MaterialMap.uniform(32, 8, easy_axis=(0, 0, 1))
        _, mat = build_texture(TextureSpec("one-step", stabilization="init-only"),
                               tmpl, mat_in)
        np.testing.assert_array_equal(mat.easy_axis, mat_in.easy_axis)


class TestWallMetrics:
    def test_uniform_state(self):
        s = SpinField.uniform(32, 8)
        m = wall_metrics(s)
        assert (m.wall_count, m.total_length, m.mean_width) == (0, 0.0, 0.0)

    def test_straight_wall_length(self):
        # one straight wall across 64 rows of 5 nm cells: 320 nm
        m = tanh_wall_profile(64, 64, center_cells=32.0, width_cells=4.0)
        s = SpinField(64, 64, 5e-9, 5e-9, 15e-9, m)
        metrics = wall_metrics(s)
        assert metrics.wall_count == 1
        assert metrics.total_length == pytest.approx(64 * 5e-9, rel=1e-12)

    def test_tanh_width_recovered(self):
        # synthetic profile with width 20 nm on a 5 nm grid
        width_cells = 20e-9 / 5e-9
        m = tanh_wall_profile(64, 16, center_cells=32.0, width_cells=width_cells)
        s = SpinField(64, 16, 5e-9, 5e-9, 15e-9, m)
        metrics = wall_metrics(s)
        assert metrics.mean_width == pytest.approx(20e-9, rel=0.05)

    def test_two_walls_counted_separately(self):
        x = np.arange(96) + 0.5
        mx = np.tanh((x - 32.0) / 3.0) * np.tanh(-(x - 64.0) / 3.0)
        m = np.zeros((96, 8, 3))
        m[:, :, 0] = mx[:, None]
        m[:, :, 1] = np.sqrt(np.clip(1 - mx * mx, 0, 1))[:, None]
        s = SpinField(96, 8, 5e-9, 5e-9, 15e-9, m)
        assert wall_metrics(s).wall_count == 2

    def test_translation_invariance_of_length(self):
        tmpl = SpinField.uniform(96, 12)
        s, _ = build_texture(TextureSpec("two-step"), tmpl,
                             MaterialMap.uniform(96, 12))
        rolled = s.with_m(np.roll(s.m, 7, axis=0))
        a = wall_metrics(s)
        b = wall_metrics(rolled)
        assert a.total_length == pytest.approx(b.total_length, rel=1e-12)
        assert a.wall_count == b.wall_count

    def test_ripple_below_threshold_ignored(self):
        s = SpinField.uniform(32, 4)
        m = s.m.copy()
        m[10, :, 0] = 0.3   # dip that never crosses the detection band
        m[10, :, 1] = math.sqrt(1 - 0.09)
        assert wall_metrics(s.with_m(m), threshold=0.5).wall_count == 0


@pytest.mark.slow
class TestRelaxedWalls:
    def _relaxed(self, kind, n_walls, nx=96, ny=12, ku=5e3):
        tmpl = SpinField.uniform(nx, ny, dx=10e-9, dy=10e-9)
        mat0 = MaterialMap.uniform(nx, ny, Ku=ku)
        spec = (TextureSpec(kind) if kind != "multi-step"
                else TextureSpec(kind, n_walls=n_walls))
        s0, mat = build_texture(spec, tmpl, mat0)
        relaxed = relax(s0, mat, DriveSpec(), tol=1e-6)
        return s0, relaxed, mat

    def test_relax_preserves_wall_count(self):
        for kind, expected in (("one-step", 1), ("two-step", 2)):
            _, relaxed, _ = self._relaxed(kind, expected)
            assert wall_metrics(relaxed).wall_count == expected

    def test_multi_step_metastable(self):
        _, relaxed, _ = self._relaxed("multi-step", 4, nx=128)
        assert wall_metrics(relaxed).wall_count == 4

    def test_bloch_width_scaling(self):
        # quadrupling Ku halves the relaxed wall width (sqrt(A/Ku) law)
        _, r1, _ = self._relaxed("one-step", 1, ku=5e3)
        _, r4, _ = self._relaxed("one-step", 1, ku=2e4)
        w1 = wall_metrics(r1).mean_width
        w4 = wall_metrics(r4).mean_width
        assert w4 / w1 == pytest.approx(0.5, rel=0.15)
