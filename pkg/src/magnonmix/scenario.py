"""Scenario files: strict JSON configuration for simulations and sweeps.

Every value has a documented default; unknown keys are errors, and
validation reports all problems at once with their field paths (see
docs/scenario.md for the schema).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DriveSpec, MaterialMap, SpinField, Tone
from .errors import ScenarioError
from .llg import RunPlan, plan_coherent_run
from .nv import NVModel
from .textures import TEXTURE_KINDS, STABILIZATIONS, TextureSpec

MODES = ("analytic", "full-sim")


@dataclass
class GridConfig:
    nx: int = 256
    ny: int = 64
    dx: float = 5e-9
    dy: float = 5e-9
    thickness: float = 15e-9

    def template(self) -> SpinField:
        return SpinField.uniform(self.nx, self.ny, self.dx, self.dy, self.thickness)


@dataclass
class MaterialConfig:
    Ms: float = 1.0e6
    Aex: float = 1.5e-11
    Ku: float = 5.0e3
    easy_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    alpha: float = 0.02

    def material_map(self, nx: int, ny: int) -> MaterialMap:
        return MaterialMap.uniform(nx, ny, Ms=self.Ms, Aex=self.Aex, Ku=self.Ku,
                                   easy_axis=self.easy_axis, alpha=self.alpha)


@dataclass
class IntegratorSettings:
    n_periods: int = 20
    settle_periods: int = 10
    f_ceiling_hz: float | None = None
    sample_every: int = 50
    record_per_cell: bool = False
    relax_tolerance_t: float = 1e-6
    relax_max_steps: int = 1_000_000
    demag_mode: str = "thin-film-local"


@dataclass
class AnalysisConfig:
    harmonic: int = 10
    textures: list[TextureSpec] = field(default_factory=list)


@dataclass
class NVConfig:
    zfs_hz: float = 2.870e9
    gamma_hz_per_t: float = 2.8024e10
    linewidth_hz: float = 8.0e6
    contrast_max: float = 0.02
    b_sat_t: float = 1.0e-4
    kappa_t: float = 0.1
    threshold_t: float | None = None
    harmonic_decay: float = 0.7
    max_harmonic: int = 25

    def model(self) -> NVModel:
        return NVModel(zfs_hz=self.zfs_hz, gamma_hz_per_t=self.gamma_hz_per_t,
                       linewidth_hz=self.linewidth_hz, contrast_max=self.contrast_max,
                       b_sat_t=self.b_sat_t)


@dataclass
class PlannerConfig:
    max_order: int = 6
    f1_band_hz: tuple[float, float] = (1e8, 1.2e10)


@dataclass
class SweepAxis:
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class SweepConfig:
    bias_axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    bias_t: SweepAxis = field(default_factory=lambda: SweepAxis(0.0, 3e-3, 100))
    f_pump_hz: SweepAxis = field(default_factory=lambda: SweepAxis(1e8, 3e9, 200))
    f1_hz: SweepAxis = field(default_factory=lambda: SweepAxis(1e8, 6e9, 150))
    f2_hz: SweepAxis = field(default_factory=lambda: SweepAxis(1e8, 6e9, 150))


@dataclass
class Scenario:
    grid: GridConfig = field(default_factory=GridConfig)
    material: MaterialConfig = field(default_factory=MaterialConfig)
    texture: TextureSpec = field(default_factory=lambda: TextureSpec("uniform"))
    drive: DriveSpec = field(default_factory=lambda: DriveSpec(
        bias=(1e-3, 0.0, 0.0),
        tones=(Tone(amplitude=8e-4, frequency=287e6, phase=0.0, axis=(0.0, 1.0, 0.0)),),
    ))
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    nv: NVConfig = field(default_factory=NVConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    mode: str = "analytic"
    threads: int = 0
    output_dir: str = "out"
    full_sim_budget: int = 16

    def template(self) -> SpinField:
        return self.grid.template()

    def material_map(self) -> MaterialMap:
        return self.material.material_map(self.grid.nx, self.grid.ny)

    def nv_model(self) -> NVModel:
        return self.nv.model()

    def texture_list(self) -> list[TextureSpec]:
        return list(self.analysis.textures) if self.analysis.textures else [self.texture]

    def run_plan(self, dt_max: float | None = None) -> RunPlan:
        freqs = [t.frequency for t in self.drive.tones]
        return plan_coherent_run(freqs, n_periods=self.integrator.n_periods,
                                 f_ceiling=self.integrator.f_ceiling_hz,
                                 sample_every=self.integrator.sample_every,
                                 settle_periods=self.integrator.settle_periods,
                                 dt_max=dt_max)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


class _Reader:
    """Walks a parsed JSON document, collecting every violation with its path."""

    def __init__(self):
        self.problems: list[str] = []

    def error(self, path: str, msg: str) -> None:
        self.problems.append(f"{path}: {msg}")

    def obj(self, parent, path: str, key: str, known: set[str]) -> dict:
        sub = parent.get(key)
        if sub is None:
            return {}
        if not isinstance(sub, dict):
            self.error(f"{path}{key}", "must be an object")
            return {}
        for k in sub:
            if k not in known:
                self.error(f"{path}{key}.{k}", "unknown key")
        return sub

    def num(self, obj, path: str, key: str, default, *, gt=None, ge=None,
            le=None, lt=None, allow_none: bool = False):
        if key not in obj:
            return default
        val = obj[key]
        if val is None:
            if allow_none:
                return None
            self.error(_join(path, key), "must be a number")
            return default
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            self.error(_join(path, key), "must be a finite number")
            return default
        val = float(val)
        if gt is not None and not val > gt:
            self.error(_join(path, key), f"must be > {gt}")
            return default
        if ge is not None and not val >= ge:
            self.error(_join(path, key), f"must be >= {ge}")
            return default
        if le is not None and not val <= le:
            self.error(_join(path, key), f"must be <= {le}")
            return default
        if lt is not None and not val < lt:
            self.error(_join(path, key), f"must be < {lt}")
            return default
        return val

    def integer(self, obj, path: str, key: str, default, *, ge=None, le=None):
        if key not in obj:
            return default
        val = obj[key]
        if isinstance(val, bool) or not isinstance(val, int):
            self.error(_join(path, key), "must be an integer")
            return default
        if ge is not None and val < ge:
            self.error(_join(path, key), f"must be >= {ge}")
            return default
        if le is not None and val > le:
            self.error(_join(path, key), f"must be <= {le}")
            return default
        return val

    def boolean(self, obj, path: str, key: str, default):
        if key not in obj:
            return default
        val = obj[key]
        if not isinstance(val, bool):
            self.error(_join(path, key), "must be true or false")
            return default
        return val

    def choice(self, obj, path: str, key: str, default, choices):
        if key not in obj:
            return default
        val = obj[key]
        if val not in choices:
            self.error(_join(path, key), f"must be one of {list(choices)}")
            return default
        return val

    def text(self, obj, path: str, key: str, default):
        if key not in obj:
            return default
        val = obj[key]
        if not isinstance(val, str) or not val:
            self.error(_join(path, key), "must be a non-empty string")
            return default
        return val

    def vec3(self, obj, path: str, key: str, default, *, unit: bool = False):
        if key not in obj:
            return default
        val = obj[key]
        ok = (isinstance(val, list) and len(val) == 3
              and all(isinstance(c, (int, float)) and not isinstance(c, bool)
                      and math.isfinite(c) for c in val))
        if not ok:
            self.error(_join(path, key), "must be a list of 3 finite numbers")
            return default
        v = tuple(float(c) for c in val)
        norm = math.sqrt(sum(c * c for c in v))
        if unit and norm == 0.0:
            self.error(_join(path, key), "must be a non-zero vector")
            return default
        if unit:
            v = tuple(c / norm for c in v)
        return v


def _read_texture(r: _Reader, entry, path: str) -> TextureSpec:
    default = TextureSpec("uniform")
    if isinstance(entry, str):
        if entry not in TEXTURE_KINDS:
            r.error(path, f"must be one of {list(TEXTURE_KINDS)}")
            return default
        n_walls = 4 if entry == "multi-step" else (2 if entry == "two-step" else 1)
        return TextureSpec(entry, n_walls=n_walls)
    if not isinstance(entry, dict):
        r.error(path, "must be a texture kind string or object")
        return default
    known = {"kind", "n_walls", "stabilization", "ku_contrast"}
    for k in entry:
        if k not in known:
            r.error(f"{path}.{k}", "unknown key")
    kind = r.choice(entry, path, "kind", "uniform", TEXTURE_KINDS)
    n_walls = r.integer(entry, path, "n_walls", 4 if kind == "multi-step" else 1, ge=1)
    stab = r.choice(entry, path, "stabilization", "anisotropy-stripes", STABILIZATIONS)
    contrast = r.num(entry, path, "ku_contrast", 0.3, ge=0.0, lt=1.0)
    if kind == "one-step":
        n_walls = 1
    elif kind == "two-step":
        n_walls = 2
    try:
        return TextureSpec(kind, n_walls=n_walls, stabilization=stab,
                           ku_contrast=contrast)
    except ValueError as exc:
        r.error(path, str(exc))
        return default


def _read_axis(r: _Reader, parent, path: str, key: str, default: SweepAxis) -> SweepAxis:
    sub = r.obj(parent, f"{path}.", key, {"start", "stop", "steps"})
    if not sub:
        return default
    start = r.num(sub, f"{path}.{key}", "start", default.start)
    stop = r.num(sub, f"{path}.{key}", "stop", default.stop)
    steps = r.integer(sub, f"{path}.{key}", "steps", default.steps, ge=1)
    return SweepAxis(start, stop, steps)


_TOP_KEYS = {"grid", "material", "texture", "drive", "integrator", "analysis",
             "nv", "planner", "sweep", "mode", "threads", "output_dir",
             "full_sim_budget"}


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed scenario document and build the typed Scenario."""
    r = _Reader()
    if not isinstance(doc, dict):
        raise ScenarioError(["top level: must be a JSON object"])
    for k in doc:
        if k not in _TOP_KEYS:
            r.error(k, "unknown key")

    g = r.obj(doc, "", "grid", {"nx", "ny", "dx", "dy", "thickness"})
    grid = GridConfig(
        nx=r.integer(g, "grid", "nx", 256, ge=2),
        ny=r.integer(g, "grid", "ny", 64, ge=2),
        dx=r.num(g, "grid", "dx", 5e-9, gt=0.0),
        dy=r.num(g, "grid", "dy", 5e-9, gt=0.0),
        thickness=r.num(g, "grid", "thickness", 15e-9, gt=0.0),
    )

    mt = r.obj(doc, "", "material", {"Ms", "Aex", "Ku", "easy_axis", "alpha"})
    material = MaterialConfig(
        Ms=r.num(mt, "material", "Ms", 1.0e6, gt=0.0),
        Aex=r.num(mt, "material", "Aex", 1.5e-11, ge=0.0),
        Ku=r.num(mt, "material", "Ku", 5.0e3, ge=0.0),
        easy_axis=r.vec3(mt, "material", "easy_axis", (1.0, 0.0, 0.0), unit=True),
        alpha=r.num(mt, "material", "alpha", 0.02, gt=0.0, le=1.0),
    )

    texture = _read_texture(r, doc.get("texture", "uniform"), "texture")

    dv = r.obj(doc, "", "drive", {"bias_t", "tones"})
    bias = r.vec3(dv, "drive", "bias_t", (1e-3, 0.0, 0.0))
    tones: list[Tone] = []
    if "tones" in dv:
        raw_tones = dv["tones"]
        if not isinstance(raw_tones, list):
            r.error("drive.tones", "must be a list of tone objects")
            raw_tones = []
        for i, t in enumerate(raw_tones):
            tpath = f"drive.tones[{i}]"
            if not isinstance(t, dict):
                r.error(tpath, "must be an object")
                continue
            known = {"amplitude_t", "frequency_hz", "phase_rad", "axis"}
            for k in t:
                if k not in known:
                    r.error(f"{tpath}.{k}", "unknown key")
            amp = r.num(t, tpath, "amplitude_t", 8e-4, ge=0.0)
            freq = r.num(t, tpath, "frequency_hz", 287e6, gt=0.0)
            phase = r.num(t, tpath, "phase_rad", 0.0)
            axis = r.vec3(t, tpath, "axis", (0.0, 1.0, 0.0), unit=True)
            tones.append(Tone(amplitude=amp, frequency=freq, phase=phase, axis=axis))
    else:
        tones = [Tone(amplitude=8e-4, frequency=287e6, phase=0.0, axis=(0.0, 1.0, 0.0))]
    drive = DriveSpec(bias=bias, tones=tuple(tones))

    it = r.obj(doc, "", "integrator",
               {"n_periods", "settle_periods", "f_ceiling_hz", "sample_every",
                "record_per_cell", "relax_tolerance_t", "relax_max_steps",
                "demag_mode"})
    integrator = IntegratorSettings(
        n_periods=r.integer(it, "integrator", "n_periods", 20, ge=1),
        settle_periods=r.integer(it, "integrator", "settle_periods", 10, ge=0),
        f_ceiling_hz=r.num(it, "integrator", "f_ceiling_hz", None, gt=0.0, allow_none=True),
        sample_every=r.integer(it, "integrator", "sample_every", 50, ge=1),
        record_per_cell=r.boolean(it, "integrator", "record_per_cell", False),
        relax_tolerance_t=r.num(it, "integrator", "relax_tolerance_t", 1e-6, gt=0.0),
        relax_max_steps=r.integer(it, "integrator", "relax_max_steps", 1_000_000, ge=1),
        demag_mode=r.choice(it, "integrator", "demag_mode", "thin-film-local",
                            ("thin-film-local", "none")),
    )

    an = r.obj(doc, "", "analysis", {"harmonic", "textures"})
    textures: list[TextureSpec] = []
    if "textures" in an:
        raw = an["textures"]
        if not isinstance(raw, list):
            r.error("analysis.textures", "must be a list")
            raw = []
        for i, entry in enumerate(raw):
            textures.append(_read_texture(r, entry, f"analysis.textures[{i}]"))
    analysis = AnalysisConfig(
        harmonic=r.integer(an, "analysis", "harmonic", 10, ge=1),
        textures=textures,
    )

    nv = r.obj(doc, "", "nv",
               {"zfs_hz", "gamma_hz_per_t", "linewidth_hz", "contrast_max",
                "b_sat_t", "kappa_t", "threshold_t", "harmonic_decay",
                "max_harmonic"})
    nv_cfg = NVConfig(
        zfs_hz=r.num(nv, "nv", "zfs_hz", 2.870e9, gt=0.0),
        gamma_hz_per_t=r.num(nv, "nv", "gamma_hz_per_t", 2.8024e10, gt=0.0),
        linewidth_hz=r.num(nv, "nv", "linewidth_hz", 8.0e6, gt=0.0),
        contrast_max=r.num(nv, "nv", "contrast_max", 0.02, ge=0.0, lt=1.0),
        b_sat_t=r.num(nv, "nv", "b_sat_t", 1.0e-4, gt=0.0),
        kappa_t=r.num(nv, "nv", "kappa_t", 0.1, ge=0.0),
        threshold_t=r.num(nv, "nv", "threshold_t", None, ge=0.0, allow_none=True),
        harmonic_decay=r.num(nv, "nv", "harmonic_decay", 0.7, gt=0.0, le=1.0),
        max_harmonic=r.integer(nv, "nv", "max_harmonic", 25, ge=1),
    )

    pl = r.obj(doc, "", "planner", {"max_order", "f1_band_hz"})
    band = (1e8, 1.2e10)
    if "f1_band_hz" in pl:
        raw_band = pl["f1_band_hz"]
        ok = (isinstance(raw_band, list) and len(raw_band) == 2
              and all(isinstance(c, (int, float)) and not isinstance(c, bool)
                      for c in raw_band) and raw_band[0] < raw_band[1]
              and raw_band[0] > 0)
        if ok:
            band = (float(raw_band[0]), float(raw_band[1]))
        else:
            r.error("planner.f1_band_hz", "must be [lo, hi] with 0 < lo < hi")
    planner = PlannerConfig(
        max_order=r.integer(pl, "planner", "max_order", 6, ge=1, le=8),
        f1_band_hz=band,
    )

    sw = r.obj(doc, "", "sweep", {"bias_axis", "bias_t", "f_pump_hz", "f1_hz", "f2_hz"})
    dflt = SweepConfig()
    sweep = SweepConfig(
        bias_axis=r.vec3(sw, "sweep", "bias_axis", dflt.bias_axis, unit=True),
        bias_t=_read_axis(r, sw, "sweep", "bias_t", dflt.bias_t),
        f_pump_hz=_read_axis(r, sw, "sweep", "f_pump_hz", dflt.f_pump_hz),
        f1_hz=_read_axis(r, sw, "sweep", "f1_hz", dflt.f1_hz),
        f2_hz=_read_axis(r, sw, "sweep", "f2_hz", dflt.f2_hz),
    )

    mode = r.choice(doc, "", "mode", "analytic", MODES)
    threads = r.integer(doc, "", "threads", 0, ge=0)
    output_dir = r.text(doc, "", "output_dir", "out")
    budget = r.integer(doc, "", "full_sim_budget", 16, ge=1)

    if r.problems:
        raise ScenarioError(r.problems)
    return Scenario(grid=grid, material=material, texture=texture, drive=drive,
                    integrator=integrator, analysis=analysis, nv=nv_cfg,
                    planner=planner, sweep=sweep, mode=mode, threads=threads,
                    output_dir=output_dir, full_sim_budget=budget)


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError([f"{path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            [f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    return scenario_from_dict(doc)
