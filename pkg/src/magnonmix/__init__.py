"""magnonmix: desk-scale micromagnetic magnon frequency-conversion toolkit.

Simulates a driven textured ferromagnetic film (LLG dynamics), extracts
harmonic and mixing spectra, models spin-1 defect-centre readout of the
converted field, and plans up-/down-conversion sensing protocols.
"""

from .core import (
    GAMMA_LL,
    MU0,
    DriveSpec,
    MaterialMap,
    SpinField,
    Tone,
    anisotropy_field,
    demag_field,
    effective_field,
    exchange_field,
    kittel_frequency,
    total_energy,
    zeeman_field,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DivergenceError,
    ScenarioError,
)
from .harness import (
    HarmonicExperimentResult,
    SensingReport,
    SweepResult,
    export,
    run_harmonic_experiment,
    run_odmr_map,
    run_sensing_plan,
    run_two_tone_map,
)
from .io import load_snapshot, save_snapshot
from .llg import (
    IntegratorConfig,
    RunPlan,
    TimeSeries,
    llg_rhs,
    plan_coherent_run,
    relax,
    run,
    step,
)
from .nv import (
    ESRPair,
    NVModel,
    conversion_efficiency,
    detectable,
    esr_all_axes,
    esr_frequencies,
    odmr_spectrum,
    rabi_frequency,
    simulate_rabi,
)
from .planner import (
    MixLine,
    ProtocolSolution,
    enumerate_protocols,
    fingerprint,
    plan_down_conversion,
    plan_up_conversion,
    theoretical_mixing_lines,
)
from .scenario import Scenario, load_scenario, scenario_from_dict
from .spectral import (
    ChiSet,
    MixingTerm,
    SpectrumResult,
    dominant_frequency,
    fft_spectrum,
    harmonic_amplitude,
    mixing_amplitude,
    polynomial_response,
    second_order_mixing_terms,
    spatial_mode_map,
    tone_complex_amplitude,
)
from .textures import TextureSpec, WallMetrics, build_texture, wall_metrics

__version__ = "0.1.0"
