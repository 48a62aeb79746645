"""rofsim: simulator of a photonic self-interference-cancellation link for
in-band full-duplex radio-over-fiber systems.

A central office up-converts an IF signal onto an optical carrier with a
dual-polarization SSB modulator, a remote unit re-modulates the received RF
onto the spare polarization rail, and balanced detection at the central
office subtracts an attenuated, delayed reference copy to cancel the
self-interference while preserving the uplink signal of interest.
"""

from ._kernels import USING_NUMBA
from .errors import (
    AliasError,
    AttenuatorInfeasible,
    AxisError,
    DegenerateScan,
    DelayRangeError,
    FilterSpecError,
    GainNotAllowed,
    GridError,
    LockError,
    RailConflict,
    RangeError,
    ResolutionError,
    RofsimError,
    ScenarioError,
    SimulationError,
    TapError,
    UnsupportedConstellation,
)
from .signal_core import (
    DEFAULT_GRID,
    QamSignalSpec,
    SampledWaveform,
    SpectrumEstimate,
    TimeGrid,
    ToneSpec,
    band_power,
    cancellation_depth,
    demodulate_evm,
    fractional_delay,
    filter_band,
    make_qam,
    make_tone,
    phase_shift,
    welch_psd,
)
from .optics import (
    FiberParams,
    JonesRotation,
    ModulatorParams,
    OpticalField,
    apply_jones,
    attenuate,
    balanced_detect,
    dd_mzm_ssb,
    delay_line,
    dp_bpsk_modulate,
    fiber_propagate,
    hybrid_coupler_90,
    laser_cw,
    mzm_dsb,
    pbc,
    pbs,
    photodetect,
    polarizer,
    ssb_smallsignal_coefficients,
)
from .link import (
    LinkMetrics,
    LinkResult,
    LinkScenario,
    SelfInterferencePath,
    SoiSpec,
    build_soi_waveform,
    downlink_taps,
    make_received_signal,
    run_downlink,
    run_full,
    run_uplink,
)
from .tuner import (
    PHASE_CONSTANT,
    SicSettings,
    TuneReport,
    analytic_alpha,
    analytic_tau2,
    auto_tune,
    refine,
    refine_alpha,
    seed_settings,
    verify_phase_constant,
)
from .scenario import (
    bundled_scenario_dir,
    bundled_scenarios,
    load_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "USING_NUMBA",
    "PHASE_CONSTANT",
    "DEFAULT_GRID",
    # errors
    "RofsimError",
    "GridError",
    "AliasError",
    "UnsupportedConstellation",
    "ResolutionError",
    "RangeError",
    "FilterSpecError",
    "LockError",
    "RailConflict",
    "GainNotAllowed",
    "DelayRangeError",
    "AttenuatorInfeasible",
    "SimulationError",
    "DegenerateScan",
    "ScenarioError",
    "AxisError",
    "TapError",
    # signal core
    "TimeGrid",
    "SampledWaveform",
    "ToneSpec",
    "QamSignalSpec",
    "SpectrumEstimate",
    "make_tone",
    "make_qam",
    "welch_psd",
    "band_power",
    "cancellation_depth",
    "filter_band",
    "demodulate_evm",
    "fractional_delay",
    "phase_shift",
    # optics
    "OpticalField",
    "ModulatorParams",
    "FiberParams",
    "JonesRotation",
    "laser_cw",
    "hybrid_coupler_90",
    "dd_mzm_ssb",
    "mzm_dsb",
    "ssb_smallsignal_coefficients",
    "dp_bpsk_modulate",
    "apply_jones",
    "polarizer",
    "pbs",
    "pbc",
    "fiber_propagate",
    "attenuate",
    "delay_line",
    "photodetect",
    "balanced_detect",
    # link
    "LinkScenario",
    "SelfInterferencePath",
    "SoiSpec",
    "LinkMetrics",
    "LinkResult",
    "downlink_taps",
    "run_downlink",
    "build_soi_waveform",
    "make_received_signal",
    "run_uplink",
    "run_full",
    # tuner
    "SicSettings",
    "TuneReport",
    "analytic_alpha",
    "analytic_tau2",
    "seed_settings",
    "refine",
    "refine_alpha",
    "auto_tune",
    "verify_phase_constant",
    # scenario io
    "load_scenario",
    "save_scenario",
    "bundled_scenario_dir",
    "bundled_scenarios",
]
