"""Cancellation settings: analytic seeding from the Bessel conditions, then
direct-search refinement of (alpha, tau2) on the simulated residual power."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import j0, j1

from .errors import AttenuatorInfeasible, DegenerateScan
from .link import LinkScenario, UplinkEvaluator, _received_with_comp, run_downlink
from .signal_core import QamSignalSpec, SampledWaveform, ToneSpec

# Aggregate phase constant of the cancellation condition: the TODL delay must
# satisfy w_if*tau2 = w_s*tau1 + PHASE_CONSTANT (mod 2*pi).
PHASE_CONSTANT = -5.0 * np.pi / 4.0


@dataclass(frozen=True)
class SicSettings:
    alpha: float = 0.0  # power ratio through the reference-arm attenuator
    tau2: float = 0.0  # reference-arm delay, seconds
    rf_phase_comp: float | None = None  # explicit phase shifter (wideband mode)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.tau2 < 0.0:
            raise ValueError("tau2 must be non-negative")


@dataclass
class TuneReport:
    seed: SicSettings
    refined: SicSettings
    depth_seed_db: float
    depth_refined_db: float
    iterations: int


def analytic_alpha(m1: float, m2: float, m3: float) -> float:
    """Attenuation matching the reference to the down-converted SI amplitude."""
    if min(m1, m2, m3) < 0:
        raise ValueError("modulation indices must be non-negative")
    denom = 2.0 * j0(m1) * j1(m1)
    if denom == 0.0:
        raise ZeroDivisionError("J0(m1)*J1(m1) vanishes; alpha undefined")
    alpha = math.sqrt(2.0) * j0(m2) * j0(m3) * j1(m2) * j1(m3) / denom
    if alpha > 1.0:
        raise AttenuatorInfeasible(
            f"required alpha {alpha:.3g} > 1; lower m2/m3 or raise m1"
        )
    if alpha < 0.0:
        raise AttenuatorInfeasible(
            f"required alpha {alpha:.3g} < 0; indices beyond a Bessel sign change"
        )
    return alpha


def analytic_tau2(
    omega_if: float,
    omega_s: float,
    tau1: float,
    wideband: bool = False,
    horizon: float = math.inf,
) -> float:
    """Reference-arm delay satisfying the phase-matching condition.

    Narrowband mode folds the constant phase into the delay; wideband mode
    assumes the constant is compensated by an RF phase shifter instead.
    """
    if omega_if <= 0:
        raise ValueError("omega_if must be positive")
    tau = omega_s * tau1 / omega_if
    if not wideband:
        tau += PHASE_CONSTANT / omega_if
    period = 2.0 * np.pi / omega_if
    while tau < 0.0:
        tau += period
    while tau >= horizon:
        tau -= period
    if tau < 0.0:
        raise ValueError("no non-negative tau2 below the horizon")
    return tau


def _effective_amplitude(w: SampledWaveform) -> float:
    """Peak-equivalent tone amplitude: sqrt(2) * rms."""
    return float(np.sqrt(2.0 * np.mean(np.abs(w.samples) ** 2)))


def _drive_amplitude(sig) -> float:
    if isinstance(sig, ToneSpec):
        return sig.amplitude
    if isinstance(sig, QamSignalSpec):
        from .signal_core import dbm_to_watts, R_REF

        return math.sqrt(2.0 * dbm_to_watts(sig.power_dbm) * R_REF)
    raise TypeError(f"unsupported drive spec {type(sig)!r}")


def seed_settings(
    s: LinkScenario,
    rf: SampledWaveform,
    wideband: bool = False,
) -> SicSettings:
    """Analytic SIC seed from the scenario drives and the simulated SI level."""
    m1 = np.pi * _drive_amplitude(s.if_signal) / s.mod_if.v_pi
    m2 = np.pi * _drive_amplitude(s.lo_signal) / s.mod_lo.v_pi
    gain = 10.0 ** (s.si_path.gain_db / 20.0) if np.isfinite(s.si_path.gain_db) else 0.0
    m3 = np.pi * _effective_amplitude(rf) * gain / s.mod_uplink.v_pi
    alpha = analytic_alpha(m1, m2, m3)
    w_if = 2.0 * np.pi * s.f_if
    w_s = 2.0 * np.pi * s.f_s
    tau2 = analytic_tau2(
        w_if, w_s, s.si_path.delay, wideband=wideband, horizon=s.grid.duration / 4.0
    )
    return SicSettings(
        alpha=alpha,
        tau2=tau2,
        rf_phase_comp=PHASE_CONSTANT if wideband else None,
    )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of f on [a, b]; returns (x, f(x))."""
    a, b = min(a, b), max(a, b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


_TAU_TOL = 0.01e-12  # s
_ALPHA_TOL = 1e-5
_SWEEP_TOL_DB = 0.05
_MAX_SWEEPS = 50


def _make_evaluator(s: LinkScenario, sic: SicSettings, downlink=None) -> UplinkEvaluator:
    rf, ru = run_downlink(s) if downlink is None else downlink
    received = _received_with_comp(rf, s, sic, None)
    return UplinkEvaluator(ru, received, s)


def refine(s: LinkScenario, seed: SicSettings, downlink=None) -> TuneReport:
    """Alternating golden-section search on tau2 and alpha.

    The delay window spans one IF period either side of the seed; the
    attenuation window spans a factor of two either way, clipped to [0, 1].
    Objective is the residual SI band power; the report never degrades below
    the seed depth.
    """
    ev = _make_evaluator(s, seed, downlink)
    p_without = ev.residual_band_power_dbm(0.0, 0.0)

    period = 1.0 / s.f_if
    t_lo = max(0.0, seed.tau2 - period)
    t_hi = seed.tau2 + period
    if seed.alpha > 0.0:
        a_lo, a_hi = 0.5 * seed.alpha, min(1.0, 2.0 * seed.alpha)
    else:
        a_lo, a_hi = 0.0, 1.0
    best_a, best_t = seed.alpha, seed.tau2
    best_obj = ev.residual_band_power_dbm(best_a, best_t)
    depth_seed = p_without - best_obj
    sweeps = 0
    for _ in range(_MAX_SWEEPS):
        sweeps += 1
        prev_obj = best_obj
        t, obj = golden_min(
            lambda tau: ev.residual_band_power_dbm(best_a, tau), t_lo, t_hi, _TAU_TOL
        )
        if obj < best_obj:
            best_t, best_obj = t, obj
        a, obj = golden_min(
            lambda al: ev.residual_band_power_dbm(al, best_t), a_lo, a_hi, _ALPHA_TOL
        )
        if obj < best_obj:
            best_a, best_obj = a, obj
        if prev_obj - best_obj < _SWEEP_TOL_DB:
            break
    return TuneReport(
        seed=seed,
        refined=replace(seed, alpha=best_a, tau2=best_t),
        depth_seed_db=depth_seed,
        depth_refined_db=p_without - best_obj,
        iterations=sweeps,
    )


def refine_alpha(s: LinkScenario, settings: SicSettings, downlink=None) -> TuneReport:
    """Attenuator-only refinement with the delay line held fixed.

    Useful in wideband mode, where tau2 is pinned to the phase-matching
    formula and only the reference-arm attenuation is free.
    """
    ev = _make_evaluator(s, settings, downlink)
    p_without = ev.residual_band_power_dbm(0.0, 0.0)
    obj0 = ev.residual_band_power_dbm(settings.alpha, settings.tau2)
    if settings.alpha > 0.0:
        a_lo, a_hi = 0.5 * settings.alpha, min(1.0, 2.0 * settings.alpha)
    else:
        a_lo, a_hi = 0.0, 1.0
    a, obj = golden_min(
        lambda al: ev.residual_band_power_dbm(al, settings.tau2),
        a_lo,
        a_hi,
        _ALPHA_TOL,
    )
    if obj > obj0:
        a, obj = settings.alpha, obj0
    return TuneReport(
        seed=settings,
        refined=replace(settings, alpha=a),
        depth_seed_db=p_without - obj0,
        depth_refined_db=p_without - obj,
        iterations=1,
    )


def auto_tune(s: LinkScenario, wideband: bool = False, downlink=None) -> TuneReport:
    """Analytic seed followed by refinement.

    Wideband mode keeps tau2 pinned to the phase-matching formula (the RF
    phase shifter carries the constant) and refines the attenuation only.
    """
    rf, ru = run_downlink(s) if downlink is None else downlink
    seed = seed_settings(s, rf, wideband=wideband)
    if wideband:
        return refine_alpha(s, seed, downlink=(rf, ru))
    return refine(s, seed, downlink=(rf, ru))


def _wrap_phase(phi: float) -> float:
    return float((phi + np.pi) % (2.0 * np.pi) - np.pi)


def verify_phase_constant(s: LinkScenario, n_scan: int = 96) -> float:
    """Empirical cancellation phase constant wrap(w_if*tau2* - w_s*tau1).

    Scans tau2 over one IF period at the analytic alpha and locates the
    depth-maximizing delay.
    """
    if not isinstance(s.if_signal, ToneSpec):
        raise ValueError("verify_phase_constant needs a single-tone scenario")
    rf, ru = run_downlink(s)
    seed = seed_settings(s, rf)
    ev = _make_evaluator(s, seed, downlink=(rf, ru))
    period = 1.0 / s.f_if
    taus = np.linspace(0.0, period, n_scan, endpoint=False)
    objs = np.array([ev.residual_band_power_dbm(seed.alpha, t) for t in taus])
    if objs.max() - objs.min() < 1.0:
        raise DegenerateScan("residual power flat over the delay scan")
    k = int(np.argmin(objs))
    t_lo = taus[k] - period / n_scan
    t_hi = taus[k] + period / n_scan
    tau_star, _ = golden_min(
        lambda t: ev.residual_band_power_dbm(seed.alpha, max(t, 0.0)),
        t_lo,
        t_hi,
        _TAU_TOL,
    )
    w_if = 2.0 * np.pi * s.f_if
    w_s = 2.0 * np.pi * s.f_s
    return _wrap_phase(w_if * max(tau_star, 0.0) - w_s * s.si_path.delay)
