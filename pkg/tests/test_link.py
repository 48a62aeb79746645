"""End-to-end link behavior: downlink up-conversion, SI path, uplink SIC."""

import dataclasses

import numpy as np
import pytest

from rofsim.errors import DelayRangeError
from rofsim.link import (
    LinkScenario,
    SelfInterferencePath,
    build_soi_waveform,
    make_received_signal,
    run_downlink,
    run_full,
    run_uplink,
)
from rofsim.scenario import bundled_scenario_dir, load_scenario
from rofsim.signal_core import (
    QamSignalSpec,
    TimeGrid,
    ToneSpec,
    band_power,
    dbm_to_amplitude,
    make_tone,
    welch_psd,
)
from rofsim.tuner import SicSettings, auto_tune

GRID_TONE = TimeGrid(sample_rate=64e9, n_samples=2**18)
GRID_QAM = TimeGrid(sample_rate=64e9, n_samples=2**19)


def bundled(name: str, grid: TimeGrid, **overrides) -> LinkScenario:
    s = load_scenario(bundled_scenario_dir() / f"{name}.scenario")
    return dataclasses.replace(s, grid=grid, **overrides)


def tone_scenario(f_if: float = 2e9, f_lo: float = 5e9, **overrides) -> LinkScenario:
    s = bundled("fig6a", GRID_TONE, **overrides)
    return dataclasses.replace(
        s,
        if_signal=dataclasses.replace(s.if_signal, frequency=f_if),
        lo_signal=dataclasses.replace(s.lo_signal, frequency=f_lo),
    )


class TestFrequencyBookkeeping:
    @pytest.mark.parametrize("f_if", [2e9, 2.1e9, 2.2e9])
    @pytest.mark.parametrize("f_lo", [5e9, 6e9])
    def test_air_interface_frequency(self, f_if, f_lo):
        s = tone_scenario(f_if, f_lo)
        assert s.f_s == pytest.approx(f_if + f_lo)
        lo, hi = s.si_band()
        assert lo < f_if < hi

    def test_downlink_line_follows_sum_frequency(self):
        for f_if, f_lo in ((2e9, 5e9), (2.2e9, 6e9)):
            s = tone_scenario(f_if, f_lo)
            rf, _ = run_downlink(s)
            est = welch_psd(rf, s.rbw)
            peak = est.freqs[np.argmax(est.psd)]
            assert peak == pytest.approx(f_if + f_lo, abs=2 * s.rbw)


class TestRunDownlink:
    def test_single_dominant_line(self):
        s = tone_scenario(2e9, 5e9)
        rf, _ = run_downlink(s)
        est = welch_psd(rf, s.rbw)
        main = band_power(est, 7e9 - 5e6, 7e9 + 5e6)
        total = band_power(est, est.freqs[1], est.freqs[-1])
        assert total - main < 0.1  # essentially all RF power in the one line

    def test_qam_bandwidth_preserved(self):
        s = bundled("fig7b", GRID_QAM)  # 20 MBaud at 2 GHz IF, 6 GHz LO
        rf, _ = run_downlink(s)
        est = welch_psd(rf, s.rbw)
        hw = 0.5 * (1 + 0.35) * 20e6
        inside = band_power(est, 8e9 - hw, 8e9 + hw)
        nearby = band_power(est, 8e9 - 10 * hw, 8e9 + 10 * hw)
        assert nearby - inside < 0.2

    def test_zero_if_drive_kills_rf(self):
        s = tone_scenario(2e9, 5e9)
        dark = dataclasses.replace(
            s, if_signal=dataclasses.replace(s.if_signal, amplitude=0.0)
        )
        p_on = run_downlink(s)[0].mean_power()
        p_off = run_downlink(dark)[0].mean_power()
        assert 10 * np.log10(p_on / max(p_off, 1e-300)) >= 80.0


class TestMakeReceivedSignal:
    def test_unity_path_is_identity(self):
        w = make_tone(ToneSpec(amplitude=1.0, frequency=7e9), GRID_TONE)
        r = make_received_signal(w, SelfInterferencePath(gain_db=0.0, delay=0.0))
        assert np.allclose(r.samples, w.samples, atol=1e-12)

    def test_disabled_si_leaves_soi(self):
        w = make_tone(ToneSpec(amplitude=1.0, frequency=7e9), GRID_TONE)
        soi = make_tone(ToneSpec(amplitude=0.01, frequency=7.004e9), GRID_TONE)
        r = make_received_signal(w, SelfInterferencePath(gain_db=-np.inf, delay=0.0), soi)
        assert np.allclose(r.samples, soi.samples, atol=1e-15)

    def test_gain_scaling(self):
        w = make_tone(ToneSpec(amplitude=1.0, frequency=7e9), GRID_TONE)
        r = make_received_signal(w, SelfInterferencePath(gain_db=-20.0, delay=0.0))
        assert r.mean_power() == pytest.approx(w.mean_power() / 100.0, rel=1e-9)

    def test_excessive_delay_rejected(self):
        w = make_tone(ToneSpec(amplitude=1.0, frequency=7e9), GRID_TONE)
        with pytest.raises(DelayRangeError):
            make_received_signal(w, SelfInterferencePath(gain_db=0.0, delay=2e-6))


class TestBuildSoi:
    def test_tone_soi_level_and_frequency(self):
        s = tone_scenario(2e9, 5e9)
        s = dataclasses.replace(s, soi=dataclasses.replace(bundled("fig7a", GRID_TONE).soi))
        w = build_soi_waveform(s)
        assert w.mean_power() == pytest.approx(
            dbm_to_amplitude(-22.0) ** 2 / 2, rel=1e-9
        )
        est = welch_psd(w, s.rbw)
        assert est.freqs[np.argmax(est.psd)] == pytest.approx(7e9, abs=2 * s.rbw)

    def test_none_without_soi(self):
        assert build_soi_waveform(tone_scenario()) is None


class TestRunUplink:
    def test_dark_reference_arm_matches_without(self):
        s = tone_scenario(2e9, 5e9)
        rf, ru = run_downlink(s)
        received = make_received_signal(rf, s.si_path)
        with_sic, without_sic = run_uplink(ru, received, s, SicSettings(alpha=0.0, tau2=0.0))
        assert np.allclose(with_sic.samples, without_sic.samples, atol=1e-15)

    def test_tuned_settings_cancel(self):
        s = tone_scenario(2e9, 5e9)
        rep = auto_tune(s)
        res = run_full(s, rep.refined)
        assert res.metrics.depth_db > 39.0


class TestRunFull:
    def test_tone_depth_and_residual(self):
        s = tone_scenario(2e9, 5e9)
        rep = auto_tune(s)
        res = run_full(s, rep.refined)
        m = res.metrics
        assert m.depth_db > 39.0
        without = band_power(welch_psd(res.bpd_out_without_sic, s.rbw), *s.si_band())
        assert m.residual_si_dbm == pytest.approx(without - m.depth_db, abs=0.1)

    def test_qam_20m_depth(self):
        s = bundled("fig7b", GRID_QAM)
        rep = auto_tune(s)
        assert run_full(s, rep.refined).metrics.depth_db > 20.0

    def test_depth_monotone_in_bandwidth(self):
        base = bundled("fig7a", GRID_QAM, soi=None)
        depths = {}
        for label, sig in (
            ("tone", ToneSpec(amplitude=dbm_to_amplitude(0.0), frequency=2e9)),
            ("10M", base.if_signal),
            ("20M", dataclasses.replace(base.if_signal, symbol_rate=20e6)),
        ):
            s = dataclasses.replace(base, if_signal=sig)
            depths[label] = auto_tune(s).depth_refined_db
        assert depths["tone"] >= depths["10M"] >= depths["20M"]

    def test_fiber_transport_preserves_depth(self):
        s0 = bundled("fig7a", GRID_QAM, soi=None)
        rep0 = auto_tune(s0)
        s1 = bundled("fig8a", GRID_QAM, soi=None)
        rep1 = auto_tune(s1)
        assert abs(rep1.depth_refined_db - rep0.depth_refined_db) < 3.0

    def test_soi_metrics_reported(self):
        s = bundled("fig7a", GRID_QAM)
        rep = auto_tune(s)
        m = run_full(s, rep.refined).metrics
        assert m.soi_power_dbm == pytest.approx(-57.2, abs=3.0)
        assert m.evm_percent is None  # tone SOI carries no constellation

    def test_soi_transparent_to_attenuator(self):
        s = bundled("fig7a", GRID_QAM)
        rep = auto_tune(s)
        p = []
        for a in (0.0, rep.refined.alpha):
            sic = dataclasses.replace(rep.refined, alpha=a)
            p.append(run_full(s, sic).metrics.soi_power_dbm)
        assert abs(p[1] - p[0]) < 1.0

    def test_validation_runs(self):
        s = tone_scenario(2e9, 5e9)
        bad = dataclasses.replace(s, lpf=-1.0)
        with pytest.raises(Exception):
            run_full(bad, SicSettings())
