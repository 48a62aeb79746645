"""Time-grid waveforms, tone/QAM generation, spectral estimation and metrics.

All electrical powers are referenced to 50 ohm: P_dBm = 10*log10(Vrms^2/50/1mW).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.signal

from .errors import (
    AliasError,
    FilterSpecError,
    GridError,
    LockError,
    RangeError,
    ResolutionError,
    UnsupportedConstellation,
)

R_REF = 50.0  # reference impedance for dBm conversions
_FFT_WORKERS = -1


def dbm_to_watts(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    if p_watts <= 0.0:
        return -400.0
    return 10.0 * np.log10(p_watts / 1e-3)


def dbm_to_amplitude(p_dbm: float) -> float:
    """Peak amplitude in volts of a sine with the given power into 50 ohm."""
    return np.sqrt(2.0 * dbm_to_watts(p_dbm) * R_REF)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid shared by every waveform in one experiment."""

    sample_rate: float
    n_samples: int
    t0: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.n_samples * self.dt

    @property
    def nyquist(self) -> float:
        return 0.5 * self.sample_rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_samples) * self.dt

    def freqs(self) -> np.ndarray:
        """Two-sided FFT frequency axis (unshifted)."""
        return sfft.fftfreq(self.n_samples, self.dt)


DEFAULT_GRID = TimeGrid(sample_rate=64e9, n_samples=2**20)


@dataclass
class SampledWaveform:
    """Electrical samples (volts) on a time grid; real signals carry zero imag."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.shape != (self.grid.n_samples,):
            raise ValueError("samples length must match grid")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    @property
    def is_real(self) -> bool:
        return not np.any(self.samples.imag)

    def real_samples(self) -> np.ndarray:
        return np.ascontiguousarray(self.samples.real)

    def mean_power(self) -> float:
        """Mean-square value into a unit load (A^2/2 for a tone of amplitude A)."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def __add__(self, other: "SampledWaveform") -> "SampledWaveform":
        require_same_grid(self, other)
        return SampledWaveform(self.grid, self.samples + other.samples)

    def scaled(self, c: float) -> "SampledWaveform":
        return SampledWaveform(self.grid, self.samples * c)


def require_same_grid(*items) -> None:
    g0 = items[0].grid
    for it in items[1:]:
        if it.grid != g0:
            raise GridError("operands do not share a time grid")


@dataclass(frozen=True)
class ToneSpec:
    amplitude: float  # volts, peak
    frequency: float  # Hz
    phase: float = 0.0  # radians

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class QamSignalSpec:
    order: int = 16
    symbol_rate: float = 10e6
    center_frequency: float = 2e9
    power_dbm: float = 0.0
    rolloff: float = 0.35
    seed: int = 0

    def __post_init__(self):
        if self.order != 16:
            raise UnsupportedConstellation(f"unsupported QAM order {self.order}")
        if self.symbol_rate <= 0:
            raise ValueError("symbol_rate must be positive")
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError("rolloff must be in (0, 1]")

    @property
    def occupied_halfwidth(self) -> float:
        return 0.5 * (1.0 + self.rolloff) * self.symbol_rate


@dataclass
class SpectrumEstimate:
    freqs: np.ndarray  # Hz, strictly increasing
    psd: np.ndarray  # dBm/Hz
    rbw: float  # Hz


def make_tone(spec: ToneSpec, grid: TimeGrid) -> SampledWaveform:
    """Real cosine amplitude*cos(2*pi*f*t + phase) on the grid."""
    if spec.frequency >= grid.nyquist:
        raise AliasError(
            f"tone at {spec.frequency:.3g} Hz exceeds Nyquist {grid.nyquist:.3g} Hz"
        )
    t = grid.times()
    return SampledWaveform(
        grid, spec.amplitude * np.cos(2.0 * np.pi * spec.frequency * t + spec.phase)
    )


_GRAY2 = np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(10.0)


def _qam16_symbols(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 4, size=(n, 2))
    return _GRAY2[bits[:, 0]] + 1j * _GRAY2[bits[:, 1]]


def _rrc_response(freqs: np.ndarray, symbol_rate: float, rolloff: float) -> np.ndarray:
    """Root-raised-cosine magnitude response on the given frequency axis."""
    af = np.abs(freqs)
    f1 = 0.5 * (1.0 - rolloff) * symbol_rate
    f2 = 0.5 * (1.0 + rolloff) * symbol_rate
    h = np.zeros_like(af)
    h[af <= f1] = 1.0
    skirt = (af > f1) & (af < f2)
    h[skirt] = np.sqrt(
        0.5 * (1.0 + np.cos(np.pi * (af[skirt] - f1) / (rolloff * symbol_rate)))
    )
    return h


def _qam_baseband(spec: QamSignalSpec, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray, int]:
    """Complex RRC-shaped baseband, its symbol values, and samples per symbol."""
    sps = grid.sample_rate / spec.symbol_rate
    if abs(sps - round(sps)) > 1e-9:
        raise ValueError("sample_rate must be an integer multiple of symbol_rate")
    sps = int(round(sps))
    n_sym = grid.n_samples // sps
    if n_sym < 64:
        raise ValueError("grid too short for at least 64 symbols")
    symbols = _qam16_symbols(n_sym, spec.seed)
    impulses = np.zeros(grid.n_samples, dtype=np.complex128)
    impulses[: n_sym * sps : sps] = symbols
    h = _rrc_response(grid.freqs(), spec.symbol_rate, spec.rolloff)
    baseband = sfft.ifft(sfft.fft(impulses, workers=_FFT_WORKERS) * h, workers=_FFT_WORKERS)
    return baseband, symbols, sps


def make_qam(spec: QamSignalSpec, grid: TimeGrid) -> SampledWaveform:
    """RRC-shaped 16-QAM passband waveform normalized to the requested power.

    Deterministic for a fixed seed: the same spec always yields bit-identical
    samples.
    """
    edge = spec.center_frequency + spec.occupied_halfwidth
    if edge >= grid.nyquist or spec.center_frequency - spec.occupied_halfwidth <= 0:
        raise AliasError("QAM band does not fit inside the Nyquist interval")
    baseband, _, _ = _qam_baseband(spec, grid)
    t = grid.times()
    passband = (baseband * np.exp(2j * np.pi * spec.center_frequency * t)).real
    target = dbm_to_watts(spec.power_dbm) * R_REF  # mean square volts
    passband *= np.sqrt(target / np.mean(passband**2))
    return SampledWaveform(grid, passband)


_HANN_ENBW = 1.5  # equivalent noise bandwidth of a Hann window, in bins


def welch_psd(w: SampledWaveform, rbw: float) -> SpectrumEstimate:
    """Averaged-periodogram PSD in dBm/Hz with the requested resolution bandwidth.

    One-sided for real waveforms, two-sided (fftshifted) otherwise. Integrating
    the linear PSD over frequency recovers the waveform mean power within 0.2 dB.
    """
    fs = w.grid.sample_rate
    nperseg = int(round(_HANN_ENBW * fs / rbw))
    if nperseg > w.grid.n_samples:
        raise ResolutionError(
            f"rbw {rbw:.3g} Hz needs {nperseg} samples/segment; record has "
            f"{w.grid.n_samples}"
        )
    nperseg = max(nperseg, 8)
    real_in = w.is_real
    x = w.real_samples() if real_in else w.samples
    freqs, pxx = scipy.signal.welch(
        x,
        fs=fs,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=real_in,
        scaling="density",
    )
    if not real_in:
        freqs = sfft.fftshift(freqs)
        pxx = sfft.fftshift(pxx)
    psd_w_hz = pxx / R_REF  # V^2/Hz -> W/Hz
    psd_dbm = 10.0 * np.log10(np.maximum(psd_w_hz / 1e-3, 1e-40))
    return SpectrumEstimate(freqs=freqs, psd=psd_dbm, rbw=_HANN_ENBW * fs / nperseg)


def band_power(s: SpectrumEstimate, f_lo: float, f_hi: float) -> float:
    """Integrated power of the PSD over [f_lo, f_hi], in dBm."""
    if f_lo >= f_hi:
        raise RangeError("f_lo must be below f_hi")
    if f_lo < s.freqs[0] or f_hi > s.freqs[-1]:
        raise RangeError("band outside the estimated spectrum")
    df = s.freqs[1] - s.freqs[0]
    mask = (s.freqs >= f_lo) & (s.freqs <= f_hi)
    p_mw = np.sum(10.0 ** (s.psd[mask] / 10.0)) * df
    if p_mw <= 0.0:
        return -400.0
    return float(10.0 * np.log10(p_mw))


def cancellation_depth(
    without_sic: SampledWaveform,
    with_sic: SampledWaveform,
    band: tuple[float, float],
    rbw: float = 1e6,
) -> float:
    """Band power without minus with cancellation, in dB (positive = suppression)."""
    require_same_grid(without_sic, with_sic)
    f_lo, f_hi = band
    p_without = band_power(welch_psd(without_sic, rbw), f_lo, f_hi)
    p_with = band_power(welch_psd(with_sic, rbw), f_lo, f_hi)
    return p_without - p_with


_SKIRT_FRACTION = 0.05  # transition width as a fraction of the edge frequency


def _edge_mask(af: np.ndarray, edge: float, rising: bool) -> np.ndarray:
    """Raised-cosine skirt from unity inside the edge to zero one skirt width out."""
    w = _SKIRT_FRACTION * edge
    h = np.zeros_like(af)
    if rising:
        h[af >= edge] = 1.0
        skirt = (af < edge) & (af > edge - w)
        h[skirt] = 0.5 * (1.0 + np.cos(np.pi * (edge - af[skirt]) / w))
    else:
        h[af <= edge] = 1.0
        skirt = (af > edge) & (af < edge + w)
        h[skirt] = 0.5 * (1.0 + np.cos(np.pi * (af[skirt] - edge) / w))
    return h


def filter_band(w: SampledWaveform, kind: str, *edges: float) -> SampledWaveform:
    """Frequency-domain filter with raised-cosine skirts outside the passband."""
    for e in edges:
        if e >= w.grid.nyquist:
            raise FilterSpecError("filter edge at or above Nyquist")
    af = np.abs(w.grid.freqs())
    if kind == "lowpass":
        if len(edges) != 1:
            raise FilterSpecError("lowpass takes one edge")
        h = _edge_mask(af, edges[0], rising=False)
    elif kind == "bandpass":
        if len(edges) != 2 or edges[0] >= edges[1]:
            raise FilterSpecError("bandpass takes two increasing edges")
        h = _edge_mask(af, edges[0], rising=True) * _edge_mask(af, edges[1], rising=False)
    else:
        raise FilterSpecError(f"unknown filter kind {kind!r}")
    out = sfft.ifft(sfft.fft(w.samples, workers=_FFT_WORKERS) * h, workers=_FFT_WORKERS)
    if w.is_real:
        out = out.real.astype(np.complex128)
    return SampledWaveform(w.grid, out)


_EVM_GUARD_SYMBOLS = 10


def demodulate_evm(w: SampledWaveform, spec: QamSignalSpec) -> float:
    """RMS EVM in percent after matched filtering and complex-gain equalization.

    Data-aided: the reference symbols are regenerated from the spec seed, and
    symbol timing is recovered by correlating against the known baseband.
    """
    grid = w.grid
    baseband_ref, symbols, sps = _qam_baseband(spec, grid)
    t = grid.times()
    z = w.samples * np.exp(-2j * np.pi * spec.center_frequency * t)
    h = _rrc_response(grid.freqs(), spec.symbol_rate, spec.rolloff)
    zf = sfft.ifft(sfft.fft(z, workers=_FFT_WORKERS) * h, workers=_FFT_WORKERS)
    # matched-filtered reference for the timing correlation
    rf = sfft.ifft(sfft.fft(baseband_ref, workers=_FFT_WORKERS) * h, workers=_FFT_WORKERS)
    xc = sfft.ifft(
        sfft.fft(zf, workers=_FFT_WORKERS) * np.conj(sfft.fft(rf, workers=_FFT_WORKERS)),
        workers=_FFT_WORKERS,
    )
    lag = int(np.argmax(np.abs(xc)))
    peak = np.abs(xc[lag])
    if peak < 5.0 * np.sqrt(np.mean(np.abs(xc) ** 2)):
        raise LockError("no correlation peak; carrier or seed mismatch")
    zf = np.roll(zf, -lag)
    n_sym = symbols.size
    idx = np.arange(_EVM_GUARD_SYMBOLS, n_sym - _EVM_GUARD_SYMBOLS)
    rx = zf[idx * sps]
    ref = symbols[idx]
    gain = np.vdot(ref, rx) / np.vdot(ref, ref)
    if abs(gain) == 0.0:
        raise LockError("zero equalizer gain")
    err = rx / gain - ref
    return float(100.0 * np.sqrt(np.mean(np.abs(err) ** 2) / np.mean(np.abs(ref) ** 2)))


def fractional_delay(w: SampledWaveform, tau: float) -> SampledWaveform:
    """Circular fractional delay applied as a spectral phase.

    The Nyquist bin is zeroed: its phase under a fractional shift is ambiguous
    for real signals, and dropping it keeps delay/advance pairs exact inverses.
    """
    f = w.grid.freqs()
    ph = np.exp(-2j * np.pi * f * tau)
    if w.grid.n_samples % 2 == 0:
        ph[w.grid.n_samples // 2] = 0.0
    out = sfft.ifft(
        sfft.fft(w.samples, workers=_FFT_WORKERS) * ph,
        workers=_FFT_WORKERS,
    )
    if w.is_real:
        out = out.real.astype(np.complex128)
    return SampledWaveform(w.grid, out)


def phase_shift(w: SampledWaveform, phi: float) -> SampledWaveform:
    """Shift every positive-frequency component by +phi (analytic phase shift)."""
    x = sfft.fft(w.samples, workers=_FFT_WORKERS)
    f = w.grid.freqs()
    x[f > 0] *= np.exp(1j * phi)
    x[f < 0] *= np.exp(-1j * phi)
    out = sfft.ifft(x, workers=_FFT_WORKERS)
    if w.is_real:
        out = out.real.astype(np.complex128)
    return SampledWaveform(w.grid, out)
