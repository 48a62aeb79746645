"""Hot elementwise kernels, numba-compiled with a pure-numpy fallback.

Set ``ROFSIM_NO_NUMBA=1`` to force the numpy path (useful for debugging and
for the kernel benchmark). The FFT-bound stages always go through scipy.
"""

import os

import numpy as np

_DISABLE = os.environ.get("ROFSIM_NO_NUMBA", "").strip() not in ("", "0")


def _ssb_operator_np(d: np.ndarray, q: np.ndarray, rad_per_volt: float) -> np.ndarray:
    """Per-sample dual-drive MZM transfer (e^{j*pa} + e^{j*(pb - pi/2)}) / 2."""
    pa = rad_per_volt * d
    pb = rad_per_volt * q - 0.5 * np.pi
    return 0.5 * (np.exp(1j * pa) + np.exp(1j * pb))


def _intensity_np(env_x: np.ndarray, env_y: np.ndarray, gain: float) -> np.ndarray:
    return gain * (env_x.real**2 + env_x.imag**2 + env_y.real**2 + env_y.imag**2)


def _scaled_intensity_diff_np(env: np.ndarray, alpha_gain: float, i_other: np.ndarray) -> np.ndarray:
    """alpha_gain * |env|^2 - i_other, the balanced-detector residual."""
    return alpha_gain * (env.real**2 + env.imag**2) - i_other


if not _DISABLE:
    try:
        from numba import njit

        _ssb_operator_nb = njit(cache=True, fastmath=True)(_ssb_operator_np)
        _intensity_nb = njit(cache=True, fastmath=True)(_intensity_np)
        _scaled_intensity_diff_nb = njit(cache=True, fastmath=True)(_scaled_intensity_diff_np)
        ssb_operator = _ssb_operator_nb
        intensity = _intensity_nb
        scaled_intensity_diff = _scaled_intensity_diff_nb
        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba present in normal installs
        ssb_operator = _ssb_operator_np
        intensity = _intensity_np
        scaled_intensity_diff = _scaled_intensity_diff_np
        USING_NUMBA = False
else:
    ssb_operator = _ssb_operator_np
    intensity = _intensity_np
    scaled_intensity_diff = _scaled_intensity_diff_np
    USING_NUMBA = False
