"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
CSSMODEM_PURE_PYTHON=1 forces the fallback. Signatures and random-input
conventions match ``_kernels.pyx`` exactly; only floating-point rounding
may differ (the compiled path uses a phasor recurrence instead of per-sample
trig).
"""

from __future__ import annotations

import numpy as np


def jakes_trace(
    amps: np.ndarray, omegas: np.ndarray, phases: np.ndarray, n_samples: int
) -> np.ndarray:
    """Sum-of-sinusoids fading traces, one row per tap.

    ``h[l, t] = amps[l]/sqrt(K) * sum_m exp(j*(omegas[l, m]*t + phases[l, m]))``

    omegas are per-sample angular increments (2*pi*f_d*Ts*cos(alpha)).
    """
    n_taps, n_sin = omegas.shape
    t = np.arange(n_samples, dtype=np.float64)
    out = np.zeros((n_taps, n_samples), dtype=np.complex128)
    for m in range(n_sin):  # one pass per sinusoid keeps peak memory at L*T
        out += np.exp(1j * (omegas[:, m, None] * t + phases[:, m, None]))
    out *= (amps / np.sqrt(n_sin))[:, None]
    return out


def tv_convolve(taps: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Time-varying tapped-delay-line filter.

    ``y[n] = sum_l taps[l, n] * x[n - l]`` with ``x[<0] = 0``. Row ``l`` of
    ``taps`` is the gain trace of the delay-``l`` tap.
    """
    n_taps, n_samples = taps.shape
    if x.shape[0] != n_samples:
        raise ValueError(
            f"tap traces cover {n_samples} samples but signal has {x.shape[0]}"
        )
    y = np.zeros(n_samples, dtype=np.complex128)
    y += taps[0] * x
    for l in range(1, n_taps):
        y[l:] += taps[l, l:] * x[: n_samples - l]
    return y
