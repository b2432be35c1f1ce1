"""Statistical channel models: AWGN, flat Rayleigh fading, and a time-variant
tapped delay line, plus cyclic prefix handling and profile-file loading.

Fading traces come from a sum-of-sinusoids generator (32 equal-power
scatterers per tap, uniformly random arrival angles and phases), which gives
each tap a zero-mean complex process with the classic Doppler autocorrelation
J0(2*pi*f_d*tau) and is reproducible from an explicit RNG with no filter
warm-up. Taps fade independently. With zero Doppler, or in block mode, each
tap is a single complex Gaussian draw held for the whole realization, so the
envelope is exactly Rayleigh across realizations.

Tap powers are always normalized to unit total average gain so SNR is defined
purely by the noise variance.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import backend

SPEED_OF_LIGHT_M_S = 299_792_458.0
NUM_SCATTERERS = 32

PROFILE_DIR_ENV = "CSSM_PROFILE_DIR"


@dataclass(frozen=True)
class NoiseSpec:
    """Complex noise variance per sample, split equally between I and Q."""

    sigma2: float

    def __post_init__(self) -> None:
        if self.sigma2 < 0:
            raise ValueError("noise variance must be nonnegative")


def awgn(x: np.ndarray, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Add circularly symmetric complex Gaussian noise of variance sigma2.

    Draws are interleaved (re, im) pairs from one stream, so a pre-drawn
    noise vector from an identically seeded generator reproduces the output
    exactly.
    """
    if noise.sigma2 == 0:
        return x.astype(np.complex128, copy=True)
    w = rng.standard_normal(2 * len(x)).view(np.complex128)
    w *= np.sqrt(noise.sigma2 / 2)
    return x + w


def doppler_from_mobility(speed_kmh: float, carrier_hz: float) -> float:
    """Maximum Doppler shift in Hz for a given speed and carrier frequency."""
    if speed_kmh < 0:
        raise ValueError("speed must be nonnegative")
    return (speed_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT_M_S


@dataclass(frozen=True)
class FadingSpec:
    """Tapped-delay-line fading configuration.

    ``delays`` are integer sample delays (strictly increasing, >= 0) and
    ``powers`` the matching average linear tap powers, normalized to sum to
    one. A single zero-delay tap is flat fading.
    """

    doppler_hz: float
    sample_rate_hz: float
    delays: tuple[int, ...]
    powers: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.doppler_hz < 0 or self.sample_rate_hz <= 0:
            raise ValueError("doppler must be >= 0 and sample rate > 0")
        if len(self.delays) == 0 or len(self.delays) != len(self.powers):
            raise ValueError("profile needs matching, nonempty delays and powers")
        if any(d < 0 for d in self.delays) or list(self.delays) != sorted(set(self.delays)):
            raise ValueError("tap delays must be nonnegative and strictly increasing")
        if any(p <= 0 for p in self.powers):
            raise ValueError("tap powers must be positive")
        total = float(sum(self.powers))
        object.__setattr__(self, "powers", tuple(p / total for p in self.powers))

    @classmethod
    def flat(cls, doppler_hz: float, sample_rate_hz: float) -> "FadingSpec":
        return cls(doppler_hz, sample_rate_hz, (0,), (1.0,))

    @classmethod
    def from_taps(
        cls,
        taps: Sequence[tuple[float, float]],
        doppler_hz: float,
        sample_rate_hz: float,
    ) -> "FadingSpec":
        """Build from ``(delay_us, avg_power_db)`` pairs.

        Delays are rounded to the nearest sample at the configured rate and
        taps that land on the same sample are merged by linear power
        addition.
        """
        merged: dict[int, float] = {}
        for delay_us, power_db in taps:
            sample = int(round(delay_us * 1e-6 * sample_rate_hz))
            merged[sample] = merged.get(sample, 0.0) + 10.0 ** (power_db / 10.0)
        delays = tuple(sorted(merged))
        powers = tuple(merged[d] for d in delays)
        return cls(doppler_hz, sample_rate_hz, delays, powers)

    @property
    def span(self) -> int:
        """Dense tap-vector length, max delay + 1."""
        return self.delays[-1] + 1


@dataclass
class ChannelRealization:
    """One draw of the channel: dense complex gain traces, (span, T).

    Row ``l`` is the gain at delay ``l`` samples; delays with no configured
    tap are zero rows.
    """

    taps: np.ndarray

    @property
    def span(self) -> int:
        return self.taps.shape[0]

    @property
    def num_samples(self) -> int:
        return self.taps.shape[1]


def realize_channel(
    spec: FadingSpec,
    num_samples: int,
    rng: np.random.Generator,
    block: bool = False,
) -> ChannelRealization:
    """Draw one fading realization covering ``num_samples`` samples.

    ``block=True`` freezes each tap at a single complex Gaussian draw for the
    whole realization (frame-static fading); otherwise taps evolve with the
    configured Doppler. Zero Doppler is always frame-static.
    """
    if num_samples < 1:
        raise ValueError("realization must cover at least one sample")
    static = block or spec.doppler_hz == 0
    taps = np.zeros((spec.span, num_samples), dtype=np.complex128)
    if static:
        for delay, power in zip(spec.delays, spec.powers):
            g = np.sqrt(power / 2) * complex(rng.standard_normal(), rng.standard_normal())
            taps[delay, :] = g
        return ChannelRealization(taps)

    n_taps = len(spec.delays)
    angles = rng.uniform(0.0, 2 * np.pi, size=(n_taps, NUM_SCATTERERS))
    phases = rng.uniform(0.0, 2 * np.pi, size=(n_taps, NUM_SCATTERERS))
    omegas = 2 * np.pi * (spec.doppler_hz / spec.sample_rate_hz) * np.cos(angles)
    amps = np.sqrt(np.asarray(spec.powers))
    traces = backend.jakes_trace(
        np.ascontiguousarray(amps),
        np.ascontiguousarray(omegas),
        np.ascontiguousarray(phases),
        num_samples,
    )
    for row, delay in enumerate(spec.delays):
        taps[delay, :] = traces[row]
    return ChannelRealization(taps)


def apply_channel(x: np.ndarray, h: ChannelRealization) -> np.ndarray:
    """Time-varying convolution ``y[n] = sum_l taps[l, n] x[n-l]``, x[<0] = 0.

    Cyclic prefixes in ``x``, when present, supply the history that turns
    this into a per-chirp circular convolution after prefix removal.
    """
    if len(x) != h.num_samples:
        raise ValueError(
            f"realization covers {h.num_samples} samples, signal has {len(x)}"
        )
    return backend.tv_convolve(
        np.ascontiguousarray(h.taps), np.ascontiguousarray(x, dtype=np.complex128)
    )


def add_cp(x: np.ndarray, n_cp: int) -> np.ndarray:
    """Prepend the last ``n_cp`` samples of ``x`` as a cyclic prefix."""
    if not 0 <= n_cp < len(x):
        raise ValueError(f"cyclic prefix length {n_cp} must be in [0, {len(x)})")
    if n_cp == 0:
        return x
    return np.concatenate([x[-n_cp:], x])


def remove_cp(y: np.ndarray, n_cp: int) -> np.ndarray:
    """Drop the first ``n_cp`` samples; inverse of :func:`add_cp`."""
    if n_cp < 0:
        raise ValueError("cyclic prefix length must be nonnegative")
    return y[n_cp:]


# ---------------------------------------------------------------------------
# Profile files


def load_profile(
    path: str | Path, sample_rate_hz: float, doppler_hz: float
) -> FadingSpec:
    """Load a power-delay profile file.

    Plain text, one tap per line as ``<delay_us> <avg_power_db>``, ``#``
    starts a comment. Total power is normalized to unity and delays are
    rounded to samples at ``sample_rate_hz`` (colliding taps merge by power
    addition).
    """
    taps = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<delay_us> <power_db>'")
        taps.append((float(fields[0]), float(fields[1])))
    if not taps:
        raise ValueError(f"{path}: no taps found")
    return FadingSpec.from_taps(taps, doppler_hz, sample_rate_hz)


def find_profile(name: str, profile_dir: str | Path | None = None) -> Path:
    """Locate ``<name>.txt``: explicit dir, then $CSSM_PROFILE_DIR, then the
    profiles bundled with the package."""
    candidates = []
    if profile_dir is not None:
        candidates.append(Path(profile_dir) / f"{name}.txt")
    env_dir = os.environ.get(PROFILE_DIR_ENV)
    if env_dir:
        candidates.append(Path(env_dir) / f"{name}.txt")
    for cand in candidates:
        if cand.is_file():
            return cand
    packaged = resources.files("cssmodem").joinpath("profiles", f"{name}.txt")
    with resources.as_file(packaged) as p:
        if p.is_file():
            return p
    raise FileNotFoundError(
        f"profile '{name}' not found (searched {[str(c) for c in candidates]} "
        f"and the packaged profiles)"
    )
