"""Modulators and maximum-likelihood demodulators for the three chirp schemes.

Schemes
-------
* ``css``: classical frequency-keyed chirp modulation (the standard LoRa-style
  signal). SF bits per chirp, non-coherent or coherent detection.
* ``iqcss``: two independent frequency symbols carried on the in-phase and
  quadrature components of the dechirped spectrum. 2*SF bits per chirp;
  coherent detection only.
* ``dcrk``: frequency symbol plus extra bits keyed on the discrete chirp
  rate, detected by a bank of dechirpers. SF+Ne bits per chirp; non-coherent
  by default.

All demodulators return the hard decision together with the winning metric
value and the margin to the runner-up, which the simulator surfaces for
diagnostics. Ties are broken deterministically toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence, Union

import numpy as np

from .chirps import ChirpParams, raw_chirp

# ---------------------------------------------------------------------------
# Bit-word helpers


def bits_to_symbol(bits: Sequence[int] | np.ndarray) -> int:
    """Map a bit-word to its integer symbol, ``k = sum_i 2^i * bits[i]``.

    ``bits[0]`` is the least-significant bit.
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
        raise ValueError("bit-word must be a 1-D array of 0/1 values")
    return int(np.sum(bits.astype(np.int64) << np.arange(bits.size)))


def symbol_to_bits(k: int, width: int) -> np.ndarray:
    """Exact inverse of :func:`bits_to_symbol` for ``0 <= k < 2**width``."""
    if not 0 <= k < (1 << width):
        raise ValueError(f"symbol {k} out of range for width {width}")
    return (k >> np.arange(width)) & 1


# ---------------------------------------------------------------------------
# Detector modes


@dataclass(frozen=True)
class NonCoherent:
    """Decide from spectral magnitudes; no channel knowledge required."""


@dataclass(frozen=True, eq=False)
class CoherentFlat:
    """Decide from the real part after derotating by a known complex gain.

    ``gain`` may also be a length-B vector to equalize a batch of chirps
    with per-chirp gains.
    """

    gain: complex


@dataclass(frozen=True, eq=False)
class CoherentSelective:
    """Decide after a circulant channel matched filter built from known taps.

    ``taps[l]`` is the gain at delay ``l`` samples; requires the chirp to
    have carried a cyclic prefix longer than the channel memory. A (B, L)
    matrix equalizes a batch of chirps with per-chirp taps.
    """

    taps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        taps = np.atleast_1d(np.asarray(self.taps, dtype=np.complex128))
        if taps.ndim > 2 or taps.size < 1:
            raise ValueError("channel taps must be a nonempty vector or matrix")
        object.__setattr__(self, "taps", taps)


DetectorMode = Union[NonCoherent, CoherentFlat, CoherentSelective]


class CssDecision(NamedTuple):
    k: int
    metric: float
    margin: float


class IqcssDecision(NamedTuple):
    ki: int
    kq: int
    metric_i: float
    metric_q: float
    margin_i: float
    margin_q: float


class DcrkDecision(NamedTuple):
    k: int
    rate: int
    metric: float
    margin: float


class IqcssSymbol(NamedTuple):
    ki: int
    kq: int


class DcrkSymbol(NamedTuple):
    k: int
    rate: int


# ---------------------------------------------------------------------------
# Classical frequency-keyed CSS


def _check_symbol(k: int, p: ChirpParams) -> None:
    if not 0 <= k < p.n:
        raise ValueError(f"symbol {k} out of range for sf={p.sf}")


# Tone rows exp(j*2pi*k*i/n) come from exact integer phases like the chirps.
# For short chirps the full n-by-n table is cached (16 MB at n = 1024); the
# long-chirp alphabets are too large to cache and are synthesized per call.
_TONE_TABLE_MAX_N = 1024


@lru_cache(maxsize=8)
def _tone_table(n: int) -> np.ndarray:
    idx = np.arange(n, dtype=np.int64)
    phase = (2 * np.outer(idx, idx)) % (2 * n)
    table = np.exp((1j * np.pi / n) * phase)
    table.setflags(write=False)
    return table


def _tones(ks: np.ndarray, n: int) -> np.ndarray:
    ks = np.asarray(ks, dtype=np.int64)
    if n <= _TONE_TABLE_MAX_N:
        return _tone_table(n)[ks]
    idx = np.arange(n, dtype=np.int64)
    phase = (2 * ks[:, np.newaxis] * idx) % (2 * n)
    return np.exp((1j * np.pi / n) * phase)


def css_modulate_batch(ks: np.ndarray, p: ChirpParams) -> np.ndarray:
    """Modulate a vector of symbols; returns a (B, N) waveform matrix."""
    if p.rate != 1:
        raise ValueError("frequency-keyed modulation uses the rate-1 up-chirp")
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    if ks.size and (ks.min() < 0 or ks.max() >= p.n):
        raise ValueError(f"symbols out of range for sf={p.sf}")
    return p.amplitude * (_tones(ks, p.n) * raw_chirp(p.n, 1))


def css_modulate(k: int, p: ChirpParams) -> np.ndarray:
    """Modulate symbol ``k`` onto a rate-1 up-chirp.

    ``x[i] = sqrt(es/n) * exp(j*2pi*k*i/n) * c[i]`` with constant per-sample
    power ``es/n``. Equivalent to circularly shifting the raw chirp by ``k``
    up to the constant phase ``exp(j*pi*k^2/n)``; the mixer form is canonical
    because the coherent detectors correlate against it.
    """
    _check_symbol(int(k), p)
    return css_modulate_batch(np.array([int(k)]), p)[0]


def _metric_matrix(
    chirps: np.ndarray, rate: int, mode: DetectorMode
) -> np.ndarray:
    """Per-bin decision metric for a batch of chirps, shape (B, N)."""
    n = chirps.shape[-1]
    if isinstance(mode, NonCoherent):
        return np.abs(np.fft.fft(chirps * np.conj(raw_chirp(n, rate)), axis=-1))
    if isinstance(mode, CoherentFlat):
        spectra = np.fft.fft(chirps * np.conj(raw_chirp(n, rate)), axis=-1)
        gain = np.asarray(mode.gain)
        if gain.ndim:
            gain = gain[:, np.newaxis]
        return (np.conj(gain) * spectra).real
    if isinstance(mode, CoherentSelective):
        # matched-filter the circulant channel in the frequency domain, then
        # dechirp and transform: all three circulant products diagonalize
        h_freq = np.fft.fft(np.atleast_2d(mode.taps), n=n, axis=-1)
        filtered = np.fft.ifft(np.conj(h_freq) * np.fft.fft(chirps, axis=-1), axis=-1)
        out = np.fft.fft(filtered * np.conj(raw_chirp(n, rate)), axis=-1)
        return out.real
    raise TypeError(f"unknown detector mode {mode!r}")


def _argmax_with_margin(metrics: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row argmax plus winner value and winner-minus-runner-up margin."""
    winners = metrics.argmax(axis=-1)
    rows = np.arange(metrics.shape[0])
    best = metrics[rows, winners]
    runner = np.partition(metrics, -2, axis=-1)[:, -2]
    return winners, best, best - runner


def css_demod_batch(
    chirps: np.ndarray, p: ChirpParams, mode: DetectorMode
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Demodulate a ``(B, N)`` batch of received chirps.

    Returns ``(symbols, metrics, margins)``. The decision is the argmax over
    frequency bins of the mode's metric; the first (lowest-index) bin wins
    any tie, which is what ``argmax`` guarantees.
    """
    chirps = np.atleast_2d(chirps)
    if chirps.shape[-1] != p.n:
        raise ValueError(f"expected chirps of {p.n} samples, got {chirps.shape[-1]}")
    return _argmax_with_margin(_metric_matrix(chirps, p.rate, mode))


def css_demod(y: np.ndarray, p: ChirpParams, mode: DetectorMode) -> CssDecision:
    """Demodulate one received chirp (cyclic prefix already removed)."""
    k, metric, margin = css_demod_batch(y[np.newaxis, :], p, mode)
    return CssDecision(int(k[0]), float(metric[0]), float(margin[0]))


# ---------------------------------------------------------------------------
# In-phase / quadrature CSS


def iqcss_modulate(s: IqcssSymbol, p: ChirpParams) -> np.ndarray:
    """Modulate two independent symbols onto one chirp.

    ``x = sqrt(es/2n) * [exp(j2pi ki i/n) + j exp(j2pi kq i/n)] * c[i]``. The
    in-phase symbol appears on the real part of the dechirped spectrum, the
    quadrature symbol on the imaginary part. Total chirp energy is exactly
    ``es`` for every symbol pair, including ``ki == kq``.
    """
    _check_symbol(s.ki, p)
    _check_symbol(s.kq, p)
    return iqcss_modulate_batch(np.array([s.ki]), np.array([s.kq]), p)[0]


def iqcss_modulate_batch(
    kis: np.ndarray, kqs: np.ndarray, p: ChirpParams
) -> np.ndarray:
    """Modulate symbol-pair vectors; returns a (B, N) waveform matrix."""
    if p.rate != 1:
        raise ValueError("IQ modulation uses the rate-1 up-chirp")
    kis = np.atleast_1d(np.asarray(kis, dtype=np.int64))
    kqs = np.atleast_1d(np.asarray(kqs, dtype=np.int64))
    for ks in (kis, kqs):
        if ks.size and (ks.min() < 0 or ks.max() >= p.n):
            raise ValueError(f"symbols out of range for sf={p.sf}")
    mix = _tones(kis, p.n) + 1j * _tones(kqs, p.n)
    return np.sqrt(p.es / (2 * p.n)) * (mix * raw_chirp(p.n, 1))


def _iqcss_spectra(chirps: np.ndarray, p: ChirpParams, mode: DetectorMode) -> np.ndarray:
    if isinstance(mode, NonCoherent):
        raise ValueError("IQ demodulation requires a channel estimate")
    chirps = np.atleast_2d(chirps)
    if chirps.shape[-1] != p.n:
        raise ValueError(f"expected chirps of {p.n} samples, got {chirps.shape[-1]}")
    if isinstance(mode, CoherentFlat):
        gain = np.asarray(mode.gain)
        if gain.ndim:
            gain = gain[:, np.newaxis]
        return np.conj(gain) * np.fft.fft(
            chirps * np.conj(raw_chirp(p.n, p.rate)), axis=-1
        )
    h_freq = np.fft.fft(np.atleast_2d(mode.taps), n=p.n, axis=-1)
    filtered = np.fft.ifft(np.conj(h_freq) * np.fft.fft(chirps, axis=-1), axis=-1)
    return np.fft.fft(filtered * np.conj(raw_chirp(p.n, p.rate)), axis=-1)


def iqcss_demod_batch(
    chirps: np.ndarray, p: ChirpParams, mode: DetectorMode
) -> tuple[np.ndarray, np.ndarray]:
    """Demodulate a batch of IQ chirps; returns ``(ki_hat, kq_hat)`` arrays.

    Coherent only: the quadrature split is meaningless without a channel
    estimate, so NonCoherent mode is rejected.
    """
    spectra = _iqcss_spectra(chirps, p, mode)
    return spectra.real.argmax(axis=-1), spectra.imag.argmax(axis=-1)


def iqcss_demod(y: np.ndarray, p: ChirpParams, mode: DetectorMode) -> IqcssDecision:
    """Demodulate one received IQ chirp."""
    spectra = _iqcss_spectra(y[np.newaxis, :], p, mode)
    ki, met_i, mar_i = _argmax_with_margin(spectra.real)
    kq, met_q, mar_q = _argmax_with_margin(spectra.imag)
    return IqcssDecision(
        int(ki[0]), int(kq[0]), float(met_i[0]), float(met_q[0]),
        float(mar_i[0]), float(mar_q[0]),
    )


# ---------------------------------------------------------------------------
# Discrete chirp-rate keying


def dcrk_rates(ne: int) -> list[int]:
    """Chirp-rate alphabet for ``ne`` rate bits: the centered nonzero range
    ``{-2^(ne-1), ..., -1, 1, ..., 2^(ne-1)}`` in ascending order."""
    if ne not in (1, 2, 3):
        raise ValueError(f"rate bits must be 1, 2 or 3, got {ne}")
    half = 1 << (ne - 1)
    return list(range(-half, 0)) + list(range(1, half + 1))


def rate_map(bits_e: Sequence[int] | np.ndarray) -> int:
    """Map a rate bit-word to its chirp rate.

    The word is read as printed, most-significant bit first, indexing the
    ascending rate alphabet: for three bits, 000 -> -4 up to 111 -> +4.
    """
    bits_e = np.asarray(bits_e)
    ne = bits_e.size
    rates = dcrk_rates(ne)
    if not np.isin(bits_e, (0, 1)).all():
        raise ValueError("rate bit-word must contain only 0/1 values")
    index = int(np.sum(bits_e.astype(np.int64) << np.arange(ne - 1, -1, -1)))
    return rates[index]


def rate_unmap(rate: int, ne: int) -> np.ndarray:
    """Inverse of :func:`rate_map`: chirp rate to its printed bit-word."""
    rates = dcrk_rates(ne)
    try:
        index = rates.index(rate)
    except ValueError:
        raise ValueError(f"rate {rate} not in the {ne}-bit alphabet {rates}") from None
    return (index >> np.arange(ne - 1, -1, -1)) & 1


def dcrk_modulate(s: DcrkSymbol, p: ChirpParams) -> np.ndarray:
    """Modulate a frequency symbol onto a chirp of the keyed rate.

    ``x = sqrt(es/n) * exp(j2pi k i/n) * exp(j pi m i^2/n)``; rate ``m = 1``
    reduces to :func:`css_modulate`.
    """
    return dcrk_modulate_batch(np.array([s.k]), np.array([s.rate]), p)[0]


def dcrk_modulate_batch(
    ks: np.ndarray, rates: np.ndarray, p: ChirpParams
) -> np.ndarray:
    """Modulate (frequency, rate) symbol vectors; returns (B, N)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    rates = np.atleast_1d(np.asarray(rates, dtype=np.int64))
    if ks.size and (ks.min() < 0 or ks.max() >= p.n):
        raise ValueError(f"symbols out of range for sf={p.sf}")
    if np.any(rates == 0) or np.any(np.abs(rates) > 4):
        raise ValueError("chirp rates outside the supported alphabet")
    out = np.empty((ks.size, p.n), dtype=np.complex128)
    tones = _tones(ks, p.n)
    for m in np.unique(rates):
        rows = rates == m
        out[rows] = tones[rows] * raw_chirp(p.n, int(m))
    out *= p.amplitude
    return out


def dcrk_demod_batch(
    chirps: np.ndarray, p: ChirpParams, ne: int, mode: DetectorMode
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Demodulate a batch of rate-keyed chirps.

    Runs the received signal through a dechirp bank, one branch per rate,
    and jointly picks ``(rate, k)`` from the branch spectra: magnitude for
    NonCoherent, derotated real part for CoherentFlat. Selective channels
    are not supported by this detector.

    Returns ``(k_hat, rate_hat, metric, margin)``.
    """
    if isinstance(mode, CoherentSelective):
        raise ValueError("rate-keyed detection supports flat channels only")
    rates = dcrk_rates(ne)
    chirps = np.atleast_2d(chirps)
    if chirps.shape[-1] != p.n:
        raise ValueError(f"expected chirps of {p.n} samples, got {chirps.shape[-1]}")
    batch = chirps.shape[0]
    # metric cube: (B, P, N); joint argmax over the last two axes, row-major,
    # so ties break toward the lowest (rate index, frequency bin) pair
    metrics = np.empty((batch, len(rates), p.n))
    for row, rate in enumerate(rates):
        metrics[:, row, :] = _metric_matrix(chirps, rate, mode)
    flat = metrics.reshape(batch, -1)
    winners, best, margin = _argmax_with_margin(flat)
    rate_idx, k_hat = np.divmod(winners, p.n)
    rate_hat = np.asarray(rates)[rate_idx]
    return k_hat, rate_hat, best, margin


def dcrk_demod(
    y: np.ndarray, p: ChirpParams, ne: int, mode: DetectorMode
) -> DcrkDecision:
    """Demodulate one received rate-keyed chirp."""
    k, rate, metric, margin = dcrk_demod_batch(y[np.newaxis, :], p, ne, mode)
    return DcrkDecision(int(k[0]), int(rate[0]), float(metric[0]), float(margin[0]))
