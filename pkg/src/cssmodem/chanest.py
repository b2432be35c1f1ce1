"""Least-squares channel estimation from the synchronization preamble.

Both estimators use only the known up-chirps at the head of the frame. The
flat estimator is the scalar LS solution over the concatenated preamble. The
selective estimator averages the preamble chirps and correlates against
circular shifts of the reference chirp; because those shifts are mutually
orthogonal the correlator equals the full pseudo-inverse solution at a tiny
fraction of the cost, and it runs in O(N log N) via the FFT.

Scaling note: the shift-correlation matrix C built from the reference chirp
satisfies C^H C = E * I where E is the reference chirp energy (E = N for a
unit-magnitude chirp), so the correlator output is divided by E to make the
noiseless estimate equal the true taps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PreambleObservation:
    """Received preamble up-chirps (CP removed) plus the known reference.

    ``chirps`` has shape (P, N); ``reference`` is the transmitted up-chirp
    including its amplitude.
    """

    chirps: np.ndarray
    reference: np.ndarray

    def __post_init__(self) -> None:
        self.chirps = np.atleast_2d(np.asarray(self.chirps, dtype=np.complex128))
        self.reference = np.asarray(self.reference, dtype=np.complex128)
        if self.chirps.shape[0] < 1:
            raise ValueError("need at least one preamble chirp")
        if self.chirps.shape[1] != self.reference.shape[0]:
            raise ValueError("preamble chirps and reference must share a length")

    @property
    def num_chirps(self) -> int:
        return self.chirps.shape[0]


def ls_flat(obs: PreambleObservation) -> complex:
    """Scalar LS gain estimate over the concatenated preamble.

    Closed form ``x^H y / x^H x`` with ``x`` the reference repeated across
    the P preamble chirps. Unbiased; error variance sigma2 / (P * E) for
    reference chirp energy E.
    """
    energy = float(np.sum(np.abs(obs.reference) ** 2))
    if energy == 0:
        raise ValueError("reference chirp has zero energy")
    num = np.sum(np.conj(obs.reference)[np.newaxis, :] * obs.chirps)
    return complex(num / (obs.num_chirps * energy))


def ls_selective(obs: PreambleObservation, l_taps: int) -> np.ndarray:
    """Impulse-response LS estimate from the averaged preamble.

    Averages the P chirps, circularly cross-correlates against the reference
    (the C^H product, computed spectrally), rescales by the reference energy,
    and keeps the first ``l_taps`` entries. Requires the preamble chirps to
    have carried a cyclic prefix longer than the channel memory.
    """
    n = obs.reference.shape[0]
    if not 1 <= l_taps <= n:
        raise ValueError(f"tap count must be in [1, {n}], got {l_taps}")
    energy = float(np.sum(np.abs(obs.reference) ** 2))
    if energy == 0:
        raise ValueError("reference chirp has zero energy")
    y_bar = obs.chirps.mean(axis=0)
    corr = np.fft.ifft(np.conj(np.fft.fft(obs.reference)) * np.fft.fft(y_bar))
    return corr[:l_taps] / energy
