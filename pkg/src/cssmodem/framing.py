"""Packet assembly and genie-aided parsing.

A frame is ``preamble_up`` rate-1 up-chirps, then ``sfd_down`` down-chirps
marking the start of data, then the modulated payload chirps. When a cyclic
prefix is configured it is applied uniformly to every chirp in the frame.
Synchronization is assumed: the parser knows the frame layout and simply
slices it back apart, handing the preamble to the channel estimators and the
payload to the demodulators.

Bit packing: each chirp carries one bit-word, least-significant bit first for
frequency symbols. The IQ scheme packs the in-phase word before the
quadrature word; the rate-keyed scheme packs the frequency word first and
then the rate word (rate words read most-significant bit first, matching the
printed rate table).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .chanest import PreambleObservation
from .chirps import ChirpParams, raw_chirp
from .modems import (
    DcrkSymbol,
    IqcssSymbol,
    css_modulate,
    css_modulate_batch,
    dcrk_modulate_batch,
    dcrk_rates,
    iqcss_modulate_batch,
)


class Scheme(str, Enum):
    LORA = "lora"
    IQCSS = "iqcss"
    DCRK = "dcrk"


@dataclass(frozen=True)
class FrameConfig:
    scheme: Scheme
    sf: int
    ne: int | None = None
    preamble_up: int = 10
    sfd_down: int = 2
    payload_chirps: int = 30
    n_cp: int = 0

    def __post_init__(self) -> None:
        if self.scheme == Scheme.DCRK:
            if self.ne not in (1, 2, 3):
                raise ValueError("rate-keyed frames need ne in {1, 2, 3}")
        if min(self.preamble_up, self.sfd_down, self.payload_chirps) < 0:
            raise ValueError("chirp counts must be nonnegative")
        if not 0 <= self.n_cp < (1 << self.sf):
            raise ValueError("cyclic prefix must be shorter than the chirp")

    @property
    def n(self) -> int:
        return 1 << self.sf

    @property
    def bits_per_chirp(self) -> int:
        if self.scheme == Scheme.LORA:
            return self.sf
        if self.scheme == Scheme.IQCSS:
            return 2 * self.sf
        return self.sf + int(self.ne)  # type: ignore[arg-type]

    @property
    def chirp_len(self) -> int:
        return self.n + self.n_cp

    @property
    def num_chirps(self) -> int:
        return self.preamble_up + self.sfd_down + self.payload_chirps

    @property
    def frame_len(self) -> int:
        return self.num_chirps * self.chirp_len


def _lsb_weights(width: int) -> np.ndarray:
    return np.int64(1) << np.arange(width, dtype=np.int64)


def _msb_weights(width: int) -> np.ndarray:
    return np.int64(1) << np.arange(width - 1, -1, -1, dtype=np.int64)


@dataclass
class FramePayload:
    """Payload bit stream plus its per-chirp symbol arrays.

    ``arrays`` is scheme dependent: ``(k,)`` for plain CSS, ``(ki, kq)`` for
    the IQ scheme, ``(k, rate)`` for rate keying. The ``symbols`` property
    materializes the per-chirp symbol objects on demand.
    """

    scheme: Scheme
    bits: np.ndarray = field(repr=False)
    arrays: tuple[np.ndarray, ...] = field(repr=False)

    @classmethod
    def from_bits(cls, cfg: FrameConfig, bits: np.ndarray) -> "FramePayload":
        bits = np.asarray(bits, dtype=np.int64)
        expected = cfg.payload_chirps * cfg.bits_per_chirp
        if bits.size != expected:
            raise ValueError(f"payload needs {expected} bits, got {bits.size}")
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("payload bits must be 0/1")
        words = bits.reshape(cfg.payload_chirps, cfg.bits_per_chirp)
        if cfg.scheme == Scheme.LORA:
            arrays = (words @ _lsb_weights(cfg.sf),)
        elif cfg.scheme == Scheme.IQCSS:
            arrays = (
                words[:, : cfg.sf] @ _lsb_weights(cfg.sf),
                words[:, cfg.sf :] @ _lsb_weights(cfg.sf),
            )
        else:
            ne = int(cfg.ne)  # type: ignore[arg-type]
            rate_alphabet = np.asarray(dcrk_rates(ne))
            idx = words[:, cfg.sf :] @ _msb_weights(ne)
            arrays = (words[:, : cfg.sf] @ _lsb_weights(cfg.sf), rate_alphabet[idx])
        return cls(scheme=cfg.scheme, bits=bits.copy(), arrays=arrays)

    @classmethod
    def random(cls, cfg: FrameConfig, rng: np.random.Generator) -> "FramePayload":
        n_bits = cfg.payload_chirps * cfg.bits_per_chirp
        return cls.from_bits(cfg, rng.integers(0, 2, size=n_bits, dtype=np.int64))

    @property
    def symbols(self) -> list:
        if self.scheme == Scheme.LORA:
            return [int(k) for k in self.arrays[0]]
        if self.scheme == Scheme.IQCSS:
            return [IqcssSymbol(int(a), int(b)) for a, b in zip(*self.arrays)]
        return [DcrkSymbol(int(k), int(m)) for k, m in zip(*self.arrays)]


def _arrays_from_symbols(cfg: FrameConfig, symbols: list) -> tuple[np.ndarray, ...]:
    if cfg.scheme == Scheme.LORA:
        return (np.asarray([int(s) for s in symbols], dtype=np.int64),)
    if cfg.scheme == Scheme.IQCSS:
        return (
            np.asarray([s.ki for s in symbols], dtype=np.int64),
            np.asarray([s.kq for s in symbols], dtype=np.int64),
        )
    return (
        np.asarray([s.k for s in symbols], dtype=np.int64),
        np.asarray([s.rate for s in symbols], dtype=np.int64),
    )


def bits_from_arrays(cfg: FrameConfig, arrays: tuple[np.ndarray, ...]) -> np.ndarray:
    """Pack per-chirp symbol arrays back into the frame bit stream."""
    chirps = arrays[0].size
    words = np.empty((chirps, cfg.bits_per_chirp), dtype=np.int64)
    if cfg.scheme == Scheme.LORA:
        words[:] = (arrays[0][:, None] >> np.arange(cfg.sf)) & 1
    elif cfg.scheme == Scheme.IQCSS:
        words[:, : cfg.sf] = (arrays[0][:, None] >> np.arange(cfg.sf)) & 1
        words[:, cfg.sf :] = (arrays[1][:, None] >> np.arange(cfg.sf)) & 1
    else:
        ne = int(cfg.ne)  # type: ignore[arg-type]
        alphabet = dcrk_rates(ne)
        idx = np.searchsorted(alphabet, arrays[1])
        words[:, : cfg.sf] = (arrays[0][:, None] >> np.arange(cfg.sf)) & 1
        words[:, cfg.sf :] = (idx[:, None] >> np.arange(ne - 1, -1, -1)) & 1
    return words.reshape(-1)


def symbols_to_bits(cfg: FrameConfig, symbols: list) -> np.ndarray:
    """Re-pack decided symbols into the frame bit stream (inverse mapping)."""
    if not symbols:
        return np.empty(0, dtype=np.int64)
    return bits_from_arrays(cfg, _arrays_from_symbols(cfg, symbols))


def modulate_payload(cfg: FrameConfig, payload: FramePayload, p: ChirpParams) -> np.ndarray:
    """Modulate the payload to a (payload_chirps, N) waveform matrix."""
    if cfg.scheme == Scheme.LORA:
        return css_modulate_batch(payload.arrays[0], p)
    if cfg.scheme == Scheme.IQCSS:
        return iqcss_modulate_batch(payload.arrays[0], payload.arrays[1], p)
    return dcrk_modulate_batch(payload.arrays[0], payload.arrays[1], p)


def reference_upchirp(p: ChirpParams) -> np.ndarray:
    """The transmitted preamble chirp: symbol 0 on the rate-1 up-chirp."""
    return css_modulate(0, p)


def build_frame(cfg: FrameConfig, payload: FramePayload, p: ChirpParams) -> np.ndarray:
    """Assemble the full baseband frame as one contiguous waveform."""
    if payload.arrays[0].size != cfg.payload_chirps:
        raise ValueError(
            f"payload has {payload.arrays[0].size} chirps, config wants {cfg.payload_chirps}"
        )
    if p.sf != cfg.sf:
        raise ValueError("chirp parameters and frame config disagree on sf")
    grid = np.empty((cfg.num_chirps, cfg.chirp_len), dtype=np.complex128)
    body = grid[:, cfg.n_cp :]
    body[: cfg.preamble_up] = reference_upchirp(p)
    body[cfg.preamble_up : cfg.preamble_up + cfg.sfd_down] = p.amplitude * raw_chirp(
        p.n, -1
    )
    body[cfg.preamble_up + cfg.sfd_down :] = modulate_payload(cfg, payload, p)
    if cfg.n_cp > 0:
        grid[:, : cfg.n_cp] = body[:, -cfg.n_cp :]
    return grid.reshape(-1)


def parse_frame(
    y: np.ndarray, cfg: FrameConfig, p: ChirpParams
) -> tuple[PreambleObservation, np.ndarray]:
    """Slice a received frame back into preamble and payload chirps.

    Returns the CP-stripped preamble as a :class:`PreambleObservation` and
    the CP-stripped payload chirps as a (payload_chirps, N) matrix. The SFD
    down-chirps are generated on transmit but not consumed here.
    """
    if len(y) != cfg.frame_len:
        raise ValueError(f"frame has {len(y)} samples, expected {cfg.frame_len}")
    grid = np.asarray(y).reshape(cfg.num_chirps, cfg.chirp_len)[:, cfg.n_cp :]
    preamble = PreambleObservation(
        chirps=grid[: cfg.preamble_up], reference=reference_upchirp(p)
    )
    payload = grid[cfg.preamble_up + cfg.sfd_down :]
    return preamble, payload
