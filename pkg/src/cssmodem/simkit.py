"""Monte Carlo link engine: BER/SER sweeps plus throughput and energy metrics.

Every trial runs the full pipeline: draw payload bits, build the frame, push
it through the channel, estimate the channel from the preamble when the
detector is coherent, demodulate the payload, and count symbol and bit
errors. Each sweep point accumulates frames until it has seen ``min_errors``
symbol errors or ``max_frames`` frames.

Reproducibility: the RNG for frame ``f`` of point ``p`` is seeded from the
tuple ``(seed, p, f)``, so results are bit-identical regardless of execution
order or worker count, and distinct points and frames use independent
streams.

Conventions: SNR is per-sample transmit power ``es/n`` over the noise
variance, with channels normalized to unit average gain; Eb/N0 counts the
``n_b`` payload bits carried per chirp, so the two axes differ by the fixed
offset ``10*log10(n / n_b)``. Cyclic prefix samples and preamble chirps are
treated as overhead and carry no data energy in either definition.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chanest import ls_flat, ls_selective
from .channel import (
    FadingSpec,
    NoiseSpec,
    apply_channel,
    awgn,
    doppler_from_mobility,
    find_profile,
    load_profile,
    realize_channel,
)
from .chirps import ChirpParams
from .framing import (
    FrameConfig,
    FramePayload,
    Scheme,
    bits_from_arrays,
    build_frame,
    parse_frame,
)
from .modems import (
    CoherentFlat,
    CoherentSelective,
    NonCoherent,
    css_demod_batch,
    dcrk_demod_batch,
    iqcss_demod_batch,
)

CHANNEL_KINDS = ("awgn", "flat", "tu12")


def spreading_gain_db(sf: int) -> float:
    """Processing gain 10*log10(n/sf) of a length-2^sf chirp."""
    return 10.0 * math.log10((1 << sf) / sf)


def snr_axis_convert(value_db: float, direction: str, sf: int, n_b: int) -> float:
    """Convert between the SNR and Eb/N0 axes.

    ``Eb/N0 = SNR + 10*log10(n / n_b)`` in dB, where ``n_b`` is the number
    of payload bits carried per chirp.
    """
    offset = 10.0 * math.log10((1 << sf) / n_b)
    if direction == "snr_to_ebn0":
        return value_db + offset
    if direction == "ebn0_to_snr":
        return value_db - offset
    raise ValueError(f"direction must be snr_to_ebn0 or ebn0_to_snr, got {direction!r}")


def throughput(n_b: int, b_hz: float, n: int, ber: float) -> float:
    """Effective throughput ``n_b * b_hz / n * (1 - ber)`` in bits/s."""
    if not 0 <= ber <= 1:
        raise ValueError(f"bit error ratio must be in [0, 1], got {ber}")
    return n_b * b_hz / n * (1.0 - ber)


def energy_per_useful_bit(es: float, n_b: int, ber: float) -> float:
    """Energy spent per correctly received bit, ``es / (n_b * (1 - ber))``."""
    if not 0 <= ber < 1:
        raise ValueError(f"bit error ratio must be in [0, 1); got {ber}")
    return es / (n_b * (1.0 - ber))


@dataclass(frozen=True)
class SweepSpec:
    """Configuration of one BER/SER sweep."""

    scheme: Scheme
    sf: int
    points_db: tuple[float, ...]
    ne: int | None = None
    channel: str = "awgn"
    axis: str = "snr"  # snr | ebn0
    min_errors: int = 200
    max_frames: int = 200_000
    seed: int = 0
    coherent: str = "auto"  # auto | on | off
    estimator: str = "auto"  # auto | known | ls
    block_fading: bool = False
    n_cp: int | None = None  # None: 16 for selective coherent runs, else 0
    payload_chirps: int = 30
    preamble_up: int = 10
    sfd_down: int = 2
    es: float = 1.0
    bandwidth_hz: float = 250e3
    carrier_hz: float = 863e6
    speed_kmh: float = 3.0
    l_taps: int | None = None  # None: true channel span
    profile_dir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "points_db", tuple(float(x) for x in self.points_db))
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"channel must be one of {CHANNEL_KINDS}")
        if self.axis not in ("snr", "ebn0"):
            raise ValueError("axis must be 'snr' or 'ebn0'")
        if self.min_errors < 1 or self.max_frames < 1:
            raise ValueError("stop rule needs min_errors >= 1 and max_frames >= 1")
        if self.coherent not in ("auto", "on", "off"):
            raise ValueError("coherent must be auto, on or off")
        if self.estimator not in ("auto", "known", "ls"):
            raise ValueError("estimator must be auto, known or ls")
        if self.scheme == Scheme.IQCSS and self.coherent == "off":
            raise ValueError("IQ scheme cannot run non-coherent")
        if self.scheme == Scheme.DCRK and self.channel == "tu12" and self.coherent == "on":
            raise ValueError("rate-keyed coherent detection is flat-channel only")

    # -- resolved knobs ----------------------------------------------------

    @property
    def coherent_resolved(self) -> bool:
        if self.coherent == "auto":
            return self.scheme == Scheme.IQCSS
        return self.coherent == "on"

    @property
    def estimator_resolved(self) -> str:
        if self.estimator == "auto":
            return "known" if self.channel == "awgn" else "ls"
        return self.estimator

    @property
    def n_cp_resolved(self) -> int:
        if self.n_cp is not None:
            return self.n_cp
        return 16 if (self.channel == "tu12" and self.coherent_resolved) else 0

    @property
    def bits_per_chirp(self) -> int:
        return self.frame_config.bits_per_chirp

    @property
    def frame_config(self) -> FrameConfig:
        return FrameConfig(
            scheme=self.scheme,
            sf=self.sf,
            ne=self.ne,
            preamble_up=self.preamble_up,
            sfd_down=self.sfd_down,
            payload_chirps=self.payload_chirps,
            n_cp=self.n_cp_resolved,
        )

    @property
    def chirp_params(self) -> ChirpParams:
        return ChirpParams(sf=self.sf, rate=1, es=self.es)

    def sigma2_at(self, point_db: float) -> float:
        lin = 10.0 ** (point_db / 10.0)
        if self.axis == "snr":
            return (self.es / (1 << self.sf)) / lin
        return self.es / (self.bits_per_chirp * lin)

    def fading(self) -> FadingSpec | None:
        if self.channel == "awgn":
            return None
        doppler = 0.0 if self.block_fading else doppler_from_mobility(
            self.speed_kmh, self.carrier_hz
        )
        if self.channel == "flat":
            return FadingSpec.flat(doppler, self.bandwidth_hz)
        path = find_profile("tu12", self.profile_dir)
        return load_profile(path, self.bandwidth_hz, doppler)


@dataclass
class PointResult:
    point_db: float
    frames: int
    symbols: int
    bits: int
    symbol_errors: int
    bit_errors: int

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list[PointResult] = field(default_factory=list)

    def ber_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([p.point_db for p in self.points]),
            np.array([p.ber for p in self.points]),
        )

    def ser_curve(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([p.point_db for p in self.points]),
            np.array([p.ser for p in self.points]),
        )


# ---------------------------------------------------------------------------
# Per-frame machinery


def _chirp_spans(cfg: FrameConfig) -> np.ndarray:
    """Data-sample index ranges of the payload chirps within the frame."""
    first = (cfg.preamble_up + cfg.sfd_down) * cfg.chirp_len
    starts = first + np.arange(cfg.payload_chirps) * cfg.chirp_len + cfg.n_cp
    return starts


def _known_gains(real, cfg: FrameConfig) -> np.ndarray:
    """Per-payload-chirp tap averages of the true realization, (B, span)."""
    starts = _chirp_spans(cfg)
    n = cfg.n
    out = np.empty((cfg.payload_chirps, real.span), dtype=np.complex128)
    for j, s in enumerate(starts):
        out[j] = real.taps[:, s : s + n].mean(axis=1)
    return out


def _detector_mode(spec: SweepSpec, preamble, real, cfg: FrameConfig):
    """Resolve the per-frame detector mode (possibly per-chirp vectorized)."""
    if not spec.coherent_resolved:
        return NonCoherent()
    if spec.channel == "awgn":
        return CoherentFlat(1.0 + 0.0j)
    if spec.channel == "flat":
        if spec.estimator_resolved == "known":
            return CoherentFlat(_known_gains(real, cfg)[:, 0])
        return CoherentFlat(ls_flat(preamble))
    # selective
    if spec.estimator_resolved == "known":
        return CoherentSelective(_known_gains(real, cfg))
    l_taps = spec.l_taps if spec.l_taps is not None else real.span
    return CoherentSelective(ls_selective(preamble, l_taps))


def _demod_payload(spec: SweepSpec, payload_chirps, params, mode, ne):
    """Demodulate the payload matrix; returns symbol arrays like the sent ones."""
    if spec.scheme == Scheme.LORA:
        k_hat, _, _ = css_demod_batch(payload_chirps, params, mode)
        return (k_hat,)
    if spec.scheme == Scheme.IQCSS:
        ki, kq = iqcss_demod_batch(payload_chirps, params, mode)
        return (ki, kq)
    k_hat, rate_hat, _, _ = dcrk_demod_batch(payload_chirps, params, ne, mode)
    return (k_hat, rate_hat)


def _count_symbol_errors(scheme: Scheme, sent, decided) -> tuple[int, int]:
    """Returns (symbol errors, symbols counted) for one frame.

    The IQ scheme carries two independent frequency symbols per chirp and
    both count; the rate-keyed scheme's (k, rate) pair is a single joint
    symbol.
    """
    if scheme == Scheme.IQCSS:
        errs = int(np.count_nonzero(sent[0] != decided[0])) + int(
            np.count_nonzero(sent[1] != decided[1])
        )
        return errs, 2 * sent[0].size
    if scheme == Scheme.DCRK:
        wrong = (sent[0] != decided[0]) | (sent[1] != decided[1])
        return int(np.count_nonzero(wrong)), sent[0].size
    return int(np.count_nonzero(sent[0] != decided[0])), sent[0].size


def run_point(spec: SweepSpec, point_index: int) -> PointResult:
    """Accumulate frames for one sweep point until the stop rule fires."""
    point_db = spec.points_db[point_index]
    sigma2 = spec.sigma2_at(point_db)
    cfg = spec.frame_config
    params = spec.chirp_params
    fading = spec.fading()
    noise = NoiseSpec(sigma2)
    ne = spec.ne

    result = PointResult(point_db, 0, 0, 0, 0, 0)
    for frame_index in range(spec.max_frames):
        if result.symbol_errors >= spec.min_errors:
            break
        rng = np.random.default_rng((spec.seed, point_index, frame_index))
        payload = FramePayload.random(cfg, rng)
        tx = build_frame(cfg, payload, params)
        if fading is None:
            real = None
            rx = awgn(tx, noise, rng)
        else:
            real = realize_channel(fading, len(tx), rng, block=spec.block_fading)
            rx = awgn(apply_channel(tx, real), noise, rng)
        preamble, payload_chirps = parse_frame(rx, cfg, params)
        mode = _detector_mode(spec, preamble, real, cfg)
        decided = _demod_payload(spec, payload_chirps, params, mode, ne)
        sym_errs, syms = _count_symbol_errors(spec.scheme, payload.arrays, decided)
        bits_hat = bits_from_arrays(cfg, decided)
        result.frames += 1
        result.symbols += syms
        result.bits += payload.bits.size
        result.symbol_errors += sym_errs
        result.bit_errors += int(np.count_nonzero(bits_hat != payload.bits))
    return result


def _run_point_star(args: tuple[SweepSpec, int]) -> PointResult:
    return run_point(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every point of the sweep; points are independent and may run in
    parallel worker processes without changing the result."""
    if not spec.points_db:
        raise ValueError("sweep needs at least one point")
    if workers > 1 and len(spec.points_db) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(
                pool.map(_run_point_star, [(spec, i) for i in range(len(spec.points_db))])
            )
    else:
        points = [run_point(spec, i) for i in range(len(spec.points_db))]
    return SweepResult(spec=spec, points=points)
