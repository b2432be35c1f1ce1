"""Chirp spread spectrum modems and Monte Carlo link simulation.

Three modulation schemes over one set of chirp primitives:

* frequency-keyed CSS with non-coherent or coherent ML detection,
* IQ-multiplexed CSS doubling the bits per chirp (coherent only), and
* discrete chirp-rate keying adding rate bits on top of the frequency
  symbol (non-coherent),

plus AWGN / flat-Rayleigh / tapped-delay-line channels, least-squares channel
estimation from the frame preamble, and a reproducible sweep engine for
BER/SER, throughput, and energy-per-bit measurements.
"""

from .backend import BACKEND_NAME, COMPILED
from .chanest import PreambleObservation, ls_flat, ls_selective
from .channel import (
    ChannelRealization,
    FadingSpec,
    NoiseSpec,
    add_cp,
    apply_channel,
    awgn,
    doppler_from_mobility,
    find_profile,
    load_profile,
    realize_channel,
    remove_cp,
)
from .chirps import (
    ChirpParams,
    circular_shift,
    cross_rate_inner_product,
    dechirp,
    inverse_spectrum,
    raw_chirp,
    spectrum,
)
from .framing import FrameConfig, FramePayload, Scheme, build_frame, parse_frame
from .modems import (
    CoherentFlat,
    CoherentSelective,
    CssDecision,
    DcrkDecision,
    DcrkSymbol,
    IqcssDecision,
    IqcssSymbol,
    NonCoherent,
    bits_to_symbol,
    css_demod,
    css_modulate,
    dcrk_demod,
    dcrk_modulate,
    dcrk_rates,
    iqcss_demod,
    iqcss_modulate,
    rate_map,
    rate_unmap,
    symbol_to_bits,
)
from .simkit import (
    PointResult,
    SweepResult,
    SweepSpec,
    energy_per_useful_bit,
    run_sweep,
    snr_axis_convert,
    spreading_gain_db,
    throughput,
)

__version__ = "0.1.0"
