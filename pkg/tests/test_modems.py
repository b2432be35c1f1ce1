"""Modulator/demodulator tests for the three schemes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cssmodem.chirps import ChirpParams, cross_rate_inner_product, raw_chirp
from cssmodem.modems import (
    CoherentFlat,
    CoherentSelective,
    DcrkSymbol,
    IqcssSymbol,
    NonCoherent,
    bits_to_symbol,
    css_demod,
    css_demod_batch,
    css_modulate,
    css_modulate_batch,
    dcrk_demod,
    dcrk_modulate,
    dcrk_rates,
    iqcss_demod,
    iqcss_modulate,
    rate_map,
    rate_unmap,
    symbol_to_bits,
)

P6 = ChirpParams(sf=6)
P9 = ChirpParams(sf=9)


def circulant(first_col):
    n = len(first_col)
    out = np.empty((n, n), dtype=complex)
    for j in range(n):
        out[:, j] = np.roll(first_col, j)
    return out


class TestBitWords:
    def test_known_words(self):
        assert bits_to_symbol([0, 0, 0, 0, 0, 0]) == 0
        assert bits_to_symbol([1, 0, 0, 0, 0, 0]) == 1  # bits[0] is the LSB
        assert bits_to_symbol([1, 1, 1, 1, 1, 1]) == 63

    def test_symbol_to_bits_edges(self):
        np.testing.assert_array_equal(symbol_to_bits(0, 6), np.zeros(6))
        np.testing.assert_array_equal(symbol_to_bits(63, 6), np.ones(6))

    def test_roundtrip_exhaustive_sf6(self):
        for k in range(64):
            assert bits_to_symbol(symbol_to_bits(k, 6)) == k

    def test_rejects_bad_words(self):
        with pytest.raises(ValueError):
            bits_to_symbol([0, 2, 0])
        with pytest.raises(ValueError):
            symbol_to_bits(64, 6)


class TestCssModem:
    def test_symbol_zero_is_scaled_upchirp(self):
        np.testing.assert_allclose(
            css_modulate(0, P6), P6.amplitude * raw_chirp(64, 1), atol=1e-15
        )

    def test_constant_per_sample_power(self):
        for k in (0, 17, 63):
            x = css_modulate(k, P6)
            np.testing.assert_allclose(np.abs(x) ** 2, P6.es / P6.n, rtol=1e-12)

    def test_matches_shifted_chirp_up_to_phase(self):
        n = 64
        c = raw_chirp(n, 1)
        for k in range(n):
            shifted = P6.amplitude * np.roll(c, -k)
            extra = np.exp(1j * np.pi * (k * k % (2 * n)) / n)
            np.testing.assert_allclose(css_modulate(k, P6), shifted / extra, atol=1e-12)

    def test_total_energy(self):
        for k in (0, 31, 63):
            x = css_modulate(k, P6)
            np.testing.assert_allclose(np.sum(np.abs(x) ** 2), P6.es, rtol=1e-9)

    @pytest.mark.parametrize("mode", [NonCoherent(), CoherentFlat(1.0)])
    def test_noiseless_roundtrip_exhaustive_sf6(self, mode):
        for k in range(64):
            assert css_demod(css_modulate(k, P6), P6, mode).k == k

    def test_noiseless_roundtrip_sampled_sf9(self):
        rng = np.random.default_rng(0)
        ks = rng.integers(0, 512, size=400)
        x = css_modulate_batch(ks, P9)
        got, _, _ = css_demod_batch(x, P9, NonCoherent())
        np.testing.assert_array_equal(got, ks)

    def test_pure_rotation_channel(self):
        k = 23
        y = 1j * css_modulate(k, P6)
        assert css_demod(y, P6, NonCoherent()).k == k
        assert css_demod(y, P6, CoherentFlat(1j)).k == k
        # a wrong gain collapses the real-part peak to numerical noise, so
        # the coherent metric no longer carries a confident decision
        mismatched = css_demod(y, P6, CoherentFlat(1.0))
        confident = css_demod(y, P6, CoherentFlat(1j))
        assert mismatched.metric < 1e-9 * confident.metric

    def test_selective_two_tap_all_symbols(self):
        taps = np.array([1.0, 0.5])
        h_pad = np.zeros(64, complex)
        h_pad[:2] = taps
        h_mat = circulant(h_pad)
        mode = CoherentSelective(taps)
        for k in range(64):
            y = h_mat @ css_modulate(k, P6)  # CP-equivalent circular channel
            assert css_demod(y, P6, mode).k == k

    def test_noncoherent_phase_invariance(self):
        rng = np.random.default_rng(1)
        y = css_modulate(9, P6) + 0.3 * (
            rng.standard_normal(64) + 1j * rng.standard_normal(64)
        )
        base = css_demod(y, P6, NonCoherent()).k
        for theta in np.linspace(0, 2 * np.pi, 8, endpoint=False):
            assert css_demod(np.exp(1j * theta) * y, P6, NonCoherent()).k == base

    def test_margin_positive_noiseless(self):
        d = css_demod(css_modulate(5, P6), P6, NonCoherent())
        assert d.margin > 0

    def test_bad_length_rejected(self):
        with pytest.raises(ValueError):
            css_demod(np.ones(32, complex), P6, NonCoherent())


@given(
    theta=st.floats(min_value=0.0, max_value=2 * np.pi),
    k=st.integers(min_value=0, max_value=63),
)
@settings(max_examples=25, deadline=None)
def test_noncoherent_global_phase_property(theta, k):
    y = css_modulate(k, P6)
    assert css_demod(np.exp(1j * theta) * y, P6, NonCoherent()).k == k


@given(
    re=st.floats(min_value=-3, max_value=3),
    im=st.floats(min_value=-3, max_value=3),
    k=st.integers(min_value=0, max_value=63),
)
@settings(max_examples=25, deadline=None)
def test_coherent_joint_scaling_property(re, im, k):
    alpha = complex(re, im)
    if abs(alpha) < 1e-3:
        alpha = 1.0 + 0.5j
    rng = np.random.default_rng(k)
    h = complex(rng.standard_normal(), rng.standard_normal()) or 1.0
    y = h * css_modulate(k, P6) + 0.1 * (
        rng.standard_normal(64) + 1j * rng.standard_normal(64)
    )
    base = css_demod(y, P6, CoherentFlat(h)).k
    assert css_demod(alpha * y, P6, CoherentFlat(alpha * h)).k == base


class TestIqcssModem:
    def test_common_factor_when_equal(self):
        k = 12
        x = iqcss_modulate(IqcssSymbol(k, k), P6)
        expected = (
            np.sqrt(P6.es / (2 * P6.n))
            * (1 + 1j)
            * np.exp(2j * np.pi * k * np.arange(64) / 64)
            * raw_chirp(64, 1)
        )
        np.testing.assert_allclose(x, expected, atol=1e-12)

    def test_energy_exact_for_all_pairs(self):
        for ki in range(0, 64, 9):
            for kq in range(0, 64, 11):
                x = iqcss_modulate(IqcssSymbol(ki, kq), P6)
                np.testing.assert_allclose(np.sum(np.abs(x) ** 2), P6.es, rtol=1e-9)
        x = iqcss_modulate(IqcssSymbol(7, 7), P6)
        np.testing.assert_allclose(np.sum(np.abs(x) ** 2), P6.es, rtol=1e-9)

    def test_mean_per_sample_power(self):
        x = iqcss_modulate(IqcssSymbol(3, 40), P6)
        np.testing.assert_allclose(np.mean(np.abs(x) ** 2), P6.es / P6.n, rtol=1e-12)

    def test_spectrum_split_noiseless(self):
        mode = CoherentFlat(1.0)
        for ki in range(0, 64, 7):
            for kq in range(0, 64, 5):
                d = iqcss_demod(iqcss_modulate(IqcssSymbol(ki, kq), P6), P6, mode)
                assert (d.ki, d.kq) == (ki, kq)

    def test_known_flat_gain_equalized(self):
        h = 0.5 * np.exp(1j * np.pi / 3)
        d = iqcss_demod(h * iqcss_modulate(IqcssSymbol(33, 2), P6), P6, CoherentFlat(h))
        assert (d.ki, d.kq) == (33, 2)

    def test_never_swaps(self):
        mode = CoherentFlat(1.0)
        for a in range(0, 64, 5):
            for b in range(0, 64, 7):
                if a == b:
                    continue
                d = iqcss_demod(iqcss_modulate(IqcssSymbol(a, b), P6), P6, mode)
                assert (d.ki, d.kq) != (b, a)

    def test_noncoherent_rejected(self):
        x = iqcss_modulate(IqcssSymbol(1, 2), P6)
        with pytest.raises(ValueError):
            iqcss_demod(x, P6, NonCoherent())

    def test_backwards_compatible_with_plain_css(self):
        # the in-phase branch of the IQ receiver decodes a plain chirp symbol
        for k in range(0, 64, 3):
            y = css_modulate(k, P6)
            d = iqcss_demod(y, P6, CoherentFlat(1.0))
            assert d.ki == k


class TestRateKeying:
    def test_table_ne3(self):
        words = [
            ([0, 0, 0], -4), ([0, 0, 1], -3), ([0, 1, 0], -2), ([0, 1, 1], -1),
            ([1, 0, 0], 1), ([1, 0, 1], 2), ([1, 1, 0], 3), ([1, 1, 1], 4),
        ]
        for bits, rate in words:
            assert rate_map(bits) == rate
            np.testing.assert_array_equal(rate_unmap(rate, 3), bits)

    def test_table_ne2(self):
        assert rate_map([0, 0]) == -2
        assert rate_map([0, 1]) == -1
        assert rate_map([1, 0]) == 1
        assert rate_map([1, 1]) == 2

    def test_alphabets(self):
        assert dcrk_rates(1) == [-1, 1]
        assert dcrk_rates(2) == [-2, -1, 1, 2]
        assert dcrk_rates(3) == [-4, -3, -2, -1, 1, 2, 3, 4]
        with pytest.raises(ValueError):
            dcrk_rates(4)

    def test_rate_one_reduces_to_plain_css(self):
        for k in (0, 9, 63):
            np.testing.assert_array_equal(
                dcrk_modulate(DcrkSymbol(k, 1), P6), css_modulate(k, P6)
            )

    def test_down_chirp_symbol(self):
        np.testing.assert_allclose(
            dcrk_modulate(DcrkSymbol(0, -1), P6),
            P6.amplitude * raw_chirp(64, -1),
            atol=1e-15,
        )

    def test_per_sample_magnitude(self):
        for k, m in [(5, -2), (63, 4), (0, -4)]:
            x = dcrk_modulate(DcrkSymbol(k, m), P6)
            np.testing.assert_allclose(np.abs(x), P6.amplitude, rtol=1e-12)

    def test_noiseless_roundtrip_exhaustive_sf6_ne2(self):
        for k in range(64):
            for m in dcrk_rates(2):
                d = dcrk_demod(dcrk_modulate(DcrkSymbol(k, m), P6), P6, 2, NonCoherent())
                assert (d.k, d.rate) == (k, m)

    def test_flat_phase_rotation_noncoherent(self):
        x = dcrk_modulate(DcrkSymbol(17, -2), P6)
        d = dcrk_demod(np.exp(1.234j) * x, P6, 2, NonCoherent())
        assert (d.k, d.rate) == (17, -2)

    def test_coherent_flat_metric(self):
        h = 0.8 * np.exp(-0.7j)
        x = dcrk_modulate(DcrkSymbol(40, 2), P6)
        d = dcrk_demod(h * x, P6, 2, CoherentFlat(h))
        assert (d.k, d.rate) == (40, 2)

    def test_rate_one_decisions_match_plain_detector(self):
        for k in range(0, 64, 3):
            y = css_modulate(k, P6)
            d = dcrk_demod(y, P6, 2, NonCoherent())
            assert (d.k, d.rate) == (k, 1)
            assert css_demod(y, P6, NonCoherent()).k == d.k

    def test_winner_strictly_greatest_noiseless(self):
        # margin to the best wrong-rate bin follows the cross-rate bound
        norm_bound = max(
            cross_rate_inner_product(64, m1, m2)
            for m1 in dcrk_rates(2)
            for m2 in dcrk_rates(2)
            if m1 != m2
        )
        assert norm_bound < 64
        for k in (0, 21, 63):
            for m in dcrk_rates(2):
                d = dcrk_demod(dcrk_modulate(DcrkSymbol(k, m), P6), P6, 2, NonCoherent())
                assert d.margin > 0

    def test_selective_mode_rejected(self):
        x = dcrk_modulate(DcrkSymbol(1, 1), P6)
        with pytest.raises(ValueError):
            dcrk_demod(x, P6, 2, CoherentSelective(np.array([1.0, 0.5])))
