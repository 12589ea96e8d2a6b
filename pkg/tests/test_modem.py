import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fso_mlsd.modem import (
    PamScheme,
    SymbolFrame,
    gray_decode,
    gray_encode,
    gray_table,
    min_distance,
    symbol_bit_errors,
    transmit,
)


class TestMinDistance:
    def test_binary(self):
        assert min_distance(1.0, 2) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_quaternary(self):
        assert min_distance(1.0, 4) == pytest.approx(math.sqrt(12.0 / 21.0), rel=1e-12)

    @pytest.mark.parametrize("m_order", [2, 4, 8])
    def test_average_energy_identity(self, m_order):
        # mean over levels of (2d m)^2 equals Eb log2 M
        eb = 1.7
        two_d = min_distance(eb, m_order)
        levels = np.arange(m_order)
        avg = np.mean((two_d * levels) ** 2)
        assert avg == pytest.approx(eb * math.log2(m_order), rel=1e-12)

    def test_invalid_m(self):
        for bad in (1, 3, 6, 0):
            with pytest.raises(ValueError):
                min_distance(1.0, bad)


class TestGray:
    def test_m4_mapping(self):
        # levels 0..3 carry patterns 00, 01, 11, 10
        assert gray_table(4) == (0b00, 0b01, 0b11, 0b10)

    @pytest.mark.parametrize("m_order", [2, 4, 8])
    def test_round_trip(self, m_order):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 120 * int(math.log2(m_order)))
        assert np.array_equal(gray_decode(gray_encode(bits, m_order), m_order), bits)

    def test_adjacent_hamming_distance_m8(self):
        table = gray_table(8)
        for m in range(7):
            assert bin(table[m] ^ table[m + 1]).count("1") == 1

    def test_out_of_range_symbol(self):
        with pytest.raises(ValueError):
            gray_decode([4], 4)

    def test_bit_length_not_divisible(self):
        with pytest.raises(ValueError):
            gray_encode([0, 1, 1], 4)

    @given(st.integers(min_value=1, max_value=3).map(lambda k: 2**k),
           st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50)
    def test_round_trip_property(self, m_order, seed):
        rng = np.random.default_rng(seed)
        syms = rng.integers(0, m_order, 40)
        assert np.array_equal(gray_encode(gray_decode(syms, m_order), m_order), syms)


class TestSymbolBitErrors:
    def test_adjacent_error_is_one_bit(self):
        assert symbol_bit_errors([1], [2], 4) == 1

    def test_identical(self):
        assert symbol_bit_errors([0, 1, 2, 3], [0, 1, 2, 3], 4) == 0


class TestTransmit:
    def test_noiseless_limit(self):
        scheme = PamScheme(4, 1.0, 1e-300)
        rng = np.random.default_rng(0)
        m = np.array([0, 1, 2, 3])
        r = transmit(m, 0.5, scheme, rng)
        np.testing.assert_allclose(r, scheme.two_d * 0.5 * m, atol=1e-12)

    def test_noise_variance(self):
        scheme = PamScheme(2, 1.0, 0.8)
        rng = np.random.default_rng(1)
        m = rng.integers(0, 2, 1_000_000)
        n = transmit(m, 1.0, scheme, rng) - scheme.two_d * m
        var = n.var(ddof=1)
        se = var * math.sqrt(2.0 / (n.size - 1))
        assert abs(var - 0.4) < 3 * se

    def test_all_zero_symbols_pure_noise(self):
        scheme = PamScheme(4, 1.0, 1.0)
        rng = np.random.default_rng(2)
        r = transmit(np.zeros(200_000, dtype=int), 0.9, scheme, rng)
        assert abs(r.mean()) < 4 * math.sqrt(0.5) / math.sqrt(r.size)

    def test_noise_whiteness(self):
        scheme = PamScheme(2, 1.0, 1.0)
        rng = np.random.default_rng(5)
        n = transmit(np.zeros(500_000, dtype=int), 1.0, scheme, rng)
        rho1 = np.corrcoef(n[:-1], n[1:])[0, 1]
        assert abs(rho1) < 4.0 / math.sqrt(n.size)


class TestSchemeValidation:
    def test_frame_symbols(self):
        frame = SymbolFrame(pilots=np.array([3, 3]), data=np.array([0, 1]), gain=0.5)
        assert np.array_equal(frame.symbols, [3, 3, 0, 1])

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            PamScheme(3, 1.0, 1.0)
        with pytest.raises(ValueError):
            PamScheme(4, -1.0, 1.0)
        with pytest.raises(ValueError):
            PamScheme(4, 1.0, 0.0)
