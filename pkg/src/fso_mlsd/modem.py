"""Gray-coded M-PAM mapping and the noisy IM/DD observation model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PamScheme",
    "SymbolFrame",
    "min_distance",
    "gray_table",
    "gray_encode",
    "gray_decode",
    "symbol_bit_errors",
    "transmit",
]


def _check_m(m_order: int) -> int:
    if m_order < 2 or (m_order & (m_order - 1)) != 0:
        raise ValueError(f"M must be a power of 2, >= 2; got {m_order}")
    return m_order


def min_distance(eb: float, m_order: int) -> float:
    """Minimum signal distance 2d of M-PAM for energy per bit eb (no fading)."""
    _check_m(m_order)
    if not eb > 0:
        raise ValueError("Eb must be positive")
    return math.sqrt(6.0 * eb * math.log2(m_order) / ((m_order - 1) * (2 * m_order - 1)))


@dataclass(frozen=True)
class PamScheme:
    """M-PAM with amplitude levels 0..M-1 spaced 2d, AWGN with variance N0/2."""

    m_order: int
    eb: float = 1.0
    n0: float = 1.0

    def __post_init__(self):
        _check_m(self.m_order)
        if not self.eb > 0:
            raise ValueError("Eb must be positive")
        if not self.n0 > 0:
            raise ValueError("N0 must be positive")

    @property
    def two_d(self) -> float:
        return min_distance(self.eb, self.m_order)

    @property
    def d(self) -> float:
        return 0.5 * self.two_d

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.m_order))

    def with_n0(self, n0: float) -> "PamScheme":
        return PamScheme(self.m_order, self.eb, n0)


@dataclass
class SymbolFrame:
    """One coherence-block transmission: known pilots then data, one gain draw."""

    pilots: np.ndarray
    data: np.ndarray
    gain: float

    @property
    def symbols(self) -> np.ndarray:
        return np.concatenate([self.pilots, self.data])


@lru_cache(maxsize=None)
def gray_table(m_order: int) -> tuple:
    """gray_table(M)[level] = Gray pattern (as int, MSB-first) of that level."""
    _check_m(m_order)
    return tuple(m ^ (m >> 1) for m in range(m_order))


def gray_encode(bits, m_order: int) -> np.ndarray:
    """Pack bits (MSB-first groups of log2 M) into PAM levels via the reflected Gray map."""
    bits = np.asarray(bits, dtype=int)
    k = int(math.log2(_check_m(m_order)))
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by log2(M)={k}")
    groups = bits.reshape(-1, k)
    patterns = groups.dot(1 << np.arange(k - 1, -1, -1))
    table = np.array(gray_table(m_order))
    inverse = np.empty(m_order, dtype=int)
    inverse[table] = np.arange(m_order)
    return inverse[patterns]


def gray_decode(symbols, m_order: int) -> np.ndarray:
    """Unpack PAM levels back into bits (MSB-first)."""
    symbols = np.asarray(symbols, dtype=int)
    if np.any((symbols < 0) | (symbols >= m_order)):
        raise ValueError("symbol out of range")
    k = int(math.log2(_check_m(m_order)))
    table = np.array(gray_table(m_order))
    patterns = table[symbols]
    shifts = np.arange(k - 1, -1, -1)
    return ((patterns[:, None] >> shifts) & 1).ravel()


def symbol_bit_errors(sent, detected, m_order: int) -> int:
    """Total Hamming distance between the Gray patterns of two symbol vectors."""
    table = np.array(gray_table(m_order), dtype=np.uint8)
    x = table[np.asarray(sent, dtype=int)] ^ table[np.asarray(detected, dtype=int)]
    return int(np.unpackbits(x).sum())


def transmit(symbols, h: float, scheme: PamScheme, rng: np.random.Generator) -> np.ndarray:
    """r(k) = 2d h m(k) + n(k), noise i.i.d. N(0, N0/2)."""
    m = np.asarray(symbols, dtype=float)
    noise = rng.normal(0.0, math.sqrt(scheme.n0 / 2.0), m.shape)
    return scheme.two_d * h * m + noise
