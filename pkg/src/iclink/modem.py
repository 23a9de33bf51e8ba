"""Gray-mapped QAM constellations, bit/symbol conversion, channel interleavers.

Bit conventions used everywhere in this package:

* coded bit c in {0, 1} maps to the bipolar bit b = 2c - 1 in {-1, +1};
* LLR L = ln P(b = +1) / P(b = -1), so L > 0 favours c = 1;
* an N-bit group is read MSB-first, the first N/2 bits label the in-phase
  axis and the last N/2 bits the quadrature axis, each axis using a
  binary-reflected Gray code with b = +1 toward positive amplitude.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _gray(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Square M-QAM table with unit average energy.

    `points[p]` is the symbol labelled by the bit pattern p, where p is the
    integer formed by the N label bits MSB-first.
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray

    @classmethod
    def qam(cls, order: int) -> "Constellation":
        if order not in (4, 16, 64):
            raise ValueError(f"unsupported QAM order {order} (use 4, 16 or 64)")
        n = int(np.log2(order))
        half = n // 2
        k = 1 << half
        # amplitude of axis index i is 2i - (k-1); Gray label of index i is
        # i ^ (i >> 1), which puts label MSB = 1 on the positive half-axis
        amps = 2 * np.arange(k) - (k - 1)
        amp_of_label = np.empty(k)
        amp_of_label[_gray(np.arange(k))] = amps
        norm = np.sqrt(2.0 * (order - 1) / 3.0)
        patterns = np.arange(order)
        i_amp = amp_of_label[patterns >> half]
        q_amp = amp_of_label[patterns & (k - 1)]
        points = (i_amp + 1j * q_amp) / norm
        return cls(order=order, bits_per_symbol=n, points=points)

    def label_bits(self) -> np.ndarray:
        """(M, N) bipolar label table: row p holds the bits of pattern p."""
        n = self.bits_per_symbol
        p = np.arange(self.order)[:, None]
        shifts = n - 1 - np.arange(n)[None, :]
        return (2 * ((p >> shifts) & 1) - 1).astype(np.float64)


def map_bits(bits: np.ndarray, const: Constellation, streams: int) -> np.ndarray:
    """Map a bipolar bit vector onto symbol vectors, stream-major.

    The bit vector is split into `streams` equal contiguous chunks; chunk m
    modulates spatial stream m.  Returns a (vectors, streams) complex array.
    """
    bits = np.asarray(bits)
    n = const.bits_per_symbol
    if bits.size % (n * streams) != 0:
        raise ValueError(
            f"bit count {bits.size} not divisible by bits/symbol ({n}) x streams ({streams})"
        )
    c = ((bits + 1) // 2).astype(np.int64)
    weights = 1 << (n - 1 - np.arange(n))
    patterns = c.reshape(-1, n) @ weights
    symbols = const.points[patterns]
    return symbols.reshape(streams, -1).T


@lru_cache(maxsize=16)
def _hypothesis_table_cached(order: int, streams: int):
    const = Constellation.qam(order)
    n = const.bits_per_symbol
    count = order**streams
    idx = np.arange(count)
    vectors = np.empty((count, streams), dtype=np.complex128)
    bits = np.empty((count, streams * n))
    labels = const.label_bits()
    for m in range(streams):
        pat = (idx // order ** (streams - 1 - m)) % order
        vectors[:, m] = const.points[pat]
        bits[:, m * n : (m + 1) * n] = labels[pat]
    vectors.setflags(write=False)
    bits.setflags(write=False)
    return vectors, bits


def hypothesis_table(const: Constellation, streams: int):
    """All M**streams candidate symbol vectors and their bipolar bit labels.

    Returns (vectors, bits): (H, streams) complex and (H, streams*N) float
    arrays, where row h enumerates per-stream symbols with stream 0 as the
    most significant digit.  Both arrays are cached and read-only.
    """
    return _hypothesis_table_cached(const.order, streams)


def bit_sets(const: Constellation, streams: int, m: int, n: int, b: int) -> np.ndarray:
    """Symbol vectors whose bit (stream m, position n) equals b in {-1,+1}."""
    if not (0 <= m < streams):
        raise IndexError(f"stream index {m} out of range [0, {streams})")
    if not (0 <= n < const.bits_per_symbol):
        raise IndexError(f"bit index {n} out of range [0, {const.bits_per_symbol})")
    if b not in (-1, 1):
        raise ValueError(f"b must be -1 or +1, got {b}")
    vectors, bits = hypothesis_table(const, streams)
    return vectors[bits[:, m * const.bits_per_symbol + n] == b]


@dataclass(frozen=True)
class Interleaver:
    """Bijective permutation with its inverse; interleave is v[perm]."""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("permutation is not a bijection on [0, length)")
        inv = np.empty_like(perm)
        inv[perm] = np.arange(perm.size)
        perm.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "_inv", inv)

    @property
    def length(self) -> int:
        return self.perm.size

    @classmethod
    def identity(cls, length: int) -> "Interleaver":
        return cls(np.arange(length))

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "Interleaver":
        return cls(rng.permutation(length))

    @classmethod
    def two_class(cls, class_mask: np.ndarray, rng: np.random.Generator) -> "Interleaver":
        """Permutation that shuffles within each bit class separately.

        Positions where `class_mask` is True (systematic bits) are permuted
        among themselves, False positions (parity) among themselves.
        """
        class_mask = np.asarray(class_mask, dtype=bool)
        perm = np.empty(class_mask.size, dtype=np.int64)
        for cls_value in (True, False):
            idx = np.flatnonzero(class_mask == cls_value)
            perm[idx] = idx[rng.permutation(idx.size)]
        return cls(perm)

    def interleave(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.length:
            raise ValueError(f"length mismatch: {v.shape[0]} != {self.length}")
        return v[self.perm]

    def deinterleave(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.length:
            raise ValueError(f"length mismatch: {v.shape[0]} != {self.length}")
        return v[self._inv]
