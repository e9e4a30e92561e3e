"""Mixing hash and piecewise-monotone hash functions (PMHF).

A PMHF hashes the bits of a key above its layer's word span to pick a
word, then places the low ``delta - 1`` bits of the layer prefix as the
in-word offset.  Keys that agree on everything above the word span land
in the same word, in prefix order, so a contiguous run of prefixes can
be probed with a single word read.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

_U = np.uint64
_V_MIX_A = _U(_MIX_A)
_V_MIX_B = _U(_MIX_B)


def mix64(z: int) -> int:
    """64-bit finalizer-style mixer (splitmix64 finalization constants)."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * _MIX_A) & _MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & _MASK64
    z ^= z >> 31
    return z


def mix_seed(seed: int) -> int:
    """Pre-mix a raw seed so related seeds produce unrelated functions."""
    return mix64((seed ^ _GOLDEN) & _MASK64)


def base_hash(seed: int, value: int) -> int:
    """Seeded 64-bit hash; fixed for the lifetime of the file format."""
    return mix64(value ^ mix_seed(seed))


def mix64_vec(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> _U(30)
    z *= _V_MIX_A
    z ^= z >> _U(27)
    z *= _V_MIX_B
    z ^= z >> _U(31)
    return z


def base_hash_vec(seed: int, values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`base_hash` over a uint64 array."""
    return mix64_vec(values ^ _U(mix_seed(seed)))


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Derive ``count`` pairwise-distinct 64-bit seeds from one master seed."""
    seeds: list[int] = []
    seen: set[int] = set()
    z = master_seed & _MASK64
    while len(seeds) < count:
        z = (z + _GOLDEN) & _MASK64
        s = mix64(z)
        if s not in seen:
            seen.add(s)
            seeds.append(s)
    return seeds


@dataclass(frozen=True)
class LayerHashSpec:
    """Hash-layout of one filter layer.

    ``level`` is the dyadic level the layer encodes, ``delta`` the level
    distance up to the next layer, giving a word of ``2**(delta-1)`` bits.
    ``segment`` is the 0-based index of the backing memory segment.
    """

    layer_index: int
    level: int
    delta: int
    segment: int
    replica_count: int
    seeds: tuple[int, ...]
    word_width: int = field(init=False)

    def __post_init__(self) -> None:
        if self.delta < 1 or self.delta > 7:
            raise ValueError(f"delta must be in 1..7, got {self.delta}")
        if self.replica_count < 1:
            raise ValueError("replica_count must be >= 1")
        if len(self.seeds) != self.replica_count:
            raise ValueError("need one seed per replica")
        object.__setattr__(self, "word_width", 1 << (self.delta - 1))

    @property
    def offset_mask(self) -> int:
        return self.word_width - 1

    @property
    def word_shift(self) -> int:
        """Bits of the key above which the word hash operates."""
        return self.level + self.delta - 1


def pmhf_position(spec: LayerHashSpec, replica: int, x: int, m_j: int) -> int:
    """Bit position written by replica ``replica`` of this layer for key ``x``.

    ``m_j`` is the size in bits of the layer's segment and must be a
    multiple of the word width.
    """
    word_count = m_j >> (spec.delta - 1)
    word = base_hash(spec.seeds[replica], x >> spec.word_shift) % word_count
    offset = (x >> spec.level) & spec.offset_mask
    return (word << (spec.delta - 1)) + offset


def pmhf_word(spec: LayerHashSpec, replica: int, x: int, m_j: int) -> tuple[int, int]:
    """(word index, in-word offset) decomposition of :func:`pmhf_position`."""
    pos = pmhf_position(spec, replica, x, m_j)
    return pos >> (spec.delta - 1), pos & spec.offset_mask


def reverse_pmhf_position(spec: LayerHashSpec, replica: int, x: int, m_j: int) -> int:
    """PMHF variant writing word contents in reverse prefix order."""
    pos = pmhf_position(spec, replica, x, m_j)
    word, offset = pos >> (spec.delta - 1), pos & spec.offset_mask
    return (word << (spec.delta - 1)) + (spec.offset_mask - offset)


def reverse_offset(spec: LayerHashSpec, offset: int) -> int:
    """Mirror an in-word offset; involutive."""
    return spec.offset_mask - offset


def orientation_is_reversed(orient_seed: int, top_prefix: int) -> bool:
    """Key-deterministic split between normal and reverse-order PMHF.

    ``top_prefix`` is the key shifted to the top layer's level, so every
    key of one top-level prefix uses one consistent orientation.
    """
    return bool(base_hash(orient_seed, top_prefix) & 1)


def orientation_is_reversed_vec(orient_seed: int, top_prefixes: np.ndarray) -> np.ndarray:
    return (base_hash_vec(orient_seed, top_prefixes) & _U(1)).astype(bool)
