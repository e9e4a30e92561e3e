"""Segmented bit array: the physical substrate for all filter variants.

Bits live in per-segment arrays of 64-bit words.  In-word numbering is
LSB-first (offset 0 is the least-significant bit), matching machine
shift semantics; serialized form is a little-endian u64 stream per
segment.

Writes take a process-wide lock per store, which gives the required
read-modify-write OR atomicity under threads; reads are lock-free.
A read concurrent with a write may or may not observe it, but a write
completed before the read began is always observed.
"""

from __future__ import annotations

import threading
from typing import Iterable, Sequence

import numpy as np

from .errors import BitStoreBoundsError

_U = np.uint64
_VALID_FETCH_WIDTHS = (2, 4, 8, 16, 32, 64)


class SegmentedBitArray:
    """Zero-initialized bit segments with single-bit writes and word reads."""

    __slots__ = ("segment_sizes", "_segments", "_lock")

    def __init__(self, segment_sizes: Sequence[int]):
        if not segment_sizes:
            raise ValueError("need at least one segment")
        for m in segment_sizes:
            if m <= 0 or m % 64 != 0:
                raise ValueError(f"segment size must be a positive multiple of 64, got {m}")
        self.segment_sizes = tuple(int(m) for m in segment_sizes)
        self._segments = [np.zeros(m // 64, dtype=np.uint64) for m in self.segment_sizes]
        self._lock = threading.Lock()

    @property
    def segment_count(self) -> int:
        return len(self.segment_sizes)

    @property
    def total_bits(self) -> int:
        return sum(self.segment_sizes)

    def _check_pos(self, segment: int, pos: int) -> None:
        if not 0 <= segment < len(self.segment_sizes):
            raise BitStoreBoundsError(f"segment {segment} out of range")
        if not 0 <= pos < self.segment_sizes[segment]:
            raise BitStoreBoundsError(
                f"bit {pos} out of range for segment {segment} of {self.segment_sizes[segment]} bits"
            )

    def set_bit(self, segment: int, pos: int) -> None:
        """Set one bit; idempotent."""
        self._check_pos(segment, pos)
        arr = self._segments[segment]
        with self._lock:
            arr[pos >> 6] |= _U(1 << (pos & 63))

    def test_bit(self, segment: int, pos: int) -> bool:
        self._check_pos(segment, pos)
        word = int(self._segments[segment][pos >> 6])
        return (word >> (pos & 63)) & 1 == 1

    def fetch_word(self, segment: int, word_index: int, width_bits: int) -> int:
        """Read ``width_bits`` bits starting at ``word_index * width_bits``.

        Offset 0 of the fetched word is the least-significant bit of the
        returned value.
        """
        if width_bits not in _VALID_FETCH_WIDTHS:
            raise ValueError(f"width must be one of {_VALID_FETCH_WIDTHS}, got {width_bits}")
        if not 0 <= segment < len(self.segment_sizes):
            raise BitStoreBoundsError(f"segment {segment} out of range")
        bit_start = word_index * width_bits
        if word_index < 0 or bit_start + width_bits > self.segment_sizes[segment]:
            raise BitStoreBoundsError(
                f"word {word_index} (width {width_bits}) out of range for segment {segment}"
            )
        slot = int(self._segments[segment][bit_start >> 6])
        if width_bits == 64:
            return slot
        return (slot >> (bit_start & 63)) & ((1 << width_bits) - 1)

    def set_bit_count(self, segment: int) -> int:
        """Population count of one segment."""
        if not 0 <= segment < len(self.segment_sizes):
            raise BitStoreBoundsError(f"segment {segment} out of range")
        return int(np.bitwise_count(self._segments[segment]).sum())

    # Batch paths: used by bulk insert/lookup; semantics identical to the
    # scalar operations above.

    def set_bits_batch(self, segment: int, positions: np.ndarray) -> None:
        arr = self._segments[segment]
        idx = (positions >> _U(6)).astype(np.int64)
        if idx.size and (positions.max() >= self.segment_sizes[segment]):
            raise BitStoreBoundsError("bit position out of range in batch")
        masks = _U(1) << (positions & _U(63))
        with self._lock:
            np.bitwise_or.at(arr, idx, masks)

    def test_bits_batch(self, segment: int, positions: np.ndarray) -> np.ndarray:
        arr = self._segments[segment]
        words = arr[(positions >> _U(6)).astype(np.int64)]
        return (words >> (positions & _U(63))) & _U(1) != 0

    def zero_bit_fraction(self, segment: int) -> float:
        m = self.segment_sizes[segment]
        return 1.0 - self.set_bit_count(segment) / m

    def bits_as_array(self, segment: int) -> np.ndarray:
        """Expand one segment to a uint8 0/1 array, LSB-first."""
        return np.unpackbits(self._segments[segment].view(np.uint8), bitorder="little")

    def segment_bytes(self, segment: int) -> bytes:
        return self._segments[segment].astype("<u8", copy=False).tobytes()

    def load_segment_bytes(self, segment: int, raw: bytes) -> None:
        expected = self.segment_sizes[segment] // 8
        if len(raw) != expected:
            raise ValueError(f"segment {segment} payload must be {expected} bytes")
        # copy in place so live views of the payload stay valid
        self._segments[segment][:] = np.frombuffer(raw, dtype="<u8")

    def words(self, segment: int) -> np.ndarray:
        """The raw u64 payload of a segment (shared, not a copy)."""
        return self._segments[segment]

    def equal_payload(self, other: "SegmentedBitArray") -> bool:
        if self.segment_sizes != other.segment_sizes:
            return False
        return all(
            np.array_equal(a, b) for a, b in zip(self._segments, other._segments)
        )
