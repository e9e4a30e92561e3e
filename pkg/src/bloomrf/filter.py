"""The point-range filter: insert, point lookup, two-path range lookup.

Inserts and point lookups behave like a Bloom filter over PMHF
positions.  Range lookups walk the layers top-down: covering intervals
are tested through single bits and expanded downward while positive,
decomposition pieces are tested through one masked word read per
replica.  A negative covering prunes everything beneath it on its side;
when no checks remain the answer is negative.

Levels above the encoded region (above the exact level, or above the
top hash layer in basic mode) are saturated and not represented; a
query piece falling there conservatively answers positive.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bitstore import SegmentedBitArray
from .config import FilterConfig
from .dyadic import SIDE_BOTH, SIDE_LEFT, SIDE_RIGHT, two_path_raw
from .errors import BloomRfError, QueryBoundsError
from .hashing import base_hash_vec, mix_seed, orientation_is_reversed_vec

_MASK64 = (1 << 64) - 1
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_U = np.uint64


def _hash(mseed: int, v: int) -> int:
    # Inline of hashing.base_hash with the seed pre-mixed.
    z = v ^ mseed
    z ^= z >> 30
    z = (z * _MIX_A) & _MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & _MASK64
    z ^= z >> 31
    return z


@dataclass
class AccessCounter:
    """Word and bit reads performed by one lookup."""

    word_reads: int = 0
    bit_reads: int = 0

    @property
    def total(self) -> int:
        return self.word_reads + self.bit_reads

    def reset(self) -> None:
        self.word_reads = 0
        self.bit_reads = 0


@dataclass(frozen=True)
class CheckItem:
    """One pending test of the range-lookup loop."""

    l_key: int
    r_key: int
    layer: int
    is_covering: bool
    side: int = SIDE_BOTH


def bit_mask(check: CheckItem, delta: int, level: int) -> int:
    """Word mask with one-bits at the in-word offsets the check spans.

    LSB-first: offset 0 is the least-significant mask bit.  The check
    must not straddle a word boundary; the planner splits such runs.
    """
    wmask = (1 << (delta - 1)) - 1
    shift = level + delta - 1
    if (check.l_key >> shift) != (check.r_key >> shift):
        raise BloomRfError("check spans a word boundary; decomposition must prevent this")
    lo_off = (check.l_key >> level) & wmask
    hi_off = (check.r_key >> level) & wmask
    if lo_off > hi_off:
        raise BloomRfError("check offsets inverted within word")
    return ((1 << (hi_off - lo_off + 1)) - 1) << lo_off


class _Layer:
    """Precomputed per-layer constants for the hot paths."""

    __slots__ = (
        "index", "level", "delta", "width", "wmask", "shift", "seg",
        "word_count", "mseeds", "vseeds", "replicas",
    )

    def __init__(self, index: int, level: int, delta: int, seg: int,
                 seeds: Sequence[int], m_bits: int):
        self.index = index
        self.level = level
        self.delta = delta
        self.width = 1 << (delta - 1)
        self.wmask = self.width - 1
        self.shift = level + delta - 1
        self.seg = seg
        self.word_count = m_bits >> (delta - 1)
        self.mseeds = [mix_seed(s) for s in seeds]
        self.vseeds = [_U(m) for m in self.mseeds]
        self.replicas = len(seeds)


def _mirror_mask(mask: int, width: int) -> int:
    out = 0
    for b in range(width):
        if mask & (1 << b):
            out |= 1 << (width - 1 - b)
    return out


class BloomRf:
    """A point-range filter instance over ``[0, 2**d)`` integer keys."""

    def __init__(self, config: FilterConfig):
        config.validate()
        self.config = config
        self.store = SegmentedBitArray(config.segment_sizes)
        self.inserted_count = 0
        self._count_lock = threading.Lock()

        self.d = config.domain_bits
        self._key_limit = 1 << self.d
        self._layers = [
            _Layer(
                i,
                config.level_of(i),
                config.delta_of(i),
                config.segment_of(i),
                config.layer_seeds(i),
                config.segment_sizes[config.segment_of(i)],
            )
            for i in range(config.k)
        ]
        self._top_level = config.sum_delta
        self._exact_level = config.exact_level
        self._rev = config.reverse_mitigation
        self._orient_mseed = mix_seed(config.orientation_seed)
        self._orient_level = self._layers[-1].level
        # level -> layer index for every encoded level
        self._level_layer = [0] * self._top_level
        for layer in self._layers:
            for lvl in range(layer.level, layer.level + layer.delta):
                self._level_layer[lvl] = layer.index
        self._seg_words = [self.store.words(s) for s in range(self.store.segment_count)]

    # ------------------------------------------------------------------
    # scalar operations

    def _check_key(self, key: int) -> None:
        if not 0 <= key < self._key_limit:
            raise QueryBoundsError(f"key {key} outside the {self.d}-bit domain")

    def _reversed_for(self, key: int) -> bool:
        if not self._rev:
            return False
        return bool(_hash(self._orient_mseed, key >> self._orient_level) & 1)

    def insert(self, key: int) -> None:
        self._check_key(key)
        rev = self._reversed_for(key)
        for layer in self._layers:
            off = (key >> layer.level) & layer.wmask
            if rev:
                off = layer.wmask - off
            prefix = key >> layer.shift
            base = layer.delta - 1
            for ms in layer.mseeds:
                word = _hash(ms, prefix) % layer.word_count
                self.store.set_bit(layer.seg, (word << base) + off)
        if self._exact_level is not None:
            self.store.set_bit(0, key >> self._exact_level)
        with self._count_lock:
            self.inserted_count += 1

    def point_lookup(self, key: int) -> bool:
        self._check_key(key)
        rev = self._reversed_for(key)
        for layer in self._layers:
            off = (key >> layer.level) & layer.wmask
            if rev:
                off = layer.wmask - off
            prefix = key >> layer.shift
            base = layer.delta - 1
            words = self._seg_words[layer.seg]
            for ms in layer.mseeds:
                pos = ((_hash(ms, prefix) % layer.word_count) << base) + off
                if not (int(words[pos >> 6]) >> (pos & 63)) & 1:
                    return False
        if self._exact_level is not None:
            pos = key >> self._exact_level
            if not (int(self._seg_words[0][pos >> 6]) >> (pos & 63)) & 1:
                return False
        return True

    # ------------------------------------------------------------------
    # batch operations (vectorized; same semantics as the scalar paths)

    def _positions_batch(self, layer: _Layer, keys: np.ndarray,
                         rev: Optional[np.ndarray]) -> list[np.ndarray]:
        offs = (keys >> _U(layer.level)) & _U(layer.wmask)
        if rev is not None:
            offs = np.where(rev, _U(layer.wmask) - offs, offs)
        prefixes = keys >> _U(layer.shift)
        base = _U(layer.delta - 1)
        out = []
        for vs in layer.vseeds:
            z = prefixes ^ vs
            z = z.copy()
            z ^= z >> _U(30)
            z *= _U(_MIX_A)
            z ^= z >> _U(27)
            z *= _U(_MIX_B)
            z ^= z >> _U(31)
            words = z % _U(layer.word_count)
            out.append((words << base) + offs)
        return out

    def insert_batch(self, keys: np.ndarray) -> None:
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        if keys.size == 0:
            return
        rev = None
        if self._rev:
            rev = orientation_is_reversed_vec(
                self.config.orientation_seed, keys >> _U(self._orient_level))
        for layer in self._layers:
            for pos in self._positions_batch(layer, keys, rev):
                self.store.set_bits_batch(layer.seg, pos)
        if self._exact_level is not None:
            self.store.set_bits_batch(0, keys >> _U(self._exact_level))
        with self._count_lock:
            self.inserted_count += int(keys.size)

    def point_lookup_batch(self, keys: np.ndarray) -> np.ndarray:
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        result = np.ones(keys.shape, dtype=bool)
        rev = None
        if self._rev:
            rev = orientation_is_reversed_vec(
                self.config.orientation_seed, keys >> _U(self._orient_level))
        for layer in self._layers:
            for pos in self._positions_batch(layer, keys, rev):
                result &= self.store.test_bits_batch(layer.seg, pos)
        if self._exact_level is not None:
            result &= self.store.test_bits_batch(0, keys >> _U(self._exact_level))
        return result

    # ------------------------------------------------------------------
    # range lookup

    def plan_range_checks(self, l_key: int, r_key: int):
        """Classify the two-path output into executable check items.

        Returns ``(conservative, exact_items, per_layer_items)`` where
        exact items are (is_covering, side, prefix) bit probes of the
        exact segment and per-layer items are CheckItems, pieces first.
        """
        pieces, covers = two_path_raw(self.d, l_key, r_key)
        exact = self._exact_level
        top = self._top_level

        exact_items: list[tuple[bool, int, int]] = []
        runs: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for level, lo, hi, side in pieces:
            if level < top:
                runs.setdefault((self._level_layer[level], side), []).append((lo, hi))
            elif exact is not None and level == exact:
                exact_items.append((False, side, lo >> exact))
            else:
                # piece above the encoded region: saturated, assume occupied
                return True, [], []

        per_layer: list[list[CheckItem]] = [[] for _ in range(len(self._layers))]
        for (layer_idx, side), parts in runs.items():
            parts.sort()
            lo = parts[0][0]
            hi = parts[0][1]
            for plo, phi in parts[1:]:
                if plo != hi + 1:
                    raise BloomRfError("decomposition pieces not contiguous within layer")
                hi = phi
            layer = self._layers[layer_idx]
            first = lo >> layer.shift
            last = hi >> layer.shift
            if first == last:
                per_layer[layer_idx].append(CheckItem(lo, hi, layer_idx, False, side))
            else:
                if last - first != 1:
                    raise BloomRfError("piece run spans more than two words")
                cut = (first + 1) << layer.shift
                per_layer[layer_idx].append(CheckItem(lo, cut - 1, layer_idx, False, side))
                per_layer[layer_idx].append(CheckItem(cut, hi, layer_idx, False, side))

        level_set = {layer.level: layer.index for layer in self._layers}
        for level, lo, hi, side in covers:
            if exact is not None and level == exact:
                exact_items.append((True, side, lo >> exact))
            elif level in level_set:
                per_layer[level_set[level]].append(CheckItem(lo, hi, level_set[level], True, side))
            # coverings above the encoded region are saturated: implicitly positive

        return False, exact_items, per_layer

    def range_lookup(self, l_key: int, r_key: int,
                     counter: Optional[AccessCounter] = None) -> bool:
        if l_key > r_key:
            raise QueryBoundsError(f"inverted range [{l_key}, {r_key}]")
        self._check_key(l_key)
        self._check_key(r_key)

        conservative, exact_items, per_layer = self.plan_range_checks(l_key, r_key)
        if conservative:
            return True

        alive_l = alive_r = True

        def alive(side: int) -> bool:
            if side == SIDE_LEFT:
                return alive_l
            if side == SIDE_RIGHT:
                return alive_r
            return alive_l or alive_r

        def kill(side: int) -> None:
            nonlocal alive_l, alive_r
            if side != SIDE_RIGHT:
                alive_l = False
            if side != SIDE_LEFT:
                alive_r = False

        if exact_items:
            words = self._seg_words[0]
            # pieces first: they are gated only by (unrepresented) levels above
            for is_covering, side, prefix in sorted(exact_items, key=lambda t: t[0]):
                if not alive(side):
                    continue
                if counter is not None:
                    counter.bit_reads += 1
                bit = (int(words[prefix >> 6]) >> (prefix & 63)) & 1
                if not is_covering:
                    if bit:
                        return True
                elif not bit:
                    kill(side)
            if not (alive_l or alive_r):
                return False

        for layer_idx in range(len(self._layers) - 1, -1, -1):
            layer = self._layers[layer_idx]
            words = self._seg_words[layer.seg]
            base = layer.delta - 1
            covering_items = []
            for item in per_layer[layer_idx]:
                if item.is_covering:
                    covering_items.append(item)
                    continue
                if not alive(item.side):
                    continue
                if self._word_check(layer, words, base, item, counter):
                    return True
            for item in covering_items:
                if not alive(item.side):
                    continue
                if not self._covering_check(layer, words, base, item, counter):
                    kill(item.side)
            if not (alive_l or alive_r):
                return False
        return False

    def _word_check(self, layer: _Layer, words: np.ndarray, base: int,
                    item: CheckItem, counter: Optional[AccessCounter]) -> bool:
        lo_off = (item.l_key >> layer.level) & layer.wmask
        hi_off = (item.r_key >> layer.level) & layer.wmask
        mask = ((1 << (hi_off - lo_off + 1)) - 1) << lo_off
        if self._rev:
            lo_orient = item.l_key >> self._orient_level
            if lo_orient == (item.r_key >> self._orient_level):
                if _hash(self._orient_mseed, lo_orient) & 1:
                    mask = _mirror_mask(mask, layer.width)
            else:
                # orientation varies inside the word (top layer only);
                # accept either placement, never a false negative
                mask |= _mirror_mask(mask, layer.width)
        prefix = item.l_key >> layer.shift
        for ms in layer.mseeds:
            word_idx = _hash(ms, prefix) % layer.word_count
            bit_start = word_idx << base
            if counter is not None:
                counter.word_reads += 1
            word = (int(words[bit_start >> 6]) >> (bit_start & 63)) & ((1 << layer.width) - 1)
            if word & mask == 0:
                return False
        return True

    def _covering_check(self, layer: _Layer, words: np.ndarray, base: int,
                        item: CheckItem, counter: Optional[AccessCounter]) -> bool:
        off = (item.l_key >> layer.level) & layer.wmask
        if self._rev and _hash(self._orient_mseed, item.l_key >> self._orient_level) & 1:
            off = layer.wmask - off
        prefix = item.l_key >> layer.shift
        for ms in layer.mseeds:
            pos = ((_hash(ms, prefix) % layer.word_count) << base) + off
            if counter is not None:
                counter.bit_reads += 1
            if not (int(words[pos >> 6]) >> (pos & 63)) & 1:
                return False
        return True

    # ------------------------------------------------------------------

    @property
    def set_bit_total(self) -> int:
        return sum(self.store.set_bit_count(s) for s in range(self.store.segment_count))

    def to_bytes(self) -> bytes:
        from .serialization import serialize
        return serialize(self)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "BloomRf":
        from .serialization import deserialize
        return deserialize(raw)
