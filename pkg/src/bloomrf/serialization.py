"""Binary filter files.

Little-endian throughout::

    magic (4 bytes)      "BRF1" | "BBF1" | "BPF1" | "BFP1"
    version              u16
    d                    u8
    k                    u8
    S                    u8
    flags                u8   bit 0 = reverse mitigation
    exact_level          u8   0xFF = none (prefix level for "BPF1")
    delta vector         k bytes, top-first
    replica vector       k bytes
    segment vector       k bytes, 1-based
    segment sizes        S x u64, bits
    inserted_count       u64
    seed count           u16
    seeds                u64 each
    header CRC32         u32  over all preceding bytes
    segment payloads     raw little-endian u64 words, in segment order
    payload CRC32        u32

The baseline filters reuse the same envelope under their own magics;
"BPF1" stores its prefix level in the exact_level byte and "BFP1"
stores its (min, max) pairs as a single payload segment.
"""

from __future__ import annotations

import struct
import zlib

from .config import FilterConfig
from .errors import SerializationError

MAGIC_BLOOMRF = b"BRF1"
MAGIC_BLOOM = b"BBF1"
MAGIC_PREFIX_BLOOM = b"BPF1"
MAGIC_FENCE = b"BFP1"

FORMAT_VERSION = 1

_KNOWN_MAGICS = (MAGIC_BLOOMRF, MAGIC_BLOOM, MAGIC_PREFIX_BLOOM, MAGIC_FENCE)


def _pack_header(magic: bytes, d: int, k: int, flags: int, exact_level: int | None,
                 deltas: tuple[int, ...], replicas: tuple[int, ...],
                 segments: tuple[int, ...], segment_sizes: tuple[int, ...],
                 inserted_count: int, seeds: tuple[int, ...]) -> bytes:
    parts = [magic, struct.pack("<H", FORMAT_VERSION)]
    parts.append(struct.pack(
        "<BBBBB", d, k, len(segment_sizes), flags,
        0xFF if exact_level is None else exact_level,
    ))
    parts.append(bytes(deltas))
    parts.append(bytes(replicas))
    parts.append(bytes(segments))
    parts.append(struct.pack(f"<{len(segment_sizes)}Q", *segment_sizes))
    parts.append(struct.pack("<Q", inserted_count))
    parts.append(struct.pack("<H", len(seeds)))
    if seeds:
        parts.append(struct.pack(f"<{len(seeds)}Q", *seeds))
    header = b"".join(parts)
    return header + struct.pack("<I", zlib.crc32(header))


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.raw):
            raise SerializationError("truncated filter file")
        out = self.raw[self.pos:self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_header(r: _Reader, expected_magic: bytes | None = None) -> dict:
    start = r.pos
    magic = r.take(4)
    if magic not in _KNOWN_MAGICS:
        raise SerializationError(f"bad magic {magic!r}")
    if expected_magic is not None and magic != expected_magic:
        raise SerializationError(f"expected {expected_magic!r} file, found {magic!r}")
    (version,) = r.unpack("<H")
    if version != FORMAT_VERSION:
        raise SerializationError(f"unsupported format version {version}")
    d, k, s, flags, exact = r.unpack("<BBBBB")
    deltas = tuple(r.take(k))
    replicas = tuple(r.take(k))
    segments = tuple(r.take(k))
    segment_sizes = r.unpack(f"<{s}Q") if s else ()
    (inserted_count,) = r.unpack("<Q")
    (seed_count,) = r.unpack("<H")
    seeds = r.unpack(f"<{seed_count}Q") if seed_count else ()
    header_bytes = r.raw[start:r.pos]
    (crc,) = r.unpack("<I")
    if crc != zlib.crc32(header_bytes):
        raise SerializationError("header checksum mismatch")
    return {
        "magic": magic,
        "d": d,
        "k": k,
        "flags": flags,
        "exact_level": None if exact == 0xFF else exact,
        "deltas": deltas,
        "replicas": replicas,
        "segments": segments,
        "segment_sizes": segment_sizes,
        "inserted_count": inserted_count,
        "seeds": seeds,
    }


def _read_payload(r: _Reader, segment_sizes: tuple[int, ...]) -> list[bytes]:
    chunks = []
    start = r.pos
    for m in segment_sizes:
        chunks.append(r.take(m // 8))
    payload_bytes = r.raw[start:r.pos]
    (crc,) = r.unpack("<I")
    if crc != zlib.crc32(payload_bytes):
        raise SerializationError("payload checksum mismatch")
    if r.pos != len(r.raw):
        raise SerializationError("trailing bytes after payload")
    return chunks


def serialize(filt) -> bytes:
    """Serialize a BloomRf filter to its "BRF1" byte stream."""
    cfg = filt.config
    header = _pack_header(
        MAGIC_BLOOMRF,
        cfg.domain_bits,
        cfg.k,
        1 if cfg.reverse_mitigation else 0,
        cfg.exact_level,
        cfg.delta_vector,
        cfg.replica_vector,
        cfg.segment_assignment,
        cfg.segment_sizes,
        filt.inserted_count,
        cfg.seeds,
    )
    payload = b"".join(filt.store.segment_bytes(s)
                       for s in range(filt.store.segment_count))
    return header + payload + struct.pack("<I", zlib.crc32(payload))


def deserialize(raw: bytes):
    """Reconstruct a BloomRf filter from its byte stream."""
    from .filter import BloomRf

    r = _Reader(raw)
    h = _read_header(r, MAGIC_BLOOMRF)
    chunks = _read_payload(r, h["segment_sizes"])
    try:
        cfg = FilterConfig(
            domain_bits=h["d"],
            # the expected key count is not part of the wire format; the
            # live insert counter is the best available stand-in
            expected_keys=max(1, h["inserted_count"]),
            k=h["k"],
            delta_vector=h["deltas"],
            replica_vector=h["replicas"],
            segment_assignment=h["segments"],
            segment_sizes=h["segment_sizes"],
            exact_level=h["exact_level"],
            seeds=h["seeds"],
            reverse_mitigation=bool(h["flags"] & 1),
        )
    except ValueError as exc:
        raise SerializationError(f"inconsistent filter header: {exc}") from exc
    filt = BloomRf(cfg)
    for s, chunk in enumerate(chunks):
        filt.store.load_segment_bytes(s, chunk)
    filt.inserted_count = h["inserted_count"]
    return filt


def serialize_envelope(magic: bytes, *, d: int, k: int, exact_level: int | None,
                       segment_sizes: tuple[int, ...], inserted_count: int,
                       seeds: tuple[int, ...], payload_chunks: list[bytes],
                       deltas: tuple[int, ...] = (), replicas: tuple[int, ...] = (),
                       segments: tuple[int, ...] = (), flags: int = 0) -> bytes:
    """Shared envelope for the baseline filters."""
    if not deltas:
        deltas = (0,) * k
    if not replicas:
        replicas = (1,) * k
    if not segments:
        segments = (1,) * k
    header = _pack_header(magic, d, k, flags, exact_level, deltas, replicas,
                          segments, segment_sizes, inserted_count, seeds)
    payload = b"".join(payload_chunks)
    return header + payload + struct.pack("<I", zlib.crc32(payload))


def read_envelope(raw: bytes, expected_magic: bytes) -> tuple[dict, list[bytes]]:
    r = _Reader(raw)
    h = _read_header(r, expected_magic)
    chunks = _read_payload(r, h["segment_sizes"])
    return h, chunks


def peek_magic(raw: bytes) -> bytes:
    if len(raw) < 4:
        raise SerializationError("truncated filter file")
    return raw[:4]
