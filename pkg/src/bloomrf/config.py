"""Filter configuration: layer layout, segments, seeds.

Delta, replica, and segment vectors are stored top-first, i.e. index 0
describes the topmost layer (largest dyadic level), matching the order
``(delta_{k-1}, ..., delta_0)`` used throughout the docs and the file
format.  Layer indices elsewhere count bottom-up: layer 0 sits at level
0, layer ``k-1`` at the highest encoded level.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .errors import ConfigError
from .hashing import LayerHashSpec, derive_seeds

SUPPORTED_DOMAIN_BITS = (8, 16, 32, 64)
DEFAULT_DELTA = 7
DEFAULT_MASTER_SEED = 0x62726631  # "brf1"


def layer_count(d: int, n: int, delta: int) -> int:
    """Number of hash layers for a uniform level distance.

    Nearest-integer rounding of ``(d - log2 n) / delta``; this reproduces
    both published reference points (d=16, n=3, delta=4 -> 4 and d=64,
    n=2e6, delta=7 -> 6), which no single ceiling/floor convention does.
    """
    if n < 1:
        raise ConfigError("expected key count must be >= 1")
    raw = (d - math.log2(n)) / delta
    return max(1, math.floor(raw + 0.5))


@dataclass(frozen=True)
class FilterConfig:
    """Complete parameterization of one filter instance."""

    domain_bits: int
    expected_keys: int
    k: int
    delta_vector: tuple[int, ...]       # top-first
    replica_vector: tuple[int, ...]     # top-first
    segment_assignment: tuple[int, ...]  # top-first, 1-based segment ids
    segment_sizes: tuple[int, ...]      # bits per segment
    exact_level: Optional[int]
    seeds: tuple[int, ...]              # orientation seed, then layers bottom-up
    reverse_mitigation: bool = False

    def __post_init__(self) -> None:
        self.validate()

    # Layer i is the bottom-up index; vectors are stored top-first.
    def delta_of(self, i: int) -> int:
        return self.delta_vector[self.k - 1 - i]

    def replicas_of(self, i: int) -> int:
        return self.replica_vector[self.k - 1 - i]

    def segment_of(self, i: int) -> int:
        """0-based segment index of layer i."""
        return self.segment_assignment[self.k - 1 - i] - 1

    def level_of(self, i: int) -> int:
        return sum(self.delta_of(j) for j in range(i))

    @property
    def levels(self) -> tuple[int, ...]:
        out = []
        acc = 0
        for i in range(self.k):
            out.append(acc)
            acc += self.delta_of(i)
        return tuple(out)

    @property
    def sum_delta(self) -> int:
        return sum(self.delta_vector)

    @property
    def top_level(self) -> int:
        """First dyadic level NOT encoded by the hash layers."""
        return self.sum_delta

    @property
    def orientation_seed(self) -> int:
        return self.seeds[0]

    def layer_seeds(self, i: int) -> tuple[int, ...]:
        start = 1 + sum(self.replicas_of(j) for j in range(i))
        return self.seeds[start:start + self.replicas_of(i)]

    def layer_specs(self) -> list[LayerHashSpec]:
        return [
            LayerHashSpec(
                layer_index=i,
                level=self.level_of(i),
                delta=self.delta_of(i),
                segment=self.segment_of(i),
                replica_count=self.replicas_of(i),
                seeds=self.layer_seeds(i),
            )
            for i in range(self.k)
        ]

    @property
    def total_bits(self) -> int:
        return sum(self.segment_sizes)

    def validate(self) -> None:
        if self.domain_bits not in SUPPORTED_DOMAIN_BITS:
            raise ConfigError(f"domain_bits must be one of {SUPPORTED_DOMAIN_BITS}")
        if self.k < 1 or self.k > 64:
            raise ConfigError("layer count out of range")
        if len(self.delta_vector) != self.k or len(self.replica_vector) != self.k \
                or len(self.segment_assignment) != self.k:
            raise ConfigError("delta/replica/segment vectors must have length k")
        if any(dv < 1 or dv > 7 for dv in self.delta_vector):
            raise ConfigError("each delta must be in 1..7 (word width up to 64 bits)")
        if any(r < 1 for r in self.replica_vector):
            raise ConfigError("replica counts must be >= 1")
        if self.sum_delta > 64:
            raise ConfigError("levels exceed 64-bit key domain")
        nseg = len(self.segment_sizes)
        if any(not 1 <= j <= nseg for j in self.segment_assignment):
            raise ConfigError("segment assignment out of range")
        for m in self.segment_sizes:
            if m <= 0:
                raise ConfigError("segment sizes must be positive")
        if self.exact_level is not None:
            if self.sum_delta != self.exact_level:
                raise ConfigError("layer deltas must tile levels 0..exact_level")
            if self.segment_sizes[0] != 1 << (self.domain_bits - self.exact_level):
                raise ConfigError("segment 1 must hold one bit per exact-level interval")
        expected_seeds = 1 + sum(self.replica_vector)
        if len(self.seeds) != expected_seeds:
            raise ConfigError(f"need {expected_seeds} seeds, got {len(self.seeds)}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be pairwise distinct")

    def config_hash(self) -> str:
        blob = json.dumps(
            {
                "d": self.domain_bits,
                "n": self.expected_keys,
                "k": self.k,
                "delta": self.delta_vector,
                "r": self.replica_vector,
                "j": self.segment_assignment,
                "m": self.segment_sizes,
                "exact": self.exact_level,
                "seeds": self.seeds,
                "rev": self.reverse_mitigation,
            },
            sort_keys=True,
        ).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_seeds(self, master_seed: int) -> "FilterConfig":
        n_seeds = 1 + sum(self.replica_vector)
        return replace(self, seeds=tuple(derive_seeds(master_seed, n_seeds)))


def _round_up(bits: int, multiple: int = 64) -> int:
    return ((bits + multiple - 1) // multiple) * multiple


def build_config(
    d: int,
    n: int,
    bits_per_key: float,
    delta: int | Sequence[int] | None = None,
    *,
    layers: Optional[int] = None,
    advice: Optional["FilterConfig"] = None,
    master_seed: int = DEFAULT_MASTER_SEED,
    reverse_mitigation: bool = False,
) -> FilterConfig:
    """Build a validated configuration.

    Basic mode (default): uniform ``delta``, one replica per layer, a
    single segment, no exact level.  ``layers`` pins the layer count,
    otherwise it follows :func:`layer_count`.  An explicit ``delta``
    sequence (top-first) fixes the layout outright.  Passing ``advice``
    (a config produced by the tuning advisor) copies that layout and
    only re-derives the seeds.
    """
    if d not in SUPPORTED_DOMAIN_BITS:
        raise ConfigError(f"domain_bits must be one of {SUPPORTED_DOMAIN_BITS}")
    if n < 1:
        raise ConfigError("expected key count must be >= 1")
    if advice is not None:
        return replace(
            advice.with_seeds(master_seed),
            expected_keys=n,
            reverse_mitigation=reverse_mitigation,
        )
    if bits_per_key < 6:
        raise ConfigError("need at least 6 bits per key")

    if isinstance(delta, Sequence):
        delta_vec = tuple(int(v) for v in delta)
        k = len(delta_vec)
    else:
        step = int(delta) if delta is not None else DEFAULT_DELTA
        k = layers if layers is not None else layer_count(d, n, step)
        delta_vec = (step,) * k

    budget = int(round(bits_per_key * n))
    m = _round_up(budget)
    if m > budget * 1.1:
        raise ConfigError(
            f"segment rounding ({m} bits) exceeds the {budget}-bit budget by more than 10%"
        )

    cfg = FilterConfig(
        domain_bits=d,
        expected_keys=n,
        k=k,
        delta_vector=delta_vec,
        replica_vector=(1,) * k,
        segment_assignment=(1,) * k,
        segment_sizes=(m,),
        exact_level=None,
        seeds=tuple(derive_seeds(master_seed, 1 + k)),
        reverse_mitigation=reverse_mitigation,
    )
    return cfg
