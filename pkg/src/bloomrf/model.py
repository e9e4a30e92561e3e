"""Analytic FPR models, comparison curves, and the tuning advisor.

The extended model evaluates, per dyadic level, the probability that
probing an empty interval answers positive: the masked word test at the
level's layer times the single-bit covering tests of all layers above,
times the occupancy of the first unencoded level (which is stored
exactly, or saturated in basic mode).  Zero-bit probabilities are
per-segment, ``p_j = (1 - C/m_j)^(k'_j n)`` with ``k'_j`` the number of
hash functions writing into segment ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_MASTER_SEED, FilterConfig
from .errors import AdvisorError, QueryBoundsError

DEFAULT_ADVISOR_RANGE = 10_000_000_000  # typical large-range target
LOG2_E = math.log2(math.e)


def point_fpr(n: int, m: float, k: int) -> float:
    """Point-query FPR estimate; the filter behaves like a Bloom filter."""
    if n <= 0:
        return 0.0
    return (1.0 - math.exp(-k * n / m)) ** k


def basic_range_fpr(n: int, m: float, k: int, delta: int, range_size: float) -> float:
    """Range FPR bound ``2 (1 - e^{-kn/m})^(k - log2(R)/delta)``.

    ``range_size`` is the maximum query length R and must not exceed
    ``2**(k*delta)``, the largest level the layers encode.
    """
    if range_size < 1:
        raise QueryBoundsError("range size must be >= 1")
    if math.log2(range_size) > k * delta:
        raise QueryBoundsError(
            f"range {range_size} exceeds the 2^{k * delta} levels encoded by k={k}, delta={delta}"
        )
    if n <= 0:
        return 0.0
    exponent = k - math.log2(range_size) / delta
    return 2.0 * (1.0 - math.exp(-k * n / m)) ** exponent


def probe_positive_prob(b: int, r: int, p: float) -> float:
    """Probability that probing ``b`` adjacent sub-intervals answers positive.

    Each sub-interval is backed by ``r`` replica bits that must all be
    set; ``p`` is the zero-bit probability of the segment.
    """
    if b < 1 or r < 1:
        raise ValueError("b and r must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    q = (1.0 - p) ** r          # one sub-interval fully set
    return 1.0 - (1.0 - q) ** b


@dataclass(frozen=True)
class FprProfile:
    """Per-level interval counts and FPR estimates of one configuration.

    ``fpr[level]`` is the probability that probing an empty interval of
    that level answers positive; it equals ``fp/(fp+tn)`` wherever empty
    intervals exist and stays meaningful on fully occupied levels.
    """

    domain_bits: int
    n: int
    C: float
    tp: tuple[float, ...]        # index = dyadic level
    fp: tuple[float, ...]
    tn: tuple[float, ...]
    fpr: tuple[float, ...]
    segment_zero_prob: tuple[float, ...]

    def fpr_at(self, level: int) -> float:
        return self.fpr[level]

    @property
    def point(self) -> float:
        return self.fpr[0]

    def max_fpr_up_to(self, level: int) -> float:
        return max(self.fpr[: level + 1])


def extended_profile(config: FilterConfig, n: Optional[int] = None, C: float = 1.0) -> FprProfile:
    """Evaluate the extended FPR model for one configuration."""
    if n is None:
        n = config.expected_keys
    if n < 0:
        raise ValueError("n must be >= 0")
    if C <= 0:
        raise ValueError("C must be positive")
    d = config.domain_bits
    top = config.sum_delta

    k_prime = [0.0] * len(config.segment_sizes)
    for i in range(config.k):
        k_prime[config.segment_of(i)] += config.replicas_of(i)
    p_seg = tuple(
        (1.0 - C / m) ** (kp * n) if n > 0 else 1.0
        for m, kp in zip(config.segment_sizes, k_prime)
    )

    # covering chain: one single-bit test per replica of each layer above
    cover_factor = [
        (1.0 - p_seg[config.segment_of(i)]) ** config.replicas_of(i)
        for i in range(config.k)
    ]
    chain_above = [1.0] * (config.k + 1)
    for i in range(config.k - 1, -1, -1):
        chain_above[i] = chain_above[i + 1] * cover_factor[i]

    # occupancy of the first unencoded level (exact bitmap, or saturated top)
    q_top = min(1.0, n / float(2 ** (d - top)))

    levels = config.levels
    layer_of_level = [0] * top
    for i in range(config.k):
        for lvl in range(levels[i], levels[i] + config.delta_of(i)):
            layer_of_level[lvl] = i

    tp, fp, tn, fpr = [], [], [], []
    for level in range(d + 1):
        total = float(2 ** (d - level))
        tp_l = _occupied(n, 2 ** (d - level))
        if level >= top:
            fp_l = 0.0
        else:
            i = layer_of_level[level]
            b = 1 << (level - levels[i])
            p_prime = probe_positive_prob(b, config.replicas_of(i), p_seg[config.segment_of(i)])
            rate = p_prime * chain_above[i + 1] * q_top
            fp_l = rate * (total - tp_l)
        tn_l = total - tp_l - fp_l
        denom = fp_l + tn_l
        tp.append(tp_l)
        fp.append(fp_l)
        tn.append(tn_l)
        fpr.append(fp_l / denom if denom > 0 else 0.0)

    return FprProfile(
        domain_bits=d,
        n=n,
        C=C,
        tp=tuple(tp),
        fp=tuple(fp),
        tn=tuple(tn),
        fpr=tuple(fpr),
        segment_zero_prob=p_seg,
    )


# ----------------------------------------------------------------------
# comparison curves

def rosetta_firstcut_space(n: int, eps: float, range_size: float) -> float:
    """First-cut hierarchical-Bloom space: ``log2(e) n log2(R/eps)`` bits."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    return LOG2_E * n * math.log2(range_size / eps)


def lower_bound_space(n: int, eps: float, range_size: float, d: int,
                      gamma_grid: Optional[np.ndarray] = None) -> float:
    """Range-emptiness space lower bound, maximized over the free parameter.

    Family: ``n log2(R^{1-g*eps}/eps) + n log2((1 - 4nR/2^d)(1 - 1/g)/e)``
    over ``g > 1``; the bound is their pointwise maximum, taken here over
    a wide log-spaced grid.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if 4 * n * range_size >= 2 ** d:
        raise QueryBoundsError("lower bound needs 4nR < 2^d")
    if gamma_grid is None:
        gamma_grid = 1.0 + np.logspace(-9, 12, 4096)
    g = gamma_grid
    fill = 1.0 - 4.0 * n * range_size / float(2 ** d)
    vals = (
        n * (np.log2(range_size) * (1.0 - g * eps) - math.log2(eps))
        + n * (np.log2(fill * (1.0 - 1.0 / g)) - LOG2_E)
    )
    return float(np.max(vals))


def bloomrf_space_for_fpr(n: int, eps: float, range_size: float, k: int, delta: int,
                          rel_tol: float = 1e-9) -> float:
    """Solve the basic range-FPR bound for the bit budget by bisection."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    lo_m, hi_m = 1.0 * n, 1.0 * n
    while basic_range_fpr(n, lo_m, k, delta, range_size) < eps and lo_m > 1e-3 * n:
        lo_m /= 2.0
    while basic_range_fpr(n, hi_m, k, delta, range_size) > eps:
        hi_m *= 2.0
        if hi_m > 1e9 * n:
            raise ValueError("no feasible budget for requested FPR")
    for _ in range(200):
        mid = 0.5 * (lo_m + hi_m)
        if basic_range_fpr(n, mid, k, delta, range_size) > eps:
            lo_m = mid
        else:
            hi_m = mid
        if (hi_m - lo_m) <= rel_tol * hi_m:
            break
    return 0.5 * (lo_m + hi_m)


# ----------------------------------------------------------------------
# tuning advisor

@dataclass(frozen=True)
class CandidateDiagnostics:
    exact_level: int
    m2: int
    fpr_m: float
    fpr_p: float
    fpr_w: float


@dataclass(frozen=True)
class AdvisorResult:
    config: FilterConfig
    diagnostics: tuple[CandidateDiagnostics, ...]
    range_size: float
    point_weight: float

    @property
    def chosen(self) -> CandidateDiagnostics:
        return min(self.diagnostics, key=lambda c: c.fpr_w)


def _delta_vector_for(exact_level: int) -> tuple[int, ...]:
    """Top-first delta vector tiling levels 0..exact_level.

    Bottom layers take the full 64-bit word distance (7); the remainder
    toward the exact level is halved into progressively finer layers.
    """
    bottom_up: list[int] = []
    rem = exact_level
    while rem >= 14:
        bottom_up.append(7)
        rem -= 7
    while rem > 0:
        step = max(2, min(7, rem // 2))
        if rem - step == 1:
            step += 1
        step = min(step, rem)
        bottom_up.append(step)
        rem -= step
    return tuple(reversed(bottom_up))


def _round64(bits: int) -> int:
    return max(64, (bits // 64) * 64)


def _candidate_config(d: int, n: int, budget: int, exact_level: int, m2: int,
                      master_seed: int) -> Optional[FilterConfig]:
    deltas = _delta_vector_for(exact_level)
    k = len(deltas)
    m1 = 1 << (d - exact_level)
    rest = budget - m1
    mids = [i for i, delta in enumerate(deltas) if delta < 7]
    if not mids:
        mids = [0]  # no transition layers: the top layer plays the mid role
    bottoms = [i for i in range(k) if i not in mids]

    replicas = tuple(2 if i == mids[0] else 1 for i in range(k))
    if bottoms:
        segments = tuple(2 if i in mids else 3 for i in range(k))
        m2 = _round64(min(m2, rest - 64))
        m3 = rest - m2
        if m3 < 64:
            return None
        sizes = (m1, m2, m3)
    else:
        segments = (2,) * k
        sizes = (m1, rest)
    from .hashing import derive_seeds
    return FilterConfig(
        domain_bits=d,
        expected_keys=n,
        k=k,
        delta_vector=deltas,
        replica_vector=replicas,
        segment_assignment=segments,
        segment_sizes=sizes,
        exact_level=exact_level,
        seeds=tuple(derive_seeds(master_seed, 1 + sum(replicas))),
        reverse_mitigation=False,
    )


def advise(d: int, n: int, budget_bits: int,
           range_size: float = DEFAULT_ADVISOR_RANGE,
           point_weight: float = 1.0,
           C: float = 1.0,
           master_seed: int = DEFAULT_MASTER_SEED,
           sweep_points: int = 64) -> AdvisorResult:
    """Pick exact level, delta/replica/segment vectors, and segment split.

    The exact level is the highest whose full bitmap stays under 60% of
    the budget; the level above it is evaluated as a second candidate.
    For each candidate the mid-segment size is swept and the weighted
    norm ``fpr_w^2 = fpr_m^2 + point_weight^2 * fpr_p^2`` minimized,
    where ``fpr_m`` is the worst per-level FPR among levels a query of
    ``range_size`` can touch and ``fpr_p`` the point FPR.
    """
    if budget_bits < 8 * n:
        raise AdvisorError("advisor needs a budget of at least 8 bits per key")
    if range_size < 1:
        raise AdvisorError("range size must be >= 1")
    budget = ((budget_bits + 63) // 64) * 64

    base_level = None
    for level in range(d + 1):
        if 2 ** (d - level) < 0.6 * budget:
            base_level = level
            break
    if base_level is None:
        raise AdvisorError("exact bitmap alone exceeds the budget at all levels")

    max_range_level = min(int(math.floor(math.log2(range_size))), d) if range_size > 1 else 0

    diagnostics = []
    best_cfg = None
    best_w = math.inf
    for exact_level in (base_level, base_level + 1):
        if exact_level > d - 6:
            continue
        m1 = 1 << (d - exact_level)
        rest = budget - m1
        if rest < 128:
            continue
        cand_best = None
        for frac in np.linspace(0.05, 0.95, sweep_points):
            cfg = _candidate_config(d, n, budget, exact_level, int(frac * rest), master_seed)
            if cfg is None:
                continue
            profile = extended_profile(cfg, n, C)
            if max_range_level > exact_level:
                fpr_m = 1.0
            else:
                fpr_m = profile.max_fpr_up_to(max_range_level)
            fpr_p = profile.point
            fpr_w = math.sqrt(fpr_m ** 2 + (point_weight * fpr_p) ** 2)
            if cand_best is None or fpr_w < cand_best[0]:
                cand_best = (fpr_w, fpr_m, fpr_p, cfg)
        if cand_best is None:
            continue
        fpr_w, fpr_m, fpr_p, cfg = cand_best
        diagnostics.append(CandidateDiagnostics(
            exact_level=exact_level,
            m2=cfg.segment_sizes[1],
            fpr_m=fpr_m,
            fpr_p=fpr_p,
            fpr_w=fpr_w,
        ))
        if fpr_w < best_w:
            best_w = fpr_w
            best_cfg = cfg

    if best_cfg is None:
        raise AdvisorError("exact bitmap alone exceeds the budget at all candidate levels")
    return AdvisorResult(
        config=best_cfg,
        diagnostics=tuple(diagnostics),
        range_size=range_size,
        point_weight=point_weight,
    )
