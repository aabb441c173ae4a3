"""Placement optimization: greedy, exhaustive oracle, high-mobility closed forms.

The placement problem maximizes a monotone submodular set function (the load
reduction) over the uniform matroid of packet sets of size at most M, so the
greedy algorithm carries the classic 1 - 1/e guarantee.  This module also
implements the brute-force matroid/submodularity verification harnesses and
the entire high-mobility analysis: expected deliverable packet counts, the
threshold closed-form placements, the relaxed real-valued objective, and the
Jensen-gap bound check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from .channel import (
    LinkBudget,
    _gauss_legendre,
    _interference_complement_at,
    build_link_budget,
    success_probability,
)
from .load import average_load_fast, link_budget_for, shortfall_tables
from .model import (
    CapacityError,
    NeighborCacheDistribution,
    Placement,
    Scheme,
    SystemConfig,
    expected_stay_time,
    poisson_truncation,
    zipf_popularity,
)


class PacketSet:
    """A set of coded packets in canonical per-content-count form.

    Packets of one content are interchangeable (MDS coding), so a packet set
    is fully described by how many packets of each content it holds.
    Feasible sets are exactly those with at most M packets in total.
    """

    def __init__(self, counts, L: int):
        arr = np.asarray(counts, dtype=int)
        if np.any(arr < 0) or np.any(arr > L):
            raise ValueError(f"per-content counts must lie in 0..L={L}: {arr}")
        self.counts = arr
        self.L = L

    @property
    def size(self) -> int:
        return int(self.counts.sum())

    def is_feasible(self, M: int) -> bool:
        return self.size <= M

    def with_packet(self, i: int) -> "PacketSet":
        if self.counts[i] >= self.L:
            raise ValueError(f"content {i} already holds all {self.L} packets")
        counts = self.counts.copy()
        counts[i] += 1
        return PacketSet(counts, self.L)

    @classmethod
    def from_placement(cls, placement: Placement, cfg: SystemConfig) -> "PacketSet":
        return cls(placement.c, cfg.L)

    def to_placement(self, cfg: SystemConfig) -> Placement:
        return Placement(self.counts, cfg)


# ---------------------------------------------------------------------------
# Greedy and exhaustive placement
# ---------------------------------------------------------------------------

def greedy_placement(dist: NeighborCacheDistribution, cfg: SystemConfig):
    """Greedy packet-by-packet placement; returns (placement, trace).

    Each of the M steps adds the packet with the largest marginal load
    decrease, ties broken by lowest content index.  Gains depend only on
    per-content counts, so the per-content shortfall tables are computed once
    and consumed greedily.  The trace lists (content, gain) per step.
    """
    lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    tables, _ = shortfall_tables(dist, cfg, lb)
    c = np.zeros(cfg.F, dtype=int)
    trace = []
    for _ in range(cfg.M):
        gains = np.full(cfg.F, -np.inf)
        open_contents = c < cfg.L
        idx = np.flatnonzero(open_contents)
        gains[idx] = f[idx] * (tables[idx, c[idx]] - tables[idx, c[idx] + 1])
        best = int(np.argmax(gains))
        trace.append((best, float(gains[best])))
        c[best] += 1
    return Placement(c, cfg), trace


def _count_placements(F: int, L: int, M: int) -> int:
    counts = np.zeros(M + 1, dtype=object)
    counts[0] = 1
    for _ in range(F):
        new = np.zeros(M + 1, dtype=object)
        for s in range(M + 1):
            if counts[s]:
                for c in range(min(L, M - s) + 1):
                    new[s + c] += counts[s]
        counts = new
    return int(counts.sum())


def exhaustive_placement(
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    cap: int = 10**6,
) -> Placement:
    """Minimize the average load over every feasible placement.

    Verification oracle: refuses when the feasible set exceeds ``cap``
    placements.  Ties go to the lexicographically smallest placement.
    """
    n_feasible = _count_placements(cfg.F, cfg.L, cfg.M)
    if n_feasible > cap:
        raise CapacityError(
            f"{n_feasible} feasible placements exceed the enumeration cap {cap}"
        )
    lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    tables, _ = shortfall_tables(dist, cfg, lb)
    weighted = f[:, None] * tables

    best_value = math.inf
    best = None
    c = np.zeros(cfg.F, dtype=int)

    def recurse(i: int, budget: int, value: float):
        nonlocal best_value, best
        if i == cfg.F:
            if value < best_value:
                best_value = value
                best = c.copy()
            return
        for ci in range(min(cfg.L, budget) + 1):
            c[i] = ci
            recurse(i + 1, budget - ci, value + weighted[i, ci])
        c[i] = 0

    recurse(0, cfg.M, 0.0)
    return Placement(best, cfg)


# ---------------------------------------------------------------------------
# Matroid and submodularity property harnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatroidReport:
    passed: bool
    ground_size: int
    independent_sets: int
    counterexample: str | None = None


@lru_cache(maxsize=None)
def _verify_cardinality_matroid(n: int, M: int):
    """Brute-force the three matroid axioms over all subsets of an n-element set."""
    masks = list(range(1 << n))
    pc = [m.bit_count() for m in masks]
    independent = [pc[m] <= M for m in masks]
    n_indep = sum(independent)

    if not independent[0]:
        return MatroidReport(False, n, n_indep, "empty set not independent")

    # downward closure: every submask of an independent mask is independent
    for y in masks:
        if not independent[y]:
            continue
        sub = y
        while sub:
            sub = (sub - 1) & y
            if not independent[sub]:
                return MatroidReport(
                    False, n, n_indep, f"subset {sub:b} of independent {y:b} dependent"
                )

    # exchange: |X| < |Y| implies some y in Y \ X keeps X independent
    by_size = [np.array([m for m in masks if independent[m] and pc[m] == k], dtype=np.int64)
               for k in range(min(n, M) + 1)]
    for a in range(len(by_size)):
        for b in range(a + 1, len(by_size)):
            xs, ys = by_size[a], by_size[b]
            if xs.size == 0 or ys.size == 0:
                continue
            if a + 1 > M:
                return MatroidReport(
                    False, n, n_indep, f"size-{a} sets cannot grow within M={M}"
                )
            bad = (ys[None, :] & ~xs[:, None]) == 0
            if np.any(bad):
                xi, yi = np.argwhere(bad)[0]
                return MatroidReport(
                    False, n, n_indep,
                    f"no exchange element from {ys[yi]:b} into {xs[xi]:b}",
                )
    return MatroidReport(True, n, n_indep)


def check_matroid_axioms(F: int, L: int, M: int) -> MatroidReport:
    """Verify by exhaustive subset enumeration that packet sets of size <= M
    over the F*L-packet ground set form a matroid."""
    n = F * L
    if n > 12:
        raise CapacityError(f"ground set of {n} packets exceeds the brute-force cap 12")
    if not 0 <= M <= n:
        raise ValueError(f"M must lie in 0..{n}, got {M}")
    return _verify_cardinality_matroid(n, M)


@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    samples: int
    violations: int
    worst_excess: float   # largest gain(superset) - gain(subset) observed
    min_gain: float


def check_submodularity(
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    samples: int,
    seed: int,
    slack: float = 1e-9,
) -> SubmodularityReport:
    """Sample chains C' <= C and fresh packets; assert diminishing returns.

    The marginal load decrease from one more packet of content i must be no
    larger at the superset than at the subset, and never negative.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    tables, _ = shortfall_tables(dist, cfg, lb)

    def gain(ps: PacketSet, i: int) -> float:
        ci = ps.counts[i]
        return float(f[i] * (tables[i, ci] - tables[i, ci + 1]))

    violations = 0
    worst = -math.inf
    min_gain = math.inf
    for _ in range(samples):
        i = int(rng.integers(cfg.F))
        c = rng.integers(0, cfg.L + 1, cfg.F)
        c[i] = rng.integers(0, cfg.L)          # keep a packet of i addable
        c_sub = rng.integers(0, c + 1)
        superset, subset = PacketSet(c, cfg.L), PacketSet(c_sub, cfg.L)
        g_sup, g_sub = gain(superset, i), gain(subset, i)
        excess = g_sup - g_sub
        worst = max(worst, excess)
        min_gain = min(min_gain, g_sup, g_sub)
        if excess > slack or min(g_sup, g_sub) < -slack:
            violations += 1
    return SubmodularityReport(
        passed=(violations == 0),
        samples=samples,
        violations=violations,
        worst_excess=worst,
        min_gain=min_gain,
    )


# ---------------------------------------------------------------------------
# High-mobility analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HighMobilityConstants:
    """Per-stay deliverable packet counts and Jensen-gap bound constants."""

    oma_packets: float        # expected floored D2D delivery, orthogonal
    noma_packets: float       # floor-free expected delivery, non-orthogonal
    oma_gap_constant: float   # negative lower-bound constant, orthogonal
    noma_gap_constant: float  # negative lower-bound constant, non-orthogonal
    stay_time: float

    def __post_init__(self):
        if self.oma_packets < 0 or self.noma_packets < 0:
            raise ValueError("deliverable packet counts must be nonnegative")
        if self.oma_gap_constant > 0 or self.noma_gap_constant > 0:
            raise ValueError("gap constants must be nonpositive")


def _transmitter_pmf(q_i: np.ndarray, cfg: SystemConfig):
    """Poisson PMF of the per-content transmitter count, truncated with tail."""
    mean = (1.0 - q_i[0]) * cfg.mean_capable
    if mean == 0.0:
        return np.array([1.0]), 0.0
    u_max = poisson_truncation(cfg, mean)
    pu = stats.poisson.pmf(np.arange(u_max + 1), mean)
    return pu, float(stats.poisson.sf(u_max, mean))


def _floored_delivery(q_i: np.ndarray, cfg: SystemConfig, lb: LinkBudget | None = None):
    """E[u * budget(u)] and an upper bound on its truncation error.

    The error bound uses E[u; u > U] = mean * P[u >= U] and the fact that
    budgets are non-increasing in u, so every missing term is at most
    budget(1) per transmitter.
    """
    pu, _ = _transmitter_pmf(q_i, cfg)
    u_max = pu.size - 1
    if lb is None or lb.u_max < u_max:
        lb = build_link_budget(cfg, max(1, u_max))
    u = np.arange(pu.size)
    value = float(np.dot(pu, u * lb.budget[: pu.size]))
    mean = (1.0 - q_i[0]) * cfg.mean_capable
    if mean == 0.0:
        return value, 0.0
    tail_mean = mean * float(stats.poisson.sf(u_max - 1, mean))
    return value, float(lb.budget[1]) * tail_mean


def floored_delivery_mean(q_i: np.ndarray, cfg: SystemConfig, lb: LinkBudget | None = None) -> float:
    """E[u * budget(u)]: expected packets D2D hands over per stay, with floors.

    This is the saturation level of the high-mobility regime, where every
    transmitter delivers its full per-stay budget regardless of cache depth.
    """
    return _floored_delivery(q_i, cfg, lb)[0]


def oma_delivery_mean(q_i: np.ndarray, cfg: SystemConfig) -> float:
    """Expected floored D2D delivery per stay under orthogonal access."""
    return floored_delivery_mean(q_i, cfg.with_scheme(Scheme.ORTHOGONAL))


def noma_delivery_mean(q_i: np.ndarray, cfg: SystemConfig) -> float:
    """Floor-free expected D2D delivery per stay under non-orthogonal access:
    (L/mu) log(1+tau) E[u P[SINR>tau | u]]."""
    cfg = cfg.with_scheme(Scheme.NON_ORTHOGONAL)
    pu, _ = _transmitter_pmf(q_i, cfg)
    u_max = pu.size - 1
    p_succ = np.ones(u_max + 1)
    for u in range(1, u_max + 1):
        p_succ[u] = success_probability(u, cfg)
    u = np.arange(u_max + 1)
    return float(cfg.L / cfg.mu * math.log1p(cfg.tau) * np.dot(pu, u * p_succ))


def _beta_complement(r: float, cfg: SystemConfig) -> float:
    """1 - interference factor by adaptive quadrature.

    The integrand's knee sits at x = (tau * r**alpha)**(1/alpha), far below
    any fixed node spacing when tau*r**alpha is tiny; the envelope in the
    gap constant divides by this value, so it must be resolved adaptively.
    """
    a = cfg.tau * r ** cfg.alpha
    if a == 0.0:
        return 0.0
    knee = min(cfg.radius, a ** (1.0 / cfg.alpha))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(
            lambda x: a / (x ** cfg.alpha + a) * 2.0 * x / cfg.radius**2,
            0.0, cfg.radius, points=[knee], limit=200, epsabs=1e-300, epsrel=1e-10,
        )
    return value


def _noma_gap_constant(cfg: SystemConfig) -> float:
    """Lower-bound constant for the non-orthogonal Jensen gap.

    Integrates the per-distance envelope of u * beta(r)**(u-1) over the disc;
    the envelope peaks at u = -1/ln(beta), giving exp(-1)/(beta * -ln(beta)).
    Computed through the complement 1-beta for stability near beta = 1.
    """
    r, w = _gauss_legendre(cfg.quad_nodes, cfg.radius)
    betac = np.maximum([_beta_complement(rk, cfg) for rk in r], 1e-300)
    neg_log_beta = -np.log1p(-np.minimum(betac, 1.0 - 1e-16))
    envelope = math.exp(-1.0) / ((1.0 - betac) * neg_log_beta)
    integrand = np.exp(-(r ** cfg.alpha) * cfg.tau / cfg.snr) * envelope * 2.0 * r / cfg.radius**2
    return float(-cfg.L * math.log1p(cfg.tau) * np.dot(w, integrand))


def high_mobility_constants(
    dist: NeighborCacheDistribution, cfg: SystemConfig, content: int = 0
) -> HighMobilityConstants:
    """All high-mobility constants for one content's cache distribution."""
    q_i = dist.q[content]
    oma_cfg = cfg.with_scheme(Scheme.ORTHOGONAL)
    c_oma = -cfg.L * success_probability(1, oma_cfg) * math.log1p(cfg.tau)
    return HighMobilityConstants(
        oma_packets=oma_delivery_mean(q_i, cfg),
        noma_packets=noma_delivery_mean(q_i, cfg),
        oma_gap_constant=c_oma,
        noma_gap_constant=_noma_gap_constant(cfg.with_scheme(Scheme.NON_ORTHOGONAL)),
        stay_time=expected_stay_time(cfg),
    )


def _per_content_delivery(scheme: Scheme, dist: NeighborCacheDistribution, cfg: SystemConfig):
    fn = oma_delivery_mean if Scheme(scheme) is Scheme.ORTHOGONAL else noma_delivery_mean
    return np.array([fn(dist.q[i], cfg) for i in range(cfg.F)])


def high_mobility_continuous(deliverable: float, cfg: SystemConfig) -> np.ndarray:
    """Continuous optimum of the relaxed problem: threshold fill at L - deliverable.

    Contents are filled to the threshold t in popularity order until the
    memory runs out; if t <= 0 nothing is cached, and if memory exceeds F*t
    every content sits at t with the excess unused.
    """
    t = cfg.L - deliverable
    c = np.zeros(cfg.F)
    if t <= 0 or cfg.M == 0:
        return c
    if cfg.M >= cfg.F * t:
        c[:] = t
        return c
    k = math.ceil(cfg.M / t)
    c[: k - 1] = t
    c[k - 1] = cfg.M - (k - 1) * t
    return c


def _integerize(deliverable: float, cfg: SystemConfig) -> np.ndarray:
    """Exact integer optimum of the relaxed objective by marginal-value packing.

    Under the threshold t = L - deliverable, a content's packets up to
    floor(t) are each worth f_i, the packet crossing t is worth the
    fractional remainder of f_i, and anything beyond ceil(t) is worthless.
    Greedy by marginal value (ties to the more popular content) is optimal
    for this separable concave objective.
    """
    t = cfg.L - deliverable
    c = np.zeros(cfg.F, dtype=int)
    if t <= 0:
        return c
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    full = min(cfg.L, math.floor(t))
    frac = min(cfg.L, t) - full
    cap = min(cfg.L, full + (1 if frac > 0 else 0))
    for _ in range(cfg.M):
        marginal = np.where(c < full, f, np.where(c < cap, f * frac, -np.inf))
        best = int(np.argmax(marginal))
        if marginal[best] <= 0:
            break
        c[best] += 1
    return c


def high_mobility_placement(
    scheme: Scheme, dist: NeighborCacheDistribution, cfg: SystemConfig
) -> Placement:
    """Closed-form near-optimal placement for fast-moving neighbors.

    Uses the scheme's expected deliverable packet count as the per-content
    cache threshold.  With heterogeneous cache distributions the threshold is
    taken from content 1 and a warning flags the approximation.
    """
    delivery = _per_content_delivery(scheme, dist, cfg)
    if np.ptp(delivery) > 1e-9:
        warnings.warn(
            "heterogeneous cache distributions: using content 1's deliverable "
            "count for the closed-form threshold",
            stacklevel=2,
        )
    return Placement(_integerize(delivery[0], cfg), cfg)


def relaxed_objective(
    c,
    scheme: Scheme,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    delivery: np.ndarray | None = None,
) -> float:
    """Relaxed real-valued load: sum_i f_i (L - c_i - deliverable_i)^+.

    Accepts real placements subject to 0 <= c_i <= L and sum(c) <= M.  Pass
    ``delivery`` (per-content deliverable counts) to amortize its computation
    over many evaluations.
    """
    c = np.asarray(c, dtype=float)
    tol = 1e-9
    if c.shape != (cfg.F,):
        raise ValueError(f"placement must have F={cfg.F} entries")
    if np.any(c < -tol) or np.any(c > cfg.L + tol) or c.sum() > cfg.M + tol:
        raise ValueError(f"infeasible relaxed placement: {c}")
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    if delivery is None:
        delivery = _per_content_delivery(scheme, dist, cfg)
    return float(np.dot(f, np.maximum(0.0, cfg.L - c - delivery)))


@dataclass(frozen=True)
class JensenGapReport:
    gap: float
    bound: float
    ok: bool
    degenerate: bool = False


def jensen_gap_check(
    placement: Placement,
    scheme: Scheme,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
) -> JensenGapReport:
    """Gap between the exact average load and its Jensen-style composite.

    The composite moves the positive part outside the expectation, replacing
    the random D2D delivery with its floored mean; the shift is bounded by
    stay_time times the scheme's gap constant.
    """
    cfg = cfg.with_scheme(scheme)
    lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    pairs = [_floored_delivery(dist.q[i], cfg, lb) for i in range(cfg.F)]
    delivery = np.array([value for value, _ in pairs])
    composite = float(np.dot(f, np.maximum(0.0, cfg.L - placement.c - delivery)))
    evaluation = average_load_fast(placement, dist, cfg, lb)
    gap = abs(evaluation.total - composite)

    degenerate = False
    if cfg.scheme is Scheme.ORTHOGONAL:
        const = -cfg.L * success_probability(1, cfg) * math.log1p(cfg.tau)
    else:
        r, _ = _gauss_legendre(cfg.quad_nodes, cfg.radius)
        degenerate = bool(np.min(_interference_complement_at(r, cfg)) <= 0.0)
        const = _noma_gap_constant(cfg)
    bound = expected_stay_time(cfg) * abs(const)
    # both sides of the gap carry surfaced truncation error; allow for it
    slack = 1e-9 + evaluation.truncation_bound + float(
        np.dot(f, [err for _, err in pairs])
    )
    return JensenGapReport(gap=gap, bound=bound, ok=(gap <= bound + slack), degenerate=degenerate)
