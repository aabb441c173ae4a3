"""Base-station load of a request, and its average over the random model.

The BS must supply whatever part of a requested content neither the typical
user's own cache nor its D2D neighbors can cover.  The average load is an
expectation over the request (Zipf), the capable-user count (Poisson), and
the neighbors' cache contents (i.i.d. per-content PMFs).  Two independent
evaluators are provided: exact enumeration over neighbor cache vectors (the
oracle, feasible only for small truncation points) and a collapsed
thinned-Poisson + capped-convolution evaluator (the fast path, exact up to
the same truncation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import product

import numpy as np
from scipy import stats

from .channel import LinkBudget, build_link_budget
from .model import (
    CapacityError,
    NeighborCacheDistribution,
    Placement,
    SystemConfig,
    poisson_tail,
    poisson_truncation,
    zipf_popularity,
)

# Enumeration oracle refuses beyond this many neighbors per term: (L+1)**5
# vectors at L=5 is still cheap, (L+1)**6 is not.  Verification-only cap.
N_ENUM_MAX = 5


class Method(Enum):
    ENUM_EXACT = "enum_exact"
    CONVOLUTION = "convolution"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class LoadEvaluation:
    """Average BS load in packets, with per-content breakdown and provenance."""

    total: float
    per_content: np.ndarray
    truncation_bound: float
    method: Method

    def __post_init__(self):
        self.per_content.setflags(write=False)
        if self.truncation_bound < 0:
            raise ValueError("truncation bound must be nonnegative")
        if np.any(self.per_content < -1e-12):
            raise ValueError("per-content loads must be nonnegative")


def request_load(c_i: int, d, cfg: SystemConfig, lb: LinkBudget) -> int:
    """Packets the BS serves for one request, given neighbor cache counts d.

    u counts the neighbors holding at least one packet of the content; each
    of them delivers min(d_k, budget[u]) packets.  Neighbors with zero
    packets neither transmit nor count toward u.
    """
    if not 0 <= c_i <= cfg.L:
        raise ValueError(f"c_i must lie in 0..L={cfg.L}, got {c_i}")
    d = np.asarray(d, dtype=int)
    if d.size and (d.min() < 0 or d.max() > cfg.L):
        raise ValueError(f"neighbor packet counts must lie in 0..L={cfg.L}: {d}")
    transmitters = d[d > 0]
    u = transmitters.size
    if u == 0:
        return cfg.L - c_i
    if u > lb.u_max:
        raise ValueError(f"link budget covers u <= {lb.u_max}, need u = {u}")
    delivered = np.minimum(transmitters, lb.budget[u]).sum()
    return int(max(0, cfg.L - c_i - delivered))


def _saturating_self_convolutions(pmf: np.ndarray, copies: int, cap: int) -> np.ndarray:
    """Distribution of a sum of `copies` i.i.d. draws, mass at >= cap folded into cap.

    Folding is exact for our use: every saturated outcome contributes zero to
    the positive-part load, so only the bins below cap need to be exact.
    """
    dist = np.zeros(cap + 1)
    dist[0] = 1.0
    for _ in range(copies):
        full = np.convolve(dist, pmf)
        dist = full[: cap + 1].copy()
        dist[cap] += full[cap + 1 :].sum()
    return dist


def delivered_packets_pmf(q_i: np.ndarray, cfg: SystemConfig, lb: LinkBudget):
    """PMF of the D2D-delivered packet count for one content, and its tail bound.

    Collapses the (capable-count, cache-vector) expectation: the number of
    transmitters is the capable-user Poisson thinned by P[d > 0], and each
    transmitter's packet count is the cache PMF conditioned on d > 0, capped
    at the budget for that transmitter count.  Mass at >= L is folded into
    the L bin (it can never leave residual load).
    """
    L = cfg.L
    q0 = q_i[0]
    mean = (1.0 - q0) * cfg.mean_capable
    if mean == 0.0:
        pmf = np.zeros(L + 1)
        pmf[0] = 1.0
        return pmf, 0.0
    u_max = poisson_truncation(cfg, mean)
    if u_max > lb.u_max:
        raise ValueError(f"link budget covers u <= {lb.u_max}, need u = {u_max}")
    pu = stats.poisson.pmf(np.arange(u_max + 1), mean)
    cond = q_i[1:] / (1.0 - q0)  # packet-count PMF of a transmitter, on 1..L

    mixed = np.zeros(L + 1)
    mixed[0] = pu[0]
    for u in range(1, u_max + 1):
        b = int(lb.budget[u])
        per_tx = np.zeros(L + 1)
        if b == 0:
            per_tx[0] = 1.0
        elif b >= L:
            per_tx[1:] = cond
        else:
            per_tx[1:b] = cond[: b - 1]
            per_tx[b] = cond[b - 1 :].sum()
        mixed += pu[u] * _saturating_self_convolutions(per_tx, u, L)
    return mixed, poisson_tail(mean, u_max)


def shortfall_table(q_i: np.ndarray, cfg: SystemConfig, lb: LinkBudget):
    """E[(L - c - delivered)^+] for c = 0..L, for one content.

    The delivered-packet distribution does not depend on the typical user's
    own cache, so one PMF serves every cache level.
    """
    pmf, tail = delivered_packets_pmf(q_i, cfg, lb)
    s = np.arange(cfg.L + 1)
    table = np.array(
        [np.dot(pmf, np.maximum(0, cfg.L - c - s)) for c in range(cfg.L + 1)]
    )
    return table, tail


def shortfall_tables(dist: NeighborCacheDistribution, cfg: SystemConfig, lb: LinkBudget):
    """Per-content shortfall tables, shape (F, L+1), plus per-content tail masses."""
    tables = np.empty((cfg.F, cfg.L + 1))
    tails = np.empty(cfg.F)
    for i in range(cfg.F):
        tables[i], tails[i] = shortfall_table(dist.q[i], cfg, lb)
    return tables, tails


def link_budget_for(cfg: SystemConfig) -> LinkBudget:
    """Link budget covering every transmitter count the truncated sums can see."""
    return build_link_budget(cfg, max(1, poisson_truncation(cfg)))


def average_load_fast(
    placement: Placement,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    lb: LinkBudget | None = None,
) -> LoadEvaluation:
    """Average BS load by the thinned-Poisson + capped-convolution collapse.

    Agrees with the enumeration oracle up to the reported truncation bounds;
    the collapse is gated by that equivalence in the test suite.
    """
    if lb is None:
        lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    tables, tails = shortfall_tables(dist, cfg, lb)
    per_content = f * tables[np.arange(cfg.F), placement.c]
    bound = float((f * cfg.L * tails).sum())
    return LoadEvaluation(
        total=float(per_content.sum()),
        per_content=per_content,
        truncation_bound=bound,
        method=Method.CONVOLUTION,
    )


def average_load_enum(
    placement: Placement,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
) -> LoadEvaluation:
    """Average BS load by exact enumeration over neighbor cache vectors.

    Enumerates every (L+1)**n cache vector for each capable-user count n up
    to the Poisson truncation point.  Verification oracle: refuses when the
    truncation point exceeds N_ENUM_MAX.
    """
    n_max = poisson_truncation(cfg)
    if n_max > N_ENUM_MAX:
        raise CapacityError(
            f"enumeration needs n <= {N_ENUM_MAX}, truncation point is {n_max}; "
            "use average_load_fast"
        )
    lb = build_link_budget(cfg, max(1, n_max))
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    mean = cfg.mean_capable
    p_n = stats.poisson.pmf(np.arange(n_max + 1), mean) if mean > 0 else np.array([1.0])

    per_content = np.zeros(cfg.F)
    for i in range(cfg.F):
        q_i = dist.q[i]
        c_i = int(placement.c[i])
        expect = 0.0
        for n in range(p_n.size):
            term = 0.0
            for d in product(range(cfg.L + 1), repeat=n):
                weight = math.prod(q_i[dk] for dk in d)
                if weight == 0.0:
                    continue
                term += weight * request_load(c_i, d, cfg, lb)
            expect += p_n[n] * term
        per_content[i] = f[i] * expect
    bound = float(cfg.L * poisson_tail(mean, n_max))
    return LoadEvaluation(
        total=float(per_content.sum()),
        per_content=per_content,
        truncation_bound=bound,
        method=Method.ENUM_EXACT,
    )


def marginal_gain(
    placement: Placement,
    i: int,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    lb: LinkBudget | None = None,
) -> float:
    """Decrease in average load from caching one more packet of content i."""
    c_i = int(placement.c[i])
    if c_i >= cfg.L:
        raise ValueError(f"content {i} already holds all L={cfg.L} packets")
    if lb is None:
        lb = link_budget_for(cfg)
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    table, _ = shortfall_table(dist.q[i], cfg, lb)
    return float(f[i] * (table[c_i] - table[c_i + 1]))
