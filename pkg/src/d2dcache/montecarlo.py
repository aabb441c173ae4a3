"""End-to-end sampling of the system model, for statistical cross-validation.

Draws capable-user counts, neighbor cache contents, and positions straight
from the model's distributions and averages the resulting per-request BS
load.  This estimates the same mean-field objective the analytic evaluators
compute (budgets built from the expected stay time), so agreement within
confidence intervals validates those evaluators end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import packet_budget
from .model import NeighborCacheDistribution, Placement, SystemConfig, zipf_popularity


@dataclass(frozen=True)
class SampledState:
    """One draw of the neighborhood: capable-user count, caches, positions."""

    n: int
    d: np.ndarray          # (n, F) cached-packet counts
    positions: np.ndarray  # (n,) radii in [0, radius]

    def __post_init__(self):
        self.d.setflags(write=False)
        self.positions.setflags(write=False)


def sample_state(
    dist: NeighborCacheDistribution, cfg: SystemConfig, rng: np.random.Generator
) -> SampledState:
    """Draw one neighborhood: Poisson count, i.i.d. caches, uniform-in-disc radii."""
    n = int(rng.poisson(cfg.mean_capable))
    cum = np.cumsum(dist.q, axis=1)
    d = np.empty((n, cfg.F), dtype=int)
    if n:
        u = rng.random((n, cfg.F))
        for i in range(cfg.F):
            # inverse-CDF draw; clip guards the cumsum's last-bin float fuzz
            d[:, i] = np.minimum(
                np.searchsorted(cum[i], u[:, i], side="right"), cfg.L
            )
    positions = cfg.radius * np.sqrt(rng.random(n))
    return SampledState(n=n, d=d, positions=positions)


class _BudgetCache:
    """Packet budgets computed on demand; sampled counts are unbounded."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.known = {0: 0}

    def __call__(self, u: int) -> int:
        if u not in self.known:
            self.known[u] = packet_budget(u, self.cfg)
        return self.known[u]


def estimate_average_load(
    placement: Placement,
    dist: NeighborCacheDistribution,
    cfg: SystemConfig,
    trials: int,
    seed: int,
    stratified: bool = True,
):
    """Monte Carlo estimate of the average BS load; returns (estimate, stderr).

    Each trial draws a fresh neighborhood from its own RNG stream (keyed by
    seed and trial index, so growing the trial count never changes earlier
    trials).  With ``stratified`` the request is averaged exactly over the
    popularity weights inside each trial; otherwise the content is sampled.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed}")
    f = zipf_popularity(cfg.F, cfg.gamma).probs
    cum_f = np.cumsum(f)
    budget = _BudgetCache(cfg)
    c = placement.c
    L = cfg.L

    values = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        state = sample_state(dist, cfg, rng)
        if state.n == 0:
            shortfall = (L - c).astype(float)
        else:
            u = (state.d > 0).sum(axis=0)
            delivered = np.zeros(cfg.F)
            for i in np.flatnonzero(u):
                b = budget(int(u[i]))
                di = state.d[:, i]
                delivered[i] = np.minimum(di[di > 0], b).sum()
            shortfall = np.maximum(0.0, L - c - delivered)
        if stratified:
            values[t] = float(np.dot(f, shortfall))
        else:
            i = int(np.searchsorted(cum_f, rng.random(), side="right"))
            values[t] = shortfall[min(i, cfg.F - 1)]

    estimate = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return estimate, stderr
