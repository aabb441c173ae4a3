"""Domain parameters and the closed-form traffic/mobility distributions.

The network model: a typical user with a cache of ``M`` packets chooses how
many coded packets of each of ``F`` contents to store.  Neighbors wander in
and out of its communication disc (Poisson arrivals at rate ``lam``, Poisson
departures at rate ``mu``), each is battery-capable with probability ``eta``,
and each independently caches a random number of packets of every content.
Requests follow a Zipf popularity law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import stats


class Scheme(str, Enum):
    """Multiple-access scheme used by simultaneously transmitting neighbors."""

    ORTHOGONAL = "orthogonal"
    NON_ORTHOGONAL = "non_orthogonal"


class CapacityError(ValueError):
    """An exact/brute-force routine was asked for more work than its cap allows."""


def db_to_linear(x_db):
    """Convert a dB quantity to linear scale."""
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    """Convert a linear-scale quantity to dB."""
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of the network, channel, and mobility model.

    ``tau`` and ``snr`` are stored in linear scale; dB conversion happens at
    the CLI boundary only.  ``n_trunc_epsilon`` and ``quad_nodes`` are
    numerical-method settings, not physical parameters.
    """

    F: int                      # number of contents
    gamma: float                # Zipf exponent
    L: int                      # packets per content
    M: int                      # typical-user memory, in packets
    eta: float                  # probability a move-in user can transmit
    lam: float                  # mean arrival rate of move-in users
    mu: float                   # mean departure rate
    tau: float                  # SINR threshold, linear
    radius: float               # D2D communication range
    alpha: float                # path-loss exponent
    snr: float                  # transmit SNR, linear
    scheme: Scheme = Scheme.ORTHOGONAL
    n_trunc_epsilon: float = 1e-9
    quad_nodes: int = 64

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (isinstance(self.F, int) and self.F >= 1):
            raise ValueError(f"F must be an integer >= 1, got {self.F!r}")
        if not (isinstance(self.L, int) and self.L >= 1):
            raise ValueError(f"L must be an integer >= 1, got {self.L!r}")
        if not (isinstance(self.M, int) and 0 <= self.M <= self.F * self.L):
            raise ValueError(f"M must be an integer in [0, F*L], got {self.M!r}")
        if not (isinstance(self.quad_nodes, int) and self.quad_nodes >= 8):
            raise ValueError(f"quad_nodes must be an integer >= 8, got {self.quad_nodes!r}")
        checks = [
            ("gamma", self.gamma, self.gamma >= 0),
            ("eta", self.eta, 0 <= self.eta <= 1),
            ("lam", self.lam, self.lam >= 0),
            ("mu", self.mu, self.mu > 0),
            ("tau", self.tau, self.tau > 0),
            ("radius", self.radius, self.radius > 0),
            ("alpha", self.alpha, self.alpha > 0),
            ("snr", self.snr, self.snr > 0),
            ("n_trunc_epsilon", self.n_trunc_epsilon, 0 < self.n_trunc_epsilon < 1),
        ]
        for name, value, ok in checks:
            if not (ok and math.isfinite(float(value))):
                raise ValueError(f"{name} out of range: {value!r}")

    @property
    def mean_capable(self) -> float:
        """Mean number of transmit-capable users inside the disc (eta*lam/mu)."""
        return self.eta * self.lam / self.mu

    def with_scheme(self, scheme: Scheme) -> "SystemConfig":
        return replace(self, scheme=Scheme(scheme))


def default_config(**overrides) -> SystemConfig:
    """Small benchmark scenario used throughout the tests and demos.

    F=5 contents, gamma=0.6, L=5 packets each, M=5 packet memory, eta=0.5,
    lam=mu=1, tau=5 dB, radius=5, alpha=4, snr=20 dB, orthogonal access.
    """
    params = dict(
        F=5, gamma=0.6, L=5, M=5, eta=0.5, lam=1.0, mu=1.0,
        tau=db_to_linear(5.0), radius=5.0, alpha=4.0, snr=db_to_linear(20.0),
        scheme=Scheme.ORTHOGONAL, n_trunc_epsilon=1e-9, quad_nodes=64,
    )
    params.update(overrides)
    return SystemConfig(**params)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class ContentPopularity:
    """Normalized, non-increasing request probabilities over the F contents."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("popularity must be a non-empty 1-d vector")
        if np.any(p <= 0):
            raise ValueError("popularity entries must be positive")
        if np.any(np.diff(p) > 0):
            raise ValueError("popularity must be non-increasing")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"popularity must sum to 1, got {p.sum()!r}")
        self.probs = _readonly(p)

    def __len__(self):
        return self.probs.size


def zipf_popularity(F: int, gamma: float) -> ContentPopularity:
    """Zipf request probabilities: rank-i weight i**(-gamma), normalized."""
    if not (isinstance(F, int) and F >= 1):
        raise ValueError(f"F must be an integer >= 1, got {F!r}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    weights = np.arange(1, F + 1, dtype=float) ** (-float(gamma))
    return ContentPopularity(weights / weights.sum())


class NeighborCacheDistribution:
    """Per-content PMF of the packet count a neighboring user caches.

    ``q[i, d]`` is the probability a neighbor holds exactly ``d`` packets of
    content ``i``, with d in 0..L.  Rows are independent and identical across
    neighbors.
    """

    def __init__(self, q):
        arr = np.asarray(q, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError("cache distribution must be an (F, L+1) matrix")
        if np.any(arr < 0):
            raise ValueError("cache PMF entries must be nonnegative")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise ValueError(f"each per-content PMF must sum to 1, got sums {sums}")
        self.q = _readonly(arr)

    @property
    def F(self) -> int:
        return self.q.shape[0]

    @property
    def L(self) -> int:
        return self.q.shape[1] - 1

    @classmethod
    def uniform(cls, F: int, L: int) -> "NeighborCacheDistribution":
        """Uniform PMF 1/(L+1) over {0..L} for every content (the default)."""
        return cls(np.full((F, L + 1), 1.0 / (L + 1)))


class Placement:
    """The typical user's cache vector: packets stored per content.

    Construction validates the cache constraints against the config:
    0 <= c[i] <= L and sum(c) <= M.  Violations raise, never clamp.
    """

    def __init__(self, c, cfg: SystemConfig):
        arr = np.asarray(c)
        if arr.ndim != 1 or arr.size != cfg.F:
            raise ValueError(f"placement must have F={cfg.F} entries, got shape {arr.shape}")
        if not np.all(arr == np.floor(arr)):
            raise ValueError("placement entries must be integers")
        arr = arr.astype(int)
        if np.any(arr < 0) or np.any(arr > cfg.L):
            raise ValueError(f"placement entries must lie in 0..L={cfg.L}: {arr}")
        if arr.sum() > cfg.M:
            raise ValueError(f"placement uses {arr.sum()} packets, memory is M={cfg.M}")
        self.c = _readonly(arr)

    def __eq__(self, other):
        return isinstance(other, Placement) and np.array_equal(self.c, other.c)

    def __repr__(self):
        return f"Placement({self.c.tolist()})"


def capable_user_pmf(cfg: SystemConfig, n: int) -> float:
    """P[n transmit-capable users in the disc]: Poisson with mean eta*lam/mu.

    The arrival stream is thinned by the energy-availability probability, so
    the stationary capable-user count is Poisson(eta*lam/mu).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    mean = cfg.mean_capable
    if mean == 0.0:
        return 1.0 if n == 0 else 0.0
    return float(stats.poisson.pmf(n, mean))


def poisson_tail(mean: float, n: int) -> float:
    """P[X > n] for X ~ Poisson(mean)."""
    if mean == 0.0:
        return 0.0
    return float(stats.poisson.sf(n, mean))


def poisson_truncation(cfg: SystemConfig, mean: float | None = None) -> int:
    """Smallest N with Poisson tail mass beyond N below cfg.n_trunc_epsilon.

    Summations over the capable-user count are cut at this N; the induced
    absolute error on the average load is at most L times the tail mass and
    is reported by the evaluators, not hidden.
    """
    if mean is None:
        mean = cfg.mean_capable
    if mean == 0.0:
        return 0
    n = int(stats.poisson.ppf(1.0 - cfg.n_trunc_epsilon, mean))
    while poisson_tail(mean, n) >= cfg.n_trunc_epsilon:
        n += 1
    while n > 0 and poisson_tail(mean, n - 1) < cfg.n_trunc_epsilon:
        n -= 1
    return n


def expected_stay_time(cfg: SystemConfig) -> float:
    """Expected time a neighbor stays inside the disc: 1/mu."""
    return 1.0 / cfg.mu
