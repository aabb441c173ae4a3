import numpy as np
import pytest

from d2dcache import (
    CapacityError,
    Method,
    NeighborCacheDistribution,
    Placement,
    average_load_enum,
    average_load_fast,
    build_link_budget,
    default_config,
    link_budget_for,
    marginal_gain,
    request_load,
    zipf_popularity,
)


def random_small_instance(rng, sharp=False):
    """Random F<=3, L<=3 instance whose enum truncation point stays <= 4.

    Sharp instances use a tiny mean and epsilon so the truncation bounds sit
    near 1e-9 and the equivalence check is meaningful at full precision.
    """
    from d2dcache import poisson_truncation

    F, L = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    while True:
        if sharp:
            lam, eps = float(rng.uniform(0.0, 0.04)), 1e-10
        else:
            lam, eps = float(rng.uniform(0.0, 1.2)), 10.0 ** -rng.integers(3, 5)
        cfg = default_config(
            F=F, L=L, M=int(rng.integers(0, F * L + 1)),
            gamma=float(rng.uniform(0.0, 2.0)), eta=float(rng.uniform(0.1, 1.0)),
            lam=lam, mu=float(rng.uniform(0.5, 2.0)), n_trunc_epsilon=float(eps),
            snr=float(10 ** rng.uniform(0, 4)), tau=float(10 ** rng.uniform(-0.5, 1.0)),
        )
        if poisson_truncation(cfg) <= 4:
            break
    q = rng.random((F, L + 1))
    q /= q.sum(axis=1, keepdims=True)
    dist = NeighborCacheDistribution(q)
    c = rng.integers(0, L + 1, F)
    while c.sum() > cfg.M:
        c[np.argmax(c)] -= 1
    return cfg, dist, Placement(c, cfg)


class TestRequestLoad:
    def test_full_self_cache_covers_everything(self, cfg):
        lb = build_link_budget(cfg, 3)
        for d in ([], [3], [1, 2, 5]):
            assert request_load(cfg.L, d, cfg, lb) == 0

    def test_direct_arithmetic(self):
        cfg = default_config()
        lb = build_link_budget(cfg, 1)
        assert lb.budget[1] == 1   # precondition for the arithmetic below
        # (L - c - min(d, B(1)))^+ = (5 - 2 - 1)^+ = 2
        assert request_load(2, [4], cfg, lb) == 2

    def test_all_zero_neighbors(self, cfg):
        lb = build_link_budget(cfg, 3)
        assert request_load(0, [0, 0, 0], cfg, lb) == cfg.L

    def test_zero_packet_neighbors_do_not_count_toward_u(self):
        # u=1 keeps the big u=1 budget even with idle neighbors around
        cfg = default_config(snr=1e4)
        lb = build_link_budget(cfg, 4)
        assert lb.budget[1] > lb.budget[2]
        assert request_load(0, [3, 0, 0, 0], cfg, lb) == request_load(0, [3], cfg, lb)

    def test_budget_zero_still_counts_transmitter(self):
        # both neighbors transmit but deliver nothing when budget(2) = 0
        cfg = default_config()
        lb = build_link_budget(cfg, 2)
        assert lb.budget[2] == 0
        assert request_load(1, [4, 4], cfg, lb) == cfg.L - 1

    def test_domain_errors(self, cfg):
        lb = build_link_budget(cfg, 2)
        with pytest.raises(ValueError):
            request_load(-1, [0], cfg, lb)
        with pytest.raises(ValueError):
            request_load(cfg.L + 1, [0], cfg, lb)
        with pytest.raises(ValueError):
            request_load(0, [cfg.L + 1], cfg, lb)


class TestEnumEvaluator:
    def test_no_neighbors_means_full_shortfall(self):
        cfg = default_config(lam=0.0)
        dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
        pl = Placement([3, 1, 1, 0, 0], cfg)
        ev = average_load_enum(pl, dist, cfg)
        f = zipf_popularity(cfg.F, cfg.gamma).probs
        assert ev.total == pytest.approx(np.dot(f, cfg.L - pl.c), abs=1e-12)
        assert ev.method is Method.ENUM_EXACT

    def test_full_memory_zero_load(self):
        cfg = default_config(F=2, L=2, M=4, lam=0.6, n_trunc_epsilon=1e-3)
        dist = NeighborCacheDistribution.uniform(2, 2)
        ev = average_load_enum(Placement([2, 2], cfg), dist, cfg)
        assert ev.total == 0.0

    def test_refuses_large_truncation(self):
        cfg = default_config(lam=20.0)   # truncation point far beyond 5
        dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
        with pytest.raises(CapacityError):
            average_load_enum(Placement([0] * 5, cfg), dist, cfg)


class TestFastEvaluator:
    def test_matches_enum_trivially_without_neighbors(self):
        cfg = default_config(lam=0.0)
        dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
        pl = Placement([2, 1, 1, 1, 0], cfg)
        e = average_load_enum(pl, dist, cfg)
        f = average_load_fast(pl, dist, cfg)
        assert f.total == pytest.approx(e.total, abs=1e-12)
        assert f.method is Method.CONVOLUTION

    def test_never_transmitting_content(self, cfg):
        # content caching nothing with probability 1 gets no D2D help
        q = np.full((cfg.F, cfg.L + 1), 1.0 / (cfg.L + 1))
        q[2] = 0.0
        q[2, 0] = 1.0
        dist = NeighborCacheDistribution(q)
        pl = Placement([1, 1, 1, 1, 1], cfg)
        ev = average_load_fast(pl, dist, cfg)
        f = zipf_popularity(cfg.F, cfg.gamma).probs
        assert ev.per_content[2] == pytest.approx(f[2] * (cfg.L - 1), abs=1e-12)

    @pytest.mark.parametrize("sharp", [False, True])
    def test_agrees_with_enum_oracle(self, sharp):
        rng = np.random.default_rng(20240915 + sharp)
        for _ in range(30):
            cfg, dist, pl = random_small_instance(rng, sharp=sharp)
            e = average_load_enum(pl, dist, cfg)
            f = average_load_fast(pl, dist, cfg)
            tol = 1e-9 + e.truncation_bound + f.truncation_bound
            assert abs(e.total - f.total) <= tol
            assert np.all(np.abs(e.per_content - f.per_content)
                          <= tol * np.ones(cfg.F))

    def test_default_config_against_enum(self):
        # epsilon tuned so the Poisson truncation point is 5
        cfg = default_config(n_trunc_epsilon=1e-4)
        dist = NeighborCacheDistribution.uniform(cfg.F, cfg.L)
        pl = Placement([5, 0, 0, 0, 0], cfg)
        e = average_load_enum(pl, dist, cfg)
        f = average_load_fast(pl, dist, cfg)
        assert abs(e.total - f.total) <= 1e-9 + e.truncation_bound + f.truncation_bound

    def test_bounds_and_decomposability(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            cfg, dist, pl = random_small_instance(rng)
            ev = average_load_fast(pl, dist, cfg)
            f = zipf_popularity(cfg.F, cfg.gamma).probs
            assert 0.0 <= ev.total <= cfg.L + 1e-12
            assert ev.total <= np.dot(f, cfg.L - pl.c) + 1e-12
            assert ev.total == pytest.approx(ev.per_content.sum(), abs=1e-12)
            assert np.all(ev.per_content <= f * cfg.L + 1e-12)

    def test_per_content_depends_only_on_own_distribution(self, cfg):
        q = np.full((cfg.F, cfg.L + 1), 1.0 / (cfg.L + 1))
        q2 = q.copy()
        q2[1] = [0.5, 0.1, 0.1, 0.1, 0.1, 0.1]
        pl = Placement([1, 1, 1, 1, 1], cfg)
        a = average_load_fast(pl, NeighborCacheDistribution(q), cfg)
        b = average_load_fast(pl, NeighborCacheDistribution(q2), cfg)
        keep = [0, 2, 3, 4]
        assert np.allclose(a.per_content[keep], b.per_content[keep], atol=1e-15)
        assert a.per_content[1] != b.per_content[1]

    def test_monotone_in_placement(self, cfg, uniform_dist):
        lb = link_budget_for(cfg)
        base = Placement([2, 1, 1, 0, 0], cfg)
        total = average_load_fast(base, uniform_dist, cfg, lb).total
        for i in range(cfg.F):
            c = base.c.copy()
            c[i] += 1
            grown = average_load_fast(Placement(c, cfg), uniform_dist, cfg, lb)
            assert grown.total <= total + 1e-12


class TestMarginalGain:
    def test_equals_popularity_when_no_help(self, cfg):
        q = np.zeros((cfg.F, cfg.L + 1))
        q[:, 0] = 1.0
        dist = NeighborCacheDistribution(q)
        f = zipf_popularity(cfg.F, cfg.gamma).probs
        for i in range(cfg.F):
            g = marginal_gain(Placement([1, 1, 1, 1, 1], cfg), i, dist, cfg)
            assert g == pytest.approx(f[i], abs=1e-12)

    def test_nonnegative_and_diminishing(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            cfg, dist, _ = random_small_instance(rng)
            lb = link_budget_for(cfg)
            for i in range(cfg.F):
                gains = []
                for k in range(cfg.L):
                    c = np.zeros(cfg.F, dtype=int)
                    c[i] = min(k, cfg.M) if cfg.M else 0
                    if c.sum() > cfg.M or c[i] != k:
                        break
                    gains.append(marginal_gain(Placement(c, cfg), i, dist, cfg, lb))
                assert all(g >= -1e-12 for g in gains)
                assert all(b <= a + 1e-9 for a, b in zip(gains, gains[1:]))

    def test_error_when_content_full(self, cfg, uniform_dist):
        with pytest.raises(ValueError):
            marginal_gain(Placement([5, 0, 0, 0, 0], cfg), 0, uniform_dist, cfg)

    def test_matches_direct_difference(self, cfg, uniform_dist):
        lb = link_budget_for(cfg)
        pl = Placement([2, 0, 0, 0, 0], cfg)
        grown = Placement([3, 0, 0, 0, 0], cfg)
        direct = (average_load_fast(pl, uniform_dist, cfg, lb).total
                  - average_load_fast(grown, uniform_dist, cfg, lb).total)
        assert marginal_gain(pl, 0, uniform_dist, cfg, lb) == pytest.approx(
            direct, abs=1e-12)
