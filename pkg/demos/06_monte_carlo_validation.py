"""End-to-end statistical validation of the analytic load evaluator.

Samples the full model (Poisson neighbor counts, i.i.d. caches, per-request
shortfalls) and compares the confidence interval against the convolution
evaluator at the greedy placement.
"""

from d2dcache import (
    NeighborCacheDistribution,
    Scheme,
    average_load_fast,
    default_config,
    estimate_average_load,
    greedy_placement,
)


def main():
    dist = NeighborCacheDistribution.uniform(5, 5)
    trials = 50_000
    print(f"{trials} trials per point, stratified over the request popularity")
    print("snr_db  scheme           analytic     estimate +- stderr     sigmas")
    for snr_db in (0, 10, 20, 30, 40):
        for scheme in Scheme:
            cfg = default_config(snr=10.0 ** (snr_db / 10), scheme=scheme)
            placement = greedy_placement(dist, cfg)[0]
            exact = average_load_fast(placement, dist, cfg).total
            est, se = estimate_average_load(placement, dist, cfg, trials,
                                            seed=snr_db)
            sig = abs(est - exact) / se if se else 0.0
            print(f"{snr_db:5d}   {scheme.value:15s}  {exact:.6f}"
                  f"    {est:.6f} +- {se:.6f}   {sig:5.2f}")
    print("\nagreement within ~3 sigma everywhere validates the collapsed")
    print("evaluator end to end, independent of its convolution machinery.")


if __name__ == "__main__":
    main()
