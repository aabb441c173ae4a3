"""Average base-station load of a mobility-aware D2D caching system.

Library layout:

- ``model``: system parameters, Zipf popularity, Poisson mobility counts
- ``channel``: success probabilities, rates, per-stay packet budgets
- ``load``: exact and fast evaluators of the average BS load
- ``optimize``: greedy/exhaustive placement, high-mobility closed forms,
  matroid and submodularity property harnesses
- ``montecarlo``: end-to-end statistical cross-validation
- ``cli``: experiment driver (eval / optimize / sweep / validate)
"""

from .channel import (
    LinkBudget,
    build_link_budget,
    interference_factor,
    packet_budget,
    rate,
    success_probability,
    success_probability_mc,
)
from .load import (
    LoadEvaluation,
    Method,
    average_load_enum,
    average_load_fast,
    link_budget_for,
    marginal_gain,
    request_load,
)
from .model import (
    CapacityError,
    ContentPopularity,
    NeighborCacheDistribution,
    Placement,
    Scheme,
    SystemConfig,
    capable_user_pmf,
    db_to_linear,
    default_config,
    expected_stay_time,
    linear_to_db,
    poisson_truncation,
    zipf_popularity,
)
from .montecarlo import SampledState, estimate_average_load, sample_state
from .optimize import (
    HighMobilityConstants,
    JensenGapReport,
    MatroidReport,
    PacketSet,
    SubmodularityReport,
    check_matroid_axioms,
    check_submodularity,
    exhaustive_placement,
    greedy_placement,
    high_mobility_constants,
    high_mobility_continuous,
    high_mobility_placement,
    jensen_gap_check,
    noma_delivery_mean,
    oma_delivery_mean,
    relaxed_objective,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ContentPopularity",
    "HighMobilityConstants",
    "JensenGapReport",
    "LinkBudget",
    "LoadEvaluation",
    "MatroidReport",
    "Method",
    "NeighborCacheDistribution",
    "PacketSet",
    "Placement",
    "SampledState",
    "Scheme",
    "SubmodularityReport",
    "SystemConfig",
    "average_load_enum",
    "average_load_fast",
    "build_link_budget",
    "capable_user_pmf",
    "check_matroid_axioms",
    "check_submodularity",
    "db_to_linear",
    "default_config",
    "estimate_average_load",
    "exhaustive_placement",
    "expected_stay_time",
    "greedy_placement",
    "high_mobility_constants",
    "high_mobility_continuous",
    "high_mobility_placement",
    "interference_factor",
    "jensen_gap_check",
    "linear_to_db",
    "link_budget_for",
    "marginal_gain",
    "noma_delivery_mean",
    "oma_delivery_mean",
    "packet_budget",
    "poisson_truncation",
    "rate",
    "relaxed_objective",
    "request_load",
    "sample_state",
    "success_probability",
    "success_probability_mc",
    "zipf_popularity",
]
