"""Fair division of indivisible items under uniformly random item renaming.

The library covers: bundles/orderings/allocations over a bitmask item
universe (core), exact-rational valuation families and the renaming action
(valuations), EF/EFX/SD-EF/SD-EFX checks (fairness), the two picking
procedures (algorithms), preference hypergraphs with automorphism and orbit
enumeration (hypergraph), brute-force existence and exact-probability
oracles (oracle), and a reproducible Monte-Carlo engine (montecarlo).
"""

from .core import (
    Allocation,
    ConfigError,
    InvariantError,
    ItemOrdering,
    ItemSet,
    MAX_ITEMS,
    Permutation,
    SizeError,
    UnsupportedError,
    apply_permutation,
    kth_best,
    permute_ordering,
    sd_dominates,
)
from .valuations import (
    Additive,
    BudgetAdditive,
    SingleMinded,
    TableValuation,
    UnitDemand,
    Valuation,
    induced_ordering,
    is_order_consistent,
    rename,
    sample_uniform_permutation,
)
from .fairness import (
    FairnessReport,
    Violation,
    check_ef,
    check_efx,
    check_sdef,
    check_sdefx,
    sdef_implies_ef_witness,
)
from .algorithms import (
    PickTrace,
    give_away_round_robin,
    round_robin,
    trace_kth_pick,
)
from .hypergraph import (
    NoBalancedEF,
    PreferenceHypergraph,
    TieShortcut,
    TieWitness,
    UniformHypergraph,
    act,
    balanced_ef_allocation,
    build_preference_hypergraph,
    count_automorphisms,
    orbit_size,
    submodular_from_hypergraph,
)
from .oracle import (
    EventSpec,
    ExactProbability,
    ExistenceResult,
    exact_event_probability,
    exists_allocation,
    favorite_collision_probability,
    joint_threshold_probability,
)
from .montecarlo import (
    ExperimentConfig,
    TrialStats,
    run_experiment,
    sweep,
)

__version__ = "0.1.0"
