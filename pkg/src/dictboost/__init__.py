"""dictboost: plug a cheap learned model in front of any sorted-set dictionary.

The library splits a sorted u64 key set into intervals (equal-width bins
or epsilon-bounded linear segments), builds one small dictionary per
interval, and routes each rank query to its interval in O(1) or
O(log segments).  A dynamic variant keeps the scheme valid under inserts
and deletes with an amortized rebuild policy, and a per-bin optimal-BST
forest gives entropy-bounded expected search cost for known access
distributions.  The ``dictboost`` CLI benchmarks all of it.
"""

from .binning import BinnedDictionary, bin_index, bin_occupancy, bin_starts, build_binning, pct_to_k
from .core import (
    AccessDistribution,
    DictboostError,
    DistributionError,
    GapStats,
    InvalidKeySetError,
    SearchOutcome,
    SortedKeySet,
    SortedSetDictionary,
    entropy,
    gap_stats,
    oracle_rank_search,
)
from .dictionaries import (
    BlockTreeSearch,
    BranchyBinarySearch,
    CssTreeSearch,
    EytzingerSearch,
    InterpolationSearch,
    SplayTreeDictionary,
    UniformBinarySearch,
    make_builder,
    parse_dict_specs,
)
from .dynamic import (
    AmortizedReport,
    DynamicBinDict,
    RebuildLedger,
    RebuildTrigger,
    build_dynamic,
)
from .forest import (
    BstPlan,
    ForestPlan,
    ForestSweep,
    approx_bst,
    bin_weights,
    build_forest,
    optimal_bst,
    optimize_over_k,
)
from .segments import Segment, SegmentedDictionary, build_segments
from .workloads import (
    QueryWorkload,
    gen_clustered,
    gen_queries,
    gen_uniform,
    kl_divergence,
    ks_statistic,
    load_keys,
    save_keys,
    subsample_matching_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "AccessDistribution",
    "AmortizedReport",
    "BinnedDictionary",
    "BlockTreeSearch",
    "BranchyBinarySearch",
    "BstPlan",
    "CssTreeSearch",
    "DictboostError",
    "DistributionError",
    "DynamicBinDict",
    "EytzingerSearch",
    "ForestPlan",
    "ForestSweep",
    "GapStats",
    "InterpolationSearch",
    "InvalidKeySetError",
    "QueryWorkload",
    "RebuildLedger",
    "RebuildTrigger",
    "SearchOutcome",
    "Segment",
    "SegmentedDictionary",
    "SortedKeySet",
    "SortedSetDictionary",
    "SplayTreeDictionary",
    "UniformBinarySearch",
    "approx_bst",
    "bin_index",
    "bin_occupancy",
    "bin_starts",
    "bin_weights",
    "build_binning",
    "build_dynamic",
    "build_forest",
    "build_segments",
    "entropy",
    "gap_stats",
    "gen_clustered",
    "gen_queries",
    "gen_uniform",
    "kl_divergence",
    "ks_statistic",
    "load_keys",
    "make_builder",
    "optimal_bst",
    "optimize_over_k",
    "oracle_rank_search",
    "parse_dict_specs",
    "pct_to_k",
    "save_keys",
    "subsample_matching_cdf",
]
