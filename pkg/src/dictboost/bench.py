"""Benchmark harness: timing protocol, sweep drivers and CSV row types.

Timing protocol: per configuration, one warm-up pass over the query
sequence, then ``repeats`` measured passes; the reported figure is the
median pass time divided by the query count (medians resist scheduler
noise).  GC is disabled inside the measured region.  Every ratio is
computed against a plain dictionary measured in the same process on the
identical pre-shuffled query order.

All row types carry a leading ``schema`` column (currently 1) so the CSV
layout can evolve without breaking downstream plotting.  Splay rows are
flagged ``order_sensitive`` because self-adjustment makes their timings a
function of the query order.
"""

from __future__ import annotations

import csv
import gc
import math
import statistics
import time
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Sequence

from .binning import BinnedDictionary, build_binning, pct_to_k
from .core import KEY_BYTES, AccessDistribution, DictboostError, SortedKeySet, gap_stats
from .dictionaries import DictionaryBuilder, parse_dict_specs
from .forest import ForestSweep, optimize_over_k
from .segments import SegmentedDictionary, build_segments
from .workloads import QueryWorkload

SCHEMA_VERSION = 1
DEFAULT_REPEATS = 5
DEFAULT_WARMUP = 1
DEFAULT_PCTS = (1.0, 5.0, 10.0, 25.0, 50.0, 100.0)


# ---------------------------------------------------------------------------
# timing
#
# Pure-Python dictionaries get timed with a plain attribute-lookup-free loop.
# Per-call overhead is identical across structures, so ratios stay fair even
# though absolute numbers mean nothing outside this process.


def _one_pass(search: Callable[[int], object], queries: list) -> int:
    t0 = time.perf_counter_ns()
    for x in queries:
        search(x)
    return time.perf_counter_ns() - t0


def measure_ns_per_query(
    search: Callable[[int], object],
    queries: list,
    repeats: int = DEFAULT_REPEATS,
    warmup: int = DEFAULT_WARMUP,
) -> float:
    """Median-of-``repeats`` nanoseconds per query."""
    if not queries:
        raise DictboostError("cannot time an empty query sequence")
    if repeats < 1:
        raise DictboostError(f"need repeats >= 1, got {repeats}")
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(warmup):
            _one_pass(search, queries)
        samples = [_one_pass(search, queries) for _ in range(repeats)]
    finally:
        if was_enabled:
            gc.enable()
    return statistics.median(samples) / len(queries)


def _routing_probe(structure) -> Callable[[int], object] | None:
    """A callable that does only the model-prediction stage of a query,
    including the range guard, so its cost is comparable to rank_search."""
    if isinstance(structure, (BinnedDictionary, SegmentedDictionary)):
        lo = structure.keys.lo
        hi = structure.keys.hi
        route = structure.route

        def probe(x: int):
            if lo <= x <= hi:
                route(x)

        return probe
    return None


def _queries_of(workload) -> list:
    return list(workload.queries) if isinstance(workload, QueryWorkload) else list(workload)


# ---------------------------------------------------------------------------
# rows


@dataclass
class BenchRecord:
    schema: int
    dataset_id: str
    dictionary_id: str
    model_id: str  # none | binning | segments
    model_param: float  # k for binning, epsilon for segments, 0 for none
    intervals: int
    routing_steps: int
    mean_query_ns: float
    prediction_ns: float
    final_search_ns: float
    space_overhead_pct: float
    ratio_vs_plain: float
    order_sensitive: bool


@dataclass
class DeltaRow:
    schema: int
    dataset_id: str
    status: str  # ok | skipped_small_n
    n: int
    g_min: int
    g_max: int
    delta: float
    ln_n: float
    ln2_n: float
    ln3_n: float
    ln4_n: float


@dataclass
class SpaceRow:
    schema: int
    dataset_id: str
    bound_pct: float
    family: str  # binning | segments
    status: str  # ok | infeasible
    dictionary_id: str
    model_param: float
    intervals: int
    space_overhead_pct: float
    mean_query_ns: float


@dataclass
class ForestRow:
    schema: int
    dataset_id: str
    mode: str
    k: int
    total_cost: float
    entropy_bits: float
    bound_slack: float  # entropy + 2 - cost; nonnegative for the exact best
    is_best: bool


def csv_header(row_type) -> list[str]:
    return [f.name for f in fields(row_type)]


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def write_csv(rows: Sequence, out) -> None:
    """Write dataclass rows; ``out`` is a path or an open text file."""
    if not rows:
        raise DictboostError("no rows to write")
    header = csv_header(type(rows[0]))
    close = False
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        out = open(out, "w", newline="")
        close = True
    try:
        w = csv.writer(out)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(getattr(row, name)) for name in header])
    finally:
        if close:
            out.close()


# ---------------------------------------------------------------------------
# sweep drivers


def _specs(dict_specs) -> list[tuple[str, DictionaryBuilder]]:
    if isinstance(dict_specs, str):
        return parse_dict_specs(dict_specs)
    return list(dict_specs)


def _measure_structure(structure, queries: list, repeats: int) -> tuple[float, float]:
    """(mean_ns, prediction_ns); prediction capped at the mean so the
    decomposition prediction + final == mean always holds."""
    mean = measure_ns_per_query(structure.rank_search, queries, repeats)
    probe = _routing_probe(structure)
    pred = min(measure_ns_per_query(probe, queries, repeats), mean) if probe else 0.0
    return mean, pred


def run_boost_sweep(
    keys: SortedKeySet,
    workload,
    dict_specs,
    pcts: Sequence[float] = DEFAULT_PCTS,
    repeats: int = DEFAULT_REPEATS,
    dataset_id: str = "dataset",
) -> list[BenchRecord]:
    """Plain baseline plus equal-width binning at each bin percentage."""
    queries = _queries_of(workload)
    n = len(keys)
    records: list[BenchRecord] = []
    for dict_id, builder in _specs(dict_specs):
        plain = builder(keys.as_list())
        plain_mean = measure_ns_per_query(plain.rank_search, queries, repeats)
        sensitive = dict_id == "splay"
        records.append(
            BenchRecord(
                SCHEMA_VERSION, dataset_id, dict_id, "none", 0.0, 1, 0,
                plain_mean, 0.0, plain_mean,
                100.0 * plain.overhead_bytes() / (KEY_BYTES * n), 1.0, sensitive,
            )
        )
        for pct in pcts:
            k = pct_to_k(n, pct)
            d = build_binning(keys, k, (dict_id, builder))
            mean, pred = _measure_structure(d, queries, repeats)
            records.append(
                BenchRecord(
                    SCHEMA_VERSION, dataset_id, dict_id, "binning", float(k), k, 0,
                    mean, pred, mean - pred,
                    d.space_overhead_pct(), mean / plain_mean, sensitive,
                )
            )
    return records


def default_epsilons(n: int) -> list[int]:
    """Powers of two in [1, n/2]."""
    if n < 2:
        return [1]
    return [1 << i for i in range(int(math.log2(n // 2)) + 1) if (1 << i) <= n // 2]


def run_epsilon_sweep(
    keys: SortedKeySet,
    workload,
    dict_specs,
    epsilons: Sequence[int] | None = None,
    repeats: int = DEFAULT_REPEATS,
    dataset_id: str = "dataset",
) -> list[BenchRecord]:
    """Plain baseline plus epsilon-segmented versions per dictionary."""
    queries = _queries_of(workload)
    n = len(keys)
    eps_grid = list(epsilons) if epsilons is not None else default_epsilons(n)
    records: list[BenchRecord] = []
    for dict_id, builder in _specs(dict_specs):
        plain = builder(keys.as_list())
        plain_mean = measure_ns_per_query(plain.rank_search, queries, repeats)
        sensitive = dict_id == "splay"
        records.append(
            BenchRecord(
                SCHEMA_VERSION, dataset_id, dict_id, "none", 0.0, 1, 0,
                plain_mean, 0.0, plain_mean,
                100.0 * plain.overhead_bytes() / (KEY_BYTES * n), 1.0, sensitive,
            )
        )
        for eps in eps_grid:
            d = build_segments(keys, eps, (dict_id, builder))
            mean, pred = _measure_structure(d, queries, repeats)
            records.append(
                BenchRecord(
                    SCHEMA_VERSION, dataset_id, dict_id, "segments", float(eps),
                    d.segment_count, d.routing_steps(),
                    mean, pred, mean - pred,
                    d.space_overhead_pct(), mean / plain_mean, sensitive,
                )
            )
    return records


def delta_report(named_sets: Iterable[tuple[str, SortedKeySet]]) -> list[DeltaRow]:
    """Gap-ratio study rows with the polylog reference columns."""
    rows: list[DeltaRow] = []
    for name, keys in named_sets:
        n = len(keys)
        ln_n = math.log(n) if n else 0.0
        if n < 2:
            rows.append(
                DeltaRow(SCHEMA_VERSION, name, "skipped_small_n", n, 0, 0, 0.0,
                         ln_n, ln_n**2, ln_n**3, ln_n**4)
            )
            continue
        gs = gap_stats(keys)
        rows.append(
            DeltaRow(
                SCHEMA_VERSION, name, "ok", n, gs.g_min, gs.g_max, gs.delta,
                ln_n, ln_n**2, ln_n**3, ln_n**4,
            )
        )
    return rows


def default_space_k_grid(n: int) -> list[int]:
    """Geometric k grid reaching far below 1% overhead (24k bytes vs 8n)."""
    grid = []
    k = 1
    while k < n:
        grid.append(k)
        k *= 4
    grid.append(n)
    return grid


def default_space_eps_grid(n: int) -> list[int]:
    return [e for e in default_epsilons(n) if e == 1 or e % 4 == 0]


def run_space_selection(
    keys: SortedKeySet,
    workload,
    dict_specs,
    bounds_pct: Sequence[float],
    k_grid: Sequence[int] | None = None,
    eps_grid: Sequence[int] | None = None,
    repeats: int = DEFAULT_REPEATS,
    dataset_id: str = "dataset",
) -> list[SpaceRow]:
    """Measure the configuration grids once, then report the fastest
    configuration under each space bound, per model family."""
    queries = _queries_of(workload)
    n = len(keys)
    ks = sorted(set(k_grid if k_grid is not None else default_space_k_grid(n)))
    eps_list = sorted(set(eps_grid if eps_grid is not None else default_space_eps_grid(n)))
    # (family, dict_id, param, intervals, overhead_pct, mean_ns)
    measured: list[tuple[str, str, float, int, float, float]] = []
    for dict_id, builder in _specs(dict_specs):
        for k in ks:
            if not 1 <= k <= n:
                continue
            d = build_binning(keys, k, (dict_id, builder))
            mean, _ = _measure_structure(d, queries, repeats)
            measured.append(("binning", dict_id, float(k), k, d.space_overhead_pct(), mean))
        for eps in eps_list:
            s = build_segments(keys, eps, (dict_id, builder))
            mean, _ = _measure_structure(s, queries, repeats)
            measured.append(
                ("segments", dict_id, float(eps), s.segment_count, s.space_overhead_pct(), mean)
            )
    rows: list[SpaceRow] = []
    for bound in bounds_pct:
        if bound <= 0:
            raise DictboostError(f"space bound must be positive, got {bound}")
        for family in ("binning", "segments"):
            feasible = [m for m in measured if m[0] == family and m[4] <= bound]
            if not feasible:
                rows.append(
                    SpaceRow(SCHEMA_VERSION, dataset_id, bound, family, "infeasible",
                             "", 0.0, 0, 0.0, 0.0)
                )
                continue
            fam, dict_id, param, intervals, overhead, mean = min(feasible, key=lambda m: m[5])
            rows.append(
                SpaceRow(SCHEMA_VERSION, dataset_id, bound, fam, "ok",
                         dict_id, param, intervals, overhead, mean)
            )
    return rows


def run_forest_sweep(
    keys: SortedKeySet,
    dist: AccessDistribution,
    k_max: int,
    mode: str = "exact",
    dataset_id: str = "dataset",
) -> tuple[ForestSweep, list[ForestRow]]:
    sweep = optimize_over_k(keys, dist, k_max, mode)
    h = sweep.entropy_bits
    rows = [
        ForestRow(
            SCHEMA_VERSION, dataset_id, mode, k, cost, h, h + 2.0 - cost,
            k == sweep.best.k,
        )
        for k, cost in sweep.per_k
    ]
    return sweep, rows
