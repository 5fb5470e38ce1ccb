"""Update streams for the dynamic structure, plus an oracle replay.

Streams are materialized up front as (op, key) lists so a run can be
replayed bit-identically.  The uniform generator mixes inserts, deletes
and searches by weight; the adversarial generator repeatedly inserts the
midpoint of the currently smallest gap, which drives the gap ratio up as
fast as possible and exercises the ratio-growth rebuild trigger.

``replay_stream`` applies a stream to a :class:`DynamicBinDict` and to a
mirrored sorted list at the same time, comparing every outcome.  Any
disagreement raises immediately with the offending op index; the emitted
checkpoint rows therefore always carry divergences = 0.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass

import numpy as np

from .core import DictboostError, SortedKeySet
from .dynamic import AmortizedReport, DynamicBinDict, RebuildTrigger

OP_INSERT = "insert"
OP_DELETE = "delete"
OP_SEARCH = "search"


class StreamDivergenceError(DictboostError):
    """The dynamic structure disagreed with the sorted-list oracle."""


@dataclass(frozen=True)
class UpdateStream:
    ops: tuple
    seed: int
    generator: str  # uniform | adversarial

    def __len__(self) -> int:
        return len(self.ops)


def _initial_contents(initial: SortedKeySet) -> list[int]:
    if len(initial) < 2:
        raise DictboostError("streams need at least two initial keys")
    return initial.as_list()


def gen_uniform_stream(
    initial: SortedKeySet,
    n_ops: int,
    mix: tuple[float, float, float] = (1.0, 1.0, 2.0),
    seed: int = 0,
) -> UpdateStream:
    """insert/delete/search ops weighted by ``mix``; keys drawn uniformly
    from the initial set's universe, deletes aimed at present keys."""
    if n_ops < 0:
        raise DictboostError(f"need n_ops >= 0, got {n_ops}")
    wi, wd, ws = (float(w) for w in mix)
    total = wi + wd + ws
    if total <= 0 or min(wi, wd, ws) < 0:
        raise DictboostError(f"bad op mix {mix}")
    mirror = _initial_contents(initial)
    u_lo, u_hi = initial.universe_hint if initial.universe_hint else (initial.lo, initial.hi)
    rng = np.random.default_rng(seed)
    kinds = rng.choice(3, size=n_ops, p=[wi / total, wd / total, ws / total])
    ops = []
    for kind in kinds:
        if kind == 1 and len(mirror) > 2:
            key = mirror[int(rng.integers(0, len(mirror)))]
            pos = bisect_left(mirror, key)
            del mirror[pos]
            ops.append((OP_DELETE, key))
            continue
        key = int(rng.integers(u_lo, u_hi + 1))
        if kind == 0:
            pos = bisect_left(mirror, key)
            if pos == len(mirror) or mirror[pos] != key:
                mirror.insert(pos, key)
            ops.append((OP_INSERT, key))
        else:
            ops.append((OP_SEARCH, key))
    return UpdateStream(ops=tuple(ops), seed=seed, generator="uniform")


def gen_adversarial_stream(
    initial: SortedKeySet, n_ops: int, seed: int = 0
) -> UpdateStream:
    """Gap-shrinker: each op inserts the midpoint of the smallest gap still
    wider than 1, halving it; once every gap is 1 the rest are searches."""
    if n_ops < 0:
        raise DictboostError(f"need n_ops >= 0, got {n_ops}")
    mirror = _initial_contents(initial)
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(n_ops):
        gaps = np.diff(np.asarray(mirror, dtype=np.int64))
        open_idx = np.nonzero(gaps > 1)[0]
        if open_idx.size == 0:
            ops.append((OP_SEARCH, int(rng.integers(mirror[0], mirror[-1] + 1))))
            continue
        i = int(open_idx[np.argmin(gaps[open_idx])])
        a, b = mirror[i], mirror[i + 1]
        key = a + (b - a) // 2
        insort(mirror, key)
        ops.append((OP_INSERT, key))
    return UpdateStream(ops=tuple(ops), seed=seed, generator="adversarial")


@dataclass
class StreamCheckpoint:
    schema: int
    dataset_id: str
    ops_done: int
    n: int
    rebuilds_update_count: int
    rebuilds_delta_growth: int
    rebuilds_out_of_range: int
    elements_touched: int
    touches_per_update: float
    delta_hat: float
    divergences: int


@dataclass
class ReplayResult:
    checkpoints: list[StreamCheckpoint]
    report: AmortizedReport
    ops_applied: int

    @property
    def divergences(self) -> int:
        return 0  # replay raises on the first divergence, so survivors are clean


def replay_stream(
    initial: SortedKeySet,
    k: int,
    stream: UpdateStream,
    checkpoint_every: int | None = None,
    dataset_id: str = "stream",
    schema: int = 1,
) -> ReplayResult:
    """Apply the stream to a DynamicBinDict and a sorted-list oracle in
    lockstep, checking every single outcome."""
    dyn = DynamicBinDict(initial, k)
    mirror = _initial_contents(initial)
    total = len(stream.ops)
    every = checkpoint_every if checkpoint_every else max(1, total // 10)
    checkpoints: list[StreamCheckpoint] = []

    def check(idx: int, what: str, got, want) -> None:
        if got != want:
            raise StreamDivergenceError(
                f"op {idx} ({what}): structure said {got!r}, oracle said {want!r}"
            )

    for idx, (op, key) in enumerate(stream.ops):
        if op == OP_INSERT:
            pos = bisect_left(mirror, key)
            absent = pos == len(mirror) or mirror[pos] != key
            check(idx, f"insert {key}", dyn.insert(key), absent)
            if absent:
                mirror.insert(pos, key)
        elif op == OP_DELETE:
            pos = bisect_left(mirror, key)
            present = pos < len(mirror) and mirror[pos] == key
            check(idx, f"delete {key}", dyn.delete(key), present)
            if present:
                del mirror[pos]
        elif op == OP_SEARCH:
            pos = bisect_left(mirror, key)
            want = (pos, pos < len(mirror) and mirror[pos] == key)
            check(idx, f"search {key}", tuple(dyn.rank_search(key)), want)
        else:
            raise DictboostError(f"unknown stream op {op!r}")
        done = idx + 1
        if done % every == 0 or done == total:
            led = dyn.ledger
            touched = led.total_touched
            checkpoints.append(
                StreamCheckpoint(
                    schema=schema,
                    dataset_id=dataset_id,
                    ops_done=done,
                    n=len(dyn),
                    rebuilds_update_count=led.count(RebuildTrigger.UPDATE_COUNT),
                    rebuilds_delta_growth=led.count(RebuildTrigger.DELTA_GROWTH),
                    rebuilds_out_of_range=led.count(RebuildTrigger.OUT_OF_RANGE),
                    elements_touched=touched,
                    touches_per_update=touched / max(1, dyn.total_updates),
                    delta_hat=float(dyn.delta_hat),
                    divergences=0,
                )
            )
    if list(dyn) != mirror:
        raise StreamDivergenceError("final contents disagree with the oracle")
    return ReplayResult(
        checkpoints=checkpoints, report=dyn.amortized_report(), ops_applied=total
    )
