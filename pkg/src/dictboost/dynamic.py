"""Dynamic binned dictionary with a two-trigger rebuild policy.

The static binning model assumes a frozen key range and gap shape.  To
take inserts and deletes, this variant bins a *widened* range sized from
the gap ratio measured at build time (``delta_hat``): with key span ``L``
the binned domain is ``[lo - ceil(L * delta_hat), hi + ceil(L * delta_hat)]``,
cut into ``k`` bins of width ``ceil((2*delta_hat + 1) * L / k)``.  Each bin
is a splay tree; a Fenwick tree over bin sizes turns in-bin ranks into
global ones and drives order-statistic selection.

Rebuilds fire when either
* ``n/2`` effective updates have accumulated since the last rebuild
  (``UPDATE_COUNT``), after which ``delta_hat`` is re-measured exactly, or
* conservatively tracked gap bounds say the true gap ratio now exceeds
  ``delta_hat`` (``DELTA_GROWTH``), after which
  ``delta_hat = max(measured, 2 * previous)`` so that consecutive ratio
  rebuilds at least double the threshold and their count telescopes to
  ``log2(delta_max / delta_0)``.

The conservative bounds err in one direction only: ``g_min_bound`` can
only decrease (inserts split gaps), ``g_max_bound`` can only increase
(deletes merge gaps, edge inserts extend the hull), so
``g_max_bound / g_min_bound`` never underestimates the true ratio.

An insert outside the widened range cannot wait: it forces an immediate
rebuild around the new extremes (``OUT_OF_RANGE``; the two-trigger policy
above never lets this happen while the gap-ratio assumption holds, but
the structure has to survive when it does not).  Every rebuild is logged
with how many elements it touched, making the amortized update cost a
measurable number rather than a claim.
"""

from __future__ import annotations

import enum
from bisect import insort
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DictboostError,
    MAX_KEY,
    SearchOutcome,
    SortedKeySet,
    gap_stats,
)
from .dictionaries.splay import SplayTreeDictionary

_NO_GAP_MIN = 1 << 80  # placeholder bounds while fewer than two keys exist
_NO_GAP_MAX = 0


class RebuildTrigger(enum.Enum):
    UPDATE_COUNT = "update_count"
    DELTA_GROWTH = "delta_growth"
    OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True)
class RebuildEvent:
    trigger: RebuildTrigger
    elements_touched: int
    n_after: int
    delta_hat: float


@dataclass
class RebuildLedger:
    """Append-only record of rebuild costs."""

    events: list[RebuildEvent] = field(default_factory=list)

    def append(self, event: RebuildEvent) -> None:
        self.events.append(event)

    def count(self, trigger: RebuildTrigger | None = None) -> int:
        if trigger is None:
            return len(self.events)
        return sum(1 for e in self.events if e.trigger is trigger)

    @property
    def total_touched(self) -> int:
        return sum(e.elements_touched for e in self.events)


@dataclass(frozen=True)
class AmortizedReport:
    total_updates: int
    rebuilds_update_count: int
    rebuilds_delta_growth: int
    rebuilds_out_of_range: int
    elements_touched: int
    touches_per_update: float
    delta_hat: float
    delta_max: float


class _Fenwick:
    """Prefix sums over bin sizes with order-statistic descent."""

    def __init__(self, counts: Sequence[int]):
        self._n = len(counts)
        self._tree = [0] * (self._n + 1)
        for i, c in enumerate(counts):
            if c:
                self.add(i, c)

    def add(self, i: int, delta: int) -> None:
        i += 1
        while i <= self._n:
            self._tree[i] += delta
            i += i & (-i)

    def prefix(self, i: int) -> int:
        """Total count of bins strictly before ``i``."""
        total = 0
        while i > 0:
            total += self._tree[i]
            i -= i & (-i)
        return total

    def select(self, j: int) -> tuple[int, int]:
        """(bin, offset) of the global 0-based rank ``j``."""
        pos = 0
        step = 1 << (self._n.bit_length())
        while step:
            nxt = pos + step
            if nxt <= self._n and self._tree[nxt] <= j:
                pos = nxt
                j -= self._tree[nxt]
            step >>= 1
        return pos, j


class DynamicBinDict:
    """Insert/delete/search over equal-width bins of a widened key range."""

    def __init__(self, keys: SortedKeySet | Iterable[int], k: int):
        contents = (
            keys.as_list() if isinstance(keys, SortedKeySet) else sorted(int(v) for v in keys)
        )
        if len(contents) < 2:
            raise DictboostError("dynamic build needs at least two initial keys")
        if k < 1:
            raise DictboostError(f"bin count must be >= 1, got {k}")
        self.k = int(k)
        self.ledger = RebuildLedger()
        self.total_updates = 0
        self._delta_max = Fraction(0)
        self._install(contents, self._exact_delta(contents))
        self.initial_delta_hat = self.delta_hat

    # -- state installation ----------------------------------------------------

    @staticmethod
    def _exact_delta(contents: list[int]) -> Fraction:
        if len(contents) < 2:
            return Fraction(1)
        gs = gap_stats(contents)
        return Fraction(gs.g_max, gs.g_min)

    def _install(self, contents: list[int], delta_hat: Fraction) -> None:
        n = len(contents)
        self.delta_hat = delta_hat
        if delta_hat > self._delta_max:
            self._delta_max = delta_hat
        self._size = n
        if n == 0:
            self._lo_key = self._hi_key = None
            self.range_lo, self.range_hi = 0, -1
            self.bin_width = 1
            self._g_min_bound, self._g_max_bound = _NO_GAP_MIN, _NO_GAP_MAX
        else:
            lo, hi = contents[0], contents[-1]
            span = hi - lo
            ext = -((-span * delta_hat.numerator) // delta_hat.denominator)  # ceil
            self.range_lo = lo - ext
            self.range_hi = hi + ext
            self.bin_width = max(1, -(-(self.range_hi - self.range_lo + 1) // self.k))
            if n >= 2:
                gs = gap_stats(contents)
                self._g_min_bound, self._g_max_bound = gs.g_min, gs.g_max
            else:
                self._g_min_bound, self._g_max_bound = _NO_GAP_MIN, _NO_GAP_MAX
        self._bins: list[SplayTreeDictionary | None] = [None] * self.k
        counts = [0] * self.k
        i = 0
        while i < n:
            b = self._bin_of(contents[i])
            j = i
            while j < n and self._bin_of(contents[j]) == b:
                j += 1
            self._bins[b] = SplayTreeDictionary.build(contents[i:j])
            counts[b] = j - i
            i = j
        self._fenwick = _Fenwick(counts)
        self.n_at_rebuild = n
        self.updates_since_rebuild = 0

    def _bin_of(self, x: int) -> int:
        b = (x - self.range_lo) // self.bin_width
        if b < 0:
            return 0
        if b >= self.k:
            return self.k - 1
        return b

    def _contents(self) -> list[int]:
        out: list[int] = []
        for tree in self._bins:
            if tree is not None:
                out.extend(tree)
        return out

    def _rebuild(self, trigger: RebuildTrigger, extra: int | None = None) -> None:
        contents = self._contents()
        if extra is not None:
            insort(contents, extra)
        exact = self._exact_delta(contents)
        if trigger is RebuildTrigger.DELTA_GROWTH:
            new_delta = max(exact, 2 * self.delta_hat)
        else:
            new_delta = exact
        self._install(contents, new_delta)
        self.ledger.append(
            RebuildEvent(
                trigger=trigger,
                elements_touched=len(contents),
                n_after=len(contents),
                delta_hat=float(new_delta),
            )
        )

    def _maybe_rebuild(self) -> None:
        if self.updates_since_rebuild >= max(1, self.n_at_rebuild // 2):
            self._rebuild(RebuildTrigger.UPDATE_COUNT)
        elif (
            self._size >= 2
            and Fraction(self._g_max_bound, self._g_min_bound) > self.delta_hat
        ):
            self._rebuild(RebuildTrigger.DELTA_GROWTH)

    # -- queries ----------------------------------------------------------------

    def __len__(self) -> int:
        return self._size

    def rank_search(self, x: int) -> SearchOutcome:
        if self._size == 0:
            return SearchOutcome(0, False)
        b = self._bin_of(x)
        base = self._fenwick.prefix(b)
        tree = self._bins[b]
        if tree is None or len(tree) == 0:
            return SearchOutcome(base, False)
        r, found = tree.rank_search(x)
        return SearchOutcome(base + r, found)

    def select(self, j: int) -> int:
        if not 0 <= j < self._size:
            raise IndexError(f"rank {j} out of range for size {self._size}")
        b, off = self._fenwick.select(j)
        tree = self._bins[b]
        assert tree is not None
        return tree.select(off)

    def __iter__(self):
        for tree in self._bins:
            if tree is not None:
                yield from tree

    # -- updates ----------------------------------------------------------------

    def insert(self, x: int) -> bool:
        if not 0 <= x <= MAX_KEY:
            raise DictboostError(f"key {x} outside u64 range")
        if x < self.range_lo or x > self.range_hi:
            # cannot be present; rebuild around the new extremes right away
            self.total_updates += 1
            self._rebuild(RebuildTrigger.OUT_OF_RANGE, extra=x)
            return True
        b = self._bin_of(x)
        tree = self._bins[b]
        if tree is None:
            tree = SplayTreeDictionary()
            self._bins[b] = tree
        if not tree.insert(x):
            return False
        self._fenwick.add(b, 1)
        self._size += 1
        r = self._fenwick.prefix(b) + tree.rank_search(x).rank
        if r > 0:
            gap = x - self.select(r - 1)
            if gap < self._g_min_bound:
                self._g_min_bound = gap
            if gap > self._g_max_bound:
                self._g_max_bound = gap
        if r + 1 < self._size:
            gap = self.select(r + 1) - x
            if gap < self._g_min_bound:
                self._g_min_bound = gap
            if gap > self._g_max_bound:
                self._g_max_bound = gap
        self.total_updates += 1
        self.updates_since_rebuild += 1
        self._maybe_rebuild()
        return True

    def delete(self, x: int) -> bool:
        if self._size == 0 or x < self.range_lo or x > self.range_hi:
            return False
        b = self._bin_of(x)
        tree = self._bins[b]
        if tree is None or len(tree) == 0:
            return False
        base = self._fenwick.prefix(b)
        r, found = tree.rank_search(x)
        if not found:
            return False
        gr = base + r
        pred = self.select(gr - 1) if gr > 0 else None
        succ = self.select(gr + 1) if gr + 1 < self._size else None
        tree.delete(x)
        self._fenwick.add(b, -1)
        self._size -= 1
        if pred is not None and succ is not None:
            merged = succ - pred
            if merged > self._g_max_bound:
                self._g_max_bound = merged
        self.total_updates += 1
        self.updates_since_rebuild += 1
        self._maybe_rebuild()
        return True

    # -- reporting ----------------------------------------------------------------

    @property
    def gap_bounds(self) -> tuple[int, int]:
        return self._g_min_bound, self._g_max_bound

    @property
    def delta_max(self) -> float:
        return float(self._delta_max)

    def amortized_report(self) -> AmortizedReport:
        touched = self.ledger.total_touched
        return AmortizedReport(
            total_updates=self.total_updates,
            rebuilds_update_count=self.ledger.count(RebuildTrigger.UPDATE_COUNT),
            rebuilds_delta_growth=self.ledger.count(RebuildTrigger.DELTA_GROWTH),
            rebuilds_out_of_range=self.ledger.count(RebuildTrigger.OUT_OF_RANGE),
            elements_touched=touched,
            touches_per_update=(touched / self.total_updates) if self.total_updates else 0.0,
            delta_hat=float(self.delta_hat),
            delta_max=float(self._delta_max),
        )


def build_dynamic(keys: SortedKeySet | Iterable[int], k: int) -> DynamicBinDict:
    return DynamicBinDict(keys, k)
