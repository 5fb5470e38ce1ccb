"""Core types and contracts shared by every search structure in the package.

The whole library revolves around one normalized query protocol: a
*rank search* over a static set of distinct unsigned 64-bit keys held in
sorted order.  ``rank_search(x)`` returns the index of the smallest key
``>= x`` (``n`` if there is none) together with a membership flag.  Every
dictionary and every model wrapper in this package answers queries in
exactly those terms, which is what makes them interchangeable and lets a
single linear-scan oracle act as ground truth for all of them.

Ranks are 0-based.  The predecessor of ``x`` is ``keys[rank - 1]`` whenever
``rank > 0``, so the same outcome serves membership, predecessor and range
queries.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

KEY_BYTES = 8
MAX_KEY = 2**64 - 1


class DictboostError(Exception):
    """Base class for every error raised by this package."""


class InvalidKeySetError(DictboostError):
    """Raised when a key sequence violates the sorted-distinct-u64 contract."""


class DistributionError(DictboostError):
    """Raised when access weights are negative or do not sum to one."""


class SearchOutcome(NamedTuple):
    """Result of a rank search.

    ``rank`` is the 0-based index of the smallest key ``>= x`` (``n`` when
    every key is smaller than ``x``); ``found`` is true iff ``keys[rank]``
    exists and equals ``x``.
    """

    rank: int
    found: bool


@dataclass(frozen=True)
class GapStats:
    """Extremes of the consecutive-gap sequence of a sorted key set.

    The ratio ``g_max / g_min`` is kept as an exact integer pair so that
    threshold comparisons elsewhere (rebuild policies) never suffer float
    rounding; ``delta`` is the derived float for reporting.
    """

    g_min: int
    g_max: int

    def __post_init__(self) -> None:
        if self.g_min <= 0 or self.g_max < self.g_min:
            raise InvalidKeySetError(
                f"bad gap extremes g_min={self.g_min} g_max={self.g_max}"
            )

    @property
    def delta(self) -> float:
        return self.g_max / self.g_min

    @property
    def delta_exact(self) -> Fraction:
        return Fraction(self.g_max, self.g_min)


class SortedKeySet:
    """Immutable sorted sequence of distinct u64 keys.

    Keys are canonically held in a read-only numpy array for vector work
    (generation, file IO, bulk oracles); ``as_list()`` exposes a cached
    plain-int view that the hand-written search loops index much faster.

    ``universe_hint`` optionally records the closed universe ``[lo, hi]``
    the keys were drawn from, which the query generators use to sample
    absent keys.
    """

    def __init__(
        self,
        keys: Iterable[int] | np.ndarray,
        universe_hint: tuple[int, int] | None = None,
    ):
        arr = np.asarray(keys, dtype=np.uint64)
        if arr.ndim != 1:
            raise InvalidKeySetError("keys must be one-dimensional")
        if arr.size > 1 and not np.all(arr[1:] > arr[:-1]):
            raise InvalidKeySetError("keys must be strictly increasing")
        arr.setflags(write=False)
        self._arr = arr
        if universe_hint is not None:
            u_lo, u_hi = int(universe_hint[0]), int(universe_hint[1])
            if arr.size and not (u_lo <= int(arr[0]) and int(arr[-1]) <= u_hi):
                raise InvalidKeySetError("universe_hint does not cover the keys")
            universe_hint = (u_lo, u_hi)
        self.universe_hint = universe_hint

    @classmethod
    def from_unsorted(
        cls, values: Iterable[int] | np.ndarray,
        universe_hint: tuple[int, int] | None = None,
    ) -> tuple["SortedKeySet", int]:
        """Sort, deduplicate and wrap ``values``; also report the number of
        duplicates removed."""
        arr = np.unique(np.asarray(values, dtype=np.uint64))
        dupes = int(np.asarray(values).size - arr.size)
        return cls(arr, universe_hint=universe_hint), dupes

    # -- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return int(self._arr.size)

    def __getitem__(self, i: int) -> int:
        return int(self._arr[i])

    def __iter__(self):
        return iter(self.as_list())

    def __eq__(self, other) -> bool:
        if not isinstance(other, SortedKeySet):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._arr, other._arr))

    def __repr__(self) -> str:
        return f"SortedKeySet(n={len(self)})"

    # -- views ---------------------------------------------------------------

    @property
    def array(self) -> np.ndarray:
        """Read-only uint64 view, sorted ascending."""
        return self._arr

    @cached_property
    def _list(self) -> list[int]:
        # shared read-only cache; hand copies to callers, they do mutate
        return [int(v) for v in self._arr]

    def as_list(self) -> list[int]:
        return list(self._list)

    @property
    def lo(self) -> int:
        if not len(self):
            raise InvalidKeySetError("empty key set has no extremes")
        return int(self._arr[0])

    @property
    def hi(self) -> int:
        if not len(self):
            raise InvalidKeySetError("empty key set has no extremes")
        return int(self._arr[-1])

    # -- basic queries (bisect-backed plumbing, not the measured paths) ------

    def rank_of(self, x: int) -> SearchOutcome:
        r = int(np.searchsorted(self._arr, np.uint64(x), side="left")) if len(self) else 0
        return SearchOutcome(r, r < len(self) and int(self._arr[r]) == x)

    def predecessor_of(self, x: int) -> int | None:
        """Largest key strictly smaller than ``x``, or None."""
        r = self.rank_of(x).rank
        return self[r - 1] if r > 0 else None

    def range_between(self, x: int, y: int) -> list[int]:
        """Keys in the closed interval ``[x, y]``: two rank searches plus a
        slice of the sorted view."""
        if y < x:
            return []
        lst = self._list
        return lst[bisect_left(lst, x):bisect_right(lst, y)]


def gap_stats(keys: SortedKeySet | Sequence[int]) -> GapStats:
    """Minimum and maximum consecutive gap of a sorted key set (n >= 2).

    Gaps are differences of adjacent keys, so they are invariant under a
    constant shift of the whole set.
    """
    arr = keys.array if isinstance(keys, SortedKeySet) else np.asarray(keys, dtype=np.uint64)
    if arr.size < 2:
        raise InvalidKeySetError("gap statistics need at least two keys")
    d = np.diff(arr)
    return GapStats(g_min=int(d.min()), g_max=int(d.max()))


class AccessDistribution:
    """Query weights over the 2n+1 outcome atoms of a key set of size n.

    ``p[i]`` is the probability of querying key ``i`` (a hit); ``q[i]`` is
    the probability of a query falling in the open gap between keys
    ``i-1`` and ``i`` (``q[0]`` below the first key, ``q[n]`` above the
    last).  Weights must be nonnegative and sum to 1.
    """

    def __init__(self, p: Sequence[float] | np.ndarray, q: Sequence[float] | np.ndarray):
        self.p = np.asarray(p, dtype=np.float64)
        self.q = np.asarray(q, dtype=np.float64)
        if self.q.size != self.p.size + 1:
            raise DistributionError(
                f"expected len(q) == len(p) + 1, got {self.p.size} and {self.q.size}"
            )
        if (self.p < 0).any() or (self.q < 0).any():
            raise DistributionError("negative access weight")
        total = float(self.p.sum() + self.q.sum())
        if abs(total - 1.0) > 1e-9:
            raise DistributionError(f"weights sum to {total!r}, expected 1.0")

    @property
    def n(self) -> int:
        return int(self.p.size)

    def __repr__(self) -> str:
        return f"AccessDistribution(n={self.n})"


def entropy(dist: AccessDistribution | Iterable[float]) -> float:
    """Shannon entropy in bits of the combined (p, q) atom distribution.

    Zero-weight atoms contribute nothing.  For any distribution with ``m``
    nonzero atoms the value is at most ``log2(m)``.
    """
    if isinstance(dist, AccessDistribution):
        w = np.concatenate([dist.p, dist.q])
    else:
        w = np.asarray(list(dist), dtype=np.float64)
    w = w[w > 0]
    if w.size == 0:
        return 0.0
    return float(-(w * np.log2(w)).sum())


def oracle_rank_search(keys: Sequence[int], x: int) -> SearchOutcome:
    """Ground truth for every dictionary: a plain linear scan.

    Deliberately the dumbest possible implementation so that nothing clever
    can be wrong in the reference answer.
    """
    n = len(keys)
    for i in range(n):
        v = keys[i]
        if v >= x:
            return SearchOutcome(i, v == x)
    return SearchOutcome(n, False)


# ---------------------------------------------------------------------------
# dictionary contracts


class SortedSetDictionary(ABC):
    """A static sorted-set dictionary answering normalized rank searches.

    Implementations are built once over a sorted slice of distinct keys and
    are safe for concurrent readers unless documented otherwise (the splay
    tree mutates on reads and needs exclusive access).
    """

    #: registry id, e.g. "bbs"; parameterized kinds override per instance.
    kind_id: str = "?"

    @classmethod
    @abstractmethod
    def build(cls, keys: Sequence[int]) -> "SortedSetDictionary":
        """Construct over sorted distinct keys (at least one)."""

    @abstractmethod
    def rank_search(self, x: int) -> SearchOutcome:
        ...

    @abstractmethod
    def __len__(self) -> int:
        ...

    @abstractmethod
    def space_bytes(self) -> int:
        """Total bytes of the arrays/nodes this structure holds."""

    def overhead_bytes(self) -> int:
        """Bytes beyond one flat 8-byte-per-key array of the same keys."""
        return max(0, self.space_bytes() - KEY_BYTES * len(self))


class DynamicSortedSetDictionary(SortedSetDictionary):
    """Adds in-place updates to the static contract.

    ``insert``/``delete`` return whether the structure changed; repeated
    inserts of a present key and deletes of an absent key are no-ops.
    """

    @abstractmethod
    def insert(self, x: int) -> bool:
        ...

    @abstractmethod
    def delete(self, x: int) -> bool:
        ...
