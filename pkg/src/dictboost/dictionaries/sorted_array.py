"""Dictionaries that search the sorted key array in place.

All three keep exactly one flat array (their keys) and therefore report
zero space overhead.  They differ only in how they walk it:

* ``BranchyBinarySearch`` - classic three-way binary search with an early
  exit on equality.
* ``UniformBinarySearch`` - branch-free halving with a fixed iteration
  count of ceil(log2 n), the shape compilers turn into conditional moves.
* ``InterpolationSearch`` - probes at the linearly interpolated position;
  great on near-uniform gaps, degrades to a guarded scan otherwise.
"""

from __future__ import annotations

from typing import Sequence

from ..core import KEY_BYTES, InvalidKeySetError, SearchOutcome, SortedSetDictionary


def _checked_keys(keys: Sequence[int]) -> list[int]:
    ks = [int(v) for v in keys]
    if not ks:
        raise InvalidKeySetError("cannot build a dictionary over zero keys")
    return ks


class BranchyBinarySearch(SortedSetDictionary):
    kind_id = "bbs"

    def __init__(self, keys: list[int]):
        self._keys = keys

    @classmethod
    def build(cls, keys: Sequence[int]) -> "BranchyBinarySearch":
        return cls(_checked_keys(keys))

    def __len__(self) -> int:
        return len(self._keys)

    def rank_search(self, x: int) -> SearchOutcome:
        keys = self._keys
        lo, hi = 0, len(keys)
        while lo < hi:
            mid = (lo + hi) // 2
            v = keys[mid]
            if x < v:
                hi = mid
            elif x > v:
                lo = mid + 1
            else:
                return SearchOutcome(mid, True)
        return SearchOutcome(lo, False)

    def space_bytes(self) -> int:
        return KEY_BYTES * len(self._keys)


class UniformBinarySearch(SortedSetDictionary):
    """Branch-free binary search: every query halves a window exactly
    ceil(log2 n) times, regardless of the key."""

    kind_id = "bfs"

    def __init__(self, keys: list[int]):
        self._keys = keys

    @classmethod
    def build(cls, keys: Sequence[int]) -> "UniformBinarySearch":
        return cls(_checked_keys(keys))

    def __len__(self) -> int:
        return len(self._keys)

    def rank_search(self, x: int) -> SearchOutcome:
        keys = self._keys
        base, m = 0, len(keys)
        while m > 1:
            half = m // 2
            if keys[base + half] < x:
                base += half
            m -= half
        rank = base + (1 if keys[base] < x else 0)
        n = len(keys)
        return SearchOutcome(rank, rank < n and keys[rank] == x)

    def rank_search_with_steps(self, x: int) -> tuple[SearchOutcome, int]:
        """Same walk, also counting loop iterations (used by the tests to
        pin the uniform-depth property)."""
        keys = self._keys
        base, m = 0, len(keys)
        steps = 0
        while m > 1:
            half = m // 2
            if keys[base + half] < x:
                base += half
            m -= half
            steps += 1
        rank = base + (1 if keys[base] < x else 0)
        n = len(keys)
        return SearchOutcome(rank, rank < n and keys[rank] == x), steps

    def space_bytes(self) -> int:
        return KEY_BYTES * len(self._keys)


class InterpolationSearch(SortedSetDictionary):
    kind_id = "is"

    def __init__(self, keys: list[int]):
        self._keys = keys

    @classmethod
    def build(cls, keys: Sequence[int]) -> "InterpolationSearch":
        return cls(_checked_keys(keys))

    def __len__(self) -> int:
        return len(self._keys)

    def rank_search(self, x: int) -> SearchOutcome:
        keys = self._keys
        lo, hi = 0, len(keys) - 1
        while lo <= hi and keys[lo] <= x <= keys[hi]:
            if lo == hi:
                return SearchOutcome(lo, keys[lo] == x)
            # linear probe; the loop guard keeps the estimate inside [lo, hi]
            pos = lo + int((hi - lo) / (keys[hi] - keys[lo]) * (x - keys[lo]))
            v = keys[pos]
            if v == x:
                return SearchOutcome(pos, True)
            if v < x:
                lo = pos + 1
            else:
                hi = pos - 1
        # Window invariant: keys[:lo] < x and keys[hi+1:] > x.
        if hi < lo or x < keys[lo]:
            return SearchOutcome(lo, False)
        return SearchOutcome(hi + 1, False)

    def space_bytes(self) -> int:
        return KEY_BYTES * len(self._keys)
