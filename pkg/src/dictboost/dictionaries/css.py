"""Implicit multiway search tree over the sorted array (CSS-tree style).

The sorted keys stay where they are; what gets built is a stack of
separator levels, each one array holding the maximum key of every group of
``fanout`` entries in the level below.  Nodes are ``fanout`` consecutive
separators, child links are index arithmetic, so the tree costs no
pointers.  The default fanout of 16 keys matches two 64-byte cache lines
per node.

Every separator equals the maximum of its subtree, so descending into the
leftmost child whose separator is ``>= x`` lands exactly on the leaf group
containing the successor of ``x``.
"""

from __future__ import annotations

from typing import Sequence

from ..core import KEY_BYTES, SearchOutcome, SortedSetDictionary
from .sorted_array import _checked_keys


class CssTreeSearch(SortedSetDictionary):
    kind_id = "css"
    DEFAULT_FANOUT = 16

    def __init__(self, keys: list[int], levels: list[list[int]], fanout: int):
        self._keys = keys
        self._levels = levels  # levels[0] = leaf-group maxima, upward
        self._fanout = fanout
        self.kind_id = f"css:{fanout}"

    @classmethod
    def build(cls, keys: Sequence[int], fanout: int | None = None) -> "CssTreeSearch":
        ks = _checked_keys(keys)
        f = int(fanout) if fanout else cls.DEFAULT_FANOUT
        if f < 2:
            raise ValueError("fanout must be >= 2")
        levels: list[list[int]] = []
        below = ks
        while len(below) > f:
            maxima = [below[min(i + f, len(below)) - 1] for i in range(0, len(below), f)]
            levels.append(maxima)
            below = maxima
        return cls(ks, levels, f)

    def __len__(self) -> int:
        return len(self._keys)

    def rank_search(self, x: int) -> SearchOutcome:
        keys = self._keys
        f = self._fanout
        n = len(keys)
        group = 0  # index of the current node within its level
        for level in reversed(self._levels):
            start = group * f
            end = min(start + f, len(level))
            child = -1
            for j in range(start, end):
                if level[j] >= x:
                    child = j
                    break
            if child < 0:
                # x exceeds the subtree maximum; only possible at the root
                return SearchOutcome(n, False)
            group = child
        start = group * f
        end = min(start + f, n)
        for r in range(start, end):
            v = keys[r]
            if v >= x:
                return SearchOutcome(r, v == x)
        return SearchOutcome(n, False)

    def space_bytes(self) -> int:
        inner = sum(len(lv) for lv in self._levels)
        return KEY_BYTES * (len(self._keys) + inner)
