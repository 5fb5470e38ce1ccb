"""Implicit-tree array layouts: Eytzinger (BFS order) and blocked multiway.

Both store the keys permuted so that a root-to-leaf descent touches
consecutive memory regions instead of jumping around a sorted array.  The
descent finds the *position* of the successor key inside the permuted
array; a parallel rank table maps that position back to the sorted rank
the normalized protocol requires.  The rank table is honest bookkeeping
and is reported as space overhead (one extra word per slot).

The blocked layout pads the last block with a sentinel one past the u64
maximum (cheap in Python, where ints are unbounded) so that every stored
block is full and the descent needs no partial-block special case.
"""

from __future__ import annotations

from typing import Iterator, Sequence

from ..core import KEY_BYTES, SearchOutcome, SortedSetDictionary
from .sorted_array import _checked_keys

SENTINEL = 2**64  # compares greater than every legal u64 key


class EytzingerSearch(SortedSetDictionary):
    """Keys permuted in BFS order of a complete binary tree.

    The descent is branch-free-shaped: at position ``i`` go to ``2i+1`` on
    ``x <= key`` and ``2i+2`` otherwise, until falling off the tree.  The
    position of the smallest key ``>= x`` is then recovered from the bits
    of the final index: strip the trailing ones of ``i+1`` plus one more
    bit (those record the left turns taken after the last right turn).
    """

    kind_id = "bfe"

    def __init__(self, layout: list[int], ranks: list[int]):
        self._layout = layout
        self._ranks = ranks

    @classmethod
    def build(cls, keys: Sequence[int]) -> "EytzingerSearch":
        ks = _checked_keys(keys)
        n = len(ks)
        layout = [0] * n
        ranks = [0] * n
        next_rank = 0

        def fill(i: int) -> None:
            nonlocal next_rank
            if i >= n:
                return
            fill(2 * i + 1)
            layout[i] = ks[next_rank]
            ranks[i] = next_rank
            next_rank += 1
            fill(2 * i + 2)

        fill(0)
        return cls(layout, ranks)

    def __len__(self) -> int:
        return len(self._layout)

    def rank_search(self, x: int) -> SearchOutcome:
        layout = self._layout
        n = len(layout)
        i = 0
        while i < n:
            i = 2 * i + 1 if x <= layout[i] else 2 * i + 2
        t = i + 1
        # (t ^ (t+1)) is a mask of t's trailing ones plus the next zero bit.
        j = t >> (t ^ (t + 1)).bit_length()
        if j == 0:
            return SearchOutcome(n, False)
        pos = j - 1
        return SearchOutcome(self._ranks[pos], layout[pos] == x)

    def space_bytes(self) -> int:
        return 2 * KEY_BYTES * len(self._layout)

    def inorder_positions(self) -> Iterator[int]:
        """Positions visited by an in-order walk (testing hook: reading the
        layout in this order must reproduce the sorted input)."""
        n = len(self._layout)
        stack: list[tuple[int, bool]] = [(0, False)]
        while stack:
            i, expanded = stack.pop()
            if i >= n:
                continue
            if expanded:
                yield i
            else:
                stack.append((2 * i + 2, False))
                stack.append((i, True))
                stack.append((2 * i + 1, False))


def _block_child(nth: int, offset: int, block: int) -> int:
    """Array offset of the ``nth`` child (0..block) of the node starting at
    ``offset`` in a complete (block+1)-ary implicit tree of blocks."""
    return ((offset // block) * (block + 1) + nth + 1) * block


class BlockTreeSearch(SortedSetDictionary):
    """Keys permuted into an implicit (B+1)-ary tree of B-key blocks.

    Each node is B contiguous keys; child links are pure arithmetic on
    block numbers, so the only storage besides the permuted keys is the
    rank table.  Within a node a branch-free halving scan counts the keys
    smaller than x; the candidate successor is refined on the way down.
    """

    kind_id = "bft"
    DEFAULT_BLOCK = 8

    def __init__(self, layout: list[int], ranks: list[int], block: int, n: int):
        self._layout = layout
        self._ranks = ranks
        self._block = block
        self._n = n
        self.kind_id = f"bft:{block}"

    @classmethod
    def build(cls, keys: Sequence[int], block: int | None = None) -> "BlockTreeSearch":
        ks = _checked_keys(keys)
        b = cls.DEFAULT_BLOCK if block is None else int(block)
        if b < 1:
            raise ValueError("block size must be >= 1")
        n = len(ks)
        nblocks = -(-n // b)
        size = nblocks * b
        layout = [SENTINEL] * size
        ranks = [n] * size
        next_rank = 0

        def fill(offset: int) -> None:
            nonlocal next_rank
            if offset >= size:
                return
            for c in range(b):
                fill(_block_child(c, offset, b))
                if next_rank < n:
                    layout[offset + c] = ks[next_rank]
                    ranks[offset + c] = next_rank
                    next_rank += 1
            fill(_block_child(b, offset, b))

        fill(0)
        return cls(layout, ranks, b, n)

    def __len__(self) -> int:
        return self._n

    def rank_search(self, x: int) -> SearchOutcome:
        layout = self._layout
        b = self._block
        size = len(layout)
        i = 0
        best = -1  # position of the smallest key >= x seen on the path
        while i < size:
            # branch-free halving over the block: nth = #keys < x in it
            base, m = i, b
            while m > 1:
                half = m // 2
                if layout[base + half] < x:
                    base += half
                m -= half
            nth = base - i + (1 if layout[base] < x else 0)
            if nth < b and layout[i + nth] >= x:
                best = i + nth
            i = _block_child(nth, i, b)
        if best < 0:
            return SearchOutcome(self._n, False)
        return SearchOutcome(self._ranks[best], layout[best] == x)

    def space_bytes(self) -> int:
        return 2 * KEY_BYTES * len(self._layout)

    def inorder_positions(self) -> Iterator[int]:
        """In-order positions, sentinel slots included (testing hook: reading
        the layout in this order must give the sorted keys, then sentinels)."""
        b = self._block
        size = len(self._layout)

        def walk(offset: int) -> Iterator[int]:
            if offset >= size:
                return
            for c in range(b):
                yield from walk(_block_child(c, offset, b))
                yield offset + c
            yield from walk(_block_child(b, offset, b))

        yield from walk(0)
