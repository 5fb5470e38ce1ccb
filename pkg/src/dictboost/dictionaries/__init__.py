"""The seven sorted-set dictionaries and their spec-string registry.

Registry ids (as accepted by ``--dicts`` and :func:`make_builder`):

======  ====================================  ==========================
id      class                                 parameter
======  ====================================  ==========================
bbs     BranchyBinarySearch                   -
bfs     UniformBinarySearch                   -
bfe     EytzingerSearch                       -
bft     BlockTreeSearch                       block size (``bft:8``)
is      InterpolationSearch                   -
css     CssTreeSearch                         fanout (``css:16``)
splay   SplayTreeDictionary                   -
======  ====================================  ==========================
"""

from __future__ import annotations

from typing import Callable, Sequence

from ..core import DictboostError, SortedSetDictionary
from .css import CssTreeSearch
from .layouts import BlockTreeSearch, EytzingerSearch
from .sorted_array import BranchyBinarySearch, InterpolationSearch, UniformBinarySearch
from .splay import SplayTreeDictionary

__all__ = [
    "BranchyBinarySearch",
    "UniformBinarySearch",
    "EytzingerSearch",
    "BlockTreeSearch",
    "InterpolationSearch",
    "CssTreeSearch",
    "SplayTreeDictionary",
    "DICTIONARY_IDS",
    "DictionaryBuilder",
    "make_builder",
    "parse_dict_specs",
]

DictionaryBuilder = Callable[[Sequence[int]], SortedSetDictionary]

DICTIONARY_IDS = ("bbs", "bfs", "bfe", "bft", "is", "css", "splay")


def make_builder(spec: str) -> tuple[str, DictionaryBuilder]:
    """Turn a spec string like ``"bbs"`` or ``"bft:8"`` into a canonical id
    plus a ``build(keys)`` callable."""
    name, _, raw_param = spec.strip().partition(":")
    name = name.lower()
    param: int | None = None
    if raw_param:
        try:
            param = int(raw_param)
        except ValueError:
            raise DictboostError(f"bad dictionary parameter in {spec!r}") from None

    if name == "bbs":
        return "bbs", BranchyBinarySearch.build
    if name == "bfs":
        return "bfs", UniformBinarySearch.build
    if name == "bfe":
        return "bfe", EytzingerSearch.build
    if name == "is":
        return "is", InterpolationSearch.build
    if name == "splay":
        return "splay", SplayTreeDictionary.build
    if name == "bft":
        block = param or BlockTreeSearch.DEFAULT_BLOCK
        return f"bft:{block}", lambda keys: BlockTreeSearch.build(keys, block)
    if name == "css":
        fanout = param or CssTreeSearch.DEFAULT_FANOUT
        return f"css:{fanout}", lambda keys: CssTreeSearch.build(keys, fanout)
    raise DictboostError(
        f"unknown dictionary kind {spec!r}; valid ids: {', '.join(DICTIONARY_IDS)}"
    )


def parse_dict_specs(spec_list: str) -> list[tuple[str, DictionaryBuilder]]:
    """Parse a comma-separated ``--dicts`` value; order preserved."""
    out = []
    for part in spec_list.split(","):
        part = part.strip()
        if part:
            out.append(make_builder(part))
    if not out:
        raise DictboostError("no dictionaries selected")
    return out
