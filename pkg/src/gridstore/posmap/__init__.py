"""Positional mapping: display position <-> stored identifier.

Three interchangeable implementations with instrumented access costs:
hierarchical (counted B+ tree, O(log N) everywhere), direct (position
stored as-is, O(N) shifts on insert/delete), and monotonic (gapped keys,
cheap inserts but linear fetches).
"""

from gridstore.posmap.base import OpStats, PositionalMap
from gridstore.posmap.direct import DirectMap
from gridstore.posmap.hierarchical import HierarchicalMap
from gridstore.posmap.monotonic import MonotonicMap
from gridstore.posmap.serde import decode_ids, encode_ids

__all__ = [
    "DirectMap",
    "HierarchicalMap",
    "MonotonicMap",
    "OpStats",
    "PositionalMap",
    "decode_ids",
    "encode_ids",
]

IMPLEMENTATIONS = {
    "hierarchical": HierarchicalMap,
    "direct": DirectMap,
    "monotonic": MonotonicMap,
}
