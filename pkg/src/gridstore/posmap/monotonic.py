"""Gapped-key positional mapping.

Order is carried by a strictly increasing 64-bit key per identifier; an
insert takes the midpoint of its neighbors' keys, renumbering the smallest
enclosing run only when a gap is exhausted. Fetch must scan in key order,
discarding predecessors, which is what makes it linear.
"""

from __future__ import annotations

from array import array
from typing import Iterable

from gridstore.posmap.base import PositionalMap

DEFAULT_GAP = 2**16
_KEY_CEILING = 2**63  # renumber before keys approach the u64 roof


class MonotonicMap(PositionalMap):
    def __init__(self, gap: int = DEFAULT_GAP) -> None:
        super().__init__()
        if gap < 2:
            raise ValueError("initial gap must be >= 2")
        self.gap = gap
        self._keys = array("Q")
        self._ids = array("Q")
        self.renumber_events = 0

    def __len__(self) -> int:
        return len(self._ids)

    # --- reads: scan in key order, discarding predecessors --------------------

    def lookup(self, pos: int) -> int:
        self._check_pos(pos, len(self._ids))
        scanned = 0
        keys = self._keys
        last = 0
        for i in range(pos):
            last = keys[i]  # touch each predecessor tuple
            scanned += 1
        self.stats.elements_scanned = scanned
        self.stats.node_visits = 0
        assert last == keys[pos - 1]
        return self._ids[pos - 1]

    def lookup_range(self, pos: int, count: int) -> list[int]:
        if count == 0:
            return []
        self._check_pos(pos, len(self._ids))
        self._check_pos(pos + count - 1, len(self._ids))
        keys = self._keys
        for i in range(pos - 1):
            _ = keys[i]
        self.stats.elements_scanned = pos - 1 + count
        self.stats.node_visits = 0
        return list(self._ids[pos - 1 : pos - 1 + count])

    def to_ids(self) -> list[int]:
        return list(self._ids)

    # --- writes ----------------------------------------------------------------

    def insert_at(self, pos: int, ident: int) -> None:
        self._check_pos(pos, len(self._ids) + 1)
        key = self._key_for_slot(pos)
        if key is None:
            self._renumber_around(pos)
            key = self._key_for_slot(pos)
            assert key is not None, "renumbering must open a gap"
        self._keys.insert(pos - 1, key)
        self._ids.insert(pos - 1, ident)
        self.stats.node_visits = 0

    def _key_for_slot(self, pos: int) -> int | None:
        """Midpoint key for inserting at ``pos``; None when exhausted."""
        keys = self._keys
        n = len(keys)
        if n == 0:
            return self.gap
        if pos == 1:
            lo, hi = 0, keys[0]
        elif pos == n + 1:
            if keys[-1] >= _KEY_CEILING:
                return None
            return keys[-1] + self.gap
        else:
            lo, hi = keys[pos - 2], keys[pos - 1]
        if hi - lo < 2:
            return None
        return lo + (hi - lo) // 2

    def _renumber_around(self, pos: int) -> None:
        """Re-space the smallest enclosing run whose reassignment restores
        gaps >= 2; falls back to renumbering everything."""
        self.renumber_events += 1
        keys = self._keys
        n = len(keys)
        radius = 4
        while radius < 2 * n:
            lo_idx = max(0, pos - 1 - radius)
            hi_idx = min(n, pos - 1 + radius)
            lo_key = keys[lo_idx - 1] if lo_idx > 0 else 0
            hi_key = keys[hi_idx] if hi_idx < n else None
            width = hi_idx - lo_idx
            if hi_key is None:
                # Open-ended run: re-space with the full configured gap.
                for offset in range(width):
                    keys[lo_idx + offset] = lo_key + (offset + 1) * self.gap
                return
            if hi_key - lo_key >= (width + 2) * 2:
                step = (hi_key - lo_key) // (width + 1)
                for offset in range(width):
                    keys[lo_idx + offset] = lo_key + (offset + 1) * step
                return
            radius *= 2
        for i in range(n):
            keys[i] = (i + 1) * self.gap

    def delete_at(self, pos: int) -> int:
        self._check_pos(pos, len(self._ids))
        self._keys.pop(pos - 1)
        ident = self._ids.pop(pos - 1)
        self.stats.node_visits = 0
        return int(ident)

    def check_invariants(self) -> str | None:
        if len(self._keys) != len(self._ids):
            return "key/id column lengths differ"
        for i in range(1, len(self._keys)):
            if self._keys[i] <= self._keys[i - 1]:
                return f"keys not strictly increasing at index {i}"
        return None

    @classmethod
    def from_ids(cls, ids: Iterable[int], gap: int = DEFAULT_GAP) -> "MonotonicMap":
        m = cls(gap)
        m._ids = array("Q", ids)
        m._keys = array("Q", ((i + 1) * gap for i in range(len(m._ids))))
        return m
