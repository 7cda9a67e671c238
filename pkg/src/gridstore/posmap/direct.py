"""Position-as-is baseline: every entry stores its display position.

Fetch is a direct index. Insert/delete must rewrite the stored position of
every subsequent entry - the cascading update that positional mapping
exists to remove.
"""

from __future__ import annotations

from array import array
from typing import Iterable

from gridstore.posmap.base import PositionalMap


class DirectMap(PositionalMap):
    def __init__(self) -> None:
        super().__init__()
        self._positions = array("Q")
        self._ids = array("Q")

    def __len__(self) -> int:
        return len(self._ids)

    def insert_at(self, pos: int, ident: int) -> None:
        self._check_pos(pos, len(self._ids) + 1)
        self._ids.insert(pos - 1, ident)
        self._positions.insert(pos - 1, pos)
        positions = self._positions
        # Cascade: every subsequent entry's stored position increments.
        for i in range(pos, len(positions)):
            positions[i] += 1
        self.stats.node_visits = 1
        self.stats.elements_shifted = len(positions) - pos

    def delete_at(self, pos: int) -> int:
        self._check_pos(pos, len(self._ids))
        ident = self._ids.pop(pos - 1)
        self._positions.pop(pos - 1)
        positions = self._positions
        for i in range(pos - 1, len(positions)):
            positions[i] -= 1
        self.stats.node_visits = 1
        self.stats.elements_shifted = len(positions) - (pos - 1)
        return int(ident)

    def lookup(self, pos: int) -> int:
        self._check_pos(pos, len(self._ids))
        self.stats.node_visits = 1
        self.stats.elements_scanned = 1
        return self._ids[pos - 1]

    def lookup_range(self, pos: int, count: int) -> list[int]:
        if count == 0:
            return []
        self._check_pos(pos, len(self._ids))
        self._check_pos(pos + count - 1, len(self._ids))
        self.stats.node_visits = 1
        self.stats.elements_scanned = count
        return list(self._ids[pos - 1 : pos - 1 + count])

    def to_ids(self) -> list[int]:
        return list(self._ids)

    def check_invariants(self) -> str | None:
        if len(self._positions) != len(self._ids):
            return "position/id column lengths differ"
        for i, position in enumerate(self._positions):
            if position != i + 1:
                return f"stored position {position} at index {i}"
        return None

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "DirectMap":
        m = cls()
        m._ids = array("Q", ids)
        m._positions = array("Q", range(1, len(m._ids) + 1))
        return m
