"""Bounded write-through LRU cache over materialized table tuples."""

from __future__ import annotations

from collections import OrderedDict

from gridstore.core import CellContent

DEFAULT_CAPACITY_CELLS = 64 * 1024


class TupleCache:
    """Keys are (table_id, tuple_id); values are materialized tuples.

    Capacity counts cells, not tuples. Writes go through: the owning table
    is always updated first, then any cached copy is patched in place, so a
    cache-bypassing read can never disagree.
    """

    def __init__(self, capacity_cells: int = DEFAULT_CAPACITY_CELLS) -> None:
        self.capacity = capacity_cells
        self._entries: "OrderedDict[tuple[str, int], list[CellContent]]" = OrderedDict()
        self._held_cells = 0
        self.hits = 0
        self.misses = 0
        self.enabled = True

    def get(self, table_id: str, tuple_id: int) -> list[CellContent] | None:
        if not self.enabled:
            return None
        key = (table_id, tuple_id)
        entry = self._entries.get(key)
        if entry is None:
            self.misses += 1
            return None
        self._entries.move_to_end(key)
        self.hits += 1
        return entry

    def put(self, table_id: str, tuple_id: int, tuple_cells: list[CellContent]) -> None:
        if not self.enabled or len(tuple_cells) > self.capacity:
            return
        key = (table_id, tuple_id)
        previous = self._entries.pop(key, None)
        if previous is not None:
            self._held_cells -= len(previous)
        self._entries[key] = tuple_cells
        self._held_cells += len(tuple_cells)
        while self._held_cells > self.capacity and self._entries:
            _, evicted = self._entries.popitem(last=False)
            self._held_cells -= len(evicted)

    def patch(self, table_id: str, tuple_id: int, index: int, content: CellContent) -> None:
        entry = self._entries.get((table_id, tuple_id))
        if entry is not None and index < len(entry):
            entry[index] = content

    def invalidate_tuple(self, table_id: str, tuple_id: int) -> None:
        entry = self._entries.pop((table_id, tuple_id), None)
        if entry is not None:
            self._held_cells -= len(entry)

    def invalidate_table(self, table_id: str) -> None:
        doomed = [k for k in self._entries if k[0] == table_id]
        for key in doomed:
            self._held_cells -= len(self._entries.pop(key))

    def clear(self) -> None:
        self._entries.clear()
        self._held_cells = 0
