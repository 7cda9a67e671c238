"""Common contract for positional maps."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass


@dataclass
class OpStats:
    """Instrumentation for the most recent operation."""

    node_visits: int = 0
    elements_scanned: int = 0
    elements_shifted: int = 0


class PositionalMap(ABC):
    """Mutable ordered sequence of opaque 64-bit identifiers.

    Positions are 1-based and contiguous 1..N at all times; the map is a
    bijection between positions and the identifiers it currently holds.
    Implementations are single-writer.
    """

    def __init__(self) -> None:
        self.stats = OpStats()

    @abstractmethod
    def insert_at(self, pos: int, ident: int) -> None:
        """Place ``ident`` at ``pos`` (1..N+1); occupants shift right."""

    @abstractmethod
    def delete_at(self, pos: int) -> int:
        """Remove and return the identifier at ``pos``; the rest shift left."""

    @abstractmethod
    def lookup(self, pos: int) -> int: ...

    @abstractmethod
    def lookup_range(self, pos: int, count: int) -> list[int]: ...

    @abstractmethod
    def __len__(self) -> int: ...

    @abstractmethod
    def to_ids(self) -> list[int]:
        """The full identifier sequence in display order."""

    @abstractmethod
    def check_invariants(self) -> str | None:
        """None when structurally sound, else a description of the fault."""

    def op_stats(self) -> OpStats:
        return self.stats

    def append(self, ident: int) -> None:
        self.insert_at(len(self) + 1, ident)

    def position_of(self, ident: int) -> int | None:
        """Linear probe; used only by tests and small maps."""
        for pos, existing in enumerate(self.to_ids(), start=1):
            if existing == ident:
                return pos
        return None

    def _check_pos(self, pos: int, upper: int) -> None:
        if not (1 <= pos <= upper):
            raise IndexError(f"position {pos} out of range 1..{upper}")
