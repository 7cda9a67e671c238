"""Recoverability validation: every filled cell recorded by exactly one table."""

from __future__ import annotations

from dataclasses import dataclass

from gridstore.core import CellAddress, Sheet
from gridstore.decomposer.types import Decomposition


@dataclass(frozen=True)
class Violation:
    message: str
    cell: CellAddress | None = None

    def __str__(self) -> str:
        return self.message


def validate_recoverability(decomp: Decomposition, sheet: Sheet) -> Violation | None:
    """None when the layout is recoverable, otherwise the first violation."""
    entries = decomp.entries
    for i, a in enumerate(entries):
        for b in entries[i + 1:]:
            overlap = a.region.intersect(b.region)
            if overlap is not None:
                return Violation(
                    f"entries overlap at {overlap.to_a1()}: {a.region} and {b.region}",
                    CellAddress(overlap.top, overlap.left),
                )
    for addr in sheet.cells:
        covering = sum(1 for e in entries if e.region.contains(addr))
        if covering == 0:
            return Violation(f"filled cell {addr} not covered by any entry", addr)
    bbox = sheet.bounding_box()
    if bbox is not None:
        pinned = [e.region for e in entries if e.kind.name == "TOM"]
        for e in entries:
            if e.kind.name == "TOM":
                continue
            inside = bbox.contains_region(e.region) or any(
                p.contains_region(e.region) for p in pinned
            )
            if not inside:
                return Violation(
                    f"entry {e.region} extends beyond the sheet bounding box"
                )
    return None
