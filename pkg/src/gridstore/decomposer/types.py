"""Shared optimizer types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from gridstore.core import Region
from gridstore.costmodel import ModelKind


class DpBudgetError(RuntimeError):
    """The grid is too large for exact DP; use the weighted or greedy path."""


@dataclass(frozen=True)
class DecompEntry:
    region: Region
    kind: ModelKind

    def to_json(self) -> dict:
        return {
            "top": self.region.top,
            "left": self.region.left,
            "bottom": self.region.bottom,
            "right": self.region.right,
            "kind": self.kind.name,
            "table": self.kind.table,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DecompEntry":
        return cls(
            Region(data["top"], data["left"], data["bottom"], data["right"]),
            ModelKind(data["kind"], data.get("table")),
        )


@dataclass
class Decomposition:
    """A physical layout: disjoint regions, each assigned one table model."""

    entries: list[DecompEntry]
    provenance: str
    cost: float = 0.0
    elapsed_ms: float = 0.0

    def pairs(self) -> list[tuple[Region, ModelKind]]:
        return [(e.region, e.kind) for e in self.entries]

    def to_json(self) -> dict:
        return {
            "entries": [e.to_json() for e in self.entries],
            "cost": self.cost,
            "algorithm": self.provenance,
            "elapsed_ms": self.elapsed_ms,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Decomposition":
        return cls(
            entries=[DecompEntry.from_json(e) for e in data["entries"]],
            provenance=data.get("algorithm", "unknown"),
            cost=data.get("cost", 0.0),
        )


@dataclass(frozen=True)
class Constraints:
    """Optimizer side conditions.

    pinned_tom: regions bound to linked tables; their cells are priced as
    empty and no other table may overlap them. max_table_cols: the backing
    store's attribute-count limit; wider ROM (or taller COM) regions price
    to infinity. models: which table models undivided regions may use
    (("ROM",) gives the narrow ROM-only reading of the optimizer).
    """

    pinned_tom: tuple[tuple[Region, str], ...] = ()
    max_table_cols: int | None = None
    models: tuple[str, ...] = ("ROM", "COM", "RCV")

    def __post_init__(self) -> None:
        pins = list(self.pinned_tom)
        for i, (a, _) in enumerate(pins):
            for b, _ in pins[i + 1:]:
                if a.overlaps(b):
                    raise ValueError(f"pinned regions overlap: {a} and {b}")
        for model in self.models:
            if model not in ("ROM", "COM", "RCV"):
                raise ValueError(f"unknown model {model!r} in constraints")
        if not self.models:
            raise ValueError("at least one model must be allowed")


@dataclass
class IncrementalConfig:
    """Existing layout plus the migration weight.

    eta trades storage against the number of cells physically moved; eta=0
    re-optimizes from scratch, eta=inf keeps the existing layout verbatim.
    """

    eta: float
    existing: Decomposition = field(default_factory=lambda: Decomposition([], "empty"))

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise ValueError("eta must be non-negative")

    @property
    def keep_everything(self) -> bool:
        return math.isinf(self.eta)
