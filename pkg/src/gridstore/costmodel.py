"""Cost formulas for the physical table models.

Storage costs are in bytes (fractional allowed; the calibrated per-cell
constant is one bit). Access costs are in abstract time units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from gridstore.core import Region, Sheet


@dataclass(frozen=True)
class CostParams:
    """Per-table storage constants.

    s1: bytes to initialize a new table; s2: bytes per cell slot (empty or
    not); s3: bytes per column; s4: bytes per row; s5: bytes per key-value
    tuple.
    """

    s1: float
    s2: float
    s3: float
    s4: float
    s5: float

    def __post_init__(self) -> None:
        for name in ("s1", "s2", "s3", "s4", "s5"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def pg_params() -> CostParams:
    """Constants measured against a stock PostgreSQL page layout: 8 KB per
    table, one bit per cell slot, 40 B per column, 50 B per row, 52 B per
    key-value tuple."""
    return CostParams(s1=8192.0, s2=0.125, s3=40.0, s4=50.0, s5=52.0)


def ideal_params() -> CostParams:
    """Redesigned-engine constants: a row/column table costs its cell count
    plus length and breadth; a key-value tuple costs 3 units."""
    return CostParams(s1=0.0, s2=1.0, s3=1.0, s4=1.0, s5=3.0)


def unit_params(s5: float = 3.0) -> CostParams:
    """s1..s4 = 1; handy for oracle tests."""
    return CostParams(1.0, 1.0, 1.0, 1.0, s5)


def rom_cost(rows: int, cols: int, p: CostParams) -> float:
    """Row-oriented table over a rows x cols region."""
    if rows < 1 or cols < 1:
        raise ValueError("table dimensions must be >= 1")
    return p.s1 + p.s2 * rows * cols + p.s3 * cols + p.s4 * rows


def com_cost(rows: int, cols: int, p: CostParams) -> float:
    """Column-oriented table: s1 + s2*rows*cols + s4*cols + s3*rows (the two
    per-line constants transpose). Evaluated as rom_cost of the transposed
    shape so the transposition identity is exact in floating point."""
    return rom_cost(cols, rows, p)


def rcv_cost(filled_cells: int, p: CostParams) -> float:
    """Key-value storage prices only the filled cells."""
    if filled_cells < 0:
        raise ValueError("cell count must be non-negative")
    return p.s5 * filled_cells


# --- model kinds and hybrid pricing -----------------------------------------

@dataclass(frozen=True)
class ModelKind:
    """One of ROM / COM / RCV, or TOM bound to a named linked table."""

    name: str
    table: str | None = None

    def __post_init__(self) -> None:
        if self.name not in ("ROM", "COM", "RCV", "TOM"):
            raise ValueError(f"unknown model kind {self.name!r}")
        if self.name == "TOM" and not self.table:
            raise ValueError("TOM kind requires a linked-table name")
        if self.name != "TOM" and self.table is not None:
            raise ValueError(f"{self.name} kind carries no table name")

    def __str__(self) -> str:
        return self.name if self.table is None else f"TOM({self.table})"


ROM = ModelKind("ROM")
COM = ModelKind("COM")
RCV = ModelKind("RCV")


def tom(table: str) -> ModelKind:
    return ModelKind("TOM", table)


class RecoverabilityError(ValueError):
    pass


def _check_recoverable(entries: Sequence[tuple[Region, ModelKind]], sheet: Sheet) -> None:
    for i, (a, _) in enumerate(entries):
        for b, _ in entries[i + 1:]:
            if a.overlaps(b):
                raise RecoverabilityError(f"entry regions overlap: {a} and {b}")
    for addr in sheet.cells:
        if not any(region.contains(addr) for region, _ in entries):
            raise RecoverabilityError(f"filled cell {tuple(addr)} not covered by any entry")


def hybrid_cost(
    entries: Sequence[tuple[Region, ModelKind]],
    sheet: Sheet,
    p: CostParams,
    validate: bool = True,
) -> float:
    """Storage cost of a hybrid layout.

    ROM/COM entries price on their region dimensions. All RCV-assigned cells
    land in one sheet-global key-value table at s5 per filled cell, so RCV
    regions carry no per-region table cost. TOM regions are owned by their
    linked table and cost nothing here.
    """
    if validate:
        _check_recoverable(entries, sheet)
    total = 0.0
    for region, kind in entries:
        if kind.name == "ROM":
            total += rom_cost(region.row_count, region.col_count, p)
        elif kind.name == "COM":
            total += com_cost(region.row_count, region.col_count, p)
        elif kind.name == "RCV":
            total += p.s5 * sum(1 for _ in sheet.filled_in(region))
        # TOM: externally owned, costs 0
    return total


# --- modeled access cost -----------------------------------------------------

@dataclass(frozen=True)
class AccessParams:
    """Abstract time units for the three access components."""

    table_touch_cost: float = 100.0
    tuple_fetch_cost: float = 10.0
    cell_transfer_cost: float = 1.0

    def __post_init__(self) -> None:
        if min(self.table_touch_cost, self.tuple_fetch_cost, self.cell_transfer_cost) < 0:
            raise ValueError("access costs must be non-negative")


def modeled_access_cost(
    entries: Sequence[tuple[Region, ModelKind]],
    footprints: Iterable[Region],
    a: AccessParams,
    sheet: Sheet,
) -> float:
    """Modeled time to fetch each footprint region under a layout.

    Per footprint: one table touch per distinct table overlapped (all RCV
    regions share the single global table), one tuple fetch per intersected
    ROM row / COM column / RCV cell, and cell transfer sized by the full
    stored tuple width.
    """
    total = 0.0
    for fp in footprints:
        touches = 0
        tuples = 0
        cells = 0
        rcv_touched = False
        for region, kind in entries:
            overlap = region.intersect(fp)
            if overlap is None:
                continue
            if kind.name in ("ROM", "TOM"):
                touches += 1
                tuples += overlap.row_count
                cells += overlap.row_count * region.col_count
            elif kind.name == "COM":
                touches += 1
                tuples += overlap.col_count
                cells += overlap.col_count * region.row_count
            else:  # RCV
                rcv_touched = True
                filled = sum(1 for _ in sheet.filled_in(overlap))
                tuples += filled
                cells += filled
        if rcv_touched:
            touches += 1
        total += (
            touches * a.table_touch_cost
            + tuples * a.tuple_fetch_cost
            + cells * a.cell_transfer_cost
        )
    return total


# --- tuple-shape analysis ----------------------------------------------------

@dataclass(frozen=True)
class WorkloadProfile:
    """Counts of cell (n1) / row (n2) / column (n3) lookups, plus the
    seek-vs-transfer weight k in [0, 1]."""

    n1: float
    n2: float
    n3: float
    k: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.k <= 1.0):
            raise ValueError("k must be in [0, 1]")
        if min(self.n1, self.n2, self.n3) < 0:
            raise ValueError("lookup counts must be non-negative")


@dataclass(frozen=True)
class AccessEstimate:
    seeks: float  # random accesses
    transfer: float  # data volume, in cell units


def estimate_access(m: int, n: int, p: int, q: int, w: WorkloadProfile) -> AccessEstimate:
    """Seek/transfer counts for an m x n sheet stored as p x q cell tuples."""
    if not (1 <= p <= m and 1 <= q <= n):
        raise ValueError(f"tuple shape {p}x{q} out of range for sheet {m}x{n}")
    seeks = w.n1 + w.n2 * n / q + w.n3 * m / p
    transfer = w.n1 * p * q + w.n2 * p * n + w.n3 * q * m
    return AccessEstimate(seeks, transfer)


def tuple_shape_objective(m: int, n: int, p: int, q: int, w: WorkloadProfile) -> float:
    est = estimate_access(m, n, p, q, w)
    return w.k * est.seeks + (1.0 - w.k) * est.transfer


def tuple_shape_optimize(m: int, n: int, w: WorkloadProfile) -> tuple[int, int]:
    """Exhaustively pick the tuple shape minimizing the weighted seek +
    transfer objective; ties break toward smaller p*q, then smaller p."""
    if m < 1 or n < 1:
        raise ValueError("sheet dimensions must be >= 1")
    best: tuple[float, int, int] | None = None
    for p in range(1, m + 1):
        for q in range(1, n + 1):
            key = (tuple_shape_objective(m, n, p, q, w), p * q, p)
            if best is None or key < best:
                best = key
    assert best is not None
    _, area, p = best
    return (p, area // p)


# --- parameter file IO -------------------------------------------------------

def load_params(path: str) -> tuple[CostParams, AccessParams]:
    """Read key=value text: s1..s5 plus optional access weights
    (table_touch, tuple_fetch, cell_transfer). '#' starts a comment."""
    values: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = float(value.strip())
    try:
        cost = CostParams(*(values[k] for k in ("s1", "s2", "s3", "s4", "s5")))
    except KeyError as missing:
        raise ValueError(f"{path}: missing cost constant {missing}") from None
    access = AccessParams(
        table_touch_cost=values.get("table_touch", 100.0),
        tuple_fetch_cost=values.get("tuple_fetch", 10.0),
        cell_transfer_cost=values.get("cell_transfer", 1.0),
    )
    return cost, access


def save_params(path: str, cost: CostParams, access: AccessParams | None = None) -> None:
    access = access or AccessParams()
    lines = [f"s{i}={getattr(cost, f's{i}')!r}" for i in range(1, 6)]
    lines += [
        f"table_touch={access.table_touch_cost!r}",
        f"tuple_fetch={access.tuple_fetch_cost!r}",
        f"cell_transfer={access.cell_transfer_cost!r}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
