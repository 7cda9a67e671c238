"""Synthetic sheet generator: randomly placed dense tables plus range
formulas over them. Deterministic under seed."""

from __future__ import annotations

import random
from dataclasses import dataclass

from gridstore.core import CellAddress, Formula, Number, Region, Sheet
from gridstore.formula.parser import parse_formula


@dataclass(frozen=True)
class SyntheticSpec:
    rows: int = 1_000_000
    cols: int = 100
    table_count: int = 20
    min_table_rows: int = 20
    max_table_rows: int = 200
    min_table_cols: int = 5
    max_table_cols: int = 50
    formula_count: int = 100
    seed: int = 1


def _place_tables(spec: SyntheticSpec, rng: random.Random) -> list[Region]:
    """Non-overlapping dense rectangles; placement rejects collisions (with a
    one-cell margin so tables stay distinct components)."""
    regions: list[Region] = []
    attempts = 0
    max_attempts = spec.table_count * 1000
    while len(regions) < spec.table_count and attempts < max_attempts:
        attempts += 1
        height = rng.randint(spec.min_table_rows, min(spec.max_table_rows, spec.rows))
        width = rng.randint(spec.min_table_cols, min(spec.max_table_cols, spec.cols))
        if height > spec.rows or width > spec.cols:
            continue
        top = rng.randint(1, spec.rows - height + 1)
        left = rng.randint(1, spec.cols - width + 1)
        candidate = Region(top, left, top + height - 1, left + width - 1)
        margin = Region(
            max(1, top - 1),
            max(1, left - 1),
            min(spec.rows, candidate.bottom + 1),
            min(spec.cols, candidate.right + 1),
        )
        if any(margin.overlaps(existing) for existing in regions):
            continue
        regions.append(candidate)
    if len(regions) < spec.table_count:
        raise ValueError(
            f"could not place {spec.table_count} tables on a {spec.rows}x{spec.cols} sheet"
        )
    return regions


def gen_synthetic(spec: SyntheticSpec) -> Sheet:
    """Empty sheet populated with dense rectangular regions plus random range
    formulas (SUM/AVERAGE over sub-rectangles of the tables)."""
    rng = random.Random(spec.seed)
    sheet = Sheet(rows=spec.rows, cols=spec.cols)
    regions = _place_tables(spec, rng) if spec.table_count else []
    for region in regions:
        for addr in region.cells():
            sheet.set(addr, Number(float(rng.randint(0, 999))))
    placed = 0
    guard = 0
    while placed < spec.formula_count and guard < spec.formula_count * 1000:
        guard += 1
        if not regions:
            break
        target = rng.choice(regions)
        sub_top = rng.randint(target.top, target.bottom)
        sub_bottom = rng.randint(sub_top, target.bottom)
        sub_left = rng.randint(target.left, target.right)
        sub_right = rng.randint(sub_left, target.right)
        sub = Region(sub_top, sub_left, sub_bottom, sub_right)
        func = rng.choice(("SUM", "AVERAGE"))
        host = CellAddress(rng.randint(1, spec.rows), rng.randint(1, spec.cols))
        # Hosts keep a one-cell margin from everything already placed so the
        # generated tables stay the sheet's only tabular components.
        neighborhood_filled = any(
            CellAddress(host.row + dr, host.col + dc) in sheet.cells
            for dr in (-1, 0, 1)
            for dc in (-1, 0, 1)
        )
        if neighborhood_filled or sub.contains(host):
            continue
        src = f"={func}({sub.to_a1()})"
        sheet.set(host, Formula(src, parse_formula(src)))
        placed += 1
    if placed < spec.formula_count:
        raise ValueError(f"could not place {spec.formula_count} formulas")
    return sheet
