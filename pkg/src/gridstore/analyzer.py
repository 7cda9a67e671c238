"""Structural analysis of sheets: density, connected components, tabular
regions, formula statistics, and the per-component table-count bound."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

from gridstore.core import CellAddress, Formula, Region, Sheet
from gridstore.costmodel import CostParams
from gridstore.formula.evaluator import access_footprint
from gridstore.formula.parser import parse_formula

# Thresholds from the tabular-region rule: a component qualifies when its
# bounding box spans at least this many columns and rows at this density.
TABULAR_MIN_COLS = 2
TABULAR_MIN_ROWS = 5
TABULAR_MIN_DENSITY = 0.7


@dataclass(frozen=True)
class ComponentReport:
    component_id: int
    members: frozenset[CellAddress]
    bbox: Region
    density: float
    is_tabular: bool
    empty_in_bbox: int


def density(sheet: Sheet, region: Region) -> float:
    """Filled cells in ``region`` divided by its area."""
    filled = sum(1 for _ in sheet.filled_in(region))
    return filled / region.area


def _components_of_cells(cells: set[CellAddress]) -> list[set[CellAddress]]:
    """Connected components under 4-neighbor (shared edge) adjacency."""
    remaining = set(cells)
    components = []
    while remaining:
        seed = remaining.pop()
        members = {seed}
        frontier = [seed]
        while frontier:
            r, c = frontier.pop()
            for nb in (
                CellAddress(r - 1, c),
                CellAddress(r + 1, c),
                CellAddress(r, c - 1),
                CellAddress(r, c + 1),
            ):
                if nb in remaining:
                    remaining.remove(nb)
                    members.add(nb)
                    frontier.append(nb)
        components.append(members)
    return components


def connected_components(
    sheet: Sheet,
    min_rows: int = TABULAR_MIN_ROWS,
    min_cols: int = TABULAR_MIN_COLS,
    min_density: float = TABULAR_MIN_DENSITY,
) -> list[ComponentReport]:
    reports = []
    components = _components_of_cells(set(sheet.cells))
    # Deterministic numbering: top-left-most member first.
    components.sort(key=lambda members: min(members))
    for cid, members in enumerate(components):
        rows = [a.row for a in members]
        cols = [a.col for a in members]
        bbox = Region(min(rows), min(cols), max(rows), max(cols))
        dens = len(members) / bbox.area
        tabular = (
            bbox.col_count >= min_cols
            and bbox.row_count >= min_rows
            and dens >= min_density
        )
        reports.append(
            ComponentReport(
                component_id=cid,
                members=frozenset(members),
                bbox=bbox,
                density=dens,
                is_tabular=tabular,
                empty_in_bbox=bbox.area - len(members),
            )
        )
    return reports


def tabular_regions(
    sheet: Sheet,
    min_rows: int = TABULAR_MIN_ROWS,
    min_cols: int = TABULAR_MIN_COLS,
    min_density: float = TABULAR_MIN_DENSITY,
) -> list[Region]:
    """Bounding boxes of components that pass the tabular-region rule."""
    return [
        report.bbox
        for report in connected_components(sheet, min_rows, min_cols, min_density)
        if report.is_tabular
    ]


def k_bound(component: ComponentReport, p: CostParams) -> int:
    """Upper bound on tables covering a component's bounding box in the
    optimal layout: floor(e * s2 / s1 + 1), e = empty cells in the box."""
    if p.s1 <= 0:
        return 2**63 - 1  # unbounded sentinel
    return math.floor(component.empty_in_bbox * p.s2 / p.s1 + 1)


# --- corpus statistics -------------------------------------------------------

@dataclass(frozen=True)
class SheetStats:
    name: str
    filled: int
    formulas: int
    density: float | None  # None for an empty sheet
    tabular_coverage: float | None  # fraction of filled cells in tabular regions
    cells_per_formula: float | None
    regions_per_formula: float | None


@dataclass(frozen=True)
class CorpusStats:
    sheets: tuple[SheetStats, ...]
    formula_sheet_pct: float | None  # % of sheets containing any formula
    formula_cell_pct: float | None  # % of filled cells that are formulas
    density_distribution: tuple[float, ...]  # per-sheet densities, sorted
    tabular_coverage_pct: float | None
    cells_per_formula: float | None
    regions_per_formula: float | None


def _sheet_stats(name: str, sheet: Sheet) -> SheetStats:
    filled = sheet.filled_count()
    bbox = sheet.bounding_box()
    dens = filled / bbox.area if bbox else None
    tabular = tabular_regions(sheet)
    if filled:
        covered = sum(
            1 for addr in sheet.cells if any(t.contains(addr) for t in tabular)
        )
        coverage = covered / filled
    else:
        coverage = None
    cells_counts = []
    region_counts = []
    for _, content in sheet.cells.items():
        if not isinstance(content, Formula):
            continue
        expr = content.expr if content.expr is not None else parse_formula(content.source)
        regions, count = access_footprint(expr)
        cells_counts.append(count)
        accessed: set[CellAddress] = set()
        for region in regions:
            accessed.update(region.cells())
        region_counts.append(len(_components_of_cells(accessed)))
    formulas = len(cells_counts)
    return SheetStats(
        name=name,
        filled=filled,
        formulas=formulas,
        density=dens,
        tabular_coverage=coverage,
        cells_per_formula=sum(cells_counts) / formulas if formulas else None,
        regions_per_formula=sum(region_counts) / formulas if formulas else None,
    )


def corpus_stats(sheets: Sequence[tuple[str, Sheet]]) -> CorpusStats:
    per_sheet = tuple(_sheet_stats(name, sheet) for name, sheet in sheets)
    if not per_sheet:
        return CorpusStats((), None, None, (), None, None, None)
    with_formulas = sum(1 for s in per_sheet if s.formulas > 0)
    total_filled = sum(s.filled for s in per_sheet)
    total_formulas = sum(s.formulas for s in per_sheet)
    densities = tuple(sorted(s.density for s in per_sheet if s.density is not None))
    covered = [s for s in per_sheet if s.tabular_coverage is not None]
    cpf = [s.cells_per_formula for s in per_sheet if s.cells_per_formula is not None]
    rpf = [s.regions_per_formula for s in per_sheet if s.regions_per_formula is not None]
    return CorpusStats(
        sheets=per_sheet,
        formula_sheet_pct=100.0 * with_formulas / len(per_sheet),
        formula_cell_pct=(100.0 * total_formulas / total_filled) if total_filled else None,
        density_distribution=densities,
        tabular_coverage_pct=(
            100.0
            * sum(s.tabular_coverage * s.filled for s in covered)
            / sum(s.filled for s in covered)
            if covered and sum(s.filled for s in covered)
            else None
        ),
        cells_per_formula=sum(cpf) / len(cpf) if cpf else None,
        regions_per_formula=sum(rpf) / len(rpf) if rpf else None,
    )


CSV_COLUMNS = [
    "sheet",
    "filled",
    "formulae",
    "density",
    "tabular_coverage",
    "cells_per_formula",
    "regions_per_formula",
]


def corpus_stats_csv(stats: CorpusStats) -> str:
    """One row per sheet plus a summary row; absent metrics are blank."""

    def fmt(value: float | int | None) -> str:
        if value is None:
            return ""
        if isinstance(value, int):
            return str(value)
        return f"{value:.6g}"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in stats.sheets:
        writer.writerow(
            [
                s.name,
                s.filled,
                s.formulas,
                fmt(s.density),
                fmt(s.tabular_coverage),
                fmt(s.cells_per_formula),
                fmt(s.regions_per_formula),
            ]
        )
    mean_density = (
        sum(stats.density_distribution) / len(stats.density_distribution)
        if stats.density_distribution
        else None
    )
    writer.writerow(
        [
            "__summary__",
            sum(s.filled for s in stats.sheets),
            sum(s.formulas for s in stats.sheets),
            fmt(mean_density),
            fmt(stats.tabular_coverage_pct / 100.0 if stats.tabular_coverage_pct is not None else None),
            fmt(stats.cells_per_formula),
            fmt(stats.regions_per_formula),
        ]
    )
    return buf.getvalue()
