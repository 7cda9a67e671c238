import math
import random

from gridstore.analyzer import (
    connected_components,
    corpus_stats,
    corpus_stats_csv,
    density,
    k_bound,
    tabular_regions,
)
from gridstore.core import EMPTY, CellAddress, Formula, Number, Region, Sheet
from gridstore.costmodel import CostParams, pg_params, unit_params
from gridstore.formula import parse_formula


def _sheet_from_cells(cells, rows=50, cols=50):
    sheet = Sheet(rows=rows, cols=cols)
    for r, c in cells:
        sheet.set(CellAddress(r, c), Number(1.0))
    return sheet


def test_density_examples():
    sheet = _sheet_from_cells([(1, 1), (3, 3)])
    assert density(sheet, Region(1, 1, 3, 3)) == 2 / 9
    dense = _sheet_from_cells([(r, c) for r in range(1, 4) for c in range(1, 4)])
    assert density(dense, Region(1, 1, 3, 3)) == 1.0
    assert density(Sheet(), Region(1, 1, 3, 3)) == 0.0


def test_components_edge_adjacency():
    assert len(connected_components(_sheet_from_cells([(1, 1), (1, 2)]))) == 1
    assert len(connected_components(_sheet_from_cells([(1, 1), (1, 3)]))) == 2
    # diagonal contact does not connect
    assert len(connected_components(_sheet_from_cells([(1, 1), (2, 2)]))) == 2


def test_component_report_l_shape():
    cells = [(1, 1), (2, 1), (3, 1), (3, 2), (3, 3)]
    reports = connected_components(_sheet_from_cells(cells))
    assert len(reports) == 1
    report = reports[0]
    assert report.bbox == Region(1, 1, 3, 3)
    assert report.density == 5 / 9
    assert report.empty_in_bbox == 4


def test_components_partition_filled_cells():
    rng = random.Random(4)
    for _ in range(20):
        cells = {
            (rng.randint(1, 15), rng.randint(1, 15)) for _ in range(rng.randint(0, 80))
        }
        sheet = _sheet_from_cells(cells)
        reports = connected_components(sheet)
        union = set()
        for report in reports:
            assert not (union & report.members)
            union |= report.members
        assert union == set(sheet.cells)
        # components are pairwise non-adjacent
        for i, a in enumerate(reports):
            for b in reports[i + 1 :]:
                for (r, c) in a.members:
                    for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                        assert CellAddress(*nb) not in b.members
        for report in reports:
            assert abs(report.density - len(report.members) / report.bbox.area) < 1e-12
            # when the bbox holds only this component's cells, the sheet-level
            # density recomputation agrees exactly
            if all(
                CellAddress(r, c) in report.members
                for r, c in (
                    (a.row, a.col)
                    for a in sheet.cells
                    if report.bbox.contains(a)
                )
            ):
                assert abs(density(sheet, report.bbox) - report.density) < 1e-12


def test_tabular_rule_thresholds():
    dense_5x2 = _sheet_from_cells([(r, c) for r in range(1, 6) for c in range(1, 3)])
    assert tabular_regions(dense_5x2) == [Region(1, 1, 5, 2)]

    dense_4x2 = _sheet_from_cells([(r, c) for r in range(1, 5) for c in range(1, 3)])
    assert tabular_regions(dense_4x2) == []  # rows < 5

    # 10x3 component with 21 of 30 filled: density 0.7 passes, 0.69 fails
    cells = [(r, c) for r in range(1, 11) for c in range(1, 4)]
    sheet = _sheet_from_cells(cells)
    # keep connectivity: remove interior cells off the left column spine
    removable = [(r, 3) for r in range(2, 10)] + [(2, 2)]
    for r, c in removable:
        sheet.set(CellAddress(r, c), EMPTY)
    reports = connected_components(sheet)
    assert len(reports) == 1 and reports[0].density == 21 / 30
    assert tabular_regions(sheet) == [reports[0].bbox]
    sheet.set(CellAddress(3, 2), EMPTY)  # still one component via column 1
    reports = connected_components(sheet)
    assert len(reports) == 1 and reports[0].density == 20 / 30
    assert tabular_regions(sheet) == []  # 20/30 < 0.7


def test_k_bound_examples():
    dense = connected_components(
        _sheet_from_cells([(r, c) for r in range(1, 3) for c in range(1, 3)])
    )[0]
    assert k_bound(dense, unit_params()) == 1  # e = 0

    report = connected_components(_sheet_from_cells([(1, 1)]))[0]
    synthetic = report.__class__(
        component_id=0,
        members=report.members,
        bbox=report.bbox,
        density=report.density,
        is_tabular=False,
        empty_in_bbox=16,
    )
    assert k_bound(synthetic, CostParams(4, 1, 1, 1, 1)) == 5  # floor(16/4 + 1)

    synthetic100 = synthetic.__class__(
        component_id=0,
        members=synthetic.members,
        bbox=synthetic.bbox,
        density=synthetic.density,
        is_tabular=False,
        empty_in_bbox=100,
    )
    assert k_bound(synthetic100, pg_params()) == 1  # floor(100*0.125/8192 + 1)
    assert k_bound(synthetic100, CostParams(0, 1, 1, 1, 1)) == 2**63 - 1  # sentinel


def test_corpus_stats():
    formula_sheet = Sheet(rows=20, cols=5)
    src = "=SUM(A1:A10)"
    formula_sheet.set(CellAddress(12, 1), Formula(src, parse_formula(src)))
    stats = corpus_stats([("only", formula_sheet)])
    assert stats.formula_sheet_pct == 100.0
    assert stats.formula_cell_pct == 100.0  # every filled cell is a formula
    only = stats.sheets[0]
    assert only.cells_per_formula == 10
    assert only.regions_per_formula == 1

    empty = corpus_stats([])
    assert empty.formula_sheet_pct is None
    assert empty.cells_per_formula is None

    csv_text = corpus_stats_csv(stats)
    lines = csv_text.strip().split("\n")
    assert lines[0] == "sheet,filled,formulae,density,tabular_coverage,cells_per_formula,regions_per_formula"
    assert lines[1].startswith("only,1,1,")
    assert lines[-1].startswith("__summary__,")


def test_regions_per_formula_counts_footprint_components():
    sheet = Sheet(rows=20, cols=10)
    src = "=SUM(A1:A3)+SUM(C1:C3)"  # two disjoint footprint components
    sheet.set(CellAddress(10, 1), Formula(src, parse_formula(src)))
    stats = corpus_stats([("s", sheet)])
    assert stats.sheets[0].regions_per_formula == 2
    assert stats.sheets[0].cells_per_formula == 6
