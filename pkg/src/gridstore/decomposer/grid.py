"""Occupancy grid over a sheet's bounding box, with run-length weighting.

Adjacent rows (and columns) with identical occupancy collapse into weighted
runs; cut positions then range over run boundaries only, which preserves
optimality while shrinking the DP grid. Linked-table (TOM) pins are carried
as a per-block flag, and their cells are excluded from filled counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from gridstore.core import CellAddress, OccupancyMask, Region, Sheet
from gridstore.decomposer.types import Constraints


def _filled_addresses(source: Sheet | OccupancyMask) -> Iterable[CellAddress]:
    if isinstance(source, Sheet):
        return source.cells.keys()
    return source.filled


@dataclass
class Grid:
    """Weighted run-length view of a bounding box.

    Grid coordinates are 0-based run indices; ``region()`` expands them back
    to absolute 1-based sheet coordinates.
    """

    bbox: Region
    row_starts: list[int]  # absolute first row of each run
    col_starts: list[int]
    row_wp: np.ndarray  # prefix sums of run weights, len H+1
    col_wp: np.ndarray
    fp: np.ndarray  # (H+1, W+1) prefix of weighted filled counts
    pinp: np.ndarray  # (H+1, W+1) prefix of pinned-block indicators

    @property
    def H(self) -> int:
        return len(self.row_starts)

    @property
    def W(self) -> int:
        return len(self.col_starts)

    def rows(self, x1: int, x2: int) -> float:
        return float(self.row_wp[x2 + 1] - self.row_wp[x1])

    def cols(self, y1: int, y2: int) -> float:
        return float(self.col_wp[y2 + 1] - self.col_wp[y1])

    def filled(self, x1: int, x2: int, y1: int, y2: int) -> float:
        fp = self.fp
        return float(fp[x2 + 1, y2 + 1] - fp[x1, y2 + 1] - fp[x2 + 1, y1] + fp[x1, y1])

    def pinned(self, x1: int, x2: int, y1: int, y2: int) -> bool:
        pp = self.pinp
        return (pp[x2 + 1, y2 + 1] - pp[x1, y2 + 1] - pp[x2 + 1, y1] + pp[x1, y1]) > 0

    def region(self, x1: int, x2: int, y1: int, y2: int) -> Region:
        top = self.row_starts[x1]
        bottom = (
            self.row_starts[x2 + 1] - 1 if x2 + 1 < self.H else self.bbox.bottom
        )
        left = self.col_starts[y1]
        right = (
            self.col_starts[y2 + 1] - 1 if y2 + 1 < self.W else self.bbox.right
        )
        return Region(top, left, bottom, right)

    def grid_coords(self, region: Region) -> tuple[int, int, int, int] | None:
        """Run-index coordinates of an absolute region, or None when the
        region's edges do not align with run boundaries."""
        import bisect

        x1 = bisect.bisect_left(self.row_starts, region.top)
        y1 = bisect.bisect_left(self.col_starts, region.left)
        if (
            x1 >= self.H
            or self.row_starts[x1] != region.top
            or y1 >= self.W
            or self.col_starts[y1] != region.left
        ):
            return None
        expect_next_row = region.bottom + 1
        x2 = bisect.bisect_left(self.row_starts, expect_next_row) - 1
        if x2 + 1 < self.H:
            if self.row_starts[x2 + 1] != expect_next_row:
                return None
        elif region.bottom != self.bbox.bottom:
            return None
        expect_next_col = region.right + 1
        y2 = bisect.bisect_left(self.col_starts, expect_next_col) - 1
        if y2 + 1 < self.W:
            if self.col_starts[y2 + 1] != expect_next_col:
                return None
        elif region.right != self.bbox.right:
            return None
        return (x1, x2, y1, y2)


def _runs(
    lo: int,
    hi: int,
    occupied: dict[int, frozenset[int]],
    pin_spans: list[tuple[int, int]],
    extra_breaks: Iterable[int],
    collapse: bool,
) -> list[int]:
    """Run start positions over [lo, hi]; runs merge adjacent identical
    (occupancy, pin-coverage) lines when ``collapse`` is set."""
    if not collapse:
        return list(range(lo, hi + 1))
    starts = {lo}
    for line in occupied:
        if lo <= line <= hi:
            starts.add(line)
        if lo <= line + 1 <= hi:
            starts.add(line + 1)
    for a, b in pin_spans:
        if lo <= a <= hi:
            starts.add(a)
        if lo <= b + 1 <= hi:
            starts.add(b + 1)
    for line in extra_breaks:
        if lo < line <= hi:
            starts.add(line)
    ordered = sorted(starts)
    forced = set(extra_breaks)

    def key(line: int):
        pins = tuple(a <= line <= b for a, b in pin_spans)
        return (occupied.get(line, frozenset()), pins)

    merged = [ordered[0]]
    prev_key = key(ordered[0])
    for start in ordered[1:]:
        k = key(start)
        if k != prev_key or start in forced:
            merged.append(start)
            prev_key = k
    return merged


def build_grid(
    source: Sheet | OccupancyMask,
    constraints: Constraints | None = None,
    weighted: bool = True,
    extra_row_breaks: Iterable[int] = (),
    extra_col_breaks: Iterable[int] = (),
) -> Grid | None:
    """Build the optimizer grid; None when there is nothing to lay out."""
    constraints = constraints or Constraints()
    pins = [region for region, _ in constraints.pinned_tom]
    filled = [
        addr
        for addr in _filled_addresses(source)
        if not any(p.contains(addr) for p in pins)
    ]
    rows = [a.row for a in filled] + [r for p in pins for r in (p.top, p.bottom)]
    cols = [a.col for a in filled] + [c for p in pins for c in (p.left, p.right)]
    if not rows:
        return None
    bbox = Region(min(rows), min(cols), max(rows), max(cols))

    by_row: dict[int, set[int]] = {}
    by_col: dict[int, set[int]] = {}
    for addr in filled:
        by_row.setdefault(addr.row, set()).add(addr.col)
        by_col.setdefault(addr.col, set()).add(addr.row)
    row_occ = {r: frozenset(v) for r, v in by_row.items()}
    col_occ = {c: frozenset(v) for c, v in by_col.items()}

    row_pin_spans = [(p.top, p.bottom) for p in pins]
    col_pin_spans = [(p.left, p.right) for p in pins]
    row_starts = _runs(bbox.top, bbox.bottom, row_occ, row_pin_spans, extra_row_breaks, weighted)
    col_starts = _runs(bbox.left, bbox.right, col_occ, col_pin_spans, extra_col_breaks, weighted)

    H, W = len(row_starts), len(col_starts)
    row_w = np.diff(np.array(row_starts + [bbox.bottom + 1], dtype=np.int64))
    col_w = np.diff(np.array(col_starts + [bbox.right + 1], dtype=np.int64))
    row_wp = np.concatenate([[0], np.cumsum(row_w)]).astype(np.float64)
    col_wp = np.concatenate([[0], np.cumsum(col_w)]).astype(np.float64)

    occ_rep = np.zeros((H, W), dtype=bool)
    pin_rep = np.zeros((H, W), dtype=bool)
    for i, r in enumerate(row_starts):
        occ_cols = row_occ.get(r)
        pin_rows = [span for span in row_pin_spans if span[0] <= r <= span[1]]
        for j, c in enumerate(col_starts):
            if occ_cols and c in occ_cols:
                occ_rep[i, j] = True
            elif pin_rows and any(
                a <= c <= b
                for (a, b), (ra, rb) in zip(col_pin_spans, row_pin_spans)
                if ra <= r <= rb
            ):
                pin_rep[i, j] = True

    weights = np.outer(row_w, col_w).astype(np.float64)
    fp = np.zeros((H + 1, W + 1), dtype=np.float64)
    fp[1:, 1:] = np.cumsum(np.cumsum(occ_rep * weights, axis=0), axis=1)
    pinp = np.zeros((H + 1, W + 1), dtype=np.int64)
    pinp[1:, 1:] = np.cumsum(np.cumsum(pin_rep.astype(np.int64), axis=0), axis=1)

    return Grid(
        bbox=bbox,
        row_starts=row_starts,
        col_starts=col_starts,
        row_wp=row_wp,
        col_wp=col_wp,
        fp=fp,
        pinp=pinp,
    )
