"""Brute-force reference optimizers for small occupancy masks.

Both are deliberately independent of the production DP: plain recursion over
cell sets, no prefix sums, no memoized cut tables (the partition oracle memo
keys on covered-area bitmasks, a different search space entirely).
"""

from __future__ import annotations

from functools import lru_cache

from gridstore.core import OccupancyMask
from gridstore.costmodel import CostParams, com_cost, rcv_cost, rom_cost


def _min_model_cost(rows: int, cols: int, filled: int, p: CostParams) -> float:
    return min(rom_cost(rows, cols, p), com_cost(rows, cols, p), rcv_cost(filled, p))


def exhaustive_cut_oracle(mask: OccupancyMask, p: CostParams) -> float:
    """Un-memoized exhaustive recursion over every sequence of horizontal and
    vertical cuts; the optimum it finds must equal the DP's."""
    if mask.rows > 5 or mask.cols > 5:
        raise ValueError("cut oracle is limited to 5x5 masks")
    cells = mask.filled
    if not cells:
        return 0.0
    top = min(a.row for a in cells)
    bottom = max(a.row for a in cells)
    left = min(a.col for a in cells)
    right = max(a.col for a in cells)

    def rec(t: int, l: int, b: int, r: int) -> float:
        filled = sum(1 for a in cells if t <= a.row <= b and l <= a.col <= r)
        if filled == 0:
            return 0.0
        best = _min_model_cost(b - t + 1, r - l + 1, filled, p)
        for i in range(t, b):
            cand = rec(t, l, i, r) + rec(i + 1, l, b, r)
            if cand < best:
                best = cand
        for j in range(l, r):
            cand = rec(t, l, b, j) + rec(t, j + 1, b, r)
            if cand < best:
                best = cand
        return best

    return rec(top, left, bottom, right)


def exhaustive_partition_oracle(mask: OccupancyMask, p: CostParams) -> tuple[float, int]:
    """Optimal cost over all partitions of the bounding box into disjoint
    rectangles, empty rectangles free, each non-empty one priced at its best
    model. Returns (cost, table count); ties prefer fewer tables.

    This search space is a strict superset of recursive decomposition; the
    DP's additive approximation bound is checked against it.
    """
    if mask.rows > 4 or mask.cols > 4:
        raise ValueError("partition oracle is limited to 4x4 masks")
    cells = sorted(mask.filled)
    if not cells:
        return 0.0, 0
    top = min(a.row for a in cells)
    bottom = max(a.row for a in cells)
    left = min(a.col for a in cells)
    right = max(a.col for a in cells)
    height = bottom - top + 1
    width = right - left + 1

    def bit(row: int, col: int) -> int:
        return 1 << ((row - top) * width + (col - left))

    cell_bits = {a: bit(a.row, a.col) for a in cells}
    all_cells_mask = 0
    for a in cells:
        all_cells_mask |= cell_bits[a]

    @lru_cache(maxsize=None)
    def rec(occupied: int) -> tuple[float, int]:
        target = None
        for a in cells:
            if not occupied & cell_bits[a]:
                target = a
                break
        if target is None:
            return 0.0, 0
        best: tuple[float, int] | None = None
        for t in range(top, target.row + 1):
            for b in range(target.row, bottom + 1):
                for l in range(left, target.col + 1):
                    for r in range(target.col, right + 1):
                        rect_bits = 0
                        for row in range(t, b + 1):
                            for col in range(l, r + 1):
                                rect_bits |= bit(row, col)
                        if rect_bits & occupied:
                            continue
                        filled = bin(rect_bits & all_cells_mask).count("1")
                        price = _min_model_cost(b - t + 1, r - l + 1, filled, p)
                        sub_cost, sub_k = rec(occupied | rect_bits)
                        cand = (price + sub_cost, 1 + sub_k)
                        if best is None or cand < best:
                            best = cand
        assert best is not None
        return best

    return rec(0)
