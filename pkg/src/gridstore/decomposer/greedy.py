"""Greedy and aggressive-greedy decomposition.

Both work top-down on the run-collapsed grid. Greedy compares the best
no-split model against the best single cut, valuing cut halves by their own
local no-split cost, and stops as soon as no cut improves. Aggressive keeps
cutting (same cut criterion) until regions are fully dense or single blocks,
then assembles the best mix on the way back up.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from gridstore.core import OccupancyMask, Sheet
from gridstore.costmodel import COM, RCV, ROM, CostParams, ModelKind, tom
from gridstore.decomposer.dp import _ReuseMap
from gridstore.decomposer.grid import Grid, build_grid
from gridstore.decomposer.types import Constraints, DecompEntry, Decomposition

INF = math.inf


@dataclass(frozen=True)
class _Leaf:
    objective: float  # storage plus any migration penalty
    storage: float
    kind: ModelKind | None  # None for empty regions
    reused: bool
    filled: float


def _leaf(
    grid: Grid,
    params: CostParams,
    constraints: Constraints,
    reuse: _ReuseMap,
    eta: float,
    x1: int,
    x2: int,
    y1: int,
    y2: int,
) -> _Leaf:
    filled = grid.filled(x1, x2, y1, y2)
    if filled == 0:
        return _Leaf(0.0, 0.0, None, False, 0.0)
    if grid.pinned(x1, x2, y1, y2):
        return _Leaf(INF, INF, None, False, filled)
    rows = grid.rows(x1, x2)
    cols = grid.cols(y1, y2)
    mig = eta * filled
    max_cols = constraints.max_table_cols
    rom = ((params.s1 + params.s2 * (rows * cols)) + params.s3 * cols) + params.s4 * rows
    com = ((params.s1 + params.s2 * (rows * cols)) + params.s4 * cols) + params.s3 * rows
    if max_cols is not None:
        if cols > max_cols:
            rom = INF
        if rows > max_cols:
            com = INF
    rcv = params.s5 * filled
    allowed = constraints.models
    candidates = []
    if "ROM" in allowed:
        candidates.append((rom + mig, rom, ROM, False))
    if "COM" in allowed:
        candidates.append((com + mig, com, COM, False))
    if "RCV" in allowed:
        candidates.append((rcv + mig, rcv, RCV, False))
    reused = reuse.cost(grid, params, (x1, x2, y1, y2))
    if reused is not None:
        cost, kind = reused
        candidates.insert(0, (cost, cost, kind, True))
    best = candidates[0]
    for cand in candidates[1:]:
        if cand[0] < best[0]:
            best = cand
    objective, storage, kind, is_reused = best
    return _Leaf(objective, storage, kind, is_reused, filled)


def _half_costs(grid, params, constraints, eta, R, C, F, pinned):
    """Vector of local no-split costs for a family of half-regions with row
    counts R, column counts C, filled counts F, and pin flags."""
    area = R * C
    out = None
    allowed = constraints.models
    max_cols = constraints.max_table_cols
    if "ROM" in allowed:
        rom = (params.s1 + params.s2 * area + params.s3 * C) + params.s4 * R
        if max_cols is not None:
            rom = np.where(C > max_cols, INF, rom)
        out = rom
    if "COM" in allowed:
        com = (params.s1 + params.s2 * area + params.s4 * C) + params.s3 * R
        if max_cols is not None:
            com = np.where(R > max_cols, INF, com)
        out = com if out is None else np.minimum(out, com)
    if "RCV" in allowed:
        rcv = params.s5 * F
        out = rcv if out is None else np.minimum(out, rcv)
    if eta:
        out = out + eta * F
    out = np.where(pinned, INF, out)
    return np.where(F == 0, 0.0, out)


def _best_cut(grid, params, constraints, reuse, eta, x1, x2, y1, y2):
    """Cheapest single cut valued by the halves' local costs; horizontal
    wins ties, then the lowest index. Returns (cost, orientation, index)."""
    best = (INF, None, -1)
    rwp, cwp, fp, pinp = grid.row_wp, grid.col_wp, grid.fp, grid.pinp
    reuse_items = reuse.by_coords.items() if reuse and reuse.by_coords else ()
    if x2 > x1:
        cuts = np.arange(x1, x2)
        C = cwp[y2 + 1] - cwp[y1]
        R_top = rwp[cuts + 1] - rwp[x1]
        R_bot = rwp[x2 + 1] - rwp[cuts + 1]
        f_line = fp[cuts + 1, y2 + 1] - fp[cuts + 1, y1]
        F_top = f_line - (fp[x1, y2 + 1] - fp[x1, y1])
        F_bot = (fp[x2 + 1, y2 + 1] - fp[x2 + 1, y1]) - f_line
        p_line = pinp[cuts + 1, y2 + 1] - pinp[cuts + 1, y1]
        pin_top = (p_line - (pinp[x1, y2 + 1] - pinp[x1, y1])) > 0
        pin_bot = ((pinp[x2 + 1, y2 + 1] - pinp[x2 + 1, y1]) - p_line) > 0
        top = _half_costs(grid, params, constraints, eta, R_top, C, F_top, pin_top)
        bot = _half_costs(grid, params, constraints, eta, R_bot, C, F_bot, pin_bot)
        for (rx1, rx2, ry1, ry2), _kind in reuse_items:
            if ry1 != y1 or ry2 != y2:
                continue
            cost, _ = reuse.cost(grid, params, (rx1, rx2, ry1, ry2))
            if rx1 == x1 and x1 <= rx2 < x2:
                i = rx2 - x1
                top[i] = min(top[i], cost)
            if rx2 == x2 and x1 < rx1 <= x2:
                i = rx1 - 1 - x1
                bot[i] = min(bot[i], cost)
        est = top + bot
        idx = int(np.argmin(est))
        if est[idx] < best[0]:
            best = (float(est[idx]), "H", x1 + idx)
    if y2 > y1:
        cuts = np.arange(y1, y2)
        R = rwp[x2 + 1] - rwp[x1]
        C_left = cwp[cuts + 1] - cwp[y1]
        C_right = cwp[y2 + 1] - cwp[cuts + 1]
        f_line = fp[x2 + 1, cuts + 1] - fp[x1, cuts + 1]
        F_left = f_line - (fp[x2 + 1, y1] - fp[x1, y1])
        F_right = (fp[x2 + 1, y2 + 1] - fp[x1, y2 + 1]) - f_line
        p_line = pinp[x2 + 1, cuts + 1] - pinp[x1, cuts + 1]
        pin_left = (p_line - (pinp[x2 + 1, y1] - pinp[x1, y1])) > 0
        pin_right = ((pinp[x2 + 1, y2 + 1] - pinp[x1, y2 + 1]) - p_line) > 0
        left = _half_costs(grid, params, constraints, eta, R, C_left, F_left, pin_left)
        right = _half_costs(grid, params, constraints, eta, R, C_right, F_right, pin_right)
        for (rx1, rx2, ry1, ry2), _kind in reuse_items:
            if rx1 != x1 or rx2 != x2:
                continue
            cost, _ = reuse.cost(grid, params, (rx1, rx2, ry1, ry2))
            if ry1 == y1 and y1 <= ry2 < y2:
                left[ry2 - y1] = min(left[ry2 - y1], cost)
            if ry2 == y2 and y1 < ry1 <= y2:
                right[ry1 - 1 - y1] = min(right[ry1 - 1 - y1], cost)
        est = left + right
        idx = int(np.argmin(est))
        if est[idx] < best[0]:
            best = (float(est[idx]), "V", y1 + idx)
    return best


def _prepare(source, constraints, weighted, existing, extra_breaks):
    constraints = constraints or Constraints()
    extra_rows, extra_cols = extra_breaks
    grid = build_grid(
        source,
        constraints,
        weighted=weighted,
        extra_row_breaks=extra_rows,
        extra_col_breaks=extra_cols,
    )
    reuse = _ReuseMap(grid, existing) if grid is not None else None
    return constraints, grid, reuse


def _finish(entries, constraints, provenance, storage, started):
    entries.sort(key=lambda e: (e.region.top, e.region.left))
    entries.extend(DecompEntry(region, tom(name)) for region, name in constraints.pinned_tom)
    decomp = Decomposition(entries, provenance, storage)
    decomp.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return decomp


def greedy(
    source: Sheet | OccupancyMask,
    params: CostParams,
    constraints: Constraints | None = None,
    weighted: bool = True,
    _existing: Decomposition | None = None,
    _eta: float = 0.0,
    _extra_breaks=((), ()),
    _provenance: str = "greedy",
) -> Decomposition:
    started = time.perf_counter()
    constraints, grid, reuse = _prepare(source, constraints, weighted, _existing, _extra_breaks)
    if grid is None:
        return _finish([], constraints, _provenance, 0.0, started)

    entries: list[DecompEntry] = []
    storage_total = 0.0
    migrated_total = 0.0

    def rec(x1, x2, y1, y2):
        nonlocal storage_total, migrated_total
        if grid.filled(x1, x2, y1, y2) == 0:
            return
        leaf = _leaf(grid, params, constraints, reuse, _eta, x1, x2, y1, y2)
        cut_cost, orient, idx = _best_cut(
            grid, params, constraints, reuse, _eta, x1, x2, y1, y2
        )
        if cut_cost < leaf.objective:
            if orient == "H":
                rec(x1, idx, y1, y2)
                rec(idx + 1, x2, y1, y2)
            else:
                rec(x1, x2, y1, idx)
                rec(x1, x2, idx + 1, y2)
            return
        entries.append(DecompEntry(grid.region(x1, x2, y1, y2), leaf.kind))
        storage_total += leaf.storage
        if not leaf.reused:
            migrated_total += leaf.filled

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * (grid.H + grid.W) + 1000))
    try:
        rec(0, grid.H - 1, 0, grid.W - 1)
    finally:
        sys.setrecursionlimit(limit)
    decomp = _finish(entries, constraints, _provenance, storage_total, started)
    decomp.migrated = migrated_total
    return decomp


def aggressive(
    source: Sheet | OccupancyMask,
    params: CostParams,
    constraints: Constraints | None = None,
    weighted: bool = True,
    _existing: Decomposition | None = None,
    _eta: float = 0.0,
    _extra_breaks=((), ()),
    _provenance: str = "aggressive",
) -> Decomposition:
    started = time.perf_counter()
    constraints, grid, reuse = _prepare(source, constraints, weighted, _existing, _extra_breaks)
    if grid is None:
        return _finish([], constraints, _provenance, 0.0, started)

    def rec(x1, x2, y1, y2):
        """Returns (objective, storage, entries, migrated)."""
        filled = grid.filled(x1, x2, y1, y2)
        if filled == 0:
            return 0.0, 0.0, [], 0.0
        leaf = _leaf(grid, params, constraints, reuse, _eta, x1, x2, y1, y2)
        area = grid.rows(x1, x2) * grid.cols(y1, y2)
        entry = [DecompEntry(grid.region(x1, x2, y1, y2), leaf.kind)] if leaf.kind else []
        mig = 0.0 if leaf.reused else leaf.filled
        if (x1 == x2 and y1 == y2) or filled == area:
            return leaf.objective, leaf.storage, entry, mig
        _, orient, idx = _best_cut(grid, params, constraints, reuse, _eta, x1, x2, y1, y2)
        if orient == "H":
            first = rec(x1, idx, y1, y2)
            second = rec(idx + 1, x2, y1, y2)
        else:
            first = rec(x1, x2, y1, idx)
            second = rec(x1, x2, idx + 1, y2)
        children_obj = first[0] + second[0]
        if leaf.objective <= children_obj:
            return leaf.objective, leaf.storage, entry, mig
        return (
            children_obj,
            first[1] + second[1],
            first[2] + second[2],
            first[3] + second[3],
        )

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * (grid.H + grid.W) + 1000))
    try:
        _, storage, entries, migrated = rec(0, grid.H - 1, 0, grid.W - 1)
    finally:
        sys.setrecursionlimit(limit)
    decomp = _finish(list(entries), constraints, _provenance, storage, started)
    decomp.migrated = migrated
    return decomp
