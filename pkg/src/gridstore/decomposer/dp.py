"""Exact dynamic programming over recursive horizontal/vertical cuts.

Every undivided region is priced as the best of ROM / COM / RCV assignment
(empty regions are free); cuts range over proper splits. States are the
O(n^4) subrectangles of the (possibly run-collapsed) bounding box with O(n)
cut candidates each; transitions are vectorized per rectangle size class.
"""

from __future__ import annotations

import math
import time

import numpy as np

from gridstore.core import OccupancyMask, Sheet
from gridstore.costmodel import COM, RCV, ROM, CostParams, ModelKind, tom
from gridstore.decomposer.grid import Grid, build_grid
from gridstore.decomposer.types import (
    Constraints,
    DecompEntry,
    Decomposition,
    DpBudgetError,
)

INF = math.inf

DP_BUDGET = 256  # max grid side after weighting; memory is O(n^4)

# Leaf codes in the choice tables; positive small ints are horizontal cut
# positions, negative ones vertical.
_LEAF_EMPTY = 0
_LEAF_ROM = 31001
_LEAF_COM = 31002
_LEAF_RCV = 31003
_LEAF_REUSE = 31004

_KIND_BY_CODE = {_LEAF_ROM: ROM, _LEAF_COM: COM, _LEAF_RCV: RCV}


class _ReuseMap:
    """Existing entries addressable by grid coordinates, for incremental runs."""

    def __init__(self, grid: Grid, existing: Decomposition | None) -> None:
        self.by_coords: dict[tuple[int, int, int, int], ModelKind] = {}
        if existing is None:
            return
        for entry in existing.entries:
            if entry.kind.name == "TOM":
                continue  # pins are carried by Constraints
            coords = grid.grid_coords(entry.region)
            if coords is not None:
                self.by_coords[coords] = entry.kind

    def cost(
        self, grid: Grid, params: CostParams, coords: tuple[int, int, int, int]
    ) -> tuple[float, ModelKind] | None:
        kind = self.by_coords.get(coords)
        if kind is None:
            return None
        x1, x2, y1, y2 = coords
        rows = grid.rows(x1, x2)
        cols = grid.cols(y1, y2)
        if kind.name == "ROM":
            return ((params.s1 + params.s2 * (rows * cols)) + params.s3 * cols) + params.s4 * rows, kind
        if kind.name == "COM":
            return ((params.s1 + params.s2 * (rows * cols)) + params.s4 * cols) + params.s3 * rows, kind
        return params.s5 * grid.filled(x1, x2, y1, y2), kind


def _solve(
    grid: Grid,
    params: CostParams,
    constraints: Constraints,
    reuse: _ReuseMap,
    eta: float,
) -> tuple[float, float, list[DecompEntry], float]:
    """Returns (objective, storage, entries, migrated_cells)."""
    H, W = grid.H, grid.W
    fp, pinp = grid.fp, grid.pinp
    rwp, cwp = grid.row_wp, grid.col_wp
    max_cols = constraints.max_table_cols

    values: list[list[np.ndarray]] = [[None] * W for _ in range(H)]
    choices: list[list[np.ndarray]] = [[None] * W for _ in range(H)]

    reuse_by_span: dict[tuple[int, int], list[tuple[int, int, float]]] = {}
    for (x1, x2, y1, y2), _ in reuse.by_coords.items():
        cost, _ = reuse.cost(grid, params, (x1, x2, y1, y2))
        reuse_by_span.setdefault((x2 - x1, y2 - y1), []).append((x1, y1, cost))

    for h in range(H):
        R = rwp[h + 1 : H + 1] - rwp[0 : H - h]  # weighted row counts per x1
        for w in range(W):
            C = cwp[w + 1 : W + 1] - cwp[0 : W - w]
            F = (
                fp[h + 1 : H + 1, w + 1 : W + 1]
                - fp[h + 1 : H + 1, 0 : W - w]
                - fp[0 : H - h, w + 1 : W + 1]
                + fp[0 : H - h, 0 : W - w]
            )
            pin = (
                pinp[h + 1 : H + 1, w + 1 : W + 1]
                - pinp[h + 1 : H + 1, 0 : W - w]
                - pinp[0 : H - h, w + 1 : W + 1]
                + pinp[0 : H - h, 0 : W - w]
            ) > 0
            area = R[:, None] * C[None, :]
            rom = (params.s1 + params.s2 * area + params.s3 * C[None, :]) + params.s4 * R[:, None]
            com = (params.s1 + params.s2 * area + params.s4 * C[None, :]) + params.s3 * R[:, None]
            rcv = params.s5 * F
            if eta:
                mig = eta * F
                rom = rom + mig
                com = com + mig
                rcv = rcv + mig
            if max_cols is not None:
                rom[:, C > max_cols] = INF
                com[R > max_cols, :] = INF

            allowed = constraints.models
            if "ROM" in allowed:
                M = rom.copy()
                kinds = np.full(M.shape, _LEAF_ROM, dtype=np.int16)
            else:
                M = np.full(rom.shape, INF)
                kinds = np.full(M.shape, _LEAF_ROM, dtype=np.int16)
            if "COM" in allowed:
                better = com < M
                M[better] = com[better]
                kinds[better] = _LEAF_COM
            if "RCV" in allowed:
                better = rcv < M
                M[better] = rcv[better]
                kinds[better] = _LEAF_RCV
            M[pin] = INF
            empty = F == 0
            M[empty] = 0.0
            kinds[empty] = _LEAF_EMPTY
            for x1, y1, cost in reuse_by_span.get((h, w), ()):
                if cost <= M[x1, y1]:
                    M[x1, y1] = cost
                    kinds[x1, y1] = _LEAF_REUSE

            for a in range(h):
                cand = values[a][w][: H - h, :] + values[h - 1 - a][w][a + 1 : a + 1 + H - h, :]
                better = cand < M
                M[better] = cand[better]
                kinds[better] = a + 1
            for b in range(w):
                cand = values[h][b][:, : W - w] + values[h][w - 1 - b][:, b + 1 : b + 1 + W - w]
                better = cand < M
                M[better] = cand[better]
                kinds[better] = -(b + 1)
            values[h][w] = M
            choices[h][w] = kinds

    objective = float(values[H - 1][W - 1][0, 0])
    entries: list[DecompEntry] = []
    storage = 0.0
    migrated = 0.0
    stack = [(0, H - 1, 0, W - 1)]
    while stack:
        x1, x2, y1, y2 = stack.pop()
        if grid.filled(x1, x2, y1, y2) == 0:
            continue
        code = int(choices[x2 - x1][y2 - y1][x1, y1])
        if 0 < code < _LEAF_ROM:
            a = code - 1
            stack.append((x1, x1 + a, y1, y2))
            stack.append((x1 + a + 1, x2, y1, y2))
        elif code < 0:
            b = -code - 1
            stack.append((x1, x2, y1, y1 + b))
            stack.append((x1, x2, y1 + b + 1, y2))
        elif code == _LEAF_REUSE:
            cost, kind = reuse.cost(grid, params, (x1, x2, y1, y2))
            entries.append(DecompEntry(grid.region(x1, x2, y1, y2), kind))
            storage += cost
        else:
            kind = _KIND_BY_CODE[code]
            region = grid.region(x1, x2, y1, y2)
            rows = grid.rows(x1, x2)
            cols = grid.cols(y1, y2)
            filled = grid.filled(x1, x2, y1, y2)
            if kind.name == "ROM":
                storage += ((params.s1 + params.s2 * (rows * cols)) + params.s3 * cols) + params.s4 * rows
            elif kind.name == "COM":
                storage += ((params.s1 + params.s2 * (rows * cols)) + params.s4 * cols) + params.s3 * rows
            else:
                storage += params.s5 * filled
            migrated += filled
            entries.append(DecompEntry(region, kind))
    entries.sort(key=lambda e: (e.region.top, e.region.left))
    return objective, storage, entries, migrated


def _run(
    source: Sheet | OccupancyMask,
    params: CostParams,
    constraints: Constraints | None,
    weighted: bool,
    provenance: str,
    budget: int = DP_BUDGET,
    existing: Decomposition | None = None,
    eta: float = 0.0,
    extra_row_breaks=(),
    extra_col_breaks=(),
) -> tuple[Decomposition, float]:
    constraints = constraints or Constraints()
    started = time.perf_counter()
    grid = build_grid(
        source,
        constraints,
        weighted=weighted,
        extra_row_breaks=extra_row_breaks,
        extra_col_breaks=extra_col_breaks,
    )
    if grid is None:
        entries = [DecompEntry(region, tom(name)) for region, name in constraints.pinned_tom]
        decomp = Decomposition(entries, provenance, 0.0)
        decomp.elapsed_ms = (time.perf_counter() - started) * 1000.0
        return decomp, 0.0
    if max(grid.H, grid.W) > budget:
        raise DpBudgetError(
            f"grid is {grid.H}x{grid.W} after weighting (budget {budget}); "
            "use dp_weighted on structured sheets or the greedy/aggressive path"
        )
    reuse = _ReuseMap(grid, existing)
    _, storage, entries, migrated = _solve(grid, params, constraints, reuse, eta)
    entries.extend(DecompEntry(region, tom(name)) for region, name in constraints.pinned_tom)
    decomp = Decomposition(entries, provenance, storage)
    decomp.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return decomp, migrated


def dp_optimal(
    source: Sheet | OccupancyMask,
    params: CostParams,
    constraints: Constraints | None = None,
    budget: int = DP_BUDGET,
) -> Decomposition:
    """Cost-minimal layout over the recursive-cut space (exact, unweighted)."""
    decomp, _ = _run(source, params, constraints, weighted=False, provenance="dp", budget=budget)
    return decomp


def dp_weighted(
    source: Sheet | OccupancyMask,
    params: CostParams,
    constraints: Constraints | None = None,
    budget: int = DP_BUDGET,
) -> Decomposition:
    """Same optimum as :func:`dp_optimal`, computed on the run-collapsed grid."""
    decomp, _ = _run(source, params, constraints, weighted=True, provenance="weighted", budget=budget)
    return decomp
