"""Seeded update workloads: cell edits, new cells, row/column additions,
batched for incremental re-optimization."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Union

from gridstore.core import CellAddress, Number, Sheet

# One generated engine operation; addresses are display coordinates valid at
# the moment the operation is applied.
Op = Union[
    tuple[str, CellAddress, Number],  # ("update"|"add_cell", addr, value)
    tuple[str, int],  # ("add_row"|"add_col", after)
]

BATCH_SIZE = 1000


@dataclass(frozen=True)
class UpdateWorkload:
    op_count: int = 10_000
    update_existing: float = 0.6
    add_cell: float = 0.2
    add_row: float = 0.1999
    add_column: float = 0.0001
    seed: int = 1

    def __post_init__(self) -> None:
        total = self.update_existing + self.add_cell + self.add_row + self.add_column
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"operation probabilities sum to {total}, not 1")


def gen_update_workload(w: UpdateWorkload, sheet: Sheet) -> list[list[Op]]:
    """Script of engine operations at the configured mix, split into batches
    of 1000 (re-optimization points). Tracks extents and filled cells so the
    script stays valid when replayed in order."""
    rng = random.Random(w.seed)
    rows, cols = sheet.rows, sheet.cols
    filled = list(sheet.cells.keys())
    filled_set = set(filled)
    script: list[list[Op]] = [[]]
    for _ in range(w.op_count):
        if len(script[-1]) >= BATCH_SIZE:
            script.append([])
        roll = rng.random()
        value = Number(float(rng.randint(0, 999)))
        if roll < w.update_existing and filled:
            addr = filled[rng.randrange(len(filled))]
            script[-1].append(("update", addr, value))
        elif roll < w.update_existing + w.add_cell:
            for _ in range(200):
                addr = CellAddress(rng.randint(1, rows), rng.randint(1, cols))
                if addr not in filled_set:
                    break
            else:
                continue
            filled.append(addr)
            filled_set.add(addr)
            script[-1].append(("add_cell", addr, value))
        elif roll < w.update_existing + w.add_cell + w.add_row:
            after = rng.randint(0, rows)
            rows += 1
            filled = [
                CellAddress(a.row + 1, a.col) if a.row > after else a for a in filled
            ]
            filled_set = set(filled)
            script[-1].append(("add_row", after))
        else:
            after = rng.randint(0, cols)
            cols += 1
            filled = [
                CellAddress(a.row, a.col + 1) if a.col > after else a for a in filled
            ]
            filled_set = set(filled)
            script[-1].append(("add_col", after))
    return [batch for batch in script if batch]


def empirical_mix(script: list[list[Op]]) -> dict[str, float]:
    counts = {"update": 0, "add_cell": 0, "add_row": 0, "add_col": 0}
    total = 0
    for batch in script:
        for op in batch:
            counts[op[0]] += 1
            total += 1
    return {k: v / total if total else 0.0 for k, v in counts.items()}
