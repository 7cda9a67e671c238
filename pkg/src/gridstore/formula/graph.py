"""Dependency graph over formula cells, with incremental recomputation.

Forward edges map a formula cell to the regions it reads; the inverse
direction (cell -> dependent formulas) is answered by region containment,
which keeps SUM over a million-cell range from materializing a million
edges.
"""

from __future__ import annotations

from gridstore.core import CellAddress, Formula, Region, Sheet
from gridstore.formula.ast import FormulaExpr
from gridstore.formula.evaluator import EvalValue, SheetResolver, access_footprint, evaluate


class CycleError(ValueError):
    def __init__(self, addr: CellAddress) -> None:
        super().__init__(f"formula cycle through cell {tuple(addr)}")
        self.addr = addr


class DependencyGraph:
    def __init__(self) -> None:
        self._regions: dict[CellAddress, list[Region]] = {}
        self._exprs: dict[CellAddress, FormulaExpr] = {}
        self.values: dict[CellAddress, EvalValue] = {}

    def __contains__(self, addr: CellAddress) -> bool:
        return addr in self._exprs

    def __len__(self) -> int:
        return len(self._exprs)

    def formulas(self) -> list[CellAddress]:
        return list(self._exprs)

    def expr_at(self, addr: CellAddress) -> FormulaExpr:
        return self._exprs[addr]

    def regions_of(self, addr: CellAddress) -> list[Region]:
        return self._regions.get(addr, [])

    def dependents_of(self, addr: CellAddress) -> set[CellAddress]:
        """Formula cells that read ``addr`` directly."""
        return {
            f
            for f, regions in self._regions.items()
            if any(r.contains(addr) for r in regions)
        }

    def add_formula(self, addr: CellAddress, expr: FormulaExpr) -> None:
        """Insert or replace the formula at ``addr``; rejects cycles leaving
        the graph unchanged."""
        prev_expr = self._exprs.get(addr)
        prev_regions = self._regions.get(addr)
        regions, _ = access_footprint(expr)
        self._exprs[addr] = expr
        self._regions[addr] = regions
        if self._has_cycle(addr):
            if prev_expr is None:
                del self._exprs[addr]
                del self._regions[addr]
            else:
                self._exprs[addr] = prev_expr
                self._regions[addr] = prev_regions
            raise CycleError(addr)

    def remove_formula(self, addr: CellAddress) -> None:
        self._exprs.pop(addr, None)
        self._regions.pop(addr, None)
        self.values.pop(addr, None)

    def _precedent_formulas(self, addr: CellAddress) -> set[CellAddress]:
        out = set()
        for region in self._regions.get(addr, []):
            for other, _ in self._region_formula_cells(region):
                out.add(other)
        return out

    def _region_formula_cells(self, region: Region):
        for other in self._exprs:
            if region.contains(other):
                yield other, self._exprs[other]

    def _has_cycle(self, start: CellAddress) -> bool:
        # DFS along precedent edges; revisiting ``start`` closes a cycle.
        # A formula whose footprint covers its own cell is a self-cycle.
        stack = [start]
        seen = set()
        while stack:
            node = stack.pop()
            for pre in self._precedent_formulas(node):
                if pre == start:
                    return True
                if pre not in seen:
                    seen.add(pre)
                    stack.append(pre)
        return False

    # --- evaluation ---------------------------------------------------------

    def _topo_order(self, dirty: set[CellAddress]) -> list[CellAddress]:
        """Order ``dirty`` formulas so precedents evaluate first."""
        order: list[CellAddress] = []
        state: dict[CellAddress, int] = {}  # 1 = in progress, 2 = done

        def visit(node: CellAddress) -> None:
            if state.get(node) == 2:
                return
            if state.get(node) == 1:
                raise CycleError(node)  # defensive; insertion forbids cycles
            state[node] = 1
            for pre in self._precedent_formulas(node):
                if pre in dirty:
                    visit(pre)
            state[node] = 2
            order.append(node)

        for node in sorted(dirty):
            visit(node)
        return order

    def recompute(
        self, sheet, changed: set[CellAddress]
    ) -> list[tuple[CellAddress, EvalValue]]:
        """Re-evaluate all transitive dependents of ``changed`` cells in
        topological order; returns the formula cells whose values changed.

        ``sheet`` may be a plain Sheet or any evaluator Resolver wired to
        this graph's value cache.
        """
        dirty: set[CellAddress] = set()
        frontier = set(changed)
        while frontier:
            cell = frontier.pop()
            for dep in self.dependents_of(cell):
                if dep not in dirty:
                    dirty.add(dep)
                    frontier.add(dep)
        # A changed cell that is itself a formula needs re-evaluation too.
        dirty.update(addr for addr in changed if addr in self._exprs)
        resolver = SheetResolver(sheet, self.values) if isinstance(sheet, Sheet) else sheet
        updates = []
        for addr in self._topo_order(dirty):
            value = evaluate(self._exprs[addr], resolver)
            if self.values.get(addr) != value:
                self.values[addr] = value
                updates.append((addr, value))
        return updates

    def full_recompute(self, sheet) -> list[tuple[CellAddress, EvalValue]]:
        """Evaluate every formula from scratch (load-time bootstrap)."""
        self.values.clear()
        return self.recompute(sheet, set(self._exprs))

    @classmethod
    def from_sheet(cls, sheet: Sheet) -> "DependencyGraph":
        from gridstore.formula.parser import parse_formula

        graph = cls()
        for addr, content in sheet.cells.items():
            if isinstance(content, Formula):
                expr = content.expr
                if expr is None:
                    expr = parse_formula(content.source)
                graph.add_formula(addr, expr)
        graph.full_recompute(sheet)
        return graph
