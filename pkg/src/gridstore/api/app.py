"""FastAPI application over a Workbook.

Mutations serialize per sheet behind a lock; every response carries the
sheet revision. Clients may send If-Match with a revision to detect lost
updates (409 on mismatch). Window reads are consistent snapshots taken
under the same lock.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from gridstore.core import (
    EMPTY,
    Boolean,
    CellAddress,
    CellContent,
    ErrorValue,
    Formula,
    Number,
    Region,
    Text,
    parse_a1,
    parse_a1_region,
    A1Error,
)
from gridstore.costmodel import pg_params, ideal_params
from gridstore.engine import EngineError, Workbook
from gridstore.formula import CycleError, FormulaError, parse_formula


class SheetCreate(BaseModel):
    name: str
    rows: int | None = None
    cols: int | None = None


class CellPut(BaseModel):
    content: str | float | bool | None


class RowInsert(BaseModel):
    after: int


class LinkRequest(BaseModel):
    range: str
    table: str


class OptimizeRequest(BaseModel):
    algorithm: str = "aggressive"
    eta: float | None = None
    params: str = "pg"


def _parse_content(raw: str | float | bool | None) -> CellContent:
    if raw is None or raw == "":
        return EMPTY
    if isinstance(raw, bool):
        return Boolean(raw)
    if isinstance(raw, (int, float)):
        return Number(float(raw))
    text = raw
    if text.startswith("="):
        return Formula(text, parse_formula(text))
    try:
        return Number(float(text))
    except ValueError:
        pass
    if text.upper() in ("TRUE", "FALSE"):
        return Boolean(text.upper() == "TRUE")
    return Text(text)


def _display(value) -> str:
    if value is EMPTY or value is None:
        return ""
    if isinstance(value, Number):
        v = value.value
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    if isinstance(value, Text):
        return value.value
    if isinstance(value, Boolean):
        return "TRUE" if value.value else "FALSE"
    if isinstance(value, ErrorValue):
        return value.code
    if isinstance(value, Formula):
        return value.source
    return str(value)


def _json_value(value):
    if value is EMPTY or value is None:
        return None
    if isinstance(value, Number):
        return value.value
    if isinstance(value, Text):
        return value.value
    if isinstance(value, Boolean):
        return value.value
    if isinstance(value, ErrorValue):
        return {"error": value.code}
    if isinstance(value, Formula):
        return value.source
    return str(value)


def create_app(workbook: Workbook, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="gridstore", version="0.1.0")
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def sheet_lock(name: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(name, threading.Lock())

    def get_sheet(name: str):
        try:
            return workbook.sheet(name)
        except EngineError:
            raise HTTPException(status_code=404, detail=f"unknown sheet {name!r}")

    @contextmanager
    def mutating(name: str, if_match: str | None):
        sheet = get_sheet(name)
        with sheet_lock(name):
            if if_match is not None and str(sheet.revision) != if_match:
                raise HTTPException(
                    status_code=409,
                    detail=f"revision mismatch: sheet is at {sheet.revision}",
                )
            yield sheet

    @app.exception_handler(EngineError)
    async def engine_error(_req: Request, err: EngineError):
        return JSONResponse(status_code=422, content={"detail": str(err)})

    @app.exception_handler(CycleError)
    async def cycle_error(_req: Request, err: CycleError):
        return JSONResponse(status_code=422, content={"detail": str(err)})

    @app.exception_handler(FormulaError)
    async def formula_error(_req: Request, err: FormulaError):
        return JSONResponse(status_code=400, content={"detail": str(err)})

    @app.exception_handler(A1Error)
    async def a1_error(_req: Request, err: A1Error):
        return JSONResponse(status_code=400, content={"detail": str(err)})

    @app.get("/sheets")
    def list_sheets():
        return [
            {
                "name": name,
                "rows": sheet.rows,
                "cols": sheet.cols,
                "revision": sheet.revision,
            }
            for name, sheet in sorted(workbook.sheets.items())
        ]

    @app.post("/sheets", status_code=201)
    def create_sheet(body: SheetCreate):
        with locks_guard:
            if body.name in workbook.sheets:
                raise HTTPException(status_code=422, detail="sheet exists")
        sheet = workbook.create_sheet(
            body.name, rows=body.rows or 1000, cols=body.cols or 26
        )
        return {"name": body.name, "rows": sheet.rows, "cols": sheet.cols, "revision": 0}

    @app.get("/sheets/{name}/window")
    def window(name: str, top: int = 1, left: int = 1, rows: int = 50, cols: int = 20):
        sheet = get_sheet(name)
        with sheet_lock(name):
            if min(top, left) < 1 or min(rows, cols) < 1:
                raise HTTPException(status_code=400, detail="window must be positive")
            top = min(top, sheet.rows)
            left = min(left, sheet.cols)
            bottom = min(top + rows - 1, sheet.rows)
            right = min(left + cols - 1, sheet.cols)
            region = Region(top, left, bottom, right)
            contents = sheet.get_cells(region)
            values = sheet.get_values(region)
            grid = []
            for r in range(region.row_count):
                row = []
                for c in range(region.col_count):
                    content = contents[r][c]
                    value = values[r][c]
                    cell = {
                        "value": _json_value(value),
                        "display": _display(value),
                    }
                    if isinstance(content, Formula):
                        cell["formula"] = content.source
                    row.append(cell)
                grid.append(row)
            overlay = [
                {**e.to_json()}
                for e in sheet.current_decomposition().entries
                if e.region.overlaps(region)
            ]
            return {
                "top": region.top,
                "left": region.left,
                "rows": region.row_count,
                "cols": region.col_count,
                "cells": grid,
                "sheet_rows": sheet.rows,
                "sheet_cols": sheet.cols,
                "decomposition": overlay,
                "revision": sheet.revision,
            }

    @app.put("/sheets/{name}/cells/{ref}")
    def put_cell(
        name: str, ref: str, body: CellPut, if_match: str | None = Header(default=None)
    ):
        addr = parse_a1(ref)
        content = _parse_content(body.content)
        with mutating(name, if_match) as sheet:
            changes = sheet.update_cell(addr, content)
            return {
                "changed": [
                    {"ref": f"{_a1(a)}", "value": _json_value(v), "display": _display(v)}
                    for a, v in changes
                ],
                "revision": sheet.revision,
            }

    @app.post("/sheets/{name}/rows")
    def insert_row(name: str, body: RowInsert, if_match: str | None = Header(default=None)):
        with mutating(name, if_match) as sheet:
            sheet.insert_row_after(body.after)
            return {"rows": sheet.rows, "revision": sheet.revision}

    @app.delete("/sheets/{name}/rows/{row}")
    def delete_row(name: str, row: int, if_match: str | None = Header(default=None)):
        with mutating(name, if_match) as sheet:
            sheet.delete_row(row)
            return {"rows": sheet.rows, "revision": sheet.revision}

    @app.post("/sheets/{name}/columns")
    def insert_column(name: str, body: RowInsert, if_match: str | None = Header(default=None)):
        with mutating(name, if_match) as sheet:
            sheet.insert_column_after(body.after)
            return {"cols": sheet.cols, "revision": sheet.revision}

    @app.delete("/sheets/{name}/columns/{col}")
    def delete_column(name: str, col: int, if_match: str | None = Header(default=None)):
        with mutating(name, if_match) as sheet:
            sheet.delete_column(col)
            return {"cols": sheet.cols, "revision": sheet.revision}

    @app.post("/sheets/{name}/link")
    def link(name: str, body: LinkRequest, if_match: str | None = Header(default=None)):
        region = parse_a1_region(body.range)
        with mutating(name, if_match) as sheet:
            table = sheet.link_table(region, body.table)
            return {
                "table": table.name,
                "attrs": table.attrs,
                "records": len(table.records),
                "revision": sheet.revision,
            }

    @app.post("/sheets/{name}/optimize")
    def optimize(name: str, body: OptimizeRequest, if_match: str | None = Header(default=None)):
        params = ideal_params() if body.params == "ideal" else pg_params()
        with mutating(name, if_match) as sheet:
            decomp, migrated = sheet.optimize_layout(
                body.algorithm, params, eta=body.eta
            )
            summary = decomp.to_json()
            summary["migrated_cells"] = migrated
            summary["revision"] = sheet.revision
            return summary

    @app.get("/sheets/{name}/stats")
    def stats(name: str):
        from gridstore.analyzer import connected_components, corpus_stats

        sheet = get_sheet(name)
        with sheet_lock(name):
            plain = sheet.to_sheet()
            stats_result = corpus_stats([(name, plain)])
            per_sheet = stats_result.sheets[0]
            components = connected_components(plain)
            return {
                "filled": per_sheet.filled,
                "formulas": per_sheet.formulas,
                "density": per_sheet.density,
                "tabular_coverage": per_sheet.tabular_coverage,
                "cells_per_formula": per_sheet.cells_per_formula,
                "regions_per_formula": per_sheet.regions_per_formula,
                "components": len(components),
                "tabular_regions": sum(1 for c in components if c.is_tabular),
                "revision": sheet.revision,
            }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")

    return app


def _a1(addr: CellAddress) -> str:
    from gridstore.core import format_a1

    return format_a1(addr)
