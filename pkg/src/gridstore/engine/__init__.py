"""The data presentation manager: binds sheets, decompositions, positional
maps, formula recomputation, linked tables, and relational operators."""

from gridstore.engine.relational import (
    SchemaError,
    TableValue,
    crossproduct,
    difference,
    filter_rows,
    index_into,
    intersection,
    join,
    project,
    rename,
    union,
)
from gridstore.engine.workbook import EngineError, SheetEngine, Workbook

__all__ = [
    "EngineError",
    "SchemaError",
    "SheetEngine",
    "TableValue",
    "Workbook",
    "crossproduct",
    "difference",
    "filter_rows",
    "index_into",
    "intersection",
    "join",
    "project",
    "rename",
    "union",
]
