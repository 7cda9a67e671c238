"""gridstore: a hybrid storage engine for sparse spreadsheet grids.

A sheet is decomposed into a cost-optimal collection of row-oriented (ROM),
column-oriented (COM), key-value (RCV), and linked (TOM) tables, with
order-statistic positional maps providing scroll/edit/insert/delete access
that never renumbers stored data.
"""

from gridstore.core import (
    EMPTY,
    Boolean,
    CellAddress,
    CellContent,
    Formula,
    Number,
    Region,
    Sheet,
    Text,
    format_a1,
    parse_a1,
)

__all__ = [
    "EMPTY",
    "Boolean",
    "CellAddress",
    "CellContent",
    "Formula",
    "Number",
    "Region",
    "Sheet",
    "Text",
    "format_a1",
    "parse_a1",
]

__version__ = "0.1.0"
