"""Conceptual data model: cells, addresses, regions, sheets, A1 notation.

Rows and columns are 1-based everywhere; conversions to 0-based indexing
happen only inside algorithm internals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Union

DEFAULT_MAX_ROWS = 2**31 - 1
DEFAULT_MAX_COLS = 2**20


class A1Error(ValueError):
    """Raised for malformed A1 references."""


class ExtentError(ValueError):
    """Raised when an address falls beyond a sheet's configured maxima."""


class CellAddress(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True, order=True)
class Region:
    """Inclusive rectangular cell range."""

    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self) -> None:
        if self.top < 1 or self.left < 1:
            raise ValueError(f"region bounds must be >= 1: {self}")
        if self.top > self.bottom or self.left > self.right:
            raise ValueError(f"inverted region bounds: {self}")

    @property
    def row_count(self) -> int:
        return self.bottom - self.top + 1

    @property
    def col_count(self) -> int:
        return self.right - self.left + 1

    @property
    def area(self) -> int:
        return self.row_count * self.col_count

    def contains(self, addr: CellAddress) -> bool:
        return self.top <= addr.row <= self.bottom and self.left <= addr.col <= self.right

    def contains_region(self, other: "Region") -> bool:
        return (
            self.top <= other.top
            and self.left <= other.left
            and self.bottom >= other.bottom
            and self.right >= other.right
        )

    def intersect(self, other: "Region") -> "Region | None":
        top = max(self.top, other.top)
        left = max(self.left, other.left)
        bottom = min(self.bottom, other.bottom)
        right = min(self.right, other.right)
        if top > bottom or left > right:
            return None
        return Region(top, left, bottom, right)

    def overlaps(self, other: "Region") -> bool:
        return not (
            self.bottom < other.top
            or other.bottom < self.top
            or self.right < other.left
            or other.right < self.left
        )

    def cells(self) -> Iterator[CellAddress]:
        for r in range(self.top, self.bottom + 1):
            for c in range(self.left, self.right + 1):
                yield CellAddress(r, c)

    def to_a1(self) -> str:
        if (self.top, self.left) == (self.bottom, self.right):
            return format_a1(CellAddress(self.top, self.left))
        return (
            format_a1(CellAddress(self.top, self.left))
            + ":"
            + format_a1(CellAddress(self.bottom, self.right))
        )


# --- cell contents ---------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Boolean:
    value: bool


@dataclass(frozen=True)
class Formula:
    """A formula cell: the source text (with leading '=') plus its parse.

    ``expr`` is an expression tree produced by :mod:`gridstore.formula`; it is
    kept opaque here so the core model has no parser dependency.
    """

    source: str
    expr: object = field(compare=False, hash=False, default=None)


class _Empty:
    _instance = None

    def __new__(cls) -> "_Empty":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = _Empty()

CellContent = Union[Number, Text, Boolean, Formula, _Empty]


@dataclass(frozen=True)
class ErrorValue:
    """A computed error value (``#DIV/0!``, ``#REF!``, ...).

    Error values arise from evaluation only; they are never stored as cell
    content.
    """

    code: str

    def __str__(self) -> str:
        return self.code


DIV0 = ErrorValue("#DIV/0!")
REF_ERROR = ErrorValue("#REF!")
VALUE_ERROR = ErrorValue("#VALUE!")
NUM_ERROR = ErrorValue("#NUM!")


# --- A1 notation -----------------------------------------------------------

_A1_RE = re.compile(r"\$?([A-Za-z]+)\$?([0-9]+)$")


def col_to_letters(col: int) -> str:
    """1 -> A, 26 -> Z, 27 -> AA (bijective base 26)."""
    if col < 1:
        raise A1Error(f"column index must be >= 1, got {col}")
    out = []
    while col:
        col, rem = divmod(col - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def letters_to_col(letters: str) -> int:
    col = 0
    for ch in letters:
        col = col * 26 + (ord(ch.upper()) - ord("A") + 1)
    return col


def parse_a1(ref: str) -> CellAddress:
    """Parse a single A1 reference ("B2" -> row 2, col 2). ``$`` anchors are
    accepted and ignored."""
    m = _A1_RE.match(ref.strip())
    if not m:
        raise A1Error(f"malformed A1 reference: {ref!r}")
    row = int(m.group(2))
    if row < 1:
        raise A1Error(f"row must be >= 1 in reference: {ref!r}")
    return CellAddress(row, letters_to_col(m.group(1)))


def format_a1(addr: CellAddress) -> str:
    return f"{col_to_letters(addr.col)}{addr.row}"


def parse_a1_region(ref: str) -> Region:
    """Parse "A1:B2" (or a single "A1") into a normalized Region."""
    parts = ref.split(":")
    if len(parts) == 1:
        a = parse_a1(parts[0])
        return Region(a.row, a.col, a.row, a.col)
    if len(parts) != 2:
        raise A1Error(f"malformed range reference: {ref!r}")
    a, b = parse_a1(parts[0]), parse_a1(parts[1])
    return Region(min(a.row, b.row), min(a.col, b.col), max(a.row, b.row), max(a.col, b.col))


# --- sheet -----------------------------------------------------------------

class Sheet:
    """Sparse grid of cells. Empty content is never stored."""

    def __init__(
        self,
        rows: int = 1000,
        cols: int = 26,
        max_rows: int = DEFAULT_MAX_ROWS,
        max_cols: int = DEFAULT_MAX_COLS,
    ) -> None:
        if rows < 1 or cols < 1:
            raise ValueError("declared extents must be >= 1")
        if rows > max_rows or cols > max_cols:
            raise ExtentError(f"declared extents {rows}x{cols} exceed maxima")
        self.cells: dict[CellAddress, CellContent] = {}
        self.rows = rows
        self.cols = cols
        self.max_rows = max_rows
        self.max_cols = max_cols

    def get(self, addr: CellAddress) -> CellContent:
        return self.cells.get(addr, EMPTY)

    def set(self, addr: CellAddress, content: CellContent) -> None:
        """Set a cell; EMPTY removes the entry. Extents grow on demand up to
        the configured maxima."""
        addr = CellAddress(*addr)
        if addr.row < 1 or addr.col < 1:
            raise ValueError(f"address out of range: {addr}")
        if addr.row > self.max_rows or addr.col > self.max_cols:
            raise ExtentError(f"address {addr} beyond configured maxima")
        if content is EMPTY:
            self.cells.pop(addr, None)
            return
        self.rows = max(self.rows, addr.row)
        self.cols = max(self.cols, addr.col)
        self.cells[addr] = content

    def filled_count(self) -> int:
        return len(self.cells)

    def bounding_box(self) -> Region | None:
        """Smallest region containing every non-empty cell; None if empty."""
        if not self.cells:
            return None
        rows = [a.row for a in self.cells]
        cols = [a.col for a in self.cells]
        return Region(min(rows), min(cols), max(rows), max(cols))

    def filled_in(self, region: Region) -> Iterator[tuple[CellAddress, CellContent]]:
        """Iterate stored cells inside ``region``.

        Scans whichever is smaller: the region or the stored-cell set.
        """
        if region.area <= len(self.cells):
            for addr in region.cells():
                content = self.cells.get(addr)
                if content is not None:
                    yield addr, content
        else:
            for addr, content in self.cells.items():
                if region.contains(addr):
                    yield addr, content

    def copy(self) -> "Sheet":
        dup = Sheet(self.rows, self.cols, self.max_rows, self.max_cols)
        dup.cells = dict(self.cells)
        return dup


@dataclass
class OccupancyMask:
    """Structure-only sheet stand-in: which cells are filled.

    Input format for the optimizer oracles and the CLI ``import --mask``
    command.
    """

    rows: int
    cols: int
    filled: frozenset[CellAddress]

    def __post_init__(self) -> None:
        for addr in self.filled:
            if not (1 <= addr.row <= self.rows and 1 <= addr.col <= self.cols):
                raise ValueError(f"mask cell {addr} outside {self.rows}x{self.cols}")

    @classmethod
    def from_text(cls, text: str) -> "OccupancyMask":
        """Parse a text grid of '1' (filled) and '0'/'.' (empty)."""
        lines = [ln for ln in (l.strip() for l in text.splitlines()) if ln]
        if not lines:
            return cls(1, 1, frozenset())
        cols = max(len(ln) for ln in lines)
        filled = set()
        for r, ln in enumerate(lines, start=1):
            for c, ch in enumerate(ln, start=1):
                if ch == "1":
                    filled.add(CellAddress(r, c))
                elif ch not in "0.":
                    raise ValueError(f"bad mask character {ch!r} at row {r}")
        return cls(len(lines), cols, frozenset(filled))

    def to_sheet(self, fill: CellContent | None = None) -> Sheet:
        sheet = Sheet(rows=self.rows, cols=self.cols)
        value = fill if fill is not None else Number(1.0)
        for addr in self.filled:
            sheet.set(addr, value)
        return sheet
