"""Table payload files: tab-separated, one tuple per line, LF, UTF-8.

Cell encodings: ``n:`` decimal number, ``s:`` escaped text, ``b:0`` / ``b:1``
boolean, ``f:`` formula source. An absent (empty-string) field is an empty
cell. Backslash escapes cover tab, LF, and backslash; numbers use repr()
so doubles round-trip bit-exactly.
"""

from __future__ import annotations

from gridstore.core import EMPTY, Boolean, CellContent, Formula, Number, Text


class PayloadError(ValueError):
    pass


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 1
            if i >= len(text):
                raise PayloadError("dangling escape")
            nxt = text[i]
            if nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "\\":
                out.append("\\")
            else:
                raise PayloadError(f"unknown escape \\{nxt}")
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def encode_cell(content: CellContent) -> str:
    if content is EMPTY:
        return ""
    if isinstance(content, Number):
        return "n:" + repr(content.value)
    if isinstance(content, Text):
        return "s:" + _escape(content.value)
    if isinstance(content, Boolean):
        return "b:1" if content.value else "b:0"
    if isinstance(content, Formula):
        return "f:" + _escape(content.source)
    raise PayloadError(f"cannot encode {content!r}")


def decode_cell(field: str) -> CellContent:
    if field == "":
        return EMPTY
    tag, _, body = field.partition(":")
    if tag == "n":
        return Number(float(body))
    if tag == "s":
        return Text(_unescape(body))
    if tag == "b":
        if body not in ("0", "1"):
            raise PayloadError(f"bad boolean {field!r}")
        return Boolean(body == "1")
    if tag == "f":
        return Formula(_unescape(body), None)
    raise PayloadError(f"unknown cell tag {field!r}")


def encode_rom(col_ids: list[int], rows: list[tuple[int, list[CellContent]]]) -> bytes:
    lines = ["ROM\t" + "\t".join(str(c) for c in col_ids)]
    for rid, cells in rows:
        lines.append(str(rid) + "\t" + "\t".join(encode_cell(c) for c in cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def encode_com(row_ids: list[int], cols: list[tuple[int, list[CellContent]]]) -> bytes:
    lines = ["COM\t" + "\t".join(str(r) for r in row_ids)]
    for cid, cells in cols:
        lines.append(str(cid) + "\t" + "\t".join(encode_cell(c) for c in cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def encode_rcv(cells: list[tuple[int, int, CellContent]]) -> bytes:
    lines = ["RCV"]
    for rid, cid, content in cells:
        lines.append(f"{rid}\t{cid}\t{encode_cell(content)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def encode_tom(attrs: list[str], records: list[list[CellContent]]) -> bytes:
    lines = ["TOM\t" + "\t".join(_escape(a) for a in attrs)]
    for record in records:
        lines.append("\t".join(encode_cell(c) for c in record))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _split_lines(data: bytes, expect: str) -> tuple[list[str], list[str]]:
    text = data.decode("utf-8")
    if not text.endswith("\n"):
        raise PayloadError("payload must end with a newline")
    lines = text[:-1].split("\n")
    header = lines[0].split("\t")
    if header[0] != expect:
        raise PayloadError(f"expected {expect} payload, found {header[0]!r}")
    return header[1:], lines[1:]


def decode_rom(data: bytes) -> tuple[list[int], list[tuple[int, list[CellContent]]]]:
    header, lines = _split_lines(data, "ROM")
    col_ids = [int(c) for c in header]
    rows = []
    for line in lines:
        fields = line.split("\t")
        if len(fields) != len(col_ids) + 1:
            raise PayloadError(f"ROM row has {len(fields) - 1} fields, want {len(col_ids)}")
        rows.append((int(fields[0]), [decode_cell(f) for f in fields[1:]]))
    return col_ids, rows


def decode_com(data: bytes) -> tuple[list[int], list[tuple[int, list[CellContent]]]]:
    header, lines = _split_lines(data, "COM")
    row_ids = [int(r) for r in header]
    cols = []
    for line in lines:
        fields = line.split("\t")
        if len(fields) != len(row_ids) + 1:
            raise PayloadError(f"COM column has {len(fields) - 1} fields, want {len(row_ids)}")
        cols.append((int(fields[0]), [decode_cell(f) for f in fields[1:]]))
    return row_ids, cols


def decode_rcv(data: bytes) -> list[tuple[int, int, CellContent]]:
    _, lines = _split_lines(data, "RCV")
    cells = []
    for line in lines:
        fields = line.split("\t")
        if len(fields) != 3:
            raise PayloadError("RCV tuple must be rowId, colId, cell")
        cells.append((int(fields[0]), int(fields[1]), decode_cell(fields[2])))
    return cells


def decode_tom(data: bytes) -> tuple[list[str], list[list[CellContent]]]:
    header, lines = _split_lines(data, "TOM")
    attrs = [_unescape(a) for a in header]
    records = []
    for line in lines:
        fields = line.split("\t")
        if len(fields) != len(attrs):
            raise PayloadError(f"TOM record has {len(fields)} fields, want {len(attrs)}")
        records.append([decode_cell(f) for f in fields])
    return attrs, records
