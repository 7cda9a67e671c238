"""File-backed persistence: a JSON manifest plus per-table payload files.

Writes are atomic (temp file, fsync, rename; manifest renamed last) and
serialization is canonical, so saving a freshly loaded workbook reproduces
the payload bytes exactly. Payloads carry CRC-32C checksums in the manifest.
"""

from __future__ import annotations

import base64
import json
import os

from gridstore.core import CellAddress, Formula
from gridstore.costmodel import ModelKind
from gridstore.decomposer import Decomposition
from gridstore.engine.tables import ComTable, RcvTable, RomTable, TomTable
from gridstore.engine.workbook import FormulaCell, LiveEntry, SheetEngine, Workbook
from gridstore.formula.parser import parse_formula
from gridstore.posmap import HierarchicalMap, decode_ids, encode_ids
from gridstore.store import payload as payload_codec
from gridstore.store.crc32c import crc32c

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
LOCK_NAME = "lock"


class StoreError(ValueError):
    pass


class DirectoryLock:
    """Exclusive per-directory lock; save/load never run concurrently."""

    def __init__(self, directory: str) -> None:
        self.path = os.path.join(directory, LOCK_NAME)
        self._fd: int | None = None

    def __enter__(self) -> "DirectoryLock":
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError(f"workbook directory is locked: {self.path}") from None
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def __exit__(self, *exc) -> None:
        if self._fd is not None:
            os.close(self._fd)
            os.unlink(self.path)
            self._fd = None


def _write_atomic(directory: str, name: str, data: bytes) -> None:
    tmp = os.path.join(directory, f".tmp-{name}")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, os.path.join(directory, name))


def _fsync_dir(directory: str) -> None:
    fd = os.open(directory, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _public_content(content):
    return content.snapshot() if isinstance(content, FormulaCell) else content


def _sheet_payloads(sheet: SheetEngine) -> tuple[list[dict], dict[str, bytes], str]:
    """Entry descriptors plus payload bytes; tuples are ordered by display
    position so serialization is canonical."""
    row_pos = sheet._row_positions()
    col_pos = sheet._col_positions()
    entries: list[dict] = []
    payloads: dict[str, bytes] = {}
    seq = 0
    for entry in sheet.entries:
        descriptor = {
            "top": entry.region.top,
            "left": entry.region.left,
            "bottom": entry.region.bottom,
            "right": entry.region.right,
            "kind": entry.kind.name,
        }
        if entry.kind.name == "TOM":
            descriptor["table"] = entry.kind.table
            entries.append(descriptor)
            continue
        if entry.kind.name == "RCV":
            entries.append(descriptor)  # cells live in the overlay payload
            continue
        seq += 1
        filename = f"{_safe_name(sheet.name)}-{seq:04d}.{entry.kind.name.lower()}"
        descriptor["file"] = filename
        table = entry.table
        if entry.kind.name == "ROM":
            live_rows = sorted(
                (rid for rid in table.rows if rid not in sheet.dead_rows),
                key=lambda rid: row_pos[rid],
            )
            rows = [
                (rid, [_public_content(c) for c in table.rows[rid]]) for rid in live_rows
            ]
            payloads[filename] = payload_codec.encode_rom(table.col_ids, rows)
        else:
            live_cols = sorted(
                (cid for cid in table.cols if cid not in sheet.dead_cols),
                key=lambda cid: col_pos[cid],
            )
            cols = [
                (cid, [_public_content(c) for c in table.cols[cid]]) for cid in live_cols
            ]
            payloads[filename] = payload_codec.encode_com(table.row_ids, cols)
        entries.append(descriptor)
    overlay_name = f"{_safe_name(sheet.name)}-rcv.rcv"
    cells = sorted(
        (
            (rid, cid, _public_content(content))
            for rid, cid, content in sheet.overlay.iter_filled(sheet.dead_rows, sheet.dead_cols)
        ),
        key=lambda item: (row_pos[item[0]], col_pos[item[1]]),
    )
    payloads[overlay_name] = payload_codec.encode_rcv(cells)
    return entries, payloads, overlay_name


_SAFE = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-"


def _safe_name(name: str) -> str:
    return "".join(ch if ch in _SAFE else "_" for ch in name)


def save(workbook: Workbook, directory: str) -> None:
    """Persist the workbook; partial writes are never visible."""
    os.makedirs(directory, exist_ok=True)
    with DirectoryLock(directory):
        all_payloads: dict[str, bytes] = {}
        manifest: dict = {"format": FORMAT_VERSION, "sheets": {}, "tables": {}}
        for name, sheet in sorted(workbook.sheets.items()):
            entries, payloads, overlay_name = _sheet_payloads(sheet)
            all_payloads.update(payloads)
            # Dead ids never persist; posmap order is the live order.
            manifest["sheets"][name] = {
                "rows": sheet.rows,
                "cols": sheet.cols,
                "row_order": base64.b64encode(encode_ids(sheet.rows_map.to_ids())).decode(),
                "col_order": base64.b64encode(encode_ids(sheet.cols_map.to_ids())).decode(),
                "next_row_id": sheet._next_row_id,
                "next_col_id": sheet._next_col_id,
                "entries": entries,
                "overlay_file": overlay_name,
                "formula_cells": sorted([a.row, a.col] for a in sheet._formula_cells),
                "provenance": (
                    sheet.last_decomposition.provenance if sheet.last_decomposition else None
                ),
            }
        for name, table in sorted(workbook.linked_tables.items()):
            filename = f"table-{_safe_name(name)}.tom"
            all_payloads[filename] = payload_codec.encode_tom(table.attrs, table.records)
            manifest["tables"][name] = {"file": filename}
        manifest["checksums"] = {
            name: f"{crc32c(data):08x}" for name, data in sorted(all_payloads.items())
        }
        for name, data in all_payloads.items():
            _write_atomic(directory, name, data)
        manifest_bytes = (
            json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n"
        ).encode("utf-8")
        _write_atomic(directory, MANIFEST_NAME, manifest_bytes)
        _fsync_dir(directory)
        # Drop payloads from earlier saves that this manifest no longer uses.
        keep = set(all_payloads) | {MANIFEST_NAME, LOCK_NAME}
        for existing in os.listdir(directory):
            if existing not in keep and not existing.startswith(".tmp-"):
                if existing.endswith((".rom", ".com", ".rcv", ".tom")):
                    os.unlink(os.path.join(directory, existing))


def _read_payload(directory: str, name: str, checksums: dict[str, str]) -> bytes:
    path = os.path.join(directory, name)
    if not os.path.exists(path):
        raise StoreError(f"manifest references missing payload file: {name}")
    with open(path, "rb") as fh:
        data = fh.read()
    expect = checksums.get(name)
    if expect is None:
        raise StoreError(f"no checksum recorded for payload file: {name}")
    actual = f"{crc32c(data):08x}"
    if actual != expect:
        raise StoreError(f"checksum mismatch in {name}: expected {expect}, found {actual}")
    return data


def load(directory: str) -> Workbook:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise StoreError(f"no manifest in {directory}")
    with DirectoryLock(directory):
        with open(manifest_path, "rb") as fh:
            manifest = json.loads(fh.read().decode("utf-8"))
        if manifest.get("format") != FORMAT_VERSION:
            raise StoreError(
                f"unsupported format version {manifest.get('format')!r}; "
                f"this build reads version {FORMAT_VERSION}"
            )
        checksums = manifest.get("checksums", {})
        workbook = Workbook()
        for name, spec in manifest.get("tables", {}).items():
            attrs, records = payload_codec.decode_tom(
                _read_payload(directory, spec["file"], checksums)
            )
            workbook.linked_tables[name] = TomTable(name, attrs, records)
        for name, spec in sorted(manifest.get("sheets", {}).items()):
            sheet = _load_sheet(workbook, name, spec, directory, checksums)
            workbook.sheets[name] = sheet
        workbook.bound_dir = directory
    return workbook


def _load_sheet(
    workbook: Workbook, name: str, spec: dict, directory: str, checksums: dict[str, str]
) -> SheetEngine:
    from gridstore.costmodel import tom as tom_kind

    sheet = SheetEngine.__new__(SheetEngine)
    SheetEngine.__init__(sheet, workbook, name, rows=1, cols=1)
    row_ids = decode_ids(base64.b64decode(spec["row_order"]))
    col_ids = decode_ids(base64.b64decode(spec["col_order"]))
    if len(row_ids) != spec["rows"] or len(col_ids) != spec["cols"]:
        raise StoreError(f"sheet {name!r}: id order length disagrees with extents")
    sheet.rows_map = HierarchicalMap.from_ids(row_ids)
    sheet.cols_map = HierarchicalMap.from_ids(col_ids)
    sheet._next_row_id = spec["next_row_id"]
    sheet._next_col_id = spec["next_col_id"]
    seq = 0
    for descriptor in spec["entries"]:
        from gridstore.core import Region

        region = Region(
            descriptor["top"], descriptor["left"], descriptor["bottom"], descriptor["right"]
        )
        kind_name = descriptor["kind"]
        if kind_name == "TOM":
            table = workbook.linked_tables.get(descriptor["table"])
            if table is None:
                raise StoreError(
                    f"sheet {name!r} links to unknown table {descriptor['table']!r}"
                )
            sheet.entries.append(LiveEntry(region, tom_kind(descriptor["table"]), table))
            continue
        if kind_name == "RCV":
            sheet.entries.append(LiveEntry(region, ModelKind("RCV"), None))
            continue
        data = _read_payload(directory, descriptor["file"], checksums)
        seq += 1
        table_id = f"{name}!t{seq}"
        if kind_name == "ROM":
            col_id_list, rows = payload_codec.decode_rom(data)
            table = RomTable(table_id, col_id_list, sheet.stats)
            for rid, cells in rows:
                table.rows[rid] = cells
            sheet.entries.append(LiveEntry(region, ModelKind("ROM"), table))
        elif kind_name == "COM":
            row_id_list, cols = payload_codec.decode_com(data)
            table = ComTable(table_id, row_id_list, sheet.stats)
            for cid, cells in cols:
                table.cols[cid] = cells
            sheet.entries.append(LiveEntry(region, ModelKind("COM"), table))
        else:
            raise StoreError(f"unknown entry kind {kind_name!r} in sheet {name!r}")
    import itertools

    sheet._table_seq = itertools.count(seq + 1)
    overlay_cells = payload_codec.decode_rcv(
        _read_payload(directory, spec["overlay_file"], checksums)
    )
    for rid, cid, content in overlay_cells:
        sheet.overlay.set(rid, cid, content)
    sheet.stats.reset()
    # Rebind formulas: parse stored sources, rebuild the dependency graph,
    # recompute every value.
    formula_seeds = {CellAddress(r, c) for r, c in spec.get("formula_cells", [])}
    _rebind_formulas(sheet, formula_seeds)
    if spec.get("provenance"):
        sheet.last_decomposition = Decomposition(
            [], spec["provenance"], 0.0
        )
    fault = sheet.audit()
    if fault:
        raise StoreError(f"sheet {name!r} failed recoverability validation: {fault}")
    return sheet


def _rebind_formulas(sheet: SheetEngine, seeds: set[CellAddress]) -> None:
    found: set[CellAddress] = set()
    row_pos = sheet._row_positions()
    col_pos = sheet._col_positions()

    def visit(table) -> None:
        for rid, cid, content in list(table.iter_filled(set(), set())):
            if isinstance(content, Formula):
                addr = CellAddress(row_pos[rid], col_pos[cid])
                expr = parse_formula(content.source)
                cell = FormulaCell(expr, content.source)
                table.set(rid, cid, cell)
                sheet._formula_cells[addr] = cell
                found.add(addr)

    for entry in sheet.entries:
        if entry.kind.name in ("ROM", "COM"):
            visit(entry.table)
    visit(sheet.overlay)
    if found != seeds:
        raise StoreError(
            f"manifest formula seeds disagree with payload contents: "
            f"{sorted(seeds ^ found)}"
        )
    for addr, cell in sheet._formula_cells.items():
        sheet.graph.add_formula(addr, cell.expr)
    sheet.graph.full_recompute(sheet.resolver())
    sheet.stats.reset()
