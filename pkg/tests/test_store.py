import json
import os
import random

import pytest

from gridstore.core import (
    Boolean,
    CellAddress,
    Formula,
    Number,
    Region,
    Text,
)
from gridstore.costmodel import pg_params, unit_params
from gridstore.engine import Workbook
from gridstore.formula import parse_formula
from gridstore.store import DirectoryLock, StoreError, load, save
from gridstore.store.crc32c import crc32c
from gridstore.store.payload import decode_cell, encode_cell


def test_crc32c_check_value():
    assert crc32c(b"123456789") == 0xE3069283
    assert crc32c(b"") == 0
    data = bytes(range(256)) * 33
    assert crc32c(data) == crc32c(data[:100]) ^ crc32c(data[:100]) ^ crc32c(data)


def test_cell_encoding_roundtrip():
    cases = [
        Number(1.5),
        Number(0.1),
        Number(-2.5e300),
        Text("plain"),
        Text("tab\tnl\nback\\slash"),
        Boolean(True),
        Boolean(False),
        Formula("=SUM(A1:B2)+1", None),
    ]
    for content in cases:
        decoded = decode_cell(encode_cell(content))
        assert decoded == content
    from gridstore.core import EMPTY

    assert encode_cell(EMPTY) == "" and decode_cell("") is EMPTY


def _random_workbook(seed: int) -> Workbook:
    rng = random.Random(seed)
    wb = Workbook()
    for s in range(rng.randint(1, 2)):
        sheet = wb.create_sheet(f"sheet{s}", rows=rng.randint(8, 25), cols=rng.randint(4, 10))
        for _ in range(rng.randint(5, 60)):
            addr = CellAddress(rng.randint(1, sheet.rows), rng.randint(1, sheet.cols))
            kind = rng.random()
            if kind < 0.6:
                sheet.update_cell(addr, Number(rng.uniform(-1e6, 1e6)))
            elif kind < 0.8:
                sheet.update_cell(addr, Text(f"v{rng.randint(0, 999)}\t -- \\ x"))
            else:
                sheet.update_cell(addr, Boolean(rng.random() < 0.5))
        # a couple of formulas over the low rows
        for _ in range(rng.randint(0, 3)):
            row = rng.randint(max(1, sheet.rows - 3), sheet.rows)
            col = rng.randint(1, sheet.cols)
            if CellAddress(row, col) in dict(sheet.iter_filled()):
                continue
            hi = max(1, sheet.rows - 4)
            src = f"=SUM(A1:A{hi})+{row}"
            try:
                sheet.update_cell(CellAddress(row, col), Formula(src, parse_formula(src)))
            except Exception:
                pass
        if rng.random() < 0.5:
            sheet.optimize_layout(rng.choice(["aggressive", "greedy", "dp"]), unit_params())
        if rng.random() < 0.4 and sheet.rows >= 6 and sheet.cols >= 3:
            top = rng.randint(1, sheet.rows - 3)
            region = Region(top, 1, top + 2, 3)
            for c in range(1, 4):
                sheet.update_cell(CellAddress(top, c), Text(f"attr{c}"))
            try:
                sheet.link_table(region, f"table{s}_{seed}")
            except Exception:
                pass
    return wb


def _assert_same(wb_a: Workbook, wb_b: Workbook) -> None:
    assert sorted(wb_a.sheets) == sorted(wb_b.sheets)
    for name in wb_a.sheets:
        a, b = wb_a.sheets[name], wb_b.sheets[name]
        assert (a.rows, a.cols) == (b.rows, b.cols)
        if a.rows == 0 or a.cols == 0:
            continue
        region = Region(1, 1, a.rows, a.cols)
        assert a.get_cells(region) == b.get_cells(region)
        assert a.get_values(region) == b.get_values(region)
    assert sorted(wb_a.linked_tables) == sorted(wb_b.linked_tables)
    for name in wb_a.linked_tables:
        ta, tb = wb_a.linked_tables[name], wb_b.linked_tables[name]
        assert ta.attrs == tb.attrs and ta.records == tb.records


def test_roundtrip_random_workbooks(tmp_path):
    for seed in range(8):
        directory = str(tmp_path / f"wb{seed}")
        wb = _random_workbook(seed)
        save(wb, directory)
        loaded = load(directory)
        _assert_same(wb, loaded)


def test_double_save_byte_identical(tmp_path):
    d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
    wb = _random_workbook(99)
    save(wb, d1)
    again = load(d1)
    save(again, d2)
    files1 = sorted(f for f in os.listdir(d1) if f != "lock")
    files2 = sorted(f for f in os.listdir(d2) if f != "lock")
    assert files1 == files2
    for name in files1:
        with open(os.path.join(d1, name), "rb") as fh:
            b1 = fh.read()
        with open(os.path.join(d2, name), "rb") as fh:
            b2 = fh.read()
        assert b1 == b2, name


def test_empty_workbook_saves_manifest_only(tmp_path):
    directory = str(tmp_path / "empty")
    save(Workbook(), directory)
    files = [f for f in os.listdir(directory) if f != "lock"]
    assert files == ["manifest.json"]
    assert load(directory).sheets == {}


def test_corruption_detected_with_filename(tmp_path):
    directory = str(tmp_path / "wb")
    wb = _random_workbook(3)
    save(wb, directory)
    victim = next(f for f in os.listdir(directory) if f.endswith(".rcv"))
    path = os.path.join(directory, victim)
    data = bytearray(open(path, "rb").read())
    data[len(data) // 2] ^= 0x01
    open(path, "wb").write(bytes(data))
    with pytest.raises(StoreError) as err:
        load(directory)
    assert victim in str(err.value)


def test_dangling_payload_reference(tmp_path):
    directory = str(tmp_path / "wb")
    wb = Workbook()
    sheet = wb.create_sheet("s", rows=4, cols=4)
    sheet.update_cell(CellAddress(1, 1), Number(1.0))
    save(wb, directory)
    os.unlink(os.path.join(directory, "s-rcv.rcv"))
    with pytest.raises(StoreError) as err:
        load(directory)
    assert "missing payload" in str(err.value)


def test_version_mismatch(tmp_path):
    directory = str(tmp_path / "wb")
    save(Workbook(), directory)
    manifest_path = os.path.join(directory, "manifest.json")
    manifest = json.loads(open(manifest_path).read())
    manifest["format"] = 999
    open(manifest_path, "w").write(json.dumps(manifest))
    with pytest.raises(StoreError) as err:
        load(directory)
    assert "version" in str(err.value)


def test_directory_lock_excludes(tmp_path):
    directory = str(tmp_path / "wb")
    os.makedirs(directory)
    with DirectoryLock(directory):
        with pytest.raises(StoreError):
            save(Workbook(), directory)


def test_formula_bytes_roundtrip(tmp_path):
    directory = str(tmp_path / "wb")
    wb = Workbook()
    sheet = wb.create_sheet("s", rows=10, cols=5)
    sheet.update_cell(CellAddress(1, 1), Number(2.0))
    src = "=A1*3+SUM(B1:B4)"
    sheet.update_cell(CellAddress(5, 1), Formula(src, parse_formula(src)))
    save(wb, directory)
    loaded = load(directory)
    content = loaded.sheets["s"].get_cells(Region(5, 1, 5, 1))[0][0]
    assert isinstance(content, Formula) and content.source == src
