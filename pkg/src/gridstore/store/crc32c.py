"""CRC-32C (Castagnoli), table-driven with slicing-by-8.

Pure Python; throughput is plenty for manifest payload checksums.
Check value: crc32c(b"123456789") == 0xE3069283.
"""

from __future__ import annotations

_POLY = 0x82F63B78  # reflected 0x1EDC6F41


def _build_tables() -> list[list[int]]:
    base = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ _POLY if crc & 1 else crc >> 1
        base.append(crc)
    tables = [base]
    for t in range(1, 8):
        prev = tables[t - 1]
        tables.append([(prev[i] >> 8) ^ base[prev[i] & 0xFF] for i in range(256)])
    return tables


_TABLES = _build_tables()
_T0, _T1, _T2, _T3, _T4, _T5, _T6, _T7 = _TABLES


def crc32c(data: bytes, crc: int = 0) -> int:
    crc ^= 0xFFFFFFFF
    view = memoryview(data)
    n = len(view)
    i = 0
    while n - i >= 8:
        b0, b1, b2, b3, b4, b5, b6, b7 = view[i : i + 8]
        crc ^= b0 | (b1 << 8) | (b2 << 16) | (b3 << 24)
        crc = (
            _T7[crc & 0xFF]
            ^ _T6[(crc >> 8) & 0xFF]
            ^ _T5[(crc >> 16) & 0xFF]
            ^ _T4[(crc >> 24) & 0xFF]
            ^ _T3[b4]
            ^ _T2[b5]
            ^ _T1[b6]
            ^ _T0[b7]
        )
        i += 8
    while i < n:
        crc = (crc >> 8) ^ _T0[(crc ^ view[i]) & 0xFF]
        i += 1
    return crc ^ 0xFFFFFFFF
