"""Identifier-order serialization: zigzag delta varints.

The in-order identifier sequence is the only thing persisted; tree topology
is rebuilt on load via bulk build.
"""

from __future__ import annotations

from typing import Iterable


def _zigzag(value: int) -> int:
    return (value << 1) if value >= 0 else ((-value) << 1) - 1


def _unzigzag(value: int) -> int:
    return (value >> 1) if value & 1 == 0 else -((value + 1) >> 1)


def encode_ids(ids: Iterable[int]) -> bytes:
    out = bytearray()
    prev = 0
    for ident in ids:
        delta = _zigzag(ident - prev)
        prev = ident
        while True:
            byte = delta & 0x7F
            delta >>= 7
            if delta:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
    return bytes(out)


def decode_ids(data: bytes) -> list[int]:
    ids: list[int] = []
    prev = 0
    value = 0
    shift = 0
    for byte in data:
        value |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
            continue
        prev += _unzigzag(value)
        ids.append(prev)
        value = 0
        shift = 0
    if shift:
        raise ValueError("truncated varint stream")
    return ids
