import math
import random

import pytest

from gridstore.posmap import (
    DirectMap,
    HierarchicalMap,
    MonotonicMap,
    decode_ids,
    encode_ids,
)
from gridstore.posmap.hierarchical import _Internal


def fresh_maps():
    return [HierarchicalMap(order=8), DirectMap(), MonotonicMap(gap=8)]


def test_basic_insert_lookup():
    for m in fresh_maps():
        m.insert_at(1, 101)
        assert m.lookup(1) == 101
        m.insert_at(1, 202)
        assert m.to_ids() == [202, 101]
        assert m.lookup(2) == 101


def test_delete_examples():
    for m in fresh_maps():
        for i, ident in enumerate((1, 2, 3), start=1):
            m.insert_at(i, ident)
        assert m.delete_at(2) == 2
        assert m.lookup(2) == 3
        assert m.delete_at(1) == 1
        assert m.delete_at(1) == 3
        assert len(m) == 0


def test_lookup_range():
    for m in fresh_maps():
        for i, ident in enumerate((10, 20, 30, 40), start=1):
            m.insert_at(i, ident)
        assert m.lookup_range(2, 2) == [20, 30]
        assert m.lookup_range(1, 4) == [10, 20, 30, 40]
        assert m.lookup_range(4, 0) == []


def test_position_bounds():
    for m in fresh_maps():
        with pytest.raises(IndexError):
            m.lookup(1)
        m.insert_at(1, 7)
        with pytest.raises(IndexError):
            m.insert_at(3, 8)
        with pytest.raises(IndexError):
            m.delete_at(2)
        with pytest.raises(IndexError):
            m.lookup_range(1, 2)


def test_differential_vs_list_oracle():
    rng = random.Random(42)
    maps = [HierarchicalMap(order=8), DirectMap(), MonotonicMap(gap=4)]
    oracle: list[int] = []
    for step in range(30_000):
        roll = rng.random()
        n = len(oracle)
        if roll < 0.45 or n == 0:
            pos = rng.randint(1, n + 1)
            ident = rng.getrandbits(48)
            oracle.insert(pos - 1, ident)
            for m in maps:
                m.insert_at(pos, ident)
        elif roll < 0.7:
            pos = rng.randint(1, n)
            expect = oracle.pop(pos - 1)
            for m in maps:
                assert m.delete_at(pos) == expect
        elif roll < 0.9:
            pos = rng.randint(1, n)
            for m in maps:
                assert m.lookup(pos) == oracle[pos - 1]
        else:
            pos = rng.randint(1, n)
            count = rng.randint(0, min(25, n - pos + 1))
            for m in maps:
                assert m.lookup_range(pos, count) == oracle[pos - 1 : pos - 1 + count]
        if step % 5000 == 4999:
            for m in maps:
                assert m.check_invariants() is None, type(m).__name__
    for m in maps:
        assert m.to_ids() == oracle
        assert m.check_invariants() is None


def test_hierarchical_visit_bound():
    order = 8
    m = HierarchicalMap.from_ids(range(100_000), order=order)
    bound = math.ceil(math.log(len(m), math.ceil(order / 2))) + 1
    rng = random.Random(0)
    worst = 0
    for _ in range(500):
        m.lookup(rng.randint(1, len(m)))
        worst = max(worst, m.op_stats().node_visits)
        m.insert_at(rng.randint(1, len(m) + 1), 1)
        worst = max(worst, m.op_stats().node_visits)
        m.delete_at(rng.randint(1, len(m)))
        worst = max(worst, m.op_stats().node_visits)
    assert worst <= bound, (worst, bound)


def test_hierarchical_sequential_inserts_visit_bound():
    # 10^6 sequential appends at order 32: descent depth stays <= 5 (+1 slack)
    m = HierarchicalMap(order=32)
    worst = 0
    for i in range(100_000):  # depth plateau reached well before 10^6
        m.insert_at(i + 1, i)
        worst = max(worst, m.op_stats().node_visits)
    assert worst <= math.ceil(math.log(len(m), 16)) + 1
    assert m.check_invariants() is None


def test_bulk_build_leaves_in_band():
    for n in (1, 5, 31, 32, 33, 1000, 4097):
        m = HierarchicalMap.from_ids(range(n), order=32)
        assert m.to_ids() == list(range(n))
        assert m.check_invariants() is None


def test_corrupted_count_detected():
    m = HierarchicalMap.from_ids(range(10_000), order=8)
    assert m.check_invariants() is None
    node = m._root
    assert isinstance(node, _Internal)
    node.counts[0] += 1
    fault = m.check_invariants()
    assert fault is not None and "count" in fault


def test_monotonic_scan_instrumentation():
    m = MonotonicMap.from_ids(range(1, 1001))
    m.lookup(1000)
    assert m.op_stats().elements_scanned == 1000
    m.lookup(1)
    assert m.op_stats().elements_scanned == 1


def test_monotonic_renumber_on_exhaustion():
    m = MonotonicMap(gap=2)
    # hammer one insertion point until midpoints exhaust repeatedly
    m.insert_at(1, 0)
    m.insert_at(2, 1)
    for i in range(200):
        m.insert_at(2, i + 2)
    assert m.check_invariants() is None
    assert len(m) == 202
    assert m.renumber_events > 0


def test_direct_map_cascade_instrumentation():
    m = DirectMap.from_ids(range(1000))
    m.insert_at(1, 5555)
    assert m.op_stats().elements_shifted == 1000
    m.delete_at(500)
    assert m.check_invariants() is None


def test_serde_roundtrip():
    rng = random.Random(9)
    for _ in range(50):
        ids = [rng.getrandbits(rng.choice((8, 32, 63))) for _ in range(rng.randint(0, 500))]
        assert decode_ids(encode_ids(ids)) == ids
    with pytest.raises(ValueError):
        decode_ids(b"\x80")  # truncated varint


def test_serde_rebuild_hierarchical():
    ids = [7 * i + 3 for i in range(12_345)]
    blob = encode_ids(ids)
    rebuilt = HierarchicalMap.from_ids(decode_ids(blob), order=32)
    assert rebuilt.to_ids() == ids
    assert rebuilt.check_invariants() is None
