import itertools
import random

import pytest

from gridstore.core import Boolean, Number, Text
from gridstore.engine import (
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


def tv(attrs, rows):
    return TableValue(tuple(attrs), tuple(tuple(r) for r in rows))


def nums(*values):
    return tuple(Number(float(v)) for v in values)


def test_union_set_semantics():
    a = tv(["x"], [nums(1), nums(2)])
    b = tv(["x"], [nums(2), nums(3)])
    assert union(a, b).rows == (nums(1), nums(2), nums(3))


def test_difference_and_intersection():
    a = tv(["x"], [nums(1), nums(2), nums(2)])
    b = tv(["x"], [nums(2)])
    assert difference(a, b).rows == (nums(1),)
    assert intersection(a, b).rows == (nums(2),)


def test_schema_mismatch_rejected():
    with pytest.raises(SchemaError):
        union(tv(["x"], []), tv(["y"], []))


def test_crossproduct_bag_semantics_and_renaming():
    a = tv(["x"], [nums(1), nums(1)])
    b = tv(["x"], [nums(5)])
    result = crossproduct(a, b)
    assert result.attrs == ("x", "x_2")
    assert result.rows == (nums(1, 5), nums(1, 5))  # duplicates preserved


def test_natural_join_example():
    left = tv(["k", "a"], [nums(1, 10), nums(2, 20)])
    right = tv(["k", "b"], [nums(1, 7), nums(3, 8), nums(1, 9)])
    result = join(left, right)
    assert result.attrs == ("k", "a", "b")
    assert result.rows == (nums(1, 10, 7), nums(1, 10, 9))


def test_predicate_join():
    left = tv(["a"], [nums(1), nums(5)])
    right = tv(["b"], [nums(3), nums(4)])
    result = join(left, right, "a<b")
    assert result.rows == (nums(1, 3), nums(1, 4))


def test_filter_and_project_and_rename():
    t = tv(["name", "qty"], [(Text("bolt"), Number(10.0)), (Text("nut"), Number(3.0))])
    kept = filter_rows(t, "qty>5")
    assert kept.rows == ((Text("bolt"), Number(10.0)),)
    proj = project(t, "name")
    assert proj.attrs == ("name",) and len(proj.rows) == 2
    renamed = rename(t, "qty", "count")
    assert renamed.attrs == ("name", "count")
    with pytest.raises(SchemaError):
        filter_rows(t, "missing>1")
    with pytest.raises(SchemaError):
        project(t, "missing")
    with pytest.raises(SchemaError):
        rename(t, "missing", "x")


def test_index_into():
    t = tv(["a", "b"], [nums(1, 2), nums(3, 4)])
    assert index_into(t, 1, 1) == Number(1.0)
    assert index_into(t, 2, 2) == Number(4.0)
    with pytest.raises(IndexError):
        index_into(t, 3, 1)
    with pytest.raises(IndexError):
        index_into(t, 0, 1)


def test_boolean_cells_participate():
    t = tv(["flag"], [(Boolean(True),), (Boolean(False),)])
    kept = filter_rows(t, "flag=1")
    assert kept.rows == ((Boolean(True),),)


# --- randomized comparison against a naive set/bag oracle ----------------------

def _naive_union(a, b):
    out, seen = [], set()
    for row in list(a) + list(b):
        if row not in seen:
            seen.add(row)
            out.append(row)
    return out


def _naive_difference(a, b):
    out, seen = [], set()
    for row in a:
        if row not in set(b) and row not in seen:
            seen.add(row)
            out.append(row)
    return out


def _naive_intersection(a, b):
    out, seen = [], set()
    for row in a:
        if row in set(b) and row not in seen:
            seen.add(row)
            out.append(row)
    return out


def _naive_cross(a, b):
    return [ra + rb for ra in a for rb in b]


def _naive_natural_join(a_attrs, a_rows, b_attrs, b_rows):
    shared = [n for n in a_attrs if n in b_attrs]
    keep = [i for i, n in enumerate(b_attrs) if n not in shared]
    out = []
    for ra in a_rows:
        for rb in b_rows:
            if all(
                ra[a_attrs.index(n)] == rb[b_attrs.index(n)] for n in shared
            ):
                out.append(ra + tuple(rb[i] for i in keep))
    return out


def test_random_pairs_match_oracle():
    rng = random.Random(6)
    for trial in range(500):
        width = rng.randint(1, 3)
        attrs = tuple(f"c{i}" for i in range(width))
        def rand_rows():
            return [
                tuple(Number(float(rng.randint(0, 3))) for _ in range(width))
                for _ in range(rng.randint(0, 6))
            ]
        a_rows, b_rows = rand_rows(), rand_rows()
        a, b = tv(attrs, a_rows), tv(attrs, b_rows)
        assert list(union(a, b).rows) == _naive_union(
            [tuple(r) for r in a_rows], [tuple(r) for r in b_rows]
        )
        assert list(difference(a, b).rows) == _naive_difference(
            [tuple(r) for r in a_rows], [tuple(r) for r in b_rows]
        )
        assert list(intersection(a, b).rows) == _naive_intersection(
            [tuple(r) for r in a_rows], [tuple(r) for r in b_rows]
        )
        # cross/join with disjoint-attribute right side
        b2_attrs = tuple(f"d{i}" for i in range(width))
        b2 = tv(b2_attrs, b_rows)
        assert list(crossproduct(a, b2).rows) == _naive_cross(
            [tuple(r) for r in a_rows], [tuple(r) for r in b_rows]
        )
        # natural join on one shared key attribute
        aj = tv(("k",) + attrs, [(Number(float(rng.randint(0, 2))),) + tuple(r) for r in a_rows])
        bj = tv(("k", "z"), [
            (Number(float(rng.randint(0, 2))), Number(float(rng.randint(0, 9))))
            for _ in range(rng.randint(0, 6))
        ])
        assert list(join(aj, bj).rows) == _naive_natural_join(
            aj.attrs, [tuple(r) for r in aj.rows], bj.attrs, [tuple(r) for r in bj.rows]
        )
