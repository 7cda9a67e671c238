"""Counted B+ tree: an order-statistic index from position to identifier.

Internal nodes hold child subtree counts instead of keys; descent subtracts
child counts left to right. Leaves hold identifier runs (array('Q')) and are
chained for range scans. All operations are O(log N) node visits.
"""

from __future__ import annotations

from array import array
from typing import Iterable

from gridstore.posmap.base import PositionalMap

DEFAULT_ORDER = 32
MIN_ORDER = 4
MAX_ORDER = 1024


class _Leaf:
    __slots__ = ("ids", "next")

    def __init__(self, ids: Iterable[int] = ()) -> None:
        self.ids = array("Q", ids)
        self.next: "_Leaf | None" = None


class _Internal:
    __slots__ = ("children", "counts")

    def __init__(self, children: list, counts: list[int]) -> None:
        self.children = children
        self.counts = counts


class HierarchicalMap(PositionalMap):
    def __init__(self, order: int = DEFAULT_ORDER) -> None:
        super().__init__()
        if not (MIN_ORDER <= order <= MAX_ORDER):
            raise ValueError(f"order must be in {MIN_ORDER}..{MAX_ORDER}")
        self.order = order
        self._min_fill = (order + 1) // 2  # ceil(m/2)
        self._root: _Leaf | _Internal = _Leaf()
        self._size = 0

    def __len__(self) -> int:
        return self._size

    # --- descent helpers -----------------------------------------------------

    def _descend_path(self, pos: int) -> tuple[list[tuple[_Internal, int]], _Leaf, int]:
        """Walk to the leaf owning ``pos``; returns (path, leaf, local pos).

        Positions past the last child's count fall through to the last child,
        which is how an append (pos = N+1) finds its leaf.
        """
        visits = 0
        node = self._root
        path: list[tuple[_Internal, int]] = []
        while isinstance(node, _Internal):
            visits += 1
            counts = node.counts
            idx = 0
            last = len(counts) - 1
            while idx < last and pos > counts[idx]:
                pos -= counts[idx]
                idx += 1
            path.append((node, idx))
            node = node.children[idx]
        visits += 1
        self.stats.node_visits = visits
        return path, node, pos

    # --- reads ----------------------------------------------------------------

    def lookup(self, pos: int) -> int:
        self._check_pos(pos, self._size)
        _, leaf, local = self._descend_path(pos)
        return leaf.ids[local - 1]

    def lookup_range(self, pos: int, count: int) -> list[int]:
        if count == 0:
            return []
        self._check_pos(pos, self._size)
        self._check_pos(pos + count - 1, self._size)
        _, leaf, local = self._descend_path(pos)
        visits = self.stats.node_visits
        out: list[int] = []
        idx = local - 1
        while leaf is not None and len(out) < count:
            take = leaf.ids[idx : idx + (count - len(out))]
            out.extend(take)
            leaf = leaf.next
            idx = 0
            if leaf is not None and len(out) < count:
                visits += 1
        self.stats.node_visits = visits
        return out

    def to_ids(self) -> list[int]:
        out: list[int] = []
        node = self._root
        while isinstance(node, _Internal):
            node = node.children[0]
        while node is not None:
            out.extend(node.ids)
            node = node.next
        return out

    # --- writes ---------------------------------------------------------------

    def insert_at(self, pos: int, ident: int) -> None:
        self._check_pos(pos, self._size + 1)
        path, leaf, local = self._descend_path(pos)
        leaf.ids.insert(local - 1, ident)
        for node, idx in path:
            node.counts[idx] += 1
        self._size += 1
        if len(leaf.ids) > self.order:
            self._split_leaf(path, leaf)

    def _split_leaf(self, path: list[tuple[_Internal, int]], leaf: _Leaf) -> None:
        half = len(leaf.ids) // 2
        right = _Leaf(leaf.ids[half:])
        del leaf.ids[half:]
        right.next = leaf.next
        leaf.next = right
        self._insert_child_after(path, leaf, len(leaf.ids), right, len(right.ids))

    def _insert_child_after(self, path, left, left_count, right, right_count) -> None:
        if not path:
            self._root = _Internal([left, right], [left_count, right_count])
            return
        parent, idx = path.pop()
        parent.counts[idx] = left_count
        parent.children.insert(idx + 1, right)
        parent.counts.insert(idx + 1, right_count)
        if len(parent.children) > self.order:
            half = len(parent.children) // 2
            sibling = _Internal(parent.children[half:], parent.counts[half:])
            del parent.children[half:]
            del parent.counts[half:]
            self._insert_child_after(
                path, parent, sum(parent.counts), sibling, sum(sibling.counts)
            )

    def delete_at(self, pos: int) -> int:
        self._check_pos(pos, self._size)
        path, leaf, local = self._descend_path(pos)
        ident = leaf.ids[local - 1]
        del leaf.ids[local - 1]
        for node, idx in path:
            node.counts[idx] -= 1
        self._size -= 1
        if len(leaf.ids) < self._min_fill and path:
            self._rebalance_leaf(path, leaf)
        return int(ident)

    def _rebalance_leaf(self, path: list[tuple[_Internal, int]], leaf: _Leaf) -> None:
        parent, idx = path[-1]
        if idx > 0:
            left = parent.children[idx - 1]
            if len(left.ids) > self._min_fill:
                leaf.ids.insert(0, left.ids.pop())
                parent.counts[idx - 1] -= 1
                parent.counts[idx] += 1
                return
        if idx + 1 < len(parent.children):
            right = parent.children[idx + 1]
            if len(right.ids) > self._min_fill:
                leaf.ids.append(right.ids.pop(0))
                parent.counts[idx + 1] -= 1
                parent.counts[idx] += 1
                return
        # Merge with a sibling.
        if idx > 0:
            left = parent.children[idx - 1]
            left.ids.extend(leaf.ids)
            left.next = leaf.next
            self._drop_child(path, idx, parent.counts[idx - 1] + parent.counts[idx], idx - 1)
        else:
            right = parent.children[idx + 1]
            leaf.ids.extend(right.ids)
            leaf.next = right.next
            self._drop_child(path, idx + 1, parent.counts[idx] + parent.counts[idx + 1], idx)

    def _drop_child(self, path, drop_idx, merged_count, keep_idx) -> None:
        parent, _ = path.pop()
        del parent.children[drop_idx]
        del parent.counts[drop_idx]
        parent.counts[keep_idx] = merged_count
        if parent is self._root:
            if len(parent.children) == 1:
                self._root = parent.children[0]
            return
        if len(parent.children) < self._min_fill:
            self._rebalance_internal(path, parent)

    def _rebalance_internal(self, path: list[tuple[_Internal, int]], node: _Internal) -> None:
        parent, idx = path[-1]
        if idx > 0:
            left = parent.children[idx - 1]
            if len(left.children) > self._min_fill:
                moved_count = left.counts.pop()
                node.children.insert(0, left.children.pop())
                node.counts.insert(0, moved_count)
                parent.counts[idx - 1] -= moved_count
                parent.counts[idx] += moved_count
                return
        if idx + 1 < len(parent.children):
            right = parent.children[idx + 1]
            if len(right.children) > self._min_fill:
                moved_count = right.counts.pop(0)
                node.children.append(right.children.pop(0))
                node.counts.append(moved_count)
                parent.counts[idx + 1] -= moved_count
                parent.counts[idx] += moved_count
                return
        if idx > 0:
            left = parent.children[idx - 1]
            left.children.extend(node.children)
            left.counts.extend(node.counts)
            self._drop_child(path, idx, parent.counts[idx - 1] + parent.counts[idx], idx - 1)
        else:
            right = parent.children[idx + 1]
            node.children.extend(right.children)
            node.counts.extend(right.counts)
            self._drop_child(path, idx + 1, parent.counts[idx] + parent.counts[idx + 1], idx)

    # --- bulk build -------------------------------------------------------------

    @classmethod
    def from_ids(cls, ids: Iterable[int], order: int = DEFAULT_ORDER) -> "HierarchicalMap":
        """Bottom-up bulk build; every leaf lands in the ceil(m/2)..m band."""
        m = cls(order)
        data = array("Q", ids)
        n = len(data)
        if n == 0:
            return m
        leaves: list[_Leaf] = []
        step = order
        for start in range(0, n, step):
            leaves.append(_Leaf(data[start : start + step]))
        if len(leaves) >= 2 and len(leaves[-1].ids) < m._min_fill:
            need = m._min_fill - len(leaves[-1].ids)
            donor = leaves[-2].ids
            moved = donor[len(donor) - need :]
            del donor[len(donor) - need :]
            leaves[-1].ids = moved + leaves[-1].ids
        for a, b in zip(leaves, leaves[1:]):
            a.next = b
        level: list = leaves
        counts = [len(leaf.ids) for leaf in leaves]
        while len(level) > 1:
            next_level = []
            next_counts = []
            for start in range(0, len(level), order):
                group = level[start : start + order]
                group_counts = counts[start : start + order]
                next_level.append(_Internal(group, group_counts))
                next_counts.append(sum(group_counts))
            if len(next_level) >= 2 and len(next_level[-1].children) < m._min_fill:
                need = m._min_fill - len(next_level[-1].children)
                donor = next_level[-2]
                moved_children = donor.children[len(donor.children) - need :]
                moved_counts = donor.counts[len(donor.counts) - need :]
                del donor.children[len(donor.children) - need :]
                del donor.counts[len(donor.counts) - need :]
                next_level[-1].children[:0] = moved_children
                next_level[-1].counts[:0] = moved_counts
                next_counts[-2] = sum(donor.counts)
                next_counts[-1] = sum(next_level[-1].counts)
            level = next_level
            counts = next_counts
        m._root = level[0]
        m._size = n
        return m

    # --- validation ---------------------------------------------------------------

    def check_invariants(self) -> str | None:
        root = self._root
        if isinstance(root, _Leaf):
            if len(root.ids) != self._size:
                return f"root leaf holds {len(root.ids)} ids, size says {self._size}"
            return None

        depths: set[int] = set()

        def walk(node, depth: int, is_root: bool) -> int | str:
            if isinstance(node, _Leaf):
                depths.add(depth)
                if not is_root and len(node.ids) < self._min_fill:
                    return f"leaf underfull at depth {depth}: {len(node.ids)}"
                if len(node.ids) > self.order:
                    return f"leaf overfull at depth {depth}: {len(node.ids)}"
                return len(node.ids)
            if len(node.children) > self.order:
                return f"internal node overfull: {len(node.children)}"
            if not is_root and len(node.children) < self._min_fill:
                return f"internal node underfull: {len(node.children)}"
            if len(node.children) != len(node.counts):
                return "children/counts length mismatch"
            total = 0
            for child, recorded in zip(node.children, node.counts):
                result = walk(child, depth + 1, False)
                if isinstance(result, str):
                    return result
                if result != recorded:
                    return f"count mismatch: recorded {recorded}, actual {result}"
                total += result
            return total

        result = walk(root, 0, True)
        if isinstance(result, str):
            return result
        if result != self._size:
            return f"tree holds {result} ids, size says {self._size}"
        if len(depths) > 1:
            return f"leaves at unequal depths: {sorted(depths)}"
        chained = 0
        node = root
        while isinstance(node, _Internal):
            node = node.children[0]
        while node is not None:
            chained += len(node.ids)
            node = node.next
        if chained != self._size:
            return f"leaf chain covers {chained} ids, size says {self._size}"
        return None
