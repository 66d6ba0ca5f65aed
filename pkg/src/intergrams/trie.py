"""Immutable byte trie answering "is this prefix retained, and what is its rank?"

The node pool is a handful of flat arrays indexed by 32-bit node ids:

``child_count[v]``
    number of children of node ``v``.
``first[v]``
    for nodes with at most ``SMALL_FANOUT`` children, the offset of their
    sorted ``(edge_key, edge_child)`` run; for wider nodes, the index of a
    256-entry row in ``lut`` (``-1`` marks an absent byte).
``value[v]``
    rank ordinal at leaves, ``-1`` elsewhere.

Node 0 is the root. With the frequency layout the pool is permuted so that
the path to the most frequent prefix comes first, followed by the next most
frequent sibling subtree, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels as K
from .counting import TopKList

SMALL_FANOUT = 4


@dataclass(frozen=True)
class PrefixTrie:
    depth: int
    size: int
    child_count: np.ndarray
    first: np.ndarray
    value: np.ndarray
    edge_key: np.ndarray
    edge_child: np.ndarray
    lut: np.ndarray
    prefixes: np.ndarray  # (size, depth) uint8, row i is the prefix with ordinal i

    def __len__(self) -> int:
        return self.size

    @property
    def node_count(self) -> int:
        return int(self.child_count.shape[0])

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.child_count, self.first, self.value,
                                      self.edge_key, self.edge_child, self.lut))

    def kernel_args(self) -> tuple:
        return (self.child_count, self.first, self.value,
                self.edge_key, self.edge_child, self.lut)

    def lookup(self, window: bytes) -> int | None:
        if self.size == 0:
            return None
        if len(window) != self.depth:
            raise ValueError(f"window length {len(window)} != trie depth {self.depth}")
        o = K.lookup_one(np.frombuffer(bytes(window), dtype=np.uint8), *self.kernel_args())
        return None if o < 0 else int(o)

    def contains(self, window: bytes) -> bool:
        return self.lookup(window) is not None

    def __contains__(self, window: bytes) -> bool:
        return self.contains(window)

    def ordinal(self, window: bytes) -> int:
        o = self.lookup(window)
        if o is None:
            raise KeyError(window)
        return o

    def children(self, node: int) -> list[tuple[int, int]]:
        """``(byte, child)`` pairs of ``node`` in byte order."""
        c = int(self.child_count[node])
        f = int(self.first[node])
        if c > SMALL_FANOUT:
            row = self.lut[f * 256:(f + 1) * 256]
            return [(b, int(row[b])) for b in range(256) if row[b] >= 0]
        return [(int(self.edge_key[e]), int(self.edge_child[e])) for e in range(f, f + c)]


def build_trie(prefixes: TopKList | Iterable[bytes], frequency_layout: bool = True) -> PrefixTrie:
    """Build a trie whose ordinals follow the rank order of ``prefixes``.

    Without ``frequency_layout`` the pool is breadth-first with children in
    byte order.
    """
    grams = prefixes.grams if isinstance(prefixes, TopKList) else [bytes(p) for p in prefixes]
    if not grams:
        return _pack(np.zeros(0, np.int64), np.zeros(0, np.uint8), np.array([-1], np.int32),
                     0, np.zeros((0, 0), dtype=np.uint8))
    depth = len(grams[0])
    if depth < 1:
        raise ValueError("prefixes must be at least one byte long")
    if any(len(g) != depth for g in grams):
        raise ValueError("all prefixes must have the same length")
    size = len(grams)
    table = np.frombuffer(b"".join(grams), dtype=np.uint8).reshape(size, depth).copy()
    ranks = np.arange(size, dtype=np.int64)

    # node[i, d] is the id of the level-(d+1) ancestor of row i; ids of one
    # level are consecutive and in byte order, so level by level they already
    # form the breadth-first pool
    node = np.empty((size, depth), dtype=np.int64)
    best = [np.zeros(1, dtype=np.int64)]
    offset = 1
    for d in range(depth):
        keys = np.ascontiguousarray(table[:, :d + 1]).view(f"V{d + 1}").ravel()
        uniq, inverse = np.unique(keys, return_inverse=True)
        node[:, d] = offset + inverse
        b = np.full(uniq.shape[0], size, dtype=np.int64)
        np.minimum.at(b, inverse, ranks)
        best.append(b)
        offset += uniq.shape[0]
    if np.unique(node[:, -1]).shape[0] != size:
        raise ValueError("duplicate prefix")
    total = offset
    best_all = np.concatenate(best)

    parent = np.empty(total, dtype=np.int64)
    byte = np.zeros(total, dtype=np.uint8)
    parent[0] = -1
    parent[node[:, 0]] = 0
    parent[node[:, 1:]] = node[:, :-1]
    byte[node] = table
    values = np.full(total, -1, dtype=np.int32)
    values[node[:, -1]] = ranks

    if frequency_layout:
        # depth-first, at every node the child holding the best rank first:
        # sort rows by the best rank of each ancestor, then number nodes by
        # first appearance along the sorted paths
        rows = np.lexsort(tuple(best_all[node[:, d]] for d in range(depth - 1, -1, -1)))
        path = node[rows].ravel()
        _, first_seen = np.unique(path, return_index=True)
        order = np.concatenate(([0], path[np.sort(first_seen)]))
        new_id = np.empty(total, dtype=np.int64)
        new_id[order] = np.arange(total)
        parent = np.where(parent[order] >= 0, new_id[np.maximum(parent[order], 0)], -1)
        byte, values = byte[order], values[order]
    return _pack(parent[1:], byte[1:], values, depth, table)


def _pack(parent, byte, values, depth, prefixes) -> PrefixTrie:
    """``parent``/``byte`` describe nodes 1.. (node 0 is the root)."""
    n = values.shape[0]
    child_count = np.bincount(parent, minlength=n).astype(np.uint16)
    child = np.arange(1, n, dtype=np.int64)
    edges = np.lexsort((byte, parent))
    e_parent, e_byte, e_child = parent[edges], byte[edges], child[edges]

    wide = child_count > SMALL_FANOUT
    first = np.zeros(n, dtype=np.int32)
    first[wide] = np.arange(int(wide.sum()), dtype=np.int32)
    lut = np.full(int(wide.sum()) * 256, -1, dtype=np.int32)
    on_wide = wide[e_parent]
    lut[first[e_parent[on_wide]].astype(np.int64) * 256 + e_byte[on_wide]] = e_child[on_wide]

    narrow_counts = np.where(wide, 0, child_count).astype(np.int64)
    starts = np.concatenate(([0], np.cumsum(narrow_counts)[:-1]))
    first[~wide] = starts[~wide]
    return PrefixTrie(
        depth=depth,
        size=int(prefixes.shape[0]),
        child_count=child_count,
        first=first,
        value=values.astype(np.int32),
        edge_key=e_byte[~on_wide].astype(np.uint8),
        edge_child=e_child[~on_wide].astype(np.int32),
        lut=lut,
        prefixes=prefixes,
    )


def lookup(trie: PrefixTrie, window: bytes) -> int | None:
    return trie.lookup(window)
