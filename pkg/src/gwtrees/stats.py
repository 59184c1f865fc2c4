"""Linear-time statistics of plane trees: level profile, width, height, queue
(Lukasiewicz-type) paths and root-path decompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .treegen import PlaneTree

QUEUE_ORDERS = ("bfs", "dfs-lex", "dfs-revlex")


@dataclass(frozen=True)
class LevelProfile:
    z: np.ndarray

    @property
    def width(self) -> int:
        return int(self.z.max())

    @property
    def height(self) -> int:
        return len(self.z) - 1

    @property
    def n(self) -> int:
        return int(self.z.sum())


@dataclass(frozen=True)
class QueuePath:
    q: np.ndarray
    order: str

    @property
    def max(self) -> int:
        return int(self.q.max())


def level_profile(tree: PlaneTree) -> LevelProfile:
    return LevelProfile(np.bincount(tree.depth))


def node_order(tree: PlaneTree, order: str) -> np.ndarray:
    if order == "bfs":
        return tree.bfs_order()
    if order == "dfs-lex":
        return np.arange(tree.n)
    if order == "dfs-revlex":
        return tree.revlex_order()
    raise ValueError(f"unknown order {order!r}; expected one of {QUEUE_ORDERS}")


def queue_path(tree: PlaneTree, order: str = "bfs") -> QueuePath:
    """``Q_0 = 1``, ``Q_i = Q_{i-1} - 1 + deg(i-th node in the given order)``."""
    d = tree.degrees[node_order(tree, order)]
    q = np.empty(tree.n + 1, dtype=np.int64)
    q[0] = 1
    q[1:] = 1 + np.cumsum(d - 1)
    return QueuePath(q, order)


def dfs_values(tree: PlaneTree, order: str) -> np.ndarray:
    """``out[v]`` is the queue size just before ``v`` is expanded in the given
    depth-first order."""
    seq = node_order(tree, order)
    q = queue_path(tree, order).q
    out = np.empty(tree.n, dtype=np.int64)
    out[seq] = q[:-1]
    return out


def dfs_value_at(tree: PlaneTree, v: int, order: str) -> int:
    if order not in ("dfs-lex", "dfs-revlex"):
        raise ValueError(f"order must be dfs-lex or dfs-revlex, got {order!r}")
    _check_node(tree, v)
    return int(dfs_values(tree, order)[v])


def ancestor_arrays(tree: PlaneTree) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per node: depth, number of strict ancestors with exactly one child, and
    the sum of ``deg - 1`` over strict ancestors."""
    par = tree.parent.tolist()
    deg = tree.degrees.tolist()
    n = tree.n
    h = [0] * n
    a1 = [0] * n
    off = [0] * n
    for v in range(1, n):  # parents precede children in preorder
        p = par[v]
        h[v] = h[p] + 1
        a1[v] = a1[p] + (deg[p] == 1)
        off[v] = off[p] + deg[p] - 1
    return np.array(h), np.array(a1), np.array(off)


def ancestor_decomposition(tree: PlaneTree, v: int) -> tuple[int, int, int]:
    _check_node(tree, v)
    h, a1, off = ancestor_arrays(tree)
    return int(h[v]), int(a1[v]), int(off[v])


def _check_node(tree: PlaneTree, v: int) -> None:
    if not 0 <= v < tree.n:
        raise IndexError(f"node {v} not in tree of size {tree.n}")


@dataclass(frozen=True)
class InvariantCounts:
    nodes: int
    spine_count: int  # violations of Q^d(v) + Q^r(v) = 2 + off(v)
    dichotomy: int  # violations of a1(v) + Q^d(v) - 1 + Q^r(v) - 1 >= h(v)
    product: int  # W * H < n - 1
    queue_width: int  # max bfs queue < W

    @property
    def total(self) -> int:
        return self.spine_count + self.dichotomy + self.product + self.queue_width


def check_invariants(tree: PlaneTree) -> InvariantCounts:
    """Count violations of the deterministic per-tree identities."""
    qd = dfs_values(tree, "dfs-lex")
    qr = dfs_values(tree, "dfs-revlex")
    h, a1, off = ancestor_arrays(tree)
    prof = level_profile(tree)
    n = tree.n
    return InvariantCounts(
        nodes=n,
        spine_count=int(np.count_nonzero(qd + qr != 2 + off)),
        dichotomy=int(np.count_nonzero(a1 + (qd - 1) + (qr - 1) < h)),
        product=int(n >= 2 and prof.width * prof.height < n - 1),
        queue_width=int(queue_path(tree, "bfs").max < prof.width),
    )


def tree_stats(tree: PlaneTree) -> dict:
    prof = level_profile(tree)
    return {
        "n": tree.n,
        "width": prof.width,
        "height": prof.height,
        "max_queue_bfs": queue_path(tree, "bfs").max,
    }


# batch statistics over level-order excursions


def batch_profiles(bfs_rows: np.ndarray) -> np.ndarray:
    """Level profiles of many trees given as level-order excursions.

    Returns an ``(m, L)`` array, zero padded; ``out[i, l] = Z_l`` of tree ``i``.
    Level ``l`` occupies a contiguous block ``[start, end)`` of the level-order
    sequence and the next level ends at ``1 + sum(d[:end])``.
    """
    m, n = bfs_rows.shape
    csum = np.cumsum(bfs_rows, axis=1)
    rows = np.arange(m)
    start = np.zeros(m, dtype=np.int64)
    end = np.ones(m, dtype=np.int64)
    cols = []
    while True:
        z = end - start
        if not z.any():
            break
        cols.append(z)
        start, end = end, 1 + csum[rows, end - 1]
    return np.stack(cols, axis=1)


def batch_max_queue(bfs_rows: np.ndarray) -> np.ndarray:
    """Maximum of the breadth-first queue path of each row."""
    n = bfs_rows.shape[1]
    q = 1 + np.cumsum(bfs_rows, axis=1) - np.arange(1, n + 1)[None, :]
    return np.maximum(q.max(axis=1), 1)
