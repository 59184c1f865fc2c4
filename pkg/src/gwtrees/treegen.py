"""Exact samplers for Galton-Watson trees.

Trees are plane trees stored by their preorder (lexicographic) degree
sequence.  Conditioned trees are produced by drawing an exchangeable degree
sequence with sum ``n - 1``, rotating it into the unique excursion, and
reading the excursion either depth-first (Lukasiewicz) or breadth-first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .offspring import DistributionError, OffspringDistribution, check_feasible, size_biased

ORDERS = ("dfs", "bfs")
DEFAULT_NODE_CAP = 10**8
ROOT = -1  # parent sentinel


class InvalidExcursionError(ValueError):
    pass


@dataclass(frozen=True)
class Overflow:
    """Returned instead of a tree when generation exceeded ``node_cap`` nodes.

    ``spine_degrees`` holds the offspring counts of the mutants generated
    before the cap was hit (size-biased sampler only).
    """

    nodes: int
    node_cap: int
    spine_degrees: tuple[int, ...] = ()


def is_excursion(seq) -> bool:
    """Proper prefix sums of ``d_i - 1`` are all >= 0 and the total is -1."""
    d = np.asarray(seq, dtype=np.int64)
    if d.ndim != 1 or len(d) == 0 or np.any(d < 0):
        return False
    walk = np.cumsum(d - 1)
    return bool(walk[-1] == -1 and np.all(walk[:-1] >= 0))


@dataclass(frozen=True, eq=False)
class PlaneTree:
    """Ordered rooted tree; node ``i`` is the ``i``-th node in preorder.

    ``degrees`` is the preorder degree sequence, which determines the tree.
    """

    degrees: np.ndarray

    def __post_init__(self):
        d = np.array(self.degrees, dtype=np.int64)
        if not is_excursion(d):
            raise InvalidExcursionError("degree sequence is not a valid preorder excursion")
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return len(self.degrees)

    def __len__(self):
        return len(self.degrees)

    @cached_property
    def key(self) -> tuple[int, ...]:
        return tuple(self.degrees.tolist())

    def __eq__(self, other):
        return isinstance(other, PlaneTree) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"PlaneTree({list(self.key) if self.n <= 20 else f'n={self.n}'})"

    @cached_property
    def parent(self) -> np.ndarray:
        par = np.empty(self.n, dtype=np.int64)
        par[0] = ROOT
        stack: list[list[int]] = []  # [node, children still to attach]
        for v, d in enumerate(self.degrees.tolist()):
            if v:
                top = stack[-1]
                par[v] = top[0]
                top[1] -= 1
                if top[1] == 0:
                    stack.pop()
            if d:
                stack.append([v, d])
        return par

    @cached_property
    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent.tolist()):
            if p != ROOT:
                ch[p].append(v)
        return ch

    @cached_property
    def depth(self) -> np.ndarray:
        dep = np.zeros(self.n, dtype=np.int64)
        par = self.parent.tolist()
        out = dep.tolist()
        for v in range(1, self.n):
            out[v] = out[par[v]] + 1
        return np.array(out, dtype=np.int64)

    def bfs_order(self) -> np.ndarray:
        """Preorder ids listed in breadth-first (level, then plane) order."""
        order = [0]
        ch = self.children
        i = 0
        while i < len(order):
            order.extend(ch[order[i]])
            i += 1
        return np.array(order, dtype=np.int64)

    def revlex_order(self) -> np.ndarray:
        """Preorder ids listed in the preorder of the mirror image."""
        out = []
        stack = [0]
        ch = self.children
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(ch[v])  # last child popped first
        return np.array(out, dtype=np.int64)

    def mirror(self) -> "PlaneTree":
        return PlaneTree(self.degrees[self.revlex_order()])

    @classmethod
    def from_children(cls, children: Sequence[Sequence[int]], root: int = 0) -> "PlaneTree":
        """Build from ordered child lists on arbitrary node labels."""
        degs = []
        stack = [root]
        while stack:
            v = stack.pop()
            degs.append(len(children[v]))
            stack.extend(reversed(children[v]))
        return cls(np.array(degs, dtype=np.int64))


def cycle_rotate(seq) -> np.ndarray:
    """Rotate a degree sequence with sum ``n - 1`` into its unique excursion.

    The rotation starts right after the first index where the walk
    ``sum(d_i - 1)`` attains its minimum.
    """
    d = np.asarray(seq, dtype=np.int64)
    n = len(d)
    if d.sum() != n - 1:
        raise ValueError(f"degree sum {int(d.sum())} != n - 1 = {n - 1}")
    pivot = int(np.argmin(np.cumsum(d - 1)))
    out = np.roll(d, -(pivot + 1))
    assert is_excursion(out), "cycle lemma violated"
    return out


def cycle_rotate_rows(degrees: np.ndarray) -> np.ndarray:
    """Row-wise :func:`cycle_rotate` for a 2-d array of sequences."""
    m, n = degrees.shape
    pivot = np.argmin(np.cumsum(degrees - 1, axis=1), axis=1)
    idx = (pivot[:, None] + 1 + np.arange(n)[None, :]) % n
    return np.take_along_axis(degrees, idx, axis=1)


def bfs_children(seq) -> list[list[int]]:
    """Child lists (in level-order labels) of the tree whose level-order degrees are ``seq``."""
    d = np.asarray(seq, dtype=np.int64).tolist()
    ch = []
    nxt = 1
    for k in d:
        ch.append(list(range(nxt, nxt + k)))
        nxt += k
    return ch


def tree_from_degrees(seq, order: str = "dfs") -> PlaneTree:
    """The plane tree whose preorder (``dfs``) or level-order (``bfs``) degree
    sequence is the excursion ``seq``."""
    if not is_excursion(seq):
        raise InvalidExcursionError(f"not an excursion: {list(np.asarray(seq))[:20]}")
    if order == "dfs":
        return PlaneTree(seq)
    if order == "bfs":
        return PlaneTree.from_children(bfs_children(seq))
    raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")


def _acceptance_guess(dist: OffspringDistribution, n: int) -> float:
    # local CLT for P(S_n = n - 1), kept away from 0 and 1
    p = dist.span / math.sqrt(2 * math.pi * dist.sigma2 * n)
    return min(0.5, max(p, 1e-6))


def conditioned_counts(dist: OffspringDistribution, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` count vectors over ``dist.support`` of ``n`` i.i.d. draws
    conditioned on the sum being ``n - 1``.

    Count vectors are proposed as multinomials and rejected unless the
    weighted sum hits ``n - 1``; this is the same rejection as redrawing all
    ``n`` values, at O(|support|) per proposal.
    """
    check_feasible(dist, n)
    atoms = dist.support
    probs = dist.atom_probs
    acc = _acceptance_guess(dist, n)
    out = []
    need = size
    while need > 0:
        batch = int(min(1 << 18, max(64, 1.25 * need / acc)))
        c = rng.multinomial(n, probs, size=batch)
        ok = c[c @ atoms == n - 1]
        out.append(ok[:need])
        need -= len(out[-1])
    return np.concatenate(out) if out else np.empty((0, len(atoms)), dtype=np.int64)


def sample_conditioned_degrees(
    dist: OffspringDistribution,
    n: int,
    rng: np.random.Generator,
    size: int | None = None,
    method: str = "counts",
) -> np.ndarray:
    """Exchangeable degree sequence(s) of length ``n`` with sum ``n - 1``.

    ``method="counts"`` draws the count vector by multinomial rejection and
    shuffles it; ``method="naive"`` redraws all ``n`` values until the sum
    fits.  Both give the law of i.i.d. draws conditioned on the sum.
    Returns shape ``(n,)`` or ``(size, n)``.
    """
    check_feasible(dist, n)
    m = 1 if size is None else size
    if method == "counts":
        counts = conditioned_counts(dist, n, m, rng)
        flat = np.repeat(np.tile(dist.support, m), counts.ravel())
        rows = rng.permuted(flat.reshape(m, n), axis=1)
    elif method == "naive":
        rows = np.empty((m, n), dtype=np.int64)
        for i in range(m):
            while True:
                d = dist.sample(rng, size=n)
                if d.sum() == n - 1:
                    rows[i] = d
                    break
    else:
        raise ValueError(f"unknown method {method!r}")
    return rows[0] if size is None else rows


def sample_conditioned_excursions(
    dist: OffspringDistribution, n: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """``(size, n)`` array of rotated excursions; each row read in either
    order is a conditioned tree."""
    return cycle_rotate_rows(sample_conditioned_degrees(dist, n, rng, size=size))


def sample_conditioned(
    dist: OffspringDistribution, n: int, rng: np.random.Generator, order: str = "dfs"
) -> PlaneTree:
    """A Galton-Watson tree conditioned to have exactly ``n`` nodes."""
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")
    seq = cycle_rotate(sample_conditioned_degrees(dist, n, rng))
    return tree_from_degrees(seq, order)


def sample_unconditioned(
    dist: OffspringDistribution, rng: np.random.Generator, node_cap: int = DEFAULT_NODE_CAP
) -> PlaneTree | Overflow:
    """Grow a Galton-Watson tree generation by generation.

    Returns :class:`Overflow` once more than ``node_cap`` nodes exist.
    """
    if not dist.is_critical:
        raise DistributionError("unconditioned sampling expects a critical law")
    levels = []
    width = 1
    total = 1
    while width:
        d = dist.sample(rng, size=width)
        levels.append(d)
        width = int(d.sum())
        total += width
        if total > node_cap:
            return Overflow(total, node_cap)
    return tree_from_degrees(np.concatenate(levels), "bfs")


@dataclass(frozen=True)
class SpinedTree:
    """A draw of the size-biased tree with ``k`` mutant generations.

    ``spine[i]`` is the preorder id of the spine node at depth ``i``;
    ``spine[k]`` is the heir ``v*``.  ``M`` counts the normal children of
    the mutants, the heir ``v*`` included.
    """

    tree: PlaneTree
    spine: np.ndarray
    M: int

    @property
    def k(self) -> int:
        return len(self.spine) - 1


def sample_size_biased(
    dist: OffspringDistribution,
    k: int,
    rng: np.random.Generator,
    node_cap: int = DEFAULT_NODE_CAP,
) -> SpinedTree | Overflow:
    """Draw the size-biased tree with ``k`` mutant generations.

    Mutants (the spine nodes above depth ``k``) have size-biased offspring
    counts and a uniformly chosen heir; every other node reproduces per
    ``dist``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hat = size_biased(dist)
    levels = []
    spine_bfs = [0]  # level-order labels
    level_start = 0
    width = 1
    mutant_at = 0  # offset of the mutant within the current level, or -1
    depth = 0
    total = 1
    M = 0
    mutant_degrees = []
    while width:
        d = dist.sample(rng, size=width)
        if mutant_at >= 0 and depth < k:
            m = hat.sample(rng)
            d[mutant_at] = m
            M += m - 1
            mutant_degrees.append(int(m))
            first_child = level_start + width + int(d[:mutant_at].sum())
            heir = first_child + int(rng.integers(m))
            spine_bfs.append(heir)
            next_mutant = heir - (level_start + width)
        else:
            next_mutant = -1
        levels.append(d)
        level_start += width
        width = int(d.sum())
        total += width
        depth += 1
        mutant_at = next_mutant
        if total > node_cap:
            return Overflow(total, node_cap, tuple(mutant_degrees))
    M += 1
    bfs_seq = np.concatenate(levels)
    ch = bfs_children(bfs_seq)
    tree = PlaneTree.from_children(ch)
    # map level-order labels to preorder ids
    pre = np.empty(len(bfs_seq), dtype=np.int64)
    stack = [0]
    i = 0
    while stack:
        v = stack.pop()
        pre[v] = i
        i += 1
        stack.extend(reversed(ch[v]))
    return SpinedTree(tree, pre[np.array(spine_bfs)], M)


def size_biased_sizes(
    dist: OffspringDistribution,
    k: int,
    size: int,
    rng: np.random.Generator,
    node_cap: int,
    chunk: int = 1 << 22,
) -> np.ndarray:
    """Sizes of ``size`` independent size-biased trees, capped at ``node_cap + 1``.

    Uses the spine decomposition: ``k`` mutants plus a forest of ``M``
    independent Galton-Watson trees, where ``M = 1 + sum(hat_i - 1)``.  The
    forest size is the first time the walk ``M + sum(xi_j - 1)`` reaches 0.
    """
    hat = size_biased(dist)
    steps = node_cap - k
    out = np.full(size, node_cap + 1, dtype=np.int64)
    if steps < 1:
        return out
    rows = max(1, chunk // steps)
    for lo in range(0, size, rows):
        hi = min(size, lo + rows)
        m = 1 + (hat.sample(rng, size=(hi - lo, k)) - 1).sum(axis=1)
        walk = m[:, None] + np.cumsum(dist.sample(rng, size=(hi - lo, steps)) - 1, axis=1)
        hit = walk <= 0
        done = hit.any(axis=1)
        first = np.argmax(hit, axis=1) + 1
        out[lo:hi][done] = k + first[done]
    return out
