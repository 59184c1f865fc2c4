"""Exhaustive small-n ground truth for Galton-Watson tree laws."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .offspring import (
    InfeasibleSizeError,
    OffspringDistribution,
    check_feasible,
    is_feasible,
    size_biased,
    sum_law,
    tilt,
    tilt_to_critical,
)
from .stats import check_invariants, level_profile, queue_path
from .treegen import PlaneTree

ENUM_MAX = 12
STATISTICS = ("W", "H", "Zk", "maxQ")


@lru_cache(maxsize=None)
def _trees(n: int) -> tuple[tuple[int, ...], ...]:
    """Preorder degree tuples of all plane trees with ``n`` nodes."""
    return tuple((deg,) + body for deg, body in _forests(n - 1))


@lru_cache(maxsize=None)
def _forests(m: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """All ordered forests with ``m`` nodes as ``(tree count, concatenated degrees)``."""
    if m == 0:
        return ((0, ()),)
    out = []
    for s in range(1, m + 1):
        for first in _trees(s):
            for count, rest in _forests(m - s):
                out.append((count + 1, first + rest))
    return tuple(out)


def enumerate_plane_trees(n: int) -> list[PlaneTree]:
    """Every plane tree with ``n`` nodes, once each (Catalan(n-1) of them)."""
    if not 1 <= n <= ENUM_MAX:
        raise ValueError(f"enumeration supports 1 <= n <= {ENUM_MAX}, got {n}")
    return [PlaneTree(np.array(t)) for t in _trees(n)]


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def _weight_of_key(dist: OffspringDistribution, key) -> float:
    return math.prod(dist.prob(d) for d in key)


def tree_weight(dist: OffspringDistribution, tree: PlaneTree) -> float:
    """``P(T = tree)``: the product of ``P(xi = deg v)`` over all nodes."""
    return _weight_of_key(dist, tree.key)


@dataclass(frozen=True)
class WeightedTreeTable:
    n: int
    entries: list[tuple[PlaneTree, float]]
    total: float  # sum of the unnormalized weights, i.e. P(|T| = n)
    normalized: bool = False

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {t.key: w for t, w in self.entries}


def weighted_tree_table(dist: OffspringDistribution, n: int) -> WeightedTreeTable:
    entries = [(t, tree_weight(dist, t)) for t in enumerate_plane_trees(n)]
    return WeightedTreeTable(n, entries, math.fsum(w for _, w in entries))


def size_probability(dist: OffspringDistribution, n: int, method: str = "dwass") -> float:
    """``P(|T| = n)`` by enumeration, by the random-walk formula
    ``P(S_n = n - 1) / n``, or by its local-limit approximation."""
    check_feasible(dist, n)
    if method == "enumerate":
        return weighted_tree_table(dist, n).total
    if method == "dwass":
        return sum_law(dist, n, n - 1).prob(n - 1) / n
    if method == "clt":
        return dist.span / (math.sqrt(2 * math.pi * dist.sigma2)) * n ** -1.5
    raise ValueError(f"unknown method {method!r}")


def forest_probability(dist: OffspringDistribution, m: int, n: int) -> float:
    """``P(|T_1| + ... + |T_m| = n)`` for independent trees, as ``(m/n) P(S_n = n - m)``."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if n < m:
        return 0.0
    return m / n * sum_law(dist, n, n - m).prob(n - m)


def conditioned_law(dist: OffspringDistribution, n: int) -> WeightedTreeTable:
    """Exact law of the tree conditioned on ``n`` nodes (weights sum to 1)."""
    table = weighted_tree_table(dist, n)
    if table.total <= 0:
        raise InfeasibleSizeError(f"P(|T| = {n}) = 0 for {dist.name}")
    entries = [(t, w / table.total) for t, w in table.entries]
    return WeightedTreeTable(n, entries, table.total, normalized=True)


def _statistic(tree: PlaneTree, statistic: str, k: int | None) -> int:
    if statistic == "W":
        return level_profile(tree).width
    if statistic == "H":
        return level_profile(tree).height
    if statistic == "Zk":
        z = level_profile(tree).z
        return int(z[k]) if k < len(z) else 0
    if statistic == "maxQ":
        return queue_path(tree, "bfs").max
    raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")


def exact_statistic_law(
    dist: OffspringDistribution, n: int, statistic: str, k: int | None = None
) -> dict[int, float]:
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")
    if statistic == "Zk" and (k is None or k < 0):
        raise ValueError("statistic Zk needs a level k >= 0")
    law: dict[int, float] = defaultdict(float)
    for t, w in conditioned_law(dist, n).entries:
        if w > 0:
            law[_statistic(t, statistic, k)] += w
    return dict(sorted(law.items()))


def exact_queue_path_law(dist: OffspringDistribution, n: int, order: str) -> dict[tuple[int, ...], float]:
    law: dict[tuple[int, ...], float] = defaultdict(float)
    for t, w in conditioned_law(dist, n).entries:
        if w > 0:
            law[tuple(queue_path(t, order).q.tolist())] += w
    return dict(law)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in keys)


# forward expansion of the size-biased construction

Law = dict[tuple[int, ...], float]


def _gw_upto(dist: OffspringDistribution, budget: int) -> Law:
    """Law of the Galton-Watson tree restricted to outcomes of size <= budget,
    generated from the branching rule."""
    cache: dict[int, Law] = {}

    def trees(b: int) -> Law:
        if b in cache:
            return cache[b]
        out: Law = defaultdict(float)
        for m in range(0, min(dist.kmax, b - 1) + 1):
            pm = dist.prob(m)
            if pm == 0.0:
                continue
            for body, w in _forest_of([trees] * m, b - 1).items():
                out[(m,) + body] += pm * w
        cache[b] = dict(out)
        return cache[b]

    return trees(budget)


def _forest_of(parts, budget: int) -> Law:
    """Concatenate independent subtree laws, keeping total size <= budget.

    ``parts`` are callables ``b -> law of outcomes with size <= b``.
    """
    acc: Law = {(): 1.0}
    for i, part in enumerate(parts):
        remaining = len(parts) - i - 1  # each later subtree needs >= 1 node
        nxt: Law = defaultdict(float)
        for body, w in acc.items():
            room = budget - len(body) - remaining
            if room < 1:
                continue
            for sub, ws in part(room).items():
                nxt[body + sub] += w * ws
        acc = nxt
    return dict(acc)


def size_biased_law(dist: OffspringDistribution, k: int, budget: int) -> Law:
    """Law of the size-biased tree with ``k`` mutant generations, restricted
    to outcomes with at most ``budget`` nodes, by expanding every mutant
    degree and every heir position."""
    hat = size_biased(dist)
    gw_cache: dict[int, Law] = {}

    def gw(b: int) -> Law:
        if b not in gw_cache:
            gw_cache[b] = _gw_upto(dist, b) if b >= 1 else {}
        return gw_cache[b]

    def mutant(j: int, b: int) -> Law:
        out: Law = defaultdict(float)
        for m in range(1, min(hat.kmax, b - 1) + 1):
            pm = hat.prob(m)
            if pm == 0.0:
                continue
            below = (lambda bb, j=j: mutant(j - 1, bb)) if j > 1 else gw
            for heir in range(m):
                parts = [below if i == heir else gw for i in range(m)]
                for body, w in _forest_of(parts, b - 1).items():
                    out[(m,) + body] += pm / m * w
        return dict(out)

    return mutant(k, budget)


def size_biased_exact_check(dist: OffspringDistribution, k: int, n_small: int) -> dict:
    """Compare, tree by tree for every size <= n_small, the expanded law of the
    size-biased tree against ``Z_k(T) P(T = T)``.  Also compares the size
    probabilities ``P(|hat T| = n)`` against ``sum Z_k(T) P(T = T)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if n_small > 10:
        raise ValueError("n_small must be <= 10")
    lhs = size_biased_law(dist, k, n_small)
    max_err = 0.0
    by_size = []
    for n in range(1, n_small + 1):
        size_lhs = 0.0
        size_rhs = 0.0
        for t in enumerate_plane_trees(n):
            z = level_profile(t).z
            zk = int(z[k]) if k < len(z) else 0
            rhs = zk * tree_weight(dist, t)
            left = lhs.get(t.key, 0.0)
            max_err = max(max_err, abs(left - rhs))
            size_lhs += left
            size_rhs += rhs
        by_size.append({"n": n, "lhs": size_lhs, "rhs": size_rhs, "abs_err": abs(size_lhs - size_rhs)})
    return {
        "check": "em",
        "params": {"dist": dist.name, "k": k, "n_small": n_small},
        "max_abs_err": max_err,
        "by_size": by_size,
    }


def verification_row(check: str, params: dict, lhs: float, rhs: float, tol: float = 1e-12) -> dict:
    err = abs(lhs - rhs)
    return {"check": check, "params": params, "lhs": lhs, "rhs": rhs, "abs_err": err, "pass": err <= tol}


# cycle lemma census


def degree_sequences(support, n: int):
    """All length-``n`` sequences over ``support`` with sum ``n - 1``."""
    atoms = sorted(int(a) for a in support if a <= n - 1)

    def rec(prefix: list[int], left: int, slots: int):
        if slots == 0:
            if left == 0:
                yield tuple(prefix)
            return
        for a in atoms:
            if a > left:
                break
            prefix.append(a)
            yield from rec(prefix, left - a, slots - 1)
            prefix.pop()

    yield from rec([], n - 1, n)


def valid_rotations(seq) -> list[int]:
    """Shifts ``t`` for which ``seq[t:] + seq[:t]`` is an excursion."""
    n = len(seq)
    out = []
    for t in range(n):
        walk = 0
        ok = True
        for i in range(n):
            walk += seq[(t + i) % n] - 1
            if i < n - 1 and walk < 0:
                ok = False
                break
        if ok and walk == -1:
            out.append(t)
    return out


def rotation_census(support, n: int) -> dict:
    """Check every rotation class of sequences over ``support`` with sum ``n - 1``
    for exactly one excursion rotation."""
    seen = set()
    classes = 0
    exceptions = []
    for seq in degree_sequences(support, n):
        canon = min(seq[t:] + seq[:t] for t in range(n))
        if canon in seen:
            continue
        seen.add(canon)
        classes += 1
        if len(valid_rotations(canon)) != 1:
            exceptions.append(canon)
    return {"n": n, "classes": classes, "exceptions": exceptions}


# verification suites

SUITES = ("dwass", "forest", "rotation", "tilting", "em", "identity")


def _feasible_sizes(dist: OffspringDistribution, nmax: int) -> list[int]:
    return [n for n in range(1, nmax + 1) if is_feasible(dist, n)]


def verify_suite(suite: str, dist: OffspringDistribution, nmax: int = 10, tol: float = 1e-12) -> list[dict]:
    """Rows ``{check, params, lhs, rhs, abs_err, pass}`` for one oracle suite."""
    rows = []
    name = dist.name
    if suite == "dwass":
        for n in _feasible_sizes(dist, min(nmax, ENUM_MAX)):
            rows.append(verification_row("dwass", {"dist": name, "n": n},
                                         size_probability(dist, n, "enumerate"),
                                         size_probability(dist, n, "dwass"), tol))
    elif suite == "forest":
        nmax = min(nmax, ENUM_MAX)
        single = np.zeros(nmax + 1)
        for n in _feasible_sizes(dist, nmax):
            single[n] = weighted_tree_table(dist, n).total
        conv = single.copy()
        for m in range(1, 5):
            if m > 1:
                conv = np.convolve(conv, single)[: nmax + 1]
            for n in range(1, nmax + 1):
                rows.append(verification_row("forest", {"dist": name, "m": m, "n": n},
                                             forest_probability(dist, m, n), float(conv[n]), tol))
    elif suite == "rotation":
        for n in range(1, min(nmax, 8) + 1):
            c = rotation_census(dist.support, n)
            rows.append(verification_row("rotation", {"dist": name, "n": n, "classes": c["classes"]},
                                         float(len(c["exceptions"])), 0.0, 0.0))
    elif suite == "tilting":
        variants = [tilt(dist, 0.5), tilt(dist, 2.0)]
        if not dist.is_critical:
            variants.append(tilt_to_critical(dist)[1])
        for n in _feasible_sizes(dist, min(nmax, 8)):
            base = conditioned_law(dist, n).as_dict()
            for other in variants:
                law = conditioned_law(other, n).as_dict()
                err = max(abs(base[key] - law[key]) for key in base)
                rows.append(verification_row("tilting", {"dist": name, "n": n, "tilted": other.name},
                                             0.0, err, tol))
    elif suite == "em":
        crit = dist if dist.is_critical else tilt_to_critical(dist)[1]
        for k in (1, 2, 3):
            rep = size_biased_exact_check(crit, k, min(nmax, 8))
            rows.append(verification_row("em", {"dist": crit.name, "k": k, "n_small": min(nmax, 8)},
                                         rep["max_abs_err"], 0.0, tol))
    elif suite == "identity":
        for n in _feasible_sizes(dist, min(nmax, 8)):
            bfs = exact_queue_path_law(dist, n, "bfs")
            for order in ("dfs-lex", "dfs-revlex"):
                tv = total_variation(bfs, exact_queue_path_law(dist, n, order))
                rows.append(verification_row("identity", {"dist": name, "n": n, "order": order},
                                             tv, 0.0, tol))
            bad = sum(check_invariants(t).total for t in enumerate_plane_trees(n))
            rows.append(verification_row("invariants", {"dist": name, "n": n}, float(bad), 0.0, 0.0))
    else:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    return rows
