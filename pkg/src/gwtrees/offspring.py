"""Offspring distributions: construction, tilting, size-biasing, sampling and
exact laws of partial sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable

import numpy as np

PMF_TOL = 1e-12
CRITICAL_TOL = 1e-10
GEOMETRIC_TAIL = 1e-15
POISSON_TAIL = 1e-14
BUILTINS = ("geometric", "poisson", "binary", "uniform012")


class DistributionError(ValueError):
    pass


class InfeasibleSizeError(ValueError):
    """No tree with the requested number of nodes has positive probability."""


class AliasTable:
    """Walker/Vose alias table over atoms ``0..len(p)-1``."""

    def __init__(self, p: np.ndarray):
        p = np.asarray(p, dtype=float)
        k = len(p)
        scaled = p / p.sum() * k
        prob = np.ones(k)
        alias = np.arange(k)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] = scaled[g] + scaled[s] - 1.0
            (small if scaled[g] < 1.0 else large).append(g)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias

    def draw(self, rng: np.random.Generator, size=None):
        i = rng.integers(len(self.prob), size=size)
        u = rng.random(size=size)
        return np.where(u < self.prob[i], i, self.alias[i])


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """A law on the non-negative integers stored densely: ``pmf[k] = P(X = k)``.

    The stored pmf may carry a truncation deficit of at most ``PMF_TOL``.
    """

    pmf: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        pmf = np.array(self.pmf, dtype=float)
        if pmf.ndim != 1 or len(pmf) == 0:
            raise DistributionError("pmf must be a non-empty 1-d array")
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise DistributionError("pmf entries must be finite and non-negative")
        if abs(pmf.sum() - 1.0) > PMF_TOL:
            raise DistributionError(f"pmf sums to {pmf.sum()!r}, not 1")
        nz = np.flatnonzero(pmf)
        pmf = pmf[: nz[-1] + 1]
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def kmax(self) -> int:
        return len(self.pmf) - 1

    @cached_property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.pmf)

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    @property
    def sigma2(self) -> float:
        k = np.arange(len(self.pmf))
        return float(np.dot((k - self.mean) ** 2, self.pmf))

    @property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - float(self.pmf.sum()))

    def prob(self, k: int) -> float:
        return float(self.pmf[k]) if 0 <= k < len(self.pmf) else 0.0

    @cached_property
    def _alias(self) -> AliasTable:
        return AliasTable(self.pmf)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law; O(1) per draw via an alias table."""
        out = self._alias.draw(rng, size)
        return int(out) if size is None else out

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, support={self.support.tolist()[:8]}...)"


@dataclass(frozen=True, eq=False, repr=False)
class OffspringDistribution(DiscreteLaw):
    """Offspring law of a Galton-Watson tree.

    Requires at least two atoms, so that ``sigma2 > 0`` and ``p1 < 1``.
    Criticality is a property, not a requirement: tilting and the exact
    oracles also operate on non-critical laws.
    """

    def __post_init__(self):
        super().__post_init__()
        if len(self.support) < 2:
            raise DistributionError(
                "offspring law needs at least two atoms (sigma2 = 0 is excluded)"
            )

    @cached_property
    def span(self) -> int:
        pos = [int(k) for k in self.support if k > 0]
        return reduce(math.gcd, pos, 0)

    @property
    def p1(self) -> float:
        return self.prob(1)

    @property
    def q1(self) -> float:
        return 1.0 - self.p1

    @property
    def is_critical(self) -> bool:
        return abs(self.mean - 1.0) <= CRITICAL_TOL

    @cached_property
    def atom_probs(self) -> np.ndarray:
        """Probabilities of ``support`` renormalized to sum to 1 (for multinomials)."""
        p = self.pmf[self.support]
        return p / p.sum()


def from_pmf(weights: Iterable[tuple[int, float]], name: str = "custom") -> OffspringDistribution:
    """Build a normalized offspring law from ``(k, weight)`` pairs.

    Repeated atoms are summed.
    """
    pairs = [(int(k), float(w)) for k, w in weights]
    if not pairs:
        raise DistributionError("no atoms given")
    for k, w in pairs:
        if k < 0:
            raise DistributionError(f"negative atom {k}")
        if w < 0 or not math.isfinite(w):
            raise DistributionError(f"invalid weight {w} at atom {k}")
    total = math.fsum(w for _, w in pairs)
    if total <= 0:
        raise DistributionError("all weights are zero")
    pmf = np.zeros(max(k for k, _ in pairs) + 1)
    for k, w in pairs:
        pmf[k] += w
    return OffspringDistribution(pmf / total, name=name)


def builtin(name: str, param: float | None = None) -> OffspringDistribution:
    """Standard offspring laws: geometric(p), poisson(lam), binary, uniform012.

    Unbounded laws are truncated; the stored pmf keeps its exact atom values
    and carries the truncated tail as a deficit.
    """
    if name == "geometric":
        p = 0.5 if param is None else float(param)
        if not 0.0 < p < 1.0:
            raise DistributionError(f"geometric parameter must lie in (0, 1), got {p}")
        # tail mass beyond K is (1-p)^(K+1)
        kmax = max(1, math.ceil(math.log(GEOMETRIC_TAIL) / math.log1p(-p)) - 1)
        k = np.arange(kmax + 1)
        return OffspringDistribution(p * (1.0 - p) ** k, name=f"geometric:{p:g}")
    if name == "poisson":
        lam = 1.0 if param is None else float(param)
        if lam <= 0:
            raise DistributionError(f"poisson parameter must be positive, got {lam}")
        terms = [math.exp(-lam)]
        while 1.0 - math.fsum(terms) > POISSON_TAIL or len(terms) <= lam:
            terms.append(terms[-1] * lam / len(terms))
        return OffspringDistribution(np.array(terms), name=f"poisson:{lam:g}")
    if name == "binary":
        return OffspringDistribution(np.array([0.5, 0.0, 0.5]), name="binary")
    if name == "uniform012":
        return OffspringDistribution(np.full(3, 1.0 / 3.0), name="uniform012")
    raise DistributionError(f"unknown distribution {name!r}; expected one of {BUILTINS}")


def _tilted(pmf: np.ndarray, log_a: float) -> np.ndarray:
    k = np.arange(len(pmf))
    with np.errstate(divide="ignore"):
        logw = np.where(pmf > 0, np.log(pmf) + k * log_a, -np.inf)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def _tilted_mean(pmf: np.ndarray, log_a: float) -> float:
    return float(np.dot(np.arange(len(pmf)), _tilted(pmf, log_a)))


def tilt(dist: OffspringDistribution, a: float) -> OffspringDistribution:
    """The law ``P(xi' = k) = c a^k P(xi = k)``."""
    if not a > 0:
        raise DistributionError("tilting parameter must be positive")
    return OffspringDistribution(_tilted(dist.pmf, math.log(a)), name=f"{dist.name}*{a:g}")


def tilt_to_critical(dist: OffspringDistribution, tol: float = 1e-12) -> tuple[float, OffspringDistribution]:
    """Find ``a > 0`` with ``E[xi a^xi] = E[a^xi]`` and return ``(a, tilted law)``.

    Bisects on ``log a`` over ``[2**-40, 2**40]``; the tilted mean is
    increasing in ``a``.
    """
    if dist.is_critical:
        return 1.0, dist
    lo, hi = -40 * math.log(2), 40 * math.log(2)
    m_lo, m_hi = _tilted_mean(dist.pmf, lo), _tilted_mean(dist.pmf, hi)
    if not m_lo < 1.0 < m_hi:
        raise DistributionError(
            f"no critical tilt: achievable tilted means lie in ({m_lo:.6g}, {m_hi:.6g})"
        )
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        m = _tilted_mean(dist.pmf, mid)
        if abs(m - 1.0) <= tol:
            break
        if m < 1.0:
            lo = mid
        else:
            hi = mid
    tilted = OffspringDistribution(_tilted(dist.pmf, mid), name=f"{dist.name}+tilt")
    return math.exp(mid), tilted


def size_biased(dist: OffspringDistribution) -> DiscreteLaw:
    """The law ``P(X = m) = m P(xi = m)`` on ``{1, 2, ...}``.

    Divided by the mean so truncation deficits do not leak into the total.
    """
    if not dist.is_critical:
        raise DistributionError(f"size-biasing needs a critical law (mean = {dist.mean!r})")
    return DiscreteLaw(np.arange(len(dist.pmf)) * dist.pmf / dist.mean, name=f"{dist.name}^")


@dataclass(frozen=True)
class SumLaw:
    """Exact law of ``S_n``, truncated: ``pmf[m] = P(S_n = m)`` for ``m <= m_max``."""

    n: int
    pmf: np.ndarray = field(repr=False)

    def prob(self, m: int) -> float:
        return float(self.pmf[m]) if 0 <= m < len(self.pmf) else 0.0

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - float(self.pmf.sum()))


def sum_law(dist: DiscreteLaw, n: int, m_max: int) -> SumLaw:
    """Law of the sum of ``n`` i.i.d. copies by ``n - 1`` truncated convolutions.

    Truncating above ``m_max`` after each step leaves entries ``<= m_max`` exact.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    base = np.zeros(m_max + 1)
    top = min(len(dist.pmf), m_max + 1)
    base[:top] = dist.pmf[:top]
    acc = base.copy()
    for _ in range(n - 1):
        acc = np.convolve(acc, base[:top])[: m_max + 1]
    return SumLaw(n, acc)


def _min_positive_atoms(atoms: list[int], target: int) -> float:
    """Fewest positive atoms (with repetition) summing to ``target``; inf if none."""
    best = [0.0] + [math.inf] * target
    for m in range(1, target + 1):
        b = math.inf
        for a in atoms:
            if a <= m and best[m - a] + 1 < b:
                b = best[m - a] + 1
        best[m] = b
    return best[target]


def is_feasible(dist: OffspringDistribution, n: int) -> bool:
    """Whether ``P(|T| = n) > 0``, i.e. ``P(S_n = n - 1) > 0``.

    Decided on the support: ``n - 1`` must be a sum of at most ``n`` positive
    atoms, the remaining draws being zeros.
    """
    if n < 1 or (n - 1) % dist.span:
        return False
    if dist.prob(0) == 0.0:
        return False
    pos = [int(k) for k in dist.support if k > 0]
    if 1 in pos:
        return True
    return _min_positive_atoms(pos, n - 1) <= n


def check_feasible(dist: OffspringDistribution, n: int) -> None:
    if not is_feasible(dist, n):
        if n >= 1 and (n - 1) % dist.span:
            raise InfeasibleSizeError(
                f"n = {n} is infeasible for {dist.name}: need n = 1 mod span {dist.span}"
            )
        raise InfeasibleSizeError(f"n = {n} is infeasible for {dist.name}: P(|T| = n) = 0")
