"""Monte Carlo drivers for width, height and level sizes of conditioned trees.

Randomness: one ``numpy`` generator per worker, spawned from
``SeedSequence(seed)``; worker ``w`` always handles the same contiguous block
of samples, and results are concatenated in worker order, so a run is
bit-reproducible for fixed ``(seed, workers)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats as sps

from .limits import limit_moment
from .offspring import OffspringDistribution, check_feasible
from .oracle import size_probability
from .stats import batch_max_queue, batch_profiles, check_invariants
from .treegen import sample_conditioned_excursions, size_biased_sizes, tree_from_degrees

DEFAULT_SEED = 0x47573031  # ASCII "GW01"
GRID_STEPS = (1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5)
MIN_EXCEEDANCES = 25
CHECK_RATE = 0.01
_BATCH_CELLS = 1 << 22


class UnderSampledError(ValueError):
    pass


class FitError(ValueError):
    pass


class InvariantViolation(AssertionError):
    pass


def split_counts(N: int, workers: int) -> list[int]:
    base, extra = divmod(N, workers)
    return [base + (w < extra) for w in range(workers)]


def _map_workers(fn, N: int, seed, workers: int, *args) -> list:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seqs = root.spawn(workers)
    counts = split_counts(N, workers)
    jobs = [(*args, c, s) for c, s in zip(counts, seqs)]
    if workers == 1:
        return [fn(*jobs[0])]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, *zip(*jobs)))


@dataclass
class TreeSample:
    """Per-tree statistics of ``N`` conditioned trees."""

    n: int
    width: np.ndarray
    height: np.ndarray
    max_queue: np.ndarray
    ks: tuple[int, ...]
    zk: np.ndarray  # shape (N, len(ks))
    checked: int = 0

    def statistic(self, name: str, k: int | None = None) -> np.ndarray:
        if name == "W":
            return self.width
        if name == "H":
            return self.height
        if name == "maxQ":
            return self.max_queue
        if name == "Zk":
            return self.zk[:, self.ks.index(k)]
        raise ValueError(f"unknown statistic {name!r}")


def _sample_worker(dist, n, ks, check_rate, count, seq) -> TreeSample:
    rng = np.random.default_rng(seq)
    batch = max(1, min(count, _BATCH_CELLS // n)) if count else 1
    parts = []
    checked = 0
    done = 0
    while done < count:
        m = min(batch, count - done)
        rows = sample_conditioned_excursions(dist, n, m, rng)
        prof = batch_profiles(rows)
        width = prof.max(axis=1)
        height = (prof > 0).sum(axis=1) - 1
        maxq = batch_max_queue(rows)
        if n >= 2 and np.any(width * height < n - 1):
            raise InvariantViolation("W * H < n - 1")
        if np.any(maxq < width):
            raise InvariantViolation("max breadth-first queue < W")
        for row in rows[: math.ceil(check_rate * m)]:
            if check_invariants(tree_from_degrees(row, "bfs")).total:
                raise InvariantViolation("per-node identity failed")
            checked += 1
        zk = np.zeros((m, len(ks)), dtype=np.int64)
        for j, k in enumerate(ks):
            if k < prof.shape[1]:
                zk[:, j] = prof[:, k]
        parts.append((width, height, maxq, zk))
        done += m
    if not parts:
        empty = np.empty(0, dtype=np.int64)
        return TreeSample(n, empty, empty, empty, tuple(ks), np.empty((0, len(ks)), dtype=np.int64))
    w, h, q, z = (np.concatenate(x) for x in zip(*parts))
    return TreeSample(n, w, h, q, tuple(ks), z, checked)


def sample_trees(
    dist: OffspringDistribution,
    n: int,
    N: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    ks=(),
    check_rate: float = CHECK_RATE,
) -> TreeSample:
    """Statistics of ``N`` conditioned trees with ``n`` nodes.

    Every tree is checked for ``W H >= n - 1`` and ``max Q >= W``; a fraction
    ``check_rate`` also gets the per-node path identities.
    """
    check_feasible(dist, n)
    ks = tuple(int(k) for k in ks)
    parts = _map_workers(_sample_worker, N, seed, workers, dist, n, ks, check_rate)
    return TreeSample(
        n,
        np.concatenate([p.width for p in parts]),
        np.concatenate([p.height for p in parts]),
        np.concatenate([p.max_queue for p in parts]),
        ks,
        np.concatenate([p.zk for p in parts]),
        sum(p.checked for p in parts),
    )


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = sps.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class SubGaussianFit:
    C: float
    c: float
    residuals: list[float]
    rms: float
    points: int


@dataclass
class TailReport:
    statistic: str
    n: int
    N: int
    grid: list[float]
    survival: list[float]
    ci_lo: list[float]
    ci_hi: list[float]
    exceedances: list[int]
    seed: int
    workers: int = 1
    k: int | None = None
    dist: str = ""
    ceiling: float | None = None  # reported, never asserted
    fit: SubGaussianFit | None = None
    fit_error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def default_grid(n: int) -> list[float]:
    return [s * math.sqrt(n) for s in GRID_STEPS]


def fit_subgaussian(report: TailReport, min_exceedances: int = MIN_EXCEEDANCES) -> SubGaussianFit:
    """Least-squares fit of ``log survival = log C - c x^2 / n`` over grid
    points with at least ``min_exceedances`` exceedances."""
    x = np.asarray(report.grid, dtype=float)
    s = np.asarray(report.survival, dtype=float)
    ex = np.asarray(report.exceedances)
    use = (ex >= min_exceedances) & (s > 0)
    if use.sum() < 3:
        raise UnderSampledError(
            f"only {int(use.sum())} grid points with >= {min_exceedances} exceedances; need 3"
        )
    u = x[use] ** 2 / report.n
    y = np.log(s[use])
    slope, intercept = np.polyfit(u, y, 1)
    c = -float(slope)
    if not c > 0:
        raise FitError(f"fitted decay rate {c:.4g} is not positive")
    resid = y - (intercept + slope * u)
    return SubGaussianFit(
        C=float(math.exp(intercept)),
        c=c,
        residuals=resid.tolist(),
        rms=float(math.sqrt(np.mean(resid**2))),
        points=int(use.sum()),
    )


def tail_report(
    values: np.ndarray,
    n: int,
    grid,
    statistic: str,
    seed: int,
    workers: int = 1,
    k: int | None = None,
    dist: OffspringDistribution | None = None,
) -> TailReport:
    values = np.asarray(values)
    N = len(values)
    grid = [float(x) for x in grid]
    sorted_vals = np.sort(values)
    exceed = [int(N - np.searchsorted(sorted_vals, x, side="left")) for x in grid]
    cis = [wilson_interval(e, N) for e in exceed]
    ceiling = None
    if dist is not None and statistic == "W":
        ceiling = 2 / dist.sigma2
    elif dist is not None and statistic == "H":
        ceiling = dist.sigma2 / 2
    rep = TailReport(
        statistic=statistic,
        n=n,
        N=N,
        grid=grid,
        survival=[e / N for e in exceed],
        ci_lo=[lo for lo, _ in cis],
        ci_hi=[hi for _, hi in cis],
        exceedances=exceed,
        seed=seed,
        workers=workers,
        k=k,
        dist=dist.name if dist is not None else "",
        ceiling=ceiling,
    )
    try:
        rep.fit = fit_subgaussian(rep)
    except (UnderSampledError, FitError) as exc:
        rep.fit_error = str(exc)
    return rep


def estimate_tail(
    dist: OffspringDistribution,
    n: int,
    N: int,
    statistic: str = "W",
    grid=None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    k: int | None = None,
) -> TailReport:
    """Empirical survival ``P(stat >= x)`` with Wilson 95% intervals, plus a
    sub-Gaussian fit when the grid is well sampled."""
    if statistic not in ("W", "H", "Zk"):
        raise ValueError(f"statistic must be W, H or Zk, got {statistic!r}")
    if statistic == "Zk" and (k is None or k < 1):
        raise ValueError("statistic Zk needs k >= 1")
    grid = default_grid(n) if grid is None else sorted(grid)
    ks = (k,) if statistic == "Zk" else ()
    sample = sample_trees(dist, n, N, seed=seed, workers=workers, ks=ks)
    return tail_report(sample.statistic(statistic, k), n, grid, statistic, seed, workers, k, dist)


@dataclass
class MomentReport:
    statistic: str
    r: float
    n: int
    N: int
    estimate: float
    stderr: float
    target: float | None
    normalized: bool = True  # estimate is E[stat^r] / n^(r/2)
    k: int | None = None


def moment_scan(
    dist: OffspringDistribution,
    statistic: str,
    r_list,
    n: int,
    N: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    k: int | None = None,
) -> list[MomentReport]:
    """``E[stat^r] / n^(r/2)`` with standard errors, next to the limit value.

    For ``Zk`` the raw moment is reported; its target (``r = 1`` only) is
    ``1 + k sigma^2``.
    """
    ks = (k,) if statistic == "Zk" else ()
    sample = sample_trees(dist, n, N, seed=seed, workers=workers, ks=ks)
    vals = sample.statistic(statistic, k).astype(float)
    sigma = math.sqrt(dist.sigma2)
    out = []
    for r in r_list:
        if statistic == "Zk":
            powr = vals**r
            target = 1 + k * dist.sigma2 if r == 1 else None
            normalized = False
        else:
            powr = (vals / math.sqrt(n)) ** r
            target = limit_moment(statistic, r, sigma)
            normalized = True
        out.append(
            MomentReport(
                statistic=statistic,
                r=r,
                n=n,
                N=N,
                estimate=float(powr.mean()),
                stderr=float(powr.std(ddof=1) / math.sqrt(N)),
                target=target,
                normalized=normalized,
                k=k,
            )
        )
    return out


@dataclass
class ZkProfile:
    n: int
    N: int
    k: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    seed: int = DEFAULT_SEED


def zk_profile(
    dist: OffspringDistribution, n: int, N: int, k_max: int, seed: int = DEFAULT_SEED, workers: int = 1
) -> ZkProfile:
    """Mean level sizes ``E Z_k`` for ``k = 1..k_max``."""
    if not 1 <= k_max <= n:
        raise ValueError("need 1 <= k_max <= n")
    ks = tuple(range(1, k_max + 1))
    z = sample_trees(dist, n, N, seed=seed, workers=workers, ks=ks).zk.astype(float)
    return ZkProfile(n, N, np.array(ks), z.mean(axis=0), z.std(axis=0, ddof=1) / math.sqrt(N), seed)


@dataclass
class SizeBiasReport:
    n: int
    k: int
    N: int
    lhs: float  # mean Z_k over conditioned trees
    lhs_se: float
    hits: int  # size-biased draws with exactly n nodes
    p_size: float  # exact P(|T| = n)
    rhs: float
    rhs_se: float
    combined_se: float
    seed: int = DEFAULT_SEED

    @property
    def z_score(self) -> float:
        return abs(self.lhs - self.rhs) / self.combined_se if self.combined_se > 0 else (
            0.0 if self.lhs == self.rhs else math.inf)

    @property
    def passed(self) -> bool:
        return self.z_score <= 3.0


def sizebias_ratio_check(
    dist: OffspringDistribution, n: int, k: int, N: int, seed: int = DEFAULT_SEED, workers: int = 1
) -> SizeBiasReport:
    """Compare ``E Z_k`` of the conditioned tree with
    ``P(|hat T| = n) / P(|T| = n)``, estimating the numerator from ``N``
    size-biased draws and the denominator exactly."""
    check_feasible(dist, n)
    if k < 1:
        raise ValueError("k must be >= 1")
    left_seed, right_seed = np.random.SeedSequence(seed).spawn(2)
    z = sample_trees(dist, n, N, seed=left_seed, workers=workers, ks=(k,)).zk[:, 0].astype(float)
    lhs, lhs_se = float(z.mean()), float(z.std(ddof=1) / math.sqrt(N))
    hits = sum(_map_workers(_size_biased_worker, N, right_seed, workers, dist, n, k))
    p_hat = hits / N
    p_size = size_probability(dist, n, "dwass")
    se_p = math.sqrt(p_hat * (1 - p_hat) / N)
    rhs, rhs_se = p_hat / p_size, se_p / p_size
    return SizeBiasReport(n, k, N, lhs, lhs_se, hits, p_size, rhs, rhs_se,
                          math.hypot(lhs_se, rhs_se), seed)


def _size_biased_worker(dist, n, k, count, seq) -> int:
    rng = np.random.default_rng(seq)
    # only whether the size equals n matters, so the walk is cut at n nodes
    sizes = size_biased_sizes(dist, k, count, rng, node_cap=n)
    return int(np.count_nonzero(sizes == n))


@dataclass
class ProductBoundReport:
    n: int
    N: int
    violations: int
    tight: int  # trees with W H = n - 1

    @property
    def passed(self) -> bool:
        return self.violations == 0


def product_bound_scan(
    dist: OffspringDistribution, n: int, N: int, seed: int = DEFAULT_SEED, workers: int = 1
) -> ProductBoundReport:
    if n < 2:
        raise ValueError("n must be >= 2")
    s = sample_trees(dist, n, N, seed=seed, workers=workers, check_rate=0.0)
    prod = s.width * s.height
    return ProductBoundReport(n, N, int(np.count_nonzero(prod < n - 1)), int(np.count_nonzero(prod == n - 1)))


@dataclass
class InvariantReport:
    n: int
    N: int
    nodes: int
    violations: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())


def invariant_scan(dist: OffspringDistribution, n: int, N: int, seed: int = DEFAULT_SEED) -> InvariantReport:
    """Check every per-tree and per-node identity on ``N`` sampled trees."""
    rng = np.random.default_rng(seed)
    rows = sample_conditioned_excursions(dist, n, N, rng)
    totals = {"spine_count": 0, "dichotomy": 0, "product": 0, "queue_width": 0}
    nodes = 0
    for row in rows:
        c = check_invariants(tree_from_degrees(row, "dfs"))
        nodes += c.nodes
        for name in totals:
            totals[name] += getattr(c, name)
    return InvariantReport(n, N, nodes, totals)
