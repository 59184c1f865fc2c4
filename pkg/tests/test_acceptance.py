"""End-to-end acceptance checks at their stated tolerances.

Each test records its measured values; the terminal summary prints one
PASS/FAIL line per check.  The Monte Carlo checks at n = 10^4 take a few
minutes in total on one core.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest
from scipy import stats as sps

from gwtrees.experiments import (
    GRID_STEPS,
    TailReport,
    fit_subgaussian,
    invariant_scan,
    sample_trees,
    sizebias_ratio_check,
    tail_report,
    zk_profile,
)
from gwtrees.limits import (
    limit_cdf,
    tail_lower_bounds_check,
    theta_cdf_direct,
    theta_cdf_pi,
    theta_mean_quad,
    theta_second_moment_quad,
)
from gwtrees.offspring import builtin, tilt_to_critical
from gwtrees.oracle import (
    conditioned_law,
    enumerate_plane_trees,
    exact_queue_path_law,
    forest_probability,
    rotation_census,
    size_biased_exact_check,
    size_probability,
    total_variation,
    weighted_tree_table,
)
from gwtrees.treegen import sample_conditioned_excursions

SEED = 0x47573031
BUILTINS = [builtin("geometric", 0.5), builtin("binary"), builtin("uniform012"), builtin("poisson", 1.0)]


@pytest.fixture(scope="module")
def geo():
    return builtin("geometric", 0.5)


@pytest.fixture(scope="module")
def big_sample(geo):
    """20 000 trees with 10^4 nodes, shared by the moment and cdf checks."""
    return sample_trees(geo, 10_000, 20_000, seed=SEED)


def test_c01_dwass_identity(geo, criterion):
    """C1 size law equals the random-walk formula (enumeration, n <= 10/11)"""
    t0 = time.perf_counter()
    err = 0.0
    for n in range(1, 11):
        err = max(err, abs(size_probability(geo, n, "enumerate") - size_probability(geo, n, "dwass")))
    binary = builtin("binary")
    for n in range(1, 12, 2):
        err = max(err, abs(size_probability(binary, n, "enumerate") - size_probability(binary, n, "dwass")))
    spot = (size_probability(geo, 3, "dwass"), size_probability(binary, 5, "dwass"))
    elapsed = time.perf_counter() - t0
    criterion += [f"max err {err:.1e}", f"spot {spot[0]}, {spot[1]}", f"{elapsed:.2f}s"]
    assert err <= 1e-12
    assert all(abs(s - 1 / 16) <= 1e-15 for s in spot)
    assert elapsed < 1.0


@pytest.mark.parametrize("dist", BUILTINS, ids=lambda d: d.name)
def test_c02_forest_identity(dist, criterion):
    """C2 forest size law equals the m-fold convolution (m <= 4, n <= 10)"""
    single = np.zeros(11)
    for n in range(1, 11):
        single[n] = weighted_tree_table(dist, n).total
    conv = single.copy()
    err = 0.0
    for m in range(1, 5):
        if m > 1:
            conv = np.convolve(conv, single)[:11]
        for n in range(1, 11):
            err = max(err, abs(forest_probability(dist, m, n) - conv[n]))
    criterion.append(f"{dist.name}: max err {err:.1e}")
    assert err <= 1e-12


def test_c03_cycle_lemma(criterion):
    """C3 exactly one excursion rotation per class (built-in supports, n <= 8)"""
    classes = 0
    exceptions = 0
    for dist in BUILTINS:
        for n in range(1, 9):
            c = rotation_census(dist.support, n)
            classes += c["classes"]
            exceptions += len(c["exceptions"])
    criterion += [f"{classes} classes", f"{exceptions} exceptions"]
    assert exceptions == 0 and classes > 0


def test_c04_sampler_law(geo, criterion):
    """C4 sampled 5-node trees are uniform over the 14 shapes"""
    t0 = time.perf_counter()
    N = 140_000
    rows = sample_conditioned_excursions(geo, 5, N, np.random.default_rng(SEED))
    counts = Counter(map(tuple, rows.tolist()))
    elapsed = time.perf_counter() - t0
    obs = np.array([counts[t.key] for t in enumerate_plane_trees(5)])
    p = sps.chisquare(obs).pvalue
    dev = np.max(np.abs(obs / (N / 14) - 1))
    criterion += [f"p = {p:.3f}", f"max rel dev {dev:.2%}", f"{elapsed:.2f}s"]
    assert obs.sum() == N
    assert p > 1e-3 and dev <= 0.05 and elapsed < 5.0


def test_c05_tilting_invariance(criterion):
    """C5 conditioned law at n = 5 unchanged by the critical tilt"""
    base = builtin("geometric", 1 / 3)
    a, crit = tilt_to_critical(base)
    before = conditioned_law(base, 5).as_dict()
    after = conditioned_law(crit, 5).as_dict()
    err = max(abs(before[k] - after[k]) for k in before)
    criterion += [f"a = {a:.12f}", f"max err {err:.1e}"]
    assert err <= 1e-12


@pytest.mark.slow
def test_c06_size_bias_identity(geo, criterion):
    """C6 size-biased tree law: exact dual computation and Monte Carlo ratio"""
    errs = [size_biased_exact_check(d, 1, 4)["max_abs_err"] for d in (geo, builtin("binary"))]
    rep = sizebias_ratio_check(geo, 401, 20, 100_000, seed=SEED)
    criterion += [f"exact err {max(errs):.1e}",
                  f"E Z_20 {rep.lhs:.3f} vs ratio {rep.rhs:.3f}, {rep.z_score:.2f} SE"]
    assert max(errs) <= 1e-12
    assert rep.z_score <= 3.0


@pytest.mark.slow
def test_c07_tree_invariants(geo, criterion):
    """C7 per-tree and per-node identities on 10^4 trees with 200 nodes"""
    rep = invariant_scan(geo, 200, 10_000, seed=SEED)
    criterion += [f"{rep.nodes} nodes", f"violations {rep.violations}"]
    assert rep.nodes == 200 * 10_000
    assert rep.passed


def test_c08_order_equivalence(geo, criterion):
    """C8 queue path law identical under bfs, dfs-lex and dfs-revlex (n <= 8)"""
    tv = 0.0
    for n in range(1, 9):
        bfs = exact_queue_path_law(geo, n, "bfs")
        for order in ("dfs-lex", "dfs-revlex"):
            tv = max(tv, total_variation(bfs, exact_queue_path_law(geo, n, order)))
    criterion.append(f"max TV {tv:.1e}")
    assert tv <= 1e-12


def test_c09_theta_numerics(criterion):
    """C9 theta law: series agreement, value at 1, moments, tail lower bounds"""
    xs = np.linspace(0.2, 5.0, 100)
    agree = max(abs(theta_cdf_direct(x) - theta_cdf_pi(x)) for x in xs)
    c1 = (theta_cdf_direct(1.0), theta_cdf_pi(1.0))
    m1 = abs(theta_mean_quad() - math.sqrt(math.pi))
    m2 = abs(theta_second_moment_quad() - math.pi**2 / 3)
    rows = tail_lower_bounds_check(np.linspace(0.1, 5.0, 50))
    bad = sum(not r["pass"] for r in rows)
    criterion += [f"series diff {agree:.1e}", f"cdf(1) = {c1[1]:.7f}", f"moment errs {m1:.1e}, {m2:.1e}",
                  f"{bad} bound failures"]
    assert agree <= 1e-10
    assert all(abs(c - 0.003620) <= 1e-5 for c in c1)
    assert m1 <= 1e-6 and m2 <= 1e-6
    assert bad == 0


@pytest.mark.slow
def test_c10_limit_moments(big_sample, criterion):
    """C10 scaled width and height moments within 10% of their limits (n = 10^4)"""
    n = big_sample.n
    w = big_sample.width / math.sqrt(n)
    h = big_sample.height / math.sqrt(n)
    ew, eh, ew2 = w.mean(), h.mean(), (w**2).mean()
    target1 = math.sqrt(math.pi)
    target2 = 2 * math.pi**2 / 6
    criterion += [f"E W/sqrt n {ew:.4f}", f"E H/sqrt n {eh:.4f}", f"E W^2/n {ew2:.4f} vs {target2:.4f}"]
    assert abs(ew / target1 - 1) <= 0.10
    assert abs(eh / target1 - 1) <= 0.10
    assert abs(ew2 / target2 - 1) <= 0.10


@pytest.mark.slow
def test_c11_limit_cdf(big_sample, criterion):
    """C11 KS distance of W/sqrt n to its limit law at most 0.05 (n = N = 10^4)"""
    n = big_sample.n
    x = np.sort(big_sample.width[:10_000] / math.sqrt(n))
    F = np.array([limit_cdf("W", v, math.sqrt(2)) for v in x])
    ecdf_hi = np.arange(1, len(x) + 1) / len(x)
    ecdf_lo = np.arange(len(x)) / len(x)
    ks = max(np.max(ecdf_hi - F), np.max(F - ecdf_lo))
    criterion.append(f"KS {ks:.4f}")
    assert ks <= 0.05


@pytest.mark.slow
def test_c12_subgaussian_shape(geo, criterion):
    """C12 fitted sub-Gaussian rates for width and height (n = 10^4, N = 10^5)"""
    n = 10_000
    s = sample_trees(geo, n, 100_000, seed=SEED + 1)
    grid = [g * math.sqrt(n) for g in GRID_STEPS]
    w = tail_report(s.width, n, grid, "W", SEED + 1, dist=geo)
    h = tail_report(s.height, n, grid, "H", SEED + 1, dist=geo)
    criterion += [f"width c {w.fit.c:.3f} (rms {w.fit.rms:.3f}, ceiling {w.ceiling:.2f})",
                  f"height c {h.fit.c:.3f} (ceiling {h.ceiling:.2f})"]
    assert 0.7 <= w.fit.c <= 1.1 and w.fit.rms <= 0.3
    lo, hi = 0.6 * geo.sigma2 / 2, 1.4 * geo.sigma2 / 2
    assert lo <= h.fit.c <= hi


@pytest.mark.slow
def test_c13_level_means(geo, criterion):
    """C13 E Z_1 near 1 + sigma^2 and the E Z_k curve rises, falls, and vanishes by 5 sqrt n"""
    z1 = sample_trees(geo, 2000, 20_000, seed=SEED, ks=(1,)).zk[:, 0]
    m1 = z1.mean()
    n = 2500
    kmax = 5 * int(math.sqrt(n))
    prof = zk_profile(geo, n, 3000, kmax, seed=SEED)
    mean, se = prof.mean, prof.stderr
    peak = int(np.argmax(mean))
    # consecutive differences against the wrong direction, in combined standard errors
    diff = np.diff(mean)
    dse = np.hypot(se[1:], se[:-1]) + 1e-12
    up_bad = np.max(np.r_[0, -diff[:peak] / dse[:peak]])
    down_bad = np.max(np.r_[0, diff[peak:] / dse[peak:]])
    below = int(prof.k[np.argmax(mean < 0.1)]) if np.any(mean < 0.1) else None
    criterion += [f"E Z_1 {m1:.3f}", f"peak k {prof.k[peak]} ({mean[peak]:.1f})",
                  f"worst reversal {max(up_bad, down_bad):.2f} SE", f"below 0.1 from k {below}"]
    assert abs(m1 / (1 + geo.sigma2) - 1) <= 0.05
    assert max(up_bad, down_bad) <= 4.0
    assert mean[-1] < 0.1


def test_c14_synthetic_fit_recovery(criterion):
    """C14 exact sub-Gaussian synthetic survival recovers (C, c)"""
    n, N = 10_000, 10**6
    grid = [g * math.sqrt(n) for g in GRID_STEPS]
    surv = [2.0 * math.exp(-1.0 * x * x / n) for x in grid]
    rep = TailReport("W", n, N, grid, surv, surv, surv, [N] * len(grid), seed=0)
    fit = fit_subgaussian(rep)
    criterion.append(f"C err {abs(fit.C - 2):.1e}, c err {abs(fit.c - 1):.1e}")
    assert abs(fit.C - 2.0) <= 1e-9 and abs(fit.c - 1.0) <= 1e-9
