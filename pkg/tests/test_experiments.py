import math

import numpy as np
import pytest

from gwtrees.experiments import (
    DEFAULT_SEED,
    FitError,
    GRID_STEPS,
    InvariantViolation,
    TailReport,
    UnderSampledError,
    default_grid,
    estimate_tail,
    fit_subgaussian,
    invariant_scan,
    moment_scan,
    product_bound_scan,
    sample_trees,
    sizebias_ratio_check,
    split_counts,
    tail_report,
    wilson_interval,
    zk_profile,
)
from gwtrees.limits import limit_sf
from gwtrees.offspring import InfeasibleSizeError, builtin
from gwtrees.oracle import exact_statistic_law


def _synthetic(C, c, n=10_000, N=10**6):
    grid = [s * math.sqrt(n) for s in GRID_STEPS]
    surv = [C * math.exp(-c * x * x / n) for x in grid]
    return TailReport("W", n, N, grid, surv, surv, surv, [N] * len(grid), seed=0)


def test_default_seed_spells_gw01():
    assert DEFAULT_SEED.to_bytes(4, "big") == b"GW01"


def test_split_counts():
    assert split_counts(10, 3) == [4, 3, 3]
    assert sum(split_counts(7, 7)) == 7


@pytest.mark.parametrize("C,c", [(2.0, 1.0), (0.7, 0.35), (5.0, 2.5)])
def test_fit_recovers_synthetic_parameters(C, c):
    fit = fit_subgaussian(_synthetic(C, c))
    assert abs(fit.C - C) <= 1e-9 and abs(fit.c - c) <= 1e-9
    assert fit.rms <= 1e-9 and fit.points == len(GRID_STEPS)


def test_fit_rejects_constant_survival():
    rep = _synthetic(1.0, 0.0)
    with pytest.raises(FitError):
        fit_subgaussian(rep)


def test_fit_needs_enough_exceedances():
    rep = _synthetic(2.0, 1.0)
    rep.exceedances = [100, 50, 24, 10, 3, 1, 0]
    with pytest.raises(UnderSampledError):
        fit_subgaussian(rep)


def test_tail_report_survival_decreasing_and_ceiling():
    geo = builtin("geometric")
    rep = estimate_tail(geo, 400, 3000, "W", seed=1)
    assert all(a >= b for a, b in zip(rep.survival, rep.survival[1:]))
    assert all(lo <= s <= hi for lo, s, hi in zip(rep.ci_lo, rep.survival, rep.ci_hi))
    assert rep.ceiling == pytest.approx(1.0)
    assert rep.grid == pytest.approx(default_grid(400))


def test_tail_is_deterministic():
    geo = builtin("geometric")
    a = estimate_tail(geo, 300, 1500, "H", seed=9).to_dict()
    b = estimate_tail(geo, 300, 1500, "H", seed=9).to_dict()
    assert a == b
    c = estimate_tail(geo, 300, 1500, "H", seed=10).to_dict()
    assert a != c


def test_parallel_workers_are_deterministic():
    geo = builtin("geometric")
    a = sample_trees(geo, 200, 600, seed=4, workers=2, ks=(3,))
    b = sample_trees(geo, 200, 600, seed=4, workers=2, ks=(3,))
    assert np.array_equal(a.width, b.width) and np.array_equal(a.zk, b.zk)
    assert len(a.width) == 600


def test_zk_tail_at_zero_is_height_tail():
    geo = builtin("geometric")
    n, N = 400, 4000
    k = 3 * int(math.sqrt(n))
    s = sample_trees(geo, n, N, seed=2, ks=(k,))
    p_zk = (s.statistic("Zk", k) > 0).mean()
    assert p_zk == (s.height >= k).mean()
    # and the height tail is near its limit value at this size
    assert abs(p_zk - limit_sf("H", k / math.sqrt(n), math.sqrt(2))) < 0.05
    rep = tail_report(s.statistic("Zk", k), n, [0.5], "Zk", seed=2, k=k)
    assert rep.survival[0] == p_zk


def test_wilson_interval_basic():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_wilson_coverage_against_exact_law():
    geo = builtin("geometric")
    n = 8
    law = exact_statistic_law(geo, n, "W")
    p = sum(v for w, v in law.items() if w >= 3)
    covered = 0
    for rep in range(100):
        s = sample_trees(geo, n, 400, seed=1000 + rep, check_rate=0.0)
        lo, hi = wilson_interval(int((s.width >= 3).sum()), 400)
        covered += lo <= p <= hi
    assert covered >= 93


def test_sampled_width_law_matches_exact():
    geo = builtin("geometric")
    n, N = 9, 40_000
    s = sample_trees(geo, n, N, seed=5)
    law = exact_statistic_law(geo, n, "W")
    for w, p in law.items():
        f = (s.width == w).mean()
        assert abs(f - p) <= 4 * math.sqrt(p * (1 - p) / N) + 1e-12


def test_moment_scan_targets():
    geo = builtin("geometric")
    reps = moment_scan(geo, "W", [1, 2], 400, 500, seed=3)
    assert reps[0].target == pytest.approx(math.sqrt(math.pi))
    assert reps[1].target == pytest.approx(2 * math.pi**2 / 6)
    z = moment_scan(geo, "Zk", [1, 2], 400, 500, seed=3, k=1)
    assert z[0].target == pytest.approx(3.0, abs=1e-10) and z[1].target is None and not z[0].normalized


def test_zk_profile_small_k_and_k_equal_n():
    geo = builtin("geometric")
    prof = zk_profile(geo, 200, 2000, 200, seed=6)
    assert abs(prof.mean[0] - 3.0) <= 4 * prof.stderr[0] + 0.15
    assert prof.mean[-1] == 0.0
    with pytest.raises(ValueError):
        zk_profile(geo, 10, 5, 11)


def test_sizebias_binary_small():
    rep = sizebias_ratio_check(builtin("binary"), 5, 1, 40_000, seed=11)
    # exact: E Z_1 = 2 for both binary trees with 5 nodes
    assert rep.lhs == 2.0
    assert rep.passed


def test_sizebias_impossible_level_gives_zero():
    geo = builtin("geometric")
    rep = sizebias_ratio_check(geo, 21, 25, 5000, seed=12)
    assert rep.lhs == 0.0 and rep.hits == 0 and rep.rhs == 0.0


def test_product_bound_scan():
    rep = product_bound_scan(builtin("geometric"), 50, 2000, seed=1)
    assert rep.passed and rep.N == 2000
    with pytest.raises(ValueError):
        product_bound_scan(builtin("geometric"), 1, 10)


def test_invariant_scan():
    rep = invariant_scan(builtin("poisson"), 120, 200, seed=3)
    assert rep.passed and rep.nodes == 120 * 200


def test_every_sampled_tree_is_checked_at_rate():
    s = sample_trees(builtin("geometric"), 100, 1000, seed=8)
    assert s.checked >= 10


def test_infeasible_size_raises():
    with pytest.raises(InfeasibleSizeError):
        sample_trees(builtin("binary"), 10, 5)


def test_invariant_violation_is_assertion():
    assert issubclass(InvariantViolation, AssertionError)
