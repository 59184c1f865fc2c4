"""Limit laws of the scaled width and height: the theta distribution, its
moments, and related closed-form bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .specfun import gamma, zeta_times_sm1

SWITCH_X = 1.5
_TERM_TOL = 1e-16
_MAX_TERMS = 100_000
_C_PI = 4 * math.pi**2.5


@dataclass(frozen=True)
class ThetaEval:
    x: float
    cdf: float
    series_used: str


def theta_cdf_direct(x: float) -> float:
    """``sum_j (1 - 2 j^2 x^2) exp(-j^2 x^2)`` over all integers ``j``."""
    if x <= 0:
        return 0.0
    x2 = x * x
    total = 1.0
    for j in range(1, _MAX_TERMS):
        e = math.exp(-j * j * x2)
        term = 2.0 * (1.0 - 2.0 * j * j * x2) * e
        total += term
        if j * j * x2 > 1.0 and abs(term) < _TERM_TOL:
            break
    return total


def theta_sf_direct(x: float) -> float:
    """Survival ``P(T > x)`` summed directly, accurate in the right tail."""
    if x <= 0:
        return 1.0
    x2 = x * x
    total = 0.0
    for j in range(1, _MAX_TERMS):
        term = 2.0 * (2.0 * j * j * x2 - 1.0) * math.exp(-j * j * x2)
        total += term
        if j * j * x2 > 1.0 and abs(term) <= _TERM_TOL * max(abs(total), 1e-300):
            break
    return total


def _pi_series_sum(x: float) -> float:
    """``sum_{j>=1} j^2 exp(-pi^2 (j^2 - 1) / x^2)``."""
    a = math.pi**2 / (x * x)
    total = 0.0
    for j in range(1, _MAX_TERMS):
        term = j * j * math.exp(-a * (j * j - 1))
        total += term
        if term < _TERM_TOL * total:
            break
    return total


def theta_cdf_pi(x: float) -> float:
    """``(4 pi^(5/2) / x^3) sum_{j>=1} j^2 exp(-pi^2 j^2 / x^2)``."""
    if x <= 0:
        return 0.0
    return _C_PI / x**3 * math.exp(-math.pi**2 / (x * x)) * _pi_series_sum(x)


def theta_logcdf(x: float) -> float:
    """``log P(T <= x)``, finite even where the cdf underflows."""
    if x <= 0:
        return -math.inf
    if x >= SWITCH_X:
        return math.log1p(-theta_sf_direct(x))
    return math.log(_C_PI) - 3 * math.log(x) - math.pi**2 / (x * x) + math.log(_pi_series_sum(x))


def theta_eval(x: float) -> ThetaEval:
    if x <= 0:
        return ThetaEval(x, 0.0, "none")
    if x < SWITCH_X:
        return ThetaEval(x, theta_cdf_pi(x), "pi")
    return ThetaEval(x, 1.0 - theta_sf_direct(x), "direct")


def theta_cdf(x: float) -> float:
    """Distribution function of the theta law."""
    return theta_eval(x).cdf


def theta_sf(x: float) -> float:
    if x <= 0:
        return 1.0
    if x < SWITCH_X:
        return 1.0 - theta_cdf_pi(x)
    return theta_sf_direct(x)


def theta_mean_quad() -> float:
    """``E T`` as the integral of the survival function."""
    return _quad_sf(lambda x: theta_sf(x))


def theta_second_moment_quad() -> float:
    return _quad_sf(lambda x: 2 * x * theta_sf(x))


def _quad_sf(f) -> float:
    # T < 12 except on a set of probability ~ exp(-144)
    val, _ = integrate.quad(f, 0.0, 12.0, epsabs=1e-13, epsrel=1e-13, limit=200, points=[SWITCH_X])
    return val


def tail_lower_bounds_check(grid) -> list[dict]:
    """Check ``P(T >= x) >= 2 exp(-x^2)`` for ``x >= 1`` and
    ``P(T <= x) >= 40 exp(-pi^2 / x^2)`` for ``0 < x <= 1`` at each grid point.

    Margins are log ratios (value over bound), so they stay finite where the
    probabilities underflow.
    """
    rows = []
    for x in grid:
        x = float(x)
        if x >= 1.0:
            sf = theta_sf(x)
            margin = math.log(sf) - (math.log(2.0) - x * x)
            rows.append({"x": x, "side": "right", "value": sf, "bound": 2 * math.exp(-x * x),
                         "log_margin": margin, "pass": margin >= 0})
        if 0.0 < x <= 1.0:
            logc = theta_logcdf(x)
            margin = logc - (math.log(40.0) - math.pi**2 / (x * x))
            rows.append({"x": x, "side": "left", "value": math.exp(logc),
                         "bound": 40 * math.exp(-math.pi**2 / (x * x)),
                         "log_margin": margin, "pass": margin >= 0})
    return rows


def limit_moment(statistic: str, r: float, sigma: float) -> float:
    """Limit of ``E[stat^r] / n^(r/2)`` for the width (``W``) or height (``H``)
    of the conditioned tree, offspring standard deviation ``sigma``.

    ``E W^r = sigma^r 2^(-r/2) r (r-1) Gamma(r/2) zeta(r)`` and
    ``E H^r = sigma^(-r) 2^(r/2) r (r-1) Gamma(r/2) zeta(r)``; at ``r = 1`` the
    factor ``(r - 1) zeta(r)`` is replaced by its limit 1.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return 1.0
    core = r * gamma(r / 2) * zeta_times_sm1(r)
    if statistic == "W":
        return sigma**r * 2 ** (-r / 2) * core
    if statistic == "H":
        return sigma ** (-r) * 2 ** (r / 2) * core
    raise ValueError(f"statistic must be 'W' or 'H', got {statistic!r}")


def limit_cdf(statistic: str, x: float, sigma: float) -> float:
    """Limit of ``P(stat / sqrt(n) <= x)``: the width scales as
    ``sigma T / sqrt 2`` and the height as ``sqrt 2 T / sigma``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if statistic == "W":
        return theta_cdf(math.sqrt(2) * x / sigma)
    if statistic == "H":
        return theta_cdf(sigma * x / math.sqrt(2))
    raise ValueError(f"statistic must be 'W' or 'H', got {statistic!r}")


def limit_sf(statistic: str, x: float, sigma: float) -> float:
    if statistic == "W":
        return theta_sf(math.sqrt(2) * x / sigma)
    if statistic == "H":
        return theta_sf(sigma * x / math.sqrt(2))
    raise ValueError(f"statistic must be 'W' or 'H', got {statistic!r}")


def bernstein_bound(V: float, b: float, t: float) -> float:
    """One-sided Bernstein bound ``exp(-t^2 / (2V + 2bt/3))`` for sums of
    independent centred variables bounded above by ``b``."""
    if V < 0 or t < 0:
        raise ValueError("need V >= 0 and t >= 0")
    if t == 0:
        return 1.0
    denom = 2 * V + 2 * b * t / 3
    if denom <= 0:
        raise ValueError("2V + 2bt/3 must be positive")
    return math.exp(-t * t / denom)


def theta_table(xs) -> np.ndarray:
    return np.array([[x, theta_cdf(x)] for x in xs])
