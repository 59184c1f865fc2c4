"""Real Gamma and Riemann zeta functions."""

import math

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (x + i)
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def _borwein_coeffs(n: int) -> list[float]:
    d = []
    acc = 0.0
    for i in range(n + 1):
        acc += n * math.factorial(n + i - 1) * 4**i / (math.factorial(n - i) * math.factorial(2 * i))
        d.append(acc)
    return d


_BORWEIN_N = 40
_BORWEIN_D = _borwein_coeffs(_BORWEIN_N)


def eta(s: float) -> float:
    """Dirichlet eta function for real ``s > 0`` (Borwein's accelerated
    alternating series; error about ``3 / (3 + sqrt 8)**40``)."""
    if s <= 0:
        raise ValueError("eta is evaluated only for s > 0")
    n = _BORWEIN_N
    d = _BORWEIN_D
    total = 0.0
    for k in range(n):
        total += (-1) ** k * (d[k] - d[n]) / (k + 1) ** s
    return -total / d[n]


def zeta_times_sm1(s: float) -> float:
    """``(s - 1) zeta(s)`` for real ``s > 0``; equals 1 at ``s = 1``."""
    if s == 1.0:
        return 1.0
    # zeta(s) = eta(s) / (1 - 2**(1 - s))
    return eta(s) * (s - 1.0) / -math.expm1((1.0 - s) * math.log(2.0))


def zeta(s: float) -> float:
    if s == 1.0:
        raise ValueError("zeta has a pole at 1")
    return zeta_times_sm1(s) / (s - 1.0)
