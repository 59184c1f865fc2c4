"""Conditioned Galton-Watson trees: exact samplers, small-n oracles, limit
laws of width and height, and Monte Carlo drivers."""

from .offspring import (
    DiscreteLaw,
    OffspringDistribution,
    builtin,
    from_pmf,
    size_biased,
    sum_law,
    tilt,
    tilt_to_critical,
)
from .stats import level_profile, queue_path
from .treegen import (
    PlaneTree,
    cycle_rotate,
    sample_conditioned,
    sample_size_biased,
    sample_unconditioned,
    tree_from_degrees,
)

__version__ = "0.1.0"
