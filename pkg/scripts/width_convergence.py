"""Scaled width and height moments across n, against their limits.

    python3 scripts/width_convergence.py --sizes 400 2500 10000 40000 --N 4000
"""

import argparse
import math
from dataclasses import dataclass, field

from gwtrees.experiments import DEFAULT_SEED, sample_trees
from gwtrees.limits import limit_moment
from gwtrees.offspring import builtin


@dataclass
class Config:
    dist: str = "geometric"
    param: float = 0.5
    sizes: list[int] = field(default_factory=lambda: [400, 2500, 10_000, 40_000])
    N: int = 4000
    seed: int = DEFAULT_SEED


def main(cfg: Config) -> None:
    dist = builtin(cfg.dist, cfg.param)
    sigma = math.sqrt(dist.sigma2)
    ew, eh, ew2 = (limit_moment("W", 1, sigma), limit_moment("H", 1, sigma), limit_moment("W", 2, sigma))
    print("n,EW/sqrt(n),EH/sqrt(n),EW2/n,EW_gap,EW2_gap")
    for n in cfg.sizes:
        s = sample_trees(dist, n, cfg.N, seed=cfg.seed)
        w = s.width / math.sqrt(n)
        h = s.height / math.sqrt(n)
        m1, m2 = w.mean(), (w**2).mean()
        print(f"{n},{m1:.4f},{h.mean():.4f},{m2:.4f},{1 - m1 / ew:.4f},{1 - m2 / ew2:.4f}", flush=True)
    print(f"limit,{ew:.4f},{eh:.4f},{ew2:.4f},0,0")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dist", default="geometric")
    p.add_argument("--param", type=float, default=0.5)
    p.add_argument("--sizes", type=int, nargs="+", default=Config().sizes)
    p.add_argument("--N", type=int, default=4000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    main(Config(**vars(p.parse_args())))
