"""Mean level sizes E Z_k for k up to a multiple of sqrt(n), as CSV.

    python3 scripts/zk_curve.py --n 2500 --N 3000 --span 5 > zk.csv
"""

import argparse
import math
from dataclasses import asdict, dataclass

from gwtrees.experiments import DEFAULT_SEED, zk_profile
from gwtrees.offspring import builtin


@dataclass
class Config:
    dist: str = "geometric"
    param: float = 0.5
    n: int = 2500
    N: int = 3000
    span: float = 5.0  # k_max = span * sqrt(n)
    seed: int = DEFAULT_SEED
    workers: int = 1


def main(cfg: Config) -> None:
    dist = builtin(cfg.dist, cfg.param)
    kmax = min(cfg.n, int(cfg.span * math.sqrt(cfg.n)))
    prof = zk_profile(dist, cfg.n, cfg.N, kmax, seed=cfg.seed, workers=cfg.workers)
    print("k,mean,stderr,small_k_limit")
    for k, m, se in zip(prof.k, prof.mean, prof.stderr):
        print(f"{k},{float(m)!r},{float(se)!r},{float(1 + k * dist.sigma2)!r}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, default in asdict(Config()).items():
        kind = (lambda s: int(s, 0)) if f == "seed" else type(default)
        p.add_argument(f"--{f}", type=kind, default=default)
    main(Config(**vars(p.parse_args())))
