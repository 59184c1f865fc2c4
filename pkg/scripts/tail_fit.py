"""Width and height survival curves with sub-Gaussian fits, written as JSON.

    python3 scripts/tail_fit.py --n 10000 --N 100000 --out tails.json
"""

import argparse
import json
import math
from dataclasses import asdict, dataclass

from gwtrees.experiments import DEFAULT_SEED, GRID_STEPS, sample_trees, tail_report
from gwtrees.io import json_envelope
from gwtrees.offspring import builtin


@dataclass
class Config:
    dist: str = "geometric"
    param: float = 0.5
    n: int = 10_000
    N: int = 100_000
    seed: int = DEFAULT_SEED
    workers: int = 1
    out: str | None = None


def main(cfg: Config) -> None:
    dist = builtin(cfg.dist, cfg.param)
    s = sample_trees(dist, cfg.n, cfg.N, seed=cfg.seed, workers=cfg.workers)
    grid = [g * math.sqrt(cfg.n) for g in GRID_STEPS]
    reports = {st: tail_report(s.statistic(st), cfg.n, grid, st, cfg.seed, cfg.workers, dist=dist)
               for st in ("W", "H")}
    fitted = {st: None if r.fit is None else {"C": r.fit.C, "c": r.fit.c, "rms": r.fit.rms, "ceiling": r.ceiling}
              for st, r in reports.items()}
    text = json_envelope(asdict(cfg), cfg.seed, {st: r.to_dict() for st, r in reports.items()}, fitted)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    print(json.dumps(fitted, indent=2))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, default in asdict(Config()).items():
        kind = (lambda s: int(s, 0)) if f == "seed" else type(default) if default is not None else str
        p.add_argument(f"--{f}", type=kind, default=default)
    main(Config(**vars(p.parse_args())))
