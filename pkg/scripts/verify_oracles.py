"""Run every exact small-n check for each built-in law and print a summary.

    python3 scripts/verify_oracles.py --nmax 10
"""

import argparse
import sys
from collections import defaultdict

from gwtrees.offspring import builtin
from gwtrees.oracle import SUITES, verify_suite

LAWS = [("geometric", 0.5), ("geometric", 1 / 3), ("binary", None), ("uniform012", None), ("poisson", 1.0)]


def main(nmax: int) -> int:
    failed = 0
    for name, param in LAWS:
        dist = builtin(name, param)
        worst = defaultdict(float)
        count = defaultdict(int)
        for suite in SUITES:
            for row in verify_suite(suite, dist, nmax):
                worst[row["check"]] = max(worst[row["check"]], row["abs_err"])
                count[row["check"]] += 1
                failed += not row["pass"]
        summary = ", ".join(f"{c} {count[c]} rows max {worst[c]:.1e}" for c in worst)
        print(f"{dist.name}: {summary}")
    print("all checks passed" if not failed else f"{failed} checks failed")
    return 1 if failed else 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nmax", type=int, default=10)
    sys.exit(main(p.parse_args().nmax))
