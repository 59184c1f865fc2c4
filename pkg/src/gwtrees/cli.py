"""Command-line front end.

    gwtrees sample   --dist geometric:0.5 --n 101 --N 3
    gwtrees profile  --dist binary --n 21
    gwtrees tail     --dist geometric:0.5 --n 10000 --N 100000 --stat W
    gwtrees moments  --dist geometric:0.5 --stat H --r 1 2 --n 10000 --N 20000
    gwtrees zk       --dist geometric:0.5 --n 2500 --N 4000 --kmax 250
    gwtrees theta    --cdf 0.5 1.0 2.0
    gwtrees verify   --suite dwass --dist geometric:0.5 --nmax 10
    gwtrees sizebias --dist geometric:0.5 --n 401 --k 20 --N 100000

Exit status: 0 on success, 1 when a verification fails, 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import math
import shlex
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import io as gio
from .experiments import (
    DEFAULT_SEED,
    GRID_STEPS,
    estimate_tail,
    moment_scan,
    sizebias_ratio_check,
    zk_profile,
)
from .limits import limit_moment, tail_lower_bounds_check, theta_eval
from .offspring import (
    DistributionError,
    InfeasibleSizeError,
    OffspringDistribution,
    builtin,
    check_feasible,
    tilt_to_critical,
)
from .oracle import SUITES, verify_suite
from .stats import level_profile, tree_stats
from .treegen import sample_conditioned

COMMANDS = ("sample", "profile", "tail", "moments", "zk", "theta", "verify", "sizebias")


@dataclass(frozen=True)
class DistSpec:
    """``name[:param]`` or ``pmf:<path>``, optionally suffixed ``+tilt``."""

    name: str
    param: str | None = None
    tilt: bool = False

    @classmethod
    def parse(cls, text: str) -> "DistSpec":
        tilt = text.endswith("+tilt")
        body = text[: -len("+tilt")] if tilt else text
        name, sep, param = body.partition(":")
        if not name or (sep and not param):
            raise DistributionError(f"bad distribution spec {text!r}")
        return cls(name, param if sep else None, tilt)

    def __str__(self) -> str:
        s = self.name if self.param is None else f"{self.name}:{self.param}"
        return s + ("+tilt" if self.tilt else "")

    def build(self) -> OffspringDistribution:
        if self.name == "pmf":
            dist = gio.load_pmf(self.param)
        else:
            dist = builtin(self.name, None if self.param is None else float(self.param))
        if self.tilt:
            dist = tilt_to_critical(dist)[1]
        return dist


@dataclass
class RunConfig:
    command: str
    dist: str = "geometric:0.5"
    n: int | None = None
    N: int | None = None
    k: int | None = None
    r: list[float] = field(default_factory=list)
    grid: list[float] = field(default_factory=list)
    seed: int = DEFAULT_SEED
    workers: int = 1
    format: str = "csv"
    output: str | None = None

    def canonical(self) -> str:
        """A command line that parses back to an equal config."""
        parts = [self.command, "--dist", str(DistSpec.parse(self.dist))]
        for f in fields(self):
            if f.name in ("command", "dist"):
                continue
            v = getattr(self, f.name)
            if v is None or v == []:
                continue
            if isinstance(v, list):
                parts += [f"--{f.name}", *map(repr, v)]
            else:
                parts += [f"--{f.name}", str(v)]
        return shlex.join(parts)

    @classmethod
    def from_string(cls, text: str) -> "RunConfig":
        argv = shlex.split(text)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("command")
        p.add_argument("--dist", default="geometric:0.5")
        for name in ("n", "N", "k", "seed", "workers"):
            p.add_argument(f"--{name}", type=int)
        p.add_argument("--r", type=float, nargs="+", default=[])
        p.add_argument("--grid", type=float, nargs="+", default=[])
        p.add_argument("--format", default="csv")
        p.add_argument("--output")
        ns = p.parse_args(argv)
        kw = {k: v for k, v in vars(ns).items() if v is not None}
        return cls(**kw)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gwtrees",
        description="Conditioned Galton-Watson trees: sampling, exact checks, limit laws.",
        epilog=f"Default seed: {DEFAULT_SEED:#x} (the bytes of 'GW01').",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n=True, big_n=None, fmt=("csv", "json")):
        sp.add_argument("--dist", default="geometric:0.5",
                        help="geometric:p | poisson:lam | binary | uniform012 | pmf:PATH, optional +tilt")
        if n:
            sp.add_argument("--n", type=int, required=True, help="number of nodes")
        if big_n is not None:
            sp.add_argument("--N", type=int, default=big_n, help="number of samples")
        sp.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        sp.add_argument("--output", help="write here instead of stdout")

    sp = sub.add_parser("sample", help="sample conditioned trees as preorder degree sequences")
    common(sp, big_n=1, fmt=("json", "csv"))
    sp.add_argument("--order", choices=("dfs", "bfs"), default="dfs")

    sp = sub.add_parser("profile", help="level profile (csv) or summary statistics (json) of one tree")
    common(sp, n=False)
    sp.add_argument("--n", type=int, help="sample a tree with this many nodes")
    sp.add_argument("--tree", help="read the tree from this file instead of sampling")

    sp = sub.add_parser("tail", help="survival curve and sub-Gaussian fit")
    common(sp, big_n=10_000)
    sp.add_argument("--stat", choices=("W", "H", "Zk"), default="W")
    sp.add_argument("--k", type=int)
    sp.add_argument("--grid", type=float, nargs="+", default=list(GRID_STEPS),
                    help="thresholds as multiples of sqrt(n)")

    sp = sub.add_parser("moments", help="scaled moments against their limits")
    common(sp, big_n=10_000)
    sp.add_argument("--stat", choices=("W", "H", "Zk"), default="W")
    sp.add_argument("--k", type=int)
    sp.add_argument("--r", type=float, nargs="+", default=[1.0, 2.0])

    sp = sub.add_parser("zk", help="mean level sizes E Z_k")
    common(sp, big_n=2_000)
    sp.add_argument("--kmax", type=int, required=True)

    sp = sub.add_parser("theta", help="theta law: cdf, limit moments, tail bounds")
    sp.add_argument("--cdf", type=float, nargs="+")
    sp.add_argument("--moment", choices=("W", "H"))
    sp.add_argument("--r", type=float, nargs="+", default=[1.0, 2.0])
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--bounds", type=float, nargs="+", help="check the tail lower bounds at these x")
    sp.add_argument("--output")

    sp = sub.add_parser("verify", help="exact small-n identity checks; JSON lines")
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sp.add_argument("--dist", default="geometric:0.5")
    sp.add_argument("--nmax", type=int, default=10)
    sp.add_argument("--output")

    sp = sub.add_parser("sizebias", help="E Z_k versus the size-biased size ratio")
    common(sp, big_n=100_000, fmt=("json",))
    sp.add_argument("--k", type=int, required=True)
    return p


def _emit(text: str, path: str | None, stdout) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("output",)}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def usage_error(msg: str) -> int:
        parser.print_usage(stderr)
        stderr.write(f"gwtrees: error: {msg}\n")
        return 2

    try:
        dist = DistSpec.parse(args.dist).build() if hasattr(args, "dist") else None
        if getattr(args, "n", None) is not None and args.command != "verify":
            check_feasible(dist, args.n)
    except (DistributionError, InfeasibleSizeError, OSError, ValueError) as exc:
        return usage_error(str(exc))

    cmd = args.command
    if cmd == "sample":
        rng = np.random.default_rng(args.seed)
        trees = [sample_conditioned(dist, args.n, rng, order=args.order) for _ in range(args.N)]
        if args.format == "json":
            text = "".join(gio.degrees_to_json(t) + "\n" for t in trees)
        else:
            text = "\n".join(gio.degrees_to_lines(t) for t in trees)
        _emit(text, args.output, stdout)
        return 0

    if cmd == "profile":
        if args.tree:
            with open(args.tree, encoding="utf-8") as fh:
                trees = gio.read_trees(fh.read())
            if len(trees) != 1:
                return usage_error(f"expected one tree in {args.tree}, found {len(trees)}")
            tree = trees[0]
        elif args.n is not None:
            tree = sample_conditioned(dist, args.n, np.random.default_rng(args.seed))
        else:
            return usage_error("profile needs --n or --tree")
        if args.format == "json":
            _emit(gio.to_json(tree_stats(tree)) + "\n", args.output, stdout)
        else:
            z = level_profile(tree).z
            _emit(gio.csv_string(("level", "count"), enumerate(z.tolist())), args.output, stdout)
        return 0

    if cmd == "tail":
        if args.stat == "Zk" and args.k is None:
            return usage_error("--stat Zk needs --k")
        grid = [g * math.sqrt(args.n) for g in args.grid]
        rep = estimate_tail(dist, args.n, args.N, args.stat, grid, args.seed, args.workers, args.k)
        if args.format == "json":
            fitted = None if rep.fit is None else {"C": rep.fit.C, "c": rep.fit.c, "rms": rep.fit.rms,
                                                   "ceiling": rep.ceiling}
            _emit(gio.json_envelope(_params(args), args.seed, rep.to_dict(), fitted) + "\n",
                  args.output, stdout)
        else:
            rows = zip(rep.grid, rep.survival, rep.ci_lo, rep.ci_hi)
            _emit(gio.csv_string(("x", "survival", "ci_lo", "ci_hi"), rows), args.output, stdout)
        return 0

    if cmd == "moments":
        if args.stat == "Zk" and args.k is None:
            return usage_error("--stat Zk needs --k")
        reps = moment_scan(dist, args.stat, args.r, args.n, args.N, args.seed, args.workers, args.k)
        if args.format == "json":
            _emit(gio.json_envelope(_params(args), args.seed, [vars(m) for m in reps]) + "\n",
                  args.output, stdout)
        else:
            rows = [(m.r, m.estimate, m.stderr, "" if m.target is None else m.target) for m in reps]
            _emit(gio.csv_string(("r", "estimate", "stderr", "target"), rows), args.output, stdout)
        return 0

    if cmd == "zk":
        if not 1 <= args.kmax <= args.n:
            return usage_error("need 1 <= --kmax <= --n")
        prof = zk_profile(dist, args.n, args.N, args.kmax, args.seed, args.workers)
        if args.format == "json":
            res = {"k": prof.k, "mean": prof.mean, "stderr": prof.stderr}
            _emit(gio.json_envelope(_params(args), args.seed, res) + "\n", args.output, stdout)
        else:
            rows = zip(prof.k.tolist(), prof.mean.tolist(), prof.stderr.tolist())
            _emit(gio.csv_string(("k", "mean", "stderr"), rows), args.output, stdout)
        return 0

    if cmd == "theta":
        out = []
        if args.cdf:
            out.append(gio.csv_string(("x", "cdf"), ((x, theta_eval(x).cdf) for x in args.cdf)))
        if args.moment:
            if args.sigma <= 0:
                return usage_error("--sigma must be positive")
            out.append(gio.csv_string(("r", "moment"),
                                      ((r, limit_moment(args.moment, r, args.sigma)) for r in args.r)))
        if args.bounds:
            rows = tail_lower_bounds_check(args.bounds)
            out.append(gio.csv_string(("x", "side", "log_margin", "pass"),
                                      ((r["x"], r["side"], r["log_margin"], r["pass"]) for r in rows)))
            if not all(r["pass"] for r in rows):
                _emit("".join(out), args.output, stdout)
                return 1
        if not out:
            return usage_error("theta needs --cdf, --moment or --bounds")
        _emit("".join(out), args.output, stdout)
        return 0

    if cmd == "verify":
        suites = SUITES if args.suite == "all" else (args.suite,)
        rows = [row for s in suites for row in verify_suite(s, dist, args.nmax)]
        _emit("".join(gio.to_json(r) + "\n" for r in rows), args.output, stdout)
        return 0 if all(r["pass"] for r in rows) else 1

    if cmd == "sizebias":
        rep = sizebias_ratio_check(dist, args.n, args.k, args.N, args.seed, args.workers)
        res = dict(vars(rep), z_score=rep.z_score, passed=rep.passed)
        _emit(gio.json_envelope(_params(args), args.seed, res) + "\n", args.output, stdout)
        return 0 if rep.passed else 1

    return usage_error(f"unknown command {cmd!r}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
