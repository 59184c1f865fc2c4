"""File formats: pmf files, tree degree sequences, CSV and JSON reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .offspring import DistributionError, OffspringDistribution, from_pmf
from .treegen import PlaneTree


def parse_pmf_text(text: str, name: str = "pmf") -> OffspringDistribution:
    """Parse ``k weight`` lines; ``#`` starts a comment. Weights are normalized."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise DistributionError(f"line {lineno}: expected 'k weight', got {raw!r}")
        try:
            pairs.append((int(fields[0]), float(fields[1])))
        except ValueError as exc:
            raise DistributionError(f"line {lineno}: {exc}") from None
    return from_pmf(pairs, name=name)


def load_pmf(path) -> OffspringDistribution:
    path = Path(path)
    return parse_pmf_text(path.read_text(encoding="utf-8"), name=f"pmf:{path}")


def dump_pmf(dist: OffspringDistribution) -> str:
    return "".join(f"{int(k)} {float(dist.pmf[k])!r}\n" for k in dist.support)


def degrees_to_lines(tree: PlaneTree) -> str:
    return "".join(f"{d}\n" for d in tree.key)


def degrees_from_lines(text: str) -> PlaneTree:
    return PlaneTree(np.array([int(x) for x in text.split()], dtype=np.int64))


def degrees_to_json(tree: PlaneTree) -> str:
    return json.dumps(list(tree.key), separators=(",", ":"))


def degrees_from_json(text: str) -> PlaneTree:
    return PlaneTree(np.array(json.loads(text), dtype=np.int64))


def read_trees(text: str) -> list[PlaneTree]:
    """Trees as JSON arrays (one per line) or as integer blocks separated by blank lines."""
    text = text.strip()
    if not text:
        return []
    if text.startswith("["):
        return [degrees_from_json(line) for line in text.splitlines() if line.strip()]
    return [degrees_from_lines(block) for block in text.split("\n\n") if block.strip()]


def write_csv(out: TextIO, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    """CSV with floats written by ``repr`` so they reparse exactly."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def csv_string(header, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[float]]]:
    r = csv.reader(io.StringIO(text))
    header = next(r)
    return header, [[float(v) for v in row] for row in r if row]


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def json_envelope(params: dict, seed: int | None, results, fitted=None) -> str:
    return json.dumps(
        _plain({"params": params, "seed": seed, "results": results, "fitted": fitted}), indent=2
    )


def to_json(obj) -> str:
    return json.dumps(_plain(obj))
