"""Per-member group key computation cost across group sizes.

For each size a tree is grown with the join rule, and every member folds its
key path from its own leaf secret and the public keys.  Modular
exponentiations are counted for every member; wall time is the median of
several repetitions on a deterministic sample of members, with the totient
cache cleared before each repetition so every run pays for its factoring.
"""

from __future__ import annotations

import csv
import io
import math
import random
import statistics
import time
from dataclasses import dataclass
from typing import Sequence

from . import keytree as kt
from .modmath import GroupParams, clear_caches, count_ops

# 2**64 - 59, the largest prime below 2**64
DEFAULT_P = 18446744073709551557
DEFAULT_Y = 5
DEFAULT_SIZES = (128, 192, 256, 320, 384, 448, 512, 576)


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple[int, ...] = DEFAULT_SIZES
    seed: int = 0
    variants: tuple[kt.Variant, ...] = kt.VARIANTS
    reps: int = 5
    sample: int = 32
    p: int = DEFAULT_P
    y: int = DEFAULT_Y

    def __post_init__(self):
        if any(n < 2 for n in self.sizes):
            raise ValueError("group sizes must be at least 2")
        if self.reps < 1 or self.sample < 1:
            raise ValueError("reps and sample must be positive")
        bad = [v for v in self.variants if v not in kt.VARIANTS]
        if bad:
            raise ValueError(f"unknown variant {bad[0]!r}")


@dataclass(frozen=True)
class BenchRow:
    group_size: int
    variant: str
    modexp_mean: float
    modexp_min: int
    modexp_max: int
    # every member's modexp count equals its number of key-path internal nodes
    path_match: bool
    time_ms: float


@dataclass(frozen=True)
class BenchReport:
    config: BenchConfig
    rows: tuple[BenchRow, ...]

    def to_csv(self, with_time: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["group_size", "variant", "modexp_per_member", "modexp_min", "modexp_max", "path_match"]
        w.writerow(head + (["time_per_member_ms"] if with_time else []))
        for r in self.rows:
            row = [r.group_size, r.variant, f"{r.modexp_mean:.4f}", r.modexp_min, r.modexp_max, int(r.path_match)]
            w.writerow(row + ([f"{r.time_ms:.4f}"] if with_time else []))
        return buf.getvalue()


def member_cost(view: kt.KeyTree, leaf: int) -> int:
    with count_ops() as ops:
        kt.compute_group_key(view, leaf)
    return ops["mod_exp"]


def _time_member(view: kt.KeyTree, leaf: int, reps: int) -> float:
    samples = []
    for _ in range(reps):
        clear_caches()
        t0 = time.perf_counter()
        kt.compute_group_key(view, leaf)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_size(n: int, variant: kt.Variant, cfg: BenchConfig) -> BenchRow:
    params = GroupParams(cfg.p, cfg.y)
    members = [f"M{i}" for i in range(1, n + 1)]
    tree = kt.KeyTree.grow(params, members, cfg.seed, variant=variant)
    occ = tree.occupants
    counts, match = [], True
    for m, leaf in occ.items():
        c = member_cost(tree.view(m), leaf)
        counts.append(c)
        match &= c == len(kt.key_path(tree, leaf)) - 1
    rng = random.Random(cfg.seed ^ n)
    timed = sorted(rng.sample(members, min(cfg.sample, n)))
    t = statistics.fmean(_time_member(tree.view(m), occ[m], cfg.reps) for m in timed)
    return BenchRow(n, variant, statistics.fmean(counts), min(counts), max(counts), match, t * 1e3)


def run_bench(cfg: BenchConfig) -> BenchReport:
    rows = [bench_size(n, v, cfg) for n in cfg.sizes for v in cfg.variants]
    return BenchReport(cfg, tuple(rows))


def expected_modexp_range(n: int) -> tuple[int, int]:
    """``ceil(log2 n)`` plus or minus one."""
    c = math.ceil(math.log2(n))
    return c - 1, c + 1


def parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ValueError(f"bad size list {text!r}") from exc


__all__: Sequence[str] = [
    "BenchConfig", "BenchReport", "BenchRow", "DEFAULT_SIZES", "expected_modexp_range",
    "member_cost", "parse_sizes", "run_bench",
]
