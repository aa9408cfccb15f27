"""Timing sweep of the solver on balanced trees."""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import BenchTimeout
from .generate import GenSpec, oracle_disagreements, random_scenario
from .solver import Solver

DEFAULT_TEMPLATE = GenSpec(players=2, branching=(2, 2), balanced=True, rollouts=2,
                           beliefs="depth-model", belief_depths=(2, 3), belief_widths=(1, 2),
                           utility_range=(-9, 9), denominators=(1, 2, 3))


@dataclass
class BenchRecord:
    n: int
    depth: int
    plies: int
    seconds: float
    oracle_queries: int
    memo_hits: int
    times: list[float] = field(default_factory=list)
    oracle_ok: bool | None = None


@dataclass
class BenchResult:
    records: list[BenchRecord]
    slope: float
    intercept: float

    @property
    def doubling_ratios(self) -> list[float]:
        """Time ratio per doubling of n between consecutive sizes."""
        out = []
        for a, b in zip(self.records, self.records[1:]):
            out.append((b.seconds / a.seconds) ** (math.log(2) / math.log(b.n / a.n)))
        return out

    def summary(self) -> dict:
        trimmed = fit_slope(self.records[1:])[0] if len(self.records) > 2 else None
        return {
            "slope": self.slope,
            "slope_without_smallest": trimmed,
            "max_doubling_ratio": max(self.doubling_ratios, default=None),
            "records": [asdict(r) for r in self.records],
        }


def fit_slope(records: list[BenchRecord]) -> tuple[float, float]:
    """Least-squares line through (log n, log seconds)."""
    x = np.log([r.n for r in records])
    y = np.log([r.seconds for r in records])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def sight_plies(n: int, scale: float) -> int:
    return max(1, math.ceil(math.log2(n + 1) / scale))


def balanced_depth(n: int, branching: int) -> int:
    return max(1, round(math.log(n, branching)) - 1)


def _cell(args) -> tuple[float, int, int, bool | None]:
    spec, oracle_cap = args
    emtg = random_scenario(spec).fresh()
    start = time.perf_counter()
    solver = Solver(emtg)
    _, trace = solver.sol()
    elapsed = time.perf_counter() - start
    ok = None
    if len(emtg.tree) <= oracle_cap:
        ok = not oracle_disagreements(random_scenario(spec).fresh(), oracle_cap)
    return elapsed, trace.stats["oracle_queries"], trace.stats["memo_hits"], ok


def scaling_sweep(sizes: list[int], seeds: int = 3, template: GenSpec = DEFAULT_TEMPLATE, *,
                  sight_scale: float = 1.5, budget: float = 300.0, oracle_cap: int = 12,
                  workers: int = 1) -> BenchResult:
    """Median solve time per size on complete trees with logarithmic sight.

    ``sizes`` are target history counts; each becomes the complete tree of
    the nearest height.  Scenario construction is not timed.
    """
    if sorted(sizes) != list(sizes) or len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be strictly increasing")
    b = template.branching[1]
    started = time.perf_counter()
    records = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for target in sizes:
            depth = balanced_depth(target, b)
            n = (b ** (depth + 1) - 1) // (b - 1) if b > 1 else depth + 1
            plies = sight_plies(n, sight_scale)
            specs = [(replace(template, seed=template.seed + k, depth=(depth, depth), sight_plies=plies,
                              balanced=True), oracle_cap) for k in range(seeds)]
            cells = list(pool.map(_cell, specs)) if pool else [_cell(s) for s in specs]
            times = [c[0] for c in cells]
            oks = [c[3] for c in cells if c[3] is not None]
            records.append(BenchRecord(
                n, depth, plies, statistics.median(times),
                int(statistics.median(c[1] for c in cells)), int(statistics.median(c[2] for c in cells)),
                times, all(oks) if oks else None))
            if time.perf_counter() - started > budget:
                raise BenchTimeout(f"sweep exceeded {budget} s at n={n}")
    finally:
        if pool:
            pool.shutdown()
    slope, intercept = fit_slope(records) if len(records) > 1 else (float("nan"), float("nan"))
    return BenchResult(records, slope, intercept)


def write_report(result: BenchResult, out_dir, stem: str = "bench") -> dict[str, Path]:
    """Write the table (CSV), the summary (JSON) and the scaling figure (PNG)."""
    from .plotting import scaling_figure

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"table": out / f"{stem}.csv", "summary": out / f"{stem}.json", "figure": out / f"{stem}.png"}
    with open(paths["table"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "depth", "plies", "seconds", "oracle_queries", "memo_hits", "oracle_ok"])
        for r in result.records:
            w.writerow([r.n, r.depth, r.plies, f"{r.seconds:.6f}", r.oracle_queries, r.memo_hits,
                        "" if r.oracle_ok is None else r.oracle_ok])
    with open(paths["summary"], "w") as fh:
        json.dump(result.summary(), fh, indent=2)
        fh.write("\n")
    if len(result.records) > 1:
        scaling_figure([r.n for r in result.records], [r.seconds for r in result.records],
                       result.slope, result.intercept, paths["figure"],
                       per_seed=[r.times for r in result.records])
    else:
        del paths["figure"]
    return paths
