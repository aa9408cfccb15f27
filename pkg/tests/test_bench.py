import csv
import json

import pytest

from foresight.bench import (BenchRecord, BenchResult, balanced_depth, fit_slope, scaling_sweep, sight_plies,
                             write_report)
from foresight.errors import BenchTimeout


def test_size_helpers():
    assert balanced_depth(64, 2) == 5 and balanced_depth(16384, 2) == 13
    assert sight_plies(63, 1.5) == 4 and sight_plies(1, 10) == 1


def test_slope_fit_recovers_power_law():
    records = [BenchRecord(n, 0, 0, 1e-6 * n ** 2, 0, 0) for n in (64, 128, 256, 512)]
    slope, _ = fit_slope(records)
    assert slope == pytest.approx(2.0)
    assert BenchResult(records, slope, 0.0).doubling_ratios == pytest.approx([4.0, 4.0, 4.0])


def test_small_sweep_with_oracle_cross_check(tmp_path):
    result = scaling_sweep([8, 16, 32], seeds=2)
    assert [r.n for r in result.records] == [7, 15, 31]
    assert result.records[0].oracle_ok is True
    assert result.records[2].oracle_ok is None
    assert all(len(r.times) == 2 for r in result.records)
    paths = write_report(result, tmp_path)
    rows = list(csv.DictReader(paths["table"].open()))
    assert [int(r["n"]) for r in rows] == [7, 15, 31]
    summary = json.loads(paths["summary"].read_text())
    assert summary["slope"] == pytest.approx(result.slope)
    assert paths["figure"].read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_parallel_sweep_gives_same_counts():
    a = scaling_sweep([16, 32], seeds=2)
    b = scaling_sweep([16, 32], seeds=2, workers=2)
    assert [(r.n, r.oracle_queries, r.memo_hits) for r in a.records] == \
           [(r.n, r.oracle_queries, r.memo_hits) for r in b.records]


def test_budget_is_enforced():
    with pytest.raises(BenchTimeout):
        scaling_sweep([64, 128], seeds=1, budget=0.0)


def test_sizes_must_increase():
    with pytest.raises(ValueError):
        scaling_sweep([64, 32])
