import csv
import io

import pytest

from treecvrp.bench import COLUMNS, load_config, run_suite

SMALL = {
    "instances": [
        {"shape": "random", "n": 6, "Q": 3, "seeds": [0, 1]},
        {"shape": "star", "n": 4, "Q": 2, "seeds": [7]},
    ],
    "algorithms": ["exact", "itp", "bicriteria", "qptas"],
    "eps": 0.5,
}


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_row_and_summary_counts():
    rows = rows_of(run_suite(SMALL))
    data = [r for r in rows if r["shape"] != "summary"]
    summaries = [r for r in rows if r["shape"] == "summary"]
    assert len(data) == 3 * 4
    assert len(summaries) == 4


def test_byte_identical_reruns():
    assert run_suite(SMALL) == run_suite(SMALL)


def test_wall_ms_empty_without_timing():
    rows = rows_of(run_suite(SMALL))
    assert all(r["wall_ms"] == "" for r in rows)


def test_timing_fills_wall_ms():
    rows = rows_of(run_suite(SMALL, timing=True))
    data = [r for r in rows if r["shape"] != "summary" and not r["error"]]
    assert all(r["wall_ms"] for r in data)


def test_exact_summary_ratio_is_one():
    rows = rows_of(run_suite(SMALL))
    (summary,) = [r for r in rows
                  if r["shape"] == "summary" and r["algorithm"] == "exact"]
    assert summary["ratio"] == "1"


def test_rows_sorted_by_key():
    rows = rows_of(run_suite(SMALL))
    data = [r for r in rows if r["shape"] != "summary"]
    keys = [(r["shape"], int(r["n"]), r["seed"], r["algorithm"]) for r in data]
    assert keys == sorted(keys)


def test_oversized_oracle_recorded_not_raised():
    cfg = {
        "instances": [{"shape": "random", "n": 30, "Q": 3,
                       "demand_model": "uniform", "seeds": [0]}],
        "algorithms": ["exact", "itp"],
    }
    rows = rows_of(run_suite(cfg))
    exact_row = [r for r in rows if r["algorithm"] == "exact"
                 and r["shape"] != "summary"][0]
    assert "OracleSizeError" in exact_row["error"]
    itp_row = [r for r in rows if r["algorithm"] == "itp"
               and r["shape"] != "summary"][0]
    assert itp_row["error"] == ""
    assert itp_row["reference"] == "lower_bound"


def test_columns_are_versioned_contract():
    header = run_suite(SMALL).splitlines()[0]
    assert header == ",".join(COLUMNS)


def test_load_config_validates():
    with pytest.raises(ValueError):
        load_config('{"instances": []}')
    with pytest.raises(ValueError):
        load_config('{"instances": [], "algorithms": ["simplex"]}')
