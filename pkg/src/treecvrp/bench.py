"""Benchmark harness: JSON suite config in, deterministic CSV out.

Rows are sorted by key (shape, n, Q, demand model, seed, algorithm), not by
completion order, and the wall-time column stays empty unless timing is
requested, so re-running the same config yields a byte-identical file. Solver
errors land in the row's error column; they never abort the suite.

CSV contract (version 1):
    shape,n,Q,demand_model,seed,algorithm,eps,cost,reference,ref_value,
    ratio,states,wall_ms,error
followed by one ``summary`` row per algorithm with the mean ratio over its
successful rows. Ratios are exact fractions rendered as ``p/q``.
"""

from __future__ import annotations

import csv
import io
import json
import time
from fractions import Fraction

from .baselines import itp_solve
from .dp import (DPParams, NoStructuredSolutionError, ResourceLimitError,
                 solve_bicriteria, solve_structured)
from .exact import InfeasibleError, OracleSizeError, solve_exact
from .generate import generate
from .verify import ratio_report

CSV_VERSION = 1
COLUMNS = ["shape", "n", "Q", "demand_model", "seed", "algorithm", "eps",
           "cost", "reference", "ref_value", "ratio", "states", "wall_ms",
           "error"]

ALGORITHMS = ("exact", "itp", "bicriteria", "qptas")


def _solve(algo: str, inst, eps: float, stats: dict):
    if algo == "exact":
        return solve_exact(inst)
    if algo == "itp":
        return itp_solve(inst)
    if algo == "bicriteria":
        return solve_bicriteria(inst, eps, stats=stats).solution
    if algo == "qptas":
        return solve_structured(inst, eps, DPParams.defaults(inst, eps),
                                stats=stats)
    raise ValueError(f"unknown algorithm {algo!r}")


def load_config(text: str) -> dict:
    config = json.loads(text)
    for key in ("instances", "algorithms"):
        if key not in config:
            raise ValueError(f"suite config missing {key!r}")
    for algo in config["algorithms"]:
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}")
    return config


def run_suite(config: dict, timing: bool = False) -> str:
    eps = float(config.get("eps", 0.5))
    rows = []
    for spec in config["instances"]:
        shape = spec["shape"]
        n, q = int(spec["n"]), int(spec["Q"])
        model = spec.get("demand_model", "unit")
        for seed in spec.get("seeds", [0]):
            inst = generate(shape, n, q, model, int(seed))
            for algo in config["algorithms"]:
                rows.append(_run_row(inst, shape, n, q, model, int(seed),
                                     algo, eps, timing))
    rows.sort(key=lambda r: (r["shape"], r["n"], r["Q"], r["demand_model"],
                             r["seed"], r["algorithm"]))
    rows.extend(_summaries(rows))
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()


def _run_row(inst, shape, n, q, model, seed, algo, eps, timing) -> dict:
    row = dict(shape=shape, n=n, Q=q, demand_model=model, seed=seed,
               algorithm=algo, eps=eps, cost="", reference="", ref_value="",
               ratio="", states="", wall_ms="", error="")
    stats: dict = {}
    start = time.perf_counter()
    try:
        sol = _solve(algo, inst, eps, stats)
    except (OracleSizeError, InfeasibleError, ResourceLimitError,
            NoStructuredSolutionError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    if timing:
        row["wall_ms"] = f"{(time.perf_counter() - start) * 1000:.1f}"
    rep = ratio_report(inst, sol, "oracle")
    row["cost"] = rep.cost
    row["reference"] = rep.reference
    row["ref_value"] = rep.reference_value
    row["ratio"] = str(rep.ratio) if rep.ratio is not None else ""
    if "states" in stats:
        row["states"] = stats["states"]
    if not rep.feasible:
        row["error"] = "infeasible solution"
    return row


def _summaries(rows) -> list[dict]:
    out = []
    for algo in sorted({r["algorithm"] for r in rows}):
        ratios = [Fraction(r["ratio"]) for r in rows
                  if r["algorithm"] == algo and r["ratio"] and not r["error"]]
        mean = sum(ratios) / len(ratios) if ratios else ""
        out.append(dict(shape="summary", n="", Q="", demand_model="", seed="",
                        algorithm=algo, eps="", cost="", reference="",
                        ref_value="", ratio=str(mean), states="", wall_ms="",
                        error=""))
    return out
