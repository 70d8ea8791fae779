"""Batch benchmark harness: run solvers over an instance directory,
compare against LP values and the exact oracle where tractable, and check
every algorithm against its cost guarantee.

Reports are deterministic given (corpus, seed): wall-clock times live in a
separate ``timing`` section so the rest of the report is reproducible
bit for bit; worker count only affects timing.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import lp as lpmod
from . import oracle as oraclemod
from .graphs import DcstVariant, DgstVariant, DpstVariant, DstVariant, parse_instance
from .pipeline import check_solution, growth_bound, solve_instance
from .separator import P_MAX

EXIT_OK = 0
EXIT_BOUND_VIOLATION = 2
EXIT_INFEASIBLE = 3
EXIT_INPUT_ERROR = 4

ORACLE_CAP = 14


def default_algorithms(inst) -> list[str]:
    if len(inst.roots) > 1:
        return ["multiroot"]
    v = inst.variant
    if isinstance(v, DstVariant):
        return ["direct", "embed", "lp-round", "min-density"]
    if isinstance(v, DgstVariant):
        return ["dgst"]
    if isinstance(v, DcstVariant):
        return ["dcst"]
    return ["dpst"]


def _bound_for(algo: str, inst, lp_value, oracle_opt, oracle_density):
    """(reference value, bound multiplier) for the algorithm's guarantee."""
    k = max(2, inst.k)
    if algo == "lp-round":
        return lp_value, lpmod.round_lp_bound(k)
    if algo in ("direct", "embed"):
        return oracle_opt, growth_bound(k)
    if algo == "min-density":
        return oracle_density, growth_bound(k)
    if algo == "multiroot" and isinstance(inst.variant, DstVariant):
        return oracle_opt, growth_bound(k) * (1 + math.log(k))
    return None, None


def run_instance(path: str, algos=None, seed: int = 0,
                 oracle_cap: int = ORACLE_CAP) -> dict:
    name = Path(path).name
    try:
        inst = parse_instance(Path(path).read_bytes())
    except Exception as exc:
        return {"instance": name, "error": f"input-error: {exc}"}
    record: dict = {"instance": name, "n": inst.graph.n, "k": inst.k,
                    "variant": inst.variant.name, "roots": len(inst.roots),
                    "results": {}}
    algos = algos or default_algorithms(inst)

    oracle_opt = oracle_density = None
    if inst.N <= oracle_cap:
        try:
            if len(inst.roots) > 1:
                oracle_opt, _ = oraclemod.exact_multiroot(
                    inst.graph, inst.roots, inst.variant, inst.prizes)
            else:
                oracle_opt, _ = oraclemod.exact_variant(
                    inst.graph, inst.roots[0], inst.variant, inst.prizes)
                if isinstance(inst.variant, DstVariant):
                    oracle_density = oraclemod.exact_min_density(
                        inst.graph, inst.roots[0], inst.variant.terminals)[0]
            record["oracle_opt"] = oracle_opt
        except oraclemod.InfeasibleVariantError as exc:
            record["oracle_opt"] = None
            record["oracle_error"] = str(exc)
        except oraclemod.UnreachableTerminalError as exc:
            record["error"] = f"infeasible-instance: {exc}"
            return record

    lp_value = None
    if isinstance(inst.variant, DstVariant) and len(inst.roots) == 1:
        try:
            _, lp_value = lpmod.solve_dst_lp(inst.graph, inst.roots[0],
                                             inst.variant.terminals)
            record["lp_value"] = lp_value
        except lpmod.LpInfeasibleError as exc:
            record["error"] = f"infeasible-instance: {exc}"
            return record

    for algo in algos:
        try:
            rep = solve_instance(inst, algo, "auto", seed)
        except Exception as exc:
            record["results"][algo] = {"error": str(exc)}
            continue
        chk = check_solution(inst, rep.arcs)
        entry = {"cost": rep.cost, "feasible": bool(chk["feasible"])}
        if algo == "min-density":
            entry["cost"] = rep.cost
            entry["density"] = rep.density
            entry["feasible"] = rep.feasible
        ref, mult = _bound_for(algo, inst, lp_value, oracle_opt, oracle_density)
        if algo == "min-density" and ref is not None:
            entry["ratio"] = rep.density / ref if ref > 0 else None
        elif ref is not None and ref > 0:
            entry["ratio"] = rep.cost / ref
        if ref is not None and mult is not None and entry.get("ratio") is not None:
            entry["bound"] = mult
            entry["bound_ok"] = entry["ratio"] <= mult + 1e-9
        if rep.lp_value is not None:
            entry["lp_value"] = rep.lp_value
        record["results"][algo] = entry
    return record


def _worker(args):
    return run_instance(*args)


def bench_dir(directory: str, jobs: int = 1, algos=None, seed: int = 0,
              oracle_cap: int = ORACLE_CAP):
    """Run the harness over every .json instance below directory.

    Returns (report dict, exit code).
    """
    paths = sorted(str(p) for p in Path(directory).glob("*.json"))
    t0 = time.time()
    tasks = [(p, algos, seed, oracle_cap) for p in paths]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_worker, tasks))
    else:
        rows = [run_instance(*t) for t in tasks]
    rows.sort(key=lambda rec: rec["instance"])

    agg: dict[str, dict] = {}
    code = EXIT_OK
    input_errors = infeasible = 0
    for rec in rows:
        if "error" in rec:
            if rec["error"].startswith("infeasible"):
                infeasible += 1
            else:
                input_errors += 1
            continue
        for algo, entry in rec["results"].items():
            a = agg.setdefault(algo, {"count": 0, "ratios": [], "violations": 0,
                                      "infeasible": 0, "errors": 0})
            if "error" in entry:
                a["errors"] += 1
                infeasible += 1
                continue
            a["count"] += 1
            if not entry["feasible"]:
                a["infeasible"] += 1
            if entry.get("ratio") is not None:
                a["ratios"].append(entry["ratio"])
            if entry.get("bound_ok") is False:
                a["violations"] += 1
    aggregates = {}
    for algo, a in sorted(agg.items()):
        ratios = a.pop("ratios")
        aggregates[algo] = {
            **a,
            "max_ratio": max(ratios) if ratios else None,
            "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        }
        if a["violations"]:
            code = max(code, EXIT_BOUND_VIOLATION)
        if a["infeasible"] or a["errors"]:
            code = max(code, EXIT_INFEASIBLE)
    if infeasible:
        code = max(code, EXIT_INFEASIBLE)
    if input_errors:
        code = max(code, EXIT_INPUT_ERROR)
    report = {
        "constants": {"p_max": P_MAX},
        "instances": rows,
        "aggregates": aggregates,
        "timing": {"wall_seconds": time.time() - t0, "jobs": jobs},
    }
    return report, code


def report_without_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}
