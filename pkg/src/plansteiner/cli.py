"""Command line interface: gen, solve, gap, oracle, bench.

All outputs are JSON.  Exit codes: 0 ok, 2 bound violation,
3 infeasible instance, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as benchmod
from . import lp as lpmod
from . import oracle as oraclemod
from .bench import EXIT_BOUND_VIOLATION, EXIT_INFEASIBLE, EXIT_INPUT_ERROR, EXIT_OK
from .embedding import tree_emb
from .generate import GenSpec, GenSpecError, gen_bytes
from .graphs import DstVariant, canonical_json, parse_instance, reachable_from
from .pipeline import (
    PipelineError,
    UnreachableTerminalError,
    check_solution,
    resolve_gamma,
    solve_instance,
)
from .separator import prune_and_separate


def _write(path: str | None, payload, message: str | None = None):
    data = canonical_json(payload)
    if path:
        Path(path).write_bytes(data)
        if message:
            print(message)
    else:
        sys.stdout.write(data.decode())


def _load_instance(path: str):
    try:
        return parse_instance(Path(path).read_bytes())
    except FileNotFoundError as exc:
        raise SystemExit(f"input-error: {exc}") from exc


def cmd_gen(args) -> int:
    spec = GenSpec(kind=args.kind, rows=args.rows, cols=args.cols, n=args.n,
                   k=args.k, roots=args.roots, problem=args.problem,
                   groups=args.groups, group_size=tuple(args.group_size),
                   requirement_max=args.requirement_max,
                   poly_kind=args.poly_kind, cost_max=args.cost_max,
                   both_orientation_prob=args.both_prob,
                   prizes=args.prizes, prize_max=args.prize_max, seed=args.seed)
    try:
        data = gen_bytes(spec)
    except GenSpecError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        inst = _load_instance(args.input)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    gamma = args.gamma
    if gamma not in ("auto", "lp", "opt"):
        try:
            gamma = float(gamma)
        except ValueError:
            print(f"input-error: bad gamma {gamma!r}", file=sys.stderr)
            return EXIT_INPUT_ERROR
    try:
        rep = solve_instance(inst, args.algo, gamma, args.seed, args.ell)
    except (UnreachableTerminalError,) as exc:
        print(f"infeasible-instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PipelineError as exc:
        print(f"input-error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    chk = check_solution(inst, rep.arcs)
    reach = reachable_from(inst.graph, rep.arcs, inst.roots)
    covered = sorted(t for t in inst.terminals if t in reach)
    payload = rep.to_json()
    payload["covered"] = covered
    payload["stats"]["independent_check"] = {k: v for k, v in chk.items()}
    _write(args.output, payload)
    if args.dump_tree:
        r = inst.roots[0]
        terms = inst.terminals
        g_val = resolve_gamma(inst.graph, r, terms, gamma)
        T = tree_emb(inst.graph, r, terms, g_val)
        _write(args.dump_tree, T.to_json())
    if args.dump_separators:
        r = inst.roots[0]
        g_val = resolve_gamma(inst.graph, r, inst.terminals, gamma)
        ps = prune_and_separate(inst.graph, r, inst.terminals, g_val)
        _write(args.dump_separators, ps.separator.to_json())
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_gap(args) -> int:
    try:
        inst = _load_instance(args.input)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    if not isinstance(inst.variant, DstVariant) or len(inst.roots) != 1:
        print("input-error: gap needs a single-root dst instance", file=sys.stderr)
        return EXIT_INPUT_ERROR
    g, r = inst.graph, inst.roots[0]
    terms = inst.variant.terminals
    try:
        x, value = lpmod.solve_dst_lp(g, r, terms, args.method)
        sol = lpmod.round_lp(g, r, terms, x, check_input=False)
    except lpmod.LpInfeasibleError as exc:
        print(f"infeasible-instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    k = len(terms)
    bound = lpmod.round_lp_bound(k)
    payload = {"lp": value, "rounded": sol.cost,
               "ratio": sol.cost / value if value > 0 else None,
               "k": k, "bound": bound}
    _write(args.output, payload)
    if payload["ratio"] is not None and payload["ratio"] > bound + 1e-9:
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        inst = _load_instance(args.input)
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        if len(inst.roots) > 1:
            cost, arcs = oraclemod.exact_multiroot(inst.graph, inst.roots,
                                                   inst.variant, inst.prizes)
        else:
            cost, arcs = oraclemod.exact_variant(inst.graph, inst.roots[0],
                                                 inst.variant, inst.prizes)
    except oraclemod.TooManyTerminalsError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (oraclemod.UnreachableTerminalError,
            oraclemod.InfeasibleVariantError) as exc:
        print(f"infeasible-instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args.output, {"opt": cost, "arcs": sorted(arcs)})
    return EXIT_OK


def cmd_bench(args) -> int:
    algos = args.algos.split(",") if args.algos else None
    report, code = benchmod.bench_dir(args.dir, jobs=args.jobs, algos=algos,
                                      seed=args.seed, oracle_cap=args.oracle_cap)
    _write(args.report, report, message=f"report written to {args.report}")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plansteiner",
                                 description="Planar directed Steiner toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random planar instance")
    g.add_argument("--kind", default="grid",
                   choices=["grid", "disk", "seriesparallel"])
    g.add_argument("--rows", type=int, default=4)
    g.add_argument("--cols", type=int, default=4)
    g.add_argument("--n", type=int, default=12)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--roots", type=int, default=1)
    g.add_argument("--problem", default="dst",
                   choices=["dst", "dgst", "dcst", "dpst"])
    g.add_argument("--groups", type=int, default=2)
    g.add_argument("--group-size", type=int, nargs=2, default=(1, 3))
    g.add_argument("--requirement-max", type=int, default=2)
    g.add_argument("--poly-kind", default="coverage",
                   choices=["coverage", "truncated_partition", "modular"])
    g.add_argument("--cost-max", type=int, default=8)
    g.add_argument("--both-prob", type=float, default=0.5)
    g.add_argument("--prizes", action="store_true")
    g.add_argument("--prize-max", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--algo", required=True,
                   choices=["direct", "embed", "lp-round", "dgst", "dcst",
                            "dpst", "multiroot", "min-density"])
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--gamma", default="auto",
                   help="auto | lp | opt | <number>")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ell", type=int, default=None,
                   help="terminal count target for the min-density plumbing")
    s.add_argument("--dump-tree", default=None,
                   help="write the recursion-tree embedding as JSON")
    s.add_argument("--dump-separators", default=None,
                   help="write the top-level separator as JSON")
    s.set_defaults(func=cmd_solve)

    p = sub.add_parser("gap", help="LP value vs rounded cost")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--method", default="compact", choices=["compact", "cuts"])
    p.set_defaults(func=cmd_gap)

    o = sub.add_parser("oracle", help="exact optimum for small instances")
    o.add_argument("-i", "--input", required=True)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run the harness over a directory")
    b.add_argument("--dir", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--report", required=True)
    b.add_argument("--algos", default=None, help="comma separated override")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--oracle-cap", type=int, default=benchmod.ORACLE_CAP)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
