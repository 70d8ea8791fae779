from __future__ import annotations

import math

import pytest

from conftest import load_instance
from plansteiner.graphs import check_out_tree, reachable_from
from plansteiner.oracle import exact_min_density, exact_multiroot, exact_variant
from plansteiner.pipeline import (
    UnreachableTerminalError,
    check_solution,
    growth_bound,
    min_density_planar,
    solve_dcst,
    solve_dgst,
    solve_dpst,
    solve_dst_direct,
    solve_dst_via_embedding,
    solve_instance,
    solve_ldst_planar,
    solve_lp_round,
    solve_multiroot,
    solve_pc_dst_planar,
)


def test_direct_single_terminal_is_shortest_path():
    inst = load_instance(kind="grid", rows=4, cols=4, k=1, seed=0)
    g, r = inst.graph, inst.roots[0]
    rep = solve_dst_direct(g, r, inst.terminals)
    from plansteiner.graphs import shortest_path_tree

    dist, _ = shortest_path_tree(g, r)
    assert rep.cost == pytest.approx(dist[inst.terminals[0]])


def test_direct_infeasible_when_gamma_too_small():
    inst = load_instance(kind="grid", rows=4, cols=4, k=2, seed=1)
    with pytest.raises(UnreachableTerminalError):
        solve_dst_direct(inst.graph, inst.roots[0], inst.terminals, gamma=0.5)


def test_direct_and_embed_agree_within_band():
    for seed in range(12):
        inst = load_instance(kind="grid", rows=4, cols=4, k=5, seed=seed)
        g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
        a = solve_dst_direct(g, r, S)
        b = solve_dst_via_embedding(g, r, S, seed=seed)
        assert a.feasible and b.feasible
        assert b.cost <= 2 * a.cost + 1e-9 and a.cost <= 2 * b.cost + 1e-9
        ok, _ = check_out_tree(g, a.arcs, r)
        assert ok


def test_solution_reports_pass_independent_checker():
    for seed in range(6):
        inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=seed)
        for algo in ("direct", "embed", "lp-round", "min-density"):
            rep = solve_instance(inst, algo, seed=seed)
            chk = check_solution(inst, rep.arcs)
            if algo != "min-density":
                assert chk["feasible"], (seed, algo)
            assert chk["cost"] == pytest.approx(rep.cost)


def test_dgst_trees_touch_single_member_per_group():
    inst = load_instance(kind="grid", rows=4, cols=4, k=5, problem="dgst",
                         groups=3, seed=4)
    rep = solve_dgst(inst.graph, inst.roots[0], inst.variant.groups, seed=4)
    assert rep.feasible
    chk = check_solution(inst, rep.arcs)
    assert chk["feasible"]


def test_dgst_singleton_groups_reduce_to_dst():
    inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=5)
    groups = [(t,) for t in inst.terminals]
    rep = solve_dgst(inst.graph, inst.roots[0], groups, seed=5)
    covered = reachable_from(inst.graph, rep.arcs, [inst.roots[0]])
    assert all(t in covered for t in inst.terminals)


def test_dcst_full_requirement_reaches_every_member():
    inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=6)
    group = tuple(inst.terminals)
    rep = solve_dcst(inst.graph, inst.roots[0], [group], [len(group)], seed=6)
    covered = reachable_from(inst.graph, rep.arcs, [inst.roots[0]])
    assert all(t in covered for t in group)


def test_dcst_requirement_one_consistent_with_dgst():
    inst = load_instance(kind="grid", rows=4, cols=4, k=5, problem="dcst",
                         groups=3, group_size=(1, 3), seed=7)
    v = inst.variant
    rep = solve_dcst(inst.graph, inst.roots[0], v.groups,
                     [1] * len(v.groups), seed=7)
    covered = reachable_from(inst.graph, rep.arcs, [inst.roots[0]])
    assert all(any(t in covered for t in grp) for grp in v.groups)


def test_dpst_agrees_with_group_feasibility():
    from plansteiner.graphs import PolymatroidHandle

    inst = load_instance(kind="grid", rows=4, cols=4, k=5, problem="dgst",
                         groups=3, seed=8)
    groups = [list(grp) for grp in inst.variant.groups]
    f = PolymatroidHandle.coverage(groups)
    rep = solve_dpst(inst.graph, inst.roots[0], f, seed=8)
    covered = reachable_from(inst.graph, rep.arcs, [inst.roots[0]])
    assert all(any(t in covered for t in grp) for grp in groups)
    # truncated partition agrees with covering feasibility
    reqs = [min(2, len(grp)) for grp in groups]
    f2 = PolymatroidHandle.truncated_partition(groups, reqs)
    rep2 = solve_dpst(inst.graph, inst.roots[0], f2, seed=8)
    covered2 = reachable_from(inst.graph, rep2.arcs, [inst.roots[0]])
    assert all(len([t for t in grp if t in covered2]) >= h
               for grp, h in zip(groups, reqs))


def test_min_density_single_terminal():
    inst = load_instance(kind="grid", rows=4, cols=4, k=1, seed=9)
    g, r = inst.graph, inst.roots[0]
    rep = min_density_planar(g, r, inst.terminals)
    from plansteiner.graphs import shortest_path_tree

    dist, _ = shortest_path_tree(g, r)
    assert rep.density == pytest.approx(dist[inst.terminals[0]])


def test_min_density_respects_bound():
    for seed in range(10):
        inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=seed)
        g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
        rep = min_density_planar(g, r, S)
        ref, _, _, _ = exact_min_density(g, r, S)
        assert rep.density <= growth_bound(len(S)) * ref + 1e-9
        # distinct originals covered equals the tree-side count
        assert len(rep.covered["terminals_covered"]) == rep.stats["tree_count"]


def test_ldst_and_pc_planar():
    inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=10)
    g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
    for ell in range(1, len(S) + 1):
        rep = solve_ldst_planar(g, r, S, ell)
        assert rep.feasible and len(rep.covered["terminals_covered"]) >= ell
    rep = solve_pc_dst_planar(g, r, {t: 4 for t in S})
    assert rep.feasible
    # huge prizes force full coverage; tiny prizes allow the empty tree
    rep_all = solve_pc_dst_planar(g, r, {t: 10_000 for t in S})
    covered = reachable_from(g, rep_all.arcs, [r])
    assert all(t in covered for t in S)
    rep_none = solve_pc_dst_planar(g, r, {t: 0.001 for t in S})
    assert rep_none.cost <= sum([0.001] * len(S)) + 1e-9


def test_multiroot_single_root_matches_single_solver_feasibility():
    inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=11)
    rep = solve_multiroot(inst)
    assert rep.feasible
    chk = check_solution(inst, rep.arcs)
    assert chk["feasible"]


def test_multiroot_two_adjacent_roots():
    # two roots, each adjacent (cost 1) to its own terminal: total cost 2
    obj = {
        "n": 4,
        "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 1},
                 {"id": 1, "tail": 2, "head": 3, "cost": 1}],
        "rotation": {"0": [0], "1": [0], "2": [1], "3": [1]},
        "problem": {"type": "dst", "roots": [0, 2], "terminals": [1, 3]},
    }
    from plansteiner.graphs import canonical_json, parse_instance

    inst = parse_instance(canonical_json(obj))
    rep = solve_multiroot(inst)
    assert rep.feasible and rep.cost == 2


def test_multiroot_bound_and_iterations():
    for seed in range(6):
        inst = load_instance(kind="grid", rows=5, cols=5, k=5, roots=3, seed=seed)
        rep = solve_multiroot(inst)
        assert rep.feasible
        k = len(inst.terminals)
        assert rep.stats["iterations"] <= k
        opt, _ = exact_multiroot(inst.graph, inst.roots, inst.variant)
        assert rep.cost <= growth_bound(k) * (1 + math.log(k)) * opt + 1e-9
        # branching: in-degree at most one
        indeg = {}
        for a in rep.arcs:
            arc = inst.graph.arcs[a]
            indeg[arc.head] = indeg.get(arc.head, 0) + 1
        assert all(d == 1 for d in indeg.values())


def test_multiroot_variant_feasibility():
    for seed in range(4):
        for prob in ("dgst", "dcst", "dpst"):
            inst = load_instance(kind="grid", rows=5, cols=5, k=5, roots=2,
                                 problem=prob, groups=2, group_size=(1, 3),
                                 seed=seed)
            rep = solve_multiroot(inst, seed=seed)
            assert rep.feasible, (seed, prob)
            assert check_solution(inst, rep.arcs)["feasible"]


def test_lp_round_report_carries_bound():
    inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=12)
    rep = solve_lp_round(inst.graph, inst.roots[0], inst.terminals)
    assert rep.feasible and rep.lp_value is not None
    assert rep.cost <= rep.stats["bound"] * rep.lp_value + 1e-9


def test_oracle_ratio_sanity():
    for seed in range(8):
        inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=seed)
        opt, _ = exact_variant(inst.graph, inst.roots[0], inst.variant)
        for algo in ("direct", "embed"):
            rep = solve_instance(inst, algo, gamma=opt, seed=seed)
            assert rep.cost <= growth_bound(inst.k) * opt + 1e-9
