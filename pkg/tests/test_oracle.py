from __future__ import annotations

import pytest

from conftest import load_instance
from plansteiner.graphs import (
    DcstVariant,
    DgstVariant,
    DpstVariant,
    DstVariant,
    PolymatroidHandle,
    canonical_json,
    graph_from_json,
    parse_instance,
    reachable_from,
)
from plansteiner.oracle import (
    TooManyTerminalsError,
    exact_dst,
    exact_ell_dst,
    exact_min_density,
    exact_multiroot,
    exact_variant,
    exhaustive_minimum,
    steiner_table,
)

DIAMOND = {
    "n": 4,
    "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 1},
             {"id": 1, "tail": 1, "head": 3, "cost": 1},
             {"id": 2, "tail": 0, "head": 2, "cost": 2},
             {"id": 3, "tail": 2, "head": 3, "cost": 1}],
    "rotation": {"0": [0, 2], "1": [0, 1], "3": [1, 3], "2": [2, 3]},
}


def test_diamond_cost_two():
    g = graph_from_json(DIAMOND)
    cost, arcs = exact_dst(g, 0, [1, 3])
    assert cost == 2
    cov = reachable_from(g, arcs, [0])
    assert {1, 3} <= cov


def test_single_terminal_is_distance():
    g = graph_from_json(DIAMOND)
    cost, _ = exact_dst(g, 0, [3])
    assert cost == 2


def test_matches_exhaustive_enumeration():
    hits = 0
    for seed in range(25):
        inst = load_instance(kind="grid", rows=2, cols=3, k=2, seed=seed,
                             both_orientation_prob=0.3, cost_max=5)
        g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
        if len(g.arcs) > 16:
            continue
        c1, a1 = exact_dst(g, r, S)
        c2, _ = exhaustive_minimum(g, [r], lambda cov: all(t in cov for t in S))
        assert c1 == c2
        hits += 1
    assert hits >= 10


def test_table_monotone_in_subsets():
    inst = load_instance(kind="grid", rows=3, cols=3, k=4, seed=6)
    g, r = inst.graph, inst.roots[0]
    table = steiner_table(g, inst.terminals)
    k = len(inst.terminals)
    for mask in range(1 << k):
        for i in range(k):
            if mask >> i & 1:
                assert table.opt(mask & ~(1 << i), r) <= table.opt(mask, r) + 1e-9
    # singleton values are distances
    from plansteiner.graphs import shortest_path_tree

    dist, _ = shortest_path_tree(g, r)
    for i, t in enumerate(table.terminals):
        assert table.opt(1 << i, r) == pytest.approx(dist[t])


def test_terminal_cap_enforced():
    inst = load_instance(kind="grid", rows=5, cols=5, k=6, seed=0)
    with pytest.raises(TooManyTerminalsError):
        steiner_table(inst.graph, list(range(1, 16)))


def test_variant_collapses():
    for seed in range(8):
        inst = load_instance(kind="grid", rows=3, cols=4, k=4, seed=seed)
        g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
        dst_cost, _ = exact_dst(g, r, S)
        gst_cost, _ = exact_variant(g, r, DgstVariant(tuple((t,) for t in S)))
        assert gst_cost == dst_cost
        cst_cost, _ = exact_variant(g, r, DcstVariant((tuple(S),), (len(S),)))
        assert cst_cost == dst_cost
        pst_cost, _ = exact_variant(
            g, r, DpstVariant(PolymatroidHandle.coverage([[t] for t in S])))
        assert pst_cost == dst_cost


def test_min_density_star():
    arcs = [{"id": i, "tail": 0, "head": i + 1, "cost": i + 1} for i in range(3)]
    rot = {"0": [0, 1, 2], "1": [0], "2": [1], "3": [2]}
    g = graph_from_json({"n": 4, "arcs": arcs, "rotation": rot})
    dens, cost, val, arcs_out = exact_min_density(g, 0, [1, 2, 3])
    assert dens == 1 and val == 1 and cost == 1


def test_ell_dst_star():
    arcs = [{"id": i, "tail": 0, "head": i + 1, "cost": i + 1} for i in range(3)]
    rot = {"0": [0, 1, 2], "1": [0], "2": [1], "3": [2]}
    g = graph_from_json({"n": 4, "arcs": arcs, "rotation": rot})
    assert exact_ell_dst(g, 0, [1, 2, 3], 2)[0] == 3  # two cheapest spokes
    assert exact_ell_dst(g, 0, [1, 2, 3], 3)[0] == 6


def test_pc_dst_prize_tradeoff():
    obj = {
        "n": 2,
        "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 3}],
        "rotation": {"0": [0], "1": [0]},
        "problem": {"type": "dst", "roots": [0], "terminals": [1]},
    }
    g = parse_instance(canonical_json(obj)).graph
    cost, arcs = exact_variant(g, 0, DstVariant((1,)), prizes={1: 5})
    assert cost == 3 and arcs  # buying beats foregoing
    cost, arcs = exact_variant(g, 0, DstVariant((1,)), prizes={1: 2})
    assert cost == 2 and not arcs


def test_multiroot_reduction():
    for seed in range(6):
        inst = load_instance(kind="grid", rows=4, cols=4, k=4, seed=seed)
        c1, _ = exact_multiroot(inst.graph, inst.roots, inst.variant)
        c2, _ = exact_variant(inst.graph, inst.roots[0], inst.variant)
        assert c1 == c2  # single root: reduction is the identity
    for seed in range(6):
        inst = load_instance(kind="grid", rows=4, cols=4, k=4, roots=3, seed=seed)
        cost, arcs = exact_multiroot(inst.graph, inst.roots, inst.variant)
        cov = reachable_from(inst.graph, arcs, inst.roots)
        assert all(t in cov for t in inst.terminals)
        single, _ = exact_variant(inst.graph, inst.roots[0], inst.variant)
        assert cost <= single + 1e-9


def test_multiroot_matches_enumeration_small():
    hits = 0
    for seed in range(30):
        inst = load_instance(kind="grid", rows=2, cols=3, k=2, roots=2,
                             seed=seed, both_orientation_prob=0.2, cost_max=4)
        g, S = inst.graph, list(inst.terminals)
        if len(g.arcs) > 14:
            continue
        c1, _ = exact_multiroot(g, inst.roots, inst.variant)
        c2, _ = exhaustive_minimum(g, inst.roots,
                                   lambda cov: all(t in cov for t in S), 14)
        assert c1 == c2
        hits += 1
    assert hits >= 8
