from __future__ import annotations

import pytest

from conftest import load_instance
from plansteiner.graphs import (
    graph_from_json,
    shortest_path_tree,
    validate_planar_embedding,
)
from plansteiner.separator import (
    P_MAX,
    fundamental_cycle_separator,
    prune_and_separate,
    shortest_path_separator,
    triangulate,
)

SQUARE = {
    "n": 4,
    "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 1},
             {"id": 1, "tail": 1, "head": 2, "cost": 1},
             {"id": 2, "tail": 2, "head": 3, "cost": 1},
             {"id": 3, "tail": 3, "head": 0, "cost": 1}],
    "rotation": {"0": [0, 3], "1": [0, 1], "2": [1, 2], "3": [2, 3]},
}


def test_triangulate_square_adds_one_diagonal_per_big_face():
    g = graph_from_json(SQUARE)
    t = triangulate(g)
    added = [a for a in t.arcs if t.arcs[a].aux]
    assert len(added) == 2  # both sides of the square are 4-faces
    assert all(len(o) <= 3 for o in t.face_orbits())
    validate_planar_embedding(t)


def test_triangulate_idempotent():
    g = graph_from_json(SQUARE)
    t1 = triangulate(g)
    t2 = triangulate(t1)
    assert len(t2.arcs) == len(t1.arcs)


def test_triangulate_grid_all_faces_triangles():
    inst = load_instance(kind="grid", rows=6, cols=6, k=4, seed=2)
    t = triangulate(inst.graph)
    assert all(len(o) <= 3 for o in t.face_orbits())
    validate_planar_embedding(t)
    # aux arcs never carry cost
    assert all(t.arcs[a].cost == 0 for a in t.arcs if t.arcs[a].aux)


def test_fundamental_cycle_triangle_balanced():
    obj = {
        "n": 3,
        "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 1},
                 {"id": 1, "tail": 0, "head": 2, "cost": 1},
                 {"id": 2, "tail": 1, "head": 2, "cost": 1}],
        "rotation": {"0": [0, 1], "1": [0, 2], "2": [2, 1]},
    }
    g = graph_from_json(obj)
    _, parent = shortest_path_tree(g, 0)
    w = {0: 1, 1: 1, 2: 1}
    cyc = fundamental_cycle_separator(g, parent, 0, w)
    assert not cyc.degenerate
    assert cyc.inside_weight <= 2 and cyc.outside_weight <= 2


def test_fundamental_cycle_star_balance():
    # star on 5 leaves; triangulation closes the fan so cycles exist
    arcs = [{"id": i, "tail": 0, "head": i + 1, "cost": 1} for i in range(5)]
    rot = {"0": [0, 1, 2, 3, 4]}
    for i in range(5):
        rot[str(i + 1)] = [i]
    g = graph_from_json({"n": 6, "arcs": arcs, "rotation": rot})
    t = triangulate(g)
    _, parent = shortest_path_tree(g, 0)
    w = {i + 1: 1 for i in range(5)}
    cyc = fundamental_cycle_separator(t, parent, 0, w)
    total = 5
    assert max(cyc.inside_weight, cyc.outside_weight) <= 2 * total / 3
    # enumerate: the chosen edge is at least as balanced as every other
    best = min(max(fundamental_cycle_separator(t, parent, 0, w).inside_weight,
                   fundamental_cycle_separator(t, parent, 0, w).outside_weight)
               for _ in range(1))
    assert max(cyc.inside_weight, cyc.outside_weight) <= best + 1e-9


def test_fundamental_cycle_degenerate_on_path():
    obj = {
        "n": 4,
        "arcs": [{"id": 0, "tail": 0, "head": 1, "cost": 1},
                 {"id": 1, "tail": 1, "head": 2, "cost": 1},
                 {"id": 2, "tail": 2, "head": 3, "cost": 1}],
        "rotation": {"0": [0], "1": [0, 1], "2": [1, 2], "3": [2]},
    }
    g = graph_from_json(obj)
    _, parent = shortest_path_tree(g, 0)
    cyc = fundamental_cycle_separator(g, parent, 0, {2: 1, 3: 2})
    assert cyc.degenerate
    assert len(cyc.paths) == 1
    # the centroid path reaches the weighted part
    assert cyc.paths[0]


def test_separator_two_weighted_vertices_single_path():
    inst = load_instance(kind="grid", rows=4, cols=4, k=2, seed=3)
    g, r = inst.graph, inst.roots[0]
    res = shortest_path_separator(g, r, {t: 1 for t in inst.terminals})
    assert len(res.paths) == 1
    assert res.beta_achieved <= 0.5


def test_separator_star_singletons():
    arcs = [{"id": i, "tail": 0, "head": i + 1, "cost": 1} for i in range(5)]
    rot = {"0": [0, 1, 2, 3, 4]}
    for i in range(5):
        rot[str(i + 1)] = [i]
    g = graph_from_json({"n": 6, "arcs": arcs, "rotation": rot})
    res = shortest_path_separator(g, 0, {i + 1: 1 for i in range(5)})
    assert all(len(c.vertices) == 1 for c in res.components)
    assert all(c.weight == 1 for c in res.components)
    assert res.beta_achieved == pytest.approx(1 / 5)


def test_separator_sweep_grids():
    for seed in range(40):
        inst = load_instance(kind="grid", rows=6, cols=6, k=8, seed=seed)
        g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
        gamma = g.total_cost()
        res = prune_and_separate(g, r, S, gamma)
        sep = res.separator
        assert sep.beta_achieved <= 0.5 + 1e-12
        assert len(sep.paths) <= P_MAX
        assert sum(p.cost for p in sep.paths) <= P_MAX * gamma
        # paths are shortest dipaths in the pruned graph
        dist, _ = shortest_path_tree(res.pruned_graph, r)
        for p in sep.paths:
            assert p.cost == pytest.approx(dist[p.vertices[-1]])
            run = 0
            for a in p.arcs:
                arc = g.arcs[a]
                run += arc.cost
                assert dist[arc.head] == pytest.approx(run)
        # components are vertex-disjoint and hold at most half the terminals
        seen = set()
        for sub in res.subinstances:
            assert not (set(sub.vertices) & seen)
            seen |= set(sub.vertices)
            assert len(sub.terminals) <= len(S) / 2
        # no aux arcs anywhere near the interface
        assert all(not g.arcs[a].aux for p in sep.paths for a in p.arcs)
        for sub in res.subinstances:
            assert all(not sub.graph.arcs[a].aux for a in sub.graph.arcs)
            validate_planar_embedding(sub.graph)


def test_prune_single_terminal_shortest_path():
    inst = load_instance(kind="grid", rows=4, cols=4, k=1, seed=1)
    g, r = inst.graph, inst.roots[0]
    t = inst.terminals[0]
    dist, _ = shortest_path_tree(g, r)
    res = prune_and_separate(g, r, [t], gamma=dist[t] + 1)
    assert t in res.separator.vertices
    assert all(not sub.terminals for sub in res.subinstances)


def test_prune_reports_out_of_radius_terminals():
    inst = load_instance(kind="grid", rows=4, cols=4, k=3, seed=2)
    g, r = inst.graph, inst.roots[0]
    res = prune_and_separate(g, r, list(inst.terminals), gamma=0.5)
    assert set(res.pruned_terminals) == set(inst.terminals)
    assert res.subinstances == []


def test_prune_rejects_nonpositive_gamma():
    inst = load_instance(kind="grid", rows=3, cols=3, k=2, seed=0)
    with pytest.raises(ValueError, match="gamma-nonpositive"):
        prune_and_separate(inst.graph, inst.roots[0], list(inst.terminals), 0)


def test_separator_disk_and_seriesparallel():
    for seed in range(10):
        for kw in (dict(kind="disk", n=14, k=6), dict(kind="seriesparallel", n=20, k=6)):
            inst = load_instance(seed=seed, **kw)
            g, r, S = inst.graph, inst.roots[0], list(inst.terminals)
            res = prune_and_separate(g, r, S, g.total_cost())
            assert res.separator.beta_achieved <= 0.5 + 1e-12
            for sub in res.subinstances:
                assert len(sub.terminals) <= len(S) / 2
