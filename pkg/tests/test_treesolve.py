from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from plansteiner.treesolve import (
    InfeasibleGroupError,
    InfeasibleRequirementError,
    ResidualFunction,
    TreeInstance,
    TreeSolveError,
    binarize,
    dcst_iterative_round,
    dcst_lp_solve,
    density_better,
    exact_tree_gst,
    gkr_round,
    greedy_phase,
    gst_lp_solve,
    ldst_dp,
    min_density_dgst,
    min_density_tree,
    monotonize_capacities,
    pc_dst_dp,
    recursive_greedy_polymatroid,
)


def random_tree(n, rng, lo=0, hi=5, exclusive_prob=0.4):
    parent = [None] + [rng.randrange(v) for v in range(1, n)]
    cost = [0] + [rng.randint(lo, hi) for _ in range(1, n)]
    t0 = TreeInstance(parent, cost, 0)
    excl = frozenset(v for v in range(n)
                     if len(t0.children[v]) == 2 and rng.random() < exclusive_prob)
    return TreeInstance(parent, cost, 0, excl)


def enum_subtrees(t):
    """All rooted subtrees honoring exclusive nodes (exponential)."""
    for bits in range(1 << (t.n - 1)):
        s = {0} | {v for v in range(1, t.n) if bits >> (v - 1) & 1}
        if any(v != 0 and t.parent[v] not in s for v in s):
            continue
        if any(sum(1 for c in t.children[v] if c in s) > 1
               for v in t.exclusive if v in s):
            continue
        yield s


def test_counting_dp_matches_enumeration():
    rng = random.Random(7)
    for trial in range(120):
        t = random_tree(rng.randint(2, 10), rng)
        terms = [v for v in range(1, t.n) if rng.random() < 0.5]
        if not terms:
            continue
        by_count: dict[int, float] = {}
        for s in enum_subtrees(t):
            c = t.solution_cost(s)
            j = len(set(terms) & s)
            if c < by_count.get(j, math.inf):
                by_count[j] = c
        for ell in range(1, len(terms) + 1):
            want = min((c for j, c in by_count.items() if j >= ell),
                       default=None)
            if want is None:
                with pytest.raises(InfeasibleRequirementError):
                    ldst_dp(t, terms, ell)
                continue
            cost, nodes = ldst_dp(t, terms, ell)
            assert cost == pytest.approx(want)
            assert len(set(terms) & nodes) >= ell


def test_min_density_tree_matches_enumeration():
    rng = random.Random(8)
    for trial in range(120):
        t = random_tree(rng.randint(2, 10), rng)
        terms = [v for v in range(1, t.n) if rng.random() < 0.5]
        if not terms:
            continue
        best = None
        for s in enum_subtrees(t):
            j = len(set(terms) & s)
            if not j:
                continue
            c = t.solution_cost(s)
            if best is None or c * best[1] < best[0] * j:
                best = (c, j)
        nodes, dens, j = min_density_tree(t, terms)
        assert dens == pytest.approx(best[0] / best[1])


def test_min_density_tree_examples():
    # leaves at costs 1,2,3: densities 1, 3/2, 2 -> pick one leaf
    t = TreeInstance([None, 0, 0, 0], [0, 1, 2, 3], 0)
    nodes, dens, j = min_density_tree(t, [1, 2, 3])
    assert dens == 1 and j == 1
    # uniform costs tie at every count; smallest count wins
    t = TreeInstance([None, 0, 0, 0], [0, 2, 2, 2], 0)
    nodes, dens, j = min_density_tree(t, [1, 2, 3])
    assert dens == 2 and j == 1


def test_pc_dp_matches_enumeration():
    rng = random.Random(9)
    for trial in range(120):
        t = random_tree(rng.randint(2, 10), rng)
        prizes = {v: rng.randint(0, 6) for v in range(1, t.n)
                  if rng.random() < 0.6}
        want = min(t.solution_cost(s) +
                   sum(p for v, p in prizes.items() if v not in s)
                   for s in enum_subtrees(t))
        cost, _ = pc_dst_dp(t, prizes)
        assert cost == pytest.approx(want)


def test_pc_dp_examples():
    t = TreeInstance([None, 0], [0, 3], 0)
    assert pc_dst_dp(t, {1: 5})[0] == 3  # buy
    assert pc_dst_dp(t, {1: 2})[0] == 2  # skip


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_binarize_preserves_counting_and_pc_optima(seed):
    rng = random.Random(seed)
    t = random_tree(rng.randint(2, 14), rng)
    tb = binarize(t)
    assert all(len(tb.children[v]) <= 2 for v in range(tb.n))
    terms = [v for v in range(1, t.n) if rng.random() < 0.5]
    for ell in range(1, len(terms) + 1):
        try:
            c1, _ = ldst_dp(t, terms, ell)
        except InfeasibleRequirementError:
            with pytest.raises(InfeasibleRequirementError):
                ldst_dp(tb, terms, ell)
            continue
        c2, nodes2 = ldst_dp(tb, terms, ell)
        assert c1 == pytest.approx(c2)
        mapped = tb.strip_aux(nodes2)
        assert t.solution_cost(mapped) == pytest.approx(c2)
    prizes = {v: rng.randint(0, 5) for v in range(1, t.n)}
    assert pc_dst_dp(t, prizes)[0] == pytest.approx(pc_dst_dp(tb, prizes)[0])


def test_ldst_exclusive_infeasibility():
    # exclusive root over two single-terminal subtrees cannot reach both
    t = TreeInstance([None, 0, 0], [0, 1, 1], 0, frozenset({0}))
    with pytest.raises(InfeasibleRequirementError):
        ldst_dp(t, [1, 2], 2)
    cost, _ = ldst_dp(t, [1, 2], 1)
    assert cost == 1


def test_ldst_three_leaves():
    t = TreeInstance([None, 0, 0, 0], [0, 1, 2, 3], 0)
    assert ldst_dp(t, [1, 2, 3], 2)[0] == 3


def test_ell_out_of_range():
    t = TreeInstance([None, 0], [0, 1], 0)
    with pytest.raises(TreeSolveError, match="ell-out-of-range"):
        ldst_dp(t, [1], 2)


def test_gst_lp_star_examples():
    t = TreeInstance([None, 0, 0], [0, 1, 1], 0)
    _, obj = gst_lp_solve(t, [[1], [2]])
    assert obj == pytest.approx(2)
    _, obj = gst_lp_solve(t, [[1, 2]])
    assert obj == pytest.approx(1)
    with pytest.raises(InfeasibleGroupError):
        gst_lp_solve(t, [[]])


def test_gst_lp_below_integral_optimum():
    rng = random.Random(3)
    for trial in range(40):
        t = random_tree(rng.randint(3, 10), rng, lo=1, exclusive_prob=0)
        terms = [v for v in range(1, t.n) if rng.random() < 0.6]
        if not terms:
            continue
        groups = []
        pool = list(terms)
        rng.shuffle(pool)
        while pool:
            size = min(len(pool), rng.randint(1, 3))
            groups.append(pool[:size])
            pool = pool[size:]
        _, frac = gst_lp_solve(t, groups)
        integral, _ = exact_tree_gst(t, groups)
        assert frac <= integral + 1e-6


def test_gkr_round_integral_support():
    t = TreeInstance([None, 0, 1, 0], [0, 1, 1, 1], 0)
    x = {1: 1.0, 2: 1.0, 3: 0.0}
    nodes, stats = gkr_round(t, [[2]], x, random.Random(0))
    assert nodes == {0, 1, 2}


def test_gkr_round_always_covers():
    rng = random.Random(5)
    for trial in range(40):
        t = random_tree(rng.randint(3, 12), rng, lo=1, exclusive_prob=0)
        terms = [v for v in range(1, t.n) if rng.random() < 0.6] or [t.n - 1]
        groups = [[v] for v in terms]
        x, _ = gst_lp_solve(t, groups)
        nodes, _ = gkr_round(t, groups, x, rng)
        assert all(any(m in nodes for m in grp) for grp in groups)
        assert all(t.parent[v] in nodes for v in nodes if v != 0)


def test_monotonize_preserves_feasibility():
    t = TreeInstance([None, 0, 1], [0, 1, 1], 0)
    x = {1: 0.4, 2: 0.9}
    xm = monotonize_capacities(t, x)
    assert xm[2] <= xm[1] <= 1


def test_min_density_dgst_examples():
    t = TreeInstance([None, 0, 0], [0, 1, 3], 0)
    nodes, hit, dens = min_density_dgst(t, [[1], [2]], rng=random.Random(0))
    assert dens == 1 and hit == [0]
    # single group: cheapest root path
    t = TreeInstance([None, 0, 1, 0], [0, 2, 3, 4], 0)
    nodes, hit, dens = min_density_dgst(t, [[2, 3]], rng=random.Random(0))
    assert dens == pytest.approx(4)


def test_min_density_dgst_beats_every_root_path():
    rng = random.Random(6)
    for trial in range(30):
        t = random_tree(rng.randint(3, 12), rng, lo=1, exclusive_prob=0)
        terms = [v for v in range(1, t.n) if rng.random() < 0.5] or [t.n - 1]
        groups = [[v] for v in terms]
        _, hit, dens = min_density_dgst(t, groups, rng=rng)
        for v in terms:
            nodes = set(t.root_path_nodes(v))
            cover = sum(1 for grp in groups if set(grp) & nodes)
            assert dens <= t.solution_cost(nodes) / cover + 1e-9


def test_dcst_lp_and_round_basics():
    t = TreeInstance([None, 0, 0], [0, 1, 1], 0)
    owner = {1: 101, 2: 102}
    lp = dcst_lp_solve(t, [(1, 2)], [2], owner)
    assert lp.objective == pytest.approx(2)
    # per-edge capacity carries the absorbed flow
    assert lp.x[1] == pytest.approx(lp.f[1])
    nodes, _ = dcst_iterative_round(t, lp, [(1, 2)], [2], owner, random.Random(0))
    assert {1, 2} <= nodes
    lp0 = dcst_lp_solve(t, [(1, 2)], [0], owner)
    assert lp0.objective == pytest.approx(0)


def test_dcst_requirement_one_degenerates_to_group_cover():
    t = TreeInstance([None, 0, 0, 0], [0, 2, 1, 5], 0)
    owner = {1: 101, 2: 102, 3: 103}
    lp = dcst_lp_solve(t, [(1, 2, 3)], [1], owner)
    nodes, _ = dcst_iterative_round(t, lp, [(1, 2, 3)], [1], owner,
                                    random.Random(0))
    assert len({owner[c] for c in nodes if c in owner}) >= 1


def test_dcst_infeasible_requirement():
    t = TreeInstance([None, 0], [0, 1], 0)
    with pytest.raises(InfeasibleRequirementError):
        dcst_lp_solve(t, [(1,)], [2], {1: 101})


def test_dcst_covers_distinct_owners():
    rng = random.Random(10)
    for trial in range(30):
        t = random_tree(rng.randint(5, 12), rng, lo=1, exclusive_prob=0)
        nodes_pool = list(range(1, t.n))
        rng.shuffle(nodes_pool)
        owner = {}
        originals = [300 + i for i in range(3)]
        for i, v in enumerate(nodes_pool[: min(6, len(nodes_pool))]):
            owner[v] = originals[i % 3]
        grp = tuple(owner)
        h = min(2, len({owner[c] for c in grp}))
        lp = dcst_lp_solve(t, [grp], [h], owner)
        nodes, _ = dcst_iterative_round(t, lp, [grp], [h], owner, rng)
        assert len({owner[c] for c in nodes if c in owner}) >= h


class Coverage:
    def __init__(self, groups):
        self.groups = [set(g) for g in groups]

    def value(self, z):
        z = set(z)
        return sum(1 for g in self.groups if g & z)


class Modular:
    def __init__(self, w):
        self.w = w

    def value(self, z):
        return sum(self.w.get(v, 0) for v in z)


def test_recursive_greedy_single_support():
    t = TreeInstance([None, 0, 1, 0], [0, 2, 1, 5], 0)
    nodes, _ = recursive_greedy_polymatroid(t, Modular({2: 1}))
    assert nodes == {0, 1, 2}


def test_recursive_greedy_star_coverage():
    t = TreeInstance([None, 0, 0, 0], [0, 2, 3, 4], 0)
    nodes, stats = recursive_greedy_polymatroid(t, Coverage([[1], [2], [3]]))
    assert nodes == {0, 1, 2, 3}


def test_recursive_greedy_saturates_random():
    rng = random.Random(12)
    for trial in range(30):
        t = binarize(random_tree(rng.randint(4, 12), rng, lo=1, exclusive_prob=0))
        members = [v for v in range(1, t.n) if v not in t.aux and rng.random() < 0.5]
        if not members:
            continue
        groups = [members[i::3] for i in range(3)]
        groups = [g for g in groups if g]
        f = Coverage(groups)
        nodes, _ = recursive_greedy_polymatroid(t, f)
        assert f.value(nodes) == len(groups)


def test_residual_function_wraps():
    f = Coverage([[1, 2], [3]])
    res = ResidualFunction(f, {1})
    assert res.value({3}) == 1
    assert res.value({2}) == 0


def test_greedy_phase_positive_gain():
    t = TreeInstance([None, 0, 0], [0, 1, 4], 0)
    sol, cost, gain = greedy_phase(t, Coverage([[1], [2]]))
    assert gain >= 1 and 1 in sol


def test_density_better_zero_costs():
    assert density_better(1, 0, 1, 5)
    assert not density_better(1, 5, 1, 0)
    assert density_better(3, 2, 1, 1)  # 1.5 vs 1
