"""Self-contained LP solving and the cut relaxation machinery.

``simplex_solve`` is a dense two-phase primal simplex (numpy tableau).
Pricing is Dantzig by default and switches to Bland's rule as the
anti-cycling safeguard whenever the objective stalls, so runs are
deterministic and finite.

The Steiner cut relaxation demands one unit of out-capacity on every cut
separating the root from a terminal.  Two equivalent solvers: a compact
flow form (per-terminal preflow variables; excess inequalities keep the
row count down without changing the optimum) and a cutting-plane loop
using max-flow separation.  ``round_lp`` turns any feasible fractional
solution into a tree: scale up, prune far vertices, buy a separator and
recurse on the contracted components with the restricted solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import (
    ArcSetSolution,
    EmbeddedDigraph,
    INF,
    check_out_tree,
    induced_subgraph,
    prune_to_out_tree,
    reachable_from,
    root_path,
    shortest_path_tree,
)
from .separator import P_MAX, prune_and_separate

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
ENTER_TOL = 5e-8  # reduced-cost threshold; looser than the pivot tolerance


class LpInfeasibleError(ValueError):
    pass


class LpUnboundedError(ValueError):
    pass


@dataclass
class LpProblem:
    """min objective . x  subject to  row . x >= rhs for every row, x >= 0."""

    num_vars: int
    objective: list[float]
    rows: list[tuple[dict[int, float], float]]


@dataclass
class LpSolution:
    status: str
    x: list[float]
    objective: float


def _pivot(T: np.ndarray, zrow: np.ndarray, basis: list[int], row: int, col: int):
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])
    zrow -= zrow[col] * T[row]
    basis[row] = col


def _run_simplex(T: np.ndarray, zrow: np.ndarray, basis: list[int],
                 allowed: int) -> str:
    """Iterate pivots until optimal/unbounded; returns the status."""
    stall = 0
    last_obj = zrow[-1]
    bland = False
    while True:
        reduced = zrow[:allowed]
        if bland:
            cand = np.nonzero(reduced < -ENTER_TOL)[0]
            if cand.size == 0:
                return "optimal"
            col = int(cand[0])
        else:
            col = int(np.argmin(reduced))
            if reduced[col] >= -ENTER_TOL:
                return "optimal"
        colvals = T[:, col]
        mask = colvals > PIVOT_TOL
        if not mask.any():
            if reduced[col] > -1e-6:  # numerical drift, not a real ray
                return "optimal"
            return "unbounded"
        ratios = np.full(len(basis), np.inf)
        ratios[mask] = T[mask, -1] / colvals[mask]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + PIVOT_TOL)[0]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, zrow, basis, row, col)
        if abs(zrow[-1] - last_obj) <= PIVOT_TOL:
            stall += 1
            if stall > 2 * len(basis) + 20:
                bland = True
        else:
            stall = 0
            last_obj = zrow[-1]


def simplex_solve(p: LpProblem) -> LpSolution:
    """Two-phase dense simplex; raises on infeasible/unbounded."""
    m, n = len(p.rows), p.num_vars
    A = np.zeros((m, n))
    b = np.zeros(m)
    for i, (coefs, rhs) in enumerate(p.rows):
        for j, v in coefs.items():
            A[i, j] = v
        b[i] = rhs
    # normalize to rhs >= 0; flipped rows get a plain slack, others a
    # surplus plus an artificial
    slack_sign = np.where(b > FEAS_TOL, -1.0, 1.0)
    flip = b > FEAS_TOL
    A[~flip] *= -1
    b[~flip] *= -1
    # rows are now: (+-A) x + slack = b with b >= 0; artificial where slack is -1
    art_rows = [i for i in range(m) if slack_sign[i] < 0]
    n_art = len(art_rows)
    total = n + m + n_art
    T = np.zeros((m, total + 1))
    T[:, :n] = A
    basis = [0] * m
    for i in range(m):
        T[i, n + i] = slack_sign[i]
        T[i, -1] = b[i]
    for j, i in enumerate(art_rows):
        T[i, n + m + j] = 1.0
        basis[i] = n + m + j
    for i in range(m):
        if slack_sign[i] > 0:
            basis[i] = n + i

    if n_art:
        zrow = np.zeros(total + 1)
        for i in art_rows:
            zrow -= np.concatenate([T[i, :total], [T[i, -1]]])
        zrow[[n + m + j for j in range(n_art)]] = 0.0
        status = _run_simplex(T, zrow, basis, total)
        if status != "optimal" or -zrow[-1] > 1e-6:
            raise LpInfeasibleError("infeasible")
        for i in range(m):  # drive leftover zero-value artificials out
            if basis[i] >= n + m:
                cols = np.nonzero(np.abs(T[i, : n + m]) > PIVOT_TOL)[0]
                if cols.size:
                    zdummy = np.zeros(total + 1)
                    _pivot(T, zdummy, basis, i, int(cols[0]))
        keep = [i for i in range(m) if basis[i] < n + m]
        T = np.concatenate([T[keep][:, : n + m], T[keep][:, -1:]], axis=1)
        basis = [basis[i] for i in keep]

    cost = np.zeros(n + m + 1)
    cost[:n] = p.objective
    zrow = cost.copy()
    for i, bi in enumerate(basis):
        if cost[bi]:
            zrow -= cost[bi] * T[i]
    status = _run_simplex(T[:, : n + m + 1], zrow, basis, n + m)
    if status == "unbounded":
        raise LpUnboundedError("unbounded")
    x = np.zeros(n + m)
    for i, bi in enumerate(basis):
        x[bi] = T[i, -1]
    xs = [float(v) for v in x[:n]]
    obj = float(np.dot(p.objective, xs))
    return LpSolution("optimal", xs, obj)


# ---------------------------------------------------------------------------
# DST cut relaxation


def build_dst_lp(g: EmbeddedDigraph, r: int, terminals):
    """Compact flow form of the cut relaxation.

    Per terminal: excess >= 0 at intermediate vertices, excess >= 1 at
    the terminal, flow capped by x.  Any preflow with unit excess at t
    decomposes into a unit r-t flow, so the optimum matches the cut LP.
    Returns (LpProblem, arc-id -> variable index).
    """
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    dist, _ = shortest_path_tree(g, r)
    for t in terms:
        if dist[t] == INF:
            raise LpInfeasibleError(f"unreachable-terminal: {t}")
    arc_ids = g.real_arc_ids()
    xvar = {a: i for i, a in enumerate(arc_ids)}
    nx = len(arc_ids)
    fvar = {(t, a): nx + ti * nx + xvar[a] for ti, t in enumerate(terms) for a in arc_ids}
    n = nx + nx * len(terms)
    obj = [0.0] * n
    for a, i in xvar.items():
        obj[i] = g.arcs[a].cost
    rows: list[tuple[dict[int, float], float]] = []
    for t in terms:
        for v in g.vertices:
            if v == r:
                continue
            coefs: dict[int, float] = {}
            for a in g.in_arcs(v):
                coefs[fvar[(t, a)]] = coefs.get(fvar[(t, a)], 0) + 1
            for a in g.out_arcs(v):
                coefs[fvar[(t, a)]] = coefs.get(fvar[(t, a)], 0) - 1
            if not coefs:
                continue
            rows.append((coefs, 1.0 if v == t else 0.0))
        for a in arc_ids:
            rows.append(({xvar[a]: 1.0, fvar[(t, a)]: -1.0}, 0.0))
    return LpProblem(n, obj, rows), xvar


def max_flow(g: EmbeddedDigraph, capacities: dict[int, float], s: int, t: int):
    """Edmonds-Karp max flow with the residual min cut (source side)."""
    cap: dict[tuple[int, int], float] = {}
    adj: dict[int, set[int]] = {v: set() for v in g.vertices}
    for a in g.real_arc_ids():
        arc = g.arcs[a]
        c = capacities.get(a, 0.0)
        if c <= 0:
            continue
        cap[(arc.tail, arc.head)] = cap.get((arc.tail, arc.head), 0.0) + c
        adj[arc.tail].add(arc.head)
        adj[arc.head].add(arc.tail)
    flow = 0.0
    while True:
        prev = {s: s}
        queue = [s]
        while queue and t not in prev:
            u = queue.pop(0)
            for w in sorted(adj[u]):
                if w not in prev and cap.get((u, w), 0.0) > FEAS_TOL / 4:
                    prev[w] = u
                    queue.append(w)
        if t not in prev:
            break
        bottleneck = INF
        v = t
        while v != s:
            u = prev[v]
            bottleneck = min(bottleneck, cap.get((u, v), 0.0))
            v = u
        v = t
        while v != s:
            u = prev[v]
            cap[(u, v)] = cap.get((u, v), 0.0) - bottleneck
            cap[(v, u)] = cap.get((v, u), 0.0) + bottleneck
            v = u
        flow += bottleneck
    reach = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in reach and cap.get((u, w), 0.0) > FEAS_TOL / 4:
                reach.add(w)
                stack.append(w)
    return flow, frozenset(reach)


def verify_cut_feasibility(g: EmbeddedDigraph, r: int, terminals, x: dict[int, float]):
    """Max-flow separation: every root-terminal min cut needs capacity 1.

    Returns (True, None) or (False, (terminal, cut_vertex_set, capacity)).
    """
    for t in sorted(set(terminals)):
        if t == r:
            continue
        flow, cut = max_flow(g, x, r, t)
        if flow < 1 - FEAS_TOL:
            return False, (t, cut, flow)
    return True, None


def solve_dst_lp_cutting_plane(g: EmbeddedDigraph, r: int, terminals):
    """Cut LP via lazy constraints; optima match the compact form."""
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    arc_ids = g.real_arc_ids()
    xvar = {a: i for i, a in enumerate(arc_ids)}
    obj = [g.arcs[a].cost for a in arc_ids]
    rows: list[tuple[dict[int, float], float]] = []
    x = {a: 0.0 for a in arc_ids}
    for _ in range(10000):
        ok, witness = verify_cut_feasibility(g, r, terms, x)
        if ok:
            break
        _, cut, _ = witness
        coefs: dict[int, float] = {}
        for a in arc_ids:
            arc = g.arcs[a]
            if arc.tail in cut and arc.head not in cut:
                coefs[xvar[a]] = 1.0
        if not coefs:
            raise LpInfeasibleError("unreachable-terminal behind an empty cut")
        rows.append((coefs, 1.0))
        sol = simplex_solve(LpProblem(len(arc_ids), obj, rows))
        x = {a: sol.x[xvar[a]] for a in arc_ids}
    value = sum(g.arcs[a].cost * x[a] for a in arc_ids)
    return x, value


def solve_dst_lp(g: EmbeddedDigraph, r: int, terminals, method: str = "compact"):
    """Optimal fractional cut-relaxation solution as (x dict, value)."""
    if method == "cuts":
        return solve_dst_lp_cutting_plane(g, r, terminals)
    prob, xvar = build_dst_lp(g, r, terminals)
    sol = simplex_solve(prob)
    x = {a: sol.x[i] for a, i in xvar.items()}
    return x, sol.objective


def scale_and_prune(g: EmbeddedDigraph, r: int, terminals, x: dict[int, float]):
    """Drop vertices beyond twice log k times the LP cost, scale the rest.

    Returns (pruned graph, scaled x) with x zeroed on deleted arcs and
    multiplied by (1 + 1/log2 k) elsewhere; the result stays cut-feasible.
    """
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    k = len(terms)
    if k < 2:
        raise ValueError("k-too-small: scaling needs log k > 0")
    lp_cost = sum(g.arcs[a].cost * x.get(a, 0.0) for a in g.real_arc_ids())
    radius = 2 * math.log2(k) * lp_cost
    dist, _ = shortest_path_tree(g, r)
    keep = [v for v in g.vertices if dist[v] <= radius + 1e-9]
    sub = induced_subgraph(g, keep)
    factor = 1 + 1 / math.log2(k)
    xbar = {a: factor * x.get(a, 0.0) for a in sub.real_arc_ids()}
    return sub, xbar


def round_lp(g: EmbeddedDigraph, r: int, terminals, x: dict[int, float],
             check_input: bool = True) -> ArcSetSolution:
    """Round a feasible cut-LP solution to a Steiner tree.

    Six or fewer terminals buy their shortest paths; otherwise buy the
    separator at radius 2 log k times the current LP cost and recurse on
    each contracted component with the scaled, restricted solution (the
    LP is never re-solved).  Implementation cost bound:
    2 * P_MAX * (log2 k + 1)^2 times the LP cost.
    """
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    if check_input:
        ok, witness = verify_cut_feasibility(g, r, terms, x)
        if not ok:
            raise LpInfeasibleError(f"infeasible-x: cut at terminal {witness[0]} "
                                    f"has capacity {witness[2]:.6f}")

    def rec(h: EmbeddedDigraph, sub_terms, xh: dict[int, float]) -> set[int]:
        if not sub_terms:
            return set()
        if len(sub_terms) <= 6:
            dist, parent = shortest_path_tree(h, r)
            arcs: set[int] = set()
            for t in sub_terms:
                if dist[t] == INF:
                    raise LpInfeasibleError(f"unreachable-terminal: {t}")
                arcs.update(root_path(h, parent, t))
            return arcs
        k = len(sub_terms)
        lp_cost = sum(h.arcs[a].cost * xh.get(a, 0.0) for a in h.real_arc_ids())
        factor = 1 + 1 / math.log2(k)
        radius = 2 * math.log2(k) * lp_cost
        ps = prune_and_separate(h, r, sub_terms, radius)
        if ps.pruned_terminals:
            raise LpInfeasibleError(
                f"terminals pruned at radius {radius}: {ps.pruned_terminals}")
        arcs = set(ps.separator_arcs)
        for sub in ps.subinstances:
            if not sub.terminals:
                continue
            xs: dict[int, float] = {}
            for kept in sub.graph.real_arc_ids():
                group = ps.contraction.arc_groups.get(kept, (kept,))
                xs[kept] = factor * sum(xh.get(a, 0.0) for a in group)
            arcs |= rec(sub.graph, list(sub.terminals), xs)
        return arcs

    arcs = rec(g, terms, dict(x))
    kept = prune_to_out_tree(g, arcs, r)
    covered = reachable_from(g, kept, [r])
    missing = [t for t in terms if t not in covered]
    if missing:
        raise LpInfeasibleError(f"rounding lost terminals {missing}")
    ok, witness = check_out_tree(g, kept, r)
    assert ok, f"round_lp produced a non-tree at {witness}"
    return ArcSetSolution(kept, g.cost_of(kept), frozenset(terms))


def round_lp_bound(k: int) -> float:
    """Implementation cost guarantee for round_lp (paper form: 6(log k+1)^2)."""
    return 2 * P_MAX * (math.log2(max(k, 2)) + 1) ** 2
