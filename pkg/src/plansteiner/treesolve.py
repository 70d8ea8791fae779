"""Tree-side algorithms for the embedded-instance pipelines.

Everything here operates on plain rooted out-trees with edge costs keyed
by child node: group Steiner LP via lazy cut generation, dependent
randomized rounding, min-density group subtrees, the covering LP with its
iterative density rounding, residual-greedy polymatroid coverage, and the
exact counting/prize DPs that honor exclusive-choice nodes (a node flagged
exclusive may contribute at most one child subtree to a counting
solution).

Solutions are node sets containing the root and closed under parents.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .graphs import INF
from .lp import LpProblem, simplex_solve

PHASE_TOL = 1e-9


class TreeSolveError(ValueError):
    pass


class InfeasibleGroupError(TreeSolveError):
    pass


class InfeasibleRequirementError(TreeSolveError):
    pass


@dataclass
class TreeInstance:
    parent: list[int | None]
    cost: list[float]              # edge cost into each node (root: 0)
    root: int
    exclusive: frozenset[int] = frozenset()
    aux: frozenset[int] = frozenset()
    children: list[list[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.children:
            ch: list[list[int]] = [[] for _ in self.parent]
            for v, p in enumerate(self.parent):
                if p is not None:
                    ch[p].append(v)
            self.children = ch

    @property
    def n(self) -> int:
        return len(self.parent)

    def post_order(self) -> list[int]:
        order = []
        stack = [(self.root, False)]
        while stack:
            v, expanded = stack.pop()
            if expanded:
                order.append(v)
            else:
                stack.append((v, True))
                stack.extend((c, False) for c in self.children[v])
        return order

    def depth(self) -> int:
        best = 0
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                depth[c] = depth[v] + 1
                best = max(best, depth[c])
                stack.append(c)
        return best

    def root_path_nodes(self, v: int) -> list[int]:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        out.reverse()
        return out

    def path_cost(self, v: int) -> float:
        c = 0.0
        while self.parent[v] is not None:
            c += self.cost[v]
            v = self.parent[v]
        return c

    def close_under_parents(self, nodes) -> set[int]:
        out = set(nodes) | {self.root}
        for v in list(out):
            while self.parent[v] is not None and self.parent[v] not in out:
                v = self.parent[v]
                out.add(v)
        return out

    def solution_cost(self, nodes) -> float:
        return sum(self.cost[v] for v in nodes if v != self.root)

    def strip_aux(self, nodes) -> set[int]:
        return {v for v in nodes if v not in self.aux}


def from_embed_tree(tree) -> TreeInstance:
    parent = [n.parent for n in tree.nodes]
    cost = [n.edge_cost for n in tree.nodes]
    return TreeInstance(parent, cost, tree.root, frozenset(tree.exclusive))


def binarize(t: TreeInstance) -> TreeInstance:
    """Cap out-degrees at two with chains of zero-cost helper nodes.

    Exclusive nodes already have at most two children and are left alone,
    so counting DPs see the same choice structure; original node ids are
    preserved and solutions map back by dropping the helpers.
    """
    parent = list(t.parent)
    cost = list(t.cost)
    aux = set(t.aux)
    for v in range(t.n):
        kids = [c for c in range(len(parent)) if parent[c] == v]
        if v in t.exclusive:
            if len(kids) > 2:
                raise TreeSolveError("exclusive node with more than two children")
            continue
        hook = v
        while len(kids) > 2:
            first = kids[0]
            anew = len(parent)
            parent.append(hook)
            cost.append(0.0)
            aux.add(anew)
            parent[first] = hook
            for c in kids[1:]:
                parent[c] = anew
            hook = anew
            kids = kids[1:]
    return TreeInstance(parent, cost, t.root, t.exclusive, frozenset(aux))


def density_better(gain1: float, cost1: float, gain2: float, cost2: float) -> bool:
    """True if gain1/cost1 beats gain2/cost2 (zero costs sort first)."""
    return gain1 * cost2 > gain2 * cost1


# ---------------------------------------------------------------------------
# group Steiner LP on trees


def _group_mincut(t: TreeInstance, x: dict[int, float], members: set[int]):
    """Min root-group cut under capacities x; returns (value, cut edges)."""
    has = [False] * t.n
    sever = [0.0] * t.n
    for v in t.post_order():
        if v in members:
            has[v] = True
            sever[v] = INF
            continue
        tot = 0.0
        any_below = False
        for c in t.children[v]:
            if has[c]:
                any_below = True
                tot += min(x.get(c, 0.0), sever[c])
        has[v] = any_below
        sever[v] = tot if any_below else 0.0
    cut: list[int] = []

    def collect(v: int):
        for c in t.children[v]:
            if not has[c]:
                continue
            if x.get(c, 0.0) <= sever[c]:
                cut.append(c)
            else:
                collect(c)

    if has[t.root]:
        collect(t.root)
    return sever[t.root] if has[t.root] else INF, cut


def gst_lp_solve(t: TreeInstance, groups):
    """Optimal fractional group Steiner solution on a tree.

    Lazy constraint generation: tree min-cut separation adds violated
    root-group cuts until every group supports one unit of flow.
    Returns (x: node -> capacity of its in-edge, objective).
    """
    for i, grp in enumerate(groups):
        if not grp:
            raise InfeasibleGroupError(f"infeasible-group: group {i} is empty")
    nodes = [v for v in range(t.n) if v != t.root]
    var = {v: i for i, v in enumerate(nodes)}
    obj = [t.cost[v] for v in nodes]
    rows: list[tuple[dict[int, float], float]] = []
    x = {v: 0.0 for v in nodes}
    gsets = [set(grp) for grp in groups]
    for _ in range(20000):
        worst = None
        for gi, members in enumerate(gsets):
            val, cut = _group_mincut(t, x, members)
            if val < 1 - 1e-7 and (worst is None or val < worst[0]):
                worst = (val, cut)
        if worst is None:
            break
        rows.append(({var[c]: 1.0 for c in worst[1]}, 1.0))
        sol = simplex_solve(LpProblem(len(nodes), obj, rows))
        x = {v: sol.x[var[v]] for v in nodes}
    objective = sum(t.cost[v] * x[v] for v in nodes)
    return x, objective


def monotonize_capacities(t: TreeInstance, x: dict[int, float]) -> dict[int, float]:
    """Cap each edge by its parent edge (root edges by 1); feasibility for
    root-group flows is preserved since every path crosses the parent."""
    out: dict[int, float] = {}
    stack = [(c, 1.0) for c in t.children[t.root]]
    while stack:
        v, cap = stack.pop()
        out[v] = min(x.get(v, 0.0), cap)
        stack.extend((c, out[v]) for c in t.children[v])
    return out


def _mark_round(t: TreeInstance, xm: dict[int, float], rng: random.Random) -> set[int]:
    """One dependent rounding pass: keep an edge with probability
    x_e / x_parent(e), root edges with probability x_e."""
    marked = {t.root}
    stack = [(c, 1.0) for c in t.children[t.root]]
    while stack:
        v, pcap = stack.pop()
        xv = xm.get(v, 0.0)
        if xv <= 0 or pcap <= 0:
            continue
        p = min(1.0, xv / pcap)
        if rng.random() < p:
            marked.add(v)
            stack.extend((c, xv) for c in t.children[v])
    return marked


def gkr_round(t: TreeInstance, groups, x: dict[int, float],
              rng: random.Random, max_rounds: int | None = None):
    """Randomized rounding for group Steiner on trees.

    Repeats dependent marking rounds, accumulating the union, until every
    group is covered or the round cap is hit; uncovered groups then get
    their cheapest root path (feasibility is unconditional).
    Returns (node set, stats).
    """
    q = len(groups)
    d = max(1, t.depth())
    if max_rounds is None:
        max_rounds = max(8, math.ceil(6 * d * (1 + math.log(q + 1))))
    xm = monotonize_capacities(t, x)
    gsets = [set(grp) for grp in groups]
    chosen: set[int] = {t.root}
    covered = [False] * q
    rounds = 0
    while rounds < max_rounds and not all(covered):
        rounds += 1
        marked = _mark_round(t, xm, rng)
        chosen |= marked
        for gi, members in enumerate(gsets):
            if not covered[gi] and members & marked:
                covered[gi] = True
    fallbacks = 0
    for gi, members in enumerate(gsets):
        if covered[gi]:
            continue
        fallbacks += 1
        best = min(members, key=lambda v: (t.path_cost(v), v))
        chosen.update(t.root_path_nodes(best))
    chosen = t.close_under_parents(chosen)
    return chosen, {"rounds": rounds, "fallbacks": fallbacks}


def min_density_dgst(t: TreeInstance, groups, x: dict[int, float] | None = None,
                     rng: random.Random | None = None):
    """Low-density rooted subtree for group coverage.

    Solves (or takes) the fractional solution, runs single randomized
    marking rounds and keeps the best density outcome over
    16 * ceil(ln(q + 2)) trials; if no trial covers anything, falls back
    to the best-density single root path.
    Returns (node set, covered group indices, density).
    """
    rng = rng or random.Random(0)
    q = len(groups)
    if not any(groups):
        raise InfeasibleGroupError("no-reachable-group")
    if x is None:
        x, _ = gst_lp_solve(t, groups)
    xm = monotonize_capacities(t, {v: min(1.0, c) for v, c in x.items()})
    gsets = [set(grp) for grp in groups]
    # deterministic baseline: every single root-to-member path (keeps the
    # density at or below every root path, whatever the trials draw)
    best = None
    for gi, members in enumerate(gsets):
        for v in sorted(members):
            nodes = set(t.root_path_nodes(v))
            hit = [gj for gj, m2 in enumerate(gsets) if m2 & nodes]
            cost = t.solution_cost(nodes)
            if best is None or density_better(len(hit), cost, len(best[1]), best[2]):
                best = (nodes, hit, cost)
    trials = 16 * math.ceil(math.log(q + 2))
    for _ in range(trials):
        marked = t.close_under_parents(_mark_round(t, xm, rng))
        hit = [gi for gi, members in enumerate(gsets) if members & marked]
        if not hit:
            continue
        cost = t.solution_cost(marked)
        if best is None or density_better(len(hit), cost, len(best[1]), best[2]):
            best = (marked, hit, cost)
    nodes, hit, cost = best
    density = cost / len(hit)
    return nodes, hit, density


# ---------------------------------------------------------------------------
# covering Steiner LP and iterative rounding


@dataclass
class DcstLpSolution:
    x: dict[int, float]            # edge capacity by child node
    f: dict[int, float]            # absorbed flow by copy node
    objective: float


def dcst_lp_solve(t: TreeInstance, lifted_groups, requirements,
                  owner: dict[int, int]) -> DcstLpSolution:
    """Covering LP on the lifted tree.

    One absorbed-flow variable per copy; group flows meet requirements,
    all copies of one original terminal absorb at most one unit, and edge
    capacities are the flow through them (so the objective collapses to
    path costs times absorbed flow).
    """
    for gi, (grp, h) in enumerate(zip(lifted_groups, requirements)):
        owners = {owner[c] for c in grp}
        if len(owners) < h:
            raise InfeasibleRequirementError(
                f"infeasible: group {gi} has {len(owners)} distinct terminals < h={h}")
    copies = sorted({c for grp in lifted_groups for c in grp})
    var = {c: i for i, c in enumerate(copies)}
    dcost = {c: t.path_cost(c) for c in copies}
    obj = [dcost[c] for c in copies]
    rows: list[tuple[dict[int, float], float]] = []
    for grp, h in zip(lifted_groups, requirements):
        rows.append(({var[c]: 1.0 for c in grp}, float(h)))
    by_owner: dict[int, list[int]] = {}
    for c in copies:
        by_owner.setdefault(owner[c], []).append(c)
    for cs in by_owner.values():
        rows.append(({var[c]: -1.0 for c in cs}, -1.0))
    sol = simplex_solve(LpProblem(len(copies), obj, rows))
    f = {c: sol.x[var[c]] for c in copies}
    x: dict[int, float] = {}
    for c, val in f.items():
        if val <= 0:
            continue
        for v in t.root_path_nodes(c)[1:]:
            x[v] = x.get(v, 0.0) + val
    return DcstLpSolution(x, f, sol.objective)


def dcst_iterative_round(t: TreeInstance, lp: DcstLpSolution, lifted_groups,
                         requirements, owner: dict[int, int],
                         rng: random.Random):
    """Iterative min-density rounding of the covering LP.

    Each pass partitions the unmet groups' remaining terminals (by
    decreasing absorbed flow) into parts carrying at least one flow unit,
    covers parts by a min-density group subtree under the capped
    capacities, removes every original terminal that got a copy, and
    repeats until all requirements hold.
    """
    group_owners = [sorted({owner[c] for c in grp}) for grp in lifted_groups]
    copies_of: dict[int, list[int]] = {}
    for grp in lifted_groups:
        for c in grp:
            copies_of.setdefault(owner[c], []).append(c)
    fl = {term: sum(lp.f.get(c, 0.0) for c in set(cs))
          for term, cs in copies_of.items()}
    capped = {v: min(1.0, c) for v, c in lp.x.items()}
    covered: set[int] = set()
    chosen: set[int] = {t.root}
    stats = []
    for _ in range(10 * sum(requirements) + 10):
        resid = [h - len(covered & set(go))
                 for go, h in zip(group_owners, requirements)]
        active = [i for i, rh in enumerate(resid) if rh > 0]
        if not active:
            break
        part_groups: list[tuple[int, ...]] = []
        for i in active:
            remaining = sorted((term for term in group_owners[i]
                                if term not in covered),
                               key=lambda term: (-fl[term], term))
            cur: list[int] = []
            flow = 0.0
            for term in remaining:
                cur.append(term)
                flow += fl[term]
                if flow >= 1 - 1e-9:
                    part_groups.append(tuple(
                        c for term2 in cur for c in copies_of[term2]))
                    cur, flow = [], 0.0
        if not part_groups:
            # residual flow starved (numerically); cheapest uncovered member
            i = active[0]
            term = min((u for u in group_owners[i] if u not in covered),
                       key=lambda u: min(t.path_cost(c) for c in copies_of[u]))
            c = min(copies_of[term], key=lambda c: (t.path_cost(c), c))
            chosen.update(t.root_path_nodes(c))
            covered.add(term)
            stats.append({"parts": 0, "fallback": True})
            continue
        nodes, hit, density = min_density_dgst(t, part_groups, capped, rng)
        chosen |= nodes
        newly = {owner[c] for c in nodes if c in owner}
        if not newly - covered:
            raise TreeSolveError("covering round made no progress")
        covered |= newly
        stats.append({"parts": len(part_groups), "covered_parts": len(hit),
                      "density": density})
    resid = [h - len(covered & set(go))
             for go, h in zip(group_owners, requirements)]
    if any(rh > 0 for rh in resid):
        raise InfeasibleRequirementError("infeasible-propagated")
    return t.close_under_parents(chosen), stats


# ---------------------------------------------------------------------------
# polymatroid coverage by residual greedy


class UnreachableSupportError(TreeSolveError):
    pass


class ResidualFunction:
    """f conditioned on a base set: value(Z) = f(base | Z) - f(base)."""

    def __init__(self, f, base):
        self.f = f
        self.base = frozenset(base)
        self.base_value = f.value(self.base)

    def value(self, z) -> int:
        return self.f.value(self.base | frozenset(z)) - self.base_value


def greedy_phase(t: TreeInstance, f):
    """One residual-greedy pass; returns (node set, cost, gain).

    Bottom-up: every node repeatedly absorbs the child-subtree partial
    solution with the best marginal-gain-per-cost under f, so the root
    ends up with one low-density partial solution.
    """

    def rg(v: int) -> tuple[set[int], float]:
        sol = {v}
        cost = 0.0
        cands = []
        for c in t.children[v]:
            csol, ccost = rg(c)
            cands.append((c, csol, t.cost[c] + ccost))
        used = [False] * len(cands)
        while True:
            cur_val = f.value(frozenset(sol))
            best_i, best_gain = None, 0
            for i, (c, csol, ccost) in enumerate(cands):
                if used[i]:
                    continue
                gain = f.value(frozenset(sol | csol)) - cur_val
                if gain <= 0:
                    continue
                if best_i is None or density_better(
                        gain, ccost, best_gain, cands[best_i][2]):
                    best_i, best_gain = i, gain
            if best_i is None:
                return sol, cost
            used[best_i] = True
            sol |= cands[best_i][1]
            cost += cands[best_i][2]

    sol, cost = rg(t.root)
    return sol, cost, f.value(frozenset(sol))


def recursive_greedy_polymatroid(t: TreeInstance, f, eps: float = 0.5):
    """Cover a polymatroid over tree nodes by residual-greedy phases.

    Phases repeat until the function is saturated; per-phase density is
    recorded.  (``eps`` is the geometric budget knob of the cited
    schedule; unused by this implementation.)
    """
    del eps
    target = f.value(frozenset(range(t.n)))
    picked: set[int] = {t.root}
    stats = []
    guard = 0
    while f.value(frozenset(picked)) < target:
        sol, cost, gain = greedy_phase(t, ResidualFunction(f, picked))
        if gain <= 0:
            raise UnreachableSupportError("unreachable-support: no residual gain")
        picked |= sol
        stats.append({"cost": cost, "gain": gain,
                      "density": cost / gain if gain else INF})
        guard += 1
        if guard > target + t.n + 1:
            raise TreeSolveError("polymatroid greedy failed to converge")
    return t.close_under_parents(picked), stats


# ---------------------------------------------------------------------------
# exact group Steiner on trees (small group counts)


def exact_tree_gst(t: TreeInstance, groups):
    """Exact group Steiner on a tree by a subset DP over group masks.

    Exponential in the number of groups (use for 12 or fewer); exclusive
    nodes may keep at most one child.  Returns (cost, node set).
    """
    q = len(groups)
    if q > 12:
        raise TreeSolveError("exact tree GST capped at 12 groups")
    member_mask = [0] * t.n
    for gi, grp in enumerate(groups):
        for v in grp:
            member_mask[v] |= 1 << gi
    full = (1 << q) - 1
    dp: list[dict[int, float]] = [dict() for _ in range(t.n)]
    choice: list[dict[int, tuple]] = [dict() for _ in range(t.n)]
    for v in t.post_order():
        own = member_mask[v]
        cur = {own: 0.0}
        cur_choice: dict[int, tuple] = {own: ()}
        if v in t.exclusive:
            for c in t.children[v]:
                w = t.cost[c]
                for m2, c2 in dp[c].items():
                    m = own | m2
                    cost = w + c2
                    if cost < cur.get(m, INF):
                        cur[m] = cost
                        cur_choice[m] = ((c, m2),)
        else:
            for c in t.children[v]:
                w = t.cost[c]
                nxt: dict[int, float] = {}
                nxt_choice: dict[int, tuple] = {}
                for m1, c1 in cur.items():
                    if c1 < nxt.get(m1, INF):
                        nxt[m1] = c1
                        nxt_choice[m1] = cur_choice[m1]
                    for m2, c2 in dp[c].items():
                        m = m1 | m2
                        cost = c1 + w + c2
                        if cost < nxt.get(m, INF):
                            nxt[m] = cost
                            nxt_choice[m] = cur_choice[m1] + ((c, m2),)
                cur, cur_choice = nxt, nxt_choice
        dp[v] = cur
        choice[v] = cur_choice
    # cheapest superset of the full mask (masks are sparse dicts)
    best, best_mask = INF, None
    for m, c in dp[t.root].items():
        if m & full == full and c < best:
            best, best_mask = c, m
    if best_mask is None:
        raise InfeasibleGroupError("infeasible-group: not all groups coverable")

    def rebuild(v, m):
        nodes = {v}
        for c, m2 in choice[v][m]:
            nodes |= rebuild(c, m2)
        return nodes

    return best, t.close_under_parents(rebuild(t.root, best_mask))


# ---------------------------------------------------------------------------
# exact counting DPs (exclusive-aware)


def coverage_dp(t: TreeInstance, terminal_nodes, cap: int | None = None):
    """dp[v][j]: cheapest subtree rooted at v covering exactly j terminals.

    Exclusive nodes may keep at most one child.  Returns (tables, choices)
    for reconstruction; counts above ``cap`` are discarded.
    """
    tset = set(terminal_nodes)
    if cap is None:
        cap = len(tset)
    dp: list[dict[int, float]] = [dict() for _ in range(t.n)]
    choice: list[dict[int, tuple]] = [dict() for _ in range(t.n)]
    for v in t.post_order():
        own = 1 if v in tset else 0
        cur = {own: 0.0}
        cur_choice: dict[int, tuple] = {own: ()}
        if v in t.exclusive:
            for c in t.children[v]:
                w = t.cost[c]
                for j2, c2 in dp[c].items():
                    j = own + j2
                    if j > cap:
                        continue
                    cost = w + c2
                    if cost < cur.get(j, INF):
                        cur[j] = cost
                        cur_choice[j] = ((c, j2),)
        else:
            for c in t.children[v]:
                w = t.cost[c]
                nxt: dict[int, float] = {}
                nxt_choice: dict[int, tuple] = {}
                for j1, c1 in cur.items():
                    if c1 < nxt.get(j1, INF):  # skip the child
                        nxt[j1] = c1
                        nxt_choice[j1] = cur_choice[j1]
                    for j2, c2 in dp[c].items():
                        j = j1 + j2
                        if j > cap:
                            continue
                        cost = c1 + w + c2
                        if cost < nxt.get(j, INF):
                            nxt[j] = cost
                            nxt_choice[j] = cur_choice[j1] + ((c, j2),)
                cur, cur_choice = nxt, nxt_choice
        dp[v] = cur
        choice[v] = cur_choice
    return dp, choice


def _reconstruct(t: TreeInstance, choice, v: int, j: int) -> set[int]:
    nodes = {v}
    for c, j2 in choice[v][j]:
        nodes |= _reconstruct(t, choice, c, j2)
    return nodes


def ldst_dp(t: TreeInstance, terminal_nodes, ell: int):
    """Exact minimum-cost subtree covering at least ell terminals."""
    tset = set(terminal_nodes)
    if not 1 <= ell <= len(tset):
        raise TreeSolveError("ell-out-of-range")
    dp, choice = coverage_dp(t, tset)
    feasible = [(j, c) for j, c in dp[t.root].items() if j >= ell]
    if not feasible:
        raise InfeasibleRequirementError(
            "infeasible: exclusive structure cannot reach ell terminals")
    j, cost = min(feasible, key=lambda p: (p[1], p[0]))
    nodes = _reconstruct(t, choice, t.root, j)
    return cost, t.close_under_parents(nodes)


def min_density_tree(t: TreeInstance, terminal_nodes):
    """Best cost-per-covered-terminal over all exclusive-respecting
    subtrees (exact); smallest count wins ties."""
    tset = set(terminal_nodes)
    if not tset:
        raise TreeSolveError("no-terminals")
    dp, choice = coverage_dp(t, tset)
    best = None
    for j, c in sorted(dp[t.root].items()):
        if j == 0:
            continue
        if best is None or density_better(j, c, best[0], best[1]):
            best = (j, c)
    if best is None:
        raise InfeasibleRequirementError("no coverable terminal")
    j, cost = best
    nodes = _reconstruct(t, choice, t.root, j)
    return t.close_under_parents(nodes), cost / j, j


def pc_dst_dp(t: TreeInstance, prizes: dict[int, float]):
    """Exact prize-collecting optimum: edge costs plus foregone prizes."""
    gain: list[float] = [0.0] * t.n
    for v in t.post_order():
        g = -prizes.get(v, 0.0)
        if v in t.exclusive:
            options = [t.cost[c] + gain[c] for c in t.children[v]]
            g += min(0.0, min(options, default=0.0))
        else:
            for c in t.children[v]:
                g += min(0.0, t.cost[c] + gain[c])
        gain[v] = g
    total_prize = sum(prizes.values())
    nodes = {t.root}
    stack = [t.root]
    while stack:
        v = stack.pop()
        kids = t.children[v]
        takeable = [c for c in kids if t.cost[c] + gain[c] < -PHASE_TOL]
        if v in t.exclusive and takeable:
            takeable = [min(takeable, key=lambda c: (t.cost[c] + gain[c], c))]
        for c in takeable:
            nodes.add(c)
            stack.append(c)
    return total_prize + gain[t.root], nodes
