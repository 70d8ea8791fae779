"""End-to-end planar solvers over the tree-embedding framework.

Every solver returns a SolutionReport whose covered/satisfied fields are
recomputed by an independent reachability check on the original graph,
never trusted from the tree side.  The guess parameter defaults to the
total edge cost (an unconditional upper bound on any optimum); tighter
values (LP optimum, oracle optimum, explicit numbers) are accepted for
experiments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import lp as lpmod
from . import oracle as oraclemod
from . import treesolve as ts
from .embedding import (
    EmbedTree,
    lift_polymatroid,
    project_to_graph,
    tree_emb,
    tree_emb_height_reduced,
)
from .graphs import (
    ArcSetSolution,
    DcstVariant,
    DgstVariant,
    DpstVariant,
    DstVariant,
    EmbeddedDigraph,
    INF,
    ProblemInstance,
    check_out_tree,
    prune_to_out_tree,
    reachable_from,
    root_path,
    shortest_path_tree,
)
from .separator import P_MAX, prune_and_separate

GAMMA_TOL = 1e-9


class PipelineError(ValueError):
    pass


class UnreachableTerminalError(PipelineError):
    pass


@dataclass
class SolutionReport:
    algorithm: str
    arcs: frozenset[int]
    cost: float
    feasible: bool
    covered: dict
    lp_value: float | None = None
    oracle_opt: float | None = None
    density: float | None = None
    stats: dict = field(default_factory=dict)

    @property
    def ratio_lp(self) -> float | None:
        if self.lp_value and self.lp_value > 0:
            return self.cost / self.lp_value
        return None

    @property
    def ratio_opt(self) -> float | None:
        if self.oracle_opt and self.oracle_opt > 0:
            return self.cost / self.oracle_opt
        return None

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "arcs": sorted(self.arcs),
            "cost": self.cost,
            "covered": self.covered,
            "feasible": self.feasible,
            "stats": {
                **self.stats,
                **({"lp_value": self.lp_value} if self.lp_value is not None else {}),
                **({"oracle_opt": self.oracle_opt} if self.oracle_opt is not None else {}),
                **({"ratio_lp": self.ratio_lp} if self.ratio_lp else {}),
                **({"ratio_opt": self.ratio_opt} if self.ratio_opt else {}),
                **({"density": self.density} if self.density is not None else {}),
            },
        }


def growth_bound(k: int) -> float:
    """Implementation guarantee for the embedding recursion:
    2 * P_MAX * (log2 k + 1); paper form is 6 (log k + 1) with 3 paths."""
    return 2 * P_MAX * (math.log2(max(k, 2)) + 1)


def check_solution(inst: ProblemInstance, arcs) -> dict:
    """Independent feasibility check: reachability over the bought arcs
    from each root, then variant-specific coverage counting."""
    g = inst.graph
    per_root = {r: reachable_from(g, arcs, [r]) for r in inst.roots}
    covered = frozenset().union(*per_root.values()) if per_root else frozenset()
    v = inst.variant
    out: dict = {"cost": g.cost_of(arcs)}
    if isinstance(v, DstVariant):
        got = sorted(t for t in v.terminals if t in covered)
        out["terminals_covered"] = got
        out["feasible"] = len(got) == len(v.terminals)
    elif isinstance(v, DgstVariant):
        hit = [i for i, grp in enumerate(v.groups) if any(t in covered for t in grp)]
        out["groups_hit"] = hit
        out["feasible"] = len(hit) == len(v.groups)
    elif isinstance(v, DcstVariant):
        got = [sorted(t for t in grp if t in covered) for grp in v.groups]
        out["distinct_per_group"] = [len(x) for x in got]
        out["feasible"] = all(len(x) >= h for x, h in zip(got, v.requirements))
    else:
        f = v.polymatroid
        value = f.value(frozenset(t for t in f.support if t in covered))
        out["f_value"] = value
        out["feasible"] = value == f.value(f.support)
    return out


def resolve_gamma(g: EmbeddedDigraph, r: int, terminals, gamma) -> float:
    """auto -> total edge cost; lp -> cut LP value; opt -> oracle optimum."""
    if gamma in (None, "auto"):
        return g.total_cost()
    if gamma == "lp":
        _, value = lpmod.solve_dst_lp(g, r, terminals)
        return max(value, 1.0)
    if gamma == "opt":
        cost, _ = oraclemod.exact_dst(g, r, terminals)
        return cost
    return float(gamma)


def _require_reachable(g, r, terminals):
    dist, _ = shortest_path_tree(g, r)
    bad = [t for t in terminals if dist.get(t, INF) == INF]
    if bad:
        raise UnreachableTerminalError(f"unreachable-terminal: {bad}")
    return dist


# ---------------------------------------------------------------------------
# DST


def solve_dst_direct(g: EmbeddedDigraph, r: int, terminals, gamma="auto") -> SolutionReport:
    """The divide-and-conquer recursion run as a solver: at every guess
    take the cheaper of halving the guess and buying a separator."""
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    _require_reachable(g, r, terms)
    gamma = resolve_gamma(g, r, terms, gamma)
    stats = {"separator_calls": 0, "max_depth": 0}

    def rec(h, sub_terms, phi, depth) -> tuple[float, set[int]] | None:
        stats["max_depth"] = max(stats["max_depth"], depth)
        if not sub_terms:
            return 0.0, set()
        if phi < 1:
            return None
        dist, parent = shortest_path_tree(h, r)
        if any(dist.get(t, INF) > phi + GAMMA_TOL for t in sub_terms):
            return None
        if len(sub_terms) == 1:
            t = sub_terms[0]
            return dist[t], set(root_path(h, parent, t))
        half = rec(h, sub_terms, phi / 2, depth + 1)
        stats["separator_calls"] += 1
        ps = prune_and_separate(h, r, sub_terms, phi)
        sep_cost = ps.separator_cost
        sep_arcs = set(ps.separator_arcs)
        feasible = True
        for sub in ps.subinstances:
            if not sub.terminals:
                continue
            got = rec(sub.graph, list(sub.terminals), phi, depth + 1)
            if got is None:
                feasible = False
                break
            sep_cost += got[0]
            sep_arcs |= got[1]
        best = half
        if feasible and (best is None or sep_cost < best[0]):
            best = (sep_cost, sep_arcs)
        return best

    got = rec(g, terms, gamma, 0)
    if got is None:
        raise UnreachableTerminalError(
            f"no terminal set coverable within gamma={gamma}")
    _, arcs = got
    kept = prune_to_out_tree(g, arcs, r)
    sol = ArcSetSolution(kept, g.cost_of(kept), frozenset(terms))
    report = SolutionReport("direct", sol.arcs, sol.cost, True,
                            {"terminals_covered": sorted(terms)}, stats=stats)
    ok, _ = check_out_tree(g, kept, r)
    covered = reachable_from(g, kept, [r])
    report.feasible = ok and all(t in covered for t in terms)
    return report


def _embed_for(g, r, terms, gamma, reduced=True) -> EmbedTree:
    builder = tree_emb_height_reduced if reduced else tree_emb
    T = builder(g, r, terms, gamma)
    if T.dropped_terminals:
        raise UnreachableTerminalError(
            f"terminals beyond gamma={gamma}: {sorted(T.dropped_terminals)}")
    return T


def solve_dst_via_embedding(g: EmbeddedDigraph, r: int, terminals,
                            gamma="auto", seed: int = 0) -> SolutionReport:
    """Embed, solve group Steiner over the copy sets on the tree (exact
    subset DP up to 12 terminals, LP rounding beyond), project back."""
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    _require_reachable(g, r, terms)
    gamma = resolve_gamma(g, r, terms, gamma)
    T = _embed_for(g, r, terms, gamma)
    tree = ts.from_embed_tree(T)
    groups = [T.copies[t] for t in terms]
    stats: dict = {"embed_nodes": len(T.nodes), "embed_height": T.height()}
    lp_value = None
    if len(terms) <= 12:
        cost_t, nodes = ts.exact_tree_gst(tree, groups)
        stats["tree_solver"] = "exact"
    else:
        x, lp_value = ts.gst_lp_solve(tree, groups)
        nodes, rstats = ts.gkr_round(tree, groups, x, random.Random(seed))
        stats.update({"tree_solver": "gkr", **rstats})
    sol = project_to_graph(T, nodes)
    covered = reachable_from(g, sol.arcs, [r])
    feasible = all(t in covered for t in terms)
    return SolutionReport("embed", sol.arcs, sol.cost, feasible,
                          {"terminals_covered": sorted(t for t in terms if t in covered)},
                          lp_value=lp_value, stats=stats)


def solve_lp_round(g: EmbeddedDigraph, r: int, terminals,
                   method: str = "compact") -> SolutionReport:
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    _require_reachable(g, r, terms)
    x, value = lpmod.solve_dst_lp(g, r, terms, method)
    sol = lpmod.round_lp(g, r, terms, x, check_input=False)
    covered = reachable_from(g, sol.arcs, [r])
    feasible = all(t in covered for t in terms)
    return SolutionReport("lp-round", sol.arcs, sol.cost, feasible,
                          {"terminals_covered": sorted(t for t in terms if t in covered)},
                          lp_value=value,
                          stats={"bound": lpmod.round_lp_bound(len(terms))})


# ---------------------------------------------------------------------------
# group / covering / polymatroid


def solve_dgst(g: EmbeddedDigraph, r: int, groups, gamma="auto",
               seed: int = 0) -> SolutionReport:
    all_terms = sorted({t for grp in groups for t in grp if t != r})
    _require_reachable(g, r, all_terms)
    gamma = resolve_gamma(g, r, all_terms, gamma)
    T = _embed_for(g, r, all_terms, gamma)
    tree = ts.from_embed_tree(T)
    lifted = _expand_or_raise(T, groups)
    x, lp_value = ts.gst_lp_solve(tree, lifted)
    nodes, rstats = ts.gkr_round(tree, lifted, x, random.Random(seed))
    sol = project_to_graph(T, nodes)
    covered = reachable_from(g, sol.arcs, [r])
    hit = [i for i, grp in enumerate(groups) if any(t in covered for t in grp)]
    return SolutionReport("dgst", sol.arcs, sol.cost, len(hit) == len(groups),
                          {"groups_hit": hit}, lp_value=lp_value,
                          stats={"embed_nodes": len(T.nodes),
                                 "embed_height": T.height(), **rstats})


def _expand_or_raise(T: EmbedTree, groups):
    from .embedding import expand_groups

    lifted = expand_groups(T, groups)
    empty = [i for i, grp in enumerate(lifted) if not grp]
    if empty:
        raise UnreachableTerminalError(
            f"group-unreachable: groups {empty} have no reachable member")
    return lifted


def solve_dcst(g: EmbeddedDigraph, r: int, groups, requirements,
               gamma="auto", seed: int = 0) -> SolutionReport:
    all_terms = sorted({t for grp in groups for t in grp if t != r})
    _require_reachable(g, r, all_terms)
    gamma = resolve_gamma(g, r, all_terms, gamma)
    T = _embed_for(g, r, all_terms, gamma)
    tree = ts.from_embed_tree(T)
    lifted = _expand_or_raise(T, groups)
    lp = ts.dcst_lp_solve(tree, lifted, requirements, T.copy_owner)
    nodes, phases = ts.dcst_iterative_round(tree, lp, lifted, requirements,
                                            T.copy_owner, random.Random(seed))
    sol = project_to_graph(T, nodes)
    covered = reachable_from(g, sol.arcs, [r])
    distinct = [len([t for t in grp if t in covered]) for grp in groups]
    feasible = all(d >= h for d, h in zip(distinct, requirements))
    return SolutionReport("dcst", sol.arcs, sol.cost, feasible,
                          {"distinct_per_group": distinct},
                          lp_value=lp.objective,
                          stats={"phases": len(phases), "phase_trace": phases,
                                 "embed_height": T.height()})


def solve_dpst(g: EmbeddedDigraph, r: int, polymatroid, gamma="auto",
               seed: int = 0) -> SolutionReport:
    del seed  # the greedy is deterministic
    support = sorted(t for t in polymatroid.support if t != r)
    _require_reachable(g, r, support)
    gamma = resolve_gamma(g, r, support, gamma)
    T = _embed_for(g, r, support, gamma)
    f_T = lift_polymatroid(T, polymatroid)
    tb = ts.binarize(ts.from_embed_tree(T))
    nodes, phases = ts.recursive_greedy_polymatroid(tb, f_T)
    sol = project_to_graph(T, tb.strip_aux(nodes))
    covered = reachable_from(g, sol.arcs, [r])
    value = polymatroid.value(frozenset(t for t in polymatroid.support if t in covered))
    feasible = value == polymatroid.value(polymatroid.support)
    return SolutionReport("dpst", sol.arcs, sol.cost, feasible,
                          {"f_value": value},
                          stats={"phases": len(phases), "phase_trace": phases,
                                 "embed_height": T.height()})


# ---------------------------------------------------------------------------
# density family


def _counting_tree(g, r, terms, gamma):
    T = _embed_for(g, r, terms, gamma, reduced=False)
    tb = ts.binarize(ts.from_embed_tree(T))
    copies = sorted(T.copy_owner)
    return T, tb, copies


def min_density_planar(g: EmbeddedDigraph, r: int, terminals,
                       gamma="auto") -> SolutionReport:
    """Min-density rooted partial solution via the counting DP on the
    exclusive-annotated embedding."""
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    if not terms:
        raise PipelineError("no-reachable-terminal")
    _require_reachable(g, r, terms)
    gamma = resolve_gamma(g, r, terms, gamma)
    T, tb, copies = _counting_tree(g, r, terms, gamma)
    nodes, density_tree, j = ts.min_density_tree(tb, copies)
    sol = project_to_graph(T, tb.strip_aux(nodes))
    covered = reachable_from(g, sol.arcs, [r])
    got = sorted(t for t in terms if t in covered)
    density = sol.cost / len(got) if got else INF
    return SolutionReport("min-density", sol.arcs, sol.cost, bool(got),
                          {"terminals_covered": got}, density=density,
                          stats={"tree_density": density_tree,
                                 "tree_count": j, "embed_height": T.height()})


def solve_ldst_planar(g: EmbeddedDigraph, r: int, terminals, ell: int,
                      gamma="auto") -> SolutionReport:
    terms = [t for t in dict.fromkeys(terminals) if t != r]
    if not 1 <= ell <= len(terms):
        raise PipelineError("ell-out-of-range")
    _require_reachable(g, r, terms)
    gamma = resolve_gamma(g, r, terms, gamma)
    T, tb, copies = _counting_tree(g, r, terms, gamma)
    cost_t, nodes = ts.ldst_dp(tb, copies, ell)
    sol = project_to_graph(T, tb.strip_aux(nodes))
    covered = reachable_from(g, sol.arcs, [r])
    got = sorted(t for t in terms if t in covered)
    return SolutionReport("ell-dst", sol.arcs, sol.cost, len(got) >= ell,
                          {"terminals_covered": got, "ell": ell},
                          stats={"tree_cost": cost_t})


def solve_pc_dst_planar(g: EmbeddedDigraph, r: int, prizes: dict[int, float],
                        gamma="auto") -> SolutionReport:
    """Prize-collecting via the counting tree: copies inherit their
    terminal's prize (exclusivity stops double collection)."""
    support = sorted(v for v, p in prizes.items() if p > 0 and v != r)
    if not support:
        return SolutionReport("pc-dst", frozenset(), 0.0, True,
                              {"pc_objective": 0.0})
    dist, _ = shortest_path_tree(g, r)
    reachable = [t for t in support if dist.get(t, INF) < INF]
    gamma = resolve_gamma(g, r, reachable, gamma) if reachable else 1.0
    T, tb, copies = _counting_tree(g, r, reachable, gamma) if reachable else (None, None, [])
    if T is None:
        return SolutionReport("pc-dst", frozenset(), sum(prizes.values()), True,
                              {"pc_objective": sum(prizes.values())})
    tree_prizes = {c: prizes[T.copy_owner[c]] for c in copies}
    est, nodes = ts.pc_dst_dp(tb, tree_prizes)
    # prizes of unreachable terminals are always foregone
    est += sum(prizes[t] for t in support if t not in reachable)
    sol = project_to_graph(T, tb.strip_aux(nodes))
    covered = reachable_from(g, sol.arcs, [r])
    true_obj = sol.cost + sum(p for v, p in prizes.items() if v not in covered)
    return SolutionReport("pc-dst", sol.arcs, true_obj, True,
                          {"pc_objective": true_obj,
                           "prizes_collected": sorted(v for v in prizes if v in covered)},
                          stats={"tree_estimate": est, "edge_cost": sol.cost})


# ---------------------------------------------------------------------------
# multi-root density loop


def _branching_from(g, arcs, roots):
    out: dict[int, list[int]] = {}
    for a in sorted(set(arcs)):
        arc = g.arcs[a]
        out.setdefault(arc.tail, []).append(a)
    kept: set[int] = set()
    seen = set(roots)
    queue = list(roots)
    while queue:
        u = queue.pop(0)
        for a in out.get(u, ()):
            h = g.arcs[a].head
            if h not in seen:
                seen.add(h)
                kept.add(a)
                queue.append(h)
    return frozenset(kept)


def solve_multiroot(inst: ProblemInstance, gamma="auto", seed: int = 0) -> SolutionReport:
    """Greedy density loop over the roots.

    Each iteration asks every root for its best min-density partial
    solution against the residual demand (embeddings are built once per
    root and reused), buys the best one, and removes what it covered.
    """
    g = inst.graph
    roots = list(inst.roots)
    rng = random.Random(seed)
    variant = inst.variant
    terms = [t for t in inst.terminals]
    reach = {r: shortest_path_tree(g, r)[0] for r in roots}
    for t in terms:
        if all(reach[r].get(t, INF) == INF for r in roots):
            raise UnreachableTerminalError(f"infeasible: terminal {t} reachable "
                                           f"from no root")
    gammas = {r: resolve_gamma(g, r, [t for t in terms
                                      if reach[r].get(t, INF) < INF] or terms,
                               gamma)
              for r in roots}

    cache: dict[int, tuple] = {}

    def embedding_for(r, reduced):
        key = (r, reduced)
        if key not in cache:
            mine = [t for t in terms if reach[r].get(t, INF) <= gammas[r] + GAMMA_TOL]
            T = (tree_emb_height_reduced if reduced else tree_emb)(g, r, mine, gammas[r])
            tree = ts.from_embed_tree(T)
            tb = ts.binarize(tree) if not reduced else tree
            cache[key] = (T, tb)
        return cache[key]

    arcs: set[int] = set()
    iterations = 0
    phase_log = []

    def buy(r, T, nodes, tb=None):
        node_set = tb.strip_aux(nodes) if tb is not None and tb.aux else set(nodes)
        sol = project_to_graph(T, node_set)
        arcs.update(sol.arcs)
        return sol

    if isinstance(variant, DstVariant):
        remaining = set(terms)
        while remaining:
            iterations += 1
            best = None
            for r in roots:
                T, tb = embedding_for(r, reduced=False)
                copies = [c for c, t in T.copy_owner.items() if t in remaining]
                if not copies:
                    continue
                nodes, dens, j = ts.min_density_tree(tb, copies)
                cost = tb.solution_cost(nodes)
                if best is None or ts.density_better(j, cost, best[3], best[4]):
                    best = (r, T, nodes, j, cost, tb)
            if best is None:
                raise UnreachableTerminalError("infeasible: residual terminals "
                                               "unreachable from every root")
            r, T, nodes, j, cost, tb = best
            sol = buy(r, T, nodes, tb)
            newly = {t for t in remaining
                     if t in reachable_from(g, arcs, [r])}
            if not newly:
                raise PipelineError("multi-root loop made no progress")
            remaining -= newly
            phase_log.append({"root": r, "covered": sorted(newly),
                              "density": cost / j})
        covered_info = {"terminals_covered": sorted(terms)}

    elif isinstance(variant, (DgstVariant, DcstVariant)):
        groups = [tuple(grp) for grp in variant.groups]
        need = list(variant.requirements) if isinstance(variant, DcstVariant) \
            else [1] * len(groups)
        covered_terms: set[int] = set()

        def satisfied():
            return all(len(covered_terms & set(grp)) >= h
                       for grp, h in zip(groups, need))

        guard = 0
        while not satisfied():
            iterations += 1
            guard += 1
            if guard > sum(need) + len(terms) + 2:
                raise PipelineError("multi-root covering loop stalled")
            best = None
            for r in roots:
                T, tb = embedding_for(r, reduced=True)
                resid_groups = []
                for grp, h in zip(groups, need):
                    rh = h - len(covered_terms & set(grp))
                    if rh <= 0:
                        continue
                    members = [t for t in grp if t not in covered_terms
                               and T.copies.get(t)]
                    if not members:
                        continue
                    if isinstance(variant, DgstVariant):
                        resid_groups.append(tuple(
                            c for t in members for c in T.copies[t]))
                    else:
                        # other roots may finish the group; ask this one for
                        # whatever part of the requirement it can reach
                        resid_groups.append((tuple(members), min(rh, len(members))))
                if not resid_groups:
                    continue
                if isinstance(variant, DgstVariant):
                    nodes, hit, dens = ts.min_density_dgst(tb, resid_groups, rng=rng)
                    gain = len(hit)
                    cost = tb.solution_cost(nodes)
                else:
                    lifted = [tuple(c for t in grp for c in T.copies[t])
                              for grp, _ in resid_groups]
                    reqs = [rh for _, rh in resid_groups]
                    lp = ts.dcst_lp_solve(tb, lifted, reqs, T.copy_owner)
                    parts = []
                    for (grp, rh), lift in zip(resid_groups, lifted):
                        flows = sorted(((sum(lp.f.get(c, 0.0) for c in T.copies[t]), t)
                                        for t in grp), reverse=True)
                        cur, flow = [], 0.0
                        for fv, t in flows:
                            cur.append(t)
                            flow += fv
                            if flow >= 1 - 1e-9:
                                parts.append(tuple(c for t2 in cur
                                                   for c in T.copies[t2]))
                                cur, flow = [], 0.0
                    if not parts:
                        parts = [lift for lift in lifted]
                    capped = {v: min(1.0, c) for v, c in lp.x.items()}
                    nodes, hit, dens = ts.min_density_dgst(tb, parts, capped, rng)
                    gain = len(hit)
                    cost = tb.solution_cost(nodes)
                if best is None or ts.density_better(gain, cost, best[3], best[4]):
                    best = (r, T, nodes, gain, cost)
            if best is None:
                raise UnreachableTerminalError("infeasible: no root can extend "
                                               "the covering")
            r, T, nodes, gain, cost = best
            buy(r, T, nodes)
            newly = {t for t in terms if t not in covered_terms
                     and t in reachable_from(g, arcs, [r])}
            if not newly:
                raise PipelineError("multi-root loop made no progress")
            covered_terms |= newly
            phase_log.append({"root": r, "covered": sorted(newly)})
        covered_info = {"covered_terminals": sorted(covered_terms)}

    else:  # DPST
        f = variant.polymatroid
        target = f.value(f.support)
        covered_terms = set()
        while f.value(frozenset(covered_terms)) < target:
            iterations += 1
            best = None
            for r in roots:
                T, tb = embedding_for(r, reduced=False)

                class _Res:
                    def __init__(self, T):
                        self.T = T

                    def value(self, z):
                        orig = {self.T.copy_owner[i] for i in z
                                if i in self.T.copy_owner}
                        return f.value(frozenset(covered_terms | orig)) - \
                            f.value(frozenset(covered_terms))

                nodes, cost, gain = ts.greedy_phase(tb, _Res(T))
                if gain <= 0:
                    continue
                if best is None or ts.density_better(gain, cost, best[3], best[4]):
                    best = (r, T, nodes, gain, cost, tb)
            if best is None:
                raise UnreachableTerminalError("infeasible: polymatroid support "
                                               "exhausted without saturating f")
            r, T, nodes, gain, cost, tb = best
            buy(r, T, tb.close_under_parents(nodes), tb)
            newly = {t for t in f.support if t not in covered_terms
                     and t in reachable_from(g, arcs, [r])}
            covered_terms |= newly
            phase_log.append({"root": r, "gain": gain})
        covered_info = {"f_value": f.value(frozenset(covered_terms))}

    branching = _branching_from(g, arcs, roots)
    rep = SolutionReport("multiroot", branching, g.cost_of(branching), True,
                         covered_info,
                         stats={"iterations": iterations, "phases": phase_log})
    chk = check_solution(inst, branching)
    rep.feasible = chk["feasible"]
    rep.covered = {k: v for k, v in chk.items() if k not in ("cost",)}
    return rep


# ---------------------------------------------------------------------------
# dispatch


def solve_instance(inst: ProblemInstance, algo: str, gamma="auto",
                   seed: int = 0, ell: int | None = None) -> SolutionReport:
    g = inst.graph
    v = inst.variant
    if algo == "multiroot":
        return solve_multiroot(inst, gamma, seed)
    if len(inst.roots) != 1:
        raise PipelineError(f"algorithm {algo} is single-root; use multiroot")
    r = inst.roots[0]
    if algo == "direct":
        if not isinstance(v, DstVariant):
            raise PipelineError("direct solver needs a dst instance")
        return solve_dst_direct(g, r, v.terminals, gamma)
    if algo == "embed":
        if not isinstance(v, DstVariant):
            raise PipelineError("embed solver needs a dst instance")
        return solve_dst_via_embedding(g, r, v.terminals, gamma, seed)
    if algo == "lp-round":
        if not isinstance(v, DstVariant):
            raise PipelineError("lp-round needs a dst instance")
        return solve_lp_round(g, r, v.terminals)
    if algo == "dgst":
        if not isinstance(v, DgstVariant):
            raise PipelineError("dgst solver needs a dgst instance")
        return solve_dgst(g, r, v.groups, gamma, seed)
    if algo == "dcst":
        if not isinstance(v, DcstVariant):
            raise PipelineError("dcst solver needs a dcst instance")
        return solve_dcst(g, r, v.groups, v.requirements, gamma, seed)
    if algo == "dpst":
        if not isinstance(v, DpstVariant):
            raise PipelineError("dpst solver needs a dpst instance")
        return solve_dpst(g, r, v.polymatroid, gamma, seed)
    if algo == "min-density":
        if inst.prizes and ell is None:
            return solve_pc_dst_planar(g, r, inst.prizes, gamma)
        terms = inst.terminals
        if ell is not None:
            return solve_ldst_planar(g, r, terms, ell, gamma)
        return min_density_planar(g, r, terms, gamma)
    raise PipelineError(f"unknown algorithm {algo!r}")
