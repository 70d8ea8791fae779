"""Exact exponential-time solvers for small instances.

Directed Steiner subset DP: DP[X][v] is the cheapest out-tree rooted at v
covering terminal subset X, computed by subset splits at v plus jumps
along shortest paths.  One table answers every variant by filtering masks
(groups hit, requirements met, polymatroid saturated, density, prizes).
Multi-root exactness adds a zero-cost super-root; planarity is irrelevant
to the oracle, so the auxiliary vertex is harmless.

Hard cap of 14 terminals: the oracle exists for verification, not scale.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .graphs import (
    Arc,
    DcstVariant,
    DgstVariant,
    DpstVariant,
    DstVariant,
    EmbeddedDigraph,
    INF,
    check_out_tree,
    prune_to_out_tree,
    reachable_from,
)

MAX_TERMINALS = 14


class TooManyTerminalsError(ValueError):
    pass


class UnreachableTerminalError(ValueError):
    pass


class InfeasibleVariantError(ValueError):
    pass


def _all_pairs(g: EmbeddedDigraph):
    """Dijkstra from every vertex; returns dist and in-arc parent maps."""
    dist: dict[int, dict[int, float]] = {}
    parent: dict[int, dict[int, int]] = {}
    for s in g.vertices:
        ds = {v: INF for v in g.vertices}
        ps: dict[int, int] = {}
        ds[s] = 0
        heap = [(0, s)]
        done = set()
        while heap:
            d, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            for a in g.out_arcs(v):
                arc = g.arcs[a]
                nd = d + arc.cost
                if nd < ds[arc.head]:
                    ds[arc.head] = nd
                    ps[arc.head] = a
                    heapq.heappush(heap, (nd, arc.head))
        dist[s] = ds
        parent[s] = ps
    return dist, parent


@dataclass
class SubsetDpTable:
    graph: EmbeddedDigraph
    terminals: tuple[int, ...]
    vidx: dict[int, int]
    split: object              # (2^k, n) pre-jump values
    final: object              # (2^k, n) optimal values
    D: object                  # (n, n) all-pairs distances by index
    path_parent: dict[int, dict[int, int]]

    def opt(self, mask: int, v: int) -> float:
        return float(self.final[mask][self.vidx[v]])

    def _path_arcs(self, frm: int, to: int, out: set[int]):
        x = to
        while x != frm:
            a = self.path_parent[frm][x]
            out.add(a)
            x = self.graph.arcs[a].tail

    def arcs_for(self, mask: int, v: int) -> set[int]:
        """Re-derive an optimal tree by probing which choices attain the
        table values (exact for integer costs, 1e-9 tolerance otherwise)."""
        vindex = self.vidx
        verts = self.graph.vertices
        out: set[int] = set()
        stack = [(mask, v, "final")]
        while stack:
            m, u, state = stack.pop()
            if m == 0:
                continue
            ui = vindex[u]
            if state == "final":
                target = self.final[m][ui]
                if target >= INF:
                    raise UnreachableTerminalError("unreachable-terminal")
                if abs(self.split[m][ui] - target) <= 1e-9:
                    stack.append((m, u, "split"))
                    continue
                row = self.split[m] + self.D[ui]
                wi = min(i for i in range(len(verts))
                         if abs(row[i] - target) <= 1e-9)
                w = verts[wi]
                self._path_arcs(u, w, out)
                stack.append((m, w, "split"))
            else:
                if bin(m).count("1") == 1:
                    continue  # u is the terminal itself
                target = self.split[m][ui]
                sub = (m - 1) & m
                while sub:
                    rest = m & ~sub
                    if sub <= rest and                             abs(self.final[sub][ui] + self.final[rest][ui] - target) <= 1e-9:
                        stack.append((sub, u, "final"))
                        stack.append((rest, u, "final"))
                        break
                    sub = (sub - 1) & m
                else:
                    raise AssertionError("split reconstruction failed")
        return out


def steiner_table(g: EmbeddedDigraph, terminals) -> SubsetDpTable:
    import numpy as np

    terms = tuple(dict.fromkeys(terminals))
    k = len(terms)
    if k > MAX_TERMINALS:
        raise TooManyTerminalsError(
            f"too-many-terminals: {k} > {MAX_TERMINALS}; the oracle is for small instances")
    dist, path_parent = _all_pairs(g)
    n = len(g.vertices)
    vidx = {v: i for i, v in enumerate(g.vertices)}
    D = np.full((n, n), INF)
    for v in g.vertices:
        dv = dist[v]
        vi = vidx[v]
        for u in g.vertices:
            D[vi, vidx[u]] = dv[u]
    nmask = 1 << k
    split = np.full((nmask, n), INF)
    final = np.full((nmask, n), INF)
    final[0] = 0.0
    for i, t in enumerate(terms):
        split[1 << i][vidx[t]] = 0.0
    order = sorted(range(1, nmask), key=lambda m: bin(m).count("1"))
    with np.errstate(invalid="ignore"):
        for mask in order:
            if bin(mask).count("1") >= 2:
                acc = split[mask]
                sub = (mask - 1) & mask
                while sub:
                    rest = mask & ~sub
                    if sub <= rest:
                        np.minimum(acc, final[sub] + final[rest], out=acc)
                    sub = (sub - 1) & mask
            final[mask] = np.min(split[mask][None, :] + D, axis=1)
    return SubsetDpTable(g, terms, vidx, split, final, D, path_parent)


def _finish(g, r, mask, table) -> tuple[float, frozenset[int]]:
    c = table.opt(mask, r)
    if c == INF:
        raise UnreachableTerminalError("unreachable-terminal")
    arcs = prune_to_out_tree(g, table.arcs_for(mask, r), r)
    ok, witness = check_out_tree(g, arcs, r)
    assert ok, f"oracle reconstruction broke at {witness}"
    return c, arcs


def exact_dst(g: EmbeddedDigraph, r: int, terminals):
    """Exact optimum directed Steiner tree (cost, arc set)."""
    terms = tuple(t for t in dict.fromkeys(terminals) if t != r)
    table = steiner_table(g, terms)
    mask = (1 << len(terms)) - 1
    return _finish(g, r, mask, table)


def _mask_iter(k: int):
    return range(1 << k)


def exact_variant(g: EmbeddedDigraph, r: int, variant, prizes=None):
    """Exact optimum for any variant from a single DP table.

    DGST keeps masks hitting every group, DCST masks meeting every
    requirement, DPST masks saturating the polymatroid; prizes turn the
    filter into min over all masks of tree cost plus foregone prizes.
    """
    if isinstance(variant, DstVariant):
        if prizes is None:
            return exact_dst(g, r, variant.terminals)
        # prize vertices join the DP terminals so trees may collect them
        merged = tuple(variant.terminals) + tuple(sorted(v for v in prizes
                                                         if prizes[v] > 0))
        terms = tuple(t for t in dict.fromkeys(merged) if t != r)
        table = steiner_table(g, terms)
        best, best_mask = INF, None
        total_prize = sum(prizes.values())
        for mask in _mask_iter(len(terms)):
            c = table.opt(mask, r)
            if c == INF:
                continue
            foregone = sum(prizes.get(t, 0) for i, t in enumerate(terms)
                           if not mask >> i & 1)
            c += foregone + sum(p for v, p in prizes.items() if v not in terms)
            if c < best:
                best, best_mask = c, mask
        if best_mask is None:
            raise UnreachableTerminalError("unreachable-terminal")
        _, arcs = _finish(g, r, best_mask, table)
        return best, arcs

    if isinstance(variant, DgstVariant):
        terms = tuple(dict.fromkeys(t for grp in variant.groups for t in grp if t != r))
        table = steiner_table(g, terms)
        idx = {t: i for i, t in enumerate(terms)}
        gmasks = [sum(1 << idx[t] for t in grp if t in idx) for grp in variant.groups]
        ok = lambda m: all(m & gm for gm in gmasks)
    elif isinstance(variant, DcstVariant):
        terms = tuple(dict.fromkeys(t for grp in variant.groups for t in grp if t != r))
        table = steiner_table(g, terms)
        idx = {t: i for i, t in enumerate(terms)}
        need = list(zip([[idx[t] for t in grp if t in idx] for grp in variant.groups],
                        variant.requirements))
        ok = lambda m: all(sum(m >> i & 1 for i in grp) >= h for grp, h in need)
    elif isinstance(variant, DpstVariant):
        f = variant.polymatroid
        terms = tuple(t for t in sorted(f.support) if t != r)
        table = steiner_table(g, terms)
        full = f.value(f.support)

        def ok(m):
            chosen = frozenset(terms[i] for i in range(len(terms)) if m >> i & 1)
            return f.value(chosen) == full
    else:
        raise InfeasibleVariantError(f"unsupported variant {variant!r}")

    best, best_mask = INF, None
    for mask in _mask_iter(len(terms)):
        if not ok(mask):
            continue
        c = table.opt(mask, r)
        if c < best:
            best, best_mask = c, mask
    if best_mask is None:
        raise InfeasibleVariantError("infeasible: no subset satisfies the variant")
    return _finish(g, r, best_mask, table)


def exact_min_density(g: EmbeddedDigraph, r: int, terminals, value=None):
    """Exact minimum density: min over nonempty X of cost(X) / value(X).

    ``value`` defaults to |X|; pass a polymatroid-style callable for the
    covering value of a subset.
    """
    terms = tuple(t for t in dict.fromkeys(terminals) if t != r)
    if not terms:
        raise InfeasibleVariantError("no-terminals")
    table = steiner_table(g, terms)
    best = None
    for mask in range(1, 1 << len(terms)):
        c = table.opt(mask, r)
        if c == INF:
            continue
        chosen = frozenset(terms[i] for i in range(len(terms)) if mask >> i & 1)
        val = len(chosen) if value is None else value(chosen)
        if val <= 0:
            continue
        key = (c / val, -val)
        if best is None or key < best[0]:
            best = (key, mask, c, val)
    if best is None:
        raise UnreachableTerminalError("unreachable-terminal")
    _, mask, c, val = best
    _, arcs = _finish(g, r, mask, table)
    return c / val, c, val, arcs


def exact_ell_dst(g: EmbeddedDigraph, r: int, terminals, ell: int):
    """Exact minimum-cost tree covering at least ell terminals."""
    terms = tuple(t for t in dict.fromkeys(terminals) if t != r)
    if not 1 <= ell <= len(terms):
        raise InfeasibleVariantError("ell-out-of-range")
    table = steiner_table(g, terms)
    best, best_mask = INF, None
    for mask in range(1, 1 << len(terms)):
        if bin(mask).count("1") < ell:
            continue
        c = table.opt(mask, r)
        if c < best:
            best, best_mask = c, mask
    if best_mask is None:
        raise UnreachableTerminalError("unreachable-terminal")
    _, arcs = _finish(g, r, best_mask, table)
    return best, arcs


def _with_super_root(g: EmbeddedDigraph, roots):
    sr = max(g.vertices) + 1
    arcs = dict(g.arcs)
    extra = []
    nid = max(arcs, default=-1) + 1
    for r in roots:
        arcs[nid] = Arc(sr, r, 0)
        extra.append(nid)
        nid += 1
    aug = EmbeddedDigraph(tuple(g.vertices) + (sr,), arcs, {})
    return aug, sr, set(extra)


def exact_multiroot(g: EmbeddedDigraph, roots, variant, prizes=None):
    """Multi-root exact optimum via a zero-cost super-root (oracle only:
    the reduction ignores planarity, which the DP never needs)."""
    aug, sr, extra = _with_super_root(g, roots)
    cost, arcs = exact_variant(aug, sr, variant, prizes)
    return cost, frozenset(a for a in arcs if a not in extra)


def exhaustive_minimum(g: EmbeddedDigraph, roots, satisfied, max_arcs: int = 16):
    """Brute force over all real arc subsets; the oracle's own oracle.

    ``satisfied(covered_vertices)`` decides feasibility of the vertex set
    reachable from the roots.  Only for graphs with at most ``max_arcs``
    real arcs.
    """
    arc_ids = g.real_arc_ids()
    if len(arc_ids) > max_arcs:
        raise ValueError(f"exhaustive search capped at {max_arcs} arcs")
    best, best_set = INF, None
    for mask in range(1 << len(arc_ids)):
        subset = [arc_ids[i] for i in range(len(arc_ids)) if mask >> i & 1]
        cost = g.cost_of(subset)
        if cost >= best:
            continue
        covered = reachable_from(g, subset, roots)
        if satisfied(covered):
            best, best_set = cost, frozenset(subset)
    return best, best_set
