"""Recursion-tree embedding of rooted planar instances.

The divide-and-conquer over (guess, separator) branches is materialized as
an explicit rooted tree: instance nodes carry a sub-instance and a guess,
branch nodes carry a bought separator, copy leaves stand for terminal
occurrences on separators or base-case shortest paths.  The copy map M
sends each original terminal to its (pairwise disjoint) copy leaves.

Two constructions: the plain one halves the guess at every instance node
(height O(log(k * gamma)), exclusive halving/separator pairs annotated for
counting DPs); the height-reduced one fans out over all smaller guesses at
once and only recurses through separators (height O(log k)).

Both projections are provided: any rooted subtree maps to a graph solution
of no larger cost, and any r-tree in the graph maps back to a subtree of
cost at most ``2 * P_MAX * (log2 k + 1)`` times larger covering the same
terminals.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field

from .graphs import (
    ArcSetSolution,
    EmbeddedDigraph,
    INF,
    PolymatroidHandle,
    check_out_tree,
    prune_to_out_tree,
    reachable_from,
    root_path,
    shortest_path_tree,
)
from .separator import P_MAX, prune_and_separate

GAMMA_TOL = 1e-9


class EmbedError(ValueError):
    pass


@dataclass
class EmbedNode:
    kind: str                      # "instance" | "branch" | "copy"
    parent: int | None
    edge_cost: float               # cost of the edge from the parent
    bought_arcs: tuple[int, ...] = ()   # graph arcs behind a nonzero-cost edge
    # instance payload
    label: str = ""
    phi: float = 0.0
    k_here: int = 0
    graph: EmbeddedDigraph | None = None
    terminals: tuple[int, ...] = ()
    halving_child: int | None = None
    branch_children: tuple[int, ...] = ()
    # branch payload
    component_children: tuple[tuple[int, tuple[int, ...]], ...] = ()  # (node, comp verts)
    arc_map: dict | None = None    # original arc -> surviving arc in the contraction
    # copy payload
    terminal: int | None = None


@dataclass
class EmbedTree:
    graph: EmbeddedDigraph
    root_vertex: int
    gamma: float
    nodes: list[EmbedNode] = field(default_factory=list)
    root: int = 0
    copies: dict[int, tuple[int, ...]] = field(default_factory=dict)
    exclusive: set[int] = field(default_factory=set)
    dropped_terminals: tuple[int, ...] = ()
    reduced: bool = False

    def children(self, nid: int) -> list[int]:
        return self._children[nid]

    def finalize(self):
        ch: list[list[int]] = [[] for _ in self.nodes]
        for i, node in enumerate(self.nodes):
            if node.parent is not None:
                ch[node.parent].append(i)
        self._children = ch
        self.copy_owner = {cid: self.nodes[cid].terminal
                           for cid in range(len(self.nodes))
                           if self.nodes[cid].kind == "copy"}

    def height(self) -> int:
        depth = [0] * len(self.nodes)
        best = 0
        order = range(len(self.nodes))
        for i in order:
            p = self.nodes[i].parent
            if p is not None:
                depth[i] = depth[p] + 1  # parents precede children by construction
                best = max(best, depth[i])
        return best

    def non_copy_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind != "copy")

    def subtree_cost(self, node_set) -> float:
        return sum(self.nodes[i].edge_cost for i in node_set if i != self.root)

    def validate_subtree(self, node_set):
        sel = set(node_set)
        if self.root not in sel:
            raise EmbedError("subtree-not-rooted")
        for i in sel:
            p = self.nodes[i].parent
            if i != self.root and p not in sel:
                raise EmbedError("subtree-not-rooted: node missing parent")

    def covered_terminals(self, node_set) -> frozenset[int]:
        return frozenset(self.copy_owner[i] for i in node_set if i in self.copy_owner)

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "gamma": self.gamma,
            "reduced": self.reduced,
            "dropped_terminals": list(self.dropped_terminals),
            "exclusive": sorted(self.exclusive),
            "copies": {str(t): list(c) for t, c in sorted(self.copies.items())},
            "nodes": [
                {
                    "id": i, "kind": n.kind, "parent": n.parent,
                    "edge_cost": n.edge_cost,
                    **({"phi": n.phi, "k": n.k_here, "label": n.label}
                       if n.kind == "instance" else {}),
                    **({"terminal": n.terminal} if n.kind == "copy" else {}),
                    **({"arcs": sorted(n.bought_arcs)} if n.bought_arcs else {}),
                }
                for i, n in enumerate(self.nodes)
            ],
        }

    def dump(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _live_terminals(g: EmbeddedDigraph, r: int, terminals, phi: float):
    dist, parent = shortest_path_tree(g, r)
    live = [t for t in terminals if dist.get(t, INF) <= phi + GAMMA_TOL]
    return live, dist, parent


def _scale_key(g, dist, terminals, phi):
    keep = frozenset(v for v in g.vertices if dist.get(v, INF) <= phi + GAMMA_TOL)
    live = tuple(t for t in terminals if t in keep)
    return keep, live


def _collapse_phi(g, dist, terminals, phi):
    """Halve phi while the pruned vertex set and live terminals are
    unchanged; duplicate guess scales build identical separators, so the
    construction keeps only the smallest of each run (the physical path
    costs, and with them every cost bound, are unaffected)."""
    key = _scale_key(g, dist, terminals, phi)
    while phi / 2 >= 1 and _scale_key(g, dist, terminals, phi / 2) == key:
        phi = phi / 2
    return phi


def _base_case(tree: EmbedTree, nid: int, g, r, t, dist, parent):
    path = tuple(root_path(g, parent, t))
    cid = len(tree.nodes)
    tree.nodes.append(EmbedNode("copy", nid, dist[t], bought_arcs=path, terminal=t))
    tree.copies.setdefault(t, ())
    tree.copies[t] += (cid,)


def _new_instance(tree: EmbedTree, parent, edge_cost, label, phi, live, g) -> int:
    nid = len(tree.nodes)
    tree.nodes.append(EmbedNode("instance", parent, edge_cost, label=label,
                                phi=phi, k_here=len(live), graph=g,
                                terminals=tuple(live)))
    return nid


def _attach_branch(tree: EmbedTree, nid: int, ps, phi: float, label: str,
                   recurse) -> int:
    """Add a branch node for a bought separator plus its component and copy
    children; ``recurse`` builds a child instance node (or None)."""
    bid = len(tree.nodes)
    sep_arcs = tuple(sorted(ps.separator_arcs))
    tree.nodes.append(EmbedNode("branch", nid, ps.separator_cost,
                                bought_arcs=sep_arcs,
                                arc_map=ps.contraction))
    comp_children = []
    for idx, sub in enumerate(ps.subinstances):
        if not sub.terminals:
            continue
        cid = recurse(sub.graph, sub.terminals, phi, f"{label}.{idx}", bid)
        if cid is not None:
            comp_children.append((cid, sub.vertices))
    node = tree.nodes[bid]
    node.component_children = tuple(comp_children)
    sep_vertices = ps.separator.vertices
    for t in sorted(set(tree.nodes[nid].terminals) & sep_vertices):
        cid = len(tree.nodes)
        tree.nodes.append(EmbedNode("copy", bid, 0.0, terminal=t))
        tree.copies.setdefault(t, ())
        tree.copies[t] += (cid,)
    return bid


def tree_emb(g: EmbeddedDigraph, r: int, terminals, gamma: float) -> EmbedTree:
    """Plain recursion-tree embedding (halving child + separator child).

    Terminals unreachable within gamma are dropped and reported on the
    result.  Instance nodes owning both a halving and a separator child
    are annotated exclusive for counting DPs.
    """
    if gamma <= 0:
        raise EmbedError("gamma-nonpositive")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 40000))
    tree = EmbedTree(g, r, gamma)
    live0, _, _ = _live_terminals(g, r, terminals, gamma)
    tree.dropped_terminals = tuple(t for t in terminals if t not in live0)

    def rec(h, terms, phi, label, parent) -> int | None:
        if phi < 1 or not terms:
            return None
        live, dist, par = _live_terminals(h, r, terms, phi)
        if not live:
            return None
        phi = _collapse_phi(h, dist, terms, phi)
        nid = _new_instance(tree, parent, 0.0, label, phi, live, h)
        if len(live) == 1:
            _base_case(tree, nid, h, r, live[0], dist, par)
            return nid
        hc = rec(h, live, phi / 2, label, nid)
        tree.nodes[nid].halving_child = hc
        ps = prune_and_separate(h, r, live, phi, dist)
        bid = _attach_branch(tree, nid, ps, phi, f"{label}@{phi:g}",
                             lambda sg, st, sphi, slabel, bparent:
                             rec(sg, st, sphi, slabel, bparent))
        tree.nodes[nid].branch_children = (bid,)
        if hc is not None:
            tree.exclusive.add(nid)
        return nid

    root = rec(g, live0, gamma, "G", None)
    if root is None:
        root = _new_instance(tree, None, 0.0, "G", gamma, [], g)
    tree.root = root
    tree.finalize()
    return tree


def tree_emb_height_reduced(g: EmbeddedDigraph, r: int, terminals,
                            gamma: float) -> EmbedTree:
    """Height-reduced embedding: each instance node fans out over every
    guess gamma / 2^i at once and recurses only through separators."""
    if gamma <= 0:
        raise EmbedError("gamma-nonpositive")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 40000))
    tree = EmbedTree(g, r, gamma, reduced=True)
    live0, _, _ = _live_terminals(g, r, terminals, gamma)
    tree.dropped_terminals = tuple(t for t in terminals if t not in live0)

    def rec(h, terms, phi_max, label, parent) -> int | None:
        if phi_max < 1 or not terms:
            return None
        live, dist, par = _live_terminals(h, r, terms, phi_max)
        if not live:
            return None
        nid = _new_instance(tree, parent, 0.0, label, phi_max, live, h)
        if len(live) == 1:
            _base_case(tree, nid, h, r, live[0], dist, par)
            return nid
        branches = []
        phi = phi_max
        i = 0
        seen_scales: set = set()
        while phi >= 1:
            key = _scale_key(h, dist, live, phi)
            if key in seen_scales or not key[1]:
                phi = phi / 2
                i += 1
                continue
            seen_scales.add(key)
            sub_live = list(key[1])
            if len(sub_live) == 1:
                # a lone in-range terminal ends this guess scale directly
                sub_nid = _new_instance(tree, nid, 0.0, f"{label}!{i}", phi,
                                        sub_live, h)
                _base_case(tree, sub_nid, h, r, sub_live[0], dist, par)
                branches.append(sub_nid)
            else:
                ps = prune_and_separate(h, r, sub_live, phi, dist)
                bid = _attach_branch(tree, nid, ps, phi, f"{label}!{i}",
                                     lambda sg, st, sphi, slabel, bparent:
                                     rec(sg, st, sphi, slabel, bparent))
                branches.append(bid)
            phi = phi / 2
            i += 1
        tree.nodes[nid].branch_children = tuple(branches)
        return nid

    root = rec(g, live0, gamma, "G", None)
    if root is None:
        root = _new_instance(tree, None, 0.0, "G", gamma, [], g)
    tree.root = root
    tree.finalize()
    return tree


# ---------------------------------------------------------------------------
# projections


def project_to_graph(tree: EmbedTree, node_set, g: EmbeddedDigraph | None = None) -> ArcSetSolution:
    """Union of the paths behind nonzero-cost edges of a rooted subtree,
    reduced to an out-tree.  Cost never exceeds the subtree cost; every
    terminal with a copy in the subtree is reached."""
    g = g or tree.graph
    tree.validate_subtree(node_set)
    arcs: set[int] = set()
    for i in node_set:
        if i != tree.root and tree.nodes[i].bought_arcs:
            arcs.update(tree.nodes[i].bought_arcs)
    wanted = tree.covered_terminals(node_set)
    kept = prune_to_out_tree(g, arcs, tree.root_vertex)
    reached = reachable_from(g, kept, [tree.root_vertex])
    missing = wanted - reached
    if missing:
        raise EmbedError(f"projection lost terminals {sorted(missing)}")
    ok, witness = check_out_tree(g, kept, tree.root_vertex)
    if not ok:
        raise EmbedError(f"projection produced a non-tree at {witness}")
    return ArcSetSolution(kept, g.cost_of(kept), wanted)


def project_from_graph(tree: EmbedTree, arc_set) -> set[int]:
    """Embed an r-tree of the graph into the recursion tree (the
    constructive side of the embedding theorem).

    Descends halving edges to the scale of the subtree cost, buys the
    separator there, splits the r-tree across the components and recurses.
    The resulting subtree uses at most one child of each exclusive pair
    and covers a copy of every terminal of the input tree.
    """
    if tree.reduced:
        raise EmbedError("projection from graph needs the unreduced embedding")
    g = tree.graph
    r = tree.root_vertex
    arcs = frozenset(arc_set)
    ok, witness = check_out_tree(g, arcs, r)
    if not ok:
        raise EmbedError(f"not-an-rtree: witness {witness}")
    total = g.cost_of(arcs)
    if total > tree.gamma + GAMMA_TOL:
        raise EmbedError("cost-exceeds-gamma")

    selected: set[int] = set()

    def vertices_of(arc_ids, graph):
        verts = {r}
        for a in arc_ids:
            verts.add(graph.arcs[a].head)
            verts.add(graph.arcs[a].tail)
        return verts

    def descend(nid: int, sub_arcs: frozenset[int]):
        node = tree.nodes[nid]
        selected.add(nid)
        h = node.graph
        verts = vertices_of(sub_arcs, h)
        terms = [t for t in node.terminals if t in verts]
        if not terms:
            return
        if node.k_here == 1:
            for cid in tree.children(nid):
                if tree.nodes[cid].kind == "copy":
                    selected.add(cid)
            return
        cost_here = sum(g.arcs[a].cost for a in sub_arcs)
        if node.halving_child is not None and cost_here <= node.phi / 2 + GAMMA_TOL:
            descend(node.halving_child, sub_arcs)
            return
        bid = node.branch_children[0]
        branch = tree.nodes[bid]
        selected.add(bid)
        for cid in tree.children(bid):
            if tree.nodes[cid].kind == "copy":
                selected.add(cid)
        cinfo = branch.arc_map
        for child_nid, comp_verts in branch.component_children:
            cv = set(comp_verts)
            mapped = set()
            for a in sub_arcs:
                if h.arcs[a].head in cv:
                    m = cinfo.surviving_arc(a) if cinfo else a
                    if m is not None:
                        mapped.add(m)
            child_terms = set(tree.nodes[child_nid].terminals)
            if mapped and child_terms & vertices_of(mapped, tree.nodes[child_nid].graph):
                descend(child_nid, frozenset(mapped))

    descend(tree.root, arcs)
    return selected


def expand_groups(tree: EmbedTree, groups):
    """Lift original-terminal groups to copy-node groups (union of copies)."""
    lifted = []
    for grp in groups:
        copies: list[int] = []
        for t in grp:
            copies.extend(tree.copies.get(t, ()))
        lifted.append(tuple(sorted(copies)))
    return lifted


class LiftedPolymatroid:
    """Polymatroid over embed-tree nodes: collapse copies, then evaluate."""

    def __init__(self, tree: EmbedTree, f: PolymatroidHandle):
        self.tree = tree
        self.f = f
        self.support = frozenset(cid for cid, t in tree.copy_owner.items()
                                 if t in f.support)
        self.maximum = f.value(frozenset(t for t in tree.copies if t in f.support))

    def value(self, node_set) -> int:
        originals = frozenset(self.tree.copy_owner[i] for i in node_set
                              if i in self.tree.copy_owner)
        return self.f.value(originals)


def lift_polymatroid(tree: EmbedTree, f: PolymatroidHandle) -> LiftedPolymatroid:
    return LiftedPolymatroid(tree, f)
