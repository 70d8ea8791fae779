"""Shortest-path separators for rooted embedded planar digraphs.

The separator is built from fundamental cycles of the shortest-path tree:
triangulate the embedding with zero-cost aux edges, then scan non-tree
edges for one whose cycle (two tree root paths plus the closing edge) has
at most 2/3 of the vertex weight strictly on each side.  One round leaves
every weakly connected component with weight <= 2/3 W; if a single
component still exceeds W/2, a second round inside it shrinks it below
(2/3)^2 W < W/2.  Hence at most ``P_MAX = 4`` root paths, each a shortest
dipath from the root, and separator cost <= 4 * (prune radius).
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import (
    Arc,
    EmbeddedDigraph,
    INF,
    contract_into_root,
    dart,
    dart_arc,
    induced_subgraph,
    root_path,
    shortest_path_tree,
    weak_components,
)

P_MAX = 4  # max root paths emitted by shortest_path_separator


class SeparatorError(RuntimeError):
    pass


class UnreachableWeightError(SeparatorError):
    """Some positive-weight vertex is not reachable from the root."""


def triangulate(g: EmbeddedDigraph) -> EmbeddedDigraph:
    """Fan-triangulate every face with more than three sides.

    Added diagonals are zero-cost aux arcs; they take part in faces and
    fundamental cycles but never in shortest paths, components or
    solutions.  Idempotent on already-triangulated embeddings.
    """
    rot = {v: list(g.rotation.get(v, ())) for v in g.vertices}
    arcs = dict(g.arcs)
    next_id = max(arcs, default=-1) + 1
    for orbit in g.face_orbits():
        D = len(orbit)
        if D < 4:
            continue
        verts = [g.dart_vertex(d) for d in orbit]
        v0 = verts[0]
        d0 = orbit[0]
        chain = []
        for j in range(2, D - 1):
            aid = next_id
            next_id += 1
            arcs[aid] = Arc(v0, verts[j], 0, True)
            chain.append(aid)
            anchor = orbit[j - 1] ^ 1  # reverse of the dart arriving at verts[j]
            lst = rot[verts[j]]
            lst.insert(lst.index(anchor) + 1, dart(aid, 1))
        lst = rot[v0]
        idx = lst.index(d0)
        lst[idx:idx] = [dart(a, 0) for a in reversed(chain)]
    return EmbeddedDigraph(g.vertices, arcs, {v: tuple(rot[v]) for v in g.vertices})


@dataclass
class FundamentalCycle:
    edge: int | None           # non-tree arc closing the cycle (None if degenerate)
    paths: list[list[int]]     # root paths of the spanning tree, as arc ids
    inside_weight: float
    outside_weight: float
    degenerate: bool = False


def _tree_structure(g: EmbeddedDigraph, parent: dict[int, int], r: int):
    up = {}
    for v, a in parent.items():
        arc = g.arcs[a]
        up[v] = arc.tail if arc.head == v else arc.head
    depth = {r: 0}

    def get_depth(v):
        trail = []
        while v not in depth:
            trail.append(v)
            v = up[v]
        d = depth[v]
        for u in reversed(trail):
            d += 1
            depth[u] = d
        return depth

    for v in up:
        get_depth(v)
    return up, depth


def _cycle_vertices(up, depth, u, v):
    cu, cv = u, v
    out = []
    back = []
    while cu != cv:
        if depth[cu] >= depth[cv]:
            out.append(cu)
            cu = up[cu]
        else:
            back.append(cv)
            cv = up[cv]
    out.append(cu)
    out.extend(reversed(back))
    return out


def _heaviest_split_path(g, parent, r, weights):
    """Root path to the weighted centroid: descending stops once every
    hanging subtree weighs at most half the total."""
    children: dict[int, list[int]] = {v: [] for v in g.vertices}
    for v, a in parent.items():
        arc = g.arcs[a]
        children[arc.tail].append(v)
    total = sum(weights.get(v, 0) for v in g.vertices)

    below: dict[int, float] = {}

    def weigh(v):
        stack = [(v, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                below[node] = weights.get(node, 0) + sum(below[c] for c in children[node])
            else:
                stack.append((node, True))
                stack.extend((c, False) for c in children[node])

    weigh(r)
    v = r
    while True:
        heavy = [c for c in children[v] if 2 * below[c] > total]
        if not heavy:
            break
        v = heavy[0]
    return root_path(g, parent, v)


def fundamental_cycle_separator(g: EmbeddedDigraph, parent: dict[int, int],
                                r: int, weights: dict[int, float]) -> FundamentalCycle:
    """Best-balance fundamental cycle of the given spanning tree.

    Scans every non-tree arc (aux diagonals included); for each, the faces
    enclosed by its cycle form one side of the dual spanning tree over
    non-tree arcs, so both strict side weights come from one dual DFS plus
    a walk along the cycle.  Returns the arc minimizing the larger side,
    with the two tree root paths to its endpoints.

    With no non-tree arc (the graph is a tree) the result is degenerate:
    a single centroid root path.
    """
    tree_arcs = set(parent.values())
    nontree = [a for a in sorted(g.arcs) if a not in tree_arcs]
    total = sum(weights.get(v, 0) for v in g.vertices)
    if not nontree:
        path = _heaviest_split_path(g, parent, r, weights)
        return FundamentalCycle(None, [path], 0.0, 0.0, degenerate=True)

    faces = g.face_orbits()
    face_of: dict[int, int] = {}
    for i, orbit in enumerate(faces):
        for d in orbit:
            face_of[d] = i
    nf = len(faces)
    if len(nontree) != nf - 1:
        raise SeparatorError("separator machinery requires a spanning tree of a "
                             "connected embedding")

    # representative face and face weights for off-cycle vertex sums
    rep_face: dict[int, int] = {}
    for v in g.vertices:
        rot = g.rotation.get(v, ())
        if rot:
            rep_face[v] = face_of[rot[0]]
    face_w = [0.0] * nf
    for v, w in weights.items():
        if w and v in rep_face:
            face_w[rep_face[v]] += w

    # dual spanning tree over non-tree arcs, rooted at face 0
    dual_adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(nf)}
    for a in nontree:
        f0, f1 = face_of[dart(a, 0)], face_of[dart(a, 1)]
        dual_adj[f0].append((f1, a))
        dual_adj[f1].append((f0, a))
    tin = [-1] * nf
    sub_w = list(face_w)
    child_face_of_arc: dict[int, int] = {}
    timer = 0
    stack: list[tuple[int, int, int]] = [(0, -1, -1)]
    parent_face = [-1] * nf
    while stack:
        f, pf, via = stack.pop()
        if tin[f] != -1:
            continue
        tin[f] = timer
        timer += 1
        parent_face[f] = pf
        if via >= 0:
            child_face_of_arc[via] = f
        for nfc, a in dual_adj[f]:
            if tin[nfc] == -1:
                stack.append((nfc, f, a))
    if timer != nf:
        raise SeparatorError("dual graph disconnected; embedding invalid")
    order = sorted(range(nf), key=lambda f: tin[f])
    tout = [0] * nf
    for f in reversed(order):
        tout[f] = max(tin[f] + 1, max((tout[c] for c, _ in dual_adj[f]
                                       if parent_face[c] == f), default=0))
        if parent_face[f] >= 0:
            sub_w[parent_face[f]] += sub_w[f]

    up, depth = _tree_structure(g, parent, r)
    best = None
    for a in nontree:
        arc = g.arcs[a]
        cyc = _cycle_vertices(up, depth, arc.tail, arc.head)
        cf = child_face_of_arc.get(a)
        if cf is None:
            continue
        inside = sub_w[cf]
        cyc_w = 0.0
        for v in cyc:
            wv = weights.get(v, 0)
            if not wv:
                continue
            cyc_w += wv
            f = rep_face.get(v)
            if f is not None and tin[cf] <= tin[f] < tout[cf]:
                inside -= wv
        outside = total - inside - cyc_w
        key = (max(inside, outside), a)
        if best is None or key < best[0]:
            best = (key, a, arc, inside, outside)
    _, a, arc, inside, outside = best
    paths = [root_path(g, parent, arc.tail), root_path(g, parent, arc.head)]
    return FundamentalCycle(a, paths, inside, outside)


@dataclass
class SeparatorPath:
    arcs: tuple[int, ...]
    vertices: tuple[int, ...]
    cost: float


@dataclass
class SeparatorComponent:
    vertices: tuple[int, ...]
    graph: EmbeddedDigraph
    weight: float


@dataclass
class SeparatorResult:
    paths: list[SeparatorPath]
    vertices: frozenset[int]      # union of path vertices, always includes r
    arcs: frozenset[int]
    components: list[SeparatorComponent]
    beta_achieved: float
    rounds: int

    def to_json(self) -> dict:
        return {
            "paths": [{"arcs": list(p.arcs), "vertices": list(p.vertices),
                       "cost": p.cost} for p in self.paths],
            "vertices": sorted(self.vertices),
            "beta_achieved": self.beta_achieved,
            "rounds": self.rounds,
            "components": [{"vertices": list(c.vertices), "weight": c.weight}
                           for c in self.components],
        }


def _path_from_arcs(g: EmbeddedDigraph, arcs: list[int], r: int) -> SeparatorPath:
    verts = [r]
    for a in arcs:
        verts.append(g.arcs[a].head)
    return SeparatorPath(tuple(arcs), tuple(verts), g.cost_of(arcs))


def shortest_path_separator(g: EmbeddedDigraph, r: int,
                            weights: dict[int, float]) -> SeparatorResult:
    """Root paths of the shortest-path tree whose removal leaves every
    weakly connected component with at most half the vertex weight.

    At most two fundamental-cycle rounds (``P_MAX`` = 4 paths); graphs
    with at most two weighted vertices are handled by a single path
    through the heavier one.
    """
    dist, parent = shortest_path_tree(g, r)
    positive = sorted(v for v, w in weights.items() if w > 0)
    for v in positive:
        if dist.get(v, INF) == INF:
            raise UnreachableWeightError(f"unreachable-weight: vertex {v}")
    total = sum(weights[v] for v in positive)

    paths: list[SeparatorPath] = []
    p_vertices: set[int] = {r}
    rounds = 0

    def add_path(arcs: list[int]):
        sp = _path_from_arcs(g, arcs, r)
        paths.append(sp)
        p_vertices.update(sp.vertices)

    if total > 0 and len(positive) <= 2:
        heavy = max(positive, key=lambda v: (weights[v], -v))
        add_path(root_path(g, parent, heavy))
        rounds = 1
    elif total > 0:
        reach = [v for v in g.vertices if dist[v] < INF]
        tri = triangulate(induced_subgraph(g, reach))
        for _ in range(2):
            comps = weak_components(g, p_vertices)
            heavy = [(vs, sum(weights.get(v, 0) for v in vs)) for vs, _ in comps]
            heavy = [(vs, w) for vs, w in heavy if 2 * w > total]
            if not heavy:
                break
            rounds += 1
            cverts, cw = heavy[0]
            local = {v: weights.get(v, 0) for v in cverts}
            pos = sorted(v for v in cverts if local.get(v, 0) > 0)
            if len(pos) <= 2:
                add_path(root_path(g, parent, max(pos, key=lambda v: (local[v], -v))))
                continue
            cyc = fundamental_cycle_separator(tri, parent, r, local)
            for arcs in cyc.paths:
                add_path(arcs)

    comp_list = []
    beta = 0.0
    for vs, sub in weak_components(g, p_vertices):
        w = sum(weights.get(v, 0) for v in vs)
        comp_list.append(SeparatorComponent(vs, sub, w))
        if total > 0:
            beta = max(beta, w / total)
    if 2 * beta > 1 + 1e-12:
        raise SeparatorError(f"separator failed to reach balance 1/2: beta={beta}")
    arcs = frozenset(a for p in paths for a in p.arcs)
    return SeparatorResult(paths, frozenset(p_vertices), arcs, comp_list, beta, rounds)


@dataclass
class SubInstance:
    graph: EmbeddedDigraph
    terminals: tuple[int, ...]
    vertices: tuple[int, ...]


@dataclass
class PruneSeparateResult:
    separator: SeparatorResult
    pruned_graph: EmbeddedDigraph
    contracted: EmbeddedDigraph | None
    contraction: object | None
    subinstances: list[SubInstance]
    pruned_terminals: tuple[int, ...]

    @property
    def separator_arcs(self) -> frozenset[int]:
        return self.separator.arcs

    @property
    def separator_cost(self) -> float:
        return sum(p.cost for p in self.separator.paths)


def prune_and_separate(g: EmbeddedDigraph, r: int, terminals,
                       gamma: float, dist: dict | None = None) -> PruneSeparateResult:
    """Prune vertices beyond distance gamma, separate, contract into r.

    Deletes every vertex with d(r, v) > gamma (terminals among them are
    reported, not silently lost), finds a shortest-path separator with
    unit weights on the surviving terminals, contracts its paths into r,
    and returns the weakly connected components as sub-instances sharing
    the contracted root.  Every sub-instance keeps at most half of the
    surviving terminals.  A precomputed distance map may be passed in.
    """
    if gamma <= 0:
        raise ValueError("gamma-nonpositive")
    terms = [t for t in terminals if t != r]
    if dist is None:
        dist, _ = shortest_path_tree(g, r)
    keep = [v for v in g.vertices if dist[v] <= gamma + 1e-9]
    pruned_terms = tuple(t for t in terms if t not in set(keep))
    live_terms = [t for t in terms if t in set(keep)]
    H = induced_subgraph(g, keep)
    if not live_terms:
        empty = SeparatorResult([], frozenset({r}), frozenset(), [], 0.0, 0)
        return PruneSeparateResult(empty, H, None, None, [], pruned_terms)

    sep = shortest_path_separator(H, r, {t: 1 for t in live_terms})
    contracted, cinfo = contract_into_root(H, sep.vertices, r)
    subs = []
    half = len(live_terms) / 2
    for comp in sep.components:
        sub_terms = tuple(t for t in live_terms if t in set(comp.vertices))
        if len(sub_terms) > half:
            raise SeparatorError("component kept more than half the terminals")
        sub_g = induced_subgraph(contracted, set(comp.vertices) | {r})
        subs.append(SubInstance(sub_g, sub_terms, comp.vertices))
    return PruneSeparateResult(sep, H, contracted, cinfo, subs, pruned_terms)
