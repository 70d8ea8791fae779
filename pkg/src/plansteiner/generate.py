"""Deterministic random instance generation.

Three families, all emitted with rotation systems by construction:

* ``grid``      -- directed lattice; each lattice edge carries one or both
                   orientations, reachability repaired by orienting lattice
                   paths from each root.
* ``disk``      -- random triangulation of a convex polygon (chords sampled
                   recursively), geometric rotations, sampled orientations.
* ``seriesparallel`` -- recursive series/parallel composition, source-rooted.

Integer costs keep all non-LP arithmetic exact.  Instances are emitted as
canonical JSON; the same spec and seed reproduce identical bytes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .graphs import (
    EmbeddedDigraph,
    Arc,
    canonical_json,
    dart,
    graph_from_json,
    validate_planar_embedding,
)


class GenSpecError(ValueError):
    pass


@dataclass
class GenSpec:
    kind: str = "grid"                 # grid | disk | seriesparallel
    rows: int = 4
    cols: int = 4
    n: int = 12                        # disk boundary size / sp target size
    k: int = 3                         # terminals
    roots: int = 1
    problem: str = "dst"               # dst | dgst | dcst | dpst
    groups: int = 2
    group_size: tuple[int, int] = (1, 3)
    requirement_max: int = 2
    poly_kind: str = "coverage"        # coverage | truncated_partition | modular
    cost_max: int = 8
    both_orientation_prob: float = 0.5
    prizes: bool = False
    prize_max: int = 10
    seed: int = 0

    def validate(self):
        if self.kind not in ("grid", "disk", "seriesparallel"):
            raise GenSpecError(f"spec-invalid: kind {self.kind!r}")
        if self.kind == "grid" and (self.rows < 2 or self.cols < 2):
            raise GenSpecError("spec-invalid: grid needs rows, cols >= 2")
        if self.kind == "disk" and self.n < 4:
            raise GenSpecError("spec-invalid: disk needs n >= 4")
        if self.k < 1 or self.cost_max < 1 or self.roots < 1:
            raise GenSpecError("spec-invalid: k, roots, cost_max must be positive")
        if self.kind == "seriesparallel" and self.roots != 1:
            raise GenSpecError("spec-invalid: series-parallel instances are single-root")
        if self.problem not in ("dst", "dgst", "dcst", "dpst"):
            raise GenSpecError(f"spec-invalid: problem {self.problem!r}")


class _SlotGraph:
    """Undirected edge slots, each carrying one or two directed arcs.

    A slot between u and v with both orientations is embedded as a bigon:
    at each endpoint the incoming dart precedes the outgoing dart in
    clockwise order.
    """

    def __init__(self):
        self.slots: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
        self.arcs: dict[int, Arc] = {}

    def add_arc(self, u: int, v: int, cost: float) -> int:
        slot = self.slots.setdefault((min(u, v), max(u, v)), {})
        if (u, v) in slot:
            return slot[(u, v)]
        aid = len(self.arcs)
        self.arcs[aid] = Arc(u, v, cost)
        slot[(u, v)] = aid
        return aid

    def has_arc(self, u: int, v: int) -> bool:
        return (u, v) in self.slots.get((min(u, v), max(u, v)), {})

    def slot_darts(self, x: int, other: int) -> list[int]:
        slot = self.slots.get((min(x, other), max(x, other)), {})
        darts = []
        if (other, x) in slot:  # incoming first
            darts.append(dart(slot[(other, x)], 1))
        if (x, other) in slot:
            darts.append(dart(slot[(x, other)], 0))
        return darts

    def rotations(self, neighbor_order: dict[int, list[int]]) -> dict[int, tuple[int, ...]]:
        rot = {}
        for v, neighbors in neighbor_order.items():
            darts: list[int] = []
            for u in neighbors:
                darts.extend(self.slot_darts(v, u))
            rot[v] = tuple(darts)
        return rot


def _repair_reachability(sg: _SlotGraph, lattice_adj: dict[int, list[int]],
                         root: int, targets, rng: random.Random, cost_max: int):
    """Orient undirected lattice paths until every target is reachable."""
    while True:
        reach = {root}
        stack = [root]
        out: dict[int, list[int]] = {}
        for arc in sg.arcs.values():
            out.setdefault(arc.tail, []).append(arc.head)
        while stack:
            u = stack.pop()
            for w in out.get(u, ()):
                if w not in reach:
                    reach.add(w)
                    stack.append(w)
        missing = [t for t in targets if t not in reach]
        if not missing:
            return
        t = missing[0]
        # undirected BFS path root -> t over lattice slots
        prev = {root: None}
        queue = [root]
        while queue:
            u = queue.pop(0)
            if u == t:
                break
            for w in lattice_adj[u]:
                if w not in prev:
                    prev[w] = u
                    queue.append(w)
        path = []
        v = t
        while prev[v] is not None:
            path.append((prev[v], v))
            v = prev[v]
        for u, w in reversed(path):
            if not sg.has_arc(u, w):
                sg.add_arc(u, w, rng.randint(1, cost_max))


def _grid_graph(spec: GenSpec, rng: random.Random):
    R, C = spec.rows, spec.cols

    def vid(i, j):
        return i * C + j

    lattice: list[tuple[int, int]] = []
    for i in range(R):
        for j in range(C):
            if j + 1 < C:
                lattice.append((vid(i, j), vid(i, j + 1)))
            if i + 1 < R:
                lattice.append((vid(i, j), vid(i + 1, j)))
    sg = _SlotGraph()
    for u, v in lattice:
        both = rng.random() < spec.both_orientation_prob
        fwd = rng.random() < 0.5
        if both or fwd:
            sg.add_arc(u, v, rng.randint(1, spec.cost_max))
        if both or not fwd:
            sg.add_arc(v, u, rng.randint(1, spec.cost_max))
    lattice_adj: dict[int, list[int]] = {vid(i, j): [] for i in range(R) for j in range(C)}
    for u, v in lattice:
        lattice_adj[u].append(v)
        lattice_adj[v].append(u)

    boundary = [vid(0, j) for j in range(C)]
    boundary += [vid(i, C - 1) for i in range(1, R)]
    boundary += [vid(R - 1, j) for j in range(C - 2, -1, -1)]
    boundary += [vid(i, 0) for i in range(R - 2, 0, -1)]
    roots = [boundary[(len(boundary) * i) // spec.roots] for i in range(spec.roots)]
    roots = sorted(dict.fromkeys(roots))
    while len(roots) < spec.roots:  # tiny grids may collide; walk the boundary
        extra = next(b for b in boundary if b not in roots)
        roots.append(extra)
    roots = sorted(roots)

    pool = [v for v in range(R * C) if v not in roots]
    terminals = sorted(rng.sample(pool, min(spec.k, len(pool))))
    for r in roots:
        _repair_reachability(sg, lattice_adj, r, terminals, rng, spec.cost_max)

    # clockwise geometric neighbor order: up, right, down, left
    neighbor_order = {}
    for i in range(R):
        for j in range(C):
            order = []
            if i > 0:
                order.append(vid(i - 1, j))
            if j + 1 < C:
                order.append(vid(i, j + 1))
            if i + 1 < R:
                order.append(vid(i + 1, j))
            if j > 0:
                order.append(vid(i, j - 1))
            neighbor_order[vid(i, j)] = order
    rot = sg.rotations(neighbor_order)
    g = EmbeddedDigraph(tuple(range(R * C)), sg.arcs, rot)
    return g, roots, terminals


def _disk_graph(spec: GenSpec, rng: random.Random):
    B = spec.n
    chords: list[tuple[int, int]] = []
    poly = list(range(B))
    edges = [(i, (i + 1) % B) for i in range(B)]

    def triangulate_poly(p: list[int]):
        if len(p) == 3:
            return
        apex = rng.randrange(len(p))
        p = p[apex:] + p[:apex]
        j = rng.randrange(2, len(p) - 1)
        chords.append((p[0], p[j]))
        triangulate_poly(p[: j + 1])
        triangulate_poly([p[0]] + p[j:])

    triangulate_poly(poly)
    sg = _SlotGraph()
    undirected = edges + chords
    for u, v in undirected:
        both = rng.random() < spec.both_orientation_prob
        fwd = rng.random() < 0.5
        if both or fwd:
            sg.add_arc(u, v, rng.randint(1, spec.cost_max))
        if both or not fwd:
            sg.add_arc(v, u, rng.randint(1, spec.cost_max))
    adj: dict[int, list[int]] = {v: [] for v in range(B)}
    for u, v in undirected:
        adj[u].append(v)
        adj[v].append(u)

    roots = sorted({(B * i) // spec.roots for i in range(spec.roots)})
    pool = [v for v in range(B) if v not in roots]
    terminals = sorted(rng.sample(pool, min(spec.k, len(pool))))
    for r in roots:
        _repair_reachability(sg, adj, r, terminals, rng, spec.cost_max)

    # geometric rotations: vertices on a circle, neighbors in clockwise order
    def angle(v):
        return 2 * math.pi * v / B

    neighbor_order = {}
    for v in range(B):
        ax, ay = math.cos(angle(v)), math.sin(angle(v))

        def rel(u):
            ux, uy = math.cos(angle(u)) - ax, math.sin(angle(u)) - ay
            return -math.atan2(uy, ux)  # clockwise sweep

        neighbor_order[v] = sorted(set(adj[v]), key=rel)
    rot = sg.rotations(neighbor_order)
    g = EmbeddedDigraph(tuple(range(B)), sg.arcs, rot)
    return g, roots, terminals


def _series_parallel_graph(spec: GenSpec, rng: random.Random):
    arcs: dict[int, Arc] = {}
    rot_internal: dict[int, list[int]] = {}
    next_vertex = [2]

    def atom(s, t):
        aid = len(arcs)
        arcs[aid] = Arc(s, t, rng.randint(1, spec.cost_max))
        return [dart(aid, 0)], [dart(aid, 1)]

    def build(s, t, budget):
        if budget <= 1:
            return atom(s, t)
        if rng.random() < 0.5:  # series
            m = next_vertex[0]
            next_vertex[0] += 1
            b1 = budget // 2
            s1, t1 = build(s, m, b1)
            s2, t2 = build(m, t, budget - b1)
            rot_internal[m] = s2 + list(reversed(t1))
            return s1, t2
        b1 = budget // 2
        s1, t1 = build(s, t, b1)
        s2, t2 = build(s, t, budget - b1)
        return s1 + s2, t1 + t2

    s_darts, t_darts = build(0, 1, max(1, spec.n - 1))
    rot = {0: tuple(s_darts), 1: tuple(reversed(t_darts))}
    for v, darts in rot_internal.items():
        rot[v] = tuple(darts)
    n = next_vertex[0]
    g = EmbeddedDigraph(tuple(range(n)), arcs, rot)
    roots = [0]
    pool = [v for v in range(1, n)]
    terminals = sorted(rng.sample(pool, min(spec.k, len(pool))))
    return g, roots, terminals


def _attach_problem(spec: GenSpec, rng: random.Random, g, roots, terminals) -> dict:
    prob: dict = {"roots": list(roots)}
    if spec.problem == "dst":
        prob["type"] = "dst"
        prob["terminals"] = list(terminals)
    else:
        lo, hi = spec.group_size
        groups: list[list[int]] = []
        pool = list(terminals)
        rng.shuffle(pool)
        q = max(1, min(spec.groups, len(pool)))
        for i in range(q):
            if not pool:
                break
            size = min(len(pool), rng.randint(max(1, lo), max(1, hi)))
            groups.append(sorted(pool[:size]))
            pool = pool[size:]
        groups = [grp for grp in groups if grp]
        if spec.problem == "dgst":
            prob["type"] = "dgst"
            prob["groups"] = groups
        elif spec.problem == "dcst":
            prob["type"] = "dcst"
            prob["groups"] = groups
            prob["requirements"] = [rng.randint(1, min(spec.requirement_max, len(grp)))
                                    for grp in groups]
        else:
            prob["type"] = "dpst"
            if spec.poly_kind == "coverage":
                poly = {"kind": "coverage", "groups": groups}
            elif spec.poly_kind == "truncated_partition":
                poly = {"kind": "truncated_partition", "groups": groups,
                        "requirements": [rng.randint(1, min(spec.requirement_max, len(grp)))
                                         for grp in groups]}
            else:
                poly = {"kind": "modular",
                        "weights": {str(t): rng.randint(1, 3) for t in terminals}}
            prob["polymatroid"] = poly
    return prob


def gen(spec: GenSpec) -> dict:
    """Generate one instance as a JSON-ready dict (deterministic per seed)."""
    spec.validate()
    rng = random.Random(spec.seed)
    if spec.kind == "grid":
        g, roots, terminals = _grid_graph(spec, rng)
    elif spec.kind == "disk":
        g, roots, terminals = _disk_graph(spec, rng)
    else:
        g, roots, terminals = _series_parallel_graph(spec, rng)
    validate_planar_embedding(g)

    obj = {
        "n": g.n,
        "arcs": [{"id": a, "tail": g.arcs[a].tail, "head": g.arcs[a].head,
                  "cost": g.arcs[a].cost} for a in sorted(g.arcs)],
        "rotation": {str(v): [d >> 1 for d in g.rotation[v]] for v in g.vertices},
        "problem": _attach_problem(spec, rng, g, roots, terminals),
    }
    if spec.prizes:
        obj["prizes"] = {str(t): rng.randint(1, spec.prize_max) for t in terminals}
    graph_from_json(obj)  # self-check: parses and passes the Euler validation
    return obj


def gen_bytes(spec: GenSpec) -> bytes:
    return canonical_json(gen(spec))
