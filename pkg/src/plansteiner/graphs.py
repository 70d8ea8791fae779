"""Embedded directed planar multigraphs and problem instances.

A graph is a set of integer vertices, a set of cost-weighted arcs, and a
rotation system: for every vertex, the cyclic (clockwise) order of the
incident arc ends.  The rotation system is the combinatorial embedding;
faces are recovered by dart traversal and validated against Euler's
relation per weakly connected component.

Arcs added by face triangulation are flagged ``aux``.  Aux arcs exist only
for the separator machinery: shortest paths, components, contraction,
solutions and costs all ignore them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

COST_TOL = 1e-9

INF = math.inf


class InstanceFormatError(ValueError):
    """Instance file is syntactically malformed."""


class UnknownVariantError(InstanceFormatError):
    pass


class InvariantViolation(ValueError):
    """A well-formed instance violates a domain invariant."""


class EmbeddingError(ValueError):
    """Rotation system is inconsistent or fails the Euler check."""


class AllZeroCostsError(ValueError):
    pass


class ContractionError(ValueError):
    """Contraction set is not weakly connected or misses the root."""


class Arc(NamedTuple):
    tail: int
    head: int
    cost: float
    aux: bool = False


def dart(arc_id: int, end: int) -> int:
    return 2 * arc_id + end


def dart_arc(d: int) -> int:
    return d >> 1


def dart_end(d: int) -> int:
    return d & 1


@dataclass
class EmbeddedDigraph:
    """Arc-weighted digraph with a rotation-system embedding.

    ``rotation[v]`` holds darts leaving v in clockwise order; dart
    ``2*a`` leaves the tail of arc ``a`` and ``2*a + 1`` leaves its head.
    Instances are treated as immutable after construction; all operations
    below are pure functions returning new graphs.
    """

    vertices: tuple[int, ...]
    arcs: dict[int, Arc]
    rotation: dict[int, tuple[int, ...]]
    _out: dict[int, list[int]] = field(default_factory=dict, repr=False)
    _in: dict[int, list[int]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        out: dict[int, list[int]] = {v: [] for v in self.vertices}
        inc: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a in sorted(self.arcs):
            arc = self.arcs[a]
            if arc.aux:
                continue
            out[arc.tail].append(a)
            inc[arc.head].append(a)
        self._out = out
        self._in = inc

    @property
    def n(self) -> int:
        return len(self.vertices)

    def out_arcs(self, v: int) -> list[int]:
        return self._out[v]

    def in_arcs(self, v: int) -> list[int]:
        return self._in[v]

    def real_arc_ids(self) -> list[int]:
        return [a for a in sorted(self.arcs) if not self.arcs[a].aux]

    def cost_of(self, arc_ids: Iterable[int]) -> float:
        return sum(self.arcs[a].cost for a in set(arc_ids))

    def total_cost(self) -> float:
        return sum(self.arcs[a].cost for a in self.real_arc_ids())

    def dart_vertex(self, d: int) -> int:
        arc = self.arcs[dart_arc(d)]
        return arc.tail if dart_end(d) == 0 else arc.head

    def dart_target(self, d: int) -> int:
        arc = self.arcs[dart_arc(d)]
        return arc.head if dart_end(d) == 0 else arc.tail

    def face_orbits(self) -> list[tuple[int, ...]]:
        """Faces as orbits of the dart permutation sigma(alpha(d))."""
        succ: dict[int, int] = {}
        for v in self.vertices:
            rot = self.rotation.get(v, ())
            for i, d in enumerate(rot):
                succ[d] = rot[(i + 1) % len(rot)]
        faces = []
        seen: set[int] = set()
        for v in self.vertices:
            for d0 in self.rotation.get(v, ()):
                if d0 in seen:
                    continue
                orbit = []
                d = d0
                while True:
                    orbit.append(d)
                    seen.add(d)
                    d = succ[d ^ 1]
                    if d == d0:
                        break
                faces.append(tuple(orbit))
        return faces


def validate_planar_embedding(g: EmbeddedDigraph) -> int:
    """Check rotation consistency and Euler's relation; return face count.

    Counts faces by dart traversal, one sphere per weakly connected
    component (isolated vertices contribute one face each).  Raises
    EmbeddingError naming the failure otherwise.
    """
    vset = set(g.vertices)
    placed: dict[int, int] = {}
    for v, rot in g.rotation.items():
        if v not in vset:
            raise EmbeddingError(f"inconsistent-rotation: unknown vertex {v}")
        for d in rot:
            if d in placed:
                raise EmbeddingError(f"inconsistent-rotation: dart {d} appears twice")
            placed[d] = v
    for a, arc in g.arcs.items():
        for end, want in ((0, arc.tail), (1, arc.head)):
            d = dart(a, end)
            if placed.get(d) != want:
                raise EmbeddingError(
                    f"inconsistent-rotation: arc {a} end {end} not at vertex {want}"
                )
        if arc.tail not in vset or arc.head not in vset:
            raise EmbeddingError(f"inconsistent-rotation: arc {a} endpoint missing")
    if len(placed) != 2 * len(g.arcs):
        raise EmbeddingError("inconsistent-rotation: rotation misses some arc end")

    comp_of: dict[int, int] = {}
    adj: dict[int, list[int]] = {v: [] for v in g.vertices}
    for arc in g.arcs.values():
        adj[arc.tail].append(arc.head)
        adj[arc.head].append(arc.tail)
    cid = 0
    for v in g.vertices:
        if v in comp_of:
            continue
        stack = [v]
        comp_of[v] = cid
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in comp_of:
                    comp_of[w] = cid
                    stack.append(w)
        cid += 1

    nc = [0] * cid
    mc = [0] * cid
    fc = [0] * cid
    for v in g.vertices:
        nc[comp_of[v]] += 1
    for arc in g.arcs.values():
        mc[comp_of[arc.tail]] += 1
    for orbit in g.face_orbits():
        fc[comp_of[g.dart_vertex(orbit[0])]] += 1
    total = 0
    for c in range(cid):
        faces = fc[c] if mc[c] else 1
        if nc[c] - mc[c] + faces != 2:
            raise EmbeddingError(
                f"euler-violation: component {c} has n={nc[c]} m={mc[c]} F={faces}"
            )
        total += faces
    return total


# ---------------------------------------------------------------------------
# polymatroids


class PolymatroidHandle:
    """Integer-valued normalized monotone submodular evaluator.

    Built-in kinds: coverage (number of groups hit), truncated partition
    rank (sum of min(h_i, |Z ∩ g_i|)) and modular (additive weights).
    """

    def __init__(self, kind: str, evaluate: Callable[[frozenset], int],
                 support: frozenset, maximum: int, params: dict):
        self.kind = kind
        self._evaluate = evaluate
        self.support = support
        self.maximum = maximum
        self.params = params

    def value(self, subset: Iterable[int]) -> int:
        return self._evaluate(frozenset(subset))

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params}

    @staticmethod
    def coverage(groups: list[list[int]]) -> PolymatroidHandle:
        gsets = [frozenset(g) for g in groups]

        def ev(z: frozenset) -> int:
            return sum(1 for gs in gsets if gs & z)

        support = frozenset().union(*gsets) if gsets else frozenset()
        return PolymatroidHandle("coverage", ev, support, len(gsets),
                                 {"groups": [sorted(g) for g in groups]})

    @staticmethod
    def truncated_partition(groups: list[list[int]], requirements: list[int]) -> PolymatroidHandle:
        gsets = [frozenset(g) for g in groups]
        caps = list(requirements)
        if len(caps) != len(gsets):
            raise InvariantViolation("invariant-violation: requirements length mismatch")

        def ev(z: frozenset) -> int:
            return sum(min(h, len(gs & z)) for gs, h in zip(gsets, caps))

        support = frozenset().union(*gsets) if gsets else frozenset()
        return PolymatroidHandle("truncated_partition", ev, support, sum(caps),
                                 {"groups": [sorted(g) for g in groups],
                                  "requirements": caps})

    @staticmethod
    def modular(weights: dict[int, int]) -> PolymatroidHandle:
        wt = {int(v): int(w) for v, w in weights.items()}

        def ev(z: frozenset) -> int:
            return sum(wt.get(v, 0) for v in z)

        support = frozenset(v for v, w in wt.items() if w > 0)
        return PolymatroidHandle("modular", ev, support, sum(max(w, 0) for w in wt.values()),
                                 {"weights": {str(v): w for v, w in sorted(wt.items())}})

    @staticmethod
    def from_json(obj: dict) -> PolymatroidHandle:
        kind = obj.get("kind")
        if kind == "coverage":
            return PolymatroidHandle.coverage(obj["groups"])
        if kind == "truncated_partition":
            return PolymatroidHandle.truncated_partition(obj["groups"], obj["requirements"])
        if kind == "modular":
            return PolymatroidHandle.modular({int(v): w for v, w in obj["weights"].items()})
        raise UnknownVariantError(f"unknown-variant: polymatroid kind {kind!r}")


# ---------------------------------------------------------------------------
# problem instances


@dataclass
class DstVariant:
    terminals: tuple[int, ...]
    name = "dst"


@dataclass
class DgstVariant:
    groups: tuple[tuple[int, ...], ...]
    name = "dgst"


@dataclass
class DcstVariant:
    groups: tuple[tuple[int, ...], ...]
    requirements: tuple[int, ...]
    name = "dcst"


@dataclass
class DpstVariant:
    polymatroid: PolymatroidHandle
    name = "dpst"


Variant = DstVariant | DgstVariant | DcstVariant | DpstVariant


@dataclass
class ProblemInstance:
    graph: EmbeddedDigraph
    roots: tuple[int, ...]
    variant: Variant
    prizes: dict[int, float] | None = None

    @property
    def terminals(self) -> tuple[int, ...]:
        """S: the union of all terminals mentioned by the variant."""
        v = self.variant
        if isinstance(v, DstVariant):
            return v.terminals
        if isinstance(v, (DgstVariant, DcstVariant)):
            seen: list[int] = []
            for grp in v.groups:
                for t in grp:
                    if t not in seen:
                        seen.append(t)
            return tuple(seen)
        return tuple(sorted(v.polymatroid.support))

    @property
    def k(self) -> int:
        """Coverage demand: |S|, #groups, sum of requirements, or f(V)."""
        v = self.variant
        if isinstance(v, DstVariant):
            return len(v.terminals)
        if isinstance(v, DgstVariant):
            return len(v.groups)
        if isinstance(v, DcstVariant):
            return sum(v.requirements)
        return v.polymatroid.maximum

    @property
    def N(self) -> int:
        return len(self.terminals)


@dataclass
class ArcSetSolution:
    """An arc set with its cost and the terminals it reaches."""

    arcs: frozenset[int]
    cost: float
    covered: frozenset[int]


# ---------------------------------------------------------------------------
# parsing / serialization


def _require(cond: bool, msg: str):
    if not cond:
        raise InvariantViolation("invariant-violation: " + msg)


def graph_from_json(obj: dict) -> EmbeddedDigraph:
    try:
        n = int(obj["n"])
        raw_arcs = obj["arcs"]
        raw_rot = obj["rotation"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"malformed-syntax: {exc}") from exc
    arcs: dict[int, Arc] = {}
    for rec in raw_arcs:
        try:
            aid = int(rec["id"])
            arc = Arc(int(rec["tail"]), int(rec["head"]), rec["cost"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFormatError(f"malformed-syntax: bad arc record {rec!r}") from exc
        if aid < 0 or aid in arcs:
            raise InstanceFormatError(f"malformed-syntax: bad arc id {aid}")
        if not (0 <= arc.tail < n and 0 <= arc.head < n):
            raise InvariantViolation(f"invariant-violation: arc {aid} endpoint out of range")
        if arc.cost < 0:
            raise InvariantViolation(f"invariant-violation: arc {aid} has negative cost")
        arcs[aid] = arc
    rotation: dict[int, tuple[int, ...]] = {}
    seen_ends: set[int] = set()
    for key, lst in raw_rot.items():
        v = int(key)
        darts = []
        for aid in lst:
            if aid not in arcs:
                raise EmbeddingError(f"inconsistent-rotation: unknown arc {aid} at {v}")
            arc = arcs[aid]
            if arc.tail == v and arc.head == v:
                end = 1 if dart(aid, 0) in seen_ends else 0
            elif arc.tail == v:
                end = 0
            elif arc.head == v:
                end = 1
            else:
                raise EmbeddingError(f"inconsistent-rotation: arc {aid} not incident to {v}")
            d = dart(aid, end)
            if d in seen_ends:
                raise EmbeddingError(f"inconsistent-rotation: dart of arc {aid} repeated")
            seen_ends.add(d)
            darts.append(d)
        rotation[v] = tuple(darts)
    g = EmbeddedDigraph(tuple(range(n)), arcs, rotation)
    validate_planar_embedding(g)
    return g


def parse_instance(data: bytes | str | dict) -> ProblemInstance:
    """Parse and validate an instance file (see the JSON schema in README)."""
    if isinstance(data, (bytes, str)):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(f"malformed-syntax: {exc}") from exc
    else:
        obj = data
    if not isinstance(obj, dict) or "problem" not in obj:
        raise InstanceFormatError("malformed-syntax: missing problem section")
    g = graph_from_json(obj)
    prob = obj["problem"]
    kind = prob.get("type")
    roots = tuple(int(r) for r in prob.get("roots", ()))
    _require(len(roots) >= 1, "at least one root required")
    vset = set(g.vertices)
    _require(all(r in vset for r in roots), "root is not a vertex")

    def check_terms(ts, what):
        for t in ts:
            _require(t in vset, f"{what} {t} is not a vertex")
            _require(t not in roots, f"{what} {t} coincides with a root")

    if kind == "dst":
        terminals = tuple(int(t) for t in prob.get("terminals", ()))
        check_terms(terminals, "terminal")
        _require(len(set(terminals)) == len(terminals), "duplicate terminal")
        variant: Variant = DstVariant(terminals)
    elif kind == "dgst":
        groups = tuple(tuple(int(t) for t in grp) for grp in prob.get("groups", ()))
        _require(all(groups), "empty group")
        for grp in groups:
            check_terms(grp, "group member")
        variant = DgstVariant(groups)
    elif kind == "dcst":
        groups = tuple(tuple(int(t) for t in grp) for grp in prob.get("groups", ()))
        reqs = tuple(int(h) for h in prob.get("requirements", ()))
        _require(len(groups) == len(reqs), "requirements/groups length mismatch")
        for grp, h in zip(groups, reqs):
            check_terms(grp, "group member")
            _require(1 <= h <= len(grp), f"requirement {h} outside 1..|g|={len(grp)}")
        variant = DcstVariant(groups, reqs)
    elif kind == "dpst":
        f = PolymatroidHandle.from_json(prob.get("polymatroid", {}))
        check_terms(sorted(f.support), "support vertex")
        variant = DpstVariant(f)
    else:
        raise UnknownVariantError(f"unknown-variant: {kind!r}")

    prizes = None
    if obj.get("prizes"):
        prizes = {int(v): p for v, p in obj["prizes"].items()}
        _require(all(v in vset for v in prizes), "prize on unknown vertex")
        _require(all(p >= 0 for p in prizes.values()), "negative prize")
    return ProblemInstance(g, roots, variant, prizes)


def graph_to_json(g: EmbeddedDigraph, remap: dict[int, int] | None = None) -> dict:
    if remap is None:
        remap = {v: i for i, v in enumerate(sorted(g.vertices))}
    arc_ids = sorted(a for a in g.arcs if not g.arcs[a].aux)
    aid_map = {a: i for i, a in enumerate(arc_ids)}
    return {
        "n": len(g.vertices),
        "arcs": [
            {"id": aid_map[a], "tail": remap[g.arcs[a].tail],
             "head": remap[g.arcs[a].head], "cost": g.arcs[a].cost}
            for a in arc_ids
        ],
        "rotation": {
            str(remap[v]): [aid_map[dart_arc(d)] for d in g.rotation.get(v, ())
                            if dart_arc(d) in aid_map]
            for v in sorted(g.vertices)
        },
    }


def instance_to_json(inst: ProblemInstance) -> dict:
    remap = {v: i for i, v in enumerate(sorted(inst.graph.vertices))}
    obj = graph_to_json(inst.graph, remap)
    v = inst.variant
    prob: dict = {"type": v.name, "roots": [remap[r] for r in inst.roots]}
    if isinstance(v, DstVariant):
        prob["terminals"] = [remap[t] for t in v.terminals]
    elif isinstance(v, DgstVariant):
        prob["groups"] = [[remap[t] for t in grp] for grp in v.groups]
    elif isinstance(v, DcstVariant):
        prob["groups"] = [[remap[t] for t in grp] for grp in v.groups]
        prob["requirements"] = list(v.requirements)
    else:
        p = v.polymatroid.to_json()
        if "groups" in p:
            p["groups"] = [sorted(remap[t] for t in grp) for grp in p["groups"]]
        if "weights" in p:
            p["weights"] = {str(remap[int(t)]): w for t, w in p["weights"].items()}
        prob["polymatroid"] = p
    obj["problem"] = prob
    if inst.prizes:
        obj["prizes"] = {str(remap[k]): p for k, p in sorted(inst.prizes.items())}
    return obj


def serialize_instance(inst: ProblemInstance) -> bytes:
    return canonical_json(instance_to_json(inst))


def canonical_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# shared primitives


def normalize_costs(g: EmbeddedDigraph, strict: bool = False):
    """Scale costs so the minimum positive cost is 1.

    Returns (graph, factor, notes): multiply reported costs by 1/factor to
    de-scale.  In strict mode zero-cost arcs are raised to cost 1 after
    scaling, recorded in notes (the paper-style algorithms assume costs
    >= 1); otherwise zeros are left alone.
    """
    real = g.real_arc_ids()
    positive = [g.arcs[a].cost for a in real if g.arcs[a].cost > 0]
    if not positive:
        raise AllZeroCostsError("all-zero-costs")
    lo = min(positive)
    factor = 1 if lo == 1 else 1.0 / lo
    arcs = {}
    notes = []
    for a, arc in g.arcs.items():
        c = arc.cost if factor == 1 else arc.cost * factor
        if arc.cost == 0 and not arc.aux and strict:
            c = 1
            notes.append(a)
        arcs[a] = Arc(arc.tail, arc.head, c, arc.aux)
    return EmbeddedDigraph(g.vertices, arcs, dict(g.rotation)), factor, notes


def shortest_path_tree(g: EmbeddedDigraph, r: int):
    """Dijkstra out-tree from r over real arcs.

    Returns (dist, parent_arc); unreachable vertices carry dist +inf and
    no parent.  Parents are chosen deterministically: vertices settle in
    (distance, vertex) order and each takes the smallest arc id among
    already-settled tails, which stays acyclic even across zero-cost ties.
    """
    import heapq

    dist: dict[int, float] = {v: INF for v in g.vertices}
    dist[r] = 0
    heap: list[tuple[float, int]] = [(0, r)]
    done: set[int] = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for a in g.out_arcs(v):
            arc = g.arcs[a]
            nd = d + arc.cost
            if nd < dist[arc.head]:
                dist[arc.head] = nd
                heapq.heappush(heap, (nd, arc.head))

    parent: dict[int, int] = {}
    settled = {r}
    pending = sorted((v for v in g.vertices if v != r and dist[v] < INF),
                     key=lambda v: (dist[v], v))
    while pending:
        leftover = []
        for v in pending:
            best = None
            for a in g.in_arcs(v):
                arc = g.arcs[a]
                if arc.tail in settled and dist[arc.tail] + arc.cost == dist[v]:
                    if best is None or a < best:
                        best = a
            if best is None:
                leftover.append(v)
            else:
                parent[v] = best
                settled.add(v)
        if len(leftover) == len(pending):  # float asymmetry; fall back to tolerance
            for v in leftover:
                for a in g.in_arcs(v):
                    arc = g.arcs[a]
                    if arc.tail in settled and abs(dist[arc.tail] + arc.cost - dist[v]) <= COST_TOL:
                        parent[v] = a
                        settled.add(v)
                        break
            leftover = [v for v in leftover if v not in settled]
            if len(leftover) == len(pending):
                raise AssertionError("shortest_path_tree failed to settle parents")
        pending = leftover
    return dist, parent


def root_path(g: EmbeddedDigraph, parent: dict[int, int], v: int) -> list[int]:
    """Arc ids of the tree path from the root down to v (root order)."""
    path = []
    while v in parent:
        a = parent[v]
        path.append(a)
        v = g.arcs[a].tail
    path.reverse()
    return path


def induced_subgraph(g: EmbeddedDigraph, keep: Iterable[int]) -> EmbeddedDigraph:
    kset = set(keep)
    arcs = {a: arc for a, arc in g.arcs.items()
            if arc.tail in kset and arc.head in kset}
    rotation = {
        v: tuple(d for d in g.rotation.get(v, ()) if dart_arc(d) in arcs)
        for v in g.vertices if v in kset
    }
    return EmbeddedDigraph(tuple(sorted(kset)), arcs, rotation)


def weak_components(g: EmbeddedDigraph, removed: Iterable[int] = ()):
    """Partition V minus removed into weakly connected components.

    Components are listed by smallest member vertex; each comes with its
    induced embedded subgraph.  Only real arcs define connectivity.
    """
    rm = set(removed)
    adj: dict[int, list[int]] = {v: [] for v in g.vertices if v not in rm}
    for a in g.real_arc_ids():
        arc = g.arcs[a]
        if arc.tail in rm or arc.head in rm:
            continue
        adj[arc.tail].append(arc.head)
        adj[arc.head].append(arc.tail)
    out = []
    seen: set[int] = set()
    for v in sorted(adj):
        if v in seen:
            continue
        comp = []
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comp.sort()
        out.append((tuple(comp), induced_subgraph(g, comp)))
    return out


@dataclass
class ContractionInfo:
    vertex_map: dict[int, int]
    arc_groups: dict[int, tuple[int, ...]]
    dropped_loops: tuple[int, ...]

    def surviving_arc(self, a: int) -> int | None:
        """Map an original arc id to the arc representing it, if any."""
        hit = self._rev.get(a)
        return hit

    def __post_init__(self):
        self._rev = {}
        for kept, grp in self.arc_groups.items():
            for a in grp:
                self._rev[a] = kept


def contract_into_root(g: EmbeddedDigraph, merge: Iterable[int], r: int):
    """Contract a weakly connected vertex set containing r into r.

    Rotations are spliced at the merge points so the result stays a valid
    embedded planar multigraph.  Self-loops are deleted; parallel arcs
    between the same ordered pair keep only the cheapest (smallest id on
    ties).  Returns (graph, ContractionInfo).
    """
    mset = set(merge)
    if r not in mset:
        raise ContractionError("disconnected-contraction-set: root not in set")
    if any(g.arcs[a].aux for a in g.arcs):
        raise ContractionError("contract_into_root expects a real-arc graph")

    rep = {v: v for v in g.vertices}

    def find(v: int) -> int:
        while rep[v] != v:
            rep[v] = rep[rep[v]]
            v = rep[v]
        return v

    # BFS spanning arcs of the merge set, rooted at r
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in mset}
    for a in g.real_arc_ids():
        arc = g.arcs[a]
        if arc.tail in mset and arc.head in mset:
            adj[arc.tail].append((arc.head, a))
            adj[arc.head].append((arc.tail, a))
    order: list[int] = []
    seen = {r}
    queue = [r]
    while queue:
        u = queue.pop(0)
        for w, a in sorted(adj[u], key=lambda p: p[1]):
            if w not in seen:
                seen.add(w)
                order.append(a)
                queue.append(w)
    if seen != mset:
        raise ContractionError("disconnected-contraction-set")

    rot = {v: list(g.rotation.get(v, ())) for v in g.vertices}
    alive = dict(g.arcs)

    for a in order:
        arc = g.arcs[a]
        tu, tv = find(arc.tail), find(arc.head)
        if tu == tv:
            continue
        if tu == r:
            d_r, d_x, x = dart(a, 0), dart(a, 1), tv
        else:
            d_r, d_x, x = dart(a, 1), dart(a, 0), tu
        i = rot[r].index(d_r)
        j = rot[x].index(d_x)
        rot[r] = rot[r][i + 1:] + rot[r][:i] + rot[x][j + 1:] + rot[x][:j]
        del rot[x]
        del alive[a]
        rep[x] = r

    def remove_darts(a: int):
        arc = g.arcs[a]
        for d, vtx in ((dart(a, 0), find(arc.tail)), (dart(a, 1), find(arc.head))):
            if d in rot.get(vtx, ()):
                rot[vtx].remove(d)

    dropped_loops = []
    for a in sorted(alive):
        arc = alive[a]
        if find(arc.tail) == find(arc.head):
            remove_darts(a)
            del alive[a]
            dropped_loops.append(a)

    by_pair: dict[tuple[int, int], list[int]] = {}
    for a in sorted(alive):
        arc = alive[a]
        by_pair.setdefault((find(arc.tail), find(arc.head)), []).append(a)
    arc_groups: dict[int, tuple[int, ...]] = {}
    for pair, group in by_pair.items():
        keep = min(group, key=lambda a: (alive[a].cost, a))
        arc_groups[keep] = tuple(group)
        for a in group:
            if a != keep:
                remove_darts(a)
                del alive[a]

    new_vertices = tuple(sorted(set(g.vertices) - mset | {r}))
    new_arcs = {a: Arc(find(arc.tail), find(arc.head), arc.cost, arc.aux)
                for a, arc in alive.items()}
    new_rot = {v: tuple(rot[v]) for v in new_vertices}
    info = ContractionInfo({v: find(v) for v in g.vertices}, arc_groups,
                           tuple(dropped_loops))
    return EmbeddedDigraph(new_vertices, new_arcs, new_rot), info


def check_out_tree(g: EmbeddedDigraph, arc_ids: Iterable[int], r: int):
    """True iff the arc set induces an out-tree rooted at r.

    Every non-root vertex touched by the arcs must have in-degree exactly
    one and be reachable from r.  On failure returns (False, witness).
    """
    F = set(arc_ids)
    indeg: dict[int, int] = {}
    out: dict[int, list[int]] = {}
    touched: set[int] = set()
    for a in F:
        arc = g.arcs[a]
        touched.update((arc.tail, arc.head))
        indeg[arc.head] = indeg.get(arc.head, 0) + 1
        out.setdefault(arc.tail, []).append(arc.head)
    for v in sorted(touched):
        if v != r and indeg.get(v, 0) != 1:
            return False, v
    reach = {r}
    stack = [r]
    while stack:
        u = stack.pop()
        for w in out.get(u, ()):
            if w not in reach:
                reach.add(w)
                stack.append(w)
    for v in sorted(touched):
        if v not in reach:
            return False, v
    return True, None


def reachable_from(g: EmbeddedDigraph, arc_ids: Iterable[int], roots: Iterable[int]) -> frozenset[int]:
    out: dict[int, list[int]] = {}
    for a in set(arc_ids):
        arc = g.arcs[a]
        out.setdefault(arc.tail, []).append(arc.head)
    reach = set(roots)
    stack = list(reach)
    while stack:
        u = stack.pop()
        for w in out.get(u, ()):
            if w not in reach:
                reach.add(w)
                stack.append(w)
    return frozenset(reach)


def prune_to_out_tree(g: EmbeddedDigraph, arc_ids: Iterable[int], r: int) -> frozenset[int]:
    """Reduce an arc set to an out-tree from r covering the same reachable set.

    Breadth-first from r, keeping the smallest-id in-arc per vertex;
    arcs whose tail never becomes reachable are dropped.  Cost never
    increases.
    """
    out: dict[int, list[int]] = {}
    for a in sorted(set(arc_ids)):
        arc = g.arcs[a]
        out.setdefault(arc.tail, []).append(a)
    kept: set[int] = set()
    seen = {r}
    queue = [r]
    while queue:
        u = queue.pop(0)
        for a in out.get(u, ()):
            h = g.arcs[a].head
            if h not in seen:
                seen.add(h)
                kept.add(a)
                queue.append(h)
    return frozenset(kept)
