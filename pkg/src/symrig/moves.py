"""Henneberg-type moves on gain graphs and the reduction search behind certificates.

Forward moves refer to vertices and edges of the graph they are applied to by
index.  New vertices are appended at the end; a vertex that is expanded
(vertex-to-K4, vertex-to-4-cycle) keeps its index as one of the new vertices.

Certification works backwards with inverse moves, keeping every intermediate
graph tight.  Because inverse moves renumber vertices, the reducer records
moves against stable vertex labels and translates them to indices when the
forward script is assembled, so that replaying a script reproduces the input
graph exactly (up to edge order and orientation).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .gaingraph import (
    GainGraph,
    GainGraphError,
    connected_components,
    edge_key,
    is_balanced,
    potentials,
    switch,
)
from .groups import SymmetryGroup
from .sparsity import CountSpec, is_gain_tight


class MoveError(ValueError):
    """A move whose arguments do not fit the graph or break cover simplicity."""


class CertificationError(ValueError):
    pass


# -- moves ---------------------------------------------------------------------


@dataclass(frozen=True)
class H1:
    """New vertex with two edges ``x -> v``; ``x = None`` stands for a loop at v."""

    first: tuple
    second: tuple

    @property
    def kind(self) -> str:
        (x1, _), (x2, _) = self.first, self.second
        if x1 is None or x2 is None:
            return "H1c"
        return "H1b" if x1 == x2 else "H1a"


@dataclass(frozen=True)
class H2:
    """Delete ``edge`` (t, h, g), add v with (t,v,g1), (h,v,g2), (z,v,g3); g1*g2^-1 = g."""

    edge: int
    z: int
    g1: int
    g2: int
    g3: int


@dataclass(frozen=True)
class VertexToK4:
    """Expand loop-free ``v`` into an identity K4 on v, n, n+1, n+2.

    ``assign[i]`` places the i-th edge incident with v (in edge order) on K4
    vertex ``assign[i]`` (0 means v itself).
    """

    v: int
    assign: tuple


@dataclass(frozen=True)
class VertexTo4Cycle:
    """Split ``v`` into v and a new vertex n, both joined to a and b.

    ``edge_a``/``edge_b`` are edges from v to the neighbours a, b; they stay at v
    and get copies at n with the same gains.  ``assign`` places every other
    edge incident with v (in edge order, loops included) on v (0) or n (1).
    """

    v: int
    edge_a: int
    edge_b: int
    assign: tuple


@dataclass(frozen=True)
class EdgeJoin:
    """Disjoint union with the graph built by ``other`` plus an edge (a, n+b, gain)."""

    other: "MoveScript"
    a: int
    b: int
    gain: int


@dataclass(frozen=True)
class Switch:
    v: int
    x: int


Move = Union[H1, H2, VertexToK4, VertexTo4Cycle, EdgeJoin, Switch]


def move_kind(move: Move) -> str:
    if isinstance(move, H1):
        return move.kind
    return type(move).__name__


def h2_kind(gg: GainGraph, move: H2) -> str:
    t, h, _ = gg.edges[move.edge]
    if t == h:
        return "H2d" if move.z == t else "H2c"
    return "H2b" if move.z in (t, h) else "H2a"


def _check_vertex(gg: GainGraph, v: int):
    if not isinstance(v, (int, np.integer)) or not 0 <= v < gg.n:
        raise MoveError(f"vertex {v} out of range")


def _build(gg: GainGraph, n: int, edges) -> GainGraph:
    try:
        return GainGraph(gg.group, n, edges)
    except GainGraphError as exc:
        raise MoveError(str(exc)) from None


def apply(gg: GainGraph, move: Move) -> GainGraph:
    G, n = gg.group, gg.n
    edges = list(gg.edges)
    if isinstance(move, H1):
        (x1, g1), (x2, g2) = move.first, move.second
        if x1 is None and x2 is None:
            raise MoveError("H1 edges may not both be loops")
        new = []
        for x, g in ((x1, g1), (x2, g2)):
            if x is None:
                if g == 0:
                    raise MoveError("H1c loop needs a non-identity gain")
                new.append((n, n, g))
            else:
                _check_vertex(gg, x)
                new.append((x, n, g))
        if x1 is not None and x1 == x2 and g1 == g2:
            raise MoveError("H1b parallel edges need distinct gains")
        return _build(gg, n + 1, edges + new)
    if isinstance(move, H2):
        if not 0 <= move.edge < gg.m:
            raise MoveError(f"edge {move.edge} out of range")
        _check_vertex(gg, move.z)
        t, h, g = edges.pop(move.edge)
        if G.mul(move.g1, G.inv(move.g2)) != g:
            raise MoveError("H2 gains must satisfy g1 * g2^-1 = gain of the deleted edge")
        edges += [(t, n, move.g1), (h, n, move.g2), (move.z, n, move.g3)]
        return _build(gg, n + 1, edges)
    if isinstance(move, VertexToK4):
        v = move.v
        _check_vertex(gg, v)
        inc = gg.incident(v)
        if len(move.assign) != len(inc):
            raise MoveError("VertexToK4 needs one target per incident edge")
        targets = [v, n, n + 1, n + 2]
        for i, a in zip(inc, move.assign):
            t, h, g = edges[i]
            if t == h:
                raise MoveError("VertexToK4 is only defined on loop-free vertices")
            if a not in (0, 1, 2, 3):
                raise MoveError("K4 targets are 0..3")
            y = targets[a]
            edges[i] = (y, h, g) if t == v else (t, y, g)
        edges += [(a, b, 0) for a, b in itertools.combinations(targets, 2)]
        return _build(gg, n + 3, edges)
    if isinstance(move, VertexTo4Cycle):
        v = move.v
        _check_vertex(gg, v)
        inc = gg.incident(v)
        if move.edge_a not in inc or move.edge_b not in inc or move.edge_a == move.edge_b:
            raise MoveError("4-cycle edges must be two distinct edges at v")
        a, alpha = gg.gain_towards(move.edge_a, v)
        b, beta = gg.gain_towards(move.edge_b, v)
        if a == v or b == v or a == b:
            raise MoveError("4-cycle needs two distinct neighbours of v")
        rest = [i for i in inc if i not in (move.edge_a, move.edge_b)]
        if len(move.assign) != len(rest):
            raise MoveError("VertexTo4Cycle needs one side per remaining edge")
        for i, side in zip(rest, move.assign):
            if side not in (0, 1):
                raise MoveError("4-cycle sides are 0 or 1")
            if side:
                t, h, g = edges[i]
                edges[i] = (n if t == v else t, n if h == v else h, g)
        edges += [(a, n, alpha), (b, n, beta)]
        return _build(gg, n + 1, edges)
    if isinstance(move, EdgeJoin):
        other = move.other.replay()
        if other.group != G:
            raise MoveError("EdgeJoin graphs must share the gain group")
        _check_vertex(gg, move.a)
        if not 0 <= move.b < other.n:
            raise MoveError("EdgeJoin endpoint outside the other graph")
        edges += [(t + n, h + n, g) for t, h, g in other.edges]
        edges.append((move.a, n + move.b, move.gain))
        return _build(gg, n + other.n, edges)
    if isinstance(move, Switch):
        _check_vertex(gg, move.v)
        return switch(gg, move.v, move.x)
    raise MoveError(f"unknown move {move!r}")


# -- scripts ---------------------------------------------------------------------

BASES = ("K1", "K2", "K1_loop", "K4_plus_e", "K5_minus_e")


@dataclass(frozen=True)
class MoveScript:
    base: str
    base_graph: GainGraph
    moves: tuple = ()
    labels: tuple | None = None  # labels[i] = input vertex realised by replay vertex i

    def replay(self, check: CountSpec | None = None) -> GainGraph:
        gg = self.base_graph
        if check is not None and not is_gain_tight(gg, check):
            raise CertificationError(f"base graph is not {check}-tight")
        for step, move in enumerate(self.moves):
            gg = apply(gg, move)
            if check is not None and not isinstance(move, Switch) and not is_gain_tight(gg, check):
                raise CertificationError(f"step {step} ({move_kind(move)}) breaks {check}-tightness")
        return gg

    def realise(self) -> GainGraph:
        """Replay and rename vertices to the labels of the certified graph."""
        gg = self.replay()
        if self.labels is None:
            return gg
        return gg.relabel(self.labels)

    def kinds(self) -> list[str]:
        out, gg = [], self.base_graph
        for move in self.moves:
            out.append(h2_kind(gg, move) if isinstance(move, H2) else move_kind(move))
            gg = apply(gg, move)
        return out

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "base_graph": self.base_graph.to_dict(),
            "moves": [move_to_dict(m) for m in self.moves],
            "labels": None if self.labels is None else list(self.labels),
        }


def move_to_dict(move: Move) -> dict:
    if isinstance(move, H1):
        return {"type": move.kind, "first": list(move.first), "second": list(move.second)}
    if isinstance(move, H2):
        return {"type": "H2", "edge": move.edge, "z": move.z, "g1": move.g1, "g2": move.g2, "g3": move.g3}
    if isinstance(move, VertexToK4):
        return {"type": "VertexToK4", "v": move.v, "assign": list(move.assign)}
    if isinstance(move, VertexTo4Cycle):
        return {"type": "VertexTo4Cycle", "v": move.v, "edge_a": move.edge_a,
                "edge_b": move.edge_b, "assign": list(move.assign)}
    if isinstance(move, EdgeJoin):
        return {"type": "EdgeJoin", "other": move.other.to_dict(), "a": move.a, "b": move.b, "gain": move.gain}
    return {"type": "Switch", "v": move.v, "x": move.x}


def move_from_dict(data: dict, group: SymmetryGroup) -> Move:
    kind = data["type"]
    if kind in ("H1a", "H1b", "H1c"):
        return H1(tuple(data["first"]), tuple(data["second"]))
    if kind == "H2":
        return H2(data["edge"], data["z"], data["g1"], data["g2"], data["g3"])
    if kind == "VertexToK4":
        return VertexToK4(data["v"], tuple(data["assign"]))
    if kind == "VertexTo4Cycle":
        return VertexTo4Cycle(data["v"], data["edge_a"], data["edge_b"], tuple(data["assign"]))
    if kind == "EdgeJoin":
        return EdgeJoin(script_from_dict(data["other"], group), data["a"], data["b"], data["gain"])
    if kind == "Switch":
        return Switch(data["v"], data["x"])
    raise MoveError(f"unknown move type {kind!r}")


def script_from_dict(data: dict, group: SymmetryGroup) -> MoveScript:
    bg = data["base_graph"]
    base_graph = GainGraph(group, bg["vertices"], [(e["tail"], e["head"], e["gain"]) for e in bg["edges"]])
    labels = data.get("labels")
    return MoveScript(
        data["base"],
        base_graph,
        tuple(move_from_dict(m, group) for m in data["moves"]),
        None if labels is None else tuple(labels),
    )


# -- inverse moves (label space) -------------------------------------------------
#
# The reducer keeps the current graph together with labels[v], the input vertex
# that index v stands for.  Each inverse move yields the smaller graph, its
# labels and the forward steps rebuilding the current graph, written with
# labels ("L-moves") instead of indices.


@dataclass(frozen=True)
class LH1:
    new: int
    first: tuple  # (label or None, gain)
    second: tuple


@dataclass(frozen=True)
class LH2:
    new: int
    edge: tuple  # (tail label, head label, gain)
    z: int
    g1: int
    g2: int
    g3: int


@dataclass(frozen=True)
class LK4:
    v: int
    new: tuple  # three labels
    assign: dict  # labelled edge key -> 0..3


@dataclass(frozen=True)
class L4Cycle:
    v: int
    new: int
    edge_a: tuple
    edge_b: tuple
    assign: dict  # labelled edge key -> 0/1


@dataclass(frozen=True)
class LJoin:
    other: MoveScript
    a: int
    b: int
    gain: int


@dataclass(frozen=True)
class LSwitch:
    v: int
    x: int


def _lkey(group, labels, e):
    t, h, g = e
    return edge_key(group, labels[t], labels[h], g)


def _find_edge(gg: GainGraph, labels, key) -> int:
    for i, e in enumerate(gg.edges):
        if _lkey(gg.group, labels, e) == key:
            return i
    raise CertificationError(f"edge {key} missing during replay")


def _translate(gg: GainGraph, labels: list, lmove) -> tuple[Move, list]:
    """Index-based move for ``lmove`` on ``gg`` and the labels after applying it."""
    pos = {lab: i for i, lab in enumerate(labels)}
    G = gg.group
    if isinstance(lmove, LH1):
        conv = lambda p: (None if p[0] is None else pos[p[0]], p[1])
        return H1(conv(lmove.first), conv(lmove.second)), labels + [lmove.new]
    if isinstance(lmove, LH2):
        idx = _find_edge(gg, labels, edge_key(G, *lmove.edge))
        t, h, g = gg.edges[idx]
        g1, g2 = lmove.g1, lmove.g2
        if (labels[t], labels[h]) != (lmove.edge[0], lmove.edge[1]) or g != lmove.edge[2]:
            # stored the other way round: the roles of e1 and e2 swap
            g1, g2 = g2, g1
        return H2(idx, pos[lmove.z], g1, g2, lmove.g3), labels + [lmove.new]
    if isinstance(lmove, LK4):
        v = pos[lmove.v]
        assign = tuple(lmove.assign[_lkey(G, labels, gg.edges[i])] for i in gg.incident(v))
        return VertexToK4(v, assign), labels + list(lmove.new)
    if isinstance(lmove, L4Cycle):
        v = pos[lmove.v]
        ea = _find_edge(gg, labels, lmove.edge_a)
        eb = _find_edge(gg, labels, lmove.edge_b)
        rest = [i for i in gg.incident(v) if i not in (ea, eb)]
        assign = tuple(lmove.assign[_lkey(G, labels, gg.edges[i])] for i in rest)
        return VertexTo4Cycle(v, ea, eb, assign), labels + [lmove.new]
    if isinstance(lmove, LJoin):
        return EdgeJoin(lmove.other, pos[lmove.a], lmove.other.labels.index(lmove.b), lmove.gain), \
            labels + list(lmove.other.labels)
    if isinstance(lmove, LSwitch):
        return Switch(pos[lmove.v], lmove.x), labels
    raise TypeError(lmove)


def _delete_vertices(gg: GainGraph, labels, drop: set, edges) -> tuple[GainGraph, list]:
    keep = [v for v in range(gg.n) if v not in drop]
    new_index = {v: i for i, v in enumerate(keep)}
    out = [(new_index[t], new_index[h], g) for t, h, g in edges]
    return GainGraph(gg.group, len(keep), out), [labels[v] for v in keep]


@dataclass
class Candidate:
    kind: str
    graph: GainGraph
    labels: list
    steps: list  # forward L-moves, in application order
    parts: tuple = ()  # for edge separation: ((graph, labels), (graph, labels))


def _inverse_h1(gg, labels, allowed):
    for v in range(gg.n):
        inc = gg.incident(v)
        if len(inc) != 2:
            continue
        ends = []
        for i in inc:
            t, h, g = gg.edges[i]
            ends.append((None, g) if t == h else gg.gain_towards(i, v))
        if ends[0][0] is None and ends[1][0] is None:
            continue
        ends = [(None if x is None else x, g) for x, g in ends]
        move = LH1(labels[v], *[(None if x is None else labels[x], g) for x, g in ends])
        kind = H1(*ends).kind
        if kind not in allowed:
            continue
        rest = [e for i, e in enumerate(gg.edges) if i not in inc]
        small, lab = _delete_vertices(gg, labels, {v}, rest)
        yield Candidate(kind, small, lab, [move])


def _h2_kind(x_i, x_j, z):
    if x_i == x_j:
        return "H2d" if z == x_i else "H2c"
    return "H2b" if z in (x_i, x_j) else "H2a"


def _inverse_h2(gg, labels, allowed):
    G = gg.group
    for v in range(gg.n):
        inc = gg.incident(v)
        if len(inc) != 3 or any(gg.edges[i][0] == gg.edges[i][1] for i in inc):
            continue
        ends = [gg.gain_towards(i, v) for i in inc]
        rest = [e for i, e in enumerate(gg.edges) if i not in inc]
        for i, j in itertools.combinations(range(3), 2):
            k = 3 - i - j
            (xi, gi), (xj, gj), (xk, gk) = ends[i], ends[j], ends[k]
            kind = _h2_kind(xi, xj, xk)
            if kind not in allowed:
                continue
            gain = G.mul(gi, G.inv(gj))
            try:
                small, lab = _delete_vertices(gg, labels, {v}, rest + [(xi, xj, gain)])
            except GainGraphError:
                continue
            move = LH2(labels[v], (labels[xi], labels[xj], gain), labels[xk], gi, gj, gk)
            yield Candidate(kind, small, lab, [move])


def _switch_steps(labels, phi: dict) -> list:
    """Forward switches undoing a switch of each vertex u by phi[u]."""
    return [LSwitch(labels[u], x) for u, x in sorted(phi.items()) if x]


def _switched(gg, phi):
    for u, x in phi.items():
        if x:
            gg = switch(gg, u, x)
    return gg


def trivial_k4s(gg: GainGraph):
    """Vertex quadruples inducing exactly a switching-trivial K4 (no extra edges)."""
    for quad in itertools.combinations(range(gg.n), 4):
        inside = gg.induced(quad)
        if len(inside) != 6:
            continue
        pairs = {frozenset(gg.edges[i][:2]) for i in inside}
        if len(pairs) != 6 or any(len(p) == 1 for p in pairs):
            continue
        if is_balanced(gg, inside):
            yield quad, inside


def _inverse_k4(gg, labels):
    G = gg.group
    for quad, inside in trivial_k4s(gg):
        phi, _, _ = potentials(gg, inside)
        sw = _switched(gg, phi)
        q0, rest_q = quad[0], quad[1:]
        target = {q0: 0, rest_q[0]: 1, rest_q[1]: 2, rest_q[2]: 3}
        new_edges, assign_src = [], []
        for i, (t, h, g) in enumerate(sw.edges):
            if i in inside:
                continue
            if t in target:
                assign_src.append((len(new_edges), target[t]))
                t = q0
            elif h in target:
                assign_src.append((len(new_edges), target[h]))
                h = q0
            new_edges.append((t, h, g))
        try:
            small, lab = _delete_vertices(gg, labels, set(rest_q), new_edges)
        except GainGraphError:
            continue
        assign = {_lkey(G, lab, small.edges[pos]): a for pos, a in assign_src}
        inverse_phi = {u: G.inv(x) for u, x in phi.items()}
        steps = [LK4(labels[q0], tuple(labels[q] for q in rest_q), assign)]
        steps += _switch_steps(labels, inverse_phi)
        yield Candidate("VertexToK4", small, lab, steps)


def _four_cycles(gg: GainGraph):
    """Balanced 4-cycles a, v1, b, v2 with v1 < v2 non-adjacent and a < b."""
    inc = [gg.incident(v) for v in range(gg.n)]
    for v1, v2 in itertools.combinations(range(gg.n), 2):
        if v2 in gg.neighbours(v1):
            continue
        common = sorted(gg.neighbours(v1) & gg.neighbours(v2))
        for a, b in itertools.combinations(common, 2):
            for ea1 in inc[v1]:
                if a not in gg.edges[ea1][:2] or gg.edges[ea1][0] == gg.edges[ea1][1]:
                    continue
                for eb1 in inc[v1]:
                    if b not in gg.edges[eb1][:2] or gg.edges[eb1][0] == gg.edges[eb1][1]:
                        continue
                    for ea2 in inc[v2]:
                        if a not in gg.edges[ea2][:2] or gg.edges[ea2][0] == gg.edges[ea2][1]:
                            continue
                        for eb2 in inc[v2]:
                            if b not in gg.edges[eb2][:2] or gg.edges[eb2][0] == gg.edges[eb2][1]:
                                continue
                            cyc = [ea1, eb1, ea2, eb2]
                            if is_balanced(gg, cyc):
                                yield v1, v2, a, b, cyc


def _inverse_4cycle(gg, labels):
    G = gg.group
    for v1, v2, a, b, cyc in _four_cycles(gg):
        ea1, eb1, ea2, eb2 = cyc
        # potentials rooted at a (a is not necessarily the minimum vertex)
        phi, _, _ = potentials(gg, cyc)
        shift = G.inv(phi[a])
        phi = {u: G.mul(shift, x) for u, x in phi.items()}
        phi.pop(a)
        sw = _switched(gg, phi)
        new_edges, moved = [], []
        for i, (t, h, g) in enumerate(sw.edges):
            if i in (ea2, eb2):
                continue
            if t == v2 or h == v2:
                moved.append(len(new_edges))
                t, h = (v1 if t == v2 else t), (v1 if h == v2 else h)
            new_edges.append((t, h, g))
        try:
            small, lab = _delete_vertices(gg, labels, {v2}, new_edges)
        except GainGraphError:
            continue
        # positions of ea1/eb1 in new_edges: they keep their relative order
        order = [i for i in range(sw.m) if i not in (ea2, eb2)]
        pa, pb = order.index(ea1), order.index(eb1)
        keys = [_lkey(G, lab, e) for e in small.edges]
        assign = {}
        for pos_, key in enumerate(keys):
            t, h, _ = small.edges[pos_]
            if pos_ in (pa, pb) or (t != lab.index(labels[v1]) and h != lab.index(labels[v1])):
                continue
            assign[key] = 1 if pos_ in moved else 0
        inverse_phi = {u: G.inv(x) for u, x in phi.items()}
        steps = [L4Cycle(labels[v1], labels[v2], keys[pa], keys[pb], assign)]
        steps += _switch_steps(labels, inverse_phi)
        yield Candidate("VertexTo4Cycle", small, lab, steps)


def _bridges(gg: GainGraph):
    for i, (t, h, _) in enumerate(gg.edges):
        if t == h:
            continue
        rest = [e for j, e in enumerate(gg.edges) if j != i]
        comps = connected_components(gg.n, rest)
        side = next(c for c in comps if t in c)
        if h not in side:
            yield i, side


def _split(gg, labels, side):
    keep = sorted(side)
    idx = {v: j for j, v in enumerate(keep)}
    edges = [(idx[t], idx[h], g) for t, h, g in gg.edges if t in side and h in side]
    return GainGraph(gg.group, len(keep), edges), [labels[v] for v in keep]


# Moves allowed for each certified count, as (k, l, m) triples.
ALLOWED = {
    (2, 3, 3): {"H1a", "H2a"},
    (2, 3, 1): {"H1a", "H1b", "H1c", "H2a", "H2b", "H2c", "H2d"},
    (2, 2, 2): {"H1a", "H1b", "H2a", "H2b", "VertexToK4", "VertexTo4Cycle"},
    (2, 2, 1): {"H1a", "H1b", "H1c", "H2a", "H2b", "H2c", "VertexToK4", "VertexTo4Cycle", "EdgeJoin"},
    (2, 1, 1): {"H1a", "H1b", "H1c", "H2a", "H2b", "H2c", "H2d", "VertexToK4", "VertexTo4Cycle", "EdgeJoin"},
}
BASE_GRAPHS = {
    (2, 3, 3): ("K2",),
    (2, 3, 1): ("K1_loop",),
    (2, 2, 2): ("K1",),
    (2, 2, 1): ("K1_loop", "K4_plus_e"),
    (2, 1, 1): ("K1_loop", "K4_plus_e", "K5_minus_e"),
}


def _check_certifiable(gg: GainGraph, spec: CountSpec):
    if spec.variant != "uniform" or spec.triple not in ALLOWED:
        raise CertificationError(f"no recursive characterisation for count {spec}")
    if spec.triple == (2, 2, 1) and gg.group.order != 2:
        raise CertificationError("the (2,2,1) construction is only known for groups of order 2")


def base_kind(gg: GainGraph, spec: CountSpec) -> str | None:
    """Name of the base graph ``gg`` is (up to switching), if any."""
    shapes = BASE_GRAPHS.get(spec.triple, ())
    loops = gg.loops()
    if gg.n == 1:
        if gg.m == 0 and "K1" in shapes:
            return "K1"
        if gg.m == 1 and loops and "K1_loop" in shapes:
            return "K1_loop"
        return None
    if gg.n == 2 and gg.m == 1 and not loops and "K2" in shapes:
        return "K2"
    if gg.n == 4 and gg.m == 7 and "K4_plus_e" in shapes:
        for _, inside in trivial_k4s(gg):
            extra = [i for i in range(7) if i not in inside]
            if len(extra) == 1 and not is_balanced(gg, list(range(7))):
                return "K4_plus_e"
        for six in itertools.combinations(range(7), 6):
            pairs = {frozenset(gg.edges[i][:2]) for i in six}
            if len(pairs) == 6 and all(len(p) == 2 for p in pairs) and is_balanced(gg, six):
                return "K4_plus_e"
        return None
    if gg.n == 5 and gg.m == 9 and "K5_minus_e" in shapes and not loops:
        pairs = {frozenset(e[:2]) for e in gg.edges}
        if len(pairs) == 9 and is_balanced(gg, range(9)):
            return "K5_minus_e"
    return None


def candidates(gg: GainGraph, labels: list, spec: CountSpec):
    """Admissible inverse moves in priority order (each oracle-validated)."""
    allowed = ALLOWED[spec.triple]
    gens = [_inverse_h1(gg, labels, allowed), _inverse_h2(gg, labels, allowed)]
    if "VertexToK4" in allowed:
        gens.append(_inverse_k4(gg, labels))
    if "VertexTo4Cycle" in allowed:
        gens.append(_inverse_4cycle(gg, labels))
    for gen in gens:
        for cand in gen:
            if is_gain_tight(cand.graph, spec):
                yield cand
    if "EdgeJoin" in allowed:
        for i, side in _bridges(gg):
            t, h, g = gg.edges[i]
            if t not in side:
                t, h, g = h, t, gg.group.inv(g)
            rest = set(range(gg.n)) - side
            p0, p1 = _split(gg, labels, side), _split(gg, labels, rest)
            if is_gain_tight(p0[0], spec) and is_gain_tight(p1[0], spec):
                yield Candidate("EdgeJoin", p0[0], p0[1], [("join", labels[t], labels[h], g)], parts=(p0, p1))


@dataclass
class Certificate:
    ok: bool
    script: MoveScript | None = None
    stuck: GainGraph | None = None
    stuck_labels: list | None = None
    nodes: int = 0
    lemma_failures: list = field(default_factory=list)
    trace: list = field(default_factory=list)  # intermediate graphs on the successful path

    def to_dict(self) -> dict:
        if self.ok:
            return {"certified": True, "script": self.script.to_dict()}
        return {
            "certified": False,
            "stuck_graph": None if self.stuck is None else self.stuck.to_dict(),
            "stuck_labels": self.stuck_labels,
        }


def in_trivial_k4(gg: GainGraph, v: int) -> bool:
    """Whether some K4 subgraph through v is balanced (extra induced edges allowed)."""
    others = [u for u in range(gg.n) if u != v]
    for trio in itertools.combinations(others, 3):
        quad = (v,) + trio
        per_pair = []
        for a, b in itertools.combinations(quad, 2):
            es = [i for i, (t, h, _) in enumerate(gg.edges) if {t, h} == {a, b}]
            if not es:
                break
            per_pair.append(es)
        else:
            if any(is_balanced(gg, choice) for choice in itertools.product(*per_pair)):
                return True
    return False


def degree3_lemma_holds(gg: GainGraph, spec: CountSpec, v: int) -> bool:
    """Either v lies in a switching-trivial K4 or an inverse H2a at v is admissible."""
    if in_trivial_k4(gg, v):
        return True
    labels = list(range(gg.n))
    return any(c.kind == "H2a" and is_gain_tight(c.graph, spec)
               for c in _inverse_h2(gg, labels, {"H2a"}) if c.steps[0].new == v)


class _Search:
    def __init__(self, spec: CountSpec, budget: int, check_lemma: bool):
        self.spec = spec
        self.budget = budget
        self.nodes = 0
        self.failed: set = set()
        self.stuck = None
        self.lemma_failures = []
        self.check_lemma = check_lemma

    def key(self, gg, labels):
        return (frozenset(labels), frozenset(_lkey(gg.group, labels, e) for e in gg.edges))

    def run(self, gg: GainGraph, labels: list):
        """(base kind, base graph, base labels, forward L-moves) or None."""
        self.nodes += 1
        if self.nodes > self.budget:
            return None
        kind = base_kind(gg, self.spec)
        if kind is not None:
            return kind, gg, labels, []
        key = self.key(gg, labels)
        if key in self.failed:
            return None
        if self.check_lemma and next(_inverse_h1(gg, labels, ALLOWED[self.spec.triple]), None) is None:
            self._lemma(gg)
        found_any = False
        for cand in candidates(gg, labels, self.spec):
            found_any = True
            if cand.kind == "EdgeJoin":
                (g0, l0), (g1, l1) = cand.parts
                left = self.run(g0, l0)
                if left is None:
                    continue
                right = self.run(g1, l1)
                if right is None:
                    continue
                _, a, b, gain = cand.steps[0]
                other = assemble(*right)
                return left[0], left[1], left[2], left[3] + [LJoin(other, a, b, gain)]
            sub = self.run(cand.graph, cand.labels)
            if sub is not None:
                return sub[0], sub[1], sub[2], sub[3] + cand.steps
        if not found_any and self.stuck is None:
            self.stuck = (gg, labels)
        self.failed.add(key)
        return None

    def _lemma(self, gg):
        if self.spec.triple not in ((2, 2, 2), (2, 1, 1)):
            return
        for v in range(gg.n):
            inc = gg.incident(v)
            if len(inc) == 3 and not any(gg.edges[i][0] == gg.edges[i][1] for i in inc) \
                    and len(gg.neighbours(v)) == 3:
                if not degree3_lemma_holds(gg, self.spec, v):
                    self.lemma_failures.append((gg, v))


def assemble(kind, base_graph, base_labels, lmoves) -> MoveScript:
    gg, labels = base_graph, list(base_labels)
    moves = []
    for lm in lmoves:
        move, labels = _translate(gg, labels, lm)
        gg = apply(gg, move)
        moves.append(move)
    return MoveScript(kind, base_graph, tuple(moves), tuple(labels))


def certify(gg: GainGraph, spec: CountSpec, budget: int = 20000, check_lemma: bool = False) -> Certificate:
    """Reduce ``gg`` to a base graph and return the forward construction.

    Raises CertificationError for counts without a recursive theorem and for
    graphs that are not tight.
    """
    _check_certifiable(gg, spec)
    if not is_gain_tight(gg, spec):
        raise CertificationError(f"input is not {spec}-tight")
    search = _Search(spec, budget, check_lemma)
    found = search.run(gg, list(range(gg.n)))
    if found is None:
        stuck = search.stuck or (gg, list(range(gg.n)))
        return Certificate(False, stuck=stuck[0], stuck_labels=stuck[1], nodes=search.nodes,
                           lemma_failures=search.lemma_failures)
    script = assemble(*found)
    realised = script.replay(check=spec).relabel(script.labels)
    if not realised.same_up_to_orientation(gg):
        raise CertificationError("replayed script does not reproduce the input graph")
    return Certificate(True, script=script, nodes=search.nodes, lemma_failures=search.lemma_failures)


def find_admissible_reduction(gg: GainGraph, spec: CountSpec) -> Candidate | None:
    """First admissible inverse move in priority order, or None for base graphs."""
    _check_certifiable(gg, spec)
    if base_kind(gg, spec) is not None:
        return None
    return next(candidates(gg, list(range(gg.n)), spec), None)


# -- random forward growth ----------------------------------------------------------


def random_base(kind: str, group: SymmetryGroup, rng: np.random.Generator) -> GainGraph:
    order = group.order
    nontrivial = lambda: int(rng.integers(1, order))
    if kind == "K1":
        return GainGraph(group, 1, [])
    if kind == "K2":
        return GainGraph(group, 2, [(0, 1, int(rng.integers(order)))])
    if kind == "K1_loop":
        return GainGraph(group, 1, [(0, 0, nontrivial())])
    k4 = [(a, b, 0) for a, b in itertools.combinations(range(4), 2)]
    if kind == "K4_plus_e":
        if rng.random() < 0.5:
            a, b = (int(x) for x in sorted(rng.choice(4, 2, replace=False)))
            return GainGraph(group, 4, k4 + [(a, b, nontrivial())])
        v = int(rng.integers(4))
        return GainGraph(group, 4, k4 + [(v, v, nontrivial())])
    if kind == "K5_minus_e":
        miss = tuple(int(x) for x in sorted(rng.choice(5, 2, replace=False)))
        return GainGraph(group, 5, [(a, b, 0) for a, b in itertools.combinations(range(5), 2) if (a, b) != miss])
    raise ValueError(kind)


def random_move(gg: GainGraph, kind: str, rng: np.random.Generator, spec: CountSpec,
                max_vertices: int) -> Move | None:
    G, n = gg.group, gg.n
    rnd = lambda k: int(rng.integers(k))
    if kind in ("H1a", "H1b", "H1c"):
        if kind == "H1a":
            if n < 2:
                return None
            a, b = (int(x) for x in rng.choice(n, 2, replace=False))
            return H1((a, rnd(G.order)), (b, rnd(G.order)))
        if kind == "H1b":
            if G.order < 2:
                return None
            a = rnd(n)
            g1, g2 = (int(x) for x in rng.choice(G.order, 2, replace=False))
            return H1((a, g1), (a, g2))
        if G.order < 2:
            return None
        return H1((rnd(n), rnd(G.order)), (None, int(rng.integers(1, G.order))))
    if kind.startswith("H2"):
        if gg.m == 0:
            return None
        loops = [i for i, (t, h, _) in enumerate(gg.edges) if t == h]
        plain = [i for i, (t, h, _) in enumerate(gg.edges) if t != h]
        pool = loops if kind in ("H2c", "H2d") else plain
        if not pool:
            return None
        e = int(rng.choice(pool))
        t, h, g = gg.edges[e]
        if kind in ("H2b", "H2d"):
            z = int(rng.choice([t, h]))
        else:
            others = [v for v in range(n) if v not in (t, h)]
            if not others:
                return None
            z = int(rng.choice(others))
        g1 = rnd(G.order)
        g2 = G.mul(G.inv(g), g1)
        return H2(e, z, g1, g2, rnd(G.order))
    if kind == "VertexToK4":
        if n + 3 > max_vertices:
            return None
        free = [v for v in range(n) if not any(gg.edges[i][0] == gg.edges[i][1] for i in gg.incident(v))]
        if not free:
            return None
        v = int(rng.choice(free))
        return VertexToK4(v, tuple(rnd(4) for _ in gg.incident(v)))
    if kind == "VertexTo4Cycle":
        v = rnd(n)
        plain = [i for i in gg.incident(v) if gg.edges[i][0] != gg.edges[i][1]]
        if len(plain) < 2:
            return None
        ea, eb = (int(x) for x in rng.choice(plain, 2, replace=False))
        if gg.gain_towards(ea, v)[0] == gg.gain_towards(eb, v)[0]:
            return None
        rest = [i for i in gg.incident(v) if i not in (ea, eb)]
        return VertexTo4Cycle(v, ea, eb, tuple(rnd(2) for _ in rest))
    if kind == "EdgeJoin":
        room = max_vertices - n
        if room < 1:
            return None
        other = grow_tight(spec, G, int(rng.integers(1, room + 1)), rng, max_vertices=room,
                           allow_join=False)
        if other is None:
            return None
        return EdgeJoin(other, rnd(n), rnd(other.replay().n), rnd(G.order))
    raise ValueError(kind)


def grow_tight(spec: CountSpec, group: SymmetryGroup, target: int, rng: np.random.Generator,
               max_vertices: int = 7, attempts: int = 400, allow_join: bool = True,
               final_switch: bool = True) -> MoveScript | None:
    """Random forward construction of a tight graph with about ``target`` vertices."""
    allowed = sorted(ALLOWED[spec.triple])
    if not allow_join:
        allowed = [k for k in allowed if k != "EdgeJoin"]
    bases = [b for b in BASE_GRAPHS[spec.triple]
             if {"K1": 1, "K2": 2, "K1_loop": 1, "K4_plus_e": 4, "K5_minus_e": 5}[b] <= max_vertices]
    if group.order == 1:
        bases = [b for b in bases if b not in ("K1_loop", "K4_plus_e")]
    if not bases:
        return None
    base = str(rng.choice(bases))
    gg = random_base(base, group, rng)
    start = gg
    moves = []
    tries = 0
    while gg.n < target and tries < attempts:
        tries += 1
        kind = str(rng.choice(allowed))
        move = random_move(gg, kind, rng, spec, max_vertices)
        if move is None:
            continue
        try:
            nxt = apply(gg, move)
        except MoveError:
            continue
        if nxt.n > max_vertices:
            continue
        if kind.startswith("H2") and h2_kind(gg, move) != kind:
            continue
        if not is_gain_tight(nxt, spec):
            continue
        moves.append(move)
        gg = nxt
    if final_switch and group.order > 1:
        for v in range(gg.n):
            x = int(rng.integers(group.order))
            if x:
                moves.append(Switch(v, x))
                gg = apply(gg, moves[-1])
    if gg.n < min(target, max_vertices) and tries >= attempts:
        return None
    return MoveScript(base, start, tuple(moves), tuple(range(gg.n)))
