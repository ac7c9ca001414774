"""Gain graphs over finite point groups, switching, balance and covering graphs.

A gain graph is a directed multigraph on vertices ``0..n-1`` whose edges carry
group elements (stored as canonical indices).  Edges are kept in a fixed order
and referenced by position, so edge sets survive switching unchanged.

Lifting convention: edge ``(i, j, g)`` lifts to the cover edges
``{(x, i), (x*g, j)}`` for every group element ``x``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .groups import SymmetryGroup, GroupElement


class GainGraphError(ValueError):
    """A gain graph that would not have a simple covering graph, or bad input."""


Edge = tuple[int, int, int]


def _as_index(group: SymmetryGroup, g) -> int:
    if isinstance(g, GroupElement):
        if g.group != group:
            raise GainGraphError(f"gain from {g.group.spec} used in a {group.spec} graph")
        return g.index
    g = int(g)
    if not 0 <= g < group.order:
        raise GainGraphError(f"gain {g} is not an element of {group.spec} (order {group.order})")
    return g


def edge_key(group: SymmetryGroup, tail: int, head: int, gain: int):
    """Orientation-free identity of an edge orbit in the cover."""
    if tail == head:
        return (tail, tail, min(gain, group.inv(gain)))
    if tail > head:
        return (head, tail, group.inv(gain))
    return (tail, head, gain)


@dataclass(frozen=True, eq=False)
class GainGraph:
    group: SymmetryGroup
    n: int
    edges: tuple[Edge, ...]

    def __init__(self, group: SymmetryGroup, n: int, edges: Iterable[Sequence] = ()):
        if int(n) < 0:
            raise GainGraphError("vertex count must be nonnegative")
        n = int(n)
        clean = []
        seen = {}
        for pos, e in enumerate(edges):
            if len(e) != 3:
                raise GainGraphError(f"edge {pos}: expected (tail, head, gain)")
            t, h = int(e[0]), int(e[1])
            g = _as_index(group, e[2])
            if not (0 <= t < n and 0 <= h < n):
                raise GainGraphError(f"edge {pos}: endpoint out of range 0..{n - 1}")
            if t == h and g == 0:
                raise GainGraphError(f"edge {pos}: loop at {t} has identity gain")
            key = edge_key(group, t, h, g)
            if key in seen:
                raise GainGraphError(
                    f"edge {pos}: duplicates edge {seen[key]} (same lifted edge orbit)"
                )
            seen[key] = pos
            clean.append((t, h, g))
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(clean))

    # -- basic queries -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def __len__(self):
        return len(self.edges)

    def __eq__(self, other):
        return (
            isinstance(other, GainGraph)
            and self.group == other.group
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.group, self.n, self.edges))

    def __repr__(self):
        return f"GainGraph({self.group.spec}, n={self.n}, edges={list(self.edges)})"

    def incident(self, v: int) -> list[int]:
        return [i for i, (t, h, _) in enumerate(self.edges) if t == v or h == v]

    def degree(self, v: int) -> int:
        """Number of incident edges; a loop counts once."""
        return len(self.incident(v))

    def neighbours(self, v: int) -> set[int]:
        out = set()
        for t, h, _ in self.edges:
            if t == v and h != v:
                out.add(h)
            elif h == v and t != v:
                out.add(t)
        return out

    def loops(self) -> list[int]:
        return [i for i, (t, h, _) in enumerate(self.edges) if t == h]

    def edge_keys(self) -> frozenset:
        return frozenset(edge_key(self.group, *e) for e in self.edges)

    def gain_towards(self, idx: int, v: int) -> tuple[int, int]:
        """(other endpoint, gain) of non-loop edge ``idx`` oriented into ``v``."""
        t, h, g = self.edges[idx]
        if h == v:
            return t, g
        if t == v:
            return h, self.group.inv(g)
        raise GainGraphError(f"edge {idx} is not incident with {v}")

    def support(self, F: Iterable[int]) -> set[int]:
        out = set()
        for i in F:
            t, h, _ = self.edges[i]
            out.add(t)
            out.add(h)
        return out

    def same_up_to_orientation(self, other: "GainGraph") -> bool:
        """Equal as labelled gain graphs, ignoring edge order and orientation."""
        return (
            self.group == other.group
            and self.n == other.n
            and self.m == other.m
            and self.edge_keys() == other.edge_keys()
        )

    def with_edges(self, edges) -> "GainGraph":
        return GainGraph(self.group, self.n, edges)

    def relabel(self, perm: Sequence[int]) -> "GainGraph":
        """Rename vertex ``v`` to ``perm[v]``."""
        return GainGraph(self.group, self.n, [(perm[t], perm[h], g) for t, h, g in self.edges])

    def induced(self, vertices: Iterable[int]) -> list[int]:
        vs = set(vertices)
        return [i for i, (t, h, _) in enumerate(self.edges) if t in vs and h in vs]

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "group": self.group.spec.to_dict(),
            "vertices": self.n,
            "edges": [{"tail": t, "head": h, "gain": g} for t, h, g in self.edges],
        }

    @classmethod
    def from_dict(cls, data) -> "GainGraph":
        """Parse the JSON form; errors name the offending field."""
        from .groups import GroupSpec, GroupSpecError, make_group

        if not isinstance(data, dict):
            raise GainGraphError("gain graph must be a JSON object")
        for name in ("group", "vertices", "edges"):
            if name not in data:
                raise GainGraphError(f"missing field '{name}'")
        try:
            group = make_group(GroupSpec.from_dict(data["group"]))
        except GroupSpecError as exc:
            raise GainGraphError(f"field 'group': {exc}") from exc
        n = data["vertices"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise GainGraphError("field 'vertices' must be an integer")
        if not isinstance(data["edges"], list):
            raise GainGraphError("field 'edges' must be a list")
        edges = []
        for pos, e in enumerate(data["edges"]):
            if not isinstance(e, dict):
                raise GainGraphError(f"edges[{pos}] must be an object")
            for name in ("tail", "head", "gain"):
                val = e.get(name)
                if not isinstance(val, int) or isinstance(val, bool):
                    raise GainGraphError(f"edges[{pos}].{name} must be an integer")
            if not 0 <= e["gain"] < group.order:
                raise GainGraphError(f"edges[{pos}].gain {e['gain']} is not an element of {group.spec}")
            edges.append((e["tail"], e["head"], e["gain"]))
        try:
            return cls(group, n, edges)
        except GainGraphError as exc:
            msg = str(exc)
            if msg.startswith("edge "):
                pos, _, rest = msg[5:].partition(":")
                msg = f"edges[{pos}]:{rest}"
            raise GainGraphError(msg) from None


def switch(gg: GainGraph, v: int, x) -> GainGraph:
    """Switch vertex ``v`` by ``x``: loops conjugated, out-edges x*g, in-edges g*x^-1."""
    if not 0 <= v < gg.n:
        raise GainGraphError(f"vertex {v} out of range")
    G = gg.group
    x = _as_index(G, x)
    xi = G.inv(x)
    new = []
    for t, h, g in gg.edges:
        if t == v and h == v:
            g = G.conj(x, g)
        elif t == v:
            g = G.mul(x, g)
        elif h == v:
            g = G.mul(g, xi)
        new.append((t, h, g))
    return GainGraph(G, gg.n, new)


def switch_many(gg: GainGraph, potentials: dict[int, int]) -> GainGraph:
    for v, x in potentials.items():
        if x:
            gg = switch(gg, v, x)
    return gg


def walk_gain(gg: GainGraph, start: int, steps: Sequence[tuple[int, bool]]) -> int:
    """Gain of a walk given as ``(edge index, forward?)`` steps from ``start``."""
    G = gg.group
    cur, acc = start, 0
    for idx, forward in steps:
        t, h, g = gg.edges[idx]
        if forward:
            if t != cur:
                raise GainGraphError(f"edge {idx} does not leave vertex {cur}")
            acc, cur = G.mul(acc, g), h
        else:
            if h != cur:
                raise GainGraphError(f"edge {idx} does not enter vertex {cur}")
            acc, cur = G.mul(acc, G.inv(g)), t
    return acc


def potentials(gg: GainGraph, F: Iterable[int]):
    """Spanning-forest potentials of ``F``.

    Returns ``(phi, root, tree)``: ``phi[u]`` is the gain of the tree path from
    the component root to ``u``, ``root[u]`` the root of u's component and
    ``tree`` the set of tree edges.  Roots are minimum vertices.
    """
    G = gg.group
    F = sorted(set(F))
    adj: dict[int, list[int]] = {}
    for i in F:
        t, h, _ = gg.edges[i]
        adj.setdefault(t, []).append(i)
        if h != t:
            adj.setdefault(h, []).append(i)
    phi: dict[int, int] = {}
    root: dict[int, int] = {}
    tree = set()
    for r in sorted(adj):
        if r in phi:
            continue
        phi[r] = 0
        root[r] = r
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for i in adj[u]:
                t, h, g = gg.edges[i]
                if t == h:
                    continue
                if t == u and h not in phi:
                    phi[h] = G.mul(phi[u], g)
                elif h == u and t not in phi:
                    phi[t] = G.mul(phi[u], G.inv(g))
                else:
                    continue
                w = h if t == u else t
                root[w] = r
                tree.add(i)
                queue.append(w)
    return phi, root, tree


def is_balanced(gg: GainGraph, F: Iterable[int]) -> bool:
    F = list(F)
    if not F:
        raise GainGraphError("balance of an empty edge set is undefined")
    G = gg.group
    phi, _, tree = potentials(gg, F)
    for i in F:
        t, h, g = gg.edges[i]
        if t == h:
            return False
        if i not in tree and G.mul(G.inv(phi[t]), phi[h]) != g:
            return False
    return True


def local_group(gg: GainGraph, F: Iterable[int], v: int) -> frozenset[int]:
    """Subgroup of closed-walk gains at ``v`` using edges of ``F``.

    Returns the empty set if ``v`` is not incident with ``F``.
    """
    F = list(F)
    G = gg.group
    phi, root, tree = potentials(gg, F)
    if v not in phi:
        return frozenset()
    # Potentials are rooted at the component minimum; re-base them at v.
    base = G.inv(phi[v])
    r = root[v]
    gens = []
    for i in F:
        t, h, g = gg.edges[i]
        if root[t] != r or i in tree:
            continue
        cyc = G.mul(G.mul(phi[t], g), G.inv(phi[h]))
        gens.append(G.mul(G.mul(base, cyc), phi[v]))
    return G.closure(gens)


def switch_to_identity(gg: GainGraph, F: Iterable[int]) -> tuple[GainGraph, dict[int, int]]:
    """Switch so that the spanning-forest edges of ``F`` get identity gains.

    Returns the switched graph and the switching elements used.  When ``F`` is
    balanced every edge of ``F`` ends up with identity gain.
    """
    phi, _, _ = potentials(gg, F)
    return switch_many(gg, phi), phi


def connected_components(n: int, edges) -> list[set[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t, h, *_ in edges:
        ra, rb = find(t), find(h)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, set[int]] = {}
    for v in range(n):
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


# -- covering graphs ----------------------------------------------------------


@dataclass(frozen=True)
class CoverGraph:
    """Simple graph on ``order * n`` vertices; vertex ``(g, v)`` has index ``g*n + v``."""

    quotient: GainGraph
    n: int
    edges: tuple[tuple[int, int], ...]
    edge_origin: tuple[int, ...]

    def label(self, idx: int) -> tuple[int, int]:
        return divmod(idx, self.quotient.n)

    def index(self, g: int, v: int) -> int:
        return g * self.quotient.n + v

    def action(self, x: int) -> list[int]:
        """Vertex permutation of group element ``x``: (g, v) -> (x*g, v)."""
        G, n0 = self.quotient.group, self.quotient.n
        return [G.mul(x, g) * n0 + v for g in range(G.order) for v in range(n0)]

    def covering_map(self) -> list[int]:
        return [i % self.quotient.n for i in range(self.n)]


def cover(gg: GainGraph) -> CoverGraph:
    G, n0 = gg.group, gg.n
    seen = set()
    edges, origin = [], []
    for idx, (t, h, g) in enumerate(gg.edges):
        for x in range(G.order):
            a, b = x * n0 + t, G.mul(x, g) * n0 + h
            key = (min(a, b), max(a, b))
            if a == b:
                raise GainGraphError("cover would contain a loop")
            if key in seen:
                # Only an involutive loop revisits its own orbit.
                if not (t == h and G.mul(g, g) == 0):
                    raise GainGraphError("cover would contain parallel edges")
                continue
            seen.add(key)
            edges.append(key)
            origin.append(idx)
    return CoverGraph(gg, G.order * n0, tuple(edges), tuple(origin))


def quotient(
    n: int,
    edges: Iterable[tuple[int, int]],
    group: SymmetryGroup,
    action: Sequence[Sequence[int]],
) -> GainGraph:
    """Quotient gain graph of a simple graph under a free action.

    ``action[g]`` is the vertex permutation of group element ``g``.  The
    representative of each vertex orbit is its minimum vertex; quotient
    vertices are numbered by increasing representative.
    """
    edges = [tuple(e) for e in edges]
    if len(action) != group.order:
        raise GainGraphError("action must list one permutation per group element")
    perms = [list(p) for p in action]
    for g, p in enumerate(perms):
        if sorted(p) != list(range(n)):
            raise GainGraphError(f"action of element {g} is not a permutation")
    for a in range(group.order):
        for b in range(group.order):
            ab = group.mul(a, b)
            if any(perms[ab][v] != perms[a][perms[b][v]] for v in range(n)):
                raise GainGraphError("action is not a homomorphism")
    for g in range(1, group.order):
        if any(perms[g][v] == v for v in range(n)):
            raise GainGraphError(f"action is not free: element {g} fixes a vertex")
    edge_set = {frozenset(e) for e in edges}
    if any(len(e) != 2 for e in edge_set) or len(edge_set) != len(edges):
        raise GainGraphError("input graph is not simple")
    for p in perms:
        if any(frozenset((p[a], p[b])) not in edge_set for a, b in edges):
            raise GainGraphError("action does not preserve the edge set")

    # orbit representative and the element carrying it there
    rep_of = [None] * n
    elt_of = [None] * n
    reps = []
    for v in range(n):
        if rep_of[v] is not None:
            continue
        reps.append(v)
        for g in range(group.order):
            w = perms[g][v]
            rep_of[w] = v
            elt_of[w] = g
    qindex = {r: i for i, r in enumerate(reps)}
    done = set()
    qedges = []
    for a, b in sorted((min(e), max(e)) for e in edges):
        if frozenset((a, b)) in done:
            continue
        for g in range(group.order):
            done.add(frozenset((perms[g][a], perms[g][b])))
        ga, gb = elt_of[a], elt_of[b]
        gain = group.mul(group.inv(ga), gb)
        qedges.append((qindex[rep_of[a]], qindex[rep_of[b]], gain))
    return GainGraph(group, len(reps), qedges)


def random_gain_graph(group: SymmetryGroup, n: int, m: int, rng: np.random.Generator,
                      loops: bool = True, attempts: int = 200) -> GainGraph | None:
    """Random gain graph with ``m`` edges satisfying the cover-simplicity rules."""
    G = group
    chosen: list[Edge] = []
    keys = set()
    tries = 0
    while len(chosen) < m and tries < attempts:
        tries += 1
        t, h = int(rng.integers(n)), int(rng.integers(n))
        if t == h and (not loops or G.order == 1):
            continue
        g = int(rng.integers(G.order))
        if t == h and g == 0:
            continue
        key = edge_key(G, t, h, g)
        if key in keys:
            continue
        keys.add(key)
        chosen.append((t, h, g))
    if len(chosen) < m:
        return None
    return GainGraph(G, n, chosen)
