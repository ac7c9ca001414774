"""Exact gain-sparsity oracles.

A count assigns to every subgroup H of the gain group a bound b(H); an edge
set F is admissible when it satisfies ``|F| <= k*|V(F)| - b(<F>)``, where
``<F>`` is the subgroup generated by closed-walk gains of F.  The uniform
(k, l, m) count uses ``b(trivial) = l`` and ``b(H) = m`` otherwise; the
subgroup counts read b off the symmetric type of H.

Two exhaustive deciders are provided:

``cosets`` (default)
    For each subgroup H, edge sets F with ``<F>`` inside a conjugate of H are
    exactly the subsets of ``F_c = {e=(a,b): c(a)*g(e) = c(b)}`` for an
    assignment ``c`` of right cosets of H to vertices.  The search grows
    connected pairs (W, c) from a root vertex along consistent edges, so only
    assignments that some connected F could realise are visited.  The whole
    group H = S is handled by plain vertex-subset enumeration.
``potentials``
    The literal enumeration for uniform counts: every vertex subset W and
    every group-valued potential on W, normalised at the minimum vertex of
    each component of the induced graph.

Both are exponential and guarded by a scale limit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gaingraph import GainGraph, connected_components
from .groups import GroupSpec, SymmetryGroup, UnsupportedPair, make_group, symmetric_type, symmetric_type_numeric

MAX_VERTICES = 12
MAX_EVALUATIONS = 10**8

VARIANTS = ("uniform", "subgroup_general", "sphere_i", "cylinder_r")


class ScaleLimitError(RuntimeError):
    """The exhaustive oracle would exceed its configured budget."""


class NotTightError(ValueError):
    pass


@dataclass(frozen=True)
class CountSpec:
    variant: str = "uniform"
    k: int = 2
    ell: int = 3
    m: int = 3
    surface: str | None = None
    group: GroupSpec | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown count variant {self.variant!r}")
        if self.variant == "uniform":
            if min(self.k, self.ell, self.m) < 0 or not (self.m <= self.ell < 2 * self.k):
                raise ValueError(f"need 0 <= m <= l < 2k, got ({self.k},{self.ell},{self.m})")
        else:
            if self.surface is None or self.group is None:
                raise ValueError(f"{self.variant} needs a surface and a group")

    @classmethod
    def uniform(cls, k: int, ell: int, m: int) -> "CountSpec":
        return cls("uniform", k, ell, m)

    @classmethod
    def parse(cls, text: str) -> "CountSpec":
        try:
            k, ell, m = (int(x) for x in text.split(","))
        except ValueError:
            raise ValueError(f"count must look like 'k,l,m', got {text!r}") from None
        return cls.uniform(k, ell, m)

    @classmethod
    def subgroup(cls, variant: str, surface: str, group: GroupSpec) -> "CountSpec":
        if variant == "sphere_i" and surface != "sphere":
            raise ValueError("sphere_i is a sphere count")
        if variant == "cylinder_r" and surface != "cylinder":
            raise ValueError("cylinder_r is a cylinder count")
        ks = symmetric_type_numeric(surface, make_group(group))
        return cls(variant, 2, {"sphere": 3, "cylinder": 2, "cone": 1}[surface], ks, surface, group)

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.k, self.ell, self.m)

    def bound(self, group: SymmetryGroup, H: frozenset[int]) -> int:
        """Constant subtracted from k*|V(F)| for edge sets with <F> = H."""
        if self.variant == "uniform":
            return self.ell if len(H) <= 1 else self.m
        if group.spec != self.group:
            raise ValueError(f"count is for {self.group}, graph is over {group.spec}")
        return _subgroup_bound(self.variant, self.surface, group.spec, H)

    def to_dict(self) -> dict:
        out = {"variant": self.variant, "k": self.k, "l": self.ell, "m": self.m}
        if self.variant != "uniform":
            out["surface"] = self.surface
            out["group"] = self.group.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CountSpec":
        variant = data.get("variant", "uniform")
        if variant == "uniform":
            return cls.uniform(int(data["k"]), int(data["l"]), int(data["m"]))
        return cls.subgroup(variant, data["surface"], GroupSpec.from_dict(data["group"]))

    def __str__(self) -> str:
        base = f"({self.k},{self.ell},{self.m})"
        if self.variant == "uniform":
            return base
        suffix = {"sphere_i": "^i", "cylinder_r": "^r", "subgroup_general": "^sub"}[self.variant]
        return f"{base}{suffix}"


@lru_cache(maxsize=None)
def _subgroup_bound(variant: str, surface: str, spec: GroupSpec, H: frozenset[int]) -> int:
    group = make_group(spec)
    if not H:
        H = frozenset({0})
    if variant == "sphere_i":
        # only the identity and the inversion
        central = all(np.allclose(group.reps[g], np.eye(3) * np.sign(group.reps[g][0, 0])) for g in H)
        return 3 if central else 1
    if variant == "cylinder_r":
        ez = np.array([0.0, 0.0, 1.0])
        rot = all(group.determinant(g) == 1 and np.allclose(group.reps[g] @ ez, ez) for g in H)
        return 2 if rot else 1
    return symmetric_type_numeric(surface, group, H)


@dataclass
class Violation:
    edge_set: list[int]
    vertex_support_size: int
    bound_used: int
    clause: str
    subgroup: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "edge_set": self.edge_set,
            "vertex_support_size": self.vertex_support_size,
            "bound_used": self.bound_used,
            "clause": self.clause,
            "subgroup": self.subgroup,
        }


# -- enumeration kernels -------------------------------------------------------


def _check_scale(gg: GainGraph, max_vertices: int):
    if gg.n > max_vertices:
        raise ScaleLimitError(f"{gg.n} vertices exceeds the oracle limit of {max_vertices}")


def _general_clause(gg: GainGraph, k: int, bound: int, budget: int):
    n = gg.n
    if 2**n > budget:
        raise ScaleLimitError("vertex-subset enumeration exceeds the evaluation budget")
    masks = [(1 << t) | (1 << h) for t, h, _ in gg.edges]
    for W in range(1, 1 << n):
        inside = [i for i, em in enumerate(masks) if em & W == em]
        if not inside:
            continue
        supp = 0
        for i in inside:
            supp |= masks[i]
        size = bin(supp).count("1")
        if len(inside) > k * size - bound:
            return Violation(inside, size, k * size - bound, "general")
    return None


def _right_cosets(group: SymmetryGroup, H: frozenset[int]):
    """Coset id of every element and the right action table act[c][g]."""
    coset_of = [-1] * group.order
    reps = []
    for x in range(group.order):
        if coset_of[x] < 0:
            cid = len(reps)
            reps.append(x)
            for h in H:
                coset_of[group.mul(h, x)] = cid
    act = [[coset_of[group.mul(r, g)] for g in range(group.order)] for r in reps]
    return coset_of, act


def _coset_clause(gg: GainGraph, H: frozenset[int], k: int, bound: int, budget: list[int], label: str):
    """Search connected (W, coset assignment) pairs for a violated bound."""
    G, n = gg.group, gg.n
    _, act = _right_cosets(G, H)
    inv = G.inverses
    # adjacency as (neighbour, edge index, gain read from v towards neighbour)
    adj = [[] for _ in range(n)]
    loops = [[] for _ in range(n)]
    for i, (t, h, g) in enumerate(gg.edges):
        if t == h:
            loops[t].append((i, g))
        else:
            adj[t].append((h, i, g))
            adj[h].append((t, i, inv[g]))

    def consistent_new(c, u, cu):
        """Consistent edges between u and the current W (plus loops at u)."""
        out = [i for i, g in loops[u] if act[cu][g] == cu]
        for w, i, g in adj[u]:
            # edge read u -> w with gain g: consistent iff c(u)*g = c(w)
            if c[w] >= 0 and act[cu][g] == c[w]:
                out.append(i)
        return out

    for r in range(n):
        start = [-1] * n
        start[r] = 0  # the coset H itself
        first = consistent_new(start, r, 0)
        stack = [(tuple(start), first)]
        seen = {tuple(start)}
        while stack:
            c, F = stack.pop()
            budget[0] -= 1
            if budget[0] < 0:
                raise ScaleLimitError("coset enumeration exceeds the evaluation budget")
            size = sum(1 for x in c if x >= 0)
            if F and len(F) > k * size - bound:
                return Violation(sorted(F), size, k * size - bound, label, sorted(H))
            for w in range(r + 1, n):
                if c[w] >= 0:
                    continue
                options = set()
                for x, _, g in adj[w]:
                    if c[x] >= 0:
                        # edge x -> w with gain inv(g)... read from w: c(w)*g = c(x)
                        options.add(act[c[x]][inv[g]])
                for cw in options:
                    nc = list(c)
                    nc[w] = cw
                    key = tuple(nc)
                    if key in seen:
                        continue
                    seen.add(key)
                    stack.append((key, F + consistent_new(c, w, cw)))
    return None


def _potential_clause(gg: GainGraph, k: int, bound: int, budget: int):
    """Literal balanced clause: all vertex subsets, all normalised potentials."""
    G, n = gg.group, gg.n
    evals = 0
    for size in range(2, n + 1):
        for W in itertools.combinations(range(n), size):
            Wset = set(W)
            idx = [i for i, (t, h, _) in enumerate(gg.edges) if t in Wset and h in Wset and t != h]
            comps = connected_components(n, [gg.edges[i] for i in idx])
            roots = {min(c & Wset) for c in comps if c & Wset}
            free = [v for v in W if v not in roots]
            for values in itertools.product(range(G.order), repeat=len(free)):
                evals += 1
                if evals > budget:
                    raise ScaleLimitError("potential enumeration exceeds the evaluation budget")
                phi = dict.fromkeys(roots, 0)
                phi.update(zip(free, values))
                F = [i for i in idx if G.mul(G.inv(phi[gg.edges[i][0]]), phi[gg.edges[i][1]]) == gg.edges[i][2]]
                if not F:
                    continue
                supp = len(gg.support(F))
                if len(F) > k * supp - bound:
                    return Violation(F, supp, k * supp - bound, "balanced", [0])
    return None


def _subgroups_to_check(spec: CountSpec, group: SymmetryGroup):
    """Proper subgroups whose bound is not implied by a larger subgroup's."""
    bounds = {H: spec.bound(group, H) for H in group.subgroups}
    full = frozenset(range(group.order))
    out = []
    for H, b in bounds.items():
        if H == full:
            continue
        if any(H < K and bounds[K] == b for K in bounds):
            continue
        out.append((H, b))
    return out, bounds[full]


def sparsity_violation(
    gg: GainGraph,
    spec: CountSpec,
    method: str = "cosets",
    max_vertices: int = MAX_VERTICES,
    budget: int = MAX_EVALUATIONS,
) -> Violation | None:
    """A violated edge set, or None if ``gg`` is sparse for ``spec``."""
    _check_scale(gg, max_vertices)
    k = spec.k
    if method == "potentials":
        if spec.variant != "uniform":
            raise ValueError("the potential enumeration only covers uniform counts")
        v = _general_clause(gg, k, spec.m, budget)
        if v is None and spec.ell > spec.m:
            v = _potential_clause(gg, k, spec.ell, budget)
        return v
    if method != "cosets":
        raise ValueError(f"unknown method {method!r}")
    G = gg.group
    if spec.variant == "uniform":
        checks = [(frozenset({0}), spec.ell)] if spec.ell > spec.m or G.order == 1 else []
        full_bound = spec.m
    else:
        checks, full_bound = _subgroups_to_check(spec, G)
    v = _general_clause(gg, k, full_bound, budget)
    if v is not None:
        return v
    left = [budget]
    for H, b in checks:
        label = "balanced" if len(H) == 1 else "subgroup"
        v = _coset_clause(gg, H, k, b, left, label)
        if v is not None:
            return v
    return None


def is_gain_sparse(gg: GainGraph, spec: CountSpec, **kw) -> tuple[bool, Violation | None]:
    v = sparsity_violation(gg, spec, **kw)
    return v is None, v


def target_edges(gg: GainGraph, spec: CountSpec) -> int:
    if spec.variant == "uniform":
        return spec.k * gg.n - spec.m
    return spec.k * gg.n - spec.bound(gg.group, frozenset(range(gg.group.order)))


def is_gain_tight(gg: GainGraph, spec: CountSpec, **kw) -> bool:
    if gg.n == 0:
        raise ValueError("tightness of the empty graph is undefined")
    if gg.m != target_edges(gg, spec):
        return False
    return sparsity_violation(gg, spec, **kw) is None


def is_cover_sparse(n: int, edges, k: int, ell: int, max_vertices: int = 24) -> bool:
    """(k, l)-sparsity of a simple graph by induced-subgraph enumeration."""
    if n > max_vertices:
        raise ScaleLimitError(f"{n} vertices exceeds the cover oracle limit of {max_vertices}")
    masks = [(1 << a) | (1 << b) for a, b in edges]
    for W in range(1, 1 << n):
        size = bin(W).count("1")
        if size < 2:
            continue
        count = sum(1 for em in masks if em & W == em)
        if count > k * size - ell:
            return False
    return True


def is_cover_tight(n: int, edges, k: int, ell: int) -> bool:
    return len(edges) == k * n - ell and is_cover_sparse(n, edges, k, ell)


# -- count dispatch from the summary tables -----------------------------------

_SURFACE_TYPE = {"sphere": 3, "cylinder": 2, "cone": 1}


def count_for(surface: str, spec: GroupSpec) -> CountSpec:
    """The necessary count for symmetric isostatic frameworks of ``(surface, spec)``."""
    if surface not in _SURFACE_TYPE:
        raise UnsupportedPair(f"unknown surface {surface!r}")
    kind, m = spec.kind, spec.m
    if kind in ("Cmh", "S2m", "Cmv", "Dm") and m == 1:
        kind = {"Cmh": "Cs_horizontal", "S2m": "Ci", "Cmv": "Cs_containing", "Dm": "C2_perp"}[kind]
        spec = GroupSpec(kind, 1, spec.angle)
    if kind == "Cm" and m == 1:
        ell = _SURFACE_TYPE[surface]
        return CountSpec.uniform(2, ell, ell)
    ks = symmetric_type(surface, spec)
    ell = _SURFACE_TYPE[surface]
    if surface == "sphere":
        if kind == "Ci":
            return CountSpec.uniform(2, 3, 3)
        if (kind == "Cmh" and m % 2 == 0) or (kind == "S2m" and m % 2 == 1):
            return CountSpec.subgroup("sphere_i", surface, spec)
        if kind in ("Cmv", "Dm"):
            return CountSpec.subgroup("subgroup_general", surface, spec)
        return CountSpec.uniform(2, 3, ks)
    if surface == "cylinder":
        if kind in ("Cmh", "Cmv", "S2m"):
            return CountSpec.subgroup("cylinder_r", surface, spec)
        if kind == "Dm":
            return CountSpec.subgroup("subgroup_general", surface, spec)
        return CountSpec.uniform(2, 2, ks)
    if kind in ("Cmv", "Dm"):
        return CountSpec.subgroup("subgroup_general", surface, spec)
    return CountSpec.uniform(2, 1, ks)


# Pairs whose count is a proven characterisation (the rest are experiments).
def is_proven_pair(surface: str, spec: GroupSpec) -> bool:
    kind, m = spec.kind, spec.m
    if surface == "sphere":
        return kind in ("Ci", "Cm", "Cs_containing", "Cs_horizontal", "C2_perp") or (
            kind == "Cmh" and m % 2 == 1) or (kind == "S2m" and m % 2 == 0)
    if surface == "cylinder":
        return kind in ("Cm", "Cs_containing", "Cs_horizontal", "Ci")
    if surface == "cone":
        return kind in ("Cm", "Cs_horizontal", "Ci", "Cmh", "S2m")
    return False


def maxwell_necessary(gg: GainGraph, surface: str, group: SymmetryGroup | GroupSpec) -> bool:
    spec = group.spec if isinstance(group, SymmetryGroup) else group
    if gg.group.spec != spec:
        raise ValueError("graph and group disagree")
    return is_gain_tight(gg, count_for(surface, spec))
