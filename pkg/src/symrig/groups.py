"""Finite point groups that preserve the sphere, cylinder and cone.

Every group is realised concretely by orthogonal 3x3 matrices.  Elements are
plain integers (canonical indices) so that gain graphs can be stored in JSON;
index 0 is always the identity.

Canonical enumeration:

* cyclic kinds (``Cs_*``, ``Ci``, ``C2_perp``, ``Cm``, ``S2m``) list generator
  powers ``g**0, g**1, ...``;
* ``Cmh`` lists ``C_m**a * s**b`` at index ``a + m*b`` (``s`` the horizontal
  mirror);
* ``Cmv`` and ``Dm`` list ``C_m**a * f**b`` at index ``a + m*b`` (``f`` the
  vertical mirror, respectively the horizontal half-turn).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

KINDS = (
    "Cs_containing",
    "Cs_horizontal",
    "Cm",
    "C2_perp",
    "Ci",
    "Cmh",
    "S2m",
    "Cmv",
    "Dm",
)
PARAMETRIC = {"Cm", "Cmh", "S2m", "Cmv", "Dm"}
ANGLED = {"Cs_containing", "C2_perp", "Cmv", "Dm"}
SURFACES = ("sphere", "cylinder", "cone")


class GroupSpecError(ValueError):
    """Raised for a malformed or invalid group description."""


class UnsupportedPair(ValueError):
    """Raised when a (surface, group) combination is outside the tables."""


def rot_z(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def vertical_mirror(phi: float) -> np.ndarray:
    """Reflection in the vertical plane through the z-axis at azimuth ``phi``."""
    c, s = np.cos(2 * phi), np.sin(2 * phi)
    return np.array([[c, s, 0.0], [s, -c, 0.0], [0.0, 0.0, 1.0]])


def horizontal_half_turn(phi: float) -> np.ndarray:
    """Rotation by pi about the horizontal axis at azimuth ``phi``."""
    c, s = np.cos(2 * phi), np.sin(2 * phi)
    return np.array([[c, s, 0.0], [s, -c, 0.0], [0.0, 0.0, -1.0]])


HORIZONTAL_MIRROR = np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    m: int = 1
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GroupSpecError(f"unknown group kind {self.kind!r}")
        if self.kind in PARAMETRIC:
            if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
                raise GroupSpecError(f"m must be an integer, got {self.m!r}")
            if self.m < 1:
                raise GroupSpecError(f"m must be >= 1 for {self.kind}, got {self.m}")
        else:
            object.__setattr__(self, "m", 1)
        if self.kind not in ANGLED:
            object.__setattr__(self, "angle", 0.0)
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def order(self) -> int:
        if self.kind == "Cm":
            return self.m
        if self.kind in ("Cmh", "S2m", "Cmv", "Dm"):
            return 2 * self.m
        return 2

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in PARAMETRIC:
            out["m"] = int(self.m)
        if self.kind in ANGLED:
            out["angle"] = self.angle
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise GroupSpecError("group must be an object with a 'kind' field")
        extra = set(data) - {"kind", "m", "angle"}
        if extra:
            raise GroupSpecError(f"unexpected group fields {sorted(extra)}")
        m = data.get("m", 1)
        angle = data.get("angle", 0.0)
        if not isinstance(angle, (int, float)) or isinstance(angle, bool):
            raise GroupSpecError(f"angle must be a number, got {angle!r}")
        return cls(data["kind"], m, angle)

    def __str__(self) -> str:
        if self.kind in PARAMETRIC:
            return f"{self.kind}(m={self.m})"
        return self.kind


def _generate_reps(spec: GroupSpec) -> list[np.ndarray]:
    kind, m, phi = spec.kind, spec.m, spec.angle
    if kind == "Cs_containing":
        gen = vertical_mirror(phi)
    elif kind == "Cs_horizontal":
        gen = HORIZONTAL_MIRROR.copy()
    elif kind == "Ci":
        gen = -np.eye(3)
    elif kind == "C2_perp":
        gen = horizontal_half_turn(phi)
    elif kind == "Cm":
        gen = rot_z(2 * np.pi / m)
    elif kind == "S2m":
        gen = rot_z(np.pi / m) @ HORIZONTAL_MIRROR
    else:
        rots = [rot_z(2 * np.pi * a / m) for a in range(m)]
        if kind == "Cmh":
            flip = HORIZONTAL_MIRROR
        elif kind == "Cmv":
            flip = vertical_mirror(phi)
        else:
            flip = horizontal_half_turn(phi)
        return rots + [r @ flip for r in rots]
    reps = [np.eye(3)]
    for _ in range(spec.order - 1):
        reps.append(reps[-1] @ gen)
    return reps


@dataclass(frozen=True, eq=False)
class SymmetryGroup:
    """A concrete finite group with multiplication table and representation."""

    spec: GroupSpec
    reps: tuple = field(repr=False)
    table: tuple = field(repr=False)
    inverses: tuple = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.reps)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, x: int, g: int) -> int:
        """x g x^-1."""
        return self.table[self.table[x][g]][self.inverses[x]]

    def rep(self, a: int) -> np.ndarray:
        return self.reps[a]

    def element(self, index: int) -> "GroupElement":
        return GroupElement(self, index)

    @property
    def identity(self) -> "GroupElement":
        return GroupElement(self, 0)

    def elements(self) -> list["GroupElement"]:
        return [GroupElement(self, i) for i in range(self.order)]

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def closure(self, gens) -> frozenset[int]:
        """Subgroup generated by ``gens`` (element indices)."""
        found = {0}
        frontier = [0]
        gens = [g for g in set(gens) if g != 0]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.table[x][g]
                if y not in found:
                    found.add(y)
                    frontier.append(y)
        return frozenset(found)

    @cached_property
    def subgroups(self) -> tuple[frozenset[int], ...]:
        """All subgroups, smallest first."""
        subs = {self.closure([g]) for g in range(self.order)}
        changed = True
        while changed:
            changed = False
            current = list(subs)
            for i, h1 in enumerate(current):
                for h2 in current[i + 1:]:
                    joined = self.closure(h1 | h2)
                    if joined not in subs:
                        subs.add(joined)
                        changed = True
        return tuple(sorted(subs, key=lambda h: (len(h), sorted(h))))

    def determinant(self, a: int) -> int:
        return int(round(np.linalg.det(self.reps[a])))

    def is_rational(self) -> bool:
        return all(np.allclose(r, np.round(r), atol=1e-12) for r in self.reps)

    def __eq__(self, other):
        return isinstance(other, SymmetryGroup) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"SymmetryGroup({self.spec})"


@dataclass(frozen=True)
class GroupElement:
    group: SymmetryGroup
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.group.order:
            raise ValueError(f"index {self.index} outside group of order {self.group.order}")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return mul(self, other)

    def inv(self) -> "GroupElement":
        return inv(self)

    @property
    def matrix(self) -> np.ndarray:
        return self.group.reps[self.index]

    def __int__(self):
        return self.index


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.group != h.group:
        raise ValueError(f"cannot multiply elements of {g.group.spec} and {h.group.spec}")
    return GroupElement(g.group, g.group.mul(g.index, h.index))


def inv(g: GroupElement) -> GroupElement:
    return GroupElement(g.group, g.group.inv(g.index))


def _lookup(reps: list[np.ndarray], mat: np.ndarray) -> int:
    for i, r in enumerate(reps):
        if np.max(np.abs(r - mat)) < 1e-9:
            return i
    raise AssertionError("representation is not closed under multiplication")


_CACHE: dict[GroupSpec, SymmetryGroup] = {}


def make_group(spec: GroupSpec | str, m: int = 1, angle: float = 0.0) -> SymmetryGroup:
    """Build (and cache) the canonical realisation of ``spec``.

    ``make_group("Cm", 3)`` is shorthand for ``make_group(GroupSpec("Cm", 3))``.
    """
    if isinstance(spec, str):
        spec = GroupSpec(spec, m, angle)
    cached = _CACHE.get(spec)
    if cached is not None:
        return cached
    reps = _generate_reps(spec)
    n = len(reps)
    table = tuple(tuple(_lookup(reps, reps[a] @ reps[b]) for b in range(n)) for a in range(n))
    inverses = tuple(row.index(0) for row in table)
    for r in reps:
        r.setflags(write=False)
    group = SymmetryGroup(spec, tuple(reps), table, inverses)
    _CACHE[spec] = group
    return group


TRIVIAL = GroupSpec("Cm", 1)


# Symmetric type k_S: dimension of trivial surface motions fixed by the group.
# Rows of the summary tables; parametric rows may depend on the parity of m.
def symmetric_type(surface: str, spec: GroupSpec) -> int:
    """Table value of k_S for ``(surface, spec)``.

    Degenerate parameters are reduced first: ``Cm(1)`` is the trivial group,
    ``Cmh(1)`` is ``Cs_horizontal``, ``S2m(1)`` is ``Ci``, ``Cmv(1)`` is
    ``Cs_containing`` and ``Dm(1)`` is ``C2_perp``.
    """
    if surface not in SURFACES:
        raise UnsupportedPair(f"unknown surface {surface!r}")
    kind, m = spec.kind, spec.m
    if m == 1 and kind in PARAMETRIC:
        if kind == "Cm":
            return {"sphere": 3, "cylinder": 2, "cone": 1}[surface]
        kind = {"Cmh": "Cs_horizontal", "S2m": "Ci", "Cmv": "Cs_containing", "Dm": "C2_perp"}[kind]
    table = _KS_TABLE[surface]
    if kind not in table:
        raise UnsupportedPair(f"({surface}, {spec}) is not covered by the symmetric-type table")
    return table[kind]


_KS_TABLE = {
    "sphere": {
        "Cs_containing": 1, "Cs_horizontal": 1, "Cm": 1, "Ci": 3, "C2_perp": 1,
        "Cmh": 1, "S2m": 1, "Cmv": 0, "Dm": 0,
    },
    "cylinder": {
        "Cm": 2, "Cs_containing": 1, "Cs_horizontal": 1, "Ci": 1, "C2_perp": 0,
        "Cmh": 1, "S2m": 1, "Cmv": 1, "Dm": 0,
    },
    "cone": {
        "Cm": 1, "Cs_horizontal": 1, "Ci": 1, "Cmh": 1, "S2m": 1,
        "Cs_containing": 0, "C2_perp": 0, "Cmv": 0, "Dm": 0,
    },
}


def table_rows() -> list[tuple[str, str]]:
    """Every (surface, group kind) with a tabulated symmetric type."""
    return [(surface, kind) for surface, table in _KS_TABLE.items() for kind in table]


def killing_fields(surface: str):
    """Tangential infinitesimal isometries of ``surface`` as callables p -> velocity."""
    ez = np.array([0.0, 0.0, 1.0])
    if surface == "sphere":
        return [lambda p, w=w: np.cross(w, p) for w in np.eye(3)]
    if surface == "cylinder":
        return [lambda p: np.cross(ez, p), lambda p: ez.copy()]
    if surface == "cone":
        return [lambda p: np.cross(ez, p)]
    raise UnsupportedPair(f"unknown surface {surface!r}")


def _killing_sample_points(surface: str) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    theta = rng.uniform(0, 2 * np.pi, 8)
    if surface == "sphere":
        pts = rng.normal(size=(8, 3))
        return pts / np.linalg.norm(pts, axis=1, keepdims=True)
    z = rng.uniform(0.5, 2.0, 8) * rng.choice([-1, 1], 8)
    r = np.ones(8) if surface == "cylinder" else np.abs(z)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta), z])


def symmetric_type_numeric(surface: str, group: SymmetryGroup, elements=None) -> int:
    """k_S computed from the group action on the surface's Killing fields.

    Each field X is pushed forward by g (``p -> R X(R^-1 p)``), re-expressed in
    the field basis by least squares at sample points, and the action matrices
    are averaged over the group (or over ``elements`` if a subgroup is given).
    The rank of the averaged projector is the dimension of invariant fields.
    """
    fields = killing_fields(surface)
    pts = _killing_sample_points(surface)
    basis = np.column_stack([np.concatenate([f(p) for p in pts]) for f in fields])
    idx = range(group.order) if elements is None else sorted(elements)
    avg = np.zeros((len(fields), len(fields)))
    for g in idx:
        R = group.reps[g]
        Rinv = R.T
        pushed = np.column_stack(
            [np.concatenate([R @ f(Rinv @ p) for p in pts]) for f in fields]
        )
        coeffs, *_ = np.linalg.lstsq(basis, pushed, rcond=None)
        if np.max(np.abs(basis @ coeffs - pushed)) > 1e-9:
            raise UnsupportedPair(f"{group.spec} does not preserve the {surface}")
        avg += coeffs
    avg /= len(idx)
    sv = np.linalg.svd(avg, compute_uv=False)
    return int(np.sum(sv > 1e-8))
