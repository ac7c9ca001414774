"""Frameworks on surfaces: rigidity matrices, orbit matrices and numeric rank."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaingraph import GainGraph, GainGraphError, cover
from .groups import SymmetryGroup, UnsupportedPair, symmetric_type

SURFACE_TYPE = {"sphere": 3, "cylinder": 2, "cone": 1}
ON_SURFACE_TOL = 1e-10
DEFAULT_TOL = 1e-10
ILL_CONDITIONED_GAP = 1e3


class DegenerateConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class Surface:
    kind: str

    def __post_init__(self):
        if self.kind not in SURFACE_TYPE:
            raise UnsupportedPair(f"unknown surface {self.kind!r}")

    @property
    def k(self) -> int:
        return SURFACE_TYPE[self.kind]

    def equation(self, p) -> float:
        x, y, z = p
        if self.kind == "sphere":
            return x * x + y * y + z * z - 1
        if self.kind == "cylinder":
            return x * x + y * y - 1
        return x * x + y * y - z * z

    def contains(self, p, tol: float = ON_SURFACE_TOL) -> bool:
        return abs(self.equation(p)) <= tol * max(1.0, float(np.dot(p, p)))

    def normal(self, p) -> np.ndarray:
        return normal(self.kind, p)


def as_surface(surface) -> Surface:
    return surface if isinstance(surface, Surface) else Surface(surface)


def normal(surface, p) -> np.ndarray:
    kind = surface.kind if isinstance(surface, Surface) else surface
    x, y, z = (float(c) for c in p)
    if kind == "sphere":
        return np.array([x, y, z])
    if kind == "cylinder":
        return np.array([x, y, 0.0])
    if kind == "cone":
        if max(abs(x), abs(y), abs(z)) < 1e-12:
            raise DegenerateConfiguration("the cone apex has no normal")
        return np.array([x, y, -z])
    raise UnsupportedPair(f"unknown surface {kind!r}")


@dataclass(frozen=True, eq=False)
class SymmetricFramework:
    gg: GainGraph
    surface: Surface
    p0: np.ndarray

    @property
    def group(self) -> SymmetryGroup:
        return self.gg.group

    def __post_init__(self):
        p = np.asarray(self.p0, dtype=float).reshape(self.gg.n, 3)
        object.__setattr__(self, "surface", as_surface(self.surface))
        object.__setattr__(self, "p0", p)

    def problems(self, margin: float = 1e-6) -> list[str]:
        """Violated framework invariants (empty when valid)."""
        out = []
        reps = self.group.reps
        for i, p in enumerate(self.p0):
            if not self.surface.contains(p):
                out.append(f"joint {i} is off the {self.surface.kind}")
            if self.surface.kind == "cone" and np.linalg.norm(p) < margin:
                out.append(f"joint {i} is at the cone apex")
            for g in range(1, self.group.order):
                if np.linalg.norm(reps[g] @ p - p) <= margin:
                    out.append(f"joint {i} is fixed by element {g}")
        for i in range(self.gg.n):
            for j in range(i + 1, self.gg.n):
                for g in range(self.group.order):
                    if np.linalg.norm(self.p0[i] - reps[g] @ self.p0[j]) <= margin:
                        out.append(f"joints {i} and {j} lift to coincident points")
        for idx, (t, h, g) in enumerate(self.gg.edges):
            if np.linalg.norm(self.p0[t] - reps[g] @ self.p0[h]) <= margin:
                out.append(f"edge {idx} has coincident lifted ends")
        return out

    def validate(self, margin: float = 1e-6) -> "SymmetricFramework":
        bad = self.problems(margin)
        if bad:
            raise DegenerateConfiguration("; ".join(bad))
        return self


def _random_point(kind: str, rng: np.random.Generator) -> np.ndarray:
    if kind == "sphere":
        v = rng.normal(size=3)
        return v / np.linalg.norm(v)
    theta = rng.uniform(0, 2 * np.pi)
    if kind == "cylinder":
        return np.array([np.cos(theta), np.sin(theta), rng.uniform(-2, 2)])
    z = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    return np.array([abs(z) * np.cos(theta), abs(z) * np.sin(theta), z])


def sample_config(surface, group: SymmetryGroup, gg: GainGraph, seed=None,
                  margin: float = 1e-6, max_rejections: int = 100) -> SymmetricFramework:
    """Random symmetric placement of the quotient joints satisfying the invariants."""
    surface = as_surface(surface)
    if gg.group != group:
        raise ValueError("graph and group disagree")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_rejections):
        pts = np.array([_random_point(surface.kind, rng) for _ in range(gg.n)]).reshape(gg.n, 3)
        fw = SymmetricFramework(gg, surface, pts)
        if not fw.problems(margin):
            return fw
    raise DegenerateConfiguration(f"{max_rejections} consecutive samples violated the invariants")


def orbit_matrix(fw: SymmetricFramework) -> np.ndarray:
    n, reps = fw.gg.n, fw.group.reps
    M = np.zeros((fw.gg.m, 3 * n))
    for r, (i, j, g) in enumerate(fw.gg.edges):
        R = reps[g]
        pi, pj = fw.p0[i], fw.p0[j]
        if i == j:
            if g == 0:
                raise GainGraphError("identity-gain loop")
            M[r, 3 * i:3 * i + 3] = 2 * pi - R @ pi - R.T @ pi
        else:
            M[r, 3 * i:3 * i + 3] = pi - R @ pj
            M[r, 3 * j:3 * j + 3] = pj - R.T @ pi
    return M


def normal_block(surface: Surface, points: np.ndarray) -> np.ndarray:
    n = len(points)
    N = np.zeros((n, 3 * n))
    for i, p in enumerate(points):
        N[i, 3 * i:3 * i + 3] = normal(surface, p)
    return N


def orbit_surface_matrix(fw: SymmetricFramework) -> np.ndarray:
    return np.vstack([orbit_matrix(fw), normal_block(fw.surface, fw.p0)])


def surface_rigidity_matrix(surface, points, edges) -> np.ndarray:
    """Rigidity matrix of a (non-symmetric) framework on ``surface``."""
    surface = as_surface(surface)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(points)
    M = np.zeros((len(edges), 3 * n))
    for r, (i, j) in enumerate(edges):
        d = points[i] - points[j]
        M[r, 3 * i:3 * i + 3] = d
        M[r, 3 * j:3 * j + 3] = -d
    return np.vstack([M, normal_block(surface, points)])


def cover_framework(fw: SymmetricFramework):
    """(points, edges, cover graph) of the lifted framework; joint (g, v) sits at g.p_v."""
    cg = cover(fw.gg)
    n0 = fw.gg.n
    pts = np.array([fw.group.reps[g] @ fw.p0[v] for g in range(fw.group.order) for v in range(n0)])
    return pts.reshape(-1, 3), list(cg.edges), cg


@dataclass
class RankReport:
    rows: int
    cols: int
    rank: int
    nullity: int
    smallest_kept: float | None
    largest_dropped: float | None
    tolerance: float
    trials: int = 1
    singular_values: list = field(default_factory=list, repr=False)

    @property
    def gap_ratio(self) -> float:
        """sigma_rank / sigma_(rank+1), the denominator floored at machine precision."""
        if not self.smallest_kept:
            return 0.0
        if self.largest_dropped is None:
            return math.inf
        floor = np.finfo(float).eps * (self.singular_values[0] if self.singular_values else 1.0)
        return float(self.smallest_kept / max(self.largest_dropped, floor))

    @property
    def ill_conditioned(self) -> bool:
        return bool(self.gap_ratio < ILL_CONDITIONED_GAP)

    def to_dict(self) -> dict:
        gap = self.gap_ratio
        return {
            "rows": self.rows,
            "cols": self.cols,
            "rank": self.rank,
            "nullity": self.nullity,
            "smallest_kept": self.smallest_kept,
            "largest_dropped": self.largest_dropped,
            "gap_ratio": None if math.isinf(gap) else gap,
            "ill_conditioned": self.ill_conditioned,
            "tolerance": self.tolerance,
            "trials": self.trials,
        }


def numeric_rank(M: np.ndarray, tol_rel: float = DEFAULT_TOL) -> RankReport:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    if M.size == 0:
        return RankReport(rows, cols, 0, cols, None, None, 0.0)
    sv = np.linalg.svd(M, compute_uv=False)
    # Column deficiency contributes structural zero singular values.
    sv = np.concatenate([sv, np.zeros(max(0, cols - sv.size))])
    smax = float(sv[0]) if sv.size else 0.0
    thresh = tol_rel * smax * max(rows, cols)
    rank = int(np.sum(sv > thresh)) if smax > 0 else 0
    kept, dropped = sv[:rank], sv[rank:]
    return RankReport(
        rows, cols, rank, cols - rank,
        float(kept[-1]) if rank else None,
        float(dropped[0]) if dropped.size else None,
        float(thresh), 1, [float(s) for s in sv],
    )


def framework_rank(fw: SymmetricFramework, tol_rel: float = DEFAULT_TOL) -> RankReport:
    return numeric_rank(orbit_surface_matrix(fw), tol_rel)


def generic_rank(gg: GainGraph, surface, seed=None, trials: int = 5,
                 tol_rel: float = DEFAULT_TOL) -> RankReport:
    """Best rank of the orbit-surface matrix over ``trials`` random placements."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    best = None
    for _ in range(trials):
        fw = sample_config(surface, gg.group, gg, rng)
        rep = framework_rank(fw, tol_rel)
        if best is None or rep.rank > best.rank or (
                rep.rank == best.rank and rep.gap_ratio > best.gap_ratio):
            best = rep
    best.trials = trials
    return best


def is_isostatic_numeric(gg: GainGraph, surface, group: SymmetryGroup | None = None, seed=None,
                         trials: int = 5, tol_rel: float = DEFAULT_TOL,
                         resamples: int = 0) -> tuple[bool, RankReport]:
    """Count check plus full-row-rank check; at most ``resamples`` fresh rounds on failure."""
    surface = as_surface(surface)
    group = group or gg.group
    ks = symmetric_type(surface.kind, group.spec)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts_ok = gg.m == 2 * gg.n - ks
    rep = None
    for _ in range(resamples + 1):
        rep = generic_rank(gg, surface, rng, trials, tol_rel)
        full = rep.rank == gg.m + gg.n and rep.nullity == ks
        if not counts_ok:
            break
        if full:
            return True, rep
    return False, rep


def motion_basis(fw: SymmetricFramework, tol_rel: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of symmetric infinitesimal motions."""
    M = orbit_surface_matrix(fw)
    rep = numeric_rank(M, tol_rel)
    _, _, vt = np.linalg.svd(M)
    return vt[rep.rank:]


def stress_basis(fw: SymmetricFramework, tol_rel: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of symmetric self-stresses (edge part, then normal part)."""
    M = orbit_surface_matrix(fw)
    rep = numeric_rank(M, tol_rel)
    u, _, _ = np.linalg.svd(M)
    return u[:, rep.rank:].T


def lift_motion(fw: SymmetricFramework, u) -> tuple[np.ndarray, float]:
    """Cover velocities g.u_v and the relative residual of the cover constraints."""
    u = np.asarray(u, dtype=float).reshape(fw.gg.n, 3)
    pts, edges, _ = cover_framework(fw)
    reps = fw.group.reps
    lifted = np.concatenate([reps[g] @ u[v] for g in range(fw.group.order) for v in range(fw.gg.n)])
    R = surface_rigidity_matrix(fw.surface, pts, edges)
    norm = np.linalg.norm(lifted)
    res = float(np.max(np.abs(R @ lifted))) if R.size else 0.0
    return lifted, 0.0 if norm == 0 else res / norm


def lift_stress(fw: SymmetricFramework, stress) -> tuple[np.ndarray, float]:
    """Cover stress and the relative residual of the cover equilibrium equations.

    An involutive loop lifts to half as many cover edges as the group order,
    each carrying twice the quotient coefficient.
    """
    stress = np.asarray(stress, dtype=float)
    m0, n0 = fw.gg.m, fw.gg.n
    omega, lam = stress[:m0], stress[m0:]
    pts, edges, cg = cover_framework(fw)
    G = fw.group
    weights = []
    for idx in cg.edge_origin:
        t, h, g = fw.gg.edges[idx]
        factor = 2.0 if t == h and G.mul(g, g) == 0 else 1.0
        weights.append(factor * omega[idx])
    lifted = np.concatenate([weights, [lam[v] for g in range(G.order) for v in range(n0)]])
    R = surface_rigidity_matrix(fw.surface, pts, edges)
    norm = np.linalg.norm(lifted)
    res = float(np.max(np.abs(lifted @ R))) if R.size else 0.0
    return lifted, 0.0 if norm == 0 else res / norm


def switch_framework(fw: SymmetricFramework, v: int, x: int) -> SymmetricFramework:
    """Switch the gain graph at v by x and move p_v to x.p_v (rank is unchanged)."""
    from .gaingraph import switch

    pts = fw.p0.copy()
    pts[v] = fw.group.reps[x] @ pts[v]
    return SymmetricFramework(switch(fw.gg, v, x), fw.surface, pts)


# -- exact rational mode ----------------------------------------------------------


def rational_point(kind: str, rng: np.random.Generator):
    """A point with rational coordinates on the surface (sympy Rationals)."""
    from sympy import Rational

    def q():
        return Rational(int(rng.integers(-9, 10)), int(rng.integers(1, 8)))

    if kind == "sphere":
        u, v = q(), q()
        d = u * u + v * v + 1
        return [2 * u / d, 2 * v / d, (u * u + v * v - 1) / d]
    t = q()
    c, s = (1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)
    if kind == "cylinder":
        return [c, s, Rational(int(rng.integers(-12, 13)), 6)]
    r = Rational(int(rng.integers(3, 13)), 6) * (1 if rng.random() < 0.5 else -1)
    return [abs(r) * c, abs(r) * s, r]


def exact_rank(gg: GainGraph, surface, seed=None, trials: int = 3) -> int:
    """Rank of the orbit-surface matrix at rational placements, computed exactly.

    Only available for groups whose matrices are integral (axis-aligned
    mirrors, Ci, C2, C4, S4, C2h and the like).
    """
    from sympy import Matrix, Rational, zeros

    surface = as_surface(surface)
    G = gg.group
    if not G.is_rational():
        raise UnsupportedPair(f"{G.spec} has irrational matrices; exact mode unavailable")
    reps = [Matrix(np.round(r).astype(int).tolist()) for r in G.reps]
    rng = np.random.default_rng(seed)
    best = 0
    for _ in range(trials):
        for _attempt in range(100):
            pts = [Matrix(rational_point(surface.kind, rng)) for _ in range(gg.n)]
            fw = SymmetricFramework(gg, surface, np.array([[float(c) for c in p] for p in pts]))
            if not fw.problems(1e-6):
                break
        else:
            raise DegenerateConfiguration("no admissible rational placement found")
        n = gg.n
        M = zeros(gg.m + n, 3 * n)
        for r, (i, j, g) in enumerate(gg.edges):
            R = reps[g]
            if i == j:
                row = 2 * pts[i] - R * pts[i] - R.T * pts[i]
                for c in range(3):
                    M[r, 3 * i + c] = row[c]
            else:
                ri, rj = pts[i] - R * pts[j], pts[j] - R.T * pts[i]
                for c in range(3):
                    M[r, 3 * i + c] = ri[c]
                    M[r, 3 * j + c] = rj[c]
        for i, p in enumerate(pts):
            x, y, z = p
            nv = {"sphere": (x, y, z), "cylinder": (x, y, Rational(0)), "cone": (x, y, -z)}[surface.kind]
            for c in range(3):
                M[gg.m + i, 3 * i + c] = nv[c]
        best = max(best, M.rank())
    return best


def killing_motion(fw: SymmetricFramework, which: int) -> np.ndarray:
    from .groups import killing_fields

    f = killing_fields(fw.surface.kind)[which]
    return np.concatenate([f(p) for p in fw.p0])


def export_csv(matrix, path) -> None:
    """Write a matrix as comma-separated values at full double precision."""
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def random_surface_points(surface, n: int, seed=None) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return np.array([_random_point(as_surface(surface).kind, rng) for _ in range(n)]).reshape(n, 3)


def generic_surface_rank(surface, n: int, edges, seed=None, trials: int = 5,
                         tol_rel: float = DEFAULT_TOL) -> RankReport:
    """Generic rank of a plain (non-symmetric) framework on ``surface``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    best = None
    for _ in range(trials):
        rep = numeric_rank(surface_rigidity_matrix(surface, random_surface_points(surface, n, rng), edges), tol_rel)
        if best is None or rep.rank > best.rank:
            best = rep
    best.trials = trials
    return best
