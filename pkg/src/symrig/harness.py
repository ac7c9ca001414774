"""Cross-validation of the combinatorial and numeric sides on random instances.

Every instance gets its own generator, derived from the master seed and the
instance index, so the verdicts are reproducible and independent of the
number of worker processes.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gaingraph import GainGraph, cover, edge_key, random_gain_graph
from .groups import GroupSpec, UnsupportedPair, make_group, symmetric_type, symmetric_type_numeric
from .moves import H1, CertificationError, EdgeJoin, Switch, apply, certify, grow_tight, h2_kind, move_kind
from .rigidity import (
    SymmetricFramework,
    framework_rank,
    generic_rank,
    generic_surface_rank,
    is_isostatic_numeric,
    orbit_surface_matrix,
)
from .sparsity import CountSpec, ScaleLimitError, count_for, is_cover_tight, is_gain_tight, is_proven_pair


def dumps(obj) -> str:
    """Canonical JSON text used for every file this package writes."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


@dataclass(frozen=True)
class Experiment:
    surface: str
    group: GroupSpec
    n_instances: int = 100
    max_vertices: int = 7
    seed: int = 0
    trials: int = 5
    resamples: int = 3
    tol: float = 1e-10
    count: CountSpec | None = None
    check_moves: bool = False

    @property
    def resolved_count(self) -> CountSpec:
        return self.count or count_for(self.surface, self.group)

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "group": self.group.to_dict(),
            "count": self.resolved_count.to_dict(),
            "n_instances": self.n_instances,
            "max_vertices": self.max_vertices,
            "seed": self.seed,
            "trials": self.trials,
            "resamples": self.resamples,
            "tol": self.tol,
            "check_moves": self.check_moves,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Experiment":
        return cls(
            data["surface"], GroupSpec.from_dict(data["group"]), data["n_instances"],
            data["max_vertices"], data["seed"], data["trials"], data["resamples"], data["tol"],
            CountSpec.from_dict(data["count"]), data.get("check_moves", False),
        )


@dataclass
class Verdict:
    name: str
    gating: bool
    passed: bool
    instances: int
    agreements: int
    experiment: dict | None = None
    disagreements: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def agreement(self) -> float:
        return 1.0 if self.instances == 0 else self.agreements / self.instances

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "gating": self.gating,
            "passed": self.passed,
            "instances": self.instances,
            "agreements": self.agreements,
            "agreement": self.agreement,
            "experiment": self.experiment,
            "disagreements": self.disagreements,
            "details": self.details,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


# -- instance generation ------------------------------------------------------------


def tight_instance(exp: Experiment, rng: np.random.Generator):
    """A forward-grown tight graph and its construction script."""
    group = make_group(exp.group)
    spec = exp.resolved_count
    for _ in range(50):
        target = int(rng.integers(2, exp.max_vertices + 1))
        script = grow_tight(spec, group, target, rng, exp.max_vertices)
        if script is not None:
            return script.replay(), script
    raise RuntimeError(f"could not grow a {spec}-tight graph over {exp.group}")


def random_new_edge(gg: GainGraph, rng: np.random.Generator, loops: bool = True, attempts: int = 200):
    G = gg.group
    keys = gg.edge_keys()
    for _ in range(attempts):
        t, h, g = int(rng.integers(gg.n)), int(rng.integers(gg.n)), int(rng.integers(G.order))
        if t == h and (g == 0 or not loops):
            continue
        if edge_key(G, t, h, g) not in keys:
            return (t, h, g)
    return None


PERTURBATIONS = ("remove", "add", "relocate")


def perturb(gg: GainGraph, kind: str, rng: np.random.Generator, spec: CountSpec):
    """A non-tight neighbour of ``gg``; returns (graph, kind actually used)."""
    edges = list(gg.edges)
    if kind == "add" or (kind == "remove" and not edges):
        new = random_new_edge(gg, rng)
        if new is not None:
            return gg.with_edges(edges + [new]), "add"
        kind = "remove"
    if kind == "relocate" and edges:
        for _ in range(100):
            drop = int(rng.integers(len(edges)))
            rest = edges[:drop] + edges[drop + 1:]
            new = random_new_edge(gg.with_edges(rest), rng)
            if new is None or new == edges[drop]:
                continue
            cand = gg.with_edges(rest + [new])
            if not is_gain_tight(cand, spec):
                return cand, "relocate"
    drop = int(rng.integers(len(edges)))
    return gg.with_edges(edges[:drop] + edges[drop + 1:]), "remove"


# -- evaluation ----------------------------------------------------------------------


def _rank_with_resamples(gg, surface, rng, trials, resamples, tol, want=None) -> int:
    best = -1
    for _ in range(resamples + 1):
        best = max(best, generic_rank(gg, surface, rng, trials, tol).rank)
        if want is None or best >= want:
            break
    return best


def move_rank_checks(script, surface: str, seed: int, trials: int = 2, resamples: int = 3,
                     tol: float = 1e-10) -> list[dict]:
    """Rank behaviour of every step of a construction script.

    H1 steps must raise generic rank by exactly 3; every other step must map
    an isostatic graph to an isostatic graph.  Switch steps are skipped.
    """
    rng = np.random.default_rng(seed)

    def iso(g):
        return is_isostatic_numeric(g, surface, seed=rng, trials=trials, tol_rel=tol, resamples=resamples)[0]

    out = [{"step": None, "kind": "base", "ok": bool(iso(script.base_graph))}]
    gg = script.base_graph
    for step, move in enumerate(script.moves):
        nxt = apply(gg, move)
        if isinstance(move, Switch):
            gg = nxt
            continue
        kind = h2_kind(gg, move) if move_kind(move) == "H2" else move_kind(move)
        if isinstance(move, H1):
            before = _rank_with_resamples(gg, surface, rng, trials, resamples, tol, want=gg.m + gg.n)
            after = _rank_with_resamples(nxt, surface, rng, trials, resamples, tol, want=nxt.m + nxt.n)
            rec = {"step": step, "kind": kind, "rank_before": before, "rank_after": after,
                   "ok": after - before == 3}
        else:
            before, after = bool(iso(gg)), bool(iso(nxt))
            rec = {"step": step, "kind": kind, "iso_before": before, "iso_after": after,
                   "ok": after or not before}
            if isinstance(move, EdgeJoin):
                rec["iso_other"] = bool(iso(move.other.replay()))
                rec["ok"] = rec["ok"] and (after or not rec["iso_other"])
        out.append(rec)
        gg = nxt
    return out


def evaluate(gg: GainGraph, exp: Experiment, numeric_seed: int) -> dict:
    """Both verdicts for one instance; the record replays from its own fields."""
    spec = exp.resolved_count
    tight = is_gain_tight(gg, spec)
    certified = None
    checks = None
    if tight:
        try:
            cert = certify(gg, spec)
            certified = cert.ok
        except CertificationError as exc:
            certified = f"error: {exc}"
            cert = None
        if exp.check_moves and cert is not None and cert.ok:
            checks = move_rank_checks(cert.script, exp.surface, numeric_seed + 1, 2,
                                      exp.resamples, exp.tol)
    iso, rep = is_isostatic_numeric(gg, exp.surface, seed=numeric_seed, trials=exp.trials,
                                    tol_rel=exp.tol, resamples=exp.resamples)
    combinatorial = bool(tight and certified is True)
    rec = {
        "graph": gg.to_dict(),
        "numeric_seed": numeric_seed,
        "tight": bool(tight),
        "certified": certified,
        "combinatorial": combinatorial,
        "numeric": bool(iso),
        "rank": rep.rank,
        "nullity": rep.nullity,
        "expected_rank": gg.m + gg.n,
        "agree": combinatorial == bool(iso),
    }
    if checks is not None:
        rec["move_checks"] = checks
    return rec


def replay(record: dict, exp: Experiment) -> dict:
    """Re-run a serialized instance; returns the freshly computed record."""
    out = evaluate(GainGraph.from_dict(record["graph"]), exp, record["numeric_seed"])
    for key in ("index", "role", "perturbation", "expected"):
        if key in record:
            out[key] = record[key]
    out["agree"] = out["agree"] and out["combinatorial"] == record.get("expected", out["combinatorial"])
    return out


def _run_instance(args) -> dict:
    exp_dict, index = args
    exp = Experiment.from_dict(exp_dict)
    rng = instance_rng(exp.seed, index)
    gg, _ = tight_instance(exp, rng)
    role = "tight" if index % 2 == 0 else "perturbed"
    pert = None
    if role == "perturbed":
        gg, pert = perturb(gg, PERTURBATIONS[(index // 2) % 3], rng, exp.resolved_count)
    try:
        rec = evaluate(gg, exp, int(rng.integers(2**62)))
    except ScaleLimitError as exc:
        return {"index": index, "role": role, "perturbation": pert, "skipped": str(exc),
                "graph": gg.to_dict()}
    rec.update({"index": index, "role": role, "perturbation": pert, "expected": role == "tight"})
    rec["agree"] = rec["agree"] and rec["combinatorial"] == rec["expected"]
    return rec


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=8))


def cross_validate(exp: Experiment, workers: int = 1, keep_records: bool = False) -> Verdict:
    """``n_instances`` tight plus ``n_instances`` perturbed instances, judged by both sides."""
    if not is_proven_pair(exp.surface, exp.group):
        raise UnsupportedPair(f"no proven count for {exp.group} on the {exp.surface}; "
                              "use the conjecture experiment")
    gating = True
    exp_dict = exp.to_dict()
    records = _map(_run_instance, [(exp_dict, i) for i in range(2 * exp.n_instances)], workers)
    skipped = [r for r in records if "skipped" in r]
    records = [r for r in records if "skipped" not in r]
    agreements = sum(r["agree"] for r in records)
    move_failures, move_counts = [], {}
    for r in records:
        for c in r.get("move_checks", []):
            move_counts[c["kind"]] = move_counts.get(c["kind"], 0) + 1
            if not c["ok"]:
                move_failures.append({"index": r["index"], **c})
    details = {
        "tight_certified": sum(r["role"] == "tight" and r["certified"] is True for r in records),
        "tight_isostatic": sum(r["role"] == "tight" and r["numeric"] for r in records),
        "perturbed_rejected": sum(r["role"] == "perturbed" and not r["tight"] for r in records),
        "perturbed_flexible": sum(r["role"] == "perturbed" and not r["numeric"] for r in records),
        "perturbations": {k: sum(r["perturbation"] == k for r in records) for k in PERTURBATIONS},
        "skipped": len(skipped),
    }
    if exp.check_moves:
        details["move_checks"] = dict(sorted(move_counts.items()))
        details["move_failures"] = move_failures
    if keep_records:
        details["records"] = records
    passed = agreements == len(records) and not move_failures
    return Verdict(
        f"cross-validate {exp.surface} {exp.group} {exp.resolved_count}",
        gating, passed, len(records), agreements, exp_dict,
        [r for r in records if not r["agree"]], details,
    )


# -- cover equivalence -----------------------------------------------------------------


def _loopless_instance(group, rng, max_vertices: int, mode: int):
    spec = CountSpec.uniform(2, 2, 1)
    if mode == 0:
        for _ in range(50):
            script = grow_tight(spec, group, int(rng.integers(3, max_vertices + 1)), rng, max_vertices)
            if script is not None:
                gg = script.replay()
                if not gg.loops():
                    return gg, "grown"
        mode = 1
    for _ in range(200):
        n = int(rng.integers(3, max_vertices + 1))
        m = 2 * n - 1 if mode == 1 else int(rng.integers(n - 1, 2 * n + 2))
        if m > n * (n - 1) * group.order // 2:
            continue
        edges = []
        keys = set()
        while len(edges) < m:
            t, h = (int(x) for x in rng.choice(n, 2, replace=False))
            g = int(rng.integers(group.order))
            key = edge_key(group, t, h, g)
            if key not in keys:
                keys.add(key)
                edges.append((t, h, g))
        return GainGraph(group, n, edges), ("count" if mode == 1 else "random")
    raise RuntimeError("no loopless instance generated")


def cover_equivalence_test(n_instances: int = 200, seed: int = 0, max_vertices: int = 6,
                           group: GroupSpec = GroupSpec("Ci")) -> Verdict:
    """(2,2,1)-gain-tightness of loopless order-2 gain graphs versus (2,2)-tightness of the cover."""
    G = make_group(group)
    if G.order != 2:
        raise ValueError("cover equivalence is stated for groups of order 2")
    spec = CountSpec.uniform(2, 2, 1)
    agree, bad, tally = 0, [], {}
    for i in range(n_instances):
        rng = instance_rng(seed, i)
        gg, origin = _loopless_instance(G, rng, max_vertices, i % 3)
        q = is_gain_tight(gg, spec)
        cg = cover(gg)
        c = is_cover_tight(cg.n, cg.edges, 2, 2)
        key = f"{origin}_{'tight' if q else 'not_tight'}"
        tally[key] = tally.get(key, 0) + 1
        if q == c:
            agree += 1
        else:
            bad.append({"index": i, "graph": gg.to_dict(), "quotient_tight": q, "cover_tight": c})
    return Verdict("cover-equivalence Z2 (2,2,1) vs (2,2)", True, not bad, n_instances, agree,
                   {"n_instances": n_instances, "seed": seed, "max_vertices": max_vertices,
                    "group": group.to_dict()}, bad, dict(sorted(tally.items())))


# -- pinned examples ---------------------------------------------------------------------

S2 = 1 / math.sqrt(2)
R2 = math.sqrt(2)
CYLINDER_POINTS = [[S2, S2, 4.0], [1.0, 0.0, 2.0], [-1.0, 0.0, -1.0], [S2, S2, -1.0]]
CONE_POINTS = [[1.0, 0.0, 1.0], [3.0, 0.0, -3.0], [1.0, 1.0, R2], [-2.0, 2.0, 2 * R2], [R2, -R2, -2.0]]
K4 = [(a, b, 0) for a, b in itertools.combinations(range(4), 2)]
K5_MINUS_E = [(a, b, 0) for a, b in itertools.combinations(range(5), 2) if (a, b) != (3, 4)]
CONE_GROUPS = [GroupSpec(k, m) for m in (2, 3) for k in ("Cm", "Cmh", "S2m")] + [
    GroupSpec("Cs_horizontal"), GroupSpec("Ci")]


def pinned_examples() -> list[dict]:
    """Pinned frameworks with explicit coordinates and their expected ranks."""
    out = []
    for spec in (GroupSpec("Cs_containing", angle=math.pi / 2), GroupSpec("Ci")):
        for tag, extra in (("edge", (0, 1, 1)), ("loop", (0, 0, 1))):
            out.append({
                "name": f"cylinder K4+e ({tag}) {spec}",
                "surface": "cylinder",
                "graph": GainGraph(make_group(spec), 4, K4 + [extra]),
                "points": CYLINDER_POINTS,
                "expect": {"rank": 11, "nullity": 1},
            })
    for spec in CONE_GROUPS:
        G = make_group(spec)
        for tag, extra in (("edge", (0, 2, 1)), ("loop", (0, 0, 1))):
            out.append({
                "name": f"cone K4+f ({tag}) {spec}",
                "surface": "cone",
                "graph": GainGraph(G, 4, K4 + [extra]),
                "points": CONE_POINTS[:4],
                "expect": {"rank": 11, "nullity": 1},
            })
        out.append({
            "name": f"cone K5-e {spec}",
            "surface": "cone",
            "graph": GainGraph(G, 5, K5_MINUS_E),
            "points": CONE_POINTS,
            "expect": {"rank": 14, "nullity": 1},
        })
    return out


def base_examples() -> list[dict]:
    """Base graphs of the recursive constructions; ranks are checked generically."""
    out = [{"name": "sphere K2 Ci", "surface": "sphere",
            "graph": GainGraph(make_group("Ci"), 2, [(0, 1, 1)]), "expect": {"rank": 3}}]
    loops = [("sphere", GroupSpec("Cmh", 3)), ("sphere", GroupSpec("S2m", 2)),
             ("cylinder", GroupSpec("Cs_containing")), ("cylinder", GroupSpec("Cs_horizontal")),
             ("cylinder", GroupSpec("Ci"))] + [("cone", s) for s in CONE_GROUPS]
    for surface, spec in loops:
        G = make_group(spec)
        for g in range(1, G.order):
            out.append({"name": f"{surface} loop {spec} gain {g}", "surface": surface,
                        "graph": GainGraph(G, 1, [(0, 0, g)]), "expect": {"rank": 2}})
    for m in (2, 3, 4):
        out.append({"name": f"cylinder K1 Cm(m={m})", "surface": "cylinder",
                    "graph": GainGraph(make_group("Cm", m), 1, []), "expect": {"rank": 1}})
    return out


def mechanism_example() -> GainGraph:
    """Identity-gain K4 plus one half-turn edge: counts hold in the cover, not in the quotient."""
    return GainGraph(make_group("C2_perp"), 4, K4 + [(2, 3, 1)])


def _check_pinned(ex: dict, rng, trials: int) -> dict:
    gg, surface = ex["graph"], ex["surface"]
    if "points" in ex:
        fw = SymmetricFramework(gg, surface, np.array(ex["points"]))
        rep = framework_rank(fw)
    else:
        fw = None
        rep = generic_rank(gg, surface, rng, trials)
    got = {"rank": rep.rank, "nullity": rep.nullity}
    ok = all(got[k] == v for k, v in ex["expect"].items())
    if "points" in ex:
        got["gap_ratio"] = min(rep.gap_ratio, 1e300)
        ok = ok and rep.gap_ratio > 1e6
    rec = {"name": ex["name"], "expected": ex["expect"], "observed": got, "ok": bool(ok)}
    if not ok and fw is not None:
        rec["matrix"] = orbit_surface_matrix(fw).tolist()
    return rec


def mechanism_check(rng, trials: int = 5) -> dict:
    gg = mechanism_example()
    ks = symmetric_type("cylinder", gg.group.spec)
    rep = generic_rank(gg, "cylinder", rng, trials)
    cg = cover(gg)
    edges = list(cg.edges)
    cover_tight = is_cover_tight(cg.n, edges, 2, 2)
    cover_rank = generic_surface_rank("cylinder", cg.n, edges, rng, trials).rank
    observed = {"quotient_nullity": rep.nullity, "k_S": ks, "cover_tight": cover_tight,
                "cover_vertices": cg.n, "cover_rank": cover_rank}
    expect = {"quotient_nullity": 1, "k_S": 0, "cover_tight": True, "cover_vertices": 8, "cover_rank": 22}
    return {"name": "cylinder C2_perp mechanism", "expected": expect, "observed": observed,
            "ok": observed == expect}


def paper_example_suite(seed: int = 0, trials: int = 5) -> Verdict:
    rng = np.random.default_rng(seed)
    results = [_check_pinned(ex, rng, trials) for ex in pinned_examples() + base_examples()]
    results.append(mechanism_check(rng, trials))
    good = sum(r["ok"] for r in results)
    return Verdict("paper-suite", True, good == len(results), len(results), good,
                   {"seed": seed, "trials": trials}, [r for r in results if not r["ok"]],
                   {"results": results})


# -- conjectural pairs --------------------------------------------------------------------

CONJECTURE_PAIRS = (
    ("cylinder", GroupSpec("C2_perp")),
    ("cylinder", GroupSpec("Cmh", 2)),
    ("sphere", GroupSpec("Cmh", 2)),
    ("cone", GroupSpec("Cs_containing")),
)


def conjecture_experiment(surface: str, group: GroupSpec, n_instances: int = 60, seed: int = 0,
                          max_vertices: int = 5, trials: int = 5, resamples: int = 3) -> Verdict:
    """Agreement of the unproven count with numeric rigidity; never gating.

    Instances are random graphs with exactly the target edge count, so both
    tight and non-tight graphs occur.
    """
    spec = count_for(surface, group)
    G = make_group(group)
    records = []
    for i in range(n_instances):
        rng = instance_rng(seed, i)
        gg = None
        while gg is None:
            n = int(rng.integers(1, max_vertices + 1))
            m = 2 * n - spec.m
            if m < 0:
                continue
            gg = random_gain_graph(G, n, m, rng)
        tight = is_gain_tight(gg, spec)
        iso, rep = is_isostatic_numeric(gg, surface, seed=int(rng.integers(2**62)), trials=trials,
                                        resamples=resamples)
        records.append({"graph": gg.to_dict(), "tight": bool(tight), "numeric": bool(iso),
                        "rank": rep.rank, "agree": bool(tight) == bool(iso)})
    extra = {}
    if (surface, group.kind) == ("cylinder", "C2_perp"):
        gg = mechanism_example()
        tight = is_gain_tight(gg, spec)
        iso, rep = is_isostatic_numeric(gg, surface, seed=seed, trials=trials)
        extra["mechanism"] = {"tight": bool(tight), "numeric": bool(iso), "nullity": rep.nullity,
                              "both_flexible": not tight and not iso}
    agree = sum(r["agree"] for r in records)
    extra["tight_instances"] = sum(r["tight"] for r in records)
    extra["k_S_numeric"] = symmetric_type_numeric(surface, G)
    return Verdict(f"conjecture {surface} {group} {spec}", False, True, len(records), agree,
                   {"surface": surface, "group": group.to_dict(), "count": spec.to_dict(),
                    "n_instances": n_instances, "seed": seed},
                   [r for r in records if not r["agree"]], extra)
