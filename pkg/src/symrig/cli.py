"""Command-line interface.  Every command prints one JSON document on stdout.

Exit codes: 0 success, 1 failed check (gating disagreement, failed golden
test, uncertifiable input), 2 malformed input, 3 unsupported surface/group
pair or instance beyond the exhaustive-oracle scale.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .gaingraph import GainGraph, GainGraphError, cover
from .groups import GroupSpec, GroupSpecError, UnsupportedPair, symmetric_type
from .harness import Experiment, conjecture_experiment, cross_validate, dumps, paper_example_suite
from .moves import CertificationError, certify
from .rigidity import (
    DegenerateConfiguration,
    Surface,
    SymmetricFramework,
    export_csv,
    framework_rank,
    orbit_surface_matrix,
    generic_rank,
    lift_motion,
    lift_stress,
    motion_basis,
    sample_config,
    stress_basis,
)
from .sparsity import CountSpec, ScaleLimitError, count_for, is_gain_sparse, target_edges


class InputError(ValueError):
    pass


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_graph(path: str) -> GainGraph:
    try:
        return GainGraph.from_dict(_load_json(path))
    except GainGraphError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_config(path: str, gg: GainGraph, surface: str | None) -> SymmetricFramework:
    data = _load_json(path)
    if not isinstance(data, dict) or "surface" not in data or "points" not in data:
        raise InputError(f"{path}: config needs 'surface' and 'points'")
    if surface is not None and data["surface"] != surface:
        raise InputError(f"{path}: config is for the {data['surface']}, not the {surface}")
    try:
        pts = np.array(data["points"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: field 'points' must be a list of [x, y, z]") from exc
    if pts.shape != (gg.n, 3):
        raise InputError(f"{path}: expected {gg.n} points of dimension 3, got shape {list(pts.shape)}")
    fw = SymmetricFramework(gg, Surface(data["surface"]), pts)
    for i, p in enumerate(pts):
        if not fw.surface.contains(p):
            raise InputError(f"{path}: points[{i}] is not on the {data['surface']}")
    return fw


def _framework(args, gg: GainGraph) -> SymmetricFramework:
    if args.config:
        return load_config(args.config, gg, args.surface)
    if not args.surface:
        raise InputError("--surface is required without --config")
    return sample_config(args.surface, gg.group, gg, args.seed)


def _count(args, gg: GainGraph) -> CountSpec:
    if args.count == "auto":
        if not args.surface:
            raise InputError("--count auto needs --surface")
        return count_for(args.surface, gg.group.spec)
    try:
        return CountSpec.parse(args.count)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _group_arg(args) -> GroupSpec:
    try:
        return GroupSpec(args.group, args.m, args.angle)
    except GroupSpecError as exc:
        raise InputError(str(exc)) from exc


# -- commands --------------------------------------------------------------------------


def cmd_check_sparsity(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    spec = _count(args, gg)
    sparse, violation = is_gain_sparse(gg, spec)
    target = target_edges(gg, spec)
    return {
        "count": str(spec),
        "count_spec": spec.to_dict(),
        "edges": gg.m,
        "target_edges": target,
        "sparse": sparse,
        "tight": sparse and gg.m == target,
        "violation": None if violation is None else violation.to_dict(),
    }, 0


def cmd_certify(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    spec = _count(args, gg)
    try:
        cert = certify(gg, spec, budget=args.budget)
    except CertificationError as exc:
        return {"certified": False, "count": str(spec), "reason": str(exc)}, 1
    out = cert.to_dict()
    out["count"] = str(spec)
    if cert.ok:
        out["moves"] = cert.script.kinds()
    return out, 0 if cert.ok else 1


def cmd_rank(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    if args.config:
        fw = load_config(args.config, gg, args.surface)
        rep = framework_rank(fw, args.tol)
        surface = fw.surface.kind
        if args.csv:
            export_csv(orbit_surface_matrix(fw), args.csv)
    else:
        if not args.surface:
            raise InputError("--surface is required without --config")
        surface = args.surface
        rep = generic_rank(gg, surface, args.seed, args.trials, args.tol)
        if args.csv:
            export_csv(orbit_surface_matrix(sample_config(surface, gg.group, gg, args.seed)), args.csv)
    out = rep.to_dict()
    out["surface"] = surface
    try:
        ks = symmetric_type(surface, gg.group.spec)
        out["k_S"] = ks
        out["isostatic"] = rep.rank == gg.m + gg.n and rep.nullity == ks
    except UnsupportedPair:
        out["k_S"] = None
    return out, 0


def cmd_motions(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    fw = _framework(args, gg)
    basis = motion_basis(fw, args.tol)
    residuals = [lift_motion(fw, u)[1] for u in basis]
    return {"surface": fw.surface.kind, "points": fw.p0.tolist(), "dimension": len(basis),
            "basis": basis.tolist(), "lift_residuals": residuals}, 0


def cmd_stresses(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    fw = _framework(args, gg)
    basis = stress_basis(fw, args.tol)
    residuals = [lift_stress(fw, w)[1] for w in basis]
    return {"surface": fw.surface.kind, "points": fw.p0.tolist(), "dimension": len(basis),
            "basis": basis.tolist(), "lift_residuals": residuals}, 0


def cmd_cover(args) -> tuple[dict, int]:
    gg = load_graph(args.input)
    cg = cover(gg)
    return {
        "vertices": cg.n,
        "labels": [list(cg.label(i)) for i in range(cg.n)],
        "edges": [list(e) for e in cg.edges],
        "edge_origin": list(cg.edge_origin),
    }, 0


def cmd_cross_validate(args) -> tuple[dict, int]:
    exp = Experiment(args.surface, _group_arg(args), n_instances=args.n, max_vertices=args.max_vertices,
                     seed=args.seed, trials=args.trials, tol=args.tol, check_moves=args.check_moves)
    verdict = cross_validate(exp, workers=args.workers)
    return verdict.to_dict(), 1 if verdict.gating and not verdict.passed else 0


def cmd_conjecture(args) -> tuple[dict, int]:
    verdict = conjecture_experiment(args.surface, _group_arg(args), n_instances=args.n, seed=args.seed)
    return verdict.to_dict(), 0


def cmd_paper_suite(args) -> tuple[dict, int]:
    verdict = paper_example_suite(seed=args.seed, trials=args.trials)
    return verdict.to_dict(), 0 if verdict.passed else 1


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--output", help="write the JSON result here instead of stdout")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--input", required=True, help="gain graph JSON file")
    graph.add_argument("--surface", choices=["sphere", "cylinder", "cone"])

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--trials", type=int, default=5)
    numeric.add_argument("--tol", type=float, default=1e-10, help="relative SVD threshold")

    grp = argparse.ArgumentParser(add_help=False)
    grp.add_argument("--surface", required=True, choices=["sphere", "cylinder", "cone"])
    grp.add_argument("--group", required=True, help="group kind, e.g. Cm, Cs_horizontal, Ci")
    grp.add_argument("--m", type=int, default=1)
    grp.add_argument("--angle", type=float, default=0.0)
    grp.add_argument("--n", type=int, default=100, help="instances per class")

    p = argparse.ArgumentParser(prog="symrig", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-sparsity", parents=[common, graph], help="gain-sparsity and tightness")
    s.add_argument("--count", default="auto", help="k,l,m or 'auto' (needs --surface)")
    s.add_argument("--group-from-file", action="store_true",
                   help="accepted for compatibility; the group is always read from the input")
    s.set_defaults(func=cmd_check_sparsity)

    s = sub.add_parser("certify", parents=[common, graph], help="recursive construction certificate")
    s.add_argument("--count", default="auto")
    s.add_argument("--budget", type=int, default=20000, help="search node budget")
    s.set_defaults(func=cmd_certify)

    for name, func, text in (("rank", cmd_rank, "orbit-surface matrix rank"),
                             ("motions", cmd_motions, "symmetric infinitesimal motions"),
                             ("stresses", cmd_stresses, "symmetric self-stresses")):
        s = sub.add_parser(name, parents=[common, graph, numeric], help=text)
        s.add_argument("--config", help="configuration JSON (surface and points)")
        if name == "rank":
            s.add_argument("--csv", help="also write the orbit-surface matrix as CSV")
        s.set_defaults(func=func)

    s = sub.add_parser("cover", parents=[common], help="covering graph edge list")
    s.add_argument("--input", required=True)
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("cross-validate", parents=[common, grp, numeric], help="theorem cross-validation")
    s.add_argument("--max-vertices", type=int, default=7)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--check-moves", action="store_true", help="also check rank behaviour of every move")
    s.set_defaults(func=cmd_cross_validate)

    s = sub.add_parser("conjecture", parents=[common, grp], help="non-gating experiment for unproven pairs")
    s.set_defaults(func=cmd_conjecture)

    s = sub.add_parser("paper-suite", parents=[common, numeric], help="pinned examples")
    s.set_defaults(func=cmd_paper_suite)
    return p


def _error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result, code = args.func(args)
    except (InputError, GainGraphError, GroupSpecError, DegenerateConfiguration) as exc:
        return _error(type(exc).__name__, str(exc), 2)
    except (UnsupportedPair, ScaleLimitError) as exc:
        return _error(type(exc).__name__, str(exc), 3)
    text = dumps(result)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
