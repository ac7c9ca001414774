"""Regenerate fixtures/ from the example definitions in symrig.harness."""

import itertools
import re
import sys
from pathlib import Path

from symrig.gaingraph import GainGraph
from symrig.groups import make_group
from symrig.harness import dumps, mechanism_example, pinned_examples

ROOT = Path(__file__).resolve().parent.parent / "fixtures"


def slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def fixtures() -> dict[str, str]:
    out = {}
    for ex in pinned_examples():
        name = slug(ex["name"])
        out[f"{name}.graph.json"] = dumps(ex["graph"].to_dict())
        out[f"{name}.config.json"] = dumps({"surface": ex["surface"], "points": ex["points"]})
        out[f"{name}.expect.json"] = dumps(ex["expect"])
    c2 = make_group("Cm", 2)
    triangle = [(a, b, 0) for a, b in itertools.combinations(range(3), 2)]
    out["triangle_with_loops.graph.json"] = dumps(
        GainGraph(c2, 3, triangle + [(v, v, 1) for v in range(3)]).to_dict())
    out["two_cycle.graph.json"] = dumps(GainGraph(c2, 2, [(0, 1, 0), (0, 1, 1)]).to_dict())
    out["cylinder_c2_perp_mechanism.graph.json"] = dumps(mechanism_example().to_dict())
    return out


def main(check: bool = False) -> int:
    ROOT.mkdir(exist_ok=True)
    stale = []
    for name, text in sorted(fixtures().items()):
        path = ROOT / name
        if check:
            if not path.exists() or path.read_text() != text:
                stale.append(name)
        else:
            path.write_text(text)
    for name in stale:
        print(f"stale fixture: {name}")
    return 1 if stale else 0


if __name__ == "__main__":
    sys.exit(main(check="--check" in sys.argv))
