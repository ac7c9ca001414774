import itertools

import numpy as np
import pytest

from symrig.gaingraph import GainGraph, switch
from symrig.groups import GroupSpec, make_group
from symrig.moves import (
    ALLOWED,
    H1,
    H2,
    CertificationError,
    EdgeJoin,
    MoveError,
    MoveScript,
    Switch,
    VertexTo4Cycle,
    VertexToK4,
    apply,
    base_kind,
    candidates,
    certify,
    degree3_lemma_holds,
    find_admissible_reduction,
    grow_tight,
    random_base,
    script_from_dict,
)
from symrig.sparsity import CountSpec, is_gain_tight

Z2 = make_group("Ci")
TRIVIAL = make_group("Cm", 1)
K4 = [(a, b, 0) for a, b in itertools.combinations(range(4), 2)]
K4E = K4 + [(0, 1, 1)]
C = CountSpec.uniform

# A (2,2,1)-tight Ci graph whose only certificate contracts a 4-cycle.
FOUR_CYCLE_CASE = [(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 4, 0), (1, 3, 0), (2, 3, 0), (2, 2, 1),
                   (3, 4, 0), (0, 4, 1)]


def test_h1a_on_k2_gives_triangle():
    gg = apply(GainGraph(Z2, 2, [(0, 1, 0)]), H1((0, 0), (1, 0)))
    assert gg.n == 3 and gg.m == 3
    assert all(g == 0 for *_, g in gg.edges)


def test_h1_variants_and_rejections():
    base = GainGraph(Z2, 1, [(0, 0, 1)])
    assert apply(base, H1((0, 0), (0, 1))).m == 3
    assert apply(base, H1((0, 0), (None, 1))).n == 2
    with pytest.raises(MoveError):
        apply(base, H1((0, 1), (0, 1)))
    with pytest.raises(MoveError):
        apply(base, H1((0, 1), (None, 0)))


def test_move_deltas():
    G = make_group("Cm", 3)
    gg = GainGraph(G, 4, K4)
    h2 = apply(gg, H2(0, 2, 1, 1, 2))
    assert (h2.n - gg.n, h2.m - gg.m) == (1, 2)
    k4 = apply(gg, VertexToK4(0, (1, 2, 3)))
    assert (k4.n - gg.n, k4.m - gg.m) == (3, 6)
    cyc = apply(gg, VertexTo4Cycle(0, 0, 1, (1,)))
    assert (cyc.n - gg.n, cyc.m - gg.m) == (1, 2)
    other = MoveScript("K1", GainGraph(G, 1, []), ())
    joined = apply(gg, EdgeJoin(other, 0, 0, 1))
    assert (joined.n - gg.n, joined.m - gg.m) == (1, 1)


def test_vertex_to_k4_keeps_222_tightness():
    G = make_group("Cm", 2)
    rng = np.random.default_rng(3)
    for _ in range(20):
        script = grow_tight(C(2, 2, 2), G, 3, rng, max_vertices=4)
        gg = script.replay()
        free = [v for v in range(gg.n) if not any(gg.edges[i][0] == gg.edges[i][1] for i in gg.incident(v))]
        if not free:
            continue
        v = free[0]
        out = apply(gg, VertexToK4(v, tuple(int(x) for x in rng.integers(0, 4, len(gg.incident(v))))))
        assert is_gain_tight(out, C(2, 2, 2))


def test_edge_join_of_two_211_tight_graphs():
    a = GainGraph(Z2, 1, [(0, 0, 1)])
    b = MoveScript("K5_minus_e", GainGraph(Z2, 5, [(x, y, 0) for x, y in itertools.combinations(range(5), 2)
                                                   if (x, y) != (0, 1)]), ())
    out = apply(a, EdgeJoin(b, 0, 3, 1))
    assert is_gain_tight(out, C(2, 1, 1))


def test_reduction_examples():
    tri = GainGraph(Z2, 3, [(0, 1, 0), (1, 2, 0), (0, 2, 0)])
    cand = find_admissible_reduction(tri, C(2, 3, 3))
    assert cand.kind == "H1a" and cand.graph.n == 2 and cand.graph.m == 1
    assert find_admissible_reduction(GainGraph(Z2, 4, K4E), C(2, 2, 1)) is None
    k5e = [(a, b, 0) for a, b in itertools.combinations(range(5), 2) if (a, b) != (3, 4)]
    assert find_admissible_reduction(GainGraph(Z2, 5, k5e), C(2, 1, 1)) is None


def test_certify_triangle():
    cert = certify(GainGraph(Z2, 3, [(0, 1, 0), (1, 2, 0), (0, 2, 0)]), C(2, 3, 3))
    assert cert.ok and cert.script.base == "K2"
    assert [k for k in cert.script.kinds() if k != "Switch"] == ["H1a"]


def test_certify_triangle_with_loops_under_231():
    gg = GainGraph(Z2, 3, [(0, 1, 0), (1, 2, 0), (0, 2, 0), (0, 0, 1), (1, 1, 1)])
    cert = certify(gg, C(2, 3, 1))
    assert cert.ok and cert.script.base == "K1_loop"
    kinds = set(cert.script.kinds()) - {"Switch"}
    assert kinds <= ALLOWED[(2, 3, 1)]
    assert kinds & {"H1c", "H2c", "H2d", "H1b"}
    assert cert.script.realise().same_up_to_orientation(gg)


def test_certify_rejects_non_tight_and_unsupported():
    with pytest.raises(CertificationError):
        certify(GainGraph(Z2, 4, K4), C(2, 3, 3))
    with pytest.raises(CertificationError):
        certify(GainGraph(make_group("Cm", 3), 4, K4 + [(0, 1, 1)]), C(2, 2, 1))
    with pytest.raises(CertificationError):
        certify(GainGraph(Z2, 2, [(0, 1, 0)]), C(2, 3, 0))


def test_certify_contracts_trivial_k4():
    cert = certify(GainGraph(TRIVIAL, 4, K4), C(2, 2, 2))
    assert cert.ok and cert.script.kinds() == ["VertexToK4"]


def test_certify_contracts_switched_k4():
    gg = GainGraph(make_group("Cm", 3), 4, K4)
    for v, x in ((0, 1), (2, 2), (3, 1)):
        gg = switch(gg, v, x)
    cert = certify(gg, C(2, 2, 2))
    assert cert.ok and cert.script.realise().same_up_to_orientation(gg)


def test_certify_uses_four_cycle_contraction():
    gg = GainGraph(Z2, 5, FOUR_CYCLE_CASE)
    assert is_gain_tight(gg, C(2, 2, 1))
    kinds = [c.kind for c in candidates(gg, list(range(5)), C(2, 2, 1))]
    assert "VertexTo4Cycle" in kinds
    cert = certify(gg, C(2, 2, 1))
    assert cert.ok and "VertexTo4Cycle" in cert.script.kinds()


def test_certify_splits_at_bridge():
    other = [(a + 4, b + 4, g) for a, b, g in K4E]
    for gain in (0, 1):
        gg = GainGraph(Z2, 8, K4E + other + [(2, 6, gain)])
        cert = certify(gg, C(2, 2, 1))
        assert cert.ok and cert.script.kinds() == ["EdgeJoin"]
        assert cert.script.realise().same_up_to_orientation(gg)


def test_base_recognition():
    assert base_kind(GainGraph(Z2, 1, [(0, 0, 1)]), C(2, 1, 1)) == "K1_loop"
    assert base_kind(GainGraph(Z2, 4, K4E), C(2, 2, 1)) == "K4_plus_e"
    assert base_kind(GainGraph(Z2, 2, [(0, 1, 1)]), C(2, 3, 3)) == "K2"
    assert base_kind(GainGraph(Z2, 1, []), C(2, 2, 2)) == "K1"


def test_script_json_round_trip():
    rng = np.random.default_rng(5)
    script = grow_tight(C(2, 1, 1), make_group("Cmh", 2), 6, rng)
    back = script_from_dict(script.to_dict(), script.base_graph.group)
    assert back.replay() == script.replay()


PAIRS = [
    (C(2, 3, 3), GroupSpec("Ci")),
    (C(2, 3, 1), GroupSpec("Cm", 3)),
    (C(2, 3, 1), GroupSpec("S2m", 2)),
    (C(2, 2, 2), GroupSpec("Cm", 2)),
    (C(2, 2, 2), GroupSpec("Cm", 4)),
    (C(2, 2, 1), GroupSpec("Cs_horizontal")),
    (C(2, 1, 1), GroupSpec("Cmh", 3)),
    (C(2, 1, 1), GroupSpec("Ci")),
]


@pytest.mark.parametrize("spec,gspec", PAIRS, ids=lambda x: str(x))
def test_grown_graphs_are_tight_and_certified(spec, gspec):
    G = make_group(gspec)
    rng = np.random.default_rng(11)
    for _ in range(25):
        script = grow_tight(spec, G, int(rng.integers(2, 8)), rng)
        gg = script.replay(check=spec)
        cert = certify(gg, spec, check_lemma=True)
        assert cert.ok, cert.stuck
        assert not cert.lemma_failures
        assert set(cert.script.kinds()) - {"Switch"} <= ALLOWED[spec.triple]
        assert cert.script.realise().same_up_to_orientation(gg)


@pytest.mark.parametrize("seed", range(6))
def test_reverse_then_forward_is_consistent(seed):
    rng = np.random.default_rng(seed)
    spec = C(2, 1, 1)
    gg = grow_tight(spec, make_group("S2m", 2), 6, rng).replay()
    for cand in candidates(gg, list(range(gg.n)), spec):
        assert is_gain_tight(cand.graph, spec) or cand.kind == "EdgeJoin"


def test_degree_three_lemma_on_k4_vertices():
    gg = GainGraph(make_group("Cm", 2), 4, K4)
    assert all(degree3_lemma_holds(gg, C(2, 2, 2), v) for v in range(4))


def test_random_bases_are_tight():
    rng = np.random.default_rng(0)
    for kind, spec in (("K1_loop", C(2, 1, 1)), ("K4_plus_e", C(2, 2, 1)), ("K5_minus_e", C(2, 1, 1)),
                       ("K2", C(2, 3, 3))):
        for _ in range(5):
            assert is_gain_tight(random_base(kind, Z2, rng), spec)


def test_switch_moves_replay():
    gg = GainGraph(Z2, 2, [(0, 1, 0)])
    assert apply(gg, Switch(0, 1)).edges == ((0, 1, 1),)
