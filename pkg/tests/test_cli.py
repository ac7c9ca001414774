import json
from pathlib import Path

import pytest

from symrig.cli import main
from symrig.gaingraph import GainGraph
from symrig.harness import dumps

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), (json.loads(err) if err else None)


def test_rank_of_cylinder_fixture(capsys):
    code, out, _ = run(capsys, "rank", "--input", FIX / "cylinder_k4_e_edge_cs_containing.graph.json",
                       "--config", FIX / "cylinder_k4_e_edge_cs_containing.config.json")
    assert code == 0
    assert (out["rank"], out["nullity"], out["k_S"]) == (11, 1, 1)
    assert out["isostatic"] is True


def test_rank_writes_csv(capsys, tmp_path):
    target = tmp_path / "o.csv"
    code, _, _ = run(capsys, "rank", "--input", FIX / "cone_k5_e_ci.graph.json",
                     "--config", FIX / "cone_k5_e_ci.config.json", "--csv", target)
    assert code == 0
    assert len(target.read_text().splitlines()) == 14


def test_check_sparsity(capsys):
    code, out, _ = run(capsys, "check-sparsity", "--input", FIX / "cylinder_k4_e_edge_ci.graph.json",
                       "--count", "2,2,1")
    assert code == 0 and out["tight"] is True and out["violation"] is None
    code, out, _ = run(capsys, "check-sparsity", "--input", FIX / "cylinder_c2_perp_mechanism.graph.json",
                       "--surface", "cylinder")
    assert out["count"] == "(2,2,0)" and out["sparse"] is True and out["tight"] is False
    assert out["target_edges"] == 8


def test_cover_of_two_cycle(capsys):
    code, out, _ = run(capsys, "cover", "--input", FIX / "two_cycle.graph.json")
    assert code == 0 and out["vertices"] == 4 and len(out["edges"]) == 4


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--input", FIX / "cylinder_k4_e_edge_ci.graph.json",
                       "--surface", "cylinder")
    assert code == 0 and out["certified"] is True and out["moves"] == []
    code, out, _ = run(capsys, "certify", "--input", FIX / "cylinder_k4_e_edge_ci.graph.json",
                       "--count", "2,3,3")
    assert code == 1 and out["certified"] is False


def test_motions_and_stresses(capsys):
    g = FIX / "cone_k4_f_edge_cm_m_2.graph.json"
    code, out, _ = run(capsys, "motions", "--input", g, "--surface", "cone", "--seed", 3)
    assert code == 0 and out["dimension"] == 1
    assert max(out["lift_residuals"]) <= 1e-8
    code, out, _ = run(capsys, "stresses", "--input", g, "--surface", "cone", "--seed", 3)
    assert code == 0 and out["dimension"] == 0


def test_malformed_inputs_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "cover", "--input", bad)
    assert code == 2 and err["error"] == "InputError"
    data = json.loads((FIX / "two_cycle.graph.json").read_text())
    data["edges"][1]["gain"] = 7
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "cover", "--input", bad)
    assert code == 2 and "edges[1]" in err["message"]
    code, _, err = run(capsys, "cross-validate", "--surface", "sphere", "--group", "Nope")
    assert code == 2


def test_off_surface_config_exit_2(capsys, tmp_path):
    cfg = json.loads((FIX / "cylinder_k4_e_edge_ci.config.json").read_text())
    cfg["points"][2] = [3.0, 0.0, 0.0]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "rank", "--input", FIX / "cylinder_k4_e_edge_ci.graph.json", "--config", path)
    assert code == 2 and "points[2]" in err["message"]


def test_unsupported_and_scale_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "cross-validate", "--surface", "cone", "--group", "Dm", "--m", "2", "--n", "1")
    assert code == 3 and err["error"] == "UnsupportedPair"
    big = GainGraph.from_dict({"group": {"kind": "Ci"}, "vertices": 13,
                               "edges": [{"tail": i, "head": i + 1, "gain": 0} for i in range(12)]})
    path = tmp_path / "big.json"
    path.write_text(dumps(big.to_dict()))
    code, _, err = run(capsys, "check-sparsity", "--input", path, "--count", "2,3,3")
    assert code == 3 and err["error"] == "ScaleLimitError"


@pytest.mark.parametrize("path", sorted(FIX.glob("*.graph.json")), ids=lambda p: p.name)
def test_graph_files_round_trip_byte_for_byte(path):
    text = path.read_text()
    assert dumps(GainGraph.from_dict(json.loads(text)).to_dict()) == text


@pytest.mark.parametrize("argv", [
    ["rank", "--input", FIX / "triangle_with_loops.graph.json", "--surface", "sphere"],
    ["motions", "--input", FIX / "cylinder_k4_e_loop_ci.graph.json", "--surface", "cylinder"],
    ["cross-validate", "--surface", "cylinder", "--group", "Cm", "--m", "3", "--n", "4"],
    ["conjecture", "--surface", "sphere", "--group", "Cmh", "--m", "2", "--n", "4"],
], ids=lambda a: a[0])
def test_seed_reproducibility(capsys, argv):
    outs = []
    for seed in (5, 5, 6):
        main([str(a) for a in argv] + ["--seed", str(seed)])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_output_option(capsys, tmp_path):
    target = tmp_path / "r.json"
    code = main(["cover", "--input", str(FIX / "two_cycle.graph.json"), "--output", str(target)])
    assert code == 0 and capsys.readouterr().out == ""
    assert json.loads(target.read_text())["vertices"] == 4
