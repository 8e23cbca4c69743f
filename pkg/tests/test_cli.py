import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from junctionc import oracle, verify
from junctionc.cli import main
from junctionc.graph_model import UndirectedGraph
from junctionc.modelfile import dump, from_graph, load, loads
from junctionc.propagation import Potential

from .conftest import cycle

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compile_four_cycle_optimal(capsys):
    code, out, _ = run(capsys, "compile", MODELS / "cycle4.json", "--optimal", "--emit", "json")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["triangulation"]["fill_ins"]) == 1
    assert rep["tree"]["total_weight"] == 2


def test_compile_chain_tree(capsys):
    # the chain A-B-C-D has one spanning tree; enumeration gives weight 2 and cost 22
    code, out, _ = run(capsys, "compile", MODELS / "chain.json", "--emit", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["triangulation"]["fill_ins"] == []
    assert (rep["tree"]["total_weight"], rep["tree"]["total_cost"]) == (2, 22)


def test_compile_single_factor(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({
        "format": "junctionc-model", "version": 1,
        "variables": [{"name": "X", "states": ["0", "1"]}, {"name": "Y", "states": ["0", "1"]}],
        "factors": [{"scope": ["X", "Y"], "ordering": "sorted-scope, last-fastest", "table": [1, 2, 3, 4]}],
    }))
    code, out, _ = run(capsys, "compile", path, "--emit", "json", "--almond")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["cliques"]) == 1 and rep["tree"]["links"] == []
    assert rep["almond"]["almond_budget"]["marginalizations"] == 0


def test_compile_is_deterministic(capsys):
    outs = {run(capsys, "compile", MODELS / "sprinkler.json", "--almond")[1] for _ in range(3)}
    assert len(outs) == 1


def test_compile_almond_text(capsys):
    code, out, _ = run(capsys, "compile", MODELS / "cycle4.json", "--almond")
    assert code == 0
    assert "almond tree budget" in out and "stores 1" in out


def test_query_uniform(tmp_path, capsys):
    path = tmp_path / "uniform.json"
    dump(from_graph(cycle(4)), path)
    code, out, _ = run(capsys, "query", path, "--emit", "json")
    assert code == 0
    for dist in json.loads(out)["marginals"].values():
        assert list(dist.values()) == [0.5, 0.5]


def test_query_chain_matches_oracle(capsys):
    model = load(MODELS / "chain.json")
    code, out, _ = run(capsys, "query", MODELS / "chain.json", "--evidence", "D=d1", "B=b2",
                       "--marginal", "A", "C", "--emit", "json")
    assert code == 0
    marg = json.loads(out)["marginals"]
    evidence = [Potential((3,), (2,), [0, 1]), Potential((1,), (3,), [0, 0, 1])]
    joint = oracle.joint_from_factors(model.universe, list(model.factors) + evidence)
    for name, var in (("A", 0), ("C", 2)):
        want = oracle.oracle_marginal(joint, (var,)).flat
        np.testing.assert_allclose(list(marg[name].values()), want / want.sum(), rtol=1e-9)


def test_query_almond_agrees(capsys):
    args = ["query", MODELS / "sprinkler.json", "--evidence", "WetGrass=wet", "--emit", "json"]
    a = json.loads(run(capsys, *args)[1])
    b = json.loads(run(capsys, *args, "--almond")[1])
    for name in a["marginals"]:
        np.testing.assert_allclose(list(a["marginals"][name].values()), list(b["marginals"][name].values()),
                                   atol=1e-12)


def test_query_text(capsys):
    code, out, _ = run(capsys, "query", MODELS / "sprinkler.json", "--evidence", "WetGrass=wet",
                       "--marginal", "Rain")
    assert code == 0
    assert out.startswith("Rain: no=0.29207")


def test_impossible_evidence_exit_4(capsys):
    code, _, err = run(capsys, "query", MODELS / "sprinkler.json", "--evidence",
                       "Sprinkler=off", "Rain=no", "WetGrass=wet")
    assert code == 4
    assert "impossible evidence" in err


@pytest.mark.parametrize("evidence", ["Nope=1", "Rain=maybe", "Rain"])
def test_bad_evidence_exit_3(capsys, evidence):
    assert run(capsys, "query", MODELS / "sprinkler.json", "--evidence", evidence)[0] == 3


def test_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "junctionc-model",\n "version": }')
    code, _, err = run(capsys, "compile", path)
    assert code == 2 and "line 2" in err


def test_semantic_error_exit_3(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "format": "junctionc-model", "version": 1,
        "variables": [{"name": "X", "states": ["0", "1"]}],
        "factors": [{"scope": ["X"], "ordering": "sorted-scope, last-fastest", "table": [1, 2, 3]}],
    }))
    code, _, err = run(capsys, "compile", path)
    assert code == 3 and "table" in err


def test_disconnected_model_exit_3(tmp_path, capsys):
    path = tmp_path / "split.json"
    dump(from_graph(UndirectedGraph.from_edges(cycle(4).universe, [(0, 1), (2, 3)])), path)
    code, _, err = run(capsys, "compile", path)
    assert code == 3 and "components" in err


def test_verify_cycle_counterexample_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "example1")
    assert code == 0
    assert "Pos(C,D) = [[1, 1, 0], [1, 1, 0], [0, 0, 0]]" in out
    assert "[[1, 0, 0], [0, 1, 0], [0, 0, 0]]" in out
    assert "example1: PASS" in out


def test_verify_zero_cases(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "theorem1", "--cases", "0")
    assert code == 0 and "theorem1: PASS" in out


def test_verify_min_cost_suite_seed7(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "theorem2", "--seed", "7", "--cases", "50")
    assert code == 0 and "seed 7, 50 cases" in out


def test_verify_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("JUNCTIONC_SEED", "11")
    code, out, _ = run(capsys, "verify", "--suite", "corollary1", "--cases", "5")
    assert code == 0 and "seed 11" in out
    code, out, _ = run(capsys, "verify", "--suite", "corollary1", "--cases", "5", "--seed", "3")
    assert "seed 3" in out


def test_verify_failure_dumps_replayable_model(capsys, monkeypatch, tmp_path):
    def broken(seed, cases):
        res = verify.SuiteResult("theorem1", cases)
        res.fail("case 0: planted failure", from_graph(cycle(5)))
        return res

    monkeypatch.setitem(verify.SUITES, "theorem1", broken)
    code, out, _ = run(capsys, "verify", "--suite", "theorem1", "--cases", "1")
    assert code == 1
    assert "theorem1: FAIL" in out
    replay = out.split("failing instance follows\n", 1)[1]
    assert loads(replay).markov_graph().edges() == cycle(5).edges()

    code, out, _ = run(capsys, "verify", "--suite", "theorem1", "--cases", "1", "--dump-dir", tmp_path)
    assert code == 1
    assert load(tmp_path / "theorem1-seed0.json") == loads(replay)


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "junctionc.cli", "verify", "--suite", "theorem1", "--cases", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "theorem1: PASS" in proc.stdout
