import copy
import json
from pathlib import Path

import pytest

from privecon.cli import main
from privecon.instance import (SchemaError, SemanticError, digest, dumps, load, loads, profile_document, save,
                               to_document)

ROOT = Path(__file__).resolve().parent.parent
INST = ROOT / "instances"
GOLDEN = sorted(INST.glob("*.json"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def doc_of(name):
    return json.loads((INST / name).read_text())


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


@pytest.mark.parametrize("path", GOLDEN, ids=lambda p: p.stem)
def test_golden_round_trip(path, tmp_path):
    inst = load(path)
    save(inst, tmp_path / "copy.json")
    again = load(tmp_path / "copy.json")
    assert to_document(again) == to_document(inst)
    assert digest(again) == digest(inst)


def test_product_mu_and_fraction_weights():
    inst = load(INST / "threshold_full.json")
    assert inst.model.types[0].weights == pytest.approx((0.25, 0.25, 0.5))


def test_schema_error_has_pointer():
    doc = doc_of("threshold_half.json")
    del doc["players"][0]["actions"]
    with pytest.raises(SchemaError) as info:
        loads(json.dumps(doc))
    assert info.value.pointer == "/players/0"
    with pytest.raises(SchemaError):
        loads("{not json")


def test_semantic_errors():
    doc = doc_of("threshold_half.json")
    bad = copy.deepcopy(doc)
    bad["players"][0]["P"]["a"] = "lam[1][a] <"
    with pytest.raises(SemanticError, match=r"/players/0/P/a: 1:12: syntax error"):
        loads(json.dumps(bad))
    bad = copy.deepcopy(doc)
    bad["players"][0]["P"]["a"] = "lam[2][a] < 0.5"
    with pytest.raises(SemanticError, match="unknown identifier"):
        loads(json.dumps(bad))
    bad = copy.deepcopy(doc)
    bad["mu"][0]["weight"] = 0.7
    with pytest.raises(SemanticError, match="/mu"):
        loads(json.dumps(bad))
    bad = copy.deepcopy(doc)
    bad["players"][0]["D"]["low"] = ["q"]
    with pytest.raises(SemanticError, match="undeclared action"):
        loads(json.dumps(bad))


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "solve", "--instance", INST / "threshold_half.json")[0] == 0
    code, _, err = run(capsys, "solve", "--instance", tmp_path / "missing.json")
    assert code == 1 and "schema error" in err
    doc = doc_of("threshold_half.json")
    doc["kind"] = "market"
    code, _, err = run(capsys, "solve", "--instance", write(tmp_path, doc))
    assert code == 1 and "/kind" in err
    doc = doc_of("threshold_half.json")
    doc["players"][0]["alpha"]["a"] = "lam[1][a] >= 0.5 $"
    code, _, err = run(capsys, "solve", "--instance", write(tmp_path, doc))
    assert code == 2 and "lexical error" in err
    code, _, err = run(capsys, "solve", "--instance", INST / "matching_pennies.json")
    assert code == 2 and "economy" in err
    doc = doc_of("threshold_half.json")
    doc["solver"] = {"strategy": "exhaustive"}
    code, _, err = run(capsys, "solve", "--instance", write(tmp_path, doc), "--budget", "1")
    assert code == 3 and "budget" in err


def test_no_equilibrium_is_not_an_error(capsys):
    code, out, _ = run(capsys, "solve", "--instance", INST / "unsatisfiable_economy.json")
    rep = json.loads(out)
    assert code == 0 and rep["result"]["status"] == "none" and rep["result"]["complete"]


def test_solve_reports_reverified_certificate(capsys):
    code, out, _ = run(capsys, "solve", "--instance", INST / "threshold_half.json")
    res = json.loads(out)["result"]
    assert res["status"] == "found" and res["reverified"]
    assert all(c["player"] == 1 for c in res["certificate"]["checks"])


def test_verify_reports_offending_cell(capsys):
    code, out, _ = run(capsys, "verify", "--instance", INST / "restricted_alpha.json",
                       "--profile", INST / "profiles" / "restricted_alpha_bad.json")
    res = json.loads(out)["result"]
    assert code == 0 and res["verdict"] == "invalid"
    assert res["offending"] == [{"player": 1, "cell": "high"}]
    code, out, _ = run(capsys, "verify", "--instance", INST / "restricted_alpha.json",
                       "--profile", INST / "profiles" / "restricted_alpha_good.json")
    assert json.loads(out)["result"]["verdict"] == "valid"
    code, out, _ = run(capsys, "verify", "--instance", INST / "matching_pennies.json",
                       "--profile", INST / "profiles" / "pennies_HH.json")
    res = json.loads(out)["result"]
    assert res["verdict"] == "invalid" and res["nash"]["max_gain"] == 2.0 and res["nash"]["worst_player"] == 2


def test_verify_rejects_unknown_cell(capsys, tmp_path):
    p = write(tmp_path, {"profile": [{"nowhere": "a"}]}, "prof.json")
    code, _, err = run(capsys, "verify", "--instance", INST / "restricted_alpha.json", "--profile", p)
    assert code == 2 and "undeclared cell" in err


def test_refine_study_gaps(capsys):
    code, out, _ = run(capsys, "refine-study", "--instance", INST / "canonical_two_action.json")
    rows = json.loads(out)["result"]["rows"]
    assert [r["k"] for r in rows] == [1, 2, 4, 8]
    assert [r["convexification_gap"] for r in rows] == pytest.approx([0.5, 0.25, 0.125, 0.0625])
    assert [r["atomicity_level"] for r in rows] == pytest.approx([1, 0.5, 0.25, 0.125])


def test_purify_command(capsys):
    code, out, _ = run(capsys, "purify", "--instance", INST / "canonical_two_action.json", "--refine", "4",
                       "--target", '{"0": 0.25, "1": 0.75}')
    res = json.loads(out)["result"]
    assert code == 0 and res["error"] <= 1e-12 and res["within_bound"] and res["player"] == 1
    code, _, err = run(capsys, "purify", "--instance", INST / "canonical_two_action.json",
                       "--target", '{"7": 1}')
    assert code == 2 and "undeclared action" in err


def test_audit_summaries(capsys):
    code, out, _ = run(capsys, "audit", "--instance", INST / "correlated_coins.json")
    rep = json.loads(out)
    assert rep["result"]["summary"]["T2b"] is False
    assert rep["audit"]["T2b"][0]["deviation"] == 0.25
    code, out, _ = run(capsys, "audit", "--instance", INST / "trivial_economy.json")
    summary = json.loads(out)["result"]["summary"]
    assert set(summary) == {"T3a", "T3b", "T3c", "T3d", "T3e", "T3f"}
    code, out, _ = run(capsys, "audit", "--instance", INST / "selector_economy.json")
    rep = json.loads(out)
    # G sits inside alpha and P, so it must be empty wherever they do not meet; the audit says so
    assert rep["audit"]["T4d"][0]["selector_inclusion"] is True
    assert rep["audit"]["T4d"][0]["nonempty"] is False
    assert rep["result"]["summary"]["T4d"] is False


@pytest.mark.parametrize("command", ["solve", "audit", "refine-study"])
def test_reports_are_byte_identical(capsys, tmp_path, command):
    inst = INST / "entry_economy.json"
    _, first, _ = run(capsys, command, "--instance", inst)
    _, second, _ = run(capsys, command, "--instance", inst)
    run(capsys, command, "--instance", inst, "--out", tmp_path / "r.json")
    assert first == second == (tmp_path / "r.json").read_text()


def test_timing_is_opt_in(capsys):
    _, out, _ = run(capsys, "solve-game", "--instance", INST / "dominant_strategy.json")
    assert "timing" not in json.loads(out)
    _, out, _ = run(capsys, "solve-game", "--instance", INST / "dominant_strategy.json", "--timing")
    assert json.loads(out)["timing"]["seconds"] >= 0


def test_props_command(capsys):
    code, out, _ = run(capsys, "props", "--cases", "10", "--seed", "3")
    rep = json.loads(out)
    assert code == 0 and rep["failed"] == 0 and rep["passed"] == 10 * len(rep["suites"])


def test_profile_document_round_trip():
    inst = load(INST / "restricted_alpha.json")
    prof = inst.model.profile_from_cells([{"low": "a", "high": "a"}])
    assert profile_document(prof) == {"profile": [{"low": "a", "high": "a"}]}
    assert dumps({"b": 1, "a": [0.1]}) == '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n'
