"""The `fbinq` command line interface: exit codes and output formats."""

import json

import pytest

from fbinq.cli import (
    EXIT_INCONCLUSIVE,
    EXIT_INTERNAL,
    EXIT_OK,
    EXIT_REFUTED,
    EXIT_USAGE,
    main,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_prove_valid(capsys):
    code, rep = run_json(capsys, "prove", "~~p -> p")
    assert code == EXIT_OK
    assert rep["verdict"] == "proved"
    assert rep["derivation"]["rule"]


def test_prove_invalid_ships_countermodel(capsys):
    code, rep = run_json(capsys, "prove", "p \\/ ~p")
    assert code == EXIT_REFUTED
    assert rep["verdict"] == "refuted"
    assert "model" in rep["countermodel"]


def test_prove_parse_error(capsys):
    code, out = run(capsys, "prove", "p ->")
    assert code == EXIT_USAGE


def test_prove_scheme_argument(capsys):
    code, rep = run_json(capsys, "prove", "<CD>", "--bound", "2")
    assert code == EXIT_OK
    assert rep["verdict"] == "proved"


def test_prove_text_format(capsys):
    code, out = run(capsys, "prove", "p -> p")
    assert code == EXIT_OK
    assert "proved" in out


def test_prove_latex_format(capsys):
    code, out = run(capsys, "prove", "p -> p", "--format", "latex")
    assert code == EXIT_OK
    assert "\\infer" in out or "\\dfrac" in out or "\\frac" in out


def test_countermodel_command(capsys):
    code, rep = run_json(capsys, "countermodel", "?p")
    assert code == EXIT_REFUTED
    assert rep["countermodel"]["model"]["worlds"]


def test_countermodel_on_valid_formula_proves(capsys):
    code, rep = run_json(capsys, "countermodel", "p -> p")
    assert code == EXIT_OK
    assert rep["verdict"] == "proved"


def test_check_proof_roundtrip(tmp_path, capsys):
    code, rep = run_json(capsys, "prove", "~~p -> p")
    path = tmp_path / "d.json"
    path.write_text(json.dumps(rep["derivation"]))
    code, rep2 = run_json(capsys, "check-proof", str(path))
    assert code == EXIT_OK
    assert rep2["verdict"] == "checked"


def test_check_proof_rejects_corrupt_file(tmp_path, capsys):
    code, rep = run_json(capsys, "prove", "p -> p")
    d = rep["derivation"]
    d["conclusion"]["succ"][0]["formula"] = "q -> q"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    code, rep2 = run_json(capsys, "check-proof", str(path))
    assert code == EXIT_INTERNAL
    assert rep2["verdict"] == "failed"


def test_check_model(tmp_path, capsys):
    model = {
        "worlds": ["w1", "w2"],
        "domain": ["d"],
        "interp": {"p": {"w1": [[]]}},
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model))
    code, rep = run_json(capsys, "check-model", str(path), "p", "--state", "w1")
    assert code == EXIT_OK and rep["supported"] is True
    code, rep = run_json(capsys, "check-model", str(path), "p",
                         "--state", "w1,w2")
    assert code == EXIT_OK and rep["supported"] is False
    # the empty state supports everything
    code, rep = run_json(capsys, "check-model", str(path), "bot", "--state", "")
    assert code == EXIT_OK and rep["supported"] is True


def test_check_model_unknown_world(tmp_path, capsys):
    model = {"worlds": ["w"], "domain": ["d"], "interp": {}}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model))
    code, _ = run(capsys, "check-model", str(path), "p", "--state", "nope")
    assert code == EXIT_USAGE


def test_scheme_command(capsys):
    code, out = run(capsys, "scheme", "Kuroda")
    assert code == EXIT_OK
    assert "forall" in out


def test_eliminate_cut_command(tmp_path, capsys):
    from fbinq.calculus import derivation_to_json
    from fbinq.schemes import appendix_derivation

    d = appendix_derivation("EKP", {1, 2})
    src = tmp_path / "cut.json"
    src.write_text(json.dumps(derivation_to_json(d)))
    # check-proof refuses the cut-bearing certificate
    code, rep = run_json(capsys, "check-proof", str(src))
    assert code == EXIT_USAGE
    code, rep = run_json(capsys, "eliminate-cut", str(src))
    assert code == EXIT_OK and rep["verdict"] == "checked"
    dst = tmp_path / "cutfree.json"
    dst.write_text(json.dumps(rep["derivation"]))
    code, rep = run_json(capsys, "check-proof", str(dst))
    assert code == EXIT_OK


def test_casari_claims_sweep(capsys):
    code, rep = run_json(capsys, "casari-claims", "--maxWorld", "3", "--maxM", "1")
    assert code == EXIT_OK
    assert all(row["failures"] == 0 for row in rep["rows"])


def test_selftest_single_check(capsys):
    code, out = run(capsys, "selftest", "--only", "11")
    assert code == EXIT_OK
    assert "pass" in out.lower()


def test_missing_subcommand_is_usage_error(capsys):
    code = main([])
    assert code == EXIT_USAGE
