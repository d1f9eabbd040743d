"""The labelled calculus: rules, checker, prover, serialization."""

import pytest

from fbinq.calculus import (
    CheckError,
    Derivation,
    Failure,
    LabelledFormula,
    RuleApplication,
    SearchConfig,
    Sequent,
    check_derivation,
    check_ok,
    derivation_from_json,
    derivation_to_json,
    initial_sequent,
    is_initial,
    lf,
    multiset_equal,
    premises_of,
    prove,
    prove_formula,
    sequent_from_text,
    sequent_to_text,
    subsets_nonempty,
)
from fbinq.syntax import Forall, IExists, atom, parse


X = frozenset({1, 2})


def test_labels_must_be_nonempty_natural_sets():
    with pytest.raises(Exception):
        lf([-1], atom("p"))
    with pytest.raises(Exception):
        lf([], atom("p"))


def test_initial_sequents():
    assert is_initial(Sequent((lf(X, atom("p")),), (lf({1}, atom("p")),))) == "id"
    assert is_initial(Sequent((lf({1}, atom("p")),), (lf(X, atom("p")),))) is None
    assert is_initial(Sequent((lf({1}, parse("bot")),), ())) == "botL"


def test_subsets_nonempty_order():
    assert subsets_nonempty(X) == [frozenset({1}), frozenset({2}), X]


def test_atomic_split_has_one_premise_per_world():
    seq = Sequent((), (lf(X, atom("p")),))
    prems = premises_of(seq, RuleApplication("atR", "succ", 0))
    assert len(prems) == 2
    assert prems[0].succ[-1].label == frozenset({1})


def test_right_implication_premise_per_nonempty_subset():
    seq = Sequent((), (lf(X, parse("p -> q")),))
    prems = premises_of(seq, RuleApplication("impR", "succ", 0))
    assert len(prems) == 3
    # the principal formula is removed, the subset copies appear
    for y, p in zip(subsets_nonempty(X), prems):
        assert p.ante[-1] == lf(y, atom("p"))
        assert p.succ[-1] == lf(y, atom("q"))


def test_left_implication_keeps_principal():
    seq = Sequent((lf(X, parse("p -> q")),), (lf(X, atom("q")),))
    p1, p2 = premises_of(seq, RuleApplication("impL", "ante", 0, subset=X))
    assert lf(X, parse("p -> q")) in p1.ante
    assert p1.succ[-1] == lf(X, atom("p"))
    assert p2.ante[0] == lf(X, atom("q"))


def test_left_implication_subset_must_be_inside_label():
    seq = Sequent((lf({1}, parse("p -> q")),), ())
    with pytest.raises(Exception):
        premises_of(seq, RuleApplication("impL", "ante", 0, subset=X))


def test_eigenvariable_violation_detected():
    f = Forall("x", atom("P", "x"))
    seq = Sequent((), (lf({1}, f),))
    # instantiating the premise with a variable free in the conclusion is
    # rejected by the checker
    bad = Derivation(
        seq, RuleApplication("forallR", "succ", 0, var="x"),
        (Derivation(Sequent((), (lf({1}, atom("P", "x")),)),
                    RuleApplication("id"), ()),))
    with pytest.raises(CheckError):
        check_derivation(bad)


def test_checker_rejects_wrong_premise():
    seq = Sequent((lf({1}, parse("p & q")),), (lf({1}, atom("p")),))
    bad = Derivation(
        seq, RuleApplication("andL", "ante", 0),
        (Derivation(Sequent((lf({1}, atom("p")),), (lf({1}, atom("p")),)),
                    RuleApplication("id"), ()),))
    with pytest.raises(CheckError):
        check_derivation(bad)


def test_checker_reports_failure_path():
    seq = Sequent((), (lf({1}, atom("p")),))
    bad = Derivation(seq, RuleApplication("id"), ())
    with pytest.raises(CheckError) as e:
        check_derivation(bad)
    assert hasattr(e.value, "path")


@pytest.mark.parametrize("text,bound", [
    ("p -> p", 2),
    ("~~p -> p", 2),
    ("((p -> q) -> p) -> p", 2),
    ("(p -> q \\/ r) -> (p -> q) \\/ (p -> r)", 2),
    ("p & q -> q & p", 3),
    ("p -> (q -> p)", 3),
])
def test_proves_known_valid_formulas(text, bound):
    d = prove_formula(parse(text), bound)
    assert isinstance(d, Derivation)
    check_derivation(d)
    assert multiset_equal(d.conclusion, initial_sequent(parse(text), bound))


@pytest.mark.parametrize("text", ["?p", "p \\/ ~p", "p", "~(p & q) -> ~p \\/ ~q"])
def test_refutes_known_invalid_formulas(text):
    out = prove_formula(parse(text), 2)
    assert isinstance(out, Failure)
    assert out.reason == "refuted"


def test_quantifier_free_search_is_a_decision_procedure():
    # no budget reason ever appears on propositional input at these sizes
    out = prove_formula(parse("(p -> q) \\/ (q -> p)"), 3)
    assert isinstance(out, Failure) and out.reason == "refuted"


def test_first_order_valid_formula_proves():
    f = parse("(iexists x. (forall y. R(x, y))) -> (forall y. (iexists x. R(x, y)))")
    d = prove_formula(f, 2)
    assert isinstance(d, Derivation)
    check_derivation(d)


def test_first_order_failure_is_not_called_refuted():
    f = parse("(forall x. P(x)) -> bot")
    out = prove_formula(f, 1, SearchConfig(inst_budget=1, fresh_budget=1,
                                           eigen_budget=1, node_budget=200))
    assert isinstance(out, Failure)
    assert out.reason in ("budget", "inconclusive")


def test_prove_handles_duplicate_members():
    seq = Sequent((lf(X, atom("p")), lf(X, atom("p"))), (lf(X, atom("p")),))
    d = prove(seq)
    assert isinstance(d, Derivation)
    check_derivation(d)
    assert multiset_equal(d.conclusion, seq)


def test_derivation_json_roundtrip():
    d = prove_formula(parse("~~p -> p"), 2)
    data = derivation_to_json(d)
    back = derivation_from_json(data)
    check_derivation(back)
    assert multiset_equal(back.conclusion, d.conclusion)


def test_sequent_text_roundtrip():
    seq = Sequent((lf(X, parse("p -> q")),), (lf({1}, atom("q")),))
    assert multiset_equal(sequent_from_text(sequent_to_text(seq)), seq)


def test_check_ok_boolean_wrapper():
    d = prove_formula(parse("p -> p"), 1)
    assert check_ok(d)
    assert not check_ok(Derivation(Sequent((), (lf({1}, atom("p")),)),
                                   RuleApplication("id"), ()))
