"""Admissible rules: weakening, contraction, inversion, substitution,
persistency, monotonicity, negation lemmas, and cut elimination."""

import pytest

from fbinq.calculus import (
    Derivation,
    RuleApplication,
    Sequent,
    check_derivation,
    check_ok,
    lf,
    multiset_equal,
    prove,
    prove_formula,
    sequent,
)
from fbinq.syntax import Forall, Predicate, IExists, atom, neg, parse
from fbinq.transform import (
    TransformError,
    contract,
    eliminate_cut,
    invert,
    make_cut,
    mon,
    neg_left,
    neg_right,
    persistency_derivation,
    rename_eigenvariables,
    scheme_subst_derivation,
    subst_derivation,
    weaken,
    weaken_many,
)


X = frozenset({1, 2})


def _proved(text, bound=2):
    d = prove_formula(parse(text), bound)
    assert isinstance(d, Derivation)
    return d


def test_weaken_preserves_height_and_checks():
    d = _proved("~~p -> p")
    w = weaken(d, "ante", lf(X, parse("q & r")))
    check_derivation(w)
    assert w.height == d.height
    assert lf(X, parse("q & r")) in w.conclusion.ante


def test_weaken_both_sides():
    d = _proved("p -> p")
    w = weaken_many(d, ante=[lf({1}, atom("q"))], succ=[lf(X, atom("r"))])
    check_derivation(w)
    assert lf({1}, atom("q")) in w.conclusion.ante
    assert lf(X, atom("r")) in w.conclusion.succ


def test_weaken_renames_clashing_eigenvariables():
    d = _proved("forall x. P(x) -> P(x)", 1)
    # weaken with a formula whose free variable collides with an
    # eigenvariable inside the derivation
    eig = next(n.rule.var for n in d.nodes() if n.rule.rule == "forallR")
    w = weaken(d, "ante", lf({1}, atom("Q", eig)))
    check_derivation(w)


def test_contract_removes_one_copy():
    m = lf(X, parse("p -> q"))
    seq = Sequent((m, m), (lf(X, parse("p -> q")),))
    d = prove(seq)
    c = contract(d, "ante", m)
    check_derivation(c)
    assert c.conclusion.ante.count(m) == 1
    assert c.height <= d.height


def test_contract_needs_two_copies():
    d = _proved("p -> p")
    with pytest.raises(TransformError):
        contract(d, "succ", d.conclusion.succ[0])


def test_invert_right_implication():
    d = _proved("~~p -> p")
    app = RuleApplication("impR", "succ", 0)
    for j in range(3):
        inv = invert(d, app, j)
        check_derivation(inv)
        assert inv.height <= d.height


def test_invert_left_and():
    seq = Sequent((lf(X, parse("p & q")),), (lf(X, atom("q")),))
    d = prove(seq)
    inv = invert(d, RuleApplication("andL", "ante", 0), 0)
    check_derivation(inv)
    assert lf(X, atom("p")) in inv.conclusion.ante


def test_subst_derivation_renames_free_variable():
    seq = Sequent((lf({1}, Forall("x", atom("R", "x", "y"))),),
                  (lf({1}, atom("R", "z", "y")),))
    d = prove(seq)
    d2 = subst_derivation(d, "y", "w")
    check_derivation(d2)
    assert d2.height <= d.height
    assert all("y" not in m.formula.__repr__() for m in d2.conclusion.members())


def test_subst_derivation_avoids_eigen_capture():
    # substitute a variable equal to an eigenvariable in the tree
    d = _proved("(forall x. P(x)) & Q(y) -> (forall x. P(x))", 1)
    eig = next(n.rule.var for n in d.nodes() if n.rule.rule == "forallR")
    d2 = subst_derivation(d, "y", eig)
    check_derivation(d2)
    assert d2.height <= d.height


def test_rename_eigenvariables():
    d = _proved("forall x. P(x) -> P(x)", 1)
    eig = next(n.rule.var for n in d.nodes() if n.rule.rule == "forallR")
    d2 = rename_eigenvariables(d, {eig})
    check_derivation(d2)
    assert eig not in {n.rule.var for n in d2.nodes() if n.rule.rule == "forallR"}


@pytest.mark.parametrize("text", ["p", "bot", "p & q", "p \\/ q", "p -> q",
                                  "forall x. P(x)", "iexists x. P(x)"])
def test_persistency_never_uses_atomic_split(text):
    f = parse(text)
    d = persistency_derivation(X, {1}, f)
    check_derivation(d)
    assert "atR" not in d.rules_used()
    assert d.conclusion.ante[0] == lf(X, f)
    assert d.conclusion.succ[-1] == lf({1}, f)


def test_persistency_with_context():
    ctx = sequent([lf({1}, atom("q"))], [lf(X, atom("r"))])
    d = persistency_derivation(X, X, parse("p -> q"), ctx)
    check_derivation(d)
    assert lf({1}, atom("q")) in d.conclusion.ante


def test_persistency_rejects_non_subset():
    with pytest.raises(TransformError):
        persistency_derivation({1}, X, atom("p"))


def test_mon_lifts_antecedent_label():
    seq = Sequent((lf({1}, parse("p & q")),), (lf({1}, atom("p")),))
    d = prove(seq)
    d2 = mon(d, 0, X)
    check_derivation(d2)
    assert d2.conclusion.ante[0].label == X


def test_neg_right_builds_negation():
    # premises share the context  X:q => X:q  and each adds {k}:p on the left
    prems = [prove(Sequent((lf({k}, atom("p")), lf(X, atom("q"))),
                           (lf(X, atom("q")),)))
             for k in sorted(X)]
    d = neg_right(X, atom("p"), prems)
    check_derivation(d)
    assert d.conclusion.succ[-1] == lf(X, neg(atom("p")))


def test_neg_left_builds_negation():
    p = prove(Sequent((lf({1}, atom("p")),), (lf({1}, atom("p")),)))
    d = neg_left(p, X)
    check_derivation(d)
    assert d.conclusion.ante[0] == lf(X, neg(atom("p")))


def test_make_cut_and_eliminate():
    cf = lf(X, parse("p & q"))
    left = prove(Sequent((lf(X, parse("q & p")),), (cf,)))
    right = prove(Sequent((cf,), (lf(X, atom("p")),)))
    d = make_cut(left, right, cf)
    assert "cut" in d.rules_used()
    check_derivation(d, allow_cut=True)
    assert not check_ok(d)  # the cut-free checker rejects it
    e = eliminate_cut(d)
    check_derivation(e)
    assert "cut" not in e.rules_used()
    assert multiset_equal(e.conclusion, d.conclusion)


def test_eliminate_cut_on_quantified_cut_formula():
    cf = lf({1}, Forall("x", atom("P", "x")))
    left = prove(Sequent((lf({1}, Forall("y", atom("P", "y"))),), (cf,)))
    right = prove(Sequent((cf,), (lf({1}, atom("P", "z")),)))
    d = make_cut(left, right, cf)
    e = eliminate_cut(d)
    check_derivation(e)
    assert multiset_equal(e.conclusion, d.conclusion)


def test_eliminate_cut_is_identity_on_cut_free_input():
    d = _proved("~~p -> p")
    e = eliminate_cut(d)
    check_derivation(e)
    assert multiset_equal(e.conclusion, d.conclusion)


def test_scheme_subst_derivation_replaces_predicate():
    d = _proved("(forall x. P(x)) -> (forall x. P(x))", 1)
    body = IExists("y", atom("R", "x", "y"))
    d2 = scheme_subst_derivation(d, Predicate("P", 1), body, ("x",))
    check_derivation(d2)
    assert "atR" not in d2.rules_used()
    texts = repr(d2.conclusion)
    assert "P(" not in texts and "R(" in texts
