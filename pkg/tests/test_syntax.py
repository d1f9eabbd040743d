"""Formula AST, parser, printers, and substitution."""

import pytest
from hypothesis import given, strategies as st

from fbinq.syntax import (
    And,
    Atom,
    BOT,
    Bot,
    Forall,
    IDisj,
    IExists,
    Implies,
    ParseError,
    Predicate,
    alpha_canon,
    all_vars,
    atom,
    collect_signature,
    free_vars,
    fresh_var,
    latex,
    neg,
    parse,
    pprint,
    query,
    scheme_subst,
    subst_var,
)


def test_parse_pprint_fixed_points():
    cases = [
        "p",
        "P(x)",
        "R(x, y)",
        "bot",
        "~p",
        "?p",
        "p & q",
        "p \\/ q",
        "p -> q",
        "p & q \\/ r",
        "p -> q -> r",
        "forall x. P(x)",
        "iexists x. P(x) & q",
        "(forall x. P(x)) -> q",
    ]
    for text in cases:
        f = parse(text)
        assert parse(pprint(f)) == f


def test_precedence():
    assert parse("p & q \\/ r") == IDisj(And(atom("p"), atom("q")), atom("r"))
    assert parse("p -> q -> r") == Implies(atom("p"), Implies(atom("q"), atom("r")))
    assert parse("~p & q") == And(neg(atom("p")), atom("q"))


def test_quantifier_scope_extends_right():
    f = parse("forall x. P(x) -> q")
    assert isinstance(f, Forall)
    assert isinstance(f.body, Implies)


def test_negation_and_query_sugar():
    assert parse("~p") == Implies(atom("p"), BOT)
    assert parse("?p") == query(atom("p"))
    assert query(atom("p")) == IDisj(atom("p"), neg(atom("p")))


def test_parse_errors():
    for bad in ["", "p ->", "(p", "p & & q", "forall . p", "P(x", "_v0"]:
        with pytest.raises(ParseError):
            parse(bad)


def test_reserved_prefix_rejected():
    with pytest.raises(ParseError):
        parse("_hidden")


def test_arity_is_inferred_consistently():
    f = parse("P(x) & P(y)")
    assert collect_signature([f]) == {"P": 1}


def test_free_and_all_vars():
    f = parse("(forall x. R(x, y)) & P(x)")
    assert free_vars(f) == frozenset({"x", "y"})
    assert all_vars(f) == frozenset({"x", "y"})


def test_subst_var_capture_avoiding():
    f = Forall("x", atom("R", "x", "y"))
    g = subst_var(f, "y", "x")
    assert isinstance(g, Forall)
    assert g.var != "x"
    assert free_vars(g) == frozenset({"x"})


def test_subst_var_bound_occurrence_untouched():
    f = Forall("x", atom("P", "x"))
    assert subst_var(f, "x", "z") == f


def test_alpha_canon_identifies_renamings():
    f = Forall("x", atom("P", "x"))
    g = Forall("y", atom("P", "y"))
    assert f != g
    assert alpha_canon(f) == alpha_canon(g)


def test_scheme_subst_replaces_atoms():
    f = Implies(atom("P", "x"), Forall("x", atom("P", "x")))
    body = IExists("y", atom("R", "x", "y"))
    g = scheme_subst(f, Predicate("P", 1), body, ("x",))
    assert g == Implies(IExists("y", atom("R", "x", "y")),
                        Forall("x", IExists("y", atom("R", "x", "y"))))


def test_fresh_var_avoids():
    v = fresh_var({"x", "_v0", "_v1"})
    assert v == "_v2"


def test_latex_smoke():
    assert latex(parse("~p")) == r"\neg p"
    assert "\\forall" in latex(parse("forall x. P(x)"))


def test_atom_arity_mismatch():
    with pytest.raises(Exception):
        Atom(Predicate("P", 2), ("x",))


_names = st.sampled_from(["p", "q"])


@st.composite
def _formulas(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from([atom("p"), atom("q"), BOT]))
    kind = draw(st.sampled_from([And, IDisj, Implies]))
    return kind(draw(_formulas(depth=depth - 1)), draw(_formulas(depth=depth - 1)))


@given(_formulas())
def test_parse_pprint_roundtrip_property(f):
    assert parse(pprint(f)) == f


@given(_formulas())
def test_hash_consistent_with_equality(f):
    assert hash(f) == hash(parse(pprint(f)))
