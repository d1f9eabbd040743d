"""Models, the support relation, and the brute-force validity oracle."""

import pytest

from fbinq.semantics import (
    Model,
    ModelError,
    brute_force_valid,
    enumerate_models,
    find_countermodel,
    labelled_supports,
    make_model,
    model_from_json,
    model_to_json,
    sequent_valid_in,
    supports,
)
from fbinq.syntax import And, BOT, Forall, IDisj, IExists, Implies, atom, neg, parse


@pytest.fixture
def two_worlds():
    # p true at w1 only, q true at w2 only
    return make_model(
        ["w1", "w2"], ["d"],
        {("p", "w1"): {()}, ("q", "w2"): {()}},
        {"p": 0, "q": 0},
    )


def s(*worlds):
    return frozenset(worlds)


def test_atom_support_is_truth_everywhere(two_worlds):
    m = two_worlds
    assert supports(m, s("w1"), {}, atom("p"))
    assert not supports(m, s("w1", "w2"), {}, atom("p"))
    assert not supports(m, s("w2"), {}, atom("p"))


def test_empty_state_supports_everything(two_worlds):
    m = two_worlds
    for text in ["p", "bot", "~p", "p \\/ q", "p -> q", "?p"]:
        assert supports(m, s(), {}, parse(text))


def test_bot_only_at_empty_state(two_worlds):
    assert not supports(two_worlds, s("w1"), {}, BOT)


def test_inquisitive_disjunction_needs_one_whole_disjunct(two_worlds):
    m = two_worlds
    # each world settles ?p, but the full state does not
    assert supports(m, s("w1"), {}, parse("?p"))
    assert supports(m, s("w2"), {}, parse("?p"))
    assert not supports(m, s("w1", "w2"), {}, parse("?p"))


def test_implication_quantifies_over_substates(two_worlds):
    m = two_worlds
    assert supports(m, s("w1", "w2"), {}, parse("p -> p"))
    # q fails at w1, so p -> q fails at the substate {w1}
    assert not supports(m, s("w1", "w2"), {}, parse("p -> q"))


def test_persistency_spot_check(two_worlds):
    m = two_worlds
    f = parse("p \\/ q")
    if supports(m, s("w1", "w2"), {}, f):
        assert supports(m, s("w1"), {}, f)
        assert supports(m, s("w2"), {}, f)


def test_quantifiers_use_domain():
    m = make_model(
        ["w"], ["a", "b"],
        {("P", "w"): {("a",)}},
        {"P": 1},
    )
    assert supports(m, s("w"), {}, IExists("x", atom("P", "x")))
    assert not supports(m, s("w"), {}, Forall("x", atom("P", "x")))
    assert supports(m, s("w"), {"y": "a"}, atom("P", "y"))
    assert not supports(m, s("w"), {"y": "b"}, atom("P", "y"))


def test_missing_assignment_raises():
    m = make_model(["w"], ["a"], {}, {"P": 1})
    with pytest.raises(ModelError):
        supports(m, s("w"), {}, atom("P", "y"))


def test_labelled_supports_uses_naming(two_worlds):
    naming = {1: "w1", 2: "w2"}
    assert labelled_supports(two_worlds, naming, {}, {1}, atom("p"))
    assert not labelled_supports(two_worlds, naming, {}, {1, 2}, atom("p"))


def test_sequent_valid_in(two_worlds):
    naming = {1: "w1", 2: "w2"}
    # p, q => p & q
    assert sequent_valid_in(
        two_worlds, naming, {},
        [(frozenset({1}), atom("p"))],
        [(frozenset({1}), atom("p"))])
    assert not sequent_valid_in(
        two_worlds, naming, {},
        [],
        [(frozenset({1, 2}), parse("?p"))])


def test_enumerate_models_count():
    # one nullary letter, up to 2 worlds: 2^1 + 2^2 models
    assert len(list(enumerate_models({"p": 0}, 2, 1))) == 6


def test_brute_force_valid_known_values():
    assert brute_force_valid(parse("p -> p"), 3, 1)
    assert brute_force_valid(parse("~~p -> p"), 3, 1)
    assert not brute_force_valid(parse("?p"), 2, 1)
    assert not brute_force_valid(parse("p \\/ ~p"), 2, 1)
    assert brute_force_valid(parse("(forall x. P(x)) -> P(y)"), 2, 2)


def test_find_countermodel_returns_refuting_pair():
    out = find_countermodel(parse("?p"), 2, 1)
    assert out is not None
    m, g = out
    assert not supports(m, m.worlds, g, parse("?p"))


def test_model_json_roundtrip(two_worlds):
    data = model_to_json(two_worlds)
    back = model_from_json(data)
    assert back.worlds == two_worlds.worlds
    assert back.domain == two_worlds.domain
    assert supports(back, s("w1"), {}, atom("p"))
    assert not supports(back, s("w2"), {}, atom("p"))
