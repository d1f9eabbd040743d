"""Named schemes, their uniform derivations, and the bounded model claims."""

import pytest

from fbinq.calculus import check_derivation, check_ok, lf, sequent
from fbinq.schemes import (
    APPENDIX_NAMES,
    CasariModelSpec,
    SCHEME_NAMES,
    SchemeError,
    appendix_derivation,
    casari_claim1,
    casari_claim2_finite,
    casari_derivation,
    cd_derivation,
    scheme,
)
from fbinq.semantics import brute_force_valid
from fbinq.syntax import Forall, IDisj, IExists, Implies, atom, neg, parse, pprint
from fbinq.transform import eliminate_cut


X = frozenset({1, 2})


def test_scheme_names_resolve():
    for name in SCHEME_NAMES:
        f = scheme(name)
        assert pprint(f)


def test_unknown_scheme_rejected():
    with pytest.raises(SchemeError):
        scheme("NoSuchScheme")


def test_kuroda_shape():
    f = scheme("Kuroda")
    assert f == Implies(Forall("x", neg(neg(atom("P", "x")))),
                        neg(neg(Forall("x", atom("P", "x")))))


def test_cd_side_condition():
    with pytest.raises(SchemeError):
        scheme("CD", psi=atom("Q", "x"))


def test_casari_fixed_instances_reject_body_override():
    with pytest.raises(SchemeError):
        scheme("CasariAtomic", body=atom("Q", "x"))
    with pytest.raises(SchemeError):
        scheme("CasariDNAtomic", body=atom("Q", "x"))


def test_casari_scheme_accepts_custom_body():
    f = scheme("CasariScheme", body=neg(neg(atom("Q", "x"))))
    assert "Q" in pprint(f)


@pytest.mark.parametrize("size", [1, 2, 3])
def test_casari_derivation_checks(size):
    d = casari_derivation(range(1, size + 1))
    check_derivation(d)
    assert "atR" not in d.rules_used()
    # conclusion is X:A => X:F for the atomic body
    x = frozenset(range(1, size + 1))
    assert d.conclusion.succ[-1] == lf(x, Forall("x", atom("P", "x")))


def test_casari_derivation_custom_body():
    d = casari_derivation(X, body=neg(neg(atom("P", "x"))))
    check_derivation(d)


def test_cd_derivation_checks():
    d = cd_derivation(X, atom("P", "x"), atom("q"), "x")
    check_derivation(d)
    assert d.conclusion.succ[-1] == lf(
        X, IDisj(Forall("x", atom("P", "x")), atom("q")))


def test_cd_derivation_side_condition():
    with pytest.raises(SchemeError):
        cd_derivation(X, atom("P", "x"), atom("Q", "x"), "x")


@pytest.mark.parametrize("name", ["Kuroda", "KP", "EK", "NegRules"])
@pytest.mark.parametrize("size", [1, 2])
def test_appendix_derivations_check(name, size):
    d = appendix_derivation(name, range(1, size + 1))
    check_derivation(d)


def test_appendix_ekp_contains_cuts_that_eliminate():
    d = appendix_derivation("EKP", X)
    assert "cut" in d.rules_used()
    check_derivation(d, allow_cut=True)
    e = eliminate_cut(d)
    check_derivation(e)


def test_appendix_ekp_label_limit():
    with pytest.raises(SchemeError):
        appendix_derivation("EKP", {1, 2, 3})


def test_appendix_negrules_union():
    d = appendix_derivation("NegRules", X, y={1}, z={2})
    check_derivation(d)
    assert d.conclusion.succ[-1].label == X
    with pytest.raises(SchemeError):
        appendix_derivation("NegRules", X, y={1}, z={1})


def test_unknown_appendix_name():
    with pytest.raises(SchemeError):
        appendix_derivation("Markov", X)


def test_scheme_instances_are_semantically_valid():
    # spot-check each scheme over all small models
    for name, kw in [("Kuroda", {}), ("CD", {}),
                     ("CasariAtomic", {}), ("CasariDNAtomic", {})]:
        f = scheme(name, **kw)
        assert brute_force_valid(f, 2, 2), name


def test_model_spec_variants():
    a = CasariModelSpec("A")
    assert a.member(0, (1, 1))       # odd n: diagonal
    assert not a.member(0, (1, 2))
    assert a.member(0, (2, 3))       # even n: odd k != i
    assert not a.member(3, (2, 3))   # k == i excluded
    b = CasariModelSpec("B")
    assert b.member(0, (5, 3))       # i < k
    assert b.member(1, (3, 3))       # k == n, n != i
    assert not b.member(3, (3, 3))
    with pytest.raises(SchemeError):
        CasariModelSpec("C")


def test_claim1_witness_is_odd_diagonal():
    spec = CasariModelSpec("A")
    for m in range(4):
        ok, w = casari_claim1(spec, range(6), m)
        assert ok and w == 2 * m + 1
    with pytest.raises(SchemeError):
        casari_claim1(CasariModelSpec("B"), {0}, 0)


def test_claim2_bounds():
    a = CasariModelSpec("A")
    for s in [set(), {0}, {0, 1, 2}, {1, 3, 5}]:
        for m in range(3):
            ok, n = casari_claim2_finite(a, s, m)
            assert ok and n not in s
            assert n <= 2 * (max(s | {m}) + 1) + 1
    b = CasariModelSpec("B")
    for s in [set(), {0, 1, 2}, {4}]:
        for m in range(3):
            ok, k = casari_claim2_finite(b, s, m)
            assert ok and k <= max(s | {m}) + 1
