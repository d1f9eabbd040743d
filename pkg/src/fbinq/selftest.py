"""End-to-end acceptance checks exercising the whole toolkit.

Each check returns (passed, detail) and is self-contained: it generates its
own inputs (seeded where random), runs the relevant pipeline, and verifies
every produced artifact independently — derivations through the checker,
countermodels through the support relation.  `run_all` executes a selection
and returns a result matrix; the CLI `selftest` command prints it.
"""

from __future__ import annotations

import itertools
import random
import time
from typing import Callable

from .syntax import (
    And,
    Atom,
    BOT,
    Formula,
    Forall,
    IDisj,
    IExists,
    Implies,
    Predicate,
    atom,
    free_vars,
    parse,
    pprint,
)
from .calculus import (
    Derivation,
    Failure,
    Sequent,
    check_derivation,
    check_ok,
    initial_sequent,
    lf,
    multiset_equal,
    prove,
    prove_formula,
)
from .semantics import (
    brute_force_valid,
    enumerate_models,
    sequent_valid_in,
    supports,
)
from .transform import (
    contract,
    eliminate_cut,
    invert,
    make_cut,
    subst_derivation,
    weaken,
)
from .saturate import saturate, derived_model, verify_truth_lemma
from .schemes import (
    CasariModelSpec,
    appendix_derivation,
    casari_claim1,
    casari_claim2_finite,
    casari_derivation,
    cd_derivation,
    scheme,
)
from .transform import scheme_subst_derivation

DEFAULT_SEED = 20260823


def _random_formula(rng: random.Random, letters: list[Formula], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice(letters + [BOT])
    kind = rng.choice((And, IDisj, Implies))
    return kind(_random_formula(rng, letters, depth - 1),
                _random_formula(rng, letters, depth - 1))


def _prop_corpus(seed: int, count: int, depth: int = 4) -> list[Formula]:
    rng = random.Random(seed)
    letters = [atom("p"), atom("q")]
    return [_random_formula(rng, letters, rng.randint(1, depth))
            for _ in range(count)]


# ---------------------------------------------------------------------------
# The checks


def check_double_negation(seed: int) -> tuple[bool, str]:
    """prove ~~P(x) -> P(x) at bounds 1..4; each run < 1 s and re-checks."""
    f = parse("~~P(x) -> P(x)")
    times = []
    for n in range(1, 5):
        t0 = time.time()
        d = prove_formula(f, n)
        dt = time.time() - t0
        if not isinstance(d, Derivation):
            return False, f"bound {n}: prover returned {d}"
        check_derivation(d)
        if dt >= 1.0:
            return False, f"bound {n}: took {dt:.2f}s (limit 1s)"
        times.append(dt)
    return True, f"proved at bounds 1-4, times {['%.2fs' % t for t in times]}"


def check_constant_domain(seed: int) -> tuple[bool, str]:
    """Constant-domain distribution proves for |X| <= 3; the fixed-layout
    derivation also checks."""
    fa = Forall("x", IDisj(atom("P", "x"), atom("q")))
    goal = IDisj(Forall("x", atom("P", "x")), atom("q"))
    for n in (1, 2, 3):
        x = frozenset(range(1, n + 1))
        seq = Sequent((lf(x, fa),), (lf(x, goal),))
        d = prove(seq)
        if not isinstance(d, Derivation):
            return False, f"|X|={n}: prover returned {d}"
        check_derivation(d)
        check_derivation(cd_derivation(x))
    return True, "proved and hand-built tree checks for |X| = 1, 2, 3"


def check_appendix_derivations(seed: int) -> tuple[bool, str]:
    """Kuroda, KP, EK build checking derivations at |X| <= 2; EKP's
    explicit cut is eliminable and the cut-free result re-checks."""
    for name in ("Kuroda", "KP", "EK"):
        for n in (1, 2):
            check_derivation(appendix_derivation(name, range(1, n + 1)))
    for n in (1, 2):
        d = appendix_derivation("EKP", range(1, n + 1))
        check_derivation(d, allow_cut=True)
        if "cut" not in d.rules_used() and n == 2:
            return False, "EKP at |X|=2 should contain an explicit cut"
        dc = eliminate_cut(d)
        check_derivation(dc)
        if "cut" in dc.rules_used():
            return False, "eliminate_cut left a cut in EKP"
    return True, "Kuroda/KP/EK/EKP check at |X| <= 2; EKP cut-free after elimination"


def _has_lifted_hypothesis(d: Derivation, a: Formula, f: Formula) -> bool:
    x = d.conclusion.ante[0].label
    for node in d.nodes():
        c = node.conclusion
        if (any(m.formula == a and m.label == x for m in c.ante)
                and any(m.formula == f and m.label < x for m in c.succ)):
            return True
    return False


def check_casari_derivation(seed: int) -> tuple[bool, str]:
    """casari_derivation checks for |X| = 1, 2, 3; for |X| >= 2 the tree
    contains the monotonicity-lifted induction hypothesis X:A => Y:forall
    with Y a proper sublabel."""
    phi = atom("P", "x")
    f = Forall("x", phi)
    a = Forall("x", Implies(Implies(phi, f), f))
    for n in (1, 2, 3):
        d = casari_derivation(range(1, n + 1))
        check_derivation(d)
        lifted = _has_lifted_hypothesis(d, a, f)
        if lifted != (n >= 2):
            return False, f"|X|={n}: lifted-hypothesis segment present={lifted}"
    return True, "checks for |X| = 1, 2, 3; lifted hypothesis exactly when |X| >= 2"


def check_schematic_substitution(seed: int) -> tuple[bool, str]:
    """Substituting an existential body for the schematic atom in the Casari
    derivation yields a checking derivation with no atomic-split rule."""
    body = IExists("y", atom("R", "x", "y"))
    for n in (1, 2):
        d = casari_derivation(range(1, n + 1))
        ds = scheme_subst_derivation(d, Predicate("P", 1), body, ("x",))
        check_derivation(ds)
        if "atR" in ds.rules_used():
            return False, f"|X|={n}: substituted derivation uses the atomic split"
    return True, "substituted Casari derivations check and avoid the atomic split"


def check_prover_matches_brute_force(seed: int) -> tuple[bool, str]:
    """200 seeded propositional formulas over two letters, depth <= 4:
    prove at bound 4 agrees with exhaustive model enumeration."""
    formulas = _prop_corpus(seed, 200)
    valid = 0
    for i, f in enumerate(formulas):
        got = isinstance(prove_formula(f, 4), Derivation)
        want = brute_force_valid(f, 4, 1)
        if got != want:
            return False, f"formula {i} ({pprint(f)}): prove={got} oracle={want}"
        valid += got
    return True, f"200/200 agree with the brute-force oracle ({valid} valid)"


def check_countermodels_verified(seed: int) -> tuple[bool, str]:
    """Every refuted formula from the agreement corpus saturates to a
    verified countermodel refuting it at the full state."""
    formulas = _prop_corpus(seed, 200)
    refuted = 0
    for i, f in enumerate(formulas):
        seq = initial_sequent(f, 4)
        out = prove(seq)
        if isinstance(out, Derivation):
            continue
        ss = saturate(seq, range(1, 5))
        if isinstance(ss, Derivation):
            return False, f"formula {i}: saturation proved a refuted sequent"
        if not verify_truth_lemma(ss):
            return False, f"formula {i}: truth lemma fails on the derived model"
        model, naming, g = derived_model(ss)
        state = frozenset(naming[k] for k in range(1, 5))
        if supports(model, state, g, f):
            return False, f"formula {i}: root formula supported at the full state"
        refuted += 1
    return True, f"{refuted} refuted formulas all carry verified countermodels"


def check_soundness_sampling(seed: int) -> tuple[bool, str]:
    """100 prover-produced propositional derivations: their conclusions hold
    in every model with at most 3 worlds under every naming."""
    rng = random.Random(seed + 1)
    letters = [atom("p"), atom("q")]
    derivations: list[Derivation] = []
    while len(derivations) < 100:
        f = _random_formula(rng, letters, rng.randint(1, 3))
        bound = rng.randint(1, 3)
        d = prove_formula(f, bound)
        if isinstance(d, Derivation):
            derivations.append(d)
    sig = {"p": 0, "q": 0}
    models = list(enumerate_models(sig, 3, 1))
    for i, d in enumerate(derivations):
        seq = d.conclusion
        universe = sorted(set().union(*[m.label for m in seq.members()]))
        ante = [(m.label, m.formula) for m in seq.ante]
        succ = [(m.label, m.formula) for m in seq.succ]
        for model in models:
            worlds = sorted(model.worlds)
            for img in itertools.product(worlds, repeat=len(universe)):
                naming = dict(zip(universe, img))
                if not sequent_valid_in(model, naming, {}, ante, succ):
                    return False, f"derivation {i} fails in a {len(worlds)}-world model"
    return True, "100 proved sequents hold in all models with <= 3 worlds"


def check_cut_elimination(seed: int) -> tuple[bool, str]:
    """50 seeded cuts between independently proved sequents sharing the cut
    formula: elimination terminates, re-checks, and the conclusion is the
    expected mix of the two contexts."""
    rng = random.Random(seed + 2)
    letters = [atom("p"), atom("q")]
    done = 0
    while done < 50:
        cf = _random_formula(rng, letters, rng.randint(1, 2))
        a = _random_formula(rng, letters, rng.randint(1, 2))
        b = _random_formula(rng, letters, rng.randint(1, 2))
        x = rng.choice([frozenset({1}), frozenset({2}), frozenset({1, 2})])
        left_seq = Sequent((lf(x, And(a, cf)),), (lf(x, cf),))
        right_seq = Sequent((lf(x, cf),), (lf(x, IDisj(b, cf)),))
        dl, dr = prove(left_seq), prove(right_seq)
        if not (isinstance(dl, Derivation) and isinstance(dr, Derivation)):
            return False, "a deliberately provable cut side failed to prove"
        cut = make_cut(dl, dr, lf(x, cf))
        nc = eliminate_cut(cut)
        check_derivation(nc)
        if "cut" in nc.rules_used():
            return False, "cut survived elimination"
        expected = Sequent((lf(x, And(a, cf)),), (lf(x, IDisj(b, cf)),))
        if not multiset_equal(nc.conclusion, expected):
            return False, f"unexpected conclusion {nc.conclusion}"
        done += 1
    return True, "50 cuts eliminated; all results check with the mixed conclusion"


def check_height_preservation(seed: int) -> tuple[bool, str]:
    """100 seeded derivations: weakening, contraction, inversion and variable
    substitution all yield checking derivations of height at most the input's."""
    rng = random.Random(seed + 3)
    letters = [atom("p"), atom("q")]
    invertible = {"andR", "andL", "idisjL", "idisjR", "impR", "forallR", "iexistsL"}
    done = 0
    while done < 100:
        f = _random_formula(rng, letters, rng.randint(1, 3))
        d = prove_formula(f, rng.randint(1, 2))
        if not isinstance(d, Derivation):
            continue
        h = d.height
        extra = lf({1}, rng.choice(letters))
        w = weaken(d, "ante", extra)
        check_derivation(w)
        if w.height > h:
            return False, "weakening increased the height"
        ww = weaken(w, "ante", extra)
        c = contract(ww, "ante", extra)
        check_derivation(c)
        if c.height > ww.height:
            return False, "contraction increased the height"
        if d.rule.rule in invertible and d.premises:
            inv = invert(d, d.rule, 0)
            check_derivation(inv)
            if inv.height > h:
                return False, "inversion increased the height"
        s = subst_derivation(d, "x", "z")
        check_derivation(s)
        if s.height > h:
            return False, "substitution increased the height"
        done += 1
    fo = prove_formula(parse("~~P(x) -> P(x)"), 2)
    fs = subst_derivation(fo, "x", "y")
    check_derivation(fs)
    if fs.height > fo.height:
        return False, "substitution increased the height on a first-order input"
    return True, "100 derivations: all four transforms preserve checking and height"


def check_casari_claims(seed: int) -> tuple[bool, str]:
    """Exhaustive sweep of both bounded-model claims for all finite states
    s within {0..9} and m <= 3, with witnesses inside the stated bounds."""
    sa, sb = CasariModelSpec("A"), CasariModelSpec("B")
    worlds = list(range(10))
    n_checked = 0
    for r in range(len(worlds) + 1):
        for s_tuple in itertools.combinations(worlds, r):
            s = set(s_tuple)
            hi = max(s | {0}) if s else 0
            for m in range(4):
                ok1, w1 = casari_claim1(sa, s, m)
                ok2, w2 = casari_claim2_finite(sa, s, m)
                ok3, w3 = casari_claim2_finite(sb, s, m)
                if not (ok1 and ok2 and ok3):
                    return False, f"claim failed at s={sorted(s)}, m={m}"
                bound_a = 2 * (max(s | {m}) + 1) + 1
                if w1 != 2 * m + 1 or w2 > bound_a or w3 > max(s | {m}) + 1:
                    return False, f"witness out of bounds at s={sorted(s)}, m={m}"
                n_checked += 3
    return True, f"{n_checked} claim instances verified with bounded witnesses"


def _formulas_up_to_depth3() -> list[Formula]:
    """All formulas of syntactic height <= 3 over P(x) and falsum, with
    binary connectives and both quantifiers binding x."""
    h1: list[Formula] = [atom("P", "x"), BOT]
    def grow(pool):
        out = []
        for kind in (And, IDisj, Implies):
            out += [kind(a, b) for a in pool for b in pool]
        out += [Forall("x", a) for a in pool]
        out += [IExists("x", a) for a in pool]
        return out
    h2 = grow(h1)
    h3 = grow(h1 + h2)
    seen, result = set(), []
    for f in h1 + h2 + h3:
        if f not in seen:
            seen.add(f)
            result.append(f)
    return result


def check_persistency_and_empty_state(seed: int) -> tuple[bool, str]:
    """Support is downward closed and the empty state supports everything:
    exhaustive over models with <= 3 worlds, <= 2 individuals, one unary
    predicate, and all formulas of height <= 3."""
    formulas = _formulas_up_to_depth3()
    checked = 0
    for model in enumerate_models({"P": 1}, 3, 2):
        worlds = sorted(model.worlds)
        states = [frozenset(c) for r in range(len(worlds) + 1)
                  for c in itertools.combinations(worlds, r)]
        for dv in sorted(model.domain):
            g = {"x": dv}
            cache: dict = {}
            for f in formulas:
                sup = {s for s in states if supports(model, s, g, f, _cache=cache)}
                if frozenset() not in sup:
                    return False, f"empty state fails {pprint(f)}"
                for s in sup:
                    if any(t not in sup for t in states if t < s):
                        return False, f"persistency fails for {pprint(f)}"
                checked += 1
    return True, f"{checked} (model, assignment, formula) triples verified"


CRITERIA: list[tuple[str, Callable[[int], tuple[bool, str]]]] = [
    ("double-negation bounds 1-4", check_double_negation),
    ("constant domain |X| <= 3", check_constant_domain),
    ("appendix derivations + EKP cut", check_appendix_derivations),
    ("Casari derivation |X| <= 3", check_casari_derivation),
    ("schematic substitution", check_schematic_substitution),
    ("prover vs brute force (200)", check_prover_matches_brute_force),
    ("countermodels verified", check_countermodels_verified),
    ("soundness sampling (100)", check_soundness_sampling),
    ("cut elimination (50)", check_cut_elimination),
    ("height preservation (100)", check_height_preservation),
    ("Casari claim sweep", check_casari_claims),
    ("persistency + empty state", check_persistency_and_empty_state),
]


def run_all(seed: int = DEFAULT_SEED, only: list[int] | None = None,
            report: Callable[[str], None] | None = None) -> list[dict]:
    """Run the acceptance checks and return one record per check."""
    results = []
    for i, (name, fn) in enumerate(CRITERIA, start=1):
        if only and i not in only:
            continue
        t0 = time.time()
        try:
            ok, detail = fn(seed)
        except Exception as e:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(e).__name__}: {e}"
        dt = time.time() - t0
        rec = {"index": i, "name": name, "passed": ok,
               "detail": detail, "seconds": round(dt, 2)}
        results.append(rec)
        if report:
            report("{} {:2d}. {} ({}s) - {}".format(
                "PASS" if ok else "FAIL", i, name, rec["seconds"], detail))
    return results
