"""Saturation of unprovable sequents and countermodel extraction.

`saturate` either proves the input or extends it to a saturated sequent: a
pair of sets closed under the twelve conditions that make the derived model
construction work (one closure condition per rule, plus unprovability).

Saturation is witness-guided.  After proof search fails, an exhaustive
enumeration finds a countermodel whose worlds are the label universe itself
(complete by a world-duplication argument: any countermodel can be
re-indexed over the universe with the naming identity).  The witness then
decides every closure branch by direct support evaluation — for instance,
an unsupported implication on the right names the subset whose image state
supports the antecedent but not the consequent.  Every addition therefore
preserves the witness, whose existence certifies unprovability of the
saturated sequent by soundness; no further proof-search queries are needed.

The derived model has the label universe as worlds and the variable pool as
domain; a tuple is in the interpretation of P at world k exactly when the
singleton-labelled atom {k}:P(tuple) is absent from the consequent.  The
truth lemma — antecedent members supported, consequent members not — is
checked semantically by `verify_truth_lemma`, so every emitted countermodel
is verified against the support relation rather than trusted.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .syntax import (
    Atom,
    And,
    Bot,
    FbinqError,
    Forall,
    Formula,
    IDisj,
    IExists,
    Implies,
    Predicate,
    alpha_canon,
    collect_signature,
    free_vars,
    fresh_var,
    pprint,
    subst_var,
)
from .calculus import (
    Derivation,
    LabelledFormula,
    SearchConfig,
    Sequent,
    _NodeBudgetExhausted,
    _Prover,
    _QfOracle,
    _dedupe,
    label,
    lf,
    quantifier_free,
    run_with_deep_stack,
    subsets_nonempty,
)
from .semantics import Model, make_model, supports


class SaturationError(FbinqError):
    pass


class SaturationBudgetError(SaturationError):
    """No proof was found and no countermodel exists within the domain
    budget; the result is inconclusive."""


@dataclass(frozen=True)
class SaturatedSequent:
    ante: tuple[LabelledFormula, ...]
    succ: tuple[LabelledFormula, ...]
    universe: frozenset[int]
    pool: tuple[str, ...]
    decisive: bool = True


def _sort_key(m: LabelledFormula):
    return (tuple(sorted(m.label)), pprint(m.formula))


def _canon(m: LabelledFormula):
    return (m.label, alpha_canon(m.formula))


class _Side:
    """An insertion-ordered set of labelled formulas, alpha-insensitive."""

    def __init__(self, members: Iterable[LabelledFormula]):
        self.items: list[LabelledFormula] = []
        self.keys: set = set()
        for m in members:
            self.add(m)

    def add(self, m: LabelledFormula) -> bool:
        k = _canon(m)
        if k in self.keys:
            return False
        self.keys.add(k)
        self.items.append(m)
        return True

    def __contains__(self, m: LabelledFormula) -> bool:
        return _canon(m) in self.keys


def find_witness(seq: Sequent, universe: Iterable[int], dom_max: int = 6,
                 cap: int = 2_000_000) -> tuple[Model, dict[str, str]] | None:
    """A countermodel of the sequent with worlds = universe, naming identity.

    Enumerates all interpretations over the universe for domain sizes
    1..dom_max together with assignments of the sequent's free variables,
    returning the first (model, assignment) under which every antecedent
    member is supported at its label's state and no consequent member is.
    """
    z = label(universe)
    worlds = sorted(z)
    sig = collect_signature([m.formula for m in seq.members()])
    fv = sorted(seq.free_vars())
    propositional = all(a == 0 for a in sig.values()) and not fv
    for dn in range(1, dom_max + 1):
        domain = [f"e{i}" for i in range(1, dn + 1)]
        slots = [
            (name, w, t)
            for name, arity in sorted(sig.items())
            for w in worlds
            for t in itertools.product(domain, repeat=arity)
        ]
        if len(slots) > 24 or 2 ** len(slots) * dn ** len(fv) > cap:
            raise SaturationBudgetError(
                f"countermodel space too large at domain size {dn}")
        for bits in itertools.product([False, True], repeat=len(slots)):
            interp: dict[tuple[str, int], set] = {}
            for (name, w, t), b in zip(slots, bits):
                if b:
                    interp.setdefault((name, w), set()).add(t)
            model = make_model(worlds, domain, interp, sig)
            for values in itertools.product(domain, repeat=len(fv)):
                g = dict(zip(fv, values))
                cache: dict = {}
                if all(supports(model, frozenset(m.label), g, m.formula,
                                _cache=cache)
                       for m in seq.ante) and not any(
                        supports(model, frozenset(m.label), g, m.formula,
                                 _cache=cache)
                        for m in seq.succ):
                    return model, g
        if propositional:
            break  # larger domains interpret a nullary signature identically
    return None


def saturate(seq: Sequent, universe: Iterable[int],
             cfg: SearchConfig | None = None,
             pool_max: int = 6) -> Derivation | SaturatedSequent:
    """Prove the sequent or saturate it over the given label universe.

    `pool_max` bounds the domain size of the guiding countermodel (and with
    it the variable pool); if neither a proof nor a countermodel exists
    within that bound, SaturationBudgetError signals an inconclusive result.
    """
    z = label(universe)
    for m in seq.members():
        if not m.label <= z:
            raise SaturationError(f"label of {m!r} not contained in the universe")
    if cfg is None:
        if all(quantifier_free(m.formula) for m in seq.members()):
            cfg = SearchConfig()
        else:
            cfg = SearchConfig(node_budget=20_000)
    prover = _Prover(cfg, seq.all_vars(), oracle=_QfOracle.make(seq))
    pa, _ = _dedupe(seq.ante)
    ps, _ = _dedupe(seq.succ)
    try:
        found = run_with_deep_stack(prover.search, pa, ps, 0, 0)
    except _NodeBudgetExhausted:
        # the witness search below certifies unprovability semantically, so
        # an aborted proof search only costs the chance of a proof
        found = False
        prover.budget_hits += 1
    if found:
        return run_with_deep_stack(prover.build, seq)

    witness = find_witness(seq, z, dom_max=pool_max)
    if witness is None:
        raise SaturationBudgetError(
            "proof search failed but no countermodel exists within "
            f"domain size {pool_max}"
            + ("" if prover.budget_hits == 0 else " (proof search hit its budget)"))
    model, g = witness

    cache: dict = {}

    def holds(state, formula: Formula) -> bool:
        return supports(model, frozenset(state), g, formula, _cache=cache)

    gamma = _Side(seq.ante)
    delta = _Side(seq.succ)
    pool: list[str] = sorted(seq.free_vars())

    # members whose closure condition quantifies over the whole pool; they
    # are revisited whenever the pool grows
    universal: list[tuple[str, LabelledFormula]] = []
    queue: deque[tuple[str, LabelledFormula]] = deque()

    def var_for(element) -> str:
        """A pool variable assigned to the given domain element."""
        for v in pool:
            if g.get(v) == element:
                return v
        used = set(pool) | set(g)
        for side in (gamma, delta):
            for m in side.items:
                used |= free_vars(m.formula)
        v = fresh_var(used)
        g[v] = element
        pool.append(v)
        queue.extend(universal)
        return v

    def push(side_tag: str, m: LabelledFormula) -> None:
        queue.append((side_tag, m))

    def add(side_tag: str, m: LabelledFormula) -> None:
        side = gamma if side_tag == "ante" else delta
        if side.add(m):
            push(side_tag, m)

    for m in seq.ante:
        push("ante", m)
    for m in seq.succ:
        push("succ", m)

    while queue:
        tag, m = queue.popleft()
        x, f = m.label, m.formula
        if isinstance(f, Bot):
            continue
        if isinstance(f, Atom):
            if tag == "succ" and not any(lf([k], f) in delta for k in x):
                for k in sorted(x):
                    if not holds({k}, f):
                        add("succ", lf([k], f))
                        break
                else:
                    raise SaturationError(f"witness supports {m!r} on the right")
            continue
        if isinstance(f, And):
            l, r = LabelledFormula(x, f.left), LabelledFormula(x, f.right)
            if tag == "ante":
                add("ante", l)
                add("ante", r)
            elif not (l in delta or r in delta):
                add("succ", l if not holds(x, f.left) else r)
            continue
        if isinstance(f, IDisj):
            l, r = LabelledFormula(x, f.left), LabelledFormula(x, f.right)
            if tag == "succ":
                add("succ", l)
                add("succ", r)
            elif not (l in gamma or r in gamma):
                add("ante", l if holds(x, f.left) else r)
            continue
        if isinstance(f, Implies):
            if tag == "succ":
                if not any(LabelledFormula(y, f.left) in gamma
                           and LabelledFormula(y, f.right) in delta
                           for y in subsets_nonempty(x)):
                    for y in subsets_nonempty(x):
                        if holds(y, f.left) and not holds(y, f.right):
                            add("ante", LabelledFormula(y, f.left))
                            add("succ", LabelledFormula(y, f.right))
                            break
                    else:
                        raise SaturationError(
                            f"witness supports {m!r} on the right")
            else:
                for y in subsets_nonempty(x):
                    l = LabelledFormula(y, f.left)
                    r = LabelledFormula(y, f.right)
                    if l in delta or r in gamma:
                        continue
                    if holds(y, f.left):
                        add("ante", r)
                    else:
                        add("succ", l)
            continue
        if isinstance(f, Forall):
            if tag == "ante":
                if (tag, m) not in universal:
                    universal.append((tag, m))
                if not pool:
                    var_for(sorted(model.domain)[0])
                for y in list(pool):
                    add("ante", LabelledFormula(x, subst_var(f.body, f.var, y)))
            else:
                if not any(LabelledFormula(x, subst_var(f.body, f.var, y)) in delta
                           for y in pool):
                    for d in sorted(model.domain):
                        if not supports(model, frozenset(x), {**g, f.var: d},
                                        f.body, _cache=cache):
                            y = var_for(d)
                            add("succ", LabelledFormula(
                                x, subst_var(f.body, f.var, y)))
                            break
                    else:
                        raise SaturationError(
                            f"witness supports {m!r} on the right")
            continue
        if isinstance(f, IExists):
            if tag == "succ":
                if (tag, m) not in universal:
                    universal.append((tag, m))
                if not pool:
                    var_for(sorted(model.domain)[0])
                for y in list(pool):
                    add("succ", LabelledFormula(x, subst_var(f.body, f.var, y)))
            else:
                if not any(LabelledFormula(x, subst_var(f.body, f.var, y)) in gamma
                           for y in pool):
                    for d in sorted(model.domain):
                        if supports(model, frozenset(x), {**g, f.var: d},
                                    f.body, _cache=cache):
                            y = var_for(d)
                            add("ante", LabelledFormula(
                                x, subst_var(f.body, f.var, y)))
                            break
                    else:
                        raise SaturationError(
                            f"witness refutes {m!r} on the left")
            continue
        raise SaturationError(f"not a formula: {f!r}")

    ss = SaturatedSequent(
        tuple(sorted(gamma.items, key=_sort_key)),
        tuple(sorted(delta.items, key=_sort_key)),
        z, tuple(pool), True,
    )
    problems = audit(ss)
    if problems:
        raise SaturationError("closure audit failed: " + "; ".join(problems))
    return ss


# ---------------------------------------------------------------------------
# Closure audit: a direct scan of the saturation conditions


def audit(ss: SaturatedSequent) -> list[str]:
    """All violated closure conditions (empty list = saturated)."""
    gamma = _Side(ss.ante)
    delta = _Side(ss.succ)
    pool = list(ss.pool)
    out: list[str] = []

    def bad(cond: str, m: LabelledFormula) -> None:
        out.append(f"({cond}) fails for {m!r}")

    for m in ss.succ:
        x, f = m.label, m.formula
        if isinstance(f, Atom):
            if not any(lf([k], f) in delta for k in x):
                bad("atR", m)
        elif isinstance(f, And):
            if not (LabelledFormula(x, f.left) in delta
                    or LabelledFormula(x, f.right) in delta):
                bad("andR", m)
        elif isinstance(f, IDisj):
            if not (LabelledFormula(x, f.left) in delta
                    and LabelledFormula(x, f.right) in delta):
                bad("idisjR", m)
        elif isinstance(f, Implies):
            if not any(LabelledFormula(y, f.left) in gamma
                       and LabelledFormula(y, f.right) in delta
                       for y in subsets_nonempty(x)):
                bad("impR", m)
        elif isinstance(f, Forall):
            if not any(LabelledFormula(x, subst_var(f.body, f.var, y)) in delta
                       for y in pool):
                bad("forallR", m)
        elif isinstance(f, IExists):
            if not all(LabelledFormula(x, subst_var(f.body, f.var, y)) in delta
                       for y in pool):
                bad("iexistsR", m)
    for m in ss.ante:
        x, f = m.label, m.formula
        if isinstance(f, And):
            if not (LabelledFormula(x, f.left) in gamma
                    and LabelledFormula(x, f.right) in gamma):
                bad("andL", m)
        elif isinstance(f, IDisj):
            if not (LabelledFormula(x, f.left) in gamma
                    or LabelledFormula(x, f.right) in gamma):
                bad("idisjL", m)
        elif isinstance(f, Implies):
            if not all(LabelledFormula(y, f.left) in delta
                       or LabelledFormula(y, f.right) in gamma
                       for y in subsets_nonempty(x)):
                bad("impL", m)
        elif isinstance(f, Forall):
            if not all(LabelledFormula(x, subst_var(f.body, f.var, y)) in gamma
                       for y in pool):
                bad("forallL", m)
        elif isinstance(f, IExists):
            if not any(LabelledFormula(x, subst_var(f.body, f.var, y)) in gamma
                       for y in pool):
                bad("iexistsL", m)
    return out


# ---------------------------------------------------------------------------
# Derived model


def derived_model(ss: SaturatedSequent) -> tuple[Model, dict[int, int], dict[str, str]]:
    """The countermodel read off a saturated sequent.

    Worlds are the universe labels themselves, the domain is the variable
    pool (or a one-element placeholder when no variables occur), the naming
    and assignment are identities, and a tuple lies in I(P, k) exactly when
    {k}:P(tuple) is absent from the consequent.
    """
    worlds = sorted(ss.universe)
    domain: list[str] = list(ss.pool) if ss.pool else ["d0"]
    sig = collect_signature([m.formula for m in ss.ante + ss.succ])
    delta = _Side(ss.succ)
    interp: dict[tuple[str, int], set] = {}
    for pred, arity in sig.items():
        for k in worlds:
            tuples = set()
            for args in itertools.product(domain, repeat=arity):
                a = Atom(Predicate(pred, arity), tuple(args))
                if lf([k], a) not in delta:
                    tuples.add(tuple(args))
            interp[(pred, k)] = tuples
    model = make_model(worlds, domain, interp, sig)
    naming = {k: k for k in worlds}
    assignment = {v: v for v in ss.pool}
    return model, naming, assignment


def verify_truth_lemma(ss: SaturatedSequent) -> bool:
    """True iff in the derived model every antecedent member is supported and
    every consequent member is not, under the identity naming/assignment."""
    model, naming, assignment = derived_model(ss)
    cache: dict = {}
    for m in ss.ante:
        state = frozenset(naming[k] for k in m.label)
        if not supports(model, state, assignment, m.formula, _cache=cache):
            return False
    for m in ss.succ:
        state = frozenset(naming[k] for k in m.label)
        if supports(model, state, assignment, m.formula, _cache=cache):
            return False
    return True
