"""Labelled sequents, the thirteen-rule calculus, and root-first proof search.

A label is a nonempty finite set of naturals below a fixed capacity; a
labelled formula X:f asserts support of f at the state named by X.  Sequents
are pairs of finite multisets of labelled formulas, kept as tuples so that
checked derivations are faithful to the rules as stated (no silent
contraction).  `premises_of` computes the exact premise list of each rule,
`check_derivation` replays a tree bottom-up against it, and `prove` performs
root-first search: invertible rules are applied eagerly (they never need
backtracking), while left implication and the quantifier instantiation rules
are the only choice points, loop-checked by branch-local histories.

On quantifier-free input the search is a decision procedure; first-order
search is budgeted and may return an inconclusive failure.
"""

from __future__ import annotations

import itertools
import sys
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .syntax import (
    Atom,
    And,
    Bot,
    alpha_canon,
    cache_hash,
    FbinqError,
    Forall,
    Formula,
    FreshVars,
    IDisj,
    IExists,
    Implies,
    ParseError,
    RESERVED_PREFIX,
    free_vars,
    all_vars,
    is_subformula_instance,
    latex,
    parse,
    parse_internal,
    pprint,
    subst_var,
)

LABEL_CAP = 62

# proof search and checking recurse once per decomposition step; deep
# sequents at larger bounds legitimately exceed the default stack limit
if sys.getrecursionlimit() < 100_000:
    sys.setrecursionlimit(100_000)

_DEEP_STACK_BYTES = 512 * 1024 * 1024


def run_with_deep_stack(fn, *args, **kwargs):
    """Run fn in a worker thread with a large stack.

    Search and derivation traversal recurse once per decomposition step,
    which on worst-case sequents overflows the default C stack long before
    any memory limit is reached.
    """
    out: list = []
    err: list = []

    def runner():
        try:
            out.append(fn(*args, **kwargs))
        except BaseException as e:  # re-raised in the calling thread
            err.append(e)

    old = threading.stack_size(_DEEP_STACK_BYTES)
    try:
        th = threading.Thread(target=runner)
        th.start()
        th.join()
    finally:
        threading.stack_size(old)
    if err:
        raise err[0]
    return out[0]


class LabelError(FbinqError):
    pass


class RuleError(FbinqError):
    """Rule application violates a side condition or does not fit the sequent."""


class CheckError(FbinqError):
    """Derivation checking failure, with the path to the offending node."""

    def __init__(self, path: tuple[int, ...], message: str,
                 expected=None, found=None):
        loc = "root" if not path else "node " + ".".join(str(i) for i in path)
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.expected = expected
        self.found = found


def label(elements: Iterable[int]) -> frozenset[int]:
    xs = frozenset(elements)
    if not xs:
        raise LabelError("labels must be nonempty")
    for k in xs:
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise LabelError(f"label element {k!r} is not a natural number")
        if k >= LABEL_CAP:
            raise LabelError(f"label element {k} exceeds capacity {LABEL_CAP}")
    return xs


def label_text(x: frozenset[int]) -> str:
    return "{" + ",".join(str(k) for k in sorted(x)) + "}"


@cache_hash
@dataclass(frozen=True, repr=False)
class LabelledFormula:
    label: frozenset[int]
    formula: Formula

    def __post_init__(self) -> None:
        object.__setattr__(self, "label", label(self.label))

    def __repr__(self) -> str:
        return f"{label_text(self.label)}:{pprint(self.formula)}"


def lf(elements: Iterable[int], formula: Formula) -> LabelledFormula:
    return LabelledFormula(frozenset(elements), formula)


@dataclass(frozen=True, repr=False)
class Sequent:
    ante: tuple[LabelledFormula, ...]
    succ: tuple[LabelledFormula, ...]

    def __repr__(self) -> str:
        return sequent_to_text(self)

    def members(self) -> Iterator[LabelledFormula]:
        yield from self.ante
        yield from self.succ

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for m in self.members():
            out |= free_vars(m.formula)
        return out

    def all_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for m in self.members():
            out |= all_vars(m.formula)
        return out


def sequent(ante: Iterable[LabelledFormula], succ: Iterable[LabelledFormula]) -> Sequent:
    return Sequent(tuple(ante), tuple(succ))


def initial_sequent(f: Formula, bound: int) -> Sequent:
    """The goal sequent  =>  {1,...,bound}:f."""
    if bound < 1:
        raise LabelError("bound must be at least 1")
    return sequent((), (lf(range(1, bound + 1), f),))


def _canon_lf(m: LabelledFormula) -> tuple:
    return (m.label, alpha_canon(m.formula))


def multiset_equal(a: Sequent, b: Sequent) -> bool:
    """Multiset equality of the two sides, modulo bound-variable renaming."""
    return (Counter(map(_canon_lf, a.ante)) == Counter(map(_canon_lf, b.ante))
            and Counter(map(_canon_lf, a.succ)) == Counter(map(_canon_lf, b.succ)))


# ---------------------------------------------------------------------------
# Rules

RULE_TAGS = frozenset({
    "id", "botL", "atR", "andR", "andL", "idisjR", "idisjL",
    "impR", "impL", "forallR", "forallL", "iexistsR", "iexistsL",
})

_LEAF_TAGS = frozenset({"id", "botL"})


@dataclass(frozen=True)
class RuleApplication:
    """A rule tag plus the data needed to recompute its premises.

    `side`/`index` locate the principal formula; `subset` is the Y parameter
    of impL, `var` the instantiation variable of forallL/iexistsR or the
    eigenvariable of forallR/iexistsL; `cut_formula` is set on cut nodes only.
    """

    rule: str
    side: str | None = None
    index: int | None = None
    subset: frozenset[int] | None = None
    var: str | None = None
    cut_formula: LabelledFormula | None = None

    def __post_init__(self) -> None:
        if self.rule not in RULE_TAGS and self.rule != "cut":
            raise RuleError(f"unknown rule tag {self.rule!r}")


@dataclass(frozen=True)
class Derivation:
    conclusion: Sequent
    rule: RuleApplication
    premises: tuple[Derivation, ...]

    @property
    def height(self) -> int:
        return 1 + max((p.height for p in self.premises), default=0)

    def nodes(self) -> Iterator[Derivation]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def rules_used(self) -> frozenset[str]:
        return frozenset(n.rule.rule for n in self.nodes())


def subsets_nonempty(x: frozenset[int]) -> list[frozenset[int]]:
    """The nonempty subsets of x in (cardinality, lexicographic) order."""
    if len(x) > 16:
        raise LabelError(f"label of size {len(x)} too large to enumerate subsets")
    elems = sorted(x)
    out = []
    for r in range(1, len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            out.append(frozenset(combo))
    return out


def _principal(seq: Sequent, app: RuleApplication) -> LabelledFormula:
    if app.side not in ("ante", "succ"):
        raise RuleError(f"bad principal side {app.side!r}")
    side = seq.ante if app.side == "ante" else seq.succ
    if app.index is None or not (0 <= app.index < len(side)):
        raise RuleError(f"principal index {app.index} out of range")
    return side[app.index]


def _replace(side: tuple, i: int, *new) -> tuple:
    return side[:i] + tuple(new) + side[i + 1:]


def is_initial(seq: Sequent) -> str | None:
    """Leaf tag for initial sequents: id, botL, or None."""
    succ_atoms = [m for m in seq.succ if isinstance(m.formula, Atom)]
    for m in seq.ante:
        if isinstance(m.formula, Atom):
            for n in succ_atoms:
                if m.formula == n.formula and m.label >= n.label:
                    return "id"
    for m in seq.ante:
        if isinstance(m.formula, Bot):
            return "botL"
    return None


def premises_of(seq: Sequent, app: RuleApplication) -> list[Sequent]:
    """The exact premise list of the rule application, contexts preserved."""
    tag = app.rule
    if tag in _LEAF_TAGS:
        if is_initial(seq) is None or (tag == "botL" and not any(
                isinstance(m.formula, Bot) for m in seq.ante)):
            raise RuleError(f"sequent is not initial for {tag}")
        if tag == "id" and is_initial(seq) != "id":
            raise RuleError("no matching atom pair for id")
        return []
    if tag == "cut":
        raise RuleError("cut premises are not determined by the conclusion")

    p = _principal(seq, app)
    x, f = p.label, p.formula

    if tag == "atR":
        if app.side != "succ" or not isinstance(f, Atom):
            raise RuleError("atR needs an atom on the right")
        return [Sequent(seq.ante, _replace(seq.succ, app.index, lf([k], f)))
                for k in sorted(x)]

    if tag == "andR":
        if app.side != "succ" or not isinstance(f, And):
            raise RuleError("andR needs a conjunction on the right")
        return [Sequent(seq.ante, _replace(seq.succ, app.index, LabelledFormula(x, g)))
                for g in (f.left, f.right)]

    if tag == "andL":
        if app.side != "ante" or not isinstance(f, And):
            raise RuleError("andL needs a conjunction on the left")
        return [Sequent(_replace(seq.ante, app.index,
                                 LabelledFormula(x, f.left), LabelledFormula(x, f.right)),
                        seq.succ)]

    if tag == "idisjR":
        if app.side != "succ" or not isinstance(f, IDisj):
            raise RuleError("idisjR needs an inquisitive disjunction on the right")
        return [Sequent(seq.ante, _replace(seq.succ, app.index,
                                           LabelledFormula(x, f.left),
                                           LabelledFormula(x, f.right)))]

    if tag == "idisjL":
        if app.side != "ante" or not isinstance(f, IDisj):
            raise RuleError("idisjL needs an inquisitive disjunction on the left")
        return [Sequent(_replace(seq.ante, app.index, LabelledFormula(x, g)), seq.succ)
                for g in (f.left, f.right)]

    if tag == "impR":
        if app.side != "succ" or not isinstance(f, Implies):
            raise RuleError("impR needs an implication on the right")
        return [Sequent((LabelledFormula(y, f.left),) + seq.ante,
                        _replace(seq.succ, app.index, LabelledFormula(y, f.right)))
                for y in subsets_nonempty(x)]

    if tag == "impL":
        if app.side != "ante" or not isinstance(f, Implies):
            raise RuleError("impL needs an implication on the left")
        if app.subset is None or not app.subset or not app.subset <= x:
            raise RuleError("impL needs a nonempty parameter Y with X ⊇ Y")
        y = label(app.subset)
        return [
            Sequent(seq.ante, seq.succ + (LabelledFormula(y, f.left),)),
            Sequent((LabelledFormula(y, f.right),) + seq.ante, seq.succ),
        ]

    if tag in ("forallR", "iexistsL"):
        want = Forall if tag == "forallR" else IExists
        want_side = "succ" if tag == "forallR" else "ante"
        if app.side != want_side or not isinstance(f, want):
            raise RuleError(f"{tag} principal mismatch")
        z = app.var
        if z is None:
            raise RuleError(f"{tag} needs an eigenvariable")
        conc_vars = seq.free_vars()
        if z in conc_vars:
            raise RuleError(f"eigenvariable {z} occurs in the conclusion")
        inst = LabelledFormula(x, subst_var(f.body, f.var, z))
        if tag == "forallR":
            return [Sequent(seq.ante, _replace(seq.succ, app.index, inst))]
        return [Sequent(_replace(seq.ante, app.index, inst), seq.succ)]

    if tag in ("forallL", "iexistsR"):
        want = Forall if tag == "forallL" else IExists
        want_side = "ante" if tag == "forallL" else "succ"
        if app.side != want_side or not isinstance(f, want):
            raise RuleError(f"{tag} principal mismatch")
        y = app.var
        if y is None:
            raise RuleError(f"{tag} needs an instantiation variable")
        inst = LabelledFormula(x, subst_var(f.body, f.var, y))
        if tag == "forallL":
            # principal repeated: X:f[y/x], X:forall x.f, context
            return [Sequent((inst,) + seq.ante, seq.succ)]
        return [Sequent(seq.ante, seq.succ + (inst,))]

    raise RuleError(f"unknown rule tag {tag!r}")


def check_derivation(d: Derivation, allow_cut: bool = False) -> None:
    """Verify every node of the tree; raises CheckError on the first failure."""
    run_with_deep_stack(_check, d, (), allow_cut)


def _check(d: Derivation, path: tuple[int, ...], allow_cut: bool) -> None:
    tag = d.rule.rule
    if tag == "cut":
        if not allow_cut:
            raise CheckError(path, "cut node in a derivation required to be cut-free")
        _check_cut(d, path)
    elif tag in _LEAF_TAGS:
        if d.premises:
            raise CheckError(path, f"{tag} leaf has premises")
        try:
            premises_of(d.conclusion, d.rule)
        except RuleError as e:
            raise CheckError(path, str(e)) from e
    else:
        try:
            expected = premises_of(d.conclusion, d.rule)
        except RuleError as e:
            raise CheckError(path, str(e)) from e
        if len(expected) != len(d.premises):
            raise CheckError(
                path,
                f"{tag} expects {len(expected)} premises, found {len(d.premises)}",
                expected=expected, found=[p.conclusion for p in d.premises],
            )
        for i, (want, got) in enumerate(zip(expected, d.premises)):
            if not multiset_equal(want, got.conclusion):
                raise CheckError(
                    path + (i,),
                    f"premise {i} of {tag} does not match the rule",
                    expected=want, found=got.conclusion,
                )
    for i, p in enumerate(d.premises):
        _check(p, path + (i,), allow_cut)


def _check_cut(d: Derivation, path: tuple[int, ...]) -> None:
    cf = d.rule.cut_formula
    if cf is None or len(d.premises) != 2:
        raise CheckError(path, "cut needs a cut formula and two premises")
    left, right = d.premises[0].conclusion, d.premises[1].conclusion
    lsucc = Counter(left.succ)
    rante = Counter(right.ante)
    if lsucc[cf] < 1:
        raise CheckError(path, "cut formula missing from left premise succedent")
    if rante[cf] < 1:
        raise CheckError(path, "cut formula missing from right premise antecedent")
    lsucc[cf] -= 1
    rante[cf] -= 1
    want_ante = Counter(left.ante) + rante
    want_succ = lsucc + Counter(right.succ)
    if Counter(d.conclusion.ante) != +want_ante or Counter(d.conclusion.succ) != +want_succ:
        raise CheckError(path, "cut conclusion does not combine the premise contexts",
                         expected=(+want_ante, +want_succ), found=d.conclusion)


def check_ok(d: Derivation, allow_cut: bool = False) -> bool:
    try:
        check_derivation(d, allow_cut=allow_cut)
        return True
    except CheckError:
        return False


def search_space_subexpressions(d: Derivation) -> bool:
    """True iff every labelled formula in the tree is a subexpression of a root
    formula: subformula instance with label contained in the root label."""
    roots = list(d.conclusion.members())
    for node in d.nodes():
        for m in node.conclusion.members():
            if not any(m.label <= r.label and is_subformula_instance(m.formula, r.formula)
                       for r in roots):
                return False
    return True


def quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Bot, Atom)):
        return True
    if isinstance(f, (And, Implies, IDisj)):
        return quantifier_free(f.left) and quantifier_free(f.right)
    return False


class _QfOracle:
    """Exact validity oracle for quantifier-free sequents.

    Quantifier-free formulas treat each atom as a propositional letter, so a
    sequent over the label universe is valid at this bound iff no assignment
    of world sets to the letters makes every antecedent member supported and
    every succedent member unsupported.  The search only ever visits sequents
    built from subformulas of the root with labels inside the root universe,
    so one letter/world table covers the whole search; by soundness and
    completeness of the calculus at the bound, "valid" coincides with
    "provable" and the oracle can prune invalid sequents immediately.

    States are bitmasks over the root's worlds; `None` is returned from
    `make` when the letter/world table is too large to enumerate.
    """

    CELL_CAP = 14

    @staticmethod
    def make(seq: Sequent) -> "_QfOracle | None":
        if not all(quantifier_free(m.formula) for m in seq.members()):
            return None
        worlds = sorted(set().union(frozenset(), *[m.label for m in seq.members()]))
        letters = sorted({(a.pred.name, a.args)
                          for m in seq.members() for a in _atoms(m.formula)})
        if len(worlds) * len(letters) > _QfOracle.CELL_CAP:
            return None
        return _QfOracle(worlds, letters)

    def __init__(self, worlds, letters):
        self.bit = {w: 1 << i for i, w in enumerate(worlds)}
        nw = len(worlds)
        full = (1 << nw) - 1
        n_interps = 1 << (nw * len(letters))
        self.ones = (1 << n_interps) - 1
        # atom_bits[(letter, state mask)]: bitset over interpretations in
        # which the state supports the letter (state worlds all satisfy it)
        self.atom_bits: dict = {}
        for li, L in enumerate(letters):
            shift = li * nw
            for mask in range(1 << nw):
                bits = 0
                for idx in range(n_interps):
                    if mask & ~((idx >> shift) & full) == 0:
                        bits |= 1 << idx
                self.atom_bits[(L, mask)] = bits
        self.tab: dict = {}

    def _mask(self, label) -> int:
        out = 0
        for w in label:
            out |= self.bit[w]
        return out

    def _bits(self, f: Formula, mask: int) -> int:
        """Bitset over interpretations in which the state supports `f`."""
        key = (f, mask)
        hit = self.tab.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = self.atom_bits.get(((f.pred.name, f.args), mask),
                                     self.ones if mask == 0 else 0)
        elif isinstance(f, Bot):
            out = self.ones if mask == 0 else 0
        elif isinstance(f, And):
            out = self._bits(f.left, mask) & self._bits(f.right, mask)
        elif isinstance(f, IDisj):
            out = self._bits(f.left, mask) | self._bits(f.right, mask)
        else:  # Implies: every substate supporting the left supports the right
            out = self.ones
            sub = mask
            while True:
                out &= ~self._bits(f.left, sub) | self._bits(f.right, sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mask
            out &= self.ones
        self.tab[key] = out
        return out

    def valid(self, ante, succ) -> bool:
        acc = self.ones
        for m in ante:
            acc &= self._bits(m.formula, self._mask(m.label))
            if not acc:
                return True
        for m in succ:
            acc &= self.ones & ~self._bits(m.formula, self._mask(m.label))
            if not acc:
                return True
        return False


# ---------------------------------------------------------------------------
# Proof search


@dataclass
class SearchConfig:
    """Budgets for root-first search.

    `inst_budget` caps the number of forallL/iexistsR applications per branch
    and `fresh_budget` the number of fresh instantiation variables per branch.
    `eigen_budget` caps forallR/iexistsL applications per branch: those rules
    are invertible, but without a cap a single branch can diverge by minting
    ever-new eigenvariables whose instances keep resurfacing the quantifier.
    All three are irrelevant on quantifier-free input, where the search
    terminates and decides the sequent.  `node_budget`, if set, caps the total number of
    visited nodes; exceeding it aborts the search with a budget failure
    rather than running arbitrarily long on sequents whose smallest
    derivations are enormous.  Set it to None to search without a cap.
    The classical fast path prunes singleton-label quantifier-free sequents
    that a classical truth table refutes (sound by soundness of the calculus;
    it never produces derivations by itself).
    """

    inst_budget: int = 8
    fresh_budget: int = 2
    eigen_budget: int = 6
    node_budget: int | None = 50_000
    classical_fast_path: bool = False


def _var_recency(v: str):
    """Sort key putting internally generated variables first, newest first."""
    if v.startswith(RESERVED_PREFIX + "v"):
        try:
            return (0, -int(v[2:]), "")
        except ValueError:
            pass
    return (1, 0, v)


class _NodeBudgetExhausted(Exception):
    """Raised inside search when the node budget runs out; aborts the whole
    search immediately instead of failing one branch at a time."""


@dataclass
class Failure:
    reason: str  # "refuted" | "budget" | "inconclusive"
    stuck: Sequent | None = None


def prove(seq: Sequent, cfg: SearchConfig | None = None) -> Derivation | Failure:
    """Root-first proof search.

    Returns a checking Derivation, or a Failure whose reason is "refuted"
    (quantifier-free input: the calculus is a decision procedure there),
    "budget" (a first-order budget was hit) or "inconclusive".
    """
    cfg = cfg or SearchConfig()
    p = _Prover(cfg, seq.all_vars(), oracle=_QfOracle.make(seq))
    pa, _ = _dedupe(seq.ante)
    ps, _ = _dedupe(seq.succ)
    try:
        found = run_with_deep_stack(p.search, pa, ps, 0, 0)
    except _NodeBudgetExhausted:
        return Failure("budget", p.stuck)
    if found:
        return run_with_deep_stack(p.build, seq)
    if p.budget_hits:
        return Failure("budget", p.stuck)
    if all(quantifier_free(m.formula) for m in seq.members()):
        return Failure("refuted", p.stuck)
    return Failure("inconclusive", p.stuck)


def prove_formula(f: Formula, bound: int, cfg: SearchConfig | None = None):
    return prove(initial_sequent(f, bound), cfg)


def _key(ante, succ):
    # search inputs are duplicate-free, so plain frozensets identify them
    return (frozenset(ante), frozenset(succ))


def _dedupe(members):
    """Split a member tuple into first occurrences and dropped duplicates."""
    seen = set()
    kept = []
    dropped = []
    for m in members:
        if m in seen:
            dropped.append(m)
        else:
            seen.add(m)
            kept.append(m)
    return tuple(kept), dropped


class _Prover:
    """Root-first search over duplicate-free sequents.

    `search` only decides provability; on success it records for each
    visited sequent which rule closed it (the "policy": rule tag, side,
    principal member by value, subset/var parameter).  `build` then
    reconstructs a checkable derivation for an exact multiset sequent by
    replaying the policy, re-inserting dropped duplicate members with
    admissible weakening.  Keeping derivation construction out of the search
    loop makes repeated provability queries (as used by saturation) cheap.
    """

    def __init__(self, cfg: SearchConfig, avoid_vars: Iterable[str],
                 oracle: _QfOracle | None = None):
        self.cfg = cfg
        self.oracle = oracle
        self.fresh = FreshVars(avoid_vars)
        self.ok: dict = {}
        # failed searches, keyed by sequent; each entry records the used
        # budgets of the failing attempt plus whether a budget limit
        # contributed.  A failure subsumes any query with at least as much
        # budget already used, since that only restricts the available moves
        # further; the budget flag is replayed on hits so inconclusiveness is
        # still reported.
        self.fail: dict = {}
        self.budget_hits = 0
        self.nodes = 0
        self.stuck: Sequent | None = None
        # loop control: sequents currently being searched on the stack; a
        # re-entry cannot contribute a well-founded proof and fails for that
        # path.  Such context-dependent failures are memoized together with
        # the set of in-progress ancestors they were cut off at, and replayed
        # only while all of those ancestors are again on the stack.
        self.active: set = set()
        self.dep_stack: list[set] = []
        self.red: dict = {}

    def _reduce(self, ante, succ):
        """Greedily drop members while the sequent stays oracle-valid.

        A valid sub-sequent is provable, and the full sequent then follows
        by admissible weakening (restored in `build`), so searching the core
        instead collapses the many context variants of one proof obligation
        into a single search state.
        """
        if self.oracle is None or not self.oracle.valid(ante, succ):
            return ante, succ
        key = _key(ante, succ)
        hit = self.red.get(key)
        if hit is not None:
            return hit
        a, s = list(ante), list(succ)
        for which in ("succ", "ante"):
            lst = s if which == "succ" else a
            i = 0
            while i < len(lst):
                trial = lst[:i] + lst[i + 1:]
                va, vs = (a, trial) if which == "succ" else (trial, s)
                if self.oracle.valid(va, vs):
                    del lst[i]
                else:
                    i += 1
        core = (tuple(a), tuple(s))
        self.red[key] = core
        return core

    def search(self, ante, succ, inst_used, fresh_used, eigen_used=0) -> bool:
        key = _key(ante, succ)
        if key in self.ok:
            return True
        core = self._reduce(ante, succ)
        # searching the core instead is only a shortcut: when it is an
        # ancestor still in progress (or its search fails near a cycle),
        # fall through to the ordinary search of the full sequent
        if core != (ante, succ) and _key(*core) not in self.active:
            if self.search(*core, inst_used, fresh_used, eigen_used):
                self.ok[key] = ("reduce", None, None, core, None)
                return True
        if key in self.active:
            if self.dep_stack:
                self.dep_stack[-1].add(key)
            return False
        for iu, fu, eu, hit_budget, deps in self.fail.get(key, ()):
            if (iu <= inst_used and fu <= fresh_used and eu <= eigen_used
                    and deps <= self.active):
                if hit_budget:
                    self.budget_hits += 1
                if deps and self.dep_stack:
                    self.dep_stack[-1] |= deps
                return False
        budget_before = self.budget_hits
        self.active.add(key)
        self.dep_stack.append(set())
        try:
            pol = self._step(ante, succ, inst_used, fresh_used, eigen_used)
        finally:
            deps = self.dep_stack.pop()
            self.active.discard(key)
        deps.discard(key)
        if self.dep_stack:
            self.dep_stack[-1] |= deps
        if pol is not None:
            self.ok[key] = pol
            return True
        self.fail.setdefault(key, []).append(
            (inst_used, fresh_used, eigen_used,
             self.budget_hits != budget_before, frozenset(deps)))
        return False

    def build(self, seq: Sequent) -> Derivation:
        """Reconstruct a checkable derivation of `seq` from the policy."""
        pa, dropped_a = _dedupe(seq.ante)
        ps, dropped_s = _dedupe(seq.succ)
        core = Sequent(pa, ps)
        tag, side, principal, subset, var = self.ok[_key(pa, ps)]
        if tag in ("id", "botL"):
            d = Derivation(core, RuleApplication(tag), ())
        elif tag == "reduce":
            from .transform import weaken
            core_a, core_s = subset
            d = self.build(Sequent(core_a, core_s))
            kept_a, kept_s = set(core_a), set(core_s)
            for m in pa:
                if m not in kept_a:
                    d = weaken(d, "ante", m)
            for m in ps:
                if m not in kept_s:
                    d = weaken(d, "succ", m)
        else:
            members = pa if side == "ante" else ps
            app = RuleApplication(tag, side, members.index(principal),
                                  subset=subset, var=var)
            children = tuple(self.build(p) for p in premises_of(core, app))
            d = Derivation(core, app, children)
        if dropped_a or dropped_s:
            from .transform import weaken
            for m in dropped_a:
                d = weaken(d, "ante", m)
            for m in dropped_s:
                d = weaken(d, "succ", m)
        return d

    def _apply(self, ante, succ, app, inst_used, fresh_used, eigen_used):
        """Commit to a rule: all premises must close (searched duplicate-free)."""
        seq = Sequent(ante, succ)
        for prem in premises_of(seq, app):
            pa, _ = _dedupe(prem.ante)
            ps, _ = _dedupe(prem.succ)
            if not self.search(pa, ps, inst_used, fresh_used, eigen_used):
                return None
        principal = None
        if app.index is not None:
            principal = (ante if app.side == "ante" else succ)[app.index]
        return (app.rule, app.side, principal, app.subset, app.var)

    def _step(self, ante, succ, inst_used, fresh_used, eigen_used):
        self.nodes += 1
        if self.cfg.node_budget is not None and self.nodes > self.cfg.node_budget:
            self.budget_hits += 1
            raise _NodeBudgetExhausted
        leaf = is_initial(Sequent(ante, succ))
        if leaf is not None:
            return (leaf, None, None, None, None)

        if self.oracle is not None and not self.oracle.valid(ante, succ):
            return None

        if self.cfg.classical_fast_path and self._classically_refuted(ante, succ):
            return None

        args = (inst_used, fresh_used, eigen_used)

        # single-premise invertible rules
        for i, m in enumerate(ante):
            if isinstance(m.formula, And):
                return self._apply(ante, succ, RuleApplication("andL", "ante", i), *args)
        for j, m in enumerate(succ):
            if isinstance(m.formula, IDisj):
                return self._apply(ante, succ, RuleApplication("idisjR", "succ", j), *args)
        # eigenvariable rules are invertible but, uncapped, they let a branch
        # diverge by minting ever-new variables (each feeding implication
        # decompositions that surface the universal again); a per-branch cap
        # turns that divergence into an honest budget failure
        eigen_blocked = False
        eigen_args = (inst_used, fresh_used, eigen_used + 1)
        conc_vars = None
        for j, m in enumerate(succ):
            if isinstance(m.formula, Forall):
                if eigen_used >= self.cfg.eigen_budget:
                    eigen_blocked = True
                    break
                conc_vars = Sequent(ante, succ).all_vars()
                z = self.fresh.take(conc_vars)
                return self._apply(ante, succ,
                                   RuleApplication("forallR", "succ", j, var=z),
                                   *eigen_args)
        for i, m in enumerate(ante):
            if isinstance(m.formula, IExists):
                if eigen_used >= self.cfg.eigen_budget:
                    eigen_blocked = True
                    break
                conc_vars = Sequent(ante, succ).all_vars()
                z = self.fresh.take(conc_vars)
                return self._apply(ante, succ,
                                   RuleApplication("iexistsL", "ante", i, var=z),
                                   *eigen_args)

        def done(pol):
            if pol is None and eigen_blocked:
                self.budget_hits += 1
            return pol

        # branching invertible rules
        for j, m in enumerate(succ):
            if isinstance(m.formula, And):
                return done(self._apply(ante, succ, RuleApplication("andR", "succ", j), *args))
        for i, m in enumerate(ante):
            if isinstance(m.formula, IDisj):
                return done(self._apply(ante, succ, RuleApplication("idisjL", "ante", i), *args))
        for j, m in enumerate(succ):
            if isinstance(m.formula, Atom) and len(m.label) >= 2:
                return done(self._apply(ante, succ, RuleApplication("atR", "succ", j), *args))
        for j, m in enumerate(succ):
            if isinstance(m.formula, Implies):
                return done(self._apply(ante, succ, RuleApplication("impR", "succ", j), *args))

        return done(self._choice_stage(ante, succ, inst_used, fresh_used, eigen_used))

    def _choice_stage(self, ante, succ, inst_used, fresh_used, eigen_used):
        seq = Sequent(ante, succ)
        ante_set = set(ante)
        succ_set = set(succ)
        truncated = False

        # left implication moves; a move is skipped when either premise
        # would repeat the current sequent up to contraction.  With the
        # oracle available, commit to the first move both of whose premises
        # are valid: valid premises are provable by completeness, so no
        # backtracking over moves is needed.
        for i, m in enumerate(ante):
            if not isinstance(m.formula, Implies):
                continue
            for y in subsets_nonempty(m.label):
                if (LabelledFormula(y, m.formula.left) in succ_set
                        or LabelledFormula(y, m.formula.right) in ante_set):
                    continue
                app = RuleApplication("impL", "ante", i, subset=y)
                if self.oracle is not None and not all(
                        self.oracle.valid(p.ante, p.succ)
                        for p in premises_of(seq, app)):
                    continue
                d = self._apply(ante, succ, app, inst_used, fresh_used, eigen_used)
                if d is not None:
                    return d

        # quantifier instantiation moves
        quant_positions = (
            [("forallL", "ante", i, m) for i, m in enumerate(ante)
             if isinstance(m.formula, Forall)]
            + [("iexistsR", "succ", j, m) for j, m in enumerate(succ)
               if isinstance(m.formula, IExists)]
        )
        if quant_positions:
            if inst_used >= self.cfg.inst_budget:
                truncated = True
            else:
                # newest eigenvariables first: derivations of quantified
                # schemes almost always instantiate a universal at the
                # eigenvariable that was just introduced
                pool = sorted(seq.free_vars(), key=_var_recency)
                for tag, side, i, m in quant_positions:
                    members = ante_set if side == "ante" else succ_set
                    for y in pool:
                        inst = LabelledFormula(
                            m.label, subst_var(m.formula.body, m.formula.var, y))
                        if inst in members:
                            continue  # redundant up to contraction
                        app = RuleApplication(tag, side, i, var=y)
                        d = self._apply(ante, succ, app,
                                        inst_used + 1, fresh_used, eigen_used)
                        if d is not None:
                            return d
                if fresh_used >= self.cfg.fresh_budget:
                    truncated = True
                else:
                    for tag, side, i, m in quant_positions:
                        y = self.fresh.take()
                        app = RuleApplication(tag, side, i, var=y)
                        d = self._apply(ante, succ, app,
                                        inst_used + 1, fresh_used + 1, eigen_used)
                        if d is not None:
                            return d

        if truncated:
            self.budget_hits += 1
        elif self.stuck is None:
            self.stuck = seq
        return None

    def _classically_refuted(self, ante, succ) -> bool:
        members = list(ante) + list(succ)
        if not all(len(m.label) == 1 and quantifier_free(m.formula) for m in members):
            return False
        cells = sorted({
            (next(iter(m.label)), a.pred.name, a.args)
            for m in members
            for a in _atoms(m.formula)
        })
        if len(cells) > 16:
            return False

        def ev(f: Formula, k: int, v: dict) -> bool:
            if isinstance(f, Bot):
                return False
            if isinstance(f, Atom):
                return v[(k, f.pred.name, f.args)]
            if isinstance(f, And):
                return ev(f.left, k, v) and ev(f.right, k, v)
            if isinstance(f, IDisj):
                return ev(f.left, k, v) or ev(f.right, k, v)
            return not ev(f.left, k, v) or ev(f.right, k, v)

        for bits in itertools.product([False, True], repeat=len(cells)):
            v = dict(zip(cells, bits))
            if all(ev(m.formula, next(iter(m.label)), v) for m in ante) and not any(
                    ev(m.formula, next(iter(m.label)), v) for m in succ):
                return True
        return False


def _atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Implies, IDisj)):
        yield from _atoms(f.left)
        yield from _atoms(f.right)
    elif isinstance(f, (Forall, IExists)):
        yield from _atoms(f.body)


# ---------------------------------------------------------------------------
# Serialization


def labelled_to_json(m: LabelledFormula) -> dict:
    return {"label": sorted(m.label), "formula": pprint(m.formula)}


def labelled_from_json(data: dict, sig: dict[str, int]) -> LabelledFormula:
    return lf(data["label"], parse_internal(data["formula"], sig))


def sequent_to_json(s: Sequent) -> dict:
    return {"ante": [labelled_to_json(m) for m in s.ante],
            "succ": [labelled_to_json(m) for m in s.succ]}


def sequent_from_json(data: dict, sig: dict[str, int] | None = None) -> Sequent:
    sig = {} if sig is None else sig
    return Sequent(tuple(labelled_from_json(m, sig) for m in data["ante"]),
                   tuple(labelled_from_json(m, sig) for m in data["succ"]))


def derivation_to_json(d: Derivation) -> dict:
    out: dict = {"rule": d.rule.rule, "conclusion": sequent_to_json(d.conclusion)}
    params: dict = {}
    if d.rule.side is not None:
        out["principal"] = {"side": d.rule.side, "index": d.rule.index}
    if d.rule.subset is not None:
        params["Y"] = sorted(d.rule.subset)
    if d.rule.var is not None:
        key = "eigen" if d.rule.rule in ("forallR", "iexistsL") else "var"
        params[key] = d.rule.var
    if d.rule.cut_formula is not None:
        params["cutFormula"] = labelled_to_json(d.rule.cut_formula)
    out["params"] = params
    out["premises"] = [derivation_to_json(p) for p in d.premises]
    return out


def derivation_from_json(data: dict, sig: dict[str, int] | None = None) -> Derivation:
    sig = {} if sig is None else sig
    params = data.get("params", {})
    principal = data.get("principal", {})
    app = RuleApplication(
        rule=data["rule"],
        side=principal.get("side"),
        index=principal.get("index"),
        subset=frozenset(params["Y"]) if "Y" in params else None,
        var=params.get("eigen", params.get("var")),
        cut_formula=(labelled_from_json(params["cutFormula"], sig)
                     if "cutFormula" in params else None),
    )
    return Derivation(
        sequent_from_json(data["conclusion"], sig),
        app,
        tuple(derivation_from_json(p, sig) for p in data.get("premises", [])),
    )


def sequent_to_text(s: Sequent) -> str:
    def side(ms):
        return ", ".join(f"{label_text(m.label)}:{pprint(m.formula)}" for m in ms)
    return f"{side(s.ante)} => {side(s.succ)}".strip()


def sequent_from_text(text: str, internal: bool = False,
                      sig: dict[str, int] | None = None) -> Sequent:
    if text.count("=>") != 1:
        raise ParseError("sequent must contain exactly one '=>'", 0)
    left, right = text.split("=>")
    sig = {} if sig is None else sig
    reader = parse_internal if internal else parse

    def side(part: str) -> tuple[LabelledFormula, ...]:
        out = []
        for item in _split_top(part):
            item = item.strip()
            if not item.startswith("{"):
                raise ParseError(f"labelled formula must start with a label: {item!r}", 0)
            close = item.index("}")
            elems = [int(k) for k in item[1:close].split(",")]
            rest = item[close + 1:].lstrip()
            if not rest.startswith(":"):
                raise ParseError(f"missing ':' after label in {item!r}", 0)
            out.append(lf(elems, reader(rest[1:], sig)))
        return tuple(out)

    return Sequent(side(left), side(right))


def _split_top(text: str) -> list[str]:
    """Split on commas not nested in parentheses or braces."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    tail = text[start:]
    if tail.strip() or parts:
        parts.append(tail)
    return [p for p in parts if p.strip()]


_RULE_LATEX = {
    "id": "id", "botL": r"\bot\Rightarrow", "atR": r"\Rightarrow\mathrm{at}",
    "andR": r"\Rightarrow\wedge", "andL": r"\wedge\Rightarrow",
    "idisjR": r"\Rightarrow\inqd", "idisjL": r"\inqd\Rightarrow",
    "impR": r"\Rightarrow\to", "impL": r"\to\Rightarrow",
    "forallR": r"\Rightarrow\forall", "forallL": r"\forall\Rightarrow",
    "iexistsR": r"\Rightarrow\inqe", "iexistsL": r"\inqe\Rightarrow",
    "cut": r"\mathit{cut}",
}


def sequent_to_latex(s: Sequent) -> str:
    def side(ms):
        return ", ".join(
            rf"\{{{','.join(str(k) for k in sorted(m.label))}\}}{{:}}{latex(m.formula)}"
            for m in ms)
    return rf"{side(s.ante)} \Rightarrow {side(s.succ)}"


def derivation_to_latex(d: Derivation) -> str:
    """Nested proof-tree rendering using the `\\infer` macro."""
    if not d.premises:
        return (rf"\infer[({_RULE_LATEX[d.rule.rule]})]"
                rf"{{{sequent_to_latex(d.conclusion)}}}{{}}")
    prems = " & ".join(derivation_to_latex(p) for p in d.premises)
    return (rf"\infer[({_RULE_LATEX[d.rule.rule]})]"
            rf"{{{sequent_to_latex(d.conclusion)}}}{{{prems}}}")
