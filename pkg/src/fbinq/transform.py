"""Admissible-rule transformers on checked derivations.

Substitution, weakening, inversion and contraction are height-preserving
rewrites; `mon` (lifting an antecedent label to a superset) and the negation
macro-rules are built from persistency derivations plus cut; `eliminate_cut`
removes explicit cut nodes by the usual lexicographic induction on (cut
formula size, combined premise height), with the leaf and right-atomic cases
handled specially since atoms on the right can be principal in two rules.

All outputs are ordinary `Derivation` trees accepted by `check_derivation`;
none of the constructions here introduces an atR node unless the input
contained one, which is what makes the schematic-substitution transformer
applicable to them.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from .syntax import (
    Atom,
    And,
    Bot,
    BOT,
    FbinqError,
    Forall,
    Formula,
    FreshVars,
    IDisj,
    IExists,
    Implies,
    Predicate,
    all_vars,
    free_vars,
    fresh_var,
    neg,
    scheme_subst,
    subst_var,
)
from .calculus import (
    CheckError,
    Derivation,
    LabelledFormula,
    RuleApplication,
    RuleError,
    Sequent,
    label,
    lf,
    multiset_equal,
    premises_of,
    subsets_nonempty,
)


class TransformError(FbinqError):
    pass


# ---------------------------------------------------------------------------
# Helpers


def derivation_vars(d: Derivation) -> set[str]:
    out: set[str] = set()
    for node in d.nodes():
        for m in node.conclusion.members():
            out |= all_vars(m.formula)
        if node.rule.var is not None:
            out.add(node.rule.var)
        if node.rule.cut_formula is not None:
            out |= all_vars(node.rule.cut_formula.formula)
    return out


def _subst_lf(m: LabelledFormula, x: str, z: str) -> LabelledFormula:
    return LabelledFormula(m.label, subst_var(m.formula, x, z))


def _subst_seq(s: Sequent, x: str, z: str) -> Sequent:
    return Sequent(tuple(_subst_lf(m, x, z) for m in s.ante),
                   tuple(_subst_lf(m, x, z) for m in s.succ))


def _seq_fv(s: Sequent) -> set[str]:
    out: set[str] = set()
    for m in s.members():
        out |= free_vars(m.formula)
    return out


def _replace_app(app: RuleApplication, **kw) -> RuleApplication:
    data = dict(rule=app.rule, side=app.side, index=app.index,
                subset=app.subset, var=app.var, cut_formula=app.cut_formula)
    data.update(kw)
    return RuleApplication(**data)


_EIGEN_RULES = ("forallR", "iexistsL")
_REPEAT_RULES = ("impL", "forallL", "iexistsR")
_LEAVES = ("id", "botL")


def _remove_one(side: tuple, m: LabelledFormula) -> tuple[tuple, int]:
    """Remove the first occurrence of m; returns (new tuple, removed index)."""
    i = side.index(m)
    return side[:i] + side[i + 1:], i


def _locate(side: tuple, m: LabelledFormula, skip: int | None = None) -> int:
    for i, x in enumerate(side):
        if x == m and i != skip:
            return i
    raise TransformError(f"formula {m!r} not found")


# ---------------------------------------------------------------------------
# Substitution (Prop 5-style, height-preserving)


def subst_derivation(d: Derivation, x: str, z: str) -> Derivation:
    """Replace free occurrences of x by z throughout, renaming eigenvariables
    that would collide; height never increases."""
    if x == z:
        return d
    return _subst(d, x, z)


def _subst(d: Derivation, x: str, z: str) -> Derivation:
    if x not in _seq_fv(d.conclusion):
        return d
    app = d.rule
    if app.rule in _EIGEN_RULES and app.var == z:
        # the incoming variable would be captured by the eigenvariable: rename
        e2 = fresh_var(derivation_vars(d) | {x, z})
        prem = _subst(d.premises[0], app.var, e2)
        d = Derivation(d.conclusion, _replace_app(app, var=e2), (prem,))
        app = d.rule
    new_var = app.var
    if app.rule in ("forallL", "iexistsR") and app.var == x:
        new_var = z
    new_cf = app.cut_formula
    if new_cf is not None:
        new_cf = _subst_lf(new_cf, x, z)
    return Derivation(
        _subst_seq(d.conclusion, x, z),
        _replace_app(app, var=new_var, cut_formula=new_cf),
        tuple(_subst(p, x, z) for p in d.premises),
    )


def rename_eigenvariables(d: Derivation, avoid: Iterable[str]) -> Derivation:
    """Rename every eigenvariable that falls in `avoid`; height-preserving."""
    avoid = set(avoid)
    if not avoid:
        return d

    def go(node: Derivation) -> Derivation:
        app = node.rule
        if app.rule in _EIGEN_RULES and app.var in avoid:
            z2 = fresh_var(avoid | derivation_vars(node))
            prem = _subst(node.premises[0], app.var, z2)
            node = Derivation(node.conclusion, _replace_app(app, var=z2), (prem,))
        return Derivation(node.conclusion, node.rule,
                          tuple(go(p) for p in node.premises))

    return go(d)


# ---------------------------------------------------------------------------
# Weakening


def weaken(d: Derivation, side: str, m: LabelledFormula) -> Derivation:
    """Add m to the chosen side of every sequent; height-preserving."""
    if side not in ("ante", "succ"):
        raise TransformError(f"bad side {side!r}")
    d = rename_eigenvariables(d, free_vars(m.formula))
    return _weaken(d, side, m)


def _weaken(d: Derivation, side: str, m: LabelledFormula) -> Derivation:
    conc = (Sequent(d.conclusion.ante + (m,), d.conclusion.succ) if side == "ante"
            else Sequent(d.conclusion.ante, d.conclusion.succ + (m,)))
    if d.rule.rule == "cut":
        # route the extra formula into the matching premise's context
        which = 0 if side == "ante" else 1
        prems = list(d.premises)
        prems[which] = _weaken(prems[which], side, m)
        return Derivation(conc, d.rule, tuple(prems))
    return Derivation(conc, d.rule, tuple(_weaken(p, side, m) for p in d.premises))


def weaken_many(d: Derivation, ante: Iterable[LabelledFormula] = (),
                succ: Iterable[LabelledFormula] = ()) -> Derivation:
    for m in ante:
        d = weaken(d, "ante", m)
    for m in succ:
        d = weaken(d, "succ", m)
    return d


# ---------------------------------------------------------------------------
# Inversion


def invert(d: Derivation, app: RuleApplication, premise_index: int) -> Derivation:
    """A height-preserving derivation of the chosen premise of `app` applied
    to d's conclusion."""
    targets = premises_of(d.conclusion, app)
    if not (0 <= premise_index < len(targets)):
        raise TransformError("premise index out of range")
    target = targets[premise_index]

    # rules that repeat the principal: the premise extends the conclusion
    extra_ante = Counter(target.ante) - Counter(d.conclusion.ante)
    extra_succ = Counter(target.succ) - Counter(d.conclusion.succ)
    if (Counter(d.conclusion.ante) - Counter(target.ante) == Counter()
            and Counter(d.conclusion.succ) - Counter(target.succ) == Counter()):
        return weaken_many(d, ante=extra_ante.elements(), succ=extra_succ.elements())

    tag = d.rule.rule
    if tag == "cut":
        raise TransformError("invert requires a cut-free derivation")
    if tag in _LEAVES:
        leaf = RuleApplication(tag)
        premises_of(target, leaf)  # raises if the leaf no longer closes
        return Derivation(target, leaf, ())

    principal = _node_principal(d)
    wanted = _node_principal_of(d.conclusion, app)
    same = (tag == app.rule and d.rule.side == app.side and principal == wanted
            and d.rule.subset == app.subset)
    if same:
        child = d.premises[premise_index]
        if tag in _EIGEN_RULES and d.rule.var != app.var:
            return subst_derivation(child, d.rule.var, app.var)
        return child

    # push the inversion into the premises and reapply d's rule
    children = []
    for j, p in enumerate(d.premises):
        side_tuple = p.conclusion.ante if app.side == "ante" else p.conclusion.succ
        app_j = _replace_app(app, index=_locate(side_tuple, wanted))
        children.append(invert(p, app_j, premise_index))
    new_side = target.ante if d.rule.side == "ante" else target.succ
    new_app = _replace_app(d.rule, index=_locate(new_side, principal))
    return Derivation(target, new_app, tuple(children))


def _node_principal(d: Derivation) -> LabelledFormula:
    side = d.conclusion.ante if d.rule.side == "ante" else d.conclusion.succ
    return side[d.rule.index]


def _node_principal_of(seq: Sequent, app: RuleApplication) -> LabelledFormula:
    side = seq.ante if app.side == "ante" else seq.succ
    return side[app.index]


# ---------------------------------------------------------------------------
# Contraction

# parts added to premise j when the rule consumes principal X:f
def _premise_parts(app: RuleApplication, m: LabelledFormula, j: int):
    x, f = m.label, m.formula
    tag = app.rule
    if tag == "andL":
        return [("ante", LabelledFormula(x, f.left)), ("ante", LabelledFormula(x, f.right))]
    if tag == "andR":
        return [("succ", LabelledFormula(x, (f.left, f.right)[j]))]
    if tag == "idisjR":
        return [("succ", LabelledFormula(x, f.left)), ("succ", LabelledFormula(x, f.right))]
    if tag == "idisjL":
        return [("ante", LabelledFormula(x, (f.left, f.right)[j]))]
    if tag == "impR":
        y = subsets_nonempty(x)[j]
        return [("ante", LabelledFormula(y, f.left)), ("succ", LabelledFormula(y, f.right))]
    if tag == "atR":
        k = sorted(x)[j]
        return [("succ", lf([k], f))]
    if tag == "forallR":
        return [("succ", LabelledFormula(x, subst_var(f.body, f.var, app.var)))]
    if tag == "iexistsL":
        return [("ante", LabelledFormula(x, subst_var(f.body, f.var, app.var)))]
    raise TransformError(f"rule {tag} does not consume its principal")


def contract(d: Derivation, side: str, m: LabelledFormula) -> Derivation:
    """Remove one of (at least) two copies of m; height never increases."""
    side_tuple = d.conclusion.ante if side == "ante" else d.conclusion.succ
    if sum(1 for x in side_tuple if x == m) < 2:
        raise TransformError(f"need two copies of {m!r} to contract")
    tag = d.rule.rule
    if tag == "cut":
        raise TransformError("contract requires a cut-free derivation")

    principal_here = (tag not in _LEAVES and d.rule.side == side
                      and _node_principal(d) == m)
    # remove a copy that is not the principal occurrence
    skip = d.rule.index if principal_here else None
    q = _locate(side_tuple, m, skip=skip)
    new_side = side_tuple[:q] + side_tuple[q + 1:]
    new_conc = (Sequent(new_side, d.conclusion.succ) if side == "ante"
                else Sequent(d.conclusion.ante, new_side))

    if tag in _LEAVES:
        return Derivation(new_conc, d.rule, ())

    new_index = d.rule.index
    if d.rule.side == side and q < d.rule.index:
        new_index -= 1
    new_app = _replace_app(d.rule, index=new_index)

    if not principal_here or tag in _REPEAT_RULES:
        # both copies are context (or the principal is repeated): recurse
        children = tuple(contract(p, side, m) for p in d.premises)
        return Derivation(new_conc, new_app, children)

    # the rule consumed one copy: invert it on the surviving context copy,
    # contract the duplicated replacement parts, and reapply
    children = []
    for j, p in enumerate(d.premises):
        p_side = p.conclusion.ante if side == "ante" else p.conclusion.succ
        app2 = _replace_app(d.rule, index=_locate(p_side, m))
        eigen = d.rule.var if tag in _EIGEN_RULES else None
        if eigen is not None:
            z2 = fresh_var(derivation_vars(p) | {eigen})
            app2 = _replace_app(app2, var=z2)
        inv = invert(p, app2, j)
        if eigen is not None:
            inv = subst_derivation(inv, app2.var, eigen)
        for part_side, part in _premise_parts(d.rule, m, j):
            inv = contract(inv, part_side, part)
        children.append(inv)
    return Derivation(new_conc, new_app, tuple(children))


def _contract_to(d: Derivation, target: Sequent) -> Derivation:
    """Contract duplicates until the conclusion multiset-equals target."""
    for side in ("ante", "succ"):
        cur = d.conclusion.ante if side == "ante" else d.conclusion.succ
        want = target.ante if side == "ante" else target.succ
        extra = Counter(cur) - Counter(want)
        for m, n in extra.items():
            for _ in range(n):
                d = contract(d, side, m)
    if not multiset_equal(d.conclusion, target):
        raise TransformError("contraction did not reach the target sequent")
    return d


# ---------------------------------------------------------------------------
# Persistency derivations (no atR anywhere)


def persistency_derivation(x: Iterable[int], y: Iterable[int], f: Formula,
                           ctx: Sequent | None = None) -> Derivation:
    """A derivation of X:f, Γ ⇒ Δ, Y:f for X ⊇ Y that never uses atR."""
    x, y = label(x), label(y)
    if not x >= y:
        raise TransformError("persistency needs X ⊇ Y")
    ctx = ctx or Sequent((), ())
    avoid = set(all_vars(f))
    for m in ctx.members():
        avoid |= all_vars(m.formula)
    fresh = FreshVars(avoid)
    return _persist(x, y, f, ctx.ante, ctx.succ, fresh)


def _persist(x, y, f, gamma, delta, fresh) -> Derivation:
    conc = Sequent((LabelledFormula(x, f),) + gamma, delta + (LabelledFormula(y, f),))
    if isinstance(f, Atom):
        return Derivation(conc, RuleApplication("id"), ())
    if isinstance(f, Bot):
        return Derivation(conc, RuleApplication("botL"), ())
    if isinstance(f, And):
        app = RuleApplication("andL", "ante", 0)
        mid = premises_of(conc, app)[0]
        app2 = RuleApplication("andR", "succ", len(delta))
        kids = (
            _persist(x, y, f.left, (LabelledFormula(x, f.right),) + gamma, delta, fresh),
            _persist(x, y, f.right, (LabelledFormula(x, f.left),) + gamma, delta, fresh),
        )
        return Derivation(conc, app, (Derivation(mid, app2, kids),))
    if isinstance(f, IDisj):
        app = RuleApplication("idisjL", "ante", 0)
        mids = premises_of(conc, app)
        kids = []
        for g, other in ((f.left, f.right), (f.right, f.left)):
            app2 = RuleApplication("idisjR", "succ", len(delta))
            inner = _persist(x, y, g, gamma, delta + (LabelledFormula(y, other),), fresh)
            kids.append(Derivation(mids[0 if g is f.left else 1], app2, (inner,)))
        return Derivation(conc, app, tuple(kids))
    if isinstance(f, Implies):
        app = RuleApplication("impR", "succ", len(delta))
        mids = premises_of(conc, app)
        kids = []
        for z, mid in zip(subsets_nonempty(y), mids):
            app2 = RuleApplication("impL", "ante", 1, subset=z)
            zphi = LabelledFormula(z, f.left)
            zpsi = LabelledFormula(z, f.right)
            p1 = _persist(z, z, f.left, (LabelledFormula(x, f),) + gamma,
                          delta + (zpsi,), fresh)
            p2 = _persist(z, z, f.right, (zphi, LabelledFormula(x, f)) + gamma,
                          delta, fresh)
            kids.append(Derivation(mid, app2, (p1, p2)))
        return Derivation(conc, app, tuple(kids))
    if isinstance(f, Forall):
        z = fresh.take()
        app = RuleApplication("forallR", "succ", len(delta), var=z)
        mid = premises_of(conc, app)[0]
        app2 = RuleApplication("forallL", "ante", 0, var=z)
        body = subst_var(f.body, f.var, z)
        inner = _persist(x, y, body, (LabelledFormula(x, f),) + gamma, delta, fresh)
        return Derivation(conc, app, (Derivation(mid, app2, (inner,)),))
    if isinstance(f, IExists):
        z = fresh.take()
        app = RuleApplication("iexistsL", "ante", 0, var=z)
        mid = premises_of(conc, app)[0]
        app2 = RuleApplication("iexistsR", "succ", len(delta), var=z)
        body = subst_var(f.body, f.var, z)
        inner = _persist(x, y, body, gamma, delta + (LabelledFormula(y, f),), fresh)
        return Derivation(conc, app, (Derivation(mid, app2, (inner,)),))
    raise TransformError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Cut and its elimination


def combine_conclusion(left: Sequent, right: Sequent,
                       cf: LabelledFormula) -> Sequent:
    lsucc, _ = _remove_one(left.succ, cf)
    rante, _ = _remove_one(right.ante, cf)
    return Sequent(left.ante + rante, lsucc + right.succ)


def make_cut(left: Derivation, right: Derivation,
             cf: LabelledFormula) -> Derivation:
    """An explicit cut node; its conclusion combines the premise contexts."""
    if cf not in left.conclusion.succ:
        raise TransformError("cut formula missing from left premise succedent")
    if cf not in right.conclusion.ante:
        raise TransformError("cut formula missing from right premise antecedent")
    app = RuleApplication("cut", cut_formula=cf)
    return Derivation(combine_conclusion(left.conclusion, right.conclusion, cf),
                      app, (left, right))


def eliminate_cut(d: Derivation) -> Derivation:
    """Rewrite away every cut node; the result concludes the same sequent (as
    a multiset) and passes the cut-free checker."""
    if d.rule.rule != "cut":
        return Derivation(d.conclusion, d.rule,
                          tuple(eliminate_cut(p) for p in d.premises))
    left = eliminate_cut(d.premises[0])
    right = eliminate_cut(d.premises[1])
    out = _reduce_cut(left, right, d.rule.cut_formula)
    if not multiset_equal(out.conclusion, d.conclusion):
        raise TransformError("cut elimination changed the conclusion")
    return out


def _is_principal(d: Derivation, cf: LabelledFormula, side: str) -> bool:
    tag = d.rule.rule
    if tag in _LEAVES:
        return False
    return d.rule.side == side and _node_principal(d) == cf


def _reduce_cut(left: Derivation, right: Derivation,
                cf: LabelledFormula) -> Derivation:
    left = rename_eigenvariables(left, _seq_fv(right.conclusion))
    right = rename_eigenvariables(right, _seq_fv(left.conclusion))
    conc = combine_conclusion(left.conclusion, right.conclusion, cf)

    # leaves whose justification survives the cut
    ltag, rtag = left.rule.rule, right.rule.rule
    if ltag == "botL":
        return Derivation(conc, RuleApplication("botL"), ())
    lsucc_rest, _ = _remove_one(left.conclusion.succ, cf)
    if ltag == "id" and _id_pair(left.conclusion.ante, lsucc_rest):
        return Derivation(conc, RuleApplication("id"), ())
    rante_rest, _ = _remove_one(right.conclusion.ante, cf)
    if rtag == "botL" and any(isinstance(m.formula, Bot) for m in rante_rest):
        return Derivation(conc, RuleApplication("botL"), ())
    if rtag == "id" and _id_pair(rante_rest, right.conclusion.succ):
        return Derivation(conc, RuleApplication("id"), ())

    left_principal = (ltag == "id") or _is_principal(left, cf, "succ")
    right_principal = (rtag in _LEAVES) or _is_principal(right, cf, "ante")

    if not left_principal:
        return _push_left(left, right, cf, conc)
    if not right_principal:
        return _push_right(left, right, cf, conc)
    return _principal_cut(left, right, cf, conc)


def _id_pair(ante, succ) -> bool:
    for m in ante:
        if isinstance(m.formula, Atom):
            for n in succ:
                if m.formula == n.formula and m.label >= n.label:
                    return True
    return False


def _push_left(left, right, cf, conc) -> Derivation:
    children = tuple(_reduce_cut(p, right, cf) for p in left.premises)
    lsucc_rest, r = _remove_one(left.conclusion.succ, cf)
    new_index = left.rule.index
    if left.rule.side == "succ" and r < new_index:
        new_index -= 1
    side = conc.ante if left.rule.side == "ante" else conc.succ
    principal = _node_principal(left)
    app = _replace_app(left.rule, index=_locate(side, principal))
    del new_index  # position recomputed in the combined sequent
    return Derivation(conc, app, children)


def _push_right(left, right, cf, conc) -> Derivation:
    children = tuple(_reduce_cut(left, p, cf) for p in right.premises)
    principal = _node_principal(right)
    side = conc.ante if right.rule.side == "ante" else conc.succ
    if right.rule.side == "ante":
        # skip positions inside the left context so we pick the copy that
        # came from the right premise; any equal-valued copy works, though
        idx = _locate(side, principal)
    else:
        idx = _locate(side, principal)
    app = _replace_app(right.rule, index=idx)
    return Derivation(conc, app, children)


def _principal_cut(left, right, cf, conc) -> Derivation:
    f = cf.formula
    x = cf.label

    if isinstance(f, Atom):
        return _atomic_principal_cut(left, right, cf, conc)

    if isinstance(f, And):
        l1, l2 = left.premises          # X:f.left / X:f.right
        (r1,) = right.premises          # X:f.left, X:f.right, Π' ⇒ Σ
        c1 = _reduce_cut(l2, r1, LabelledFormula(x, f.right))
        c2 = _reduce_cut(l1, c1, LabelledFormula(x, f.left))
        return _contract_to(c2, conc)

    if isinstance(f, IDisj):
        (l1,) = left.premises           # Γ ⇒ Δ, X:f.left, X:f.right
        r1, r2 = right.premises
        c1 = _reduce_cut(l1, r1, LabelledFormula(x, f.left))
        c2 = _reduce_cut(c1, r2, LabelledFormula(x, f.right))
        return _contract_to(c2, conc)

    if isinstance(f, Implies):
        y = right.rule.subset
        subsets = subsets_nonempty(x)
        ly = left.premises[subsets.index(y)]   # Y:φ, Γ ⇒ Δ, Y:ψ
        r1, r2 = right.premises                # repeat the principal
        cr1 = _reduce_cut(left, r1, cf)        # Γ, Π' ⇒ Δ, Σ, Y:φ
        cr2 = _reduce_cut(left, r2, cf)        # Γ, Y:ψ, Π' ⇒ Δ, Σ
        ca = _reduce_cut(cr1, ly, LabelledFormula(y, f.left))
        cb = _reduce_cut(ca, cr2, LabelledFormula(y, f.right))
        return _contract_to(cb, conc)

    if isinstance(f, Forall):
        yvar = right.rule.var
        (l1,) = left.premises            # Γ ⇒ Δ, X:body[z/x]
        (r1,) = right.premises           # X:body[y/x], X:∀, Π' ⇒ Σ
        cr1 = _reduce_cut(left, r1, cf)  # Γ, X:body[y/x], Π' ⇒ Δ, Σ
        inst = LabelledFormula(x, subst_var(f.body, f.var, yvar))
        l1s = subst_derivation(l1, left.rule.var, yvar)
        c2 = _reduce_cut(l1s, cr1, inst)
        return _contract_to(c2, conc)

    if isinstance(f, IExists):
        yvar = left.rule.var
        (l1,) = left.premises            # Γ ⇒ Δ, X:∃, X:body[y/x]
        (r1,) = right.premises           # X:body[z/x], Π' ⇒ Σ
        cl1 = _reduce_cut(l1, right, cf)  # Γ, Π' ⇒ Δ, X:body[y/x], Σ
        inst = LabelledFormula(x, subst_var(f.body, f.var, yvar))
        r1s = subst_derivation(r1, right.rule.var, yvar)
        c2 = _reduce_cut(cl1, r1s, inst)
        return _contract_to(c2, conc)

    raise TransformError(f"unexpected principal cut on {f!r}")


def _atomic_principal_cut(left, right, cf, conc) -> Derivation:
    # the right premise must be an id leaf: atoms in the antecedent are
    # principal only there
    if right.rule.rule != "id":
        raise TransformError("atomic cut formula principal in a non-leaf right premise")
    b = _atomic_partner(right, cf)
    if left.rule.rule == "id":
        return Derivation(conc, RuleApplication("id"), ())
    if left.rule.rule != "atR":
        raise TransformError("atomic cut formula principal in a non-atR left premise")
    # left is atR on X:P; rebuild atR on the smaller label B plus weakenings
    idx = _locate(conc.succ, b)
    app = RuleApplication("atR", "succ", idx)
    rante_rest, _ = _remove_one(right.conclusion.ante, cf)
    sigma_rest = list(right.conclusion.succ)
    sigma_rest.remove(b)
    ks = sorted(cf.label)
    children = []
    for k in sorted(b.label):
        base = left.premises[ks.index(k)]  # Γ ⇒ Δ, {k}:P
        children.append(weaken_many(base, ante=rante_rest, succ=sigma_rest))
    return Derivation(conc, app, tuple(children))


def _atomic_partner(right: Derivation, cf: LabelledFormula) -> LabelledFormula:
    """The succedent member of the id pair whose antecedent member is cf."""
    for n in right.conclusion.succ:
        if n.formula == cf.formula and cf.label >= n.label:
            return n
    raise TransformError("no id partner for the cut formula")


# ---------------------------------------------------------------------------
# Mon and the negation macro-rules


def mon(d: Derivation, pos: int, x: Iterable[int]) -> Derivation:
    """Lift the antecedent member at `pos` from label Y to X ⊇ Y."""
    target = d.conclusion.ante[pos]
    x = label(x)
    if not x >= target.label:
        raise TransformError("mon needs X ⊇ Y")
    if x == target.label:
        return d
    p0 = persistency_derivation(x, target.label, target.formula)
    return eliminate_cut(make_cut(p0, d, target))


def neg_right(x: Iterable[int], f: Formula,
              premises: Sequence[Derivation]) -> Derivation:
    """From derivations of {k}:f, Γ ⇒ Δ for each k ∈ X, a derivation of
    Γ ⇒ Δ, X:¬f."""
    x = label(x)
    ks = sorted(x)
    if len(premises) != len(ks):
        raise TransformError(f"need one premise per element of {sorted(x)}")
    by_k = dict(zip(ks, premises))
    d0 = by_k[ks[0]]
    pos0 = _locate(d0.conclusion.ante, lf([ks[0]], f))
    gamma = d0.conclusion.ante[:pos0] + d0.conclusion.ante[pos0 + 1:]
    delta = d0.conclusion.succ
    conc = Sequent(gamma, delta + (LabelledFormula(x, neg(f)),))
    app = RuleApplication("impR", "succ", len(delta))
    children = []
    for y in subsets_nonempty(x):
        k = min(y)
        dk = by_k[k]
        lifted = mon(dk, _locate(dk.conclusion.ante, lf([k], f)), y)
        children.append(weaken(lifted, "succ", LabelledFormula(y, BOT)))
    return Derivation(conc, app, tuple(children))


def neg_left(premise: Derivation, x: Iterable[int], pos: int = -1) -> Derivation:
    """From a derivation of Γ ⇒ Δ, Y:f (at succedent position `pos`), a
    derivation of X:¬f, Γ ⇒ Δ for X ⊇ Y."""
    x = label(x)
    succ = premise.conclusion.succ
    pos = pos % len(succ)
    m = succ[pos]
    if not x >= m.label:
        raise TransformError("neg_left needs X ⊇ Y")
    nf = LabelledFormula(x, neg(m.formula))
    gamma = premise.conclusion.ante
    delta = succ[:pos] + succ[pos + 1:]
    conc = Sequent((nf,) + gamma, delta)
    app = RuleApplication("impL", "ante", 0, subset=m.label)
    p1 = weaken(premise, "ante", nf)
    botseq = Sequent((LabelledFormula(m.label, BOT), nf) + gamma, delta)
    p2 = Derivation(botseq, RuleApplication("botL"), ())
    return Derivation(conc, app, (p1, p2))


# ---------------------------------------------------------------------------
# Schematic substitution of derivations


def scheme_subst_derivation(d: Derivation, pred: Predicate, body: Formula,
                            body_vars: Sequence[str]) -> Derivation:
    """Translate a derivation under the substitution of `body` for `pred`.

    The input must be cut-free and contain no atR node; id leaves whose only
    closing pair is on `pred` become persistency derivations on the
    substituted body, so the output is again atR-free.
    """
    if "atR" in d.rules_used():
        raise TransformError("input derivation applies atR")
    if "cut" in d.rules_used():
        raise TransformError("input derivation contains cut")

    def tr(f: Formula) -> Formula:
        return scheme_subst(f, pred, body, body_vars)

    def tr_lf(m: LabelledFormula) -> LabelledFormula:
        return LabelledFormula(m.label, tr(m.formula))

    def tr_seq(s: Sequent) -> Sequent:
        return Sequent(tuple(tr_lf(m) for m in s.ante),
                       tuple(tr_lf(m) for m in s.succ))

    def go(node: Derivation) -> Derivation:
        conc = tr_seq(node.conclusion)
        tag = node.rule.rule
        if tag == "botL":
            return Derivation(conc, node.rule, ())
        if tag == "id":
            # keep the leaf if a pair on another predicate still closes it
            for m in node.conclusion.ante:
                if isinstance(m.formula, Atom) and m.formula.pred != pred:
                    for n in node.conclusion.succ:
                        if n.formula == m.formula and m.label >= n.label:
                            return Derivation(conc, node.rule, ())
            for i, m in enumerate(node.conclusion.ante):
                if not (isinstance(m.formula, Atom) and m.formula.pred == pred):
                    continue
                for j, n in enumerate(node.conclusion.succ):
                    if n.formula == m.formula and m.label >= n.label:
                        inst = tr(m.formula)
                        ctx = Sequent(
                            tuple(tr_lf(a) for q, a in enumerate(node.conclusion.ante) if q != i),
                            tuple(tr_lf(b) for q, b in enumerate(node.conclusion.succ) if q != j),
                        )
                        return persistency_derivation(m.label, n.label, inst, ctx)
            raise TransformError("id leaf without a closing pair")
        return Derivation(conc, node.rule, tuple(go(p) for p in node.premises))

    return go(d)
