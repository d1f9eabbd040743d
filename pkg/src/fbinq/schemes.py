"""Named axiom schemes, their uniform derivations, and the bounded-Casari
claim checkers.

`scheme` builds the formula schemes (Kuroda, CD, the Casari family) from a
caller-supplied instantiation.  `casari_derivation` constructs, by induction
on the label size, a derivation of the Casari scheme at any finite label;
`appendix_derivation` builds derivations of Kuroda, the Kreisel-Putnam
variant KP, the existential variants EK and EKP, and the negation-union
lemma, following fixed proof layouts built from persistency, monotonicity
and the admissible negation rules.  EKP's derivation contains one explicit
cut node; `transform.eliminate_cut` turns it into a cut-free certificate.

The Casari scheme with body ∃y R(x,y) is refuted over an infinite model
that this module represents intensionally through `CasariModelSpec`: a pure
membership predicate for the relation interpretation at each world, in two
variants.  The model itself is never materialized; `casari_claim1` and
`casari_claim2_finite` check its two finitely-verifiable support claims on
concrete finite states and return explicit witnesses within stated bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .syntax import (
    Atom,
    FbinqError,
    Formula,
    Forall,
    FreshVars,
    IDisj,
    IExists,
    Implies,
    all_vars,
    atom,
    free_vars,
    neg,
    subst_var,
)
from .calculus import (
    Derivation,
    LabelledFormula,
    RuleApplication,
    Sequent,
    label,
    lf,
    premises_of,
    subsets_nonempty,
)
from .transform import (
    make_cut,
    mon,
    neg_left,
    neg_right,
    persistency_derivation,
    weaken_many,
)


class SchemeError(FbinqError):
    """Side-condition violation or unsupported parameters."""


SCHEME_NAMES = ("Kuroda", "CD", "CasariAtomic", "CasariDNAtomic", "CasariScheme")
APPENDIX_NAMES = ("Kuroda", "KP", "EK", "EKP", "NegRules")


def _casari_formula(phi: Formula, var: str) -> Formula:
    f = Forall(var, phi)
    return Implies(Forall(var, Implies(Implies(phi, f), f)), f)


def scheme(name: str, *, body: Formula | None = None, psi: Formula | None = None,
           var: str = "x") -> Formula:
    """The named formula scheme instantiated with the given body.

    `body` defaults to the unary atom P(var); CD additionally takes the
    side formula `psi`, which must not contain `var` free.
    """
    phi = body if body is not None else atom("P", var)
    if name == "Kuroda":
        return Implies(Forall(var, neg(neg(phi))), neg(neg(Forall(var, phi))))
    if name == "CD":
        side = psi if psi is not None else atom("q")
        if var in free_vars(side):
            raise SchemeError(f"CD requires that {var} does not appear in the side formula")
        return Implies(Forall(var, IDisj(phi, side)),
                       IDisj(Forall(var, phi), side))
    if name == "CasariAtomic":
        if body is not None:
            raise SchemeError("CasariAtomic is the fixed atomic instance; use CasariScheme for other bodies")
        return _casari_formula(atom("P", var), var)
    if name == "CasariDNAtomic":
        if body is not None:
            raise SchemeError("CasariDNAtomic is the fixed doubly-negated atomic instance")
        return _casari_formula(neg(neg(atom("P", var))), var)
    if name == "CasariScheme":
        return _casari_formula(phi, var)
    raise SchemeError(f"unknown scheme {name!r}; expected one of {SCHEME_NAMES}")


# ---------------------------------------------------------------------------
# Casari derivation, by induction on the label size


def casari_derivation(x: Iterable[int], body: Formula | None = None,
                      var: str = "x") -> Derivation:
    """A derivation of X:∀x((φ→∀xφ)→∀xφ) ⇒ X:∀xφ, by induction on |X|.

    At each label the universal is introduced with a fresh eigenvariable,
    the antecedent is instantiated at it, and the left implication splits
    into a persistency branch and, for each proper sublabel, the induction
    hypothesis lifted by monotonicity.  The output never applies the
    atomic-split rule when the body is atomic, so it survives schematic
    substitution.
    """
    x = label(x)
    phi = body if body is not None else atom("P", var)
    f = Forall(var, phi)
    a = Forall(var, Implies(Implies(phi, f), f))
    fresh = FreshVars(all_vars(a))
    return _casari(x, phi, var, f, a, fresh)


def _casari(x, phi, var, f, a, fresh) -> Derivation:
    z = fresh.take()
    phiz = subst_var(phi, var, z)
    b = Implies(Implies(phiz, f), f)
    la, lfq = LabelledFormula(x, a), LabelledFormula(x, f)
    conc = Sequent((la,), (lfq,))

    app1 = RuleApplication("forallR", "succ", 0, var=z)
    s1 = premises_of(conc, app1)[0]                       # X:a ⇒ X:φ(z)
    app2 = RuleApplication("forallL", "ante", 0, var=z)
    s2 = premises_of(s1, app2)[0]                         # + X:b in the antecedent
    lb = LabelledFormula(x, b)
    app3 = RuleApplication("impL", "ante", s2.ante.index(lb), subset=x)
    p1, p2 = premises_of(s2, app3)

    # p2: X:∀xφ joined the antecedent; instantiate it and close by persistency
    app4 = RuleApplication("forallL", "ante", p2.ante.index(lfq), var=z)
    s4 = premises_of(p2, app4)[0]
    lphiz = LabelledFormula(x, phiz)
    rest_ante = list(s4.ante)
    rest_ante.remove(lphiz)
    rest_succ = list(s4.succ)
    rest_succ.remove(lphiz)
    d4 = persistency_derivation(x, x, phiz,
                                ctx=Sequent(tuple(rest_ante), tuple(rest_succ)))
    d_p2 = Derivation(p2, app4, (d4,))

    # p1: right implication on X:(φ(z) → ∀xφ); one premise per sublabel
    limp = LabelledFormula(x, Implies(phiz, f))
    app5 = RuleApplication("impR", "succ", p1.succ.index(limp))
    children = []
    for y in subsets_nonempty(x):
        if y == x:
            ctx = Sequent((la, lb), (lfq,))
            children.append(persistency_derivation(x, x, phiz, ctx=ctx))
        else:
            sub = _casari(y, phi, var, f, a, fresh)       # Y:a ⇒ Y:∀xφ
            lifted = mon(sub, 0, x)                       # X:a ⇒ Y:∀xφ
            children.append(weaken_many(
                lifted, ante=(lb, LabelledFormula(y, phiz)), succ=(lphiz,)))
    d_p1 = Derivation(p1, app5, tuple(children))

    d3 = Derivation(s2, app3, (d_p1, d_p2))
    d2 = Derivation(s1, app2, (d3,))
    return Derivation(conc, app1, (d2,))


def cd_derivation(x: Iterable[int], body: Formula | None = None,
                  psi: Formula | None = None, var: str = "x") -> Derivation:
    """A derivation of X:∀x(φ⩔ψ) ⇒ X:(∀xφ)⩔ψ, with x not free in ψ.

    Fixed layout: split the disjunction on the right, introduce the
    universal with a fresh eigenvariable, instantiate the antecedent at it,
    split the disjunction on the left, and close both branches by
    persistency.
    """
    x = label(x)
    phi = body if body is not None else atom("P", var)
    side = psi if psi is not None else atom("q")
    if var in free_vars(side):
        raise SchemeError(f"CD requires that {var} does not appear in the side formula")
    fa = Forall(var, IDisj(phi, side))
    la = LabelledFormula(x, fa)
    conc = Sequent((la,), (LabelledFormula(x, IDisj(Forall(var, phi), side)),))
    fresh = FreshVars(all_vars(fa))
    z = fresh.take()
    phz = subst_var(phi, var, z)
    app1 = RuleApplication("idisjR", "succ", 0)
    s1 = premises_of(conc, app1)[0]           # ⇒ X:∀xφ, X:ψ
    app2 = RuleApplication("forallR", "succ",
                           s1.succ.index(LabelledFormula(x, Forall(var, phi))), var=z)
    s2 = premises_of(s1, app2)[0]             # ⇒ X:φ[z], X:ψ
    app3 = RuleApplication("forallL", "ante", 0, var=z)
    s3 = premises_of(s2, app3)[0]             # + X:(φ[z]⩔ψ) in the antecedent
    ldisj = LabelledFormula(x, IDisj(phz, side))
    app4 = RuleApplication("idisjL", "ante", s3.ante.index(ldisj))
    dphi = persistency_derivation(
        x, x, phz, ctx=Sequent((la,), (LabelledFormula(x, side),)))
    dpsi = persistency_derivation(
        x, x, side, ctx=Sequent((la,), (LabelledFormula(x, phz),)))
    d4 = Derivation(s3, app4, (dphi, dpsi))
    d3 = Derivation(s2, app3, (d4,))
    d2 = Derivation(s1, app2, (d3,))
    return Derivation(conc, app1, (d2,))


# ---------------------------------------------------------------------------
# Appendix derivations


def appendix_derivation(name: str, x: Iterable[int], *,
                        theta: Formula | None = None,
                        body: Formula | None = None,
                        psi: Formula | None = None,
                        var: str = "x",
                        y: Iterable[int] | None = None,
                        z: Iterable[int] | None = None) -> Derivation:
    """A derivation of the named sequent at label X.

    - Kuroda:   X:∀x¬¬φ ⇒ X:¬¬∀xφ (φ = `body`)
    - KP:       X:¬θ→(φ⩔ψ) ⇒ X:(¬θ→φ)⩔(¬θ→ψ)
    - EK:       X:∃x φ ⇒ X:∃x(¬θ→φ)
    - EKP:      X:¬θ→∃xφ ⇒ X:∃x(¬θ→φ); |X| ≤ 2 only, contains one cut node
    - NegRules: Y:¬θ, Z:¬θ ⇒ Y∪Z:¬θ with Y∪Z = X (the negation-union lemma)
    """
    x = label(x)
    th = theta if theta is not None else atom("q")
    phi = body if body is not None else atom("P", var)
    side = psi if psi is not None else atom("r")
    if name == "Kuroda":
        return _kuroda(x, phi, var)
    if name == "KP":
        return _kp(x, th, phi, side)
    if name == "EK":
        return _ek(x, th, phi, var)
    if name == "EKP":
        return _ekp(x, th, phi, var)
    if name == "NegRules":
        ly = label(y) if y is not None else x
        lz = label(z) if z is not None else x
        if ly | lz != x:
            raise SchemeError("NegRules requires Y ∪ Z = X")
        return _neg_union(ly, lz, th, Sequent((), ()))
    raise SchemeError(f"unknown appendix derivation {name!r}; expected one of {APPENDIX_NAMES}")


def _neg_union(y, z, th: Formula, ctx: Sequent) -> Derivation:
    """Y:¬θ, Z:¬θ, Γ ⇒ Δ, Y∪Z:¬θ via the admissible negation rules."""
    v = y | z
    prems = []
    for k in sorted(v):
        src, other = (y, z) if k in y else (z, y)
        base_ctx = Sequent((LabelledFormula(other, neg(th)),) + ctx.ante, ctx.succ)
        base = persistency_derivation(frozenset({k}), frozenset({k}), th, ctx=base_ctx)
        pos = base.conclusion.succ.index(lf([k], th))
        prems.append(neg_left(base, src, pos))
    return neg_right(v, th, prems)


def _kuroda(x, phi: Formula, var: str) -> Derivation:
    f = Forall(var, phi)
    af = Forall(var, neg(neg(phi)))
    la = LabelledFormula(x, af)
    fresh = FreshVars(all_vars(af) | all_vars(f))
    prems = []
    for k in sorted(x):
        kk = frozenset({k})
        zv = fresh.take()
        phz = subst_var(phi, var, zv)
        conc_k = Sequent((la,), (LabelledFormula(kk, f),))
        app1 = RuleApplication("forallR", "succ", 0, var=zv)
        s1 = premises_of(conc_k, app1)[0]                 # X:∀x¬¬φ ⇒ {k}:φ[z]
        app2 = RuleApplication("forallL", "ante", 0, var=zv)
        s2 = premises_of(s1, app2)[0]                     # + X:¬¬φ[z] in ante
        # derive s2 by (¬⇒) from X:∀x¬¬φ ⇒ {k}:φ[z], {k}:¬φ[z],
        # itself by (⇒¬) from the persistency leaf {k}:φ[z] ⇒ {k}:φ[z]
        leaf = persistency_derivation(kk, kk, phz,
                                      ctx=Sequent((la,), ()))
        nr = neg_right(kk, phz, [leaf])
        pos = nr.conclusion.succ.index(lf([k], neg(phz)))
        inner = neg_left(nr, x, pos)                      # X:¬¬φ[z], X:∀x¬¬φ ⇒ {k}:φ[z]
        d2 = Derivation(s1, app2, (inner,))
        dk = Derivation(conc_k, app1, (d2,))              # X:∀x¬¬φ ⇒ {k}:∀xφ
        prems.append(neg_left(dk, kk, 0))                 # {k}:¬∀xφ, X:∀x¬¬φ ⇒
    return neg_right(x, neg(f), prems)                    # X:∀x¬¬φ ⇒ X:¬¬∀xφ


def _kp(x, th: Formula, phi: Formula, psi: Formula) -> Derivation:
    nt = neg(th)
    imp = Implies(nt, IDisj(phi, psi))
    limp = LabelledFormula(x, imp)
    target = IDisj(Implies(nt, phi), Implies(nt, psi))
    conc = Sequent((limp,), (LabelledFormula(x, target),))
    app1 = RuleApplication("idisjR", "succ", 0)
    s1 = premises_of(conc, app1)[0]
    app2 = RuleApplication("impR", "succ",
                           s1.succ.index(LabelledFormula(x, Implies(nt, phi))))
    outer = []
    for yy, py in zip(subsets_nonempty(x), premises_of(s1, app2)):
        app3 = RuleApplication("impR", "succ",
                               py.succ.index(LabelledFormula(x, Implies(nt, psi))))
        inner = []
        for zz, pz in zip(subsets_nonempty(x), premises_of(py, app3)):
            v = yy | zz
            ldisj = LabelledFormula(v, IDisj(phi, psi))
            app4 = RuleApplication("impL", "ante", pz.ante.index(limp), subset=v)
            q1, q2 = premises_of(pz, app4)
            # q1: context ⇒ …, V:¬θ — the negation-union lemma, weakened
            d1 = weaken_many(_neg_union(yy, zz, th, Sequent((), ())),
                             ante=(limp,),
                             succ=(LabelledFormula(yy, phi), LabelledFormula(zz, psi)))
            # q2: V:(φ⩔ψ) splits; each disjunct closes by persistency
            app5 = RuleApplication("idisjL", "ante", q2.ante.index(ldisj))
            rest = list(q2.ante)
            rest.remove(ldisj)
            ga = tuple(rest)
            dphi = persistency_derivation(
                v, yy, phi, ctx=Sequent(ga, (LabelledFormula(zz, psi),)))
            dpsi = persistency_derivation(
                v, zz, psi, ctx=Sequent(ga, (LabelledFormula(yy, phi),)))
            d2 = Derivation(q2, app5, (dphi, dpsi))
            inner.append(Derivation(pz, app4, (d1, d2)))
        outer.append(Derivation(py, app3, tuple(inner)))
    d2 = Derivation(s1, app2, tuple(outer))
    return Derivation(conc, app1, (d2,))


def _ek(x, th: Formula, phi: Formula, var: str) -> Derivation:
    ex = IExists(var, phi)
    goal = IExists(var, Implies(neg(th), phi))
    lgoal = LabelledFormula(x, goal)
    conc = Sequent((LabelledFormula(x, ex),), (lgoal,))
    fresh = FreshVars(all_vars(ex) | all_vars(goal))
    z = fresh.take()
    phz = subst_var(phi, var, z)
    thz = subst_var(th, var, z)
    app1 = RuleApplication("iexistsL", "ante", 0, var=z)
    s1 = premises_of(conc, app1)[0]                       # X:φ[z] ⇒ X:goal
    app2 = RuleApplication("iexistsR", "succ", s1.succ.index(lgoal), var=z)
    s2 = premises_of(s1, app2)[0]                         # ⇒ …, X:(¬θ[z]→φ[z])
    limp = LabelledFormula(x, Implies(neg(thz), phz))
    app3 = RuleApplication("impR", "succ", s2.succ.index(limp))
    kids = []
    for yy in subsets_nonempty(x):
        ctx = Sequent((LabelledFormula(yy, neg(thz)),), (lgoal,))
        kids.append(persistency_derivation(x, yy, phz, ctx=ctx))
    d3 = Derivation(s2, app3, tuple(kids))
    d2 = Derivation(s1, app2, (d3,))
    return Derivation(conc, app1, (d2,))


def _ekp_full_case(x, th, phi, var, imp, goal) -> Derivation:
    """X:¬θ, X:(¬θ→∃xφ) ⇒ X:goal by the left implication at the full label."""
    nt = neg(th)
    limp = LabelledFormula(x, imp)
    lgoal = LabelledFormula(x, goal)
    conc = Sequent((LabelledFormula(x, nt), limp), (lgoal,))
    app = RuleApplication("impL", "ante", 1, subset=x)
    q1, q2 = premises_of(conc, app)
    d1 = persistency_derivation(x, x, nt, ctx=Sequent((limp,), (lgoal,)))
    d2 = weaken_many(_ek(x, th, phi, var), ante=(LabelledFormula(x, nt), limp))
    return Derivation(conc, app, (d1, d2))


def _ekp(x, th: Formula, phi: Formula, var: str) -> Derivation:
    if len(x) > 2:
        raise SchemeError("the EKP layout is implemented for |X| <= 2")
    if var in free_vars(th):
        raise SchemeError(f"EKP requires that {var} is not free in theta")
    nt = neg(th)
    ex = IExists(var, phi)
    imp = Implies(nt, ex)
    goal = IExists(var, Implies(nt, phi))
    limp, lgoal = LabelledFormula(x, imp), LabelledFormula(x, goal)
    conc = Sequent((limp,), (lgoal,))
    fresh = FreshVars(all_vars(imp) | all_vars(goal))
    z0 = fresh.take()
    ph0 = subst_var(phi, var, z0)
    app1 = RuleApplication("iexistsR", "succ", 0, var=z0)
    s1 = premises_of(conc, app1)[0]                       # ⇒ X:goal, X:(¬θ→φ[z0])
    limp0 = LabelledFormula(x, Implies(nt, ph0))
    app2 = RuleApplication("impR", "succ", s1.succ.index(limp0))
    kids = []
    for yy, py in zip(subsets_nonempty(x), premises_of(s1, app2)):
        # py: Y:¬θ, X:imp ⇒ X:goal, Y:φ[z0]
        if yy == x:
            app3 = RuleApplication("impL", "ante", py.ante.index(limp), subset=x)
            d1 = persistency_derivation(
                x, x, nt, ctx=Sequent((limp,), (lgoal, LabelledFormula(x, ph0))))
            d2 = weaken_many(_ek(x, th, phi, var),
                             ante=(LabelledFormula(x, nt), limp),
                             succ=(LabelledFormula(x, ph0),))
            kids.append(Derivation(py, app3, (d1, d2)))
            continue
        # proper sublabel: split on X:imp at Y, then unfold Y's existential
        app3 = RuleApplication("impL", "ante", py.ante.index(limp), subset=yy)
        q1, q2 = premises_of(py, app3)
        d1 = persistency_derivation(
            yy, yy, nt, ctx=Sequent((limp,), (lgoal, LabelledFormula(yy, ph0))))
        lex = LabelledFormula(yy, ex)
        app4 = RuleApplication("iexistsL", "ante", q2.ante.index(lex), var=(z2 := fresh.take()))
        s4 = premises_of(q2, app4)[0]
        app5 = RuleApplication("iexistsR", "succ", s4.succ.index(lgoal), var=z2)
        s5 = premises_of(s4, app5)[0]
        ph2 = subst_var(phi, var, z2)
        limp2 = LabelledFormula(x, Implies(nt, ph2))
        app6 = RuleApplication("impR", "succ", s5.succ.index(limp2))
        inner = []
        for zz, pz in zip(subsets_nonempty(x), premises_of(s5, app6)):
            # pz: Y:φ[z2], X:imp, Y:¬θ, Z:¬θ ⇒ X:goal, Y:φ[z0], Z:φ[z2]
            rest_a = list(pz.ante)
            rest_a.remove(LabelledFormula(yy, ph2))
            rest_s = list(pz.succ)
            rest_s.remove(LabelledFormula(zz, ph2))
            if zz <= yy:
                inner.append(persistency_derivation(
                    yy, zz, ph2, ctx=Sequent(tuple(rest_a), tuple(rest_s))))
            elif zz == x:
                app7 = RuleApplication("impL", "ante", pz.ante.index(limp), subset=x)
                r1 = persistency_derivation(
                    x, x, nt,
                    ctx=Sequent(tuple(m for m in pz.ante
                                      if m != LabelledFormula(x, nt)), pz.succ))
                rs = list(pz.succ)
                rs.remove(lgoal)
                r2 = weaken_many(_ek(x, th, phi, var),
                                 ante=pz.ante, succ=tuple(rs))
                inner.append(Derivation(pz, app7, (r1, r2)))
            else:
                # Y ∪ Z = X: an explicit cut on X:¬θ glues the union lemma
                # to the full-label case
                left = _neg_union(yy, zz, th, Sequent((), ()))
                right = _ekp_full_case(x, th, phi, var, imp, goal)
                cutd = make_cut(left, right, LabelledFormula(x, nt))
                inner.append(weaken_many(
                    cutd,
                    ante=(LabelledFormula(yy, ph2),),
                    succ=(LabelledFormula(yy, ph0), LabelledFormula(zz, ph2))))
        inner_d = Derivation(s5, app6, tuple(inner))
        d5 = Derivation(s4, app5, (inner_d,))
        d2 = Derivation(q2, app4, (d5,))
        kids.append(Derivation(py, app3, (d1, d2)))
    d2 = Derivation(s1, app2, tuple(kids))
    return Derivation(conc, app1, (d2,))


# ---------------------------------------------------------------------------
# The infinite Casari countermodels, as membership predicates


@dataclass(frozen=True)
class CasariModelSpec:
    """Intensional interpretation of the binary relation R at world i.

    Variant "A": (2m+1, 2m+1) is always in I(R,i), and (2m, j) is in I(R,i)
    iff j ≠ i and (j is odd or j > 2m).  Variant "B": I(R,i) is
    {(n, k) | i < k, or (k = n and n ≠ i)}.  Worlds and the domain are both
    the natural numbers; the model is never materialized.
    """

    variant: str = "A"

    def __post_init__(self) -> None:
        if self.variant not in ("A", "B"):
            raise SchemeError("variant must be 'A' or 'B'")

    def member(self, i: int, pair: tuple[int, int]) -> bool:
        n, k = pair
        if self.variant == "A":
            if n % 2 == 1:
                return k == n
            return k != i and (k % 2 == 1 or k > n)
        return i < k or (k == n and n != i)


def casari_claim1(spec: CasariModelSpec, s: Iterable[int], m: int):
    """Support of ∃y R(2m+1, y) at every state: witness y = 2m+1.

    Returns (True, 2m+1) after verifying membership at every world of `s`.
    Variant A only.
    """
    if spec.variant != "A":
        raise SchemeError("claim 1 is stated for variant A")
    w = 2 * m + 1
    ok = all(spec.member(i, (w, w)) for i in set(s))
    return ok, (w if ok else None)


def casari_claim2_finite(spec: CasariModelSpec, s: Iterable[int], m: int):
    """Support of the existential at a finite state, with a bounded witness.

    Variant A: a finite state misses some number that is odd or even and
    greater than 2m; the checker finds such an n ≤ 2·(max(s∪{m})+1)+1 not
    in `s` and verifies (2m, n) ∈ I(R,i) for every i ∈ s.  Variant B: the
    analogous claim holds with witness k ≤ max(s∪{m})+1 exceeding every
    world of `s`.
    """
    s = set(s)
    hi = max(s | {m}) + 1
    if spec.variant == "A":
        for n in range(2 * hi + 2):
            if n in s:
                continue
            if n % 2 == 1 or n > 2 * m:
                if all(spec.member(i, (2 * m, n)) for i in s):
                    return True, n
        return False, None
    for k in range(hi + 1):
        if all(spec.member(i, (m, k)) for i in s):
            return True, k
    return False, None
