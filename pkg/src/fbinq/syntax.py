"""Abstract and concrete syntax of the inquisitive first-order language.

Formulas are built from falsum, predicate atoms, conjunction, implication,
inquisitive disjunction and the two quantifiers (universal and inquisitive
existential).  Negation ``~f`` and the question operator ``?f`` are surface
sugar: the parser expands them to ``f -> bot`` and ``f \\/ (f -> bot)``, and
the printer folds them back when the pattern matches.

Variables are plain strings.  Names starting with an underscore are reserved
for machine-generated fresh variables (eigenvariables, saturation witnesses)
and are rejected by the public parser, which makes freshness checkable
syntactically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence


class FbinqError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FbinqError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SignatureError(FbinqError):
    """Arity conflict or malformed atom."""


RESERVED_PREFIX = "_"


@dataclass(frozen=True)
class Predicate:
    name: str
    arity: int

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise SignatureError(f"negative arity for {self.name}")

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"


class Formula:
    """Base class of the formula AST; all nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return pprint(self)


def cache_hash(cls):
    """Memoize a frozen dataclass's structural hash in a `_h` slot.

    Formula trees are hashed constantly during proof search; recomputing the
    recursive dataclass hash dominates otherwise.
    """
    base = cls.__hash__

    def __hash__(self):
        try:
            return object.__getattribute__(self, "_h")
        except AttributeError:
            h = base(self)
            object.__setattr__(self, "_h", h)
            return h

    cls.__hash__ = __hash__
    return cls


@dataclass(frozen=True, repr=False)
class Bot(Formula):
    __slots__ = ()

    def __repr__(self) -> str:
        return "bot"


@cache_hash
@dataclass(frozen=True, repr=False)
class Atom(Formula):
    pred: Predicate
    args: tuple[str, ...]

    __slots__ = ("pred", "args", "_h")

    def __post_init__(self) -> None:
        if len(self.args) != self.pred.arity:
            raise SignatureError(
                f"{self.pred.name} expects {self.pred.arity} arguments, got {len(self.args)}"
            )

    def __repr__(self) -> str:
        return pprint(self)


@cache_hash
@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula
    __slots__ = ("left", "right", "_h")

    def __repr__(self) -> str:
        return pprint(self)


@cache_hash
@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula
    __slots__ = ("left", "right", "_h")

    def __repr__(self) -> str:
        return pprint(self)


@cache_hash
@dataclass(frozen=True, repr=False)
class IDisj(Formula):
    left: Formula
    right: Formula
    __slots__ = ("left", "right", "_h")

    def __repr__(self) -> str:
        return pprint(self)


@cache_hash
@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: str
    body: Formula
    __slots__ = ("var", "body", "_h")

    def __repr__(self) -> str:
        return pprint(self)


@cache_hash
@dataclass(frozen=True, repr=False)
class IExists(Formula):
    var: str
    body: Formula
    __slots__ = ("var", "body", "_h")

    def __repr__(self) -> str:
        return pprint(self)


BOT = Bot()


def neg(f: Formula) -> Formula:
    return Implies(f, BOT)


def query(f: Formula) -> Formula:
    return IDisj(f, neg(f))


def atom(name: str, *args: str) -> Atom:
    return Atom(Predicate(name, len(args)), tuple(args))


# ---------------------------------------------------------------------------
# Variables


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Bot):
        return frozenset()
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, (And, Implies, IDisj)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, IExists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def all_vars(f: Formula) -> frozenset[str]:
    """Free and bound variables occurring anywhere in f."""
    if isinstance(f, Bot):
        return frozenset()
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, (And, Implies, IDisj)):
        return all_vars(f.left) | all_vars(f.right)
    if isinstance(f, (Forall, IExists)):
        return all_vars(f.body) | {f.var}
    raise TypeError(f"not a formula: {f!r}")


def fresh_var(avoid: Iterable[str], hint: int = 0) -> str:
    """Smallest reserved-namespace variable not in `avoid`."""
    taken = set(avoid)
    k = hint
    while f"{RESERVED_PREFIX}v{k}" in taken:
        k += 1
    return f"{RESERVED_PREFIX}v{k}"


class FreshVars:
    """Deterministic stream of reserved fresh variables (one per derivation)."""

    def __init__(self, avoid: Iterable[str] = ()):
        self._avoid = set(avoid)
        self._next = 0

    def take(self, extra_avoid: Iterable[str] = ()) -> str:
        avoid = self._avoid | set(extra_avoid)
        v = fresh_var(avoid, self._next)
        self._avoid.add(v)
        self._next = int(v[2:]) + 1
        return v


def subst_parallel(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneous capture-avoiding substitution of variables for variables."""
    mapping = {x: z for x, z in mapping.items() if x != z}
    if not mapping:
        return f
    if isinstance(f, Bot):
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, (And, Implies, IDisj)):
        return type(f)(subst_parallel(f.left, mapping), subst_parallel(f.right, mapping))
    if isinstance(f, (Forall, IExists)):
        inner = {x: z for x, z in mapping.items() if x != f.var}
        relevant = {x: z for x, z in inner.items() if x in free_vars(f.body)}
        if f.var in relevant.values():
            # binder would capture an incoming variable: rename it first
            avoid = all_vars(f.body) | set(relevant.values()) | set(relevant)
            v = fresh_var(avoid)
            body = subst_parallel(f.body, {f.var: v})
            return type(f)(v, subst_parallel(body, relevant))
        return type(f)(f.var, subst_parallel(f.body, relevant))
    raise TypeError(f"not a formula: {f!r}")


def subst_var(f: Formula, x: str, z: str) -> Formula:
    """Capture-avoiding substitution f[z/x] of free occurrences of x by z."""
    return subst_parallel(f, {x: z})


# ---------------------------------------------------------------------------
# Scheme substitution


def scheme_subst(
    f: Formula, pred: Predicate, body: Formula, body_vars: Sequence[str]
) -> Formula:
    """Replace every occurrence P(a1..an) in f by a clean instance of `body`.

    `body_vars` fixes the order of the body's free variables; it must list
    exactly the free variables of `body` and match the arity of `pred`.  The
    body's bound variables are renamed per occurrence so that no argument
    variable gets captured.
    """
    if len(body_vars) != pred.arity:
        raise SignatureError(
            f"body variable list has length {len(body_vars)}, expected {pred.arity}"
        )
    if len(set(body_vars)) != len(body_vars):
        raise SignatureError("body variable list contains duplicates")
    if set(body_vars) != set(free_vars(body)):
        raise SignatureError(
            f"body free variables {sorted(free_vars(body))} do not match "
            f"declared list {list(body_vars)}"
        )

    def clean_instance(args: tuple[str, ...]) -> Formula:
        inst = _rename_binders_avoiding(body, set(args))
        return subst_parallel(inst, dict(zip(body_vars, args)))

    def go(g: Formula) -> Formula:
        if isinstance(g, Bot):
            return g
        if isinstance(g, Atom):
            if g.pred == pred:
                return clean_instance(g.args)
            return g
        if isinstance(g, (And, Implies, IDisj)):
            return type(g)(go(g.left), go(g.right))
        if isinstance(g, (Forall, IExists)):
            return type(g)(g.var, go(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def _rename_binders_avoiding(f: Formula, avoid: set[str]) -> Formula:
    if isinstance(f, (Bot, Atom)):
        return f
    if isinstance(f, (And, Implies, IDisj)):
        return type(f)(
            _rename_binders_avoiding(f.left, avoid),
            _rename_binders_avoiding(f.right, avoid),
        )
    if isinstance(f, (Forall, IExists)):
        body = _rename_binders_avoiding(f.body, avoid)
        if f.var in avoid:
            v = fresh_var(avoid | all_vars(body))
            return type(f)(v, subst_var(body, f.var, v))
        return type(f)(f.var, body)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Signatures and subformulas


def collect_signature(fs: Iterable[Formula]) -> dict[str, int]:
    sig: dict[str, int] = {}
    for f in fs:
        for a in atoms_of(f):
            prev = sig.setdefault(a.pred.name, a.pred.arity)
            if prev != a.pred.arity:
                raise SignatureError(
                    f"{a.pred.name} used with arities {prev} and {a.pred.arity}"
                )
    return sig


def atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Implies, IDisj)):
        yield from atoms_of(f.left)
        yield from atoms_of(f.right)
    elif isinstance(f, (Forall, IExists)):
        yield from atoms_of(f.body)


def subformulas(f: Formula, variables: Sequence[str]) -> frozenset[Formula]:
    """Troelstra-Schwichtenberg subformula closure.

    Quantifier subformulas are instantiated with variables drawn from the
    given finite pool only.
    """
    out: set[Formula] = set()

    def go(g: Formula) -> None:
        if g in out:
            return
        out.add(g)
        if isinstance(g, (And, Implies, IDisj)):
            go(g.left)
            go(g.right)
        elif isinstance(g, (Forall, IExists)):
            for z in variables:
                go(subst_var(g.body, g.var, z))

    go(f)
    return frozenset(out)


def is_subformula_instance(sub: Formula, f: Formula) -> bool:
    """True iff `sub` lies in the TS subformula closure of `f` with quantifier
    instances drawn from the whole variable universe."""
    if sub == f:
        return True
    if isinstance(f, (And, Implies, IDisj)):
        return is_subformula_instance(sub, f.left) or is_subformula_instance(sub, f.right)
    if isinstance(f, (Forall, IExists)):
        candidates = set(free_vars(sub)) | set(free_vars(f.body)) | {f.var}
        candidates.add(fresh_var(all_vars(sub) | all_vars(f)))
        return any(
            is_subformula_instance(sub, subst_var(f.body, f.var, z)) for z in candidates
        )
    return False


_ALPHA_CACHE: dict[Formula, Formula] = {}


def alpha_canon(f: Formula) -> Formula:
    """Rename bound variables to canonical reserved names in traversal order,
    so alpha-equivalent formulas become syntactically identical."""
    hit = _ALPHA_CACHE.get(f)
    if hit is not None:
        return hit

    counter = [0]

    def go(g: Formula, ren: dict[str, str]) -> Formula:
        if isinstance(g, Bot):
            return g
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(ren.get(a, a) for a in g.args))
        if isinstance(g, (And, Implies, IDisj)):
            return type(g)(go(g.left, ren), go(g.right, ren))
        if isinstance(g, (Forall, IExists)):
            v = f"{RESERVED_PREFIX}b{counter[0]}"
            counter[0] += 1
            return type(g)(v, go(g.body, {**ren, g.var: v}))
        raise TypeError(f"not a formula: {g!r}")

    out = go(f, {})
    _ALPHA_CACHE[f] = out
    return out


def alpha_eq(f: Formula, g: Formula) -> bool:
    """Equality up to renaming of bound variables."""
    return f == g or alpha_canon(f) == alpha_canon(g)


def connective_count(f: Formula) -> int:
    """Number of connectives and quantifiers; the length measure on formulas."""
    if isinstance(f, (Bot, Atom)):
        return 0
    if isinstance(f, (And, Implies, IDisj)):
        return 1 + connective_count(f.left) + connective_count(f.right)
    if isinstance(f, (Forall, IExists)):
        return 1 + connective_count(f.body)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|\\/|[&~?().,])
""",
    re.VERBOSE,
)

_KEYWORDS = {"bot", "forall", "iexists"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            toks.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, signature: dict[str, int] | None,
                 allow_reserved: bool = False):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig: dict[str, int] = dict(signature or {})
        self.allow_reserved = allow_reserved

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> None:
        kind, val, pos = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Formula:
        f = self.formula()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input {val!r}", pos)
        return f

    # -> is right associative and binds loosest
    def formula(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->":
            self.next()
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "\\/":
            self.next()
            f = IDisj(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "~":
            self.next()
            return neg(self.unary())
        if val == "?":
            self.next()
            return query(self.unary())
        if val == "forall" or val == "iexists":
            self.next()
            var = self.variable()
            self.expect(".")
            body = self.formula()
            return Forall(var, body) if val == "forall" else IExists(var, body)
        if val == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if val == "bot":
            self.next()
            return BOT
        if kind == "name":
            return self.atom()
        raise ParseError(f"expected a formula, found {val or 'end of input'!r}", pos)

    def variable(self) -> str:
        kind, val, pos = self.next()
        if kind != "name" or val in _KEYWORDS:
            raise ParseError(f"expected a variable, found {val!r}", pos)
        if val.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved", pos)
        return val

    def atom(self) -> Formula:
        kind, name, pos = self.next()
        if name.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved", pos)
        args: list[str] = []
        if self.peek()[1] == "(":
            self.next()
            args.append(self.variable())
            while self.peek()[1] == ",":
                self.next()
                args.append(self.variable())
            self.expect(")")
        arity = self.sig.setdefault(name, len(args))
        if arity != len(args):
            raise ParseError(
                f"{name} previously used with arity {arity}, now {len(args)}", pos
            )
        return Atom(Predicate(name, len(args)), tuple(args))


def parse(text: str, signature: dict[str, int] | None = None) -> Formula:
    """Parse the ASCII concrete syntax into a Formula.

    The signature is inferred from first use per predicate name; passing one
    in seeds (and constrains) the inference.
    """
    return _Parser(text, signature).parse()


def parse_internal(text: str, signature: dict[str, int] | None = None) -> Formula:
    """Like parse, but accepts reserved (underscore) names.

    Used when reading back serialized derivations, whose formulas may contain
    machine-generated eigenvariables.
    """
    return _Parser(text, signature, allow_reserved=True).parse()


# precedence levels for printing: higher binds tighter
_PREC_IMP = 1
_PREC_DISJ = 2
_PREC_CONJ = 3
_PREC_UNARY = 4


def pprint(f: Formula) -> str:
    """Print a formula; inverse of parse up to parenthesization."""
    return _pp(f, 0)


def _pp(f: Formula, ctx: int) -> str:
    # sugar first: ?g == g \/ ~g, ~g == g -> bot
    if isinstance(f, IDisj) and f.right == neg(f.left):
        return f"?{_pp(f.left, _PREC_UNARY)}"
    if isinstance(f, Implies) and f.right == BOT:
        return f"~{_pp(f.left, _PREC_UNARY)}"
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred.name
        return f"{f.pred.name}({', '.join(f.args)})"
    if isinstance(f, Implies):
        s = f"{_pp(f.left, _PREC_IMP + 1)} -> {_pp(f.right, _PREC_IMP)}"
        return f"({s})" if ctx > _PREC_IMP else s
    if isinstance(f, IDisj):
        s = f"{_pp(f.left, _PREC_DISJ)} \\/ {_pp(f.right, _PREC_DISJ + 1)}"
        return f"({s})" if ctx > _PREC_DISJ else s
    if isinstance(f, And):
        s = f"{_pp(f.left, _PREC_CONJ)} & {_pp(f.right, _PREC_CONJ + 1)}"
        return f"({s})" if ctx > _PREC_CONJ else s
    if isinstance(f, (Forall, IExists)):
        kw = "forall" if isinstance(f, Forall) else "iexists"
        s = f"{kw} {f.var}. {_pp(f.body, 0)}"
        return f"({s})" if ctx > 0 else s
    raise TypeError(f"not a formula: {f!r}")


_LATEX_NAMES = {"bot": r"\bot"}


def latex(f: Formula, ctx: int = 0) -> str:
    """LaTeX rendering; uses macros \\inqd and \\inqe for the inquisitive
    connectives (define them as e.g. \\mathbin{\\vee\\mkern-9mu\\vee} and
    \\exists\\mkern-2mu)."""
    if isinstance(f, IDisj) and f.right == neg(f.left):
        return f"?{latex(f.left, _PREC_UNARY)}"
    if isinstance(f, Implies) and f.right == BOT:
        return rf"\neg {latex(f.left, _PREC_UNARY)}"
    if isinstance(f, Bot):
        return r"\bot"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred.name
        return f"{f.pred.name}({', '.join(f.args)})"
    if isinstance(f, Implies):
        s = rf"{latex(f.left, _PREC_IMP + 1)} \to {latex(f.right, _PREC_IMP)}"
        return rf"({s})" if ctx > _PREC_IMP else s
    if isinstance(f, IDisj):
        s = rf"{latex(f.left, _PREC_DISJ)} \inqd {latex(f.right, _PREC_DISJ + 1)}"
        return rf"({s})" if ctx > _PREC_DISJ else s
    if isinstance(f, And):
        s = rf"{latex(f.left, _PREC_CONJ)} \land {latex(f.right, _PREC_CONJ + 1)}"
        return rf"({s})" if ctx > _PREC_CONJ else s
    if isinstance(f, Forall):
        s = rf"\forall {f.var}.\, {latex(f.body, 0)}"
        return rf"({s})" if ctx > 0 else s
    if isinstance(f, IExists):
        s = rf"\inqe {f.var}.\, {latex(f.body, 0)}"
        return rf"({s})" if ctx > 0 else s
    raise TypeError(f"not a formula: {f!r}")
