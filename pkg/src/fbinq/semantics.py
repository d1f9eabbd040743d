"""Finite relational information models and the support relation.

A model is a triple (worlds, domain, interp) where interp assigns to each
predicate and world a set of domain tuples.  States are subsets of the world
set; support of a formula at a state follows the usual seven clauses, with
implication quantifying over all substates and the quantifiers over the whole
domain.  `brute_force_valid` is an exhaustive validity oracle over all models
up to given world/domain bounds; on propositional input with the world bound
set to 2^n (n the number of propositional variables) it is an exact decision
procedure.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping

from .syntax import (
    And,
    Atom,
    Bot,
    FbinqError,
    Forall,
    Formula,
    IDisj,
    IExists,
    Implies,
    collect_signature,
    free_vars,
)

World = Hashable
Individual = Hashable


class ModelError(FbinqError):
    pass


class EnumerationCapError(FbinqError):
    """Raised when exhaustive model enumeration would exceed the cap."""


@dataclass(frozen=True)
class Model:
    """Relational information model (W, D, I)."""

    worlds: frozenset[World]
    domain: frozenset[Individual]
    interp: Mapping[tuple[str, World], frozenset[tuple[Individual, ...]]]
    arities: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.worlds:
            raise ModelError("empty world set")
        if not self.domain:
            raise ModelError("empty domain")
        for (pred, w), tuples in self.interp.items():
            if w not in self.worlds:
                raise ModelError(f"interpretation mentions unknown world {w!r}")
            arity = self.arities.get(pred)
            for t in tuples:
                if arity is not None and len(t) != arity:
                    raise ModelError(
                        f"{pred} tuple {t!r} does not match arity {arity}"
                    )
                if any(d not in self.domain for d in t):
                    raise ModelError(f"{pred} tuple {t!r} outside domain")

    def holds_at(self, pred: str, w: World, args: tuple[Individual, ...]) -> bool:
        # missing (pred, world) entries denote the empty relation
        return args in self.interp.get((pred, w), frozenset())


def make_model(
    worlds: Iterable[World],
    domain: Iterable[Individual],
    interp: Mapping[tuple[str, World], Iterable[tuple[Individual, ...]]],
    arities: Mapping[str, int] | None = None,
) -> Model:
    frozen = {k: frozenset(tuple(t) for t in v) for k, v in interp.items()}
    return Model(frozenset(worlds), frozenset(domain), frozen, dict(arities or {}))


def model_to_json(m: Model) -> dict:
    by_pred: dict[str, dict[str, list[list]]] = {}
    for (pred, w), tuples in sorted(m.interp.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        if not tuples:
            continue
        by_pred.setdefault(pred, {})[str(w)] = sorted([list(t) for t in tuples])
    return {
        "worlds": sorted(str(w) for w in m.worlds),
        "domain": sorted(str(d) for d in m.domain),
        "interp": by_pred,
    }


def model_from_json(data: dict) -> Model:
    worlds = list(data["worlds"])
    domain = list(data["domain"])
    interp: dict[tuple[str, World], frozenset] = {}
    for pred, per_world in data.get("interp", {}).items():
        for w, tuples in per_world.items():
            if w not in worlds:
                raise ModelError(f"interp mentions unknown world {w!r}")
            interp[(pred, w)] = frozenset(tuple(t) for t in tuples)
    return make_model(worlds, domain, interp)


def load_model(path: str) -> Model:
    with open(path) as fh:
        return model_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Support


def supports(
    m: Model,
    state: Iterable[World],
    g: Mapping[str, Individual],
    f: Formula,
    _cache: dict | None = None,
) -> bool:
    """The support relation M, s |=_g f.

    g must assign a domain element to every free variable of f.
    """
    s = frozenset(state)
    if not s <= m.worlds:
        raise ModelError("state is not a subset of the model's worlds")
    missing = free_vars(f) - set(g)
    if missing:
        raise ModelError(f"unassigned free variables: {sorted(missing)}")
    cache: dict = {} if _cache is None else _cache
    return _supports(m, s, dict(g), f, cache)


def _supports(
    m: Model,
    s: frozenset,
    g: dict,
    f: Formula,
    cache: dict,
) -> bool:
    key = (s, f, tuple(sorted((x, g[x]) for x in free_vars(f))))
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(f, Bot):
        out = not s
    elif isinstance(f, Atom):
        args = tuple(g[x] for x in f.args)
        out = all(m.holds_at(f.pred.name, w, args) for w in s)
    elif isinstance(f, And):
        out = _supports(m, s, g, f.left, cache) and _supports(m, s, g, f.right, cache)
    elif isinstance(f, IDisj):
        out = _supports(m, s, g, f.left, cache) or _supports(m, s, g, f.right, cache)
    elif isinstance(f, Implies):
        out = all(
            not _supports(m, t, g, f.left, cache) or _supports(m, t, g, f.right, cache)
            for t in _subsets(s)
        )
    elif isinstance(f, Forall):
        out = all(
            _supports(m, s, {**g, f.var: d}, f.body, cache) for d in m.domain
        )
    elif isinstance(f, IExists):
        out = any(
            _supports(m, s, {**g, f.var: d}, f.body, cache) for d in m.domain
        )
    else:
        raise TypeError(f"not a formula: {f!r}")
    cache[key] = out
    return out


def _subsets(s: frozenset) -> Iterator[frozenset]:
    elems = sorted(s, key=repr)
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            yield frozenset(combo)


def labelled_supports(
    m: Model,
    naming: Mapping[int, World],
    g: Mapping[str, Individual],
    label: Iterable[int],
    f: Formula,
    _cache: dict | None = None,
) -> bool:
    """Support of a labelled formula X:f, evaluated at the image state f[X]."""
    label = frozenset(label)
    missing = [k for k in label if k not in naming]
    if missing:
        raise ModelError(f"naming undefined on label elements {sorted(missing)}")
    state = frozenset(naming[k] for k in label)
    return supports(m, state, g, f, _cache=_cache)


def sequent_valid_in(
    m: Model,
    naming: Mapping[int, World],
    g: Mapping[str, Individual],
    antecedent: Iterable[tuple[frozenset[int], Formula]],
    consequent: Iterable[tuple[frozenset[int], Formula]],
) -> bool:
    """True iff some consequent member is supported whenever all antecedent
    members are (under the given naming and assignment)."""
    cache: dict = {}
    if all(labelled_supports(m, naming, g, x, f, _cache=cache) for x, f in antecedent):
        return any(labelled_supports(m, naming, g, x, f, _cache=cache) for x, f in consequent)
    return True


# ---------------------------------------------------------------------------
# Brute-force validity oracle


def enumerate_models(
    signature: Mapping[str, int],
    max_worlds: int,
    max_domain: int,
    cap: int = 2_000_000,
) -> Iterator[Model]:
    """All models over the signature with 1..max_worlds worlds and
    1..max_domain individuals, interpretations enumerated exhaustively.

    Worlds are w1..wn and individuals d1..dm, in sorted order; raises
    EnumerationCapError if the total count would exceed `cap`.
    """
    preds = sorted(signature.items())
    total = 0
    for n in range(1, max_worlds + 1):
        for d in range(1, max_domain + 1):
            cells = sum(n * (d ** arity) for _, arity in preds)
            if cells > 60:
                raise EnumerationCapError(
                    f"interpretation space 2^{cells} too large to enumerate"
                )
            total += 2 ** cells
            if total > cap:
                raise EnumerationCapError(
                    f"model count exceeds enumeration cap {cap}"
                )
    for n in range(1, max_worlds + 1):
        worlds = [f"w{i}" for i in range(1, n + 1)]
        for dn in range(1, max_domain + 1):
            domain = [f"d{i}" for i in range(1, dn + 1)]
            slots = [
                (name, w, t)
                for name, arity in preds
                for w in worlds
                for t in itertools.product(domain, repeat=arity)
            ]
            for bits in itertools.product([False, True], repeat=len(slots)):
                interp: dict[tuple[str, str], set] = {}
                for (name, w, t), b in zip(slots, bits):
                    if b:
                        interp.setdefault((name, w), set()).add(t)
                yield make_model(worlds, domain, interp, dict(signature))


def brute_force_valid(
    f: Formula,
    max_worlds: int,
    max_domain: int,
    cap: int = 2_000_000,
    jobs: int = 1,
) -> bool:
    """Exhaustive validity check over all models within the bounds.

    By persistency it suffices to test the full state of each enumerated
    model: support at a proper substate s equals support at the full state of
    the restricted model with world set s, which is enumerated separately.
    """
    if max_worlds < 1 or max_domain < 1:
        raise ModelError("bounds must be at least 1")
    sig = collect_signature([f])
    fv = sorted(free_vars(f))
    if jobs > 1:
        return _brute_force_parallel(f, sig, max_worlds, max_domain, cap, jobs)
    for m in enumerate_models(sig, max_worlds, max_domain, cap=cap):
        if _refutes(m, f, fv):
            return False
    return True


def _refutes(m: Model, f: Formula, fv: list[str]) -> bool:
    cache: dict = {}
    for values in itertools.product(sorted(m.domain), repeat=len(fv)):
        g = dict(zip(fv, values))
        if not supports(m, m.worlds, g, f, _cache=cache):
            return True
    return False


def find_countermodel(
    f: Formula, max_worlds: int, max_domain: int, cap: int = 2_000_000
) -> tuple[Model, dict[str, Individual]] | None:
    """First enumerated (model, assignment) whose full state fails to support f."""
    sig = collect_signature([f])
    fv = sorted(free_vars(f))
    for m in enumerate_models(sig, max_worlds, max_domain, cap=cap):
        cache: dict = {}
        for values in itertools.product(sorted(m.domain), repeat=len(fv)):
            g = dict(zip(fv, values))
            if not supports(m, m.worlds, g, f, _cache=cache):
                return m, g
    return None


def _check_chunk(args) -> bool:
    f, sig, max_worlds, max_domain, cap, jobs, offset = args
    fv = sorted(free_vars(f))
    for i, m in enumerate(enumerate_models(sig, max_worlds, max_domain, cap=cap)):
        if i % jobs != offset:
            continue
        if _refutes(m, f, fv):
            return False
    return True


def _brute_force_parallel(f, sig, max_worlds, max_domain, cap, jobs) -> bool:
    from concurrent.futures import ProcessPoolExecutor

    tasks = [(f, sig, max_worlds, max_domain, cap, jobs, k) for k in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return all(pool.map(_check_chunk, tasks))
