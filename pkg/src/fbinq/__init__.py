"""Proof search, countermodels, and proof transformations for finitely
bounded inquisitive predicate logic.

Labelled sequents carry finite sets of positive integers as labels; the
calculus is sound and complete for support in relational information models
whose state size is bounded by the label universe.  The package provides:

- `syntax`: the formula AST, parser, and printers;
- `semantics`: models, the support relation, and brute-force validity;
- `calculus`: the thirteen-rule labelled calculus, checker, and prover;
- `transform`: admissible rules (weakening, contraction, inversion,
  substitution), persistency, monotonicity, and cut elimination;
- `saturate`: saturation of unprovable sequents and countermodel extraction;
- `schemes`: named axiom schemes, their uniform derivations, and the
  bounded-Casari model constructions;
- `cli`: the `fbinq` command line interface.
"""

from .syntax import (
    And,
    Atom,
    Bot,
    BOT,
    FbinqError,
    Forall,
    Formula,
    IDisj,
    IExists,
    Implies,
    ParseError,
    Predicate,
    atom,
    neg,
    parse,
    pprint,
    query,
)
from .semantics import (
    Model,
    brute_force_valid,
    find_countermodel,
    load_model,
    make_model,
    model_from_json,
    model_to_json,
    sequent_valid_in,
    supports,
)
from .calculus import (
    CheckError,
    Derivation,
    Failure,
    LabelledFormula,
    RuleApplication,
    SearchConfig,
    Sequent,
    check_derivation,
    check_ok,
    derivation_from_json,
    derivation_to_json,
    initial_sequent,
    lf,
    prove,
    prove_formula,
    sequent,
    sequent_from_text,
    sequent_to_text,
)
from .transform import (
    contract,
    eliminate_cut,
    invert,
    make_cut,
    mon,
    neg_left,
    neg_right,
    persistency_derivation,
    rename_eigenvariables,
    scheme_subst_derivation,
    subst_derivation,
    weaken,
    weaken_many,
)
from .schemes import (
    CasariModelSpec,
    SchemeError,
    appendix_derivation,
    casari_claim1,
    casari_claim2_finite,
    casari_derivation,
    cd_derivation,
    scheme,
)
from .saturate import (
    SaturatedSequent,
    SaturationBudgetError,
    audit,
    derived_model,
    saturate,
    verify_truth_lemma,
)

__version__ = "1.0.0"
