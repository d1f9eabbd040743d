"""Command-line interface.

Subcommands: prove, check-proof, check-model, countermodel, scheme,
casari-claims, eliminate-cut, selftest.  Output formats: text (default),
json, latex.  Every emitted certificate is re-verified before printing:
derivations go through the checker and countermodels through the support
relation, so a successful exit never rests on unvalidated output.

Exit codes: 0 proved/checked, 1 refuted, 2 inconclusive, 3 usage or parse
error, 4 internal verification failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time

from .syntax import FbinqError, ParseError, latex, parse, pprint
from .calculus import (
    Derivation,
    LABEL_CAP,
    check_ok,
    derivation_from_json,
    derivation_to_json,
    derivation_to_latex,
    initial_sequent,
    prove,
    SearchConfig,
    sequent_to_text,
)
from .semantics import load_model, model_to_json, supports
from .saturate import SaturationBudgetError, derived_model, saturate, verify_truth_lemma
from .schemes import (
    APPENDIX_NAMES,
    SCHEME_NAMES,
    CasariModelSpec,
    casari_claim1,
    casari_claim2_finite,
    scheme,
)
from .transform import eliminate_cut
from . import selftest as _selftest

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_INTERNAL = 4


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    if fmt == "latex" and "derivation_latex" in report:
        print(report["derivation_latex"])
        return
    print(f"{report['command']}: {report['verdict']}"
          + (f" ({report['seconds']}s)" if "seconds" in report else ""))
    for key in ("detail", "sequent", "formula"):
        if key in report:
            print(f"  {key}: {report[key]}")
    if "countermodel" in report and fmt == "text":
        cm = report["countermodel"]
        print(f"  countermodel: {len(cm['model']['worlds'])} worlds, "
              f"domain {cm['model']['domain']}")
    if "results" in report:
        for r in report["results"]:
            print("  {} {:2d}. {} ({}s) - {}".format(
                "PASS" if r["passed"] else "FAIL", r["index"], r["name"],
                r["seconds"], r["detail"]))


def _formula_arg(text: str):
    """A formula literal, or a scheme name in angle brackets."""
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        return scheme(text[1:-1])
    return parse(text)


def _attach_derivation(report: dict, d: Derivation, fmt: str) -> None:
    report["derivation"] = derivation_to_json(d)
    if fmt == "latex":
        report["derivation_latex"] = derivation_to_latex(d)


def _attach_countermodel(report: dict, ss) -> bool:
    """Verify the saturated sequent's model and attach it; False on failure."""
    if not verify_truth_lemma(ss):
        return False
    model, naming, assignment = derived_model(ss)
    report["countermodel"] = {
        "model": model_to_json(model),
        "naming": {str(k): v for k, v in naming.items()},
        "assignment": dict(assignment),
    }
    return True


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        inst_budget=args.inst_budget,
        fresh_budget=args.fresh_budget,
        node_budget=args.node_budget,
    )


def cmd_prove(args) -> int:
    f = _formula_arg(args.formula)
    if not 1 <= args.bound <= LABEL_CAP:
        raise FbinqError(f"--bound must be between 1 and {LABEL_CAP}")
    seq = initial_sequent(f, args.bound)
    report = {"command": "prove", "formula": pprint(f),
              "sequent": sequent_to_text(seq),
              "budgets": {"bound": args.bound, "inst": args.inst_budget,
                          "fresh": args.fresh_budget, "nodes": args.node_budget}}
    t0 = time.time()
    out = prove(seq, _search_config(args))
    report["seconds"] = round(time.time() - t0, 3)
    if isinstance(out, Derivation):
        if not check_ok(out):
            report["verdict"] = "failed"
            report["detail"] = "produced derivation failed re-verification"
            _emit(report, args.format)
            return EXIT_INTERNAL
        report["verdict"] = "proved"
        _attach_derivation(report, out, args.format)
        _emit(report, args.format)
        return EXIT_OK
    if out.reason == "refuted":
        report["verdict"] = "refuted"
        ss = saturate(seq, range(1, args.bound + 1), _search_config(args),
                      pool_max=args.pool_max)
        if isinstance(ss, Derivation) or not _attach_countermodel(report, ss):
            report["verdict"] = "failed"
            report["detail"] = "refutation did not yield a verified countermodel"
            _emit(report, args.format)
            return EXIT_INTERNAL
        _emit(report, args.format)
        return EXIT_REFUTED
    report["verdict"] = "inconclusive"
    report["detail"] = f"search gave up ({out.reason})"
    _emit(report, args.format)
    return EXIT_INCONCLUSIVE


def cmd_countermodel(args) -> int:
    f = _formula_arg(args.formula)
    seq = initial_sequent(f, args.bound)
    report = {"command": "countermodel", "formula": pprint(f),
              "sequent": sequent_to_text(seq)}
    t0 = time.time()
    try:
        out = saturate(seq, range(1, args.bound + 1), pool_max=args.pool_max)
    except SaturationBudgetError as e:
        report["verdict"] = "inconclusive"
        report["detail"] = str(e)
        report["seconds"] = round(time.time() - t0, 3)
        _emit(report, args.format)
        return EXIT_INCONCLUSIVE
    report["seconds"] = round(time.time() - t0, 3)
    if isinstance(out, Derivation):
        report["verdict"] = "proved"
        if not check_ok(out):
            report["verdict"] = "failed"
            _emit(report, args.format)
            return EXIT_INTERNAL
        _attach_derivation(report, out, args.format)
        _emit(report, args.format)
        return EXIT_OK
    if not _attach_countermodel(report, out):
        report["verdict"] = "failed"
        report["detail"] = "derived model failed the truth lemma"
        _emit(report, args.format)
        return EXIT_INTERNAL
    report["verdict"] = "refuted"
    _emit(report, args.format)
    return EXIT_REFUTED


def cmd_check_proof(args) -> int:
    with open(args.file) as fh:
        data = json.load(fh)
    d = derivation_from_json(data)
    report = {"command": "check-proof", "sequent": sequent_to_text(d.conclusion)}
    if "cut" in d.rules_used():
        report["verdict"] = "failed"
        report["detail"] = ("derivation contains cut nodes; run `eliminate-cut` "
                            "to obtain a checkable certificate")
        _emit(report, args.format)
        return EXIT_USAGE
    from .calculus import CheckError, check_derivation
    try:
        check_derivation(d)
    except CheckError as e:
        report["verdict"] = "failed"
        report["detail"] = str(e)
        _emit(report, args.format)
        return EXIT_INTERNAL
    report["verdict"] = "checked"
    if args.format == "latex":
        report["derivation_latex"] = derivation_to_latex(d)
    _emit(report, args.format)
    return EXIT_OK


def cmd_check_model(args) -> int:
    model = load_model(args.model)
    f = _formula_arg(args.formula)
    state = frozenset(w for w in args.state.split(",") if w) if args.state else frozenset()
    unknown = state - model.worlds
    if unknown:
        raise FbinqError(f"unknown worlds {sorted(unknown)}")
    assignment = {}
    if args.assign:
        for part in args.assign.split(","):
            var, _, val = part.partition("=")
            if val not in model.domain:
                raise FbinqError(f"unknown individual {val!r}")
            assignment[var] = val
    verdict = supports(model, state, assignment, f)
    report = {"command": "check-model", "verdict": "checked",
              "formula": pprint(f), "state": sorted(state),
              "supported": verdict}
    report["detail"] = f"supported={verdict}"
    _emit(report, args.format)
    return EXIT_OK


def cmd_scheme(args) -> int:
    f = scheme(args.name, body=parse(args.body) if args.body else None,
               psi=parse(args.psi) if args.psi else None, var=args.var)
    report = {"command": "scheme", "verdict": "checked",
              "name": args.name, "formula": pprint(f)}
    if args.format == "latex":
        print(latex(f))
        return EXIT_OK
    if args.format == "json":
        _emit(report, "json")
        return EXIT_OK
    print(pprint(f))
    return EXIT_OK


def cmd_casari_claims(args) -> int:
    variants = ["A", "B"] if args.variant == "both" else [args.variant]
    worlds = list(range(args.maxWorld + 1))
    rows = []
    all_ok = True
    for variant in variants:
        spec = CasariModelSpec(variant)
        for m in range(args.maxM + 1):
            checked, failures, max_wit = 0, 0, 0
            for r in range(len(worlds) + 1):
                for s_tuple in itertools.combinations(worlds, r):
                    s = set(s_tuple)
                    claims = []
                    if variant == "A":
                        claims.append(casari_claim1(spec, s, m))
                    claims.append(casari_claim2_finite(spec, s, m))
                    for ok, wit in claims:
                        checked += 1
                        failures += not ok
                        if ok:
                            max_wit = max(max_wit, wit)
            all_ok &= failures == 0
            rows.append({"variant": variant, "m": m, "checked": checked,
                         "failures": failures, "max_witness": max_wit})
    report = {"command": "casari-claims",
              "verdict": "checked" if all_ok else "failed", "rows": rows}
    if args.format == "json":
        _emit(report, "json")
    else:
        print("variant  m  checked  failures  max witness")
        for r in rows:
            print(f"{r['variant']:>7}  {r['m']}  {r['checked']:>7}  "
                  f"{r['failures']:>8}  {r['max_witness']:>11}")
    return EXIT_OK if all_ok else EXIT_INTERNAL


def cmd_eliminate_cut(args) -> int:
    with open(args.file) as fh:
        d = derivation_from_json(json.load(fh))
    report = {"command": "eliminate-cut", "sequent": sequent_to_text(d.conclusion)}
    t0 = time.time()
    out = eliminate_cut(d)
    report["seconds"] = round(time.time() - t0, 3)
    if "cut" in out.rules_used() or not check_ok(out):
        report["verdict"] = "failed"
        report["detail"] = "cut-free result failed re-verification"
        _emit(report, args.format)
        return EXIT_INTERNAL
    report["verdict"] = "checked"
    _attach_derivation(report, out, args.format)
    _emit(report, args.format)
    return EXIT_OK


def cmd_selftest(args) -> int:
    only = [int(t) for t in args.only.split(",")] if args.only else None
    results = _selftest.run_all(seed=args.seed, only=only,
                                report=None if args.format == "json" else print)
    report = {"command": "selftest", "seed": args.seed, "results": results,
              "verdict": "checked" if all(r["passed"] for r in results) else "failed"}
    if args.format == "json":
        _emit(report, "json")
    else:
        print(f"selftest: {report['verdict']}")
    return EXIT_OK if report["verdict"] == "checked" else EXIT_INTERNAL


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fbinq",
        description="Proof search, proof checking, and countermodels for "
                    "finitely bounded inquisitive predicate logic.")
    sub = top.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json", "latex"),
                       default="text")
        p.add_argument("--seed", type=int, default=_selftest.DEFAULT_SEED)
        p.add_argument("--jobs", type=int, default=1)

    def budgets(p):
        p.add_argument("--bound", type=int, default=2,
                       help="label universe size (1..%d)" % LABEL_CAP)
        p.add_argument("--inst-budget", type=int, default=8)
        p.add_argument("--fresh-budget", type=int, default=2)
        p.add_argument("--node-budget", type=int, default=50_000)
        p.add_argument("--pool-max", type=int, default=6)

    p = sub.add_parser("prove", help="prove a formula at a label bound")
    p.add_argument("formula")
    common(p)
    budgets(p)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("countermodel", help="saturate and extract a countermodel")
    p.add_argument("formula")
    common(p)
    budgets(p)
    p.set_defaults(fn=cmd_countermodel)

    p = sub.add_parser("check-proof", help="check a derivation JSON file")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_check_proof)

    p = sub.add_parser("check-model", help="evaluate support in a model file")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--state", default="", help="comma-separated world names")
    p.add_argument("--assign", default="", help="var=individual pairs, comma-separated")
    common(p)
    p.set_defaults(fn=cmd_check_model)

    p = sub.add_parser("scheme", help="print a named formula scheme")
    p.add_argument("name", choices=SCHEME_NAMES)
    p.add_argument("--body", default=None)
    p.add_argument("--psi", default=None)
    p.add_argument("--var", default="x")
    common(p)
    p.set_defaults(fn=cmd_scheme)

    p = sub.add_parser("casari-claims", help="sweep the bounded-model claims")
    p.add_argument("--variant", choices=("A", "B", "both"), default="both")
    p.add_argument("--maxWorld", type=int, default=9)
    p.add_argument("--maxM", type=int, default=3)
    common(p)
    p.set_defaults(fn=cmd_casari_claims)

    p = sub.add_parser("eliminate-cut", help="remove cuts from a derivation file")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_eliminate_cut)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--only", default="", help="comma-separated check numbers")
    common(p)
    p.set_defaults(fn=cmd_selftest)
    return top


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, FileNotFoundError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FbinqError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
