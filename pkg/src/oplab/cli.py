"""``oplab`` command line: batch verifications with deterministic reports.

Exit codes: 0 pass, 1 failure with witness, 2 refusal or violated
hypothesis, 3 malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from typing import List, Optional

from . import relations
from .multiadd import FunctionTable, NotMonomialTraceError, polarize
from .parallel import default_jobs
from .poly import Polynomial, PolynomialParseError, parse_polynomial
from .polyfunc import Box, HypothesisError, OperatorSpec, SmoothnessError
from .recovery import (
    FitResult,
    HypothesisViolation,
    OpaqueOracleError,
    classify,
    difference_oracle,
    oracle_from_json,
    recheck_witness,
)
from .report import FAIL, HYPOTHESIS_VIOLATED, PASS, REFUSED, SCHEMA, SizeGuardError, dumps, jsonable
from .rings import RingSpecError, make_ring, parse_ring
from .suites import CHECKS, replay_polyfunc, run_check

EXIT_PASS, EXIT_FAIL, EXIT_REFUSED, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    """Malformed command-line input (exit 3)."""


def _outcome_exit(outcome: str) -> int:
    return {PASS: EXIT_PASS, FAIL: EXIT_FAIL, REFUSED: EXIT_REFUSED, HYPOTHESIS_VIOLATED: EXIT_REFUSED}[outcome]


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _rings(args):
    base = args.ring
    try:
        P = make_ring(parse_ring(args.ring_p or base))
        Q = make_ring(parse_ring(args.ring_q or base))
        R = make_ring(parse_ring(args.ring_r or base))
    except (RingSpecError, TypeError, AttributeError) as exc:
        raise InputError(f"bad ring: {exc}") from exc
    return P, Q, R


def _seed_for(args):
    if args.mode == "sampled":
        if args.seed is None:
            raise InputError("sampled mode requires --seed")
        return args.seed
    return None


# -- commands ------------------------------------------------------------

def cmd_verify_lemma2(args) -> dict:
    P, Q, R = _rings(args)
    try:
        rep = relations.verify_lemma2(P, Q, R, args.n, seed=_seed_for(args), trials=args.trials,
                                      guard=args.guard, jobs=args.jobs)
    except relations.EmbeddingError as exc:
        raise InputError(str(exc)) from exc
    return _wrap([rep], _outcome_exit(rep.outcome))


def cmd_search(args) -> dict:
    P, Q, R = _rings(args)
    relaxed = {item for chunk in args.relax for item in chunk.split(",") if item}
    try:
        rep = relations.search_violations(P, Q, R, args.n, relaxed, guard=args.guard, jobs=args.jobs)
    except (ValueError, relations.EmbeddingError) as exc:
        raise InputError(str(exc)) from exc
    return _wrap([rep], _outcome_exit(rep.outcome))


def _load_spec(args) -> Optional[OperatorSpec]:
    if not args.op:
        return None
    data = _load_json(args.op)
    try:
        return OperatorSpec.from_json(data)
    except SmoothnessError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed operator spec {args.op}: {exc}") from exc


def cmd_leibniz(args) -> dict:
    spec = _load_spec(args)
    f = None
    if args.f:
        try:
            f = parse_polynomial(args.f, spec.N if spec else args.dim)
        except PolynomialParseError as exc:
            raise InputError(str(exc)) from exc
    dims = [args.dim] if args.dim else [1, 2, 3]
    h = [Fraction(v) for v in args.h.split(",")] if args.h else None
    checks = CHECKS if "all" in args.check else args.check
    domain = None
    if args.domain:
        lows, highs = zip(*(part.split(":") for part in args.domain.split(",")))
        domain = Box.of(lows, highs)
    rationals = [Fraction(r) for r in args.rationals.split(",")] if args.rationals else None
    reports = []
    for check in checks:
        trials = 1 if (f is not None and check in ("eq7", "proof-chain")) else args.trials
        kwargs = dict(dims=dims, spec=spec, f=f, h=h)
        if check == "proof-chain":
            kwargs.update(domain=domain, rationals=rationals)
        if check == "eq7" and f is not None and domain is not None:
            from .polyfunc import certify_nonvanishing
            if not certify_nonvanishing(f, domain):
                raise HypothesisError(f"{f} is not certified nonvanishing on the domain")
        if h is not None and check == "difference" and len(h) != (spec.N if spec else (f.nvars if f else len(h))):
            raise InputError("shift vector length does not match the dimension")
        if check == "difference" and h is not None and f is None and spec is None:
            kwargs["dims"] = [len(h)]
        reports.append(run_check(check, trials, args.seed, jobs=args.jobs, **kwargs))
    code = EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL
    return _wrap(reports, code)


def _oracle(args):
    if args.oracle == "difference":
        if not args.h:
            raise InputError("--oracle difference needs --h")
        return difference_oracle([Fraction(v) for v in args.h.split(",")])
    if args.oracle == "zero":
        return oracle_from_json({"kind": "zero", "dim": args.dim or 1})
    data = _load_json(args.oracle)
    try:
        return oracle_from_json(data)
    except SmoothnessError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed oracle spec: {exc}") from exc


def cmd_recover(args) -> dict:
    from .report import VerificationReport
    oracle = _oracle(args)
    try:
        fit = classify(oracle, max_probe_degree=args.max_degree, trials=args.trials, seed=args.seed)
    except HypothesisViolation as exc:
        rep = VerificationReport("recover", HYPOTHESIS_VIOLATED, details={"reason": str(exc),
                                                                           "witness": jsonable(exc.witness)})
        return _wrap([rep], EXIT_REFUSED)
    witness = None
    if not fit.fits:
        witness = {**fit.to_json()["witness"],
                   "replay": {"kind": "recover", "oracle": oracle.description, "fit": fit.to_json()}}
    rep = VerificationReport("recover", PASS if fit.fits else FAIL, mode="sampled", seed=args.seed,
                             trials=args.trials, checked=fit.probes_checked, witness=witness,
                             details=fit.to_json())
    return _wrap([rep], EXIT_PASS if fit.fits else EXIT_FAIL)


def _load_trace(args) -> FunctionTable:
    data = _load_json(args.trace)
    ring = make_ring(parse_ring(args.ring)) if args.ring else None
    try:
        return FunctionTable.from_json(data, domain=ring, codomain=ring if "codomain" not in data else None)
    except (KeyError, ValueError, TypeError, RingSpecError) as exc:
        raise InputError(f"malformed trace file: {exc}") from exc


def _polarize_report(f: FunctionTable, n: int, guard: int):
    from .report import VerificationReport
    P, Q = f.domain, f.codomain
    try:
        res = polarize(f, n, guard=guard)
    except NotMonomialTraceError as exc:
        witness = {**exc.witness, "reason": str(exc),
                   "replay": {"kind": "polarize", "trace": f.to_json(), "arity": n}}
        return VerificationReport("polarize", FAIL, witness=witness), EXIT_FAIL
    except SizeGuardError as exc:
        return VerificationReport("polarize", REFUSED, details={"estimate": exc.estimate, "bound": exc.bound}), EXIT_REFUSED
    import itertools
    tuples = list(itertools.product(P.elements(), repeat=n))
    details = {
        "arity": n,
        "factor": res.factor,
        "scaled": [[[P.payload(a) for a in t], Q.payload(res.scaled(*t))] for t in tuples],
        "division": "ok" if res.divisible else f"refused: multiplication by {res.factor} is not injective",
        "unscaled": ([[[P.payload(a) for a in t], Q.payload(res.unscaled(*t))] for t in tuples]
                     if res.divisible else None),
    }
    return VerificationReport("polarize", PASS, checked=len(tuples), details=details), EXIT_PASS


def cmd_polarize(args) -> dict:
    f = _load_trace(args)
    rep, code = _polarize_report(f, args.arity, args.guard)
    return _wrap([rep], code)


def replay(data: dict) -> bool:
    """True iff the witness reproduces its failure."""
    if "reports" in data:
        for rep in data["reports"]:
            if rep.get("witness"):
                return replay(rep["witness"])
        raise InputError("report carries no witness")
    if "witness" in data and "replay" not in data:
        return replay(data["witness"])
    if "replay" in data:
        data = data["replay"]
    kind = data.get("kind")
    if kind == "relation":
        return relations.replay_relation(data)
    if kind == "polyfunc":
        return replay_polyfunc(data)
    if kind == "recover":
        oracle = oracle_from_json(data["oracle"])
        fit_json = data["fit"]
        N = oracle.dim
        load = lambda p: Polynomial.from_json(p, N)
        w = dict(fit_json["witness"])
        if "probe" in w:
            w["probe"] = load(w["probe"])
        fit = FitResult(False, [load(p) for p in fit_json["b"]], [load(p) for p in fit_json["c"]],
                        [[load(p) for p in row] for row in fit_json["c_products"]], w)
        return not recheck_witness(oracle, fit).is_zero()
    if kind == "polarize":
        try:
            polarize(FunctionTable.from_json(data["trace"]), int(data["arity"]))
        except NotMonomialTraceError:
            return True
        return False
    raise InputError(f"unknown witness kind {kind!r}")


def cmd_replay(args) -> dict:
    from .report import VerificationReport
    data = _load_json(args.witness)
    try:
        reproduced = replay(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed witness: {exc}") from exc
    rep = VerificationReport("replay", PASS if reproduced else FAIL, details={"reproduced": reproduced})
    return _wrap([rep], EXIT_PASS if reproduced else EXIT_FAIL)


# -- plumbing --------------------------------------------------------------

def _wrap(reports, code: int) -> dict:
    return {"reports": reports, "exit_code": code}


def _config(args) -> dict:
    skip = {"func", "out", "format", "jobs", "no_timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render(result: dict, args) -> str:
    reports = [r.to_dict(timing=not args.no_timing) for r in result["reports"]]
    outcome = "pass" if result["exit_code"] == 0 else reports[0]["outcome"] if len(reports) == 1 else "fail"
    doc = {"schema": SCHEMA, "command": args.command, "config": _config(args), "exit_code": result["exit_code"],
           "outcome": outcome, "reports": reports}
    if args.format == "json":
        return dumps(doc)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["command", "equation", "outcome", "mode", "checked", "seed", "trials", "witness"])
        for r in reports:
            writer.writerow([args.command, r["equation"], r["outcome"], r["mode"], r["checked"], r.get("seed", ""),
                             r.get("trials", ""), json.dumps(r["witness"], sort_keys=True) if r["witness"] else ""])
        return buf.getvalue()
    lines = [f"oplab {args.command}: {outcome} (exit {result['exit_code']})"]
    for r in reports:
        line = f"  {r['equation']:<16} {r['outcome']:<20} checked={r['checked']}"
        if "elapsed_ms" in r:
            line += f" {r['elapsed_ms']}ms"
        lines.append(line)
        if r["witness"]:
            brief = {k: v for k, v in r["witness"].items() if k != "replay"}
            lines.append(f"    witness: {json.dumps(brief, sort_keys=True)[:300]}")
    return "\n".join(lines) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if not out:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".oplab-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oplab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (required for sampled lemma2/search runs)")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "human"), default="json")
    common.add_argument("--no-timing", action="store_true", help="omit elapsed_ms fields")
    common.add_argument("--guard", type=int, default=10**7, help="enumeration size bound")

    rings = argparse.ArgumentParser(add_help=False)
    rings.add_argument("--ring", default="zn:5", help="shorthand or JSON for P = Q = R")
    rings.add_argument("--ring-p")
    rings.add_argument("--ring-q")
    rings.add_argument("--ring-r")
    rings.add_argument("--n", type=int, default=2)
    rings.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify-lemma2", parents=[common, rings], help="exhaustive check that the power identity forces the product rule")
    p.set_defaults(func=cmd_verify_lemma2)
    p = sub.add_parser("search", parents=[common, rings], help="counterexample search with relaxed hypotheses")
    p.add_argument("--relax", action="append", default=[], help="characteristic and/or unit_annihilation")
    p.set_defaults(func=cmd_search)
    p = sub.add_parser("leibniz", parents=[common], help="polynomial operator identities")
    p.add_argument("--op", help="operator spec JSON file")
    p.add_argument("--check", action="append", choices=CHECKS + ("all",), default=None)
    p.add_argument("--dim", type=int)
    p.add_argument("--f", help='fixed f, e.g. "x^2+1"')
    p.add_argument("--h", help="shift vector for the difference check, comma separated")
    p.add_argument("--domain", help="box as lo:hi per axis, comma separated (eq7, proof-chain); use --domain=-1:1 for negative bounds")
    p.add_argument("--rationals", help="scaling rationals for the proof chain, comma separated")
    p.set_defaults(func=cmd_leibniz)
    p = sub.add_parser("recover", parents=[common], help="fit an oracle to the canonical form")
    p.add_argument("--oracle", required=True, help="oracle JSON file, 'difference' or 'zero'")
    p.add_argument("--h")
    p.add_argument("--dim", type=int)
    p.add_argument("--max-degree", type=int, default=3)
    p.set_defaults(func=cmd_recover)
    p = sub.add_parser("polarize", parents=[common], help="recover n! A from a trace")
    p.add_argument("--ring", help="domain = codomain ring if the trace file names none")
    p.add_argument("--trace", required=True)
    p.add_argument("--arity", type=int, default=2)
    p.set_defaults(func=cmd_polarize)
    p = sub.add_parser("replay", parents=[common], help="re-evaluate a witness or report")
    p.add_argument("witness")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    if getattr(args, "check", "x") is None:
        args.check = ["second-order"]
    if args.seed is None and args.command in ("leibniz", "recover"):
        args.seed = 0
    if args.jobs is None:
        args.jobs = default_jobs()
    try:
        result = args.func(args)
    except SmoothnessError as exc:
        print(f"oplab: invalid operator spec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, RingSpecError, PolynomialParseError) as exc:
        print(f"oplab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HypothesisError, HypothesisViolation) as exc:
        print(f"oplab: hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except OpaqueOracleError as exc:
        print(f"oplab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write(render(result, args), args.out)
    return result["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
