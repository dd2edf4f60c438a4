"""Seeded instance suites for the polynomial identities.

Instances are drawn in the parent process from ``random.Random(seed)`` and
only then fanned out, so a report depends on ``(seed, trials, options)`` and
never on the worker count.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Optional, Sequence

from .parallel import parallel_map
from .poly import Polynomial
from .polyfunc import (
    Box,
    OperatorSpec,
    check_difference_example,
    check_eq6,
    check_eq7,
    check_eq7_proof_chain,
    check_first_order_leibniz,
    check_second_order_leibniz,
    laplacian_identity,
)
from .report import FAIL, PASS, VerificationReport, elapsed_ms
from .sampling import random_polynomial, random_shift, random_spec

CHECKS = ("second-order", "laplacian", "eq6", "eq7", "proof-chain", "difference", "first-order")
EQ6_POWERS = (2, 3, 4, 5)


def _poly_json(p):
    return p.to_json()


def _load_poly(data, nvars):
    return Polynomial.from_json(data, nvars)


def evaluate_instance(inst: dict) -> dict:
    """Compute every residual of one instance; returns ``{"nonzero": [...], "residuals": {...}}``.

    ``inst`` is plain JSON so it can be replayed or shipped to a worker.
    """
    check = inst["check"]
    N = inst["dim"]
    spec = OperatorSpec.from_json(inst["spec"]) if "spec" in inst else None
    f = _load_poly(inst["f"], N) if "f" in inst else None
    g = _load_poly(inst["g"], N) if "g" in inst else None
    residuals = {}
    if check == "second-order":
        residuals["leibniz"] = check_second_order_leibniz(spec, f, g)
    elif check == "first-order":
        residuals["first_order_leibniz"] = check_first_order_leibniz(spec, f, g)
    elif check == "laplacian":
        residuals["laplacian"] = laplacian_identity(f, g)
    elif check == "eq6":
        for n in inst.get("powers", EQ6_POWERS):
            residuals[f"eq6[n={n}]"] = check_eq6(spec, f, n)
    elif check == "eq7":
        residuals["eq7"] = check_eq7(spec, f)
    elif check == "proof-chain":
        domain = Box.of(*inst["domain"]) if "domain" in inst else None
        rationals = [Fraction(r) for r in inst["rationals"]] if inst.get("rationals") else None
        chain = check_eq7_proof_chain(spec, f, rationals=rationals, domain=domain)
        residuals.update(chain.residuals)
        residuals["eq7"] = check_eq7(spec, f)
        return {"nonzero": [k for k, v in residuals.items() if not v.is_zero()],
                "residuals": {k: str(v) for k, v in residuals.items() if not v.is_zero()},
                "rationals": [str(r) for r in chain.rationals], "count": len(residuals)}
    elif check == "difference":
        residuals["difference"] = check_difference_example([Fraction(v) for v in inst["h"]], f, g)
    else:
        raise ValueError(f"unknown check {check!r}")
    return {"nonzero": [k for k, v in residuals.items() if not v.is_zero()],
            "residuals": {k: str(v) for k, v in residuals.items() if not v.is_zero()},
            "count": len(residuals)}


def _nonzero_constant_term(rng: random.Random, f: Polynomial) -> Polynomial:
    if f.constant_term() == 0:
        f = f + rng.choice([1, -1, 2, Fraction(1, 2), 3])
    return f


def make_instances(check: str, trials: int, seed: int, dims: Sequence[int] = (1, 2, 3),
                   spec: Optional[OperatorSpec] = None, f: Optional[Polynomial] = None,
                   h: Optional[Sequence] = None, domain: Optional[Box] = None,
                   rationals: Optional[Sequence] = None) -> list:
    if check not in CHECKS:
        raise ValueError(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        N = spec.N if spec is not None else (f.nvars if f is not None else rng.choice(list(dims)))
        inst = {"check": check, "dim": N}
        if check in ("second-order", "eq6", "eq7", "proof-chain"):
            s = spec if spec is not None else random_spec(rng, N)
            inst["spec"] = s.to_json()
        if check == "first-order":
            s = spec if spec is not None else random_spec(rng, N, k=1)
            inst["spec"] = s.to_json()
        if check in ("second-order", "first-order", "laplacian", "difference"):
            inst["f"] = (f if f is not None else random_polynomial(rng, N, 4)).to_json()
            inst["g"] = random_polynomial(rng, N, 4).to_json()
        elif check == "eq6":
            inst["f"] = (f if f is not None else random_polynomial(rng, N, 3, 4)).to_json()
        elif check == "eq7":
            inst["f"] = (f if f is not None else _nonzero_constant_term(rng, random_polynomial(rng, N, 3, 4))).to_json()
        elif check == "proof-chain":
            ff = f
            while ff is None or ff.is_constant():
                ff = random_polynomial(rng, N, 3, 3)
            inst["f"] = ff.to_json()
            box = domain if domain is not None else Box.of([0] * N, [1] * N)
            inst["domain"] = [[None if v is None else str(v) for v in box.lows],
                              [None if v is None else str(v) for v in box.highs]]
            if rationals is not None:
                inst["rationals"] = [str(Fraction(r)) for r in rationals]
        if check == "difference":
            inst["h"] = [str(v) for v in (h if h is not None else random_shift(rng, N))]
        out.append(inst)
    return out


def run_check(check: str, trials: int, seed: int, jobs: int = 1, **kwargs) -> VerificationReport:
    """Run one identity over a seeded suite and summarise it as a report."""
    start = time.perf_counter()
    instances = make_instances(check, trials, seed, **kwargs)
    results = parallel_map(evaluate_instance, instances, jobs)
    witness = None
    failures = 0
    residual_count = 0
    for inst, res in zip(instances, results):
        residual_count += res["count"]
        if res["nonzero"]:
            failures += 1
            if witness is None:
                witness = {"instance": inst, "nonzero": res["nonzero"], "residuals": res["residuals"],
                           "replay": {"kind": "polyfunc", "instance": inst}}
    details = {"check": check, "instances": len(instances), "residuals_checked": residual_count,
               "failing_instances": failures, "dims": sorted({inst["dim"] for inst in instances})}
    if check == "proof-chain":
        details["scaling_rationals"] = [res.get("rationals") for res in results]
    return VerificationReport(check, FAIL if failures else PASS, mode="sampled", witness=witness,
                              checked=len(instances), seed=seed, trials=trials,
                              elapsed_ms=elapsed_ms(start), details=details)


def replay_polyfunc(data: dict) -> bool:
    """True iff the recorded instance still has a nonzero residual."""
    return bool(evaluate_instance(data["instance"])["nonzero"])
