"""Operator equations on finite rings and the exhaustive power-identity harness.

For additive ``T: P -> Q``, ``A: P -> R`` and symmetric bi-additive
``B: R x R -> Q`` the checks here test

* ``eq1``:    T(fg) = f T(g) + T(f) g + 2 B(A f, A g)
* ``eq2``:    T(f^2) = 2 f T(f) + 2 B(A f, A f)
* ``bullet``: T(f^n) = n f^(n-1) T(f) + n B(A f, A f^(n-1))

over every element of ``P`` (or a seeded sample).  :func:`verify_lemma2`
enumerates all triples and confirms that ``bullet`` (plus ``A(1) = 0`` when
``n > 2``) forces ``eq1`` whenever ``char(Q) > n!``.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .multiadd import (
    DEFAULT_GUARD,
    AdditiveMap,
    MultiAddMap,
    _killed_by,
    _pair_choices,
    _tuplify,
)
from .parallel import parallel_map
from .report import FAIL, HYPOTHESIS_VIOLATED, PASS, REFUSED, SizeGuardError, VerificationReport, elapsed_ms
from .rings import Modular, Ring, make_ring, ring_spec_from_json

RELAXABLE = frozenset({"characteristic", "unit_annihilation"})


class EmbeddingError(ValueError):
    pass


def subring_embedding(P: Ring, Q: Ring, generator_images: Optional[Sequence[int]] = None) -> AdditiveMap:
    """Unital injective ring homomorphism ``P -> Q`` realising P as a subring.

    Without explicit images this is the identity when ``P == Q`` and
    ``1 -> 1`` when ``P = Z_n`` with ``n = char(Q)``.
    """
    if generator_images is None:
        if P == Q:
            generator_images = P.generators()
        elif isinstance(P.spec, Modular) and P.spec.n == Q.char:
            generator_images = [Q.one]
        else:
            raise EmbeddingError(f"no canonical embedding of {P.spec} into {Q.spec}; give generator images")
    emb = AdditiveMap(P, Q, generator_images)
    if emb(P.one) != Q.one:
        raise EmbeddingError("embedding does not send 1 to 1")
    if len(set(emb.table)) != P.size:
        raise EmbeddingError("embedding is not injective")
    for x in P.elements():
        for y in P.elements():
            if emb(P.mul(x, y)) != Q.mul(emb(x), emb(y)):
                raise EmbeddingError("embedding is not multiplicative")
    return emb


@dataclass
class OperatorTriple:
    T: AdditiveMap
    A: AdditiveMap
    B: MultiAddMap
    embedding: Optional[AdditiveMap] = None

    def __post_init__(self):
        if self.A.domain != self.T.domain:
            raise ValueError("T and A must share the domain P")
        if self.B.arity != 2 or self.B.domain != self.A.codomain or self.B.codomain != self.T.codomain:
            raise ValueError("B must map R x R -> Q")
        if self.embedding is None:
            self.embedding = subring_embedding(self.P, self.Q)
        elif self.embedding.domain != self.P or self.embedding.codomain != self.Q:
            raise ValueError("embedding must map P -> Q")

    @property
    def P(self) -> Ring:
        return self.T.domain

    @property
    def Q(self) -> Ring:
        return self.T.codomain

    @property
    def R(self) -> Ring:
        return self.A.codomain

    def to_json(self) -> dict:
        return {
            "P": self.P.spec.to_json(),
            "Q": self.Q.spec.to_json(),
            "R": self.R.spec.to_json(),
            "T": self.T.to_json()["generator_images"],
            "A": self.A.to_json()["generator_images"],
            "B": self.B.to_json()["generator_images"],
            "embedding": self.embedding.to_json()["generator_images"],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorTriple":
        P = make_ring(ring_spec_from_json(data["P"]))
        Q = make_ring(ring_spec_from_json(data["Q"]))
        R = make_ring(ring_spec_from_json(data["R"]))
        T = AdditiveMap.from_json({"generator_images": data["T"]}, P, Q)
        A = AdditiveMap.from_json({"generator_images": data["A"]}, P, R)
        B = MultiAddMap.from_json({"arity": 2, "generator_images": data["B"]}, R, Q)
        emb = None
        if "embedding" in data:
            emb = subring_embedding(P, Q, [Q.index(_tuplify(v)) for v in data["embedding"]])
        return cls(T, A, B, emb)


def make_triple(P: Ring, Q: Ring, R: Ring, T_images, A_images, B_pairs: dict,
                embedding: Optional[AdditiveMap] = None) -> OperatorTriple:
    """Build a triple from raw generator images (indices)."""
    T = AdditiveMap(P, Q, T_images)
    A = AdditiveMap(P, R, A_images)
    images = {}
    for (i, j), v in B_pairs.items():
        images[(i, j)] = v
        images[(j, i)] = v
    return OperatorTriple(T, A, MultiAddMap.from_generators(R, Q, 2, images), embedding)


# -- single-identity evaluators ---------------------------------------------
# Each returns (lhs, rhs) as Q indices.

def eq1_sides(t: OperatorTriple, f: int, g: int):
    P, Q, e = t.P, t.Q, t.embedding
    lhs = t.T(P.mul(f, g))
    rhs = Q.add(Q.add(Q.mul(e(f), t.T(g)), Q.mul(t.T(f), e(g))), Q.scale(2, t.B(t.A(f), t.A(g))))
    return lhs, rhs


def bullet_sides(t: OperatorTriple, f: int, n: int):
    P, Q, e = t.P, t.Q, t.embedding
    fn1 = P.power(f, n - 1)
    lhs = t.T(P.mul(fn1, f))
    rhs = Q.add(Q.scale(n, Q.mul(e(fn1), t.T(f))), Q.scale(n, t.B(t.A(f), t.A(fn1))))
    return lhs, rhs


def first_order_power_sides(t: OperatorTriple, f: int, n: int):
    P, Q, e = t.P, t.Q, t.embedding
    fn1 = P.power(f, n - 1)
    return t.T(P.mul(fn1, f)), Q.scale(n, Q.mul(e(fn1), t.T(f)))


def leibniz_sides(t: OperatorTriple, f: int, g: int):
    P, Q, e = t.P, t.Q, t.embedding
    return t.T(P.mul(f, g)), Q.add(Q.mul(e(f), t.T(g)), Q.mul(t.T(f), e(g)))


def _sample(P: Ring, seed: Optional[int], trials: Optional[int], arity: int):
    if seed is None:
        return itertools.product(P.elements(), repeat=arity), "exhaustive"
    rng = random.Random(seed)
    return [tuple(rng.randrange(P.size) for _ in range(arity)) for _ in range(trials or 100)], "sampled"


def _scan_identity(name: str, t: OperatorTriple, sides, arity: int, extra=(), seed=None, trials=None,
                   points: Optional[Iterable] = None) -> VerificationReport:
    start = time.perf_counter()
    if points is None:
        points, mode = _sample(t.P, seed, trials, arity)
    else:
        mode = "exhaustive"
    checked = 0
    P, Q = t.P, t.Q
    labels = ("f", "g")[:arity]
    for pt in points:
        checked += 1
        lhs, rhs = sides(t, *pt, *extra)
        if lhs != rhs:
            witness = {label: P.payload(v) for label, v in zip(labels, pt)}
            witness.update(lhs=Q.payload(lhs), rhs=Q.payload(rhs))
            witness["replay"] = {"kind": "relation", "equation": name, "n": extra[0] if extra else None,
                                 "triple": t.to_json(),
                                 **{label: P.payload(v) for label, v in zip(labels, pt)}}
            return VerificationReport(name, FAIL, mode=mode, witness=witness, checked=checked,
                                      seed=seed, trials=trials, elapsed_ms=elapsed_ms(start))
    return VerificationReport(name, PASS, mode=mode, checked=checked, seed=seed, trials=trials,
                              elapsed_ms=elapsed_ms(start))


def check_eq1(t: OperatorTriple, seed: Optional[int] = None, trials: Optional[int] = None) -> VerificationReport:
    return _scan_identity("eq1", t, eq1_sides, 2, seed=seed, trials=trials)


def check_eq2(t: OperatorTriple, seed: Optional[int] = None, trials: Optional[int] = None) -> VerificationReport:
    return _scan_identity("eq2", t, bullet_sides, 1, extra=(2,), seed=seed, trials=trials)


def check_bullet(t: OperatorTriple, n: int, seed: Optional[int] = None,
                 trials: Optional[int] = None) -> VerificationReport:
    if n < 2:
        raise ValueError("n must be at least 2")
    return _scan_identity("bullet", t, bullet_sides, 1, extra=(n,), seed=seed, trials=trials)


def check_bullet_on_subset(t: OperatorTriple, U: Sequence[int], n: int) -> VerificationReport:
    """The power identity on ``U`` only, next to an unrestricted ``eq1`` check.

    No implication between the two is asserted.
    """
    if not U:
        raise ValueError("U must be nonempty")
    report = _scan_identity("bullet_subset", t, bullet_sides, 1, extra=(n,), points=[(u,) for u in U])
    report.details["subset_size"] = len(U)
    report.details["global_eq1"] = check_eq1(t).outcome
    return report


def check_first_order(T: AdditiveMap, n: int, embedding: Optional[AdditiveMap] = None) -> VerificationReport:
    """Power rule ``T(f^n) = n f^(n-1) T(f)`` (phase 1) against the Leibniz rule (phase 2).

    The outcome is ``pass`` unless phase 1 holds while phase 2 fails.
    """
    start = time.perf_counter()
    P = T.domain
    zero_A = AdditiveMap(P, P, [P.zero] * len(P.orders))
    zero_B = MultiAddMap.from_generators(P, T.codomain, 2, {})
    t = OperatorTriple(T, zero_A, zero_B, embedding)
    phase1 = _scan_identity("first_order_power", t, first_order_power_sides, 1, extra=(n,))
    phase2 = _scan_identity("leibniz", t, leibniz_sides, 2)
    outcome = FAIL if phase1.passed and not phase2.passed else PASS
    return VerificationReport(
        "first_order", outcome, checked=phase1.checked + phase2.checked, elapsed_ms=elapsed_ms(start),
        witness=phase2.witness if outcome == FAIL else None,
        details={"n": n, "phase1": phase1.outcome, "phase2": phase2.outcome,
                 "phase1_witness": phase1.witness, "phase2_witness": phase2.witness})


def check_induction(t: OperatorTriple, max_n: int = 5) -> VerificationReport:
    """Does ``eq1`` propagate to the power identity for every ``2 <= n <= max_n``?

    ``pass`` when ``eq1`` fails (nothing to propagate) or every power holds;
    ``fail`` names the first ``n`` and ``f`` where propagation breaks.  For
    ``n >= 3`` propagation needs ``A`` to behave like a derivation, so
    arbitrary additive triples on finite rings can fail here.
    """
    start = time.perf_counter()
    base = check_eq1(t)
    if not base.passed:
        return VerificationReport("induction", PASS, checked=base.checked, elapsed_ms=elapsed_ms(start),
                                  details={"premise": "eq1 fails; nothing to propagate"})
    checked = base.checked
    for n in range(2, max_n + 1):
        r = check_bullet(t, n)
        checked += r.checked
        if not r.passed:
            return VerificationReport("induction", FAIL, witness={**r.witness, "n": n}, checked=checked,
                                      elapsed_ms=elapsed_ms(start))
    return VerificationReport("induction", PASS, checked=checked, elapsed_ms=elapsed_ms(start),
                              details={"max_n": max_n})


def build_A_n(t: OperatorTriple, n: int) -> MultiAddMap:
    """The n-additive defect map whose trace is the power-identity defect.

    A_n(f_1..f_n) = T(f_1...f_n) - sum_i (prod_{j!=i} f_j) T(f_i)
                    - sum_i B(A f_i, A(prod_{j!=i} f_j))
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    P, Q, e = t.P, t.Q, t.embedding

    def defect(*fs: int) -> int:
        total = t.T(_prod(P, fs))
        for i, fi in enumerate(fs):
            others = _prod(P, fs[:i] + fs[i + 1:])
            total = Q.sub(total, Q.mul(e(others), t.T(fi)))
            total = Q.sub(total, t.B(t.A(fi), t.A(others)))
        return total

    return MultiAddMap(P, Q, n, defect)


def _prod(P: Ring, items) -> int:
    out = P.one
    for x in items:
        out = P.mul(out, x)
    return out


# -- exhaustive power-identity harness -----------------------------------------------

def _candidates(P: Ring, Q: Ring, R: Ring):
    T_choices = [_killed_by(Q, d) for d in P.orders]
    A_choices = [_killed_by(R, d) for d in P.orders]
    pairs, B_choices = _pair_choices(R, Q)
    return T_choices, A_choices, pairs, B_choices


def count_triples(P: Ring, Q: Ring, R: Ring) -> int:
    T_choices, A_choices, _, B_choices = _candidates(P, Q, R)
    return math.prod(len(c) for c in T_choices + A_choices + B_choices)


def _scan_task(task) -> dict:
    """Worker: scan one chunk of triples.  Picklable so it can run in a pool."""
    (P_spec, Q_spec, R_spec, emb_images, n, require_a1, explicit, T_fixed) = task
    P, Q, R = make_ring(P_spec), make_ring(Q_spec), make_ring(R_spec)
    emb = subring_embedding(P, Q, emb_images)
    T_choices, A_choices, pairs, B_choices = _candidates(P, Q, R)
    if explicit is not None:
        triples = explicit
    else:
        triples = ((T_fixed, a, b) for a in itertools.product(*A_choices) for b in itertools.product(*B_choices))
    B_cache: dict = {}
    stats = {"triples": 0, "survivors": 0, "violations": 0, "t1_violations": 0,
             "first_violation": None, "first_t1_violation": None}
    powers = [(P.power(f, n - 1), P.power(f, n)) for f in P.elements()]
    for T_img, A_img, B_img in triples:
        stats["triples"] += 1
        T = AdditiveMap(P, Q, T_img)
        A = AdditiveMap(P, R, A_img)
        if require_a1 and A(P.one) != R.zero:
            continue
        B = B_cache.get(B_img)
        if B is None:
            images = {}
            for (i, j), v in zip(pairs, B_img):
                images[(i, j)] = images[(j, i)] = v
            B = B_cache[B_img] = MultiAddMap.from_generators(R, Q, 2, images)
        ok = True
        for f in P.elements():
            fn1, fn = powers[f]
            rhs = Q.add(Q.scale(n, Q.mul(emb(fn1), T(f))), Q.scale(n, B(A(f), A(fn1))))
            if T(fn) != rhs:
                ok = False
                break
        if not ok:
            continue
        stats["survivors"] += 1
        t = OperatorTriple(T, A, B, emb)
        if n > 2 and T(P.one) != Q.zero:
            stats["t1_violations"] += 1
            if stats["first_t1_violation"] is None:
                stats["first_t1_violation"] = {"triple": t.to_json(), "T(1)": Q.payload(T(P.one))}
        for f in P.elements():
            for g in P.elements():
                lhs, rhs = eq1_sides(t, f, g)
                if lhs != rhs:
                    stats["violations"] += 1
                    if stats["first_violation"] is None:
                        stats["first_violation"] = {
                            "f": P.payload(f), "g": P.payload(g), "lhs": Q.payload(lhs), "rhs": Q.payload(rhs),
                            "replay": {"kind": "relation", "equation": "eq1", "n": None, "triple": t.to_json(),
                                       "f": P.payload(f), "g": P.payload(g)}}
                    break
            else:
                continue
            break
    return stats


def _merge(stats_list) -> dict:
    out = {"triples": 0, "survivors": 0, "violations": 0, "t1_violations": 0,
           "first_violation": None, "first_t1_violation": None}
    for s in stats_list:
        for k in ("triples", "survivors", "violations", "t1_violations"):
            out[k] += s[k]
        for k in ("first_violation", "first_t1_violation"):
            if out[k] is None and s[k] is not None:
                out[k] = s[k]
    return out


def _run_scan(P, Q, R, n, require_a1, embedding, seed, trials, guard, jobs):
    T_choices, A_choices, pairs, B_choices = _candidates(P, Q, R)
    total = math.prod(len(c) for c in T_choices + A_choices + B_choices)
    emb_images = list(embedding.generator_images)
    base = (P.spec, Q.spec, R.spec, emb_images, n, require_a1)
    if seed is None:
        if total > guard:
            raise SizeGuardError("operator triples", total, guard)
        tasks = [base + (None, T_img) for T_img in itertools.product(*T_choices)]
    else:
        rng = random.Random(seed)
        sample = [(tuple(rng.choice(c) for c in T_choices), tuple(rng.choice(c) for c in A_choices),
                   tuple(rng.choice(c) for c in B_choices)) for _ in range(trials or 100)]
        width = max(1, -(-len(sample) // max(1, jobs or 1)))
        tasks = [base + (sample[i:i + width], None) for i in range(0, len(sample), width)]
    return total, _merge(parallel_map(_scan_task, tasks, jobs))


def verify_lemma2(P: Ring, Q: Ring, R: Ring, n: int, seed: Optional[int] = None, trials: Optional[int] = None,
                  guard: int = DEFAULT_GUARD, embedding: Optional[AdditiveMap] = None,
                  jobs: int = 1) -> VerificationReport:
    """Enumerate (or sample) every triple and check that the power identity forces ``eq1``.

    Triples must satisfy the power identity for every ``f`` and, for ``n > 2``,
    ``A(1) = 0``.  Survivors must satisfy ``eq1`` and ``T(1) = 0``.  When
    ``char(Q) <= n!`` nothing is asserted: the outcome is
    ``hypothesis_violated`` and the observations are reported.
    """
    start = time.perf_counter()
    if n < 2:
        raise ValueError("n must be at least 2")
    embedding = embedding or subring_embedding(P, Q)
    mode = "exhaustive" if seed is None else "sampled"
    hypothesis = Q.char > math.factorial(n)
    base_details = {"P": P.spec.to_json(), "Q": Q.spec.to_json(), "R": R.spec.to_json(), "n": n,
                    "char_Q": Q.char, "n_factorial": math.factorial(n), "hypothesis_char": hypothesis}
    try:
        total, stats = _run_scan(P, Q, R, n, n > 2, embedding, seed, trials, guard, jobs)
    except SizeGuardError as exc:
        return VerificationReport("lemma2", REFUSED, mode=mode, seed=seed, trials=trials,
                                  elapsed_ms=elapsed_ms(start),
                                  details={**base_details, "estimate": exc.estimate, "bound": exc.bound})
    details = {**base_details, "triple_space": total, "triples": stats["triples"],
               "survivors": stats["survivors"], "violations": stats["violations"],
               "t1_violations": stats["t1_violations"]}
    witness = stats["first_violation"]
    if not hypothesis:
        details["observed_counterexample"] = witness
        return VerificationReport("lemma2", HYPOTHESIS_VIOLATED, mode=mode, seed=seed, trials=trials,
                                  checked=stats["triples"], elapsed_ms=elapsed_ms(start), details=details)
    if witness is None and stats["first_t1_violation"] is not None:
        witness = stats["first_t1_violation"]
    outcome = FAIL if (stats["violations"] or stats["t1_violations"]) else PASS
    return VerificationReport("lemma2", outcome, mode=mode, witness=witness, seed=seed, trials=trials,
                              checked=stats["triples"], elapsed_ms=elapsed_ms(start), details=details)


def search_violations(P: Ring, Q: Ring, R: Ring, n: int, relaxed: Iterable[str] = (),
                      guard: int = DEFAULT_GUARD, embedding: Optional[AdditiveMap] = None,
                      jobs: int = 1) -> VerificationReport:
    """Look for a triple satisfying the power identity everywhere but violating ``eq1``.

    Hypotheses named in ``relaxed`` are dropped from the search family.  An
    empty search is a legitimate, certified outcome (``pass``); a hit is
    reported as ``fail`` with the counterexample.
    """
    start = time.perf_counter()
    relaxed = frozenset(relaxed)
    unknown = relaxed - RELAXABLE
    if unknown:
        raise ValueError(f"unknown hypotheses {sorted(unknown)}; choose from {sorted(RELAXABLE)}")
    embedding = embedding or subring_embedding(P, Q)
    details = {"P": P.spec.to_json(), "Q": Q.spec.to_json(), "R": R.spec.to_json(), "n": n,
               "relaxed": sorted(relaxed), "char_Q": Q.char, "n_factorial": math.factorial(n)}
    if "characteristic" not in relaxed and Q.char <= math.factorial(n):
        details["reason"] = "char(Q) <= n! and the characteristic hypothesis is not relaxed"
        return VerificationReport("search", REFUSED, elapsed_ms=elapsed_ms(start), details=details)
    require_a1 = n > 2 and "unit_annihilation" not in relaxed
    try:
        total, stats = _run_scan(P, Q, R, n, require_a1, embedding, None, None, guard, jobs)
    except SizeGuardError as exc:
        details.update(estimate=exc.estimate, bound=exc.bound)
        return VerificationReport("search", REFUSED, elapsed_ms=elapsed_ms(start), details=details)
    details.update(triple_space=total, survivors=stats["survivors"], violations=stats["violations"],
                   certified_empty=stats["violations"] == 0)
    outcome = FAIL if stats["violations"] else PASS
    return VerificationReport("search", outcome, witness=stats["first_violation"], checked=stats["triples"],
                              elapsed_ms=elapsed_ms(start), details=details)


def replay_relation(data: dict) -> bool:
    """Re-evaluate a relation witness; True iff the recorded inequality reproduces."""
    t = OperatorTriple.from_json(data["triple"])
    P = t.P
    f = P.index(_tuplify(data["f"]))
    eq = data["equation"]
    if eq == "eq1":
        lhs, rhs = eq1_sides(t, f, P.index(_tuplify(data["g"])))
    elif eq == "leibniz":
        lhs, rhs = leibniz_sides(t, f, P.index(_tuplify(data["g"])))
    elif eq in ("eq2", "bullet", "bullet_subset"):
        lhs, rhs = bullet_sides(t, f, int(data.get("n") or 2))
    elif eq == "first_order_power":
        lhs, rhs = first_order_power_sides(t, f, int(data["n"]))
    else:
        raise ValueError(f"unknown equation {eq!r}")
    return lhs != rhs
