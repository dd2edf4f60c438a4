import itertools
import json
import random

import pytest

from oplab.multiadd import enumerate_additive, enumerate_biadd_symmetric, trace, verify_multiadditive
from oplab.relations import (
    EmbeddingError,
    OperatorTriple,
    build_A_n,
    check_bullet,
    check_bullet_on_subset,
    check_eq1,
    check_eq2,
    check_first_order,
    check_induction,
    count_triples,
    make_triple,
    replay_relation,
    search_violations,
    subring_embedding,
    verify_lemma2,
)
from oplab.report import FAIL, HYPOTHESIS_VIOLATED, PASS, REFUSED


def all_triples(P, Q=None, R=None):
    Q = Q or P
    R = R or P
    for T, A, B in itertools.product(enumerate_additive(P, Q), enumerate_additive(P, R),
                                     enumerate_biadd_symmetric(R, Q)):
        yield OperatorTriple(T, A, B)


@pytest.fixture
def z5(ring):
    return ring("zn:5")


@pytest.fixture
def z7(ring):
    return ring("zn:7")


def scalar_triple(R, t, a, b):
    """T(f) = t f, A(f) = a f, B(u, v) = b u v on a cyclic ring."""
    return make_triple(R, R, R, [t], [a], {(0, 0): b})


# -- single identities -----------------------------------------------------------------

def test_eq1_holds_for_scaled_identity_triple(z5):
    # 3fg = 3fg + 3fg + 2fg mod 5
    assert check_eq1(scalar_triple(z5, 3, 1, 1)).outcome == PASS


@pytest.mark.parametrize("text", ["zn:5", "f2x2", "zn:2*zn:3"])
def test_zero_operators_satisfy_everything(ring, text):
    R = ring(text)
    for B in enumerate_biadd_symmetric(R, R):
        t = make_triple(R, R, R, [0] * len(R.orders), [0] * len(R.orders), {})
        t = OperatorTriple(t.T, t.A, B)
        assert check_eq1(t).passed
        assert check_eq2(t).passed


def test_identity_is_not_a_derivation(z5):
    rep = check_eq1(scalar_triple(z5, 1, 0, 0))
    assert rep.outcome == FAIL
    assert rep.witness["f"] == rep.witness["g"] == 1
    assert (rep.witness["lhs"], rep.witness["rhs"]) == (1, 2)


def test_eq2_examples(z5, z7):
    assert check_eq2(scalar_triple(z5, 3, 1, 1)).passed
    rep = check_eq2(scalar_triple(z7, 1, 0, 0))
    assert rep.outcome == FAIL and rep.witness["f"] == 1


def test_bullet_examples(z7):
    for b in range(7):
        assert check_bullet(scalar_triple(z7, 0, 0, b), 3).passed
    rep = check_bullet(scalar_triple(z7, 1, 0, 0), 3)
    assert rep.outcome == FAIL
    assert (rep.witness["f"], rep.witness["lhs"], rep.witness["rhs"]) == (1, 1, 3)


def test_sampled_checks_record_seed(z5):
    rep = check_eq1(scalar_triple(z5, 1, 0, 0), seed=3, trials=40)
    assert rep.mode == "sampled"
    d = rep.to_dict()
    assert d["seed"] == 3 and d["trials"] == 40


@pytest.mark.parametrize("text", ["zn:5", "zn:6", "f2x2"])
def test_eq1_implies_eq2(ring, text):
    R = ring(text)
    for t in all_triples(R):
        if check_eq1(t).passed:
            assert check_eq2(t).passed


def test_eq1_does_not_propagate_for_arbitrary_A(z5):
    # T = 3f, A = f, B = uv satisfies eq1 but A is not a derivation:
    # T(f^3) = 3f^3 while 3f^2 T(f) + 3B(f, f^2) = 12f^3 = 2f^3
    t = scalar_triple(z5, 3, 1, 1)
    assert check_eq1(t).passed
    rep = check_induction(t)
    assert rep.outcome == FAIL
    assert rep.witness["n"] == 3
    assert (rep.witness["lhs"], rep.witness["rhs"]) == (3, 2)


@pytest.mark.parametrize("text", ["zn:5", "zn:6", "zn:7"])
def test_eq1_propagation_failures_need_A_of_one(ring, text):
    R = ring(text)
    for t in all_triples(R):
        rep = check_induction(t, max_n=5)
        if rep.outcome == FAIL:
            assert t.A(R.one) != R.zero
        if t.A(R.one) == R.zero:
            assert rep.outcome == PASS


# -- first-order phase checks ----------------------------------------------------------

def test_first_order_zero(z5):
    rep = check_first_order(enumerate_additive(z5, z5).__next__(), 2)
    assert rep.details["phase1"] == rep.details["phase2"] == PASS


@pytest.mark.parametrize("text, n", [("zn:5", 2), ("zn:7", 3), ("zn:7", 2)])
def test_first_order_power_rule_implies_leibniz(ring, text, n):
    R = ring(text)
    for T in enumerate_additive(R, R):
        assert check_first_order(T, n).outcome == PASS


def test_first_order_in_char_two(ring):
    # squaring kills the cross term, yet every T with T(1) = 0 is still a derivation of F2[x]/(x^2)
    R = ring("f2x2")
    reports = [check_first_order(T, 2) for T in enumerate_additive(R, R)]
    assert all(r.outcome == PASS for r in reports)
    assert sum(r.details["phase1"] == PASS for r in reports) == 4
    assert sum(r.details["phase2"] == PASS for r in reports) == 4


# -- the defect map A_n ----------------------------------------------------------------

@pytest.mark.parametrize("text, n", [("zn:3", 2), ("zn:4", 2), ("zn:5", 2), ("zn:5", 3), ("zn:6", 2),
                                     ("zn:7", 3), ("f2x2", 2)])
def test_defect_trace_vanishes_iff_power_identity(ring, text, n):
    R = ring(text)
    for t in all_triples(R):
        An = build_A_n(t, n)
        vanishes = all(v == R.zero for v in trace(An).values)
        assert vanishes == check_bullet(t, n).passed


def test_defect_map_is_symmetric_and_multiadditive(ring):
    R = ring("zn:6")
    rng = random.Random(5)
    triples = list(all_triples(R))
    for t in rng.sample(triples, 10):
        for n in (2, 3):
            assert verify_multiadditive(build_A_n(t, n), n, symmetric=True).passed


def test_defect_map_zero_cases(z5):
    zero = scalar_triple(z5, 0, 0, 0)
    assert all(v == 0 for v in build_A_n(zero, 3).table().values())
    assert all(v == 0 for v in build_A_n(scalar_triple(z5, 3, 1, 1), 2).table().values())


# -- subsets -----------------------------------------------------------------------

def test_bullet_on_zero_always_passes(ring):
    R = ring("zn:6")
    for t in all_triples(R):
        assert check_bullet_on_subset(t, [R.zero], 2).passed


def test_bullet_on_one(z5):
    for t in all_triples(z5):
        T1, A1 = t.T(1), t.A(1)
        predicted = (T1 == (2 * T1 + 2 * t.B(A1, A1)) % 5)
        rep = check_bullet_on_subset(t, [1], 2)
        assert rep.passed == predicted
        assert rep.details["global_eq1"] in (PASS, FAIL)


# -- exhaustive power-identity harness -----------------------------------------------------------------------

def test_power_harness_z5_n2(z5):
    rep = verify_lemma2(z5, z5, z5, 2)
    assert rep.outcome == PASS
    assert rep.details["triples"] == 125
    assert rep.details["violations"] == 0


def test_power_harness_z7_n3(z7):
    rep = verify_lemma2(z7, z7, z7, 3)
    assert rep.outcome == PASS
    assert rep.details["triples"] == 343


def test_power_harness_char_two_is_labelled(ring):
    R = ring("f2x2")
    rep = verify_lemma2(R, R, R, 2)
    assert rep.outcome == HYPOTHESIS_VIOLATED
    assert rep.details["hypothesis_char"] is False
    assert rep.checked == count_triples(R, R, R) == 16384


def test_power_harness_survivor_count_matches_direct_filter(z5):
    survivors = sum(1 for t in all_triples(z5) if check_bullet(t, 2).passed)
    assert verify_lemma2(z5, z5, z5, 2).details["survivors"] == survivors


def test_power_harness_size_guard(z7):
    assert verify_lemma2(z7, z7, z7, 3, guard=10).outcome == REFUSED


def test_power_harness_mixed_rings(ring):
    P, Q = ring("zn:7"), ring("zn:7*zn:7")
    rep = verify_lemma2(P, Q, ring("zn:7"), 3, embedding=subring_embedding(P, Q, [Q.one]))
    assert rep.outcome == PASS


def test_power_harness_sampled_mode_is_seeded(z7):
    a = verify_lemma2(z7, z7, z7, 3, seed=11, trials=50)
    b = verify_lemma2(z7, z7, z7, 3, seed=11, trials=50)
    assert a.mode == "sampled"
    assert a.to_dict(timing=False) == b.to_dict(timing=False)


def test_power_harness_worker_count_does_not_change_report(z7):
    one = verify_lemma2(z7, z7, z7, 3, jobs=1).to_dict(timing=False)
    two = verify_lemma2(z7, z7, z7, 3, jobs=2).to_dict(timing=False)
    assert one == two


# -- counterexample search --------------------------------------------------------------

def test_search_certifies_empty(z5):
    rep = search_violations(z5, z5, z5, 2)
    assert rep.outcome == PASS and rep.details["certified_empty"]


def test_search_refuses_without_characteristic(ring):
    R = ring("zn:5")
    assert search_violations(R, R, R, 3).outcome == REFUSED


def test_search_unit_annihilation_matters(z7):
    rep = search_violations(z7, z7, z7, 3, {"unit_annihilation"})
    assert rep.outcome == FAIL
    assert replay_relation(rep.witness["replay"])


def test_search_char_two_relaxed_is_self_consistent(ring):
    R = ring("f2x2")
    rep = search_violations(R, R, R, 2, {"characteristic"})
    assert rep.outcome in (PASS, FAIL)
    if rep.outcome == FAIL:
        assert replay_relation(rep.witness["replay"])
    else:
        assert rep.details["violations"] == 0


def test_search_rejects_unknown_hypothesis(z5):
    with pytest.raises(ValueError):
        search_violations(z5, z5, z5, 2, {"commutativity"})


# -- witnesses and serialisation --------------------------------------------------------------

def test_failure_witness_replays_after_json_roundtrip(z7):
    rep = check_bullet(scalar_triple(z7, 1, 0, 0), 3)
    data = json.loads(json.dumps(rep.witness["replay"]))
    assert replay_relation(data)


def test_passing_triple_does_not_replay_as_failure(z5):
    t = scalar_triple(z5, 3, 1, 1)
    fake = {"kind": "relation", "equation": "eq1", "n": None, "triple": t.to_json(), "f": 2, "g": 3}
    assert not replay_relation(fake)


def test_triple_json_roundtrip(ring):
    R = ring("zn:2*f2x2")
    rng = random.Random(0)
    gens = len(R.orders)
    T = rng.choice(list(enumerate_additive(R, R)))
    A = rng.choice(list(enumerate_additive(R, R)))
    B = next(iter(enumerate_biadd_symmetric(R, R)))
    t = OperatorTriple(T, A, B)
    again = OperatorTriple.from_json(json.loads(json.dumps(t.to_json())))
    assert again.T == t.T and again.A == t.A and again.B.equals(t.B)
    assert gens == 3


def test_embedding_validation(ring):
    P, Q = ring("zn:5"), ring("zn:7")
    with pytest.raises(EmbeddingError):
        subring_embedding(P, Q)
    Z2, F = ring("zn:2"), ring("f2x2")
    emb = subring_embedding(Z2, F)
    assert emb(1) == F.one
    with pytest.raises(EmbeddingError):
        subring_embedding(F, F, [F.index((0, 1)), F.index((1, 0))])
