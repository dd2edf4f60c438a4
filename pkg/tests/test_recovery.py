import random
from fractions import Fraction

import pytest

from oplab.poly import Polynomial, RationalFunction
from oplab.polyfunc import OperatorSpec, T_apply, A_apply
from oplab.recovery import (
    HypothesisViolation,
    OpaqueOracleError,
    OperatorOracle,
    canonical_oracle,
    classify,
    difference_oracle,
    oracle_from_json,
    recheck_witness,
    recover_b,
    recover_c_products,
    validate_fit,
)
from oplab.sampling import random_spec


def products_of(c, pairing=1):
    return [[ci * cj * pairing for cj in c] for ci in c]


@pytest.mark.parametrize("seed", range(8))
def test_canonical_roundtrip(seed):
    rng = random.Random(seed)
    N = rng.choice([1, 2, 3])
    s = random_spec(rng, N)
    fit = classify(canonical_oracle(s), trials=20, seed=seed)
    assert fit.fits
    assert tuple(fit.b) == s.b
    assert tuple(fit.c) == s.c
    assert fit.products == products_of(s.c)


def test_recover_b_exact(spec, poly):
    s = spec(["x2", "0"], ["x1^2 - 1", "3"])
    assert recover_b(canonical_oracle(s)) == [poly("x2", 2), poly("0", 2)]


def test_zero_operator(spec):
    fit = classify(oracle_from_json({"kind": "zero", "dim": 2}))
    assert fit.fits
    assert all(p.is_zero() for p in fit.b + fit.c)
    assert all(p.is_zero() for row in fit.products for p in row)


def test_quadratic_channels_agree_for_unit_c(spec, poly):
    o = canonical_oracle(spec(["0", "0"], ["1", "1"]))
    assert o.T(poly("x1*x2", 2)) == 2
    rec = recover_c_products(o, recover_b(o))
    assert rec.disagreement is None
    assert rec.c == [poly("1", 2)] * 2


def test_first_order_spec_has_vanishing_quadratic_residuals(spec):
    o = canonical_oracle(spec(["x1", "x2 + 1"], ["0", "0"], k=1))
    rec = recover_c_products(o, recover_b(o))
    assert all(p.is_zero() for row in rec.products for p in row)


# -- the shift difference ------------------------------------------------------------------

def test_difference_oracle_b_is_shift():
    o = difference_oracle([1])
    assert recover_b(o) == [Polynomial.constant(1, 1)]


@pytest.mark.parametrize("h", [[1], [Fraction(1, 2), 2], [0, -1, 3]])
def test_difference_oracle_passes_quadratic_probes(h):
    o = difference_oracle(h)
    b = recover_b(o)
    rec = recover_c_products(o, b)
    assert rec.disagreement is None
    for i, hi in enumerate(h):
        for j, hj in enumerate(h):
            assert rec.products[i][j] == Polynomial.constant(len(h), Fraction(hi) * Fraction(hj) / 2)
    violation, checked = validate_fit(o, b, rec.c, rec.products, max_degree=2, trials=30, channels=("T",))
    assert violation is None and checked > 0


def test_difference_oracle_rejected_at_degree_three():
    o = difference_oracle([1])
    fit = classify(o)
    assert not fit.fits
    w = fit.witness
    assert w["channel"] == "T" and w["degree"] == 3
    assert w["probe"] == Polynomial.monomial((3,))
    assert w["residual"] == Polynomial.constant(1, 1)
    again = recheck_witness(o, fit)
    assert again == w["residual"] and not again.is_zero()


def test_difference_oracle_in_two_variables():
    fit = classify(difference_oracle([1, 2]), trials=10)
    assert not fit.fits
    assert fit.witness["degree"] == 3
    assert fit.witness["residual"].is_constant() and not fit.witness["residual"].is_zero()


def test_classify_requires_cubic_probes(spec):
    with pytest.raises(ValueError):
        classify(canonical_oracle(spec(["0"], ["1"])), max_probe_degree=2)


def test_sign_of_c_is_recovered_not_squared(spec, poly):
    s = spec(["0"], ["-x"])
    fit = classify(canonical_oracle(s), trials=5)
    assert fit.c == [poly("-x", 1)]
    assert fit.products[0][0] == poly("x^2", 1)


def test_channel_disagreement_short_circuits(spec, poly):
    base = canonical_oracle(spec(["0"], ["1"]))
    # A claims c = 2 while T still encodes c^2 = 1
    o = OperatorOracle(base.apply_T, lambda f: base.apply_A(f) * 2, 1)
    fit = classify(o)
    assert not fit.fits
    assert fit.witness["channel"] == "quadratic"
    assert not recheck_witness(o, fit).is_zero()


def test_hidden_cubic_term_is_found(spec, poly):
    s = spec(["1"], ["x"])
    third = lambda f: f.diff(0).diff(0).diff(0)
    o = OperatorOracle(lambda f: T_apply(s, f) + third(f), lambda f: A_apply(s, f), 1)
    fit = classify(o)
    assert not fit.fits and fit.witness["degree"] == 3


def test_non_additive_oracle_is_a_hypothesis_violation(spec):
    s = spec(["1"], ["1"])
    o = OperatorOracle(lambda f: T_apply(s, f) * T_apply(s, f), lambda f: A_apply(s, f), 1)
    with pytest.raises(HypothesisViolation) as err:
        classify(o)
    assert err.value.witness["channel"] == "T"


def test_opaque_oracle_rejected(spec):
    o = OperatorOracle(lambda f: 3.5, lambda f: f, 1)
    with pytest.raises(OpaqueOracleError):
        classify(o)
    wrong_dim = OperatorOracle(lambda f: Polynomial.zero(2), lambda f: f, 1)
    with pytest.raises(OpaqueOracleError):
        wrong_dim.T(Polynomial.var(1, 0))


def test_rational_polynomial_outputs_are_accepted(spec):
    s = spec(["x"], ["1"])
    o = OperatorOracle(lambda f: RationalFunction(T_apply(s, f)), lambda f: A_apply(s, f), 1)
    assert classify(o, trials=5).fits


def test_fit_json_shape(spec):
    fit = classify(difference_oracle([1]))
    data = fit.to_json()
    assert data["outcome"] == "NotOfForm"
    assert data["witness"]["residual"] == [{"exps": [0], "coef": "1"}]
    assert classify(canonical_oracle(spec(["x"], ["1"])), trials=3).to_json()["outcome"] == "FitsForm"


def test_classify_is_deterministic(spec):
    o = canonical_oracle(spec(["x1", "x2"], ["x1*x2", "1"]))
    assert classify(o, seed=4, trials=10).to_json() == classify(o, seed=4, trials=10).to_json()


def test_oracle_json_kinds():
    with pytest.raises(ValueError):
        oracle_from_json({"kind": "mystery"})
    assert oracle_from_json({"kind": "difference", "h": ["1/2"]}).pairing == Fraction(1, 2)
    s = OperatorSpec.zero(1)
    assert oracle_from_json({"kind": "canonical", "spec": s.to_json()}).dim == 1
