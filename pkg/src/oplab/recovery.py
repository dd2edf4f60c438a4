"""Fit black-box operator pairs to the canonical second-order form.

Coordinate probes recover the fields: ``T(x_i) = b_i`` and ``A(x_i) = c_i``.
Quadratic probes give the symmetric products through
``T(x_i x_j) - x_i b_j - x_j b_i = 2 c_i c_j`` and must agree with the A
channel.  Agreement through degree 2 is not enough (a shift difference
passes it), so the fit is then validated on every monomial and on seeded
random polynomials up to ``max_probe_degree >= 3``.

An oracle carries a ``pairing`` scalar ``lam`` when its Leibniz rule reads
``T(fg) = f T(g) + T(f) g + 2 lam A(f) A(g)``; the reported products are
then ``lam * c_i * c_j``, the values the canonical form would use.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

from .poly import Polynomial, RationalFunction, gradient
from .polyfunc import A_apply, OperatorSpec, T_apply, difference_op_apply
from .sampling import monomials, random_polynomial, random_rational


class OpaqueOracleError(TypeError):
    """The oracle returned something other than an exact polynomial."""


class HypothesisViolation(ValueError):
    """The oracle failed the additivity / Q-homogeneity spot check."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass
class OperatorOracle:
    apply_T: Callable[[Polynomial], Polynomial]
    apply_A: Callable[[Polynomial], Polynomial]
    dim: int
    k: int = 2
    pairing: Fraction = Fraction(1)
    description: Optional[dict] = None

    def T(self, f: Polynomial) -> Polynomial:
        return _checked(self.apply_T(f), self.dim, "T")

    def A(self, f: Polynomial) -> Polynomial:
        return _checked(self.apply_A(f), self.dim, "A")


def _checked(value, dim: int, channel: str) -> Polynomial:
    if isinstance(value, RationalFunction) and value.is_polynomial():
        value = value.as_polynomial()
    if not isinstance(value, Polynomial) or value.nvars != dim:
        raise OpaqueOracleError(f"oracle channel {channel} returned a non-polynomial value {value!r}")
    return value


def canonical_oracle(spec: OperatorSpec) -> OperatorOracle:
    return OperatorOracle(lambda f: T_apply(spec, f), lambda f: A_apply(spec, f), spec.N, spec.k,
                          description={"kind": "canonical", "spec": spec.to_json()})


def difference_oracle(h: Sequence) -> OperatorOracle:
    """``T = A = f(x + h) - f(x)`` with pairing 1/2 (the rational stand-in for ``A = -(sqrt2/2) T``)."""
    h = [Fraction(v) for v in h]
    return OperatorOracle(lambda f: difference_op_apply(h, f), lambda f: difference_op_apply(h, f), len(h), 2,
                          pairing=Fraction(1, 2), description={"kind": "difference", "h": [str(v) for v in h]})


def oracle_from_json(data: dict) -> OperatorOracle:
    kind = data.get("kind")
    if kind == "canonical":
        return canonical_oracle(OperatorSpec.from_json(data["spec"]))
    if kind == "difference":
        return difference_oracle([Fraction(str(v)) for v in data["h"]])
    if kind == "zero":
        return canonical_oracle(OperatorSpec.zero(int(data.get("dim", 1))))
    raise ValueError(f"unknown oracle kind {kind!r}")


def spot_check_additivity(oracle: OperatorOracle, seed: int = 0, trials: int = 10, max_degree: int = 3) -> None:
    """Sample ``f, g, r`` and require ``O(f+g) = O(f)+O(g)`` and ``O(r f) = r O(f)`` on both channels."""
    rng = random.Random(seed)
    for _ in range(trials):
        f = random_polynomial(rng, oracle.dim, max_degree)
        g = random_polynomial(rng, oracle.dim, max_degree)
        r = random_rational(rng)
        for name, op in (("T", oracle.T), ("A", oracle.A)):
            if op(f + g) != op(f) + op(g):
                raise HypothesisViolation(f"channel {name} is not additive",
                                          {"channel": name, "f": f, "g": g})
            if op(f * r) != op(f) * r:
                raise HypothesisViolation(f"channel {name} is not Q-homogeneous",
                                          {"channel": name, "f": f, "r": r})


def recover_b(oracle: OperatorOracle) -> List[Polynomial]:
    return [oracle.T(Polynomial.var(oracle.dim, i)) for i in range(oracle.dim)]


@dataclass
class ProductRecovery:
    c: List[Polynomial]
    products: List[List[Polynomial]]
    disagreement: Optional[dict] = None


def recover_c_products(oracle: OperatorOracle, b: Sequence[Polynomial]) -> ProductRecovery:
    """``c`` from the A channel and the products from quadratic T probes, cross-checked."""
    N = oracle.dim
    xs = [Polynomial.var(N, i) for i in range(N)]
    c = [oracle.A(x) for x in xs]
    products = [[None] * N for _ in range(N)]
    disagreement = None
    for i in range(N):
        for j in range(i, N):
            probe = xs[i] * xs[j]
            quad = oracle.T(probe) - xs[i] * b[j] - xs[j] * b[i]
            p = quad * Fraction(1, 2)
            products[i][j] = products[j][i] = p
            from_a = c[i] * c[j] * oracle.pairing
            if disagreement is None and p != from_a:
                disagreement = {"probe": probe, "pair": [i, j], "t_channel": p, "a_channel": from_a,
                                "residual": quad - from_a * 2}
    return ProductRecovery(c, products, disagreement)


def predicted_T(f: Polynomial, b: Sequence[Polynomial], products: Sequence[Sequence[Polynomial]]) -> Polynomial:
    grad = gradient(f)
    out = Polynomial.zero(f.nvars)
    for i, gi in enumerate(grad):
        if not gi:
            continue
        out = out + gi * b[i]
        for j in range(f.nvars):
            out = out + gi.diff(j) * products[i][j]
    return out


def predicted_A(f: Polynomial, c: Sequence[Polynomial]) -> Polynomial:
    out = Polynomial.zero(f.nvars)
    for gi, ci in zip(gradient(f), c):
        out = out + gi * ci
    return out


@dataclass
class FitResult:
    fits: bool
    b: List[Polynomial]
    c: List[Polynomial]
    products: List[List[Polynomial]]
    witness: Optional[dict] = None
    probes_checked: int = 0
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "outcome": "FitsForm" if self.fits else "NotOfForm",
            "b": [p.to_json() for p in self.b],
            "c": [p.to_json() for p in self.c],
            "c_products": [[p.to_json() for p in row] for row in self.products],
            "probes_checked": self.probes_checked,
        }
        if self.witness is not None:
            out["witness"] = {k: (v.to_json() if hasattr(v, "to_json") else v) for k, v in self.witness.items()}
        return out


def probe_polynomials(dim: int, max_degree: int, trials: int, seed: int) -> List[Polynomial]:
    """All monomials up to ``max_degree`` (by degree), then seeded random polynomials."""
    probes = [Polynomial.monomial(e) for e in monomials(dim, max_degree)]
    rng = random.Random(seed)
    probes.extend(random_polynomial(rng, dim, max_degree) for _ in range(trials))
    return probes


def channel_residual(oracle: OperatorOracle, channel: str, f: Polynomial, b, c, products) -> Polynomial:
    if channel == "T":
        return oracle.T(f) - predicted_T(f, b, products)
    return oracle.A(f) - predicted_A(f, c)


def validate_fit(oracle: OperatorOracle, b, c, products, max_degree: int, trials: int = 100, seed: int = 0,
                 channels: Sequence[str] = ("T", "A")):
    """Sweep each channel over the probe suite; return ``(violation or None, probes checked)``.

    Channels are swept one after the other so the T channel's first failure is
    reported even when A would fail on a lower-degree probe.
    """
    probes = probe_polynomials(oracle.dim, max_degree, trials, seed)
    checked = 0
    for channel in channels:
        for f in probes:
            checked += 1
            residual = channel_residual(oracle, channel, f, b, c, products)
            if residual:
                return {"channel": channel, "probe": f, "degree": f.degree(), "residual": residual}, checked
    return None, checked


def classify(oracle: OperatorOracle, max_probe_degree: int = 3, trials: int = 100, seed: int = 0,
             spot_checks: int = 10) -> FitResult:
    """Recover ``b`` and the ``c`` products, then validate them on the probe suite.

    Raises :class:`HypothesisViolation` when the oracle is not additive.
    """
    if max_probe_degree < 3:
        raise ValueError("max_probe_degree must be at least 3; quadratic probes cannot reject shift differences")
    spot_check_additivity(oracle, seed, spot_checks)
    b = recover_b(oracle)
    rec = recover_c_products(oracle, b)
    if rec.disagreement is not None:
        d = rec.disagreement
        witness = {"channel": "quadratic", "probe": d["probe"], "degree": 2, "residual": d["residual"],
                   "pair": d["pair"]}
        return FitResult(False, b, rec.c, rec.products, witness, 0, {"stage": "recover_c_products"})
    violation, checked = validate_fit(oracle, b, rec.c, rec.products, max(3, max_probe_degree), trials, seed)
    return FitResult(violation is None, b, rec.c, rec.products, violation, checked,
                     {"max_probe_degree": max(3, max_probe_degree), "trials": trials, "seed": seed})


def recheck_witness(oracle: OperatorOracle, fit: FitResult) -> Polynomial:
    """Recompute the residual recorded in a NotOfForm witness."""
    w = fit.witness
    if w is None:
        raise ValueError("fit has no witness")
    if w["channel"] == "quadratic":
        i, j = w["pair"]
        xs = [Polynomial.var(oracle.dim, t) for t in range(oracle.dim)]
        return (oracle.T(xs[i] * xs[j]) - xs[i] * fit.b[j] - xs[j] * fit.b[i]
                - fit.c[i] * fit.c[j] * oracle.pairing * 2)
    return channel_residual(oracle, w["channel"], w["probe"], fit.b, fit.c, fit.products)
