"""Seeded generators for random polynomials, specs and shift vectors."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import List

from .poly import Polynomial
from .polyfunc import OperatorSpec


def random_rational(rng: random.Random, bound: int = 5, max_den: int = 3) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, max_den))


def monomials(nvars: int, max_degree: int) -> List[tuple]:
    """Exponent tuples of total degree <= max_degree, by degree then lexicographically (descending)."""
    out = []
    for deg in range(max_degree + 1):
        layer = [e for e in itertools.product(range(deg + 1), repeat=nvars) if sum(e) == deg]
        out.extend(sorted(layer, reverse=True))
    return out


def random_polynomial(rng: random.Random, nvars: int, max_degree: int, max_terms: int = 5) -> Polynomial:
    pool = monomials(nvars, max_degree)
    count = rng.randint(1, min(max_terms, len(pool)))
    terms = {}
    for e in rng.sample(pool, count):
        c = random_rational(rng)
        terms[e] = c if c else Fraction(1)
    return Polynomial(nvars, terms)


def random_spec(rng: random.Random, nvars: int, max_degree: int = 3, k: int = 2, max_terms: int = 3) -> OperatorSpec:
    """Random coefficient fields; each component is zero with probability 1/5."""
    def component():
        if rng.random() < 0.2:
            return Polynomial.zero(nvars)
        return random_polynomial(rng, nvars, max_degree, max_terms)

    b = tuple(component() for _ in range(nvars)) if k >= 1 else tuple(Polynomial.zero(nvars) for _ in range(nvars))
    c = tuple(component() for _ in range(nvars)) if k >= 2 else tuple(Polynomial.zero(nvars) for _ in range(nvars))
    return OperatorSpec(b, c, k)


def random_shift(rng: random.Random, nvars: int) -> List[Fraction]:
    while True:
        h = [random_rational(rng, 3, 2) for _ in range(nvars)]
        if any(h):
            return h
