"""Additive and multi-additive maps between finite ring additive groups.

Maps are stored by their values on the canonical cyclic generators of the
domain (see :mod:`oplab.rings`).  A generator of order ``d`` may only go to an
element killed by ``d``; for a bi-additive map the value on a generator pair
must be killed by ``gcd(d_i, d_j)``.  Every homomorphism arises exactly once
from such a choice, which keeps enumeration at a product of small counts
instead of ``|Q|^|P|`` function tables.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .report import FAIL, PASS, REFUSED, SizeGuardError, VerificationReport, elapsed_ms
from .rings import Ring, is_mul_injective, make_ring, ring_spec_from_json

DEFAULT_GUARD = 10**7


class NotMonomialTraceError(ValueError):
    """The supplied values are not the trace of a symmetric n-additive map."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class FunctionTable:
    """An arbitrary function ``domain -> codomain`` given by its value list."""

    domain: Ring
    codomain: Ring
    values: tuple

    def __call__(self, x: int) -> int:
        return self.values[x]

    @classmethod
    def from_callable(cls, domain: Ring, codomain: Ring, fn: Callable[[int], int]) -> "FunctionTable":
        return cls(domain, codomain, tuple(fn(x) for x in domain.elements()))

    def to_json(self) -> dict:
        return {
            "domain": self.domain.spec.to_json(),
            "codomain": self.codomain.spec.to_json(),
            "values": [self.codomain.payload(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict, domain: Optional[Ring] = None, codomain: Optional[Ring] = None) -> "FunctionTable":
        if domain is None:
            domain = make_ring(ring_spec_from_json(data["domain"]))
        if codomain is None:
            codomain = make_ring(ring_spec_from_json(data["codomain"])) if "codomain" in data else domain
        if "values" in data:
            raw = data["values"]
            if len(raw) != domain.size:
                raise ValueError(f"expected {domain.size} values, got {len(raw)}")
            values = tuple(codomain.index(_tuplify(v)) for v in raw)
        else:
            table = {domain.index(_tuplify(x)): codomain.index(_tuplify(v)) for x, v in data["table"]}
            missing = [domain.payload(x) for x in domain.elements() if x not in table]
            if missing:
                raise ValueError(f"table misses domain elements {missing[:5]}")
            values = tuple(table[x] for x in domain.elements())
        return cls(domain, codomain, values)


def _tuplify(v):
    if isinstance(v, list):
        return tuple(_tuplify(x) for x in v)
    return v


def _linear_combination(codomain: Ring, coeffs, images) -> int:
    total = codomain.zero
    for a, img in zip(coeffs, images):
        if a:
            total = codomain.add(total, codomain.scale(a, img))
    return total


class AdditiveMap:
    """A group homomorphism ``domain -> codomain``."""

    def __init__(self, domain: Ring, codomain: Ring, generator_images: Sequence[int]):
        images = tuple(generator_images)
        if len(images) != len(domain.orders):
            raise ValueError(f"need {len(domain.orders)} generator images, got {len(images)}")
        for d, img in zip(domain.orders, images):
            if codomain.scale(d, img) != codomain.zero:
                raise ValueError(
                    f"image {codomain.payload(img)!r} has order not dividing generator order {d}")
        self.domain = domain
        self.codomain = codomain
        self.generator_images = images
        self.table = tuple(_linear_combination(codomain, domain.coords(x), images) for x in domain.elements())

    def __call__(self, x: int) -> int:
        return self.table[x]

    def __eq__(self, other) -> bool:
        return (isinstance(other, AdditiveMap) and other.domain == self.domain
                and other.codomain == self.codomain and other.generator_images == self.generator_images)

    def __hash__(self) -> int:
        return hash((self.domain, self.codomain, self.generator_images))

    def __repr__(self) -> str:
        imgs = [self.codomain.payload(i) for i in self.generator_images]
        return f"AdditiveMap({self.domain.spec} -> {self.codomain.spec}, {imgs})"

    def to_json(self) -> dict:
        return {"generator_images": [self.codomain.payload(i) for i in self.generator_images]}

    @classmethod
    def from_json(cls, data: dict, domain: Ring, codomain: Ring) -> "AdditiveMap":
        return cls(domain, codomain, [codomain.index(_tuplify(v)) for v in data["generator_images"]])


class MultiAddMap:
    """A map ``domain^arity -> codomain`` evaluated through ``fn``.

    Maps built by :meth:`from_generators` are multi-additive by construction;
    maps wrapping an arbitrary ``fn`` are whatever ``fn`` is, and can be
    checked with :func:`verify_multiadditive`.
    """

    def __init__(self, domain: Ring, codomain: Ring, arity: int, fn: Callable[..., int],
                 generator_images: Optional[dict] = None):
        if arity < 1:
            raise ValueError("arity must be at least 1")
        self.domain = domain
        self.codomain = codomain
        self.arity = arity
        self._fn = fn
        self.generator_images = generator_images
        self._memo: dict = {}

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise TypeError(f"expected {self.arity} arguments, got {len(args)}")
        try:
            return self._memo[args]
        except KeyError:
            value = self._memo[args] = self._fn(*args)
            return value

    @classmethod
    def from_generators(cls, domain: Ring, codomain: Ring, arity: int, images: dict) -> "MultiAddMap":
        """``images`` maps generator-position tuples to codomain indices (missing = 0)."""
        orders = domain.orders
        for pos, img in images.items():
            g = math.gcd(*(orders[i] for i in pos))
            if codomain.scale(g, img) != codomain.zero:
                raise ValueError(f"image on generators {pos} is not killed by {g}")
        images = {pos: img for pos, img in images.items() if img != codomain.zero}

        def fn(*args: int) -> int:
            coords = [domain.coords(a) for a in args]
            total = codomain.zero
            for pos, img in images.items():
                k = 1
                for c, i in zip(coords, pos):
                    k *= c[i]
                    if not k:
                        break
                if k:
                    total = codomain.add(total, codomain.scale(k, img))
            return total

        return cls(domain, codomain, arity, fn, generator_images=dict(images))

    def table(self) -> dict:
        return {args: self(*args) for args in itertools.product(self.domain.elements(), repeat=self.arity)}

    def equals(self, other: "MultiAddMap") -> bool:
        if self.arity != other.arity or self.domain != other.domain or self.codomain != other.codomain:
            return False
        return all(self(*a) == other(*a) for a in itertools.product(self.domain.elements(), repeat=self.arity))

    def to_json(self) -> dict:
        rank = len(self.domain.orders)
        gens = self.domain.generators()
        images = [[list(pos), self.codomain.payload(self(*(gens[i] for i in pos)))]
                  for pos in itertools.product(range(rank), repeat=self.arity)]
        return {"arity": self.arity, "generator_images": images}

    @classmethod
    def from_json(cls, data: dict, domain: Ring, codomain: Ring) -> "MultiAddMap":
        images = {tuple(pos): codomain.index(_tuplify(v)) for pos, v in data["generator_images"]}
        return cls.from_generators(domain, codomain, int(data["arity"]), images)

    def __repr__(self) -> str:
        return f"MultiAddMap(arity={self.arity}, {self.domain.spec} -> {self.codomain.spec})"


def _guarded_product(what: str, counts: Sequence[int], guard: int) -> int:
    total = math.prod(counts)
    if total > guard:
        raise SizeGuardError(what, total, guard)
    return total


def _killed_by(codomain: Ring, d: int) -> list:
    return [q for q in codomain.elements() if codomain.scale(d, q) == codomain.zero]


def count_additive(domain: Ring, codomain: Ring) -> int:
    return math.prod(len(_killed_by(codomain, d)) for d in domain.orders)


def enumerate_additive(domain: Ring, codomain: Ring, guard: int = DEFAULT_GUARD) -> Iterator[AdditiveMap]:
    """Every additive map ``domain -> codomain`` exactly once, in a fixed order."""
    choices = [_killed_by(codomain, d) for d in domain.orders]
    _guarded_product("additive maps", [len(c) for c in choices], guard)
    for images in itertools.product(*choices):
        yield AdditiveMap(domain, codomain, images)


def _pair_choices(domain: Ring, codomain: Ring):
    rank = len(domain.orders)
    pairs = [(i, j) for i in range(rank) for j in range(i, rank)]
    choices = [_killed_by(codomain, math.gcd(domain.orders[i], domain.orders[j])) for i, j in pairs]
    return pairs, choices


def count_biadd_symmetric(domain: Ring, codomain: Ring) -> int:
    _, choices = _pair_choices(domain, codomain)
    return math.prod(len(c) for c in choices)


def enumerate_biadd_symmetric(domain: Ring, codomain: Ring, guard: int = DEFAULT_GUARD) -> Iterator[MultiAddMap]:
    """Every symmetric bi-additive map ``domain x domain -> codomain`` exactly once."""
    pairs, choices = _pair_choices(domain, codomain)
    _guarded_product("symmetric bi-additive maps", [len(c) for c in choices], guard)
    for values in itertools.product(*choices):
        images = {}
        for (i, j), v in zip(pairs, values):
            images[(i, j)] = v
            images[(j, i)] = v
        yield MultiAddMap.from_generators(domain, codomain, 2, images)


def trace(m: MultiAddMap) -> FunctionTable:
    """Diagonal ``x -> m(x, ..., x)``."""
    return FunctionTable.from_callable(m.domain, m.codomain, lambda x: m(*([x] * m.arity)))


def difference(f, y: int) -> FunctionTable:
    """``x -> f(x + y) - f(x)``."""
    P, Q = f.domain, f.codomain
    return FunctionTable(P, Q, tuple(Q.sub(f(P.add(x, y)), f(x)) for x in P.elements()))


def iterated_difference(f, ys: Sequence[int]) -> FunctionTable:
    result = f
    for y in ys:
        result = difference(result, y)
    if not ys:
        result = FunctionTable.from_callable(f.domain, f.codomain, f)
    return result


def _difference_at(f, x: int, ys: Sequence[int]) -> int:
    # inclusion-exclusion form of the iterated difference at one point
    P, Q = f.domain, f.codomain
    m = len(ys)
    total = Q.zero
    for mask in range(1 << m):
        point = x
        bits = 0
        for i in range(m):
            if mask >> i & 1:
                point = P.add(point, ys[i])
                bits += 1
        value = f(point)
        total = Q.sub(total, value) if (m - bits) % 2 else Q.add(total, value)
    return total


@dataclass
class PolarizationResult:
    arity: int
    factor: int
    scaled: MultiAddMap
    unscaled: Optional[MultiAddMap]

    @property
    def divisible(self) -> bool:
        return self.unscaled is not None


def polarize(f, n: int, guard: int = DEFAULT_GUARD) -> PolarizationResult:
    """Recover ``n! * A`` from the trace ``f`` of a symmetric n-additive ``A``.

    The (n+1)-fold differences of ``f`` must vanish and the recovered map must
    reproduce ``n! * f`` on the diagonal; otherwise :class:`NotMonomialTraceError`
    is raised with the offending increments.  When ``x -> n!*x`` is injective on
    the codomain the unscaled ``A`` is returned as well.
    """
    if n < 1:
        raise ValueError("arity must be at least 1")
    P, Q = f.domain, f.codomain
    factor = math.factorial(n)
    cost = math.comb(P.size + n, n + 1) * P.size
    if cost > guard:
        raise SizeGuardError("polarization vanishing test", cost, guard)
    # differences are symmetric in the increments, so multisets suffice
    for ys in itertools.combinations_with_replacement(P.elements(), n + 1):
        d = iterated_difference(f, ys)
        for x in P.elements():
            if d(x) != Q.zero:
                raise NotMonomialTraceError(
                    f"{n + 1}-fold difference does not vanish",
                    {"x": P.payload(x), "increments": [P.payload(y) for y in ys],
                     "value": Q.payload(d(x))})

    table = {}
    for ys in itertools.product(P.elements(), repeat=n):
        key = tuple(sorted(ys))
        if key not in table:
            table[key] = _difference_at(f, P.zero, key)
    scaled = MultiAddMap(P, Q, n, lambda *ys: table[tuple(sorted(ys))])
    for y in P.elements():
        if scaled(*([y] * n)) != Q.scale(factor, f(y)):
            raise NotMonomialTraceError(
                "polarized map does not reproduce n! times the trace",
                {"diagonal": P.payload(y), "polarized": Q.payload(scaled(*([y] * n))),
                 "expected": Q.payload(Q.scale(factor, f(y)))})

    unscaled = None
    if is_mul_injective(Q, factor):
        inverse = {Q.scale(factor, q): q for q in Q.elements()}
        unscaled = MultiAddMap(P, Q, n, lambda *ys: inverse[scaled(*ys)])
    return PolarizationResult(n, factor, scaled, unscaled)


def verify_multiadditive(m, arity: int, symmetric: bool = False,
                         guard: int = DEFAULT_GUARD, equation: str = "multiadditive") -> VerificationReport:
    """Exhaustively check additivity in each argument (and optionally symmetry).

    ``m`` is any callable on domain indices with ``domain``/``codomain``
    attributes.  Failure is reported, never raised.
    """
    start = time.perf_counter()
    P, Q = m.domain, m.codomain
    cost = arity * P.size ** (arity + 1)
    if cost > guard:
        return VerificationReport(equation, REFUSED, checked=0, elapsed_ms=elapsed_ms(start),
                                  details={"estimate": cost, "bound": guard})
    checked = 0
    for pos in range(arity):
        for rest in itertools.product(P.elements(), repeat=arity - 1):
            for u in P.elements():
                for v in P.elements():
                    def at(z):
                        args = list(rest)
                        args.insert(pos, z)
                        return m(*args)
                    checked += 1
                    lhs = at(P.add(u, v))
                    rhs = Q.add(at(u), at(v))
                    if lhs != rhs:
                        return VerificationReport(
                            equation, FAIL, checked=checked, elapsed_ms=elapsed_ms(start),
                            witness={"position": pos, "others": [P.payload(r) for r in rest],
                                     "u": P.payload(u), "v": P.payload(v),
                                     "lhs": Q.payload(lhs), "rhs": Q.payload(rhs)})
    if symmetric and arity > 1:
        for args in itertools.product(P.elements(), repeat=arity):
            # adjacent transpositions generate the symmetric group
            for i in range(arity - 1):
                swapped = list(args)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                checked += 1
                if m(*args) != m(*swapped):
                    return VerificationReport(
                        equation, FAIL, checked=checked, elapsed_ms=elapsed_ms(start),
                        witness={"symmetry": [P.payload(a) for a in args], "swap": i})
    return VerificationReport(equation, PASS, checked=checked, elapsed_ms=elapsed_ms(start),
                              details={"arity": arity, "symmetric_checked": symmetric})
