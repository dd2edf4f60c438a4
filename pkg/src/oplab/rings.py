"""Small finite commutative rings with identity.

Three families are supported: ``Z_n`` (:class:`Modular`), finite direct
products (:class:`Product`) and univariate quotients ``Z_p[x]/(m(x))`` with
``p`` prime and ``m`` monic (:class:`Quotient`).

Every ring's additive group is presented as a direct sum of cyclic groups
``Z_{d_1} + ... + Z_{d_r}``: one coordinate for ``Z_n``, ``deg m`` coordinates
of order ``p`` for a quotient, and the concatenation of the factors'
coordinates for a product.  Elements are addressed internally by an integer
index into the lexicographic enumeration of payloads; :class:`RingElement`
wraps an index for friendlier arithmetic.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "Modular",
    "Product",
    "Quotient",
    "RingSpec",
    "RingSpecError",
    "Ring",
    "RingElement",
    "make_ring",
    "characteristic",
    "is_mul_injective",
    "ring_spec_from_json",
    "parse_ring",
]

# Rings up to this size get full addition/multiplication tables.
TABLE_LIMIT = 256


class RingSpecError(ValueError):
    """Raised for ring descriptions that violate a structural constraint."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class Modular:
    n: int

    def to_json(self) -> dict:
        return {"kind": "modular", "n": self.n}

    def __str__(self) -> str:
        return f"Z_{self.n}"


@dataclass(frozen=True)
class Product:
    factors: tuple

    def to_json(self) -> dict:
        return {"kind": "product", "factors": [f.to_json() for f in self.factors]}

    def __str__(self) -> str:
        return " x ".join(str(f) for f in self.factors)


@dataclass(frozen=True)
class Quotient:
    """``Z_p[x]/(modulus)``; ``modulus`` lists coefficients constant term first."""

    p: int
    modulus: tuple

    def to_json(self) -> dict:
        return {"kind": "quotient", "p": self.p, "modulus": list(self.modulus)}

    def __str__(self) -> str:
        terms = []
        for i in range(len(self.modulus) - 1, -1, -1):
            c = self.modulus[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            coef = "" if c == 1 and i else str(c)
            terms.append(coef + mono)
        return f"F_{self.p}[x]/({'+'.join(terms)})"


RingSpec = Union[Modular, Product, Quotient]


def validate_spec(spec: RingSpec) -> None:
    if isinstance(spec, Modular):
        if not isinstance(spec.n, int) or spec.n < 2:
            raise RingSpecError(f"modular ring needs n >= 2, got {spec.n!r}")
    elif isinstance(spec, Product):
        if not spec.factors:
            raise RingSpecError("product ring needs at least one factor")
        for f in spec.factors:
            validate_spec(f)
    elif isinstance(spec, Quotient):
        if not _is_prime(spec.p):
            raise RingSpecError(f"quotient base modulus must be prime, got {spec.p}")
        m = spec.modulus
        if len(m) < 2:
            raise RingSpecError("quotient modulus polynomial must have degree >= 1")
        if m[-1] % spec.p != 1:
            raise RingSpecError("quotient modulus polynomial must be monic")
    else:
        raise RingSpecError(f"unknown ring spec {spec!r}")


def ring_spec_from_json(data) -> RingSpec:
    """Parse ``{"kind": "modular", "n": 5}`` and friends."""
    if not isinstance(data, dict) or "kind" not in data:
        raise RingSpecError(f"ring spec must be an object with a 'kind': {data!r}")
    kind = data["kind"]
    if kind == "modular":
        spec = Modular(int(data["n"]))
    elif kind == "product":
        spec = Product(tuple(ring_spec_from_json(f) for f in data["factors"]))
    elif kind == "quotient":
        p = int(data["p"])
        spec = Quotient(p, tuple(int(c) % p for c in data["modulus"]))
    else:
        raise RingSpecError(f"unknown ring kind {kind!r}")
    validate_spec(spec)
    return spec


def parse_ring(text: str) -> RingSpec:
    """Parse CLI shorthand.

    Accepted forms: ``zn:5``, ``f2x2`` (= F_2[x]/(x^2)), ``dual:p``
    (= Z_p[x]/(x^2)), ``quot:p:c0,c1,...``, products joined with ``*``,
    inline JSON, or a path to a JSON file.
    """
    text = text.strip()
    if text.startswith("{"):
        return ring_spec_from_json(json.loads(text))
    if text.endswith(".json"):
        with open(text, encoding="utf-8") as fh:
            return ring_spec_from_json(json.load(fh))
    if "*" in text:
        spec = Product(tuple(parse_ring(part) for part in text.split("*")))
        validate_spec(spec)
        return spec
    try:
        if text.startswith("zn:"):
            spec = Modular(int(text[3:]))
        elif text == "f2x2":
            spec = Quotient(2, (0, 0, 1))
        elif text.startswith("dual:"):
            spec = Quotient(int(text[5:]), (0, 0, 1))
        elif text.startswith("quot:"):
            _, p, coeffs = text.split(":")
            spec = Quotient(int(p), tuple(int(c) % int(p) for c in coeffs.split(",")))
        else:
            raise RingSpecError(f"unrecognised ring shorthand {text!r}")
    except ValueError as exc:
        if isinstance(exc, RingSpecError):
            raise
        raise RingSpecError(f"malformed ring shorthand {text!r}: {exc}") from exc
    validate_spec(spec)
    return spec


class Ring:
    """A constructed finite ring.  Build through :func:`make_ring`."""

    def __init__(self, spec: RingSpec):
        validate_spec(spec)
        self.spec = spec
        self.orders: tuple = _orders(spec)
        self.size = math.prod(self.orders)
        # mixed-radix weights; first coordinate is most significant
        weights = []
        w = 1
        for d in reversed(self.orders):
            weights.append(w)
            w *= d
        self._weights = tuple(reversed(weights))
        self.zero = 0
        self.one = self._index_of_coords(_coords(spec, _one_payload(spec)))
        self._add_table = None
        self._mul_table = None
        self._neg = tuple(self._index_of_coords(tuple((-c) % d for c, d in zip(self.coords(i), self.orders)))
                          for i in range(self.size))
        if self.size <= TABLE_LIMIT:
            self._add_table = [[self._add_raw(i, j) for j in range(self.size)] for i in range(self.size)]
            self._mul_table = [[self._mul_raw(i, j) for j in range(self.size)] for i in range(self.size)]
        self.char = self._char()

    # -- indexing ---------------------------------------------------------
    def coords(self, i: int) -> tuple:
        return tuple((i // w) % d for w, d in zip(self._weights, self.orders))

    def _index_of_coords(self, cs) -> int:
        return sum(c * w for c, w in zip(cs, self._weights))

    def index(self, payload) -> int:
        return self._index_of_coords(_coords(self.spec, payload))

    def payload(self, i: int):
        return _payload(self.spec, self.coords(i))

    def elements(self) -> range:
        return range(self.size)

    def element(self, payload) -> "RingElement":
        return RingElement(self, self.index(payload))

    def __iter__(self) -> Iterator["RingElement"]:
        return (RingElement(self, i) for i in range(self.size))

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"Ring({self.spec})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Ring) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __reduce__(self):
        return (make_ring, (self.spec,))

    # -- arithmetic -------------------------------------------------------
    def _add_raw(self, i: int, j: int) -> int:
        return self._index_of_coords(tuple((a + b) % d for a, b, d in zip(self.coords(i), self.coords(j), self.orders)))

    def _mul_raw(self, i: int, j: int) -> int:
        prod = _mul_payload(self.spec, self.payload(i), self.payload(j))
        return self.index(prod)

    def add(self, i: int, j: int) -> int:
        if self._add_table is not None:
            return self._add_table[i][j]
        return self._add_raw(i, j)

    def mul(self, i: int, j: int) -> int:
        if self._mul_table is not None:
            return self._mul_table[i][j]
        return self._mul_raw(i, j)

    def neg(self, i: int) -> int:
        return self._neg[i]

    def sub(self, i: int, j: int) -> int:
        return self.add(i, self._neg[j])

    def scale(self, k: int, i: int) -> int:
        """k-fold additive sum ``k*x`` (k may be any integer)."""
        return self._index_of_coords(tuple((k * c) % d for c, d in zip(self.coords(i), self.orders)))

    def power(self, i: int, n: int) -> int:
        result = self.one
        for _ in range(n):
            result = self.mul(result, i)
        return result

    def sum(self, items) -> int:
        total = self.zero
        for x in items:
            total = self.add(total, x)
        return total

    def generators(self) -> list:
        """Canonical additive generators, one per cyclic coordinate."""
        gens = []
        for pos in range(len(self.orders)):
            cs = [0] * len(self.orders)
            cs[pos] = 1
            gens.append(self._index_of_coords(cs))
        return gens

    def _char(self) -> int:
        x, k = self.one, 1
        while x != self.zero:
            x = self.add(x, self.one)
            k += 1
        return k


@dataclass(frozen=True)
class RingElement:
    ring: Ring
    index: int

    @property
    def spec(self) -> RingSpec:
        return self.ring.spec

    @property
    def payload(self):
        return self.ring.payload(self.index)

    def _other(self, other) -> int:
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise ValueError("elements from different rings")
            return other.index
        if isinstance(other, int):
            return self.ring.scale(other, self.ring.one)
        return NotImplemented

    def __add__(self, other):
        return RingElement(self.ring, self.ring.add(self.index, self._other(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return RingElement(self.ring, self.ring.mul(self.index, self._other(other)))

    __rmul__ = __mul__

    def __sub__(self, other):
        return RingElement(self.ring, self.ring.sub(self.index, self._other(other)))

    def __rsub__(self, other):
        return RingElement(self.ring, self.ring.sub(self._other(other), self.index))

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.index))

    def __pow__(self, n: int):
        return RingElement(self.ring, self.ring.power(self.index, n))

    def __repr__(self) -> str:
        return f"{self.payload!r}@{self.ring.spec}"


@functools.lru_cache(maxsize=None)
def make_ring(spec: RingSpec) -> Ring:
    return Ring(spec)


def characteristic(ring: Ring) -> int:
    """Additive order of the identity."""
    return ring.char


def is_mul_injective(ring: Ring, k: int) -> bool:
    """Whether ``x -> k*x`` is injective on the additive group."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    # on a direct sum of cyclic groups Z_d, k*x is injective iff gcd(k, d) = 1 everywhere
    return all(math.gcd(k, d) == 1 for d in ring.orders)


# -- per-family helpers ----------------------------------------------------

def _orders(spec: RingSpec) -> tuple:
    if isinstance(spec, Modular):
        return (spec.n,)
    if isinstance(spec, Quotient):
        return (spec.p,) * (len(spec.modulus) - 1)
    return tuple(itertools.chain.from_iterable(_orders(f) for f in spec.factors))


def _coords(spec: RingSpec, payload) -> tuple:
    if isinstance(spec, Modular):
        return (payload % spec.n,)
    if isinstance(spec, Quotient):
        return tuple(c % spec.p for c in payload)
    return tuple(itertools.chain.from_iterable(_coords(f, p) for f, p in zip(spec.factors, payload)))


def _payload(spec: RingSpec, coords: tuple):
    if isinstance(spec, Modular):
        return coords[0]
    if isinstance(spec, Quotient):
        return tuple(coords)
    out, pos = [], 0
    for f in spec.factors:
        width = len(_orders(f))
        out.append(_payload(f, coords[pos:pos + width]))
        pos += width
    return tuple(out)


def _one_payload(spec: RingSpec):
    if isinstance(spec, Modular):
        return 1
    if isinstance(spec, Quotient):
        return (1,) + (0,) * (len(spec.modulus) - 2)
    return tuple(_one_payload(f) for f in spec.factors)


def _mul_payload(spec: RingSpec, a, b):
    if isinstance(spec, Modular):
        return (a * b) % spec.n
    if isinstance(spec, Product):
        return tuple(_mul_payload(f, x, y) for f, x, y in zip(spec.factors, a, b))
    p, m = spec.p, spec.modulus
    deg = len(m) - 1
    prod = [0] * (2 * deg - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    # reduce using x^deg = -(m_0 + ... + m_{deg-1} x^{deg-1})
    for top in range(len(prod) - 1, deg - 1, -1):
        c = prod[top]
        if c:
            prod[top] = 0
            for i in range(deg):
                prod[top - deg + i] = (prod[top - deg + i] - c * m[i]) % p
    return tuple(prod[:deg])
