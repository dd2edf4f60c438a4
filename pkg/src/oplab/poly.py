"""Exact multivariate polynomials and rational functions over Q.

Terms are stored as ``{exponent tuple: Fraction}`` with zero coefficients
dropped.  The canonical term order is graded lexicographic, highest first;
it fixes leading terms, printing and JSON output.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

Exps = Tuple[int, ...]
Scalar = Union[int, Fraction]


def _order_key(exps: Exps):
    return (sum(exps), exps)


class Polynomial:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Mapping[Exps, Scalar]] = None):
        if nvars < 1:
            raise ValueError("need at least one variable")
        self.nvars = nvars
        clean: Dict[Exps, Fraction] = {}
        if terms:
            for exps, c in terms.items():
                if len(exps) != nvars:
                    raise ValueError(f"exponent {exps} does not have {nvars} entries")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                if c:
                    clean[tuple(exps)] = Fraction(c)
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: Scalar) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def one(cls, nvars: int) -> "Polynomial":
        return cls.constant(nvars, 1)

    @classmethod
    def var(cls, nvars: int, i: int) -> "Polynomial":
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], coef: Scalar = 1) -> "Polynomial":
        return cls(len(exps), {tuple(exps): coef})

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exps, Fraction]) -> "Polynomial":
        p = object.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # -- inspection --------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _order_key(kv[0]), reverse=True)

    def leading(self) -> Tuple[Exps, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self.terms, key=_order_key)
        return exps, self.terms[exps]

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` integral and primitive."""
        if not self.terms:
            return Fraction(0)
        coeffs = list(self.terms.values())
        num = reduce(math.gcd, (abs(c.numerator) for c in coeffs))
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in coeffs))
        return Fraction(num, den)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial.zero(self.nvars)
            return Polynomial._raw(self.nvars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms: Dict[Exps, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial._raw(self.nvars, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, Polynomial):
            return RationalFunction(self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalFunction(Polynomial.constant(self.nvars, other), self)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are rational functions; use 1/p")
        result = Polynomial.one(self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_term() == other
        if isinstance(other, RationalFunction):
            return other == self
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and evaluation -------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        terms: Dict[Exps, Fraction] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                lowered = e[:i] + (k - 1,) + e[i + 1:]
                terms[lowered] = c * k
        return Polynomial._raw(self.nvars, terms)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"point needs {self.nvars} coordinates")
        total = Fraction(0)
        pt = [Fraction(x) for x in point]
        for e, c in self.terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term *= x ** k
            total += term
        return total

    __call__ = evaluate

    def compose(self, subs: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute ``x_i -> subs[i]`` (all in a common variable count)."""
        if len(subs) != self.nvars:
            raise ValueError(f"need {self.nvars} substitutions")
        out_vars = subs[0].nvars
        cache: Dict[Tuple[int, int], Polynomial] = {}

        def power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in cache:
                cache[key] = subs[i] ** k
            return cache[key]

        result = Polynomial.zero(out_vars)
        for e, c in self.terms.items():
            term = Polynomial.constant(out_vars, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            result = result + term
        return result

    def shift(self, h: Sequence[Scalar]) -> "Polynomial":
        """``x -> self(x + h)``."""
        return self.compose([Polynomial.var(self.nvars, i) + Fraction(hi) for i, hi in enumerate(h)])

    # -- division ----------------------------------------------------------
    def exact_div(self, other: "Polynomial") -> Optional["Polynomial"]:
        """Quotient if ``other`` divides ``self`` exactly, else ``None``."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = other.leading()
        remainder = self
        quotient: Dict[Exps, Fraction] = {}
        while remainder:
            e, c = remainder.leading()
            if any(a < b for a, b in zip(e, lead_e)):
                return None
            qe = tuple(a - b for a, b in zip(e, lead_e))
            qc = c / lead_c
            quotient[qe] = qc
            remainder = remainder - Polynomial._raw(self.nvars, {qe: qc}) * other
        return Polynomial._raw(self.nvars, quotient)

    # -- I/O ---------------------------------------------------------------
    def to_json(self) -> list:
        return [{"exps": list(e), "coef": str(c)} for e, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], nvars: Optional[int] = None) -> "Polynomial":
        terms: Dict[Exps, Fraction] = {}
        for item in data:
            e = tuple(int(x) for x in item["exps"])
            if nvars is None:
                nvars = len(e)
            terms[e] = terms.get(e, 0) + Fraction(str(item["coef"]))
        if nvars is None:
            raise ValueError("cannot infer variable count of an empty polynomial; pass nvars")
        return cls(nvars, terms)

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(_var_name(i, self.nvars) + (f"^{k}" if k > 1 else "")
                            for i, k in enumerate(e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _var_name(i: int, nvars: int) -> str:
    return "x" if nvars == 1 else f"x{i + 1}"


def gradient(f: Polynomial) -> list:
    return [f.diff(i) for i in range(f.nvars)]


def hessian(f: Polynomial) -> list:
    first = gradient(f)
    return [[first[i].diff(j) for j in range(f.nvars)] for i in range(f.nvars)]


def laplacian(f: Polynomial) -> Polynomial:
    return sum((f.diff(i).diff(i) for i in range(f.nvars)), Polynomial.zero(f.nvars))


def dot(u: Sequence, v: Sequence):
    total = None
    for a, b in zip(u, v):
        total = a * b if total is None else total + a * b
    return total


class RationalFunction:
    """``num / den`` with ``den`` nonzero, kept in a deterministic normal form.

    Normalisation makes the denominator primitive and integral with a positive
    leading coefficient, and cancels the denominator entirely when it divides
    the numerator.  No polynomial GCD is taken, so two equal functions need not
    share a representation; equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Optional[Polynomial] = None):
        if den is None:
            den = Polynomial.one(num.nvars)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.nvars != den.nvars:
            raise ValueError("numerator and denominator variable counts differ")
        if num.is_zero():
            self.num, self.den = num, Polynomial.one(num.nvars)
            return
        if not den.is_constant():
            q = num.exact_div(den)
            if q is not None:
                num, den = q, Polynomial.one(num.nvars)
        scale = den.content()
        if den.leading()[1] < 0:
            scale = -scale
        self.num = num * (1 / scale)
        self.den = den * (1 / scale)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @classmethod
    def lift(cls, value, nvars: Optional[int] = None) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls(value)
        if nvars is None:
            raise TypeError(f"cannot lift {value!r} without a variable count")
        return cls(Polynomial.constant(nvars, value))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise ValueError("not a polynomial")
        return self.num * (1 / self.den.constant_term())

    def _other(self, other) -> "RationalFunction":
        if isinstance(other, (RationalFunction, Polynomial, int, Fraction)):
            return RationalFunction.lift(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.num, self.den, other.num, other.den
        if b == d:
            return RationalFunction(a + c, b)
        q = b.exact_div(d) if d.degree() <= b.degree() else None
        if q is not None:
            return RationalFunction(a + c * q, b)
        q = d.exact_div(b) if b.degree() <= d.degree() else None
        if q is not None:
            return RationalFunction(a * q + c, d)
        return RationalFunction(a * d + c * b, b * d)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        num, den = self.num * other.num, self.den * other.den
        return RationalFunction(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RationalFunction.lift(other, self.nvars) / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(self.den, self.num) ** (-n)
        return RationalFunction(self.num ** n, self.den ** n)

    def __eq__(self, other) -> bool:
        if isinstance(other, (Polynomial, int, Fraction)):
            other = RationalFunction.lift(other, self.nvars)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def diff(self, i: int) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.diff(i) * d - n * d.diff(i), d * d)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        den = self.den.evaluate(point)
        if den == 0:
            raise ZeroDivisionError(f"denominator vanishes at {list(point)}")
        return self.num.evaluate(point) / den

    __call__ = evaluate

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def __repr__(self) -> str:
        return f"RationalFunction(({self.num}) / ({self.den}))"

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.as_polynomial())
        return f"({self.num}) / ({self.den})"


class PolynomialParseError(ValueError):
    pass


def parse_polynomial(text: str, nvars: Optional[int] = None) -> Polynomial:
    """Parse expressions such as ``"x^2+1"`` or ``"3/2*x1*x2 - x3^3"``.

    Variables are ``x`` (same as ``x1``), ``y``, ``z`` (``x2``, ``x3``) or
    ``x1 ... xN``.  Division is allowed by nonzero constants only.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise PolynomialParseError(f"cannot parse {text!r}: {exc.msg}") from exc
    names = {node.id for node in ast.walk(tree) if isinstance(node, ast.Name)}
    index = {}
    for name in names:
        index[name] = _variable_index(name)
    needed = max(index.values(), default=-1) + 1
    if nvars is None:
        nvars = max(needed, 1)
    elif needed > nvars:
        raise PolynomialParseError(f"{text!r} uses {needed} variables but only {nvars} are declared")

    def walk(node) -> Polynomial:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Polynomial.constant(nvars, node.value)
        if isinstance(node, ast.Name):
            return Polynomial.var(nvars, index[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = walk(node.operand)
            return -inner if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not right.is_constant() or right.is_zero():
                    raise PolynomialParseError("only division by nonzero constants is supported")
                return left * (1 / right.constant_term())
            if isinstance(node.op, ast.Pow):
                if not right.is_constant() or right.constant_term().denominator != 1 or right.constant_term() < 0:
                    raise PolynomialParseError("exponents must be nonnegative integer constants")
                return left ** int(right.constant_term())
        raise PolynomialParseError(f"unsupported syntax in {text!r}: {ast.dump(node)[:60]}")

    return walk(tree)


def _variable_index(name: str) -> int:
    aliases = {"x": 0, "y": 1, "z": 2}
    if name in aliases:
        return aliases[name]
    if name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1:
        return int(name[1:]) - 1
    raise PolynomialParseError(f"unknown variable {name!r}")
