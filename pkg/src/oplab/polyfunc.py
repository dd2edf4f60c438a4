"""Canonical second-order operators on exact polynomial function spaces.

An :class:`OperatorSpec` with coefficient fields ``b, c`` defines

    T(f) = <H_f c, c> + <grad f, b>,      A(f) = <grad f, c>

on polynomials and rational functions.  The residual functions below compute
each operator identity exactly; a residual that is the zero polynomial (or
zero rational function) certifies the identity for that instance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .poly import Polynomial, RationalFunction, dot, gradient, laplacian

Function = Union[Polynomial, RationalFunction]
Point = Sequence[Fraction]


class SmoothnessError(ValueError):
    """Coefficient fields incompatible with the declared smoothness class."""


class HypothesisError(ValueError):
    """A hypothesis needed by an evaluation-based check could not be certified."""


class GeometryError(ValueError):
    pass


# -- domains and interval enclosures ----------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __mul__(self, other) -> "Interval":
        if not isinstance(other, Interval):
            c = Fraction(other)
            return Interval(min(self.lo * c, self.hi * c), max(self.lo * c, self.hi * c))
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Interval":
        if k == 0:
            return Interval(Fraction(1), Fraction(1))
        a, b = self.lo ** k, self.hi ** k
        if k % 2 == 0 and self.lo <= 0 <= self.hi:
            return Interval(Fraction(0), max(a, b))
        return Interval(min(a, b), max(a, b))

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box; ``None`` endpoints are unbounded."""

    lows: Tuple[Optional[Fraction], ...]
    highs: Tuple[Optional[Fraction], ...]

    def __post_init__(self):
        if len(self.lows) != len(self.highs) or not self.lows:
            raise GeometryError("box needs matching, nonempty endpoint lists")
        for lo, hi in zip(self.lows, self.highs):
            if lo is not None and hi is not None and not lo < hi:
                raise GeometryError(f"empty box side ({lo}, {hi})")

    @classmethod
    def of(cls, lows, highs) -> "Box":
        conv = lambda v: None if v is None else Fraction(v)
        return cls(tuple(conv(v) for v in lows), tuple(conv(v) for v in highs))

    @classmethod
    def whole_space(cls, n: int) -> "Box":
        return cls((None,) * n, (None,) * n)

    @property
    def dim(self) -> int:
        return len(self.lows)

    @property
    def bounded(self) -> bool:
        return None not in self.lows and None not in self.highs

    def contains_point(self, x: Point) -> bool:
        return all((lo is None or lo < v) and (hi is None or v < hi) for v, lo, hi in zip(x, self.lows, self.highs))

    def contains_closed_cube(self, center: Point, radius: Fraction) -> bool:
        return all((lo is None or lo < v - radius) and (hi is None or v + radius < hi)
                   for v, lo, hi in zip(center, self.lows, self.highs))

    def intervals(self) -> List[Interval]:
        if not self.bounded:
            raise HypothesisError("interval enclosures need a bounded box")
        return [Interval(lo, hi) for lo, hi in zip(self.lows, self.highs)]

    def to_json(self) -> dict:
        conv = lambda v: None if v is None else str(v)
        return {"lows": [conv(v) for v in self.lows], "highs": [conv(v) for v in self.highs]}


def enclose(f: Polynomial, intervals: Sequence[Interval]) -> Interval:
    """Rigorous (possibly loose) range enclosure of ``f`` over a closed box."""
    total = Interval(Fraction(0), Fraction(0))
    for e, c in f.terms.items():
        term = Interval(c, c)
        for iv, k in zip(intervals, e):
            if k:
                term = term * (iv ** k)
        total = total + term
    return total


def certify_nonvanishing(f: Polynomial, box: Box, depth: int = 10) -> bool:
    """True when ``f`` provably has no zero on the closure of ``box``.

    Bisects the widest side until every sub-box enclosure excludes 0; gives
    up (returns False) at ``depth`` or when a corner evaluates to exactly 0.
    """
    stack = [(box.intervals(), 0)]
    while stack:
        ivs, level = stack.pop()
        if not enclose(f, ivs).contains(0):
            continue
        if f.evaluate([iv.lo for iv in ivs]) == 0 or level >= depth:
            return False
        widest = max(range(len(ivs)), key=lambda i: ivs[i].hi - ivs[i].lo)
        mid = (ivs[widest].lo + ivs[widest].hi) / 2
        left, right = list(ivs), list(ivs)
        left[widest] = Interval(ivs[widest].lo, mid)
        right[widest] = Interval(mid, ivs[widest].hi)
        stack.extend([(right, level + 1), (left, level + 1)])
    return True


# -- operator specs -----------------------------------------------------------

@dataclass(frozen=True)
class OperatorSpec:
    """Coefficient fields ``b, c`` (length N each) and smoothness class ``k``."""

    b: Tuple[Polynomial, ...]
    c: Tuple[Polynomial, ...]
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", tuple(self.c))
        if not self.b or len(self.b) != len(self.c):
            raise ValueError("b and c need the same, positive number of components")
        N = len(self.b)
        if any(p.nvars != N for p in self.b + self.c):
            raise ValueError(f"coefficient fields must be polynomials in {N} variables")
        if self.k < 0:
            raise SmoothnessError("smoothness class k must be nonnegative")
        if self.k == 1 and any(self.c):
            raise SmoothnessError("k=1 requires c to vanish identically")
        if self.k == 0 and (any(self.b) or any(self.c)):
            raise SmoothnessError("k=0 requires b and c to vanish identically")

    @property
    def N(self) -> int:
        return len(self.b)

    @classmethod
    def zero(cls, N: int, k: int = 2) -> "OperatorSpec":
        z = tuple(Polynomial.zero(N) for _ in range(N))
        return cls(z, z, k)

    def to_json(self) -> dict:
        return {"k": self.k, "b": [p.to_json() for p in self.b], "c": [p.to_json() for p in self.c]}

    @classmethod
    def from_json(cls, data: dict) -> "OperatorSpec":
        N = len(data["b"])
        return cls(tuple(Polynomial.from_json(p, N) for p in data["b"]),
                   tuple(Polynomial.from_json(p, N) for p in data["c"]),
                   int(data.get("k", 2)))


def T_apply(spec: OperatorSpec, f):
    """``<H_f c, c> + <grad f, b>`` for polynomials, rational functions or piecewise polynomials."""
    if isinstance(f, PiecewisePolynomial):
        return f.map_pieces(lambda p: T_apply(spec, p))
    if isinstance(f, RationalFunction):
        return _T_rational(spec, f)
    N = spec.N
    out = Polynomial.zero(N)
    grad = gradient(f)
    for i in range(N):
        if spec.c[i]:
            inner = Polynomial.zero(N)
            for j in range(N):
                if spec.c[j]:
                    inner = inner + grad[i].diff(j) * spec.c[j]
            out = out + inner * spec.c[i]
        if spec.b[i]:
            out = out + grad[i] * spec.b[i]
    return out


def A_apply(spec: OperatorSpec, f):
    """``<grad f, c>``."""
    if isinstance(f, PiecewisePolynomial):
        return f.map_pieces(lambda p: A_apply(spec, p))
    if isinstance(f, RationalFunction):
        n, d = f.num, f.den
        num = Polynomial.zero(spec.N)
        for i in range(spec.N):
            if spec.c[i]:
                num = num + (n.diff(i) * d - n * d.diff(i)) * spec.c[i]
        return RationalFunction(num, d * d)
    return dot(gradient(f), spec.c)


def _T_rational(spec: OperatorSpec, f: RationalFunction) -> RationalFunction:
    # everything over den^3:
    # d_ij(n/d) = [n_ij d^2 - (n_i d_j + n_j d_i) d - n d_ij d + 2 n d_i d_j] / d^3
    # d_i(n/d)  = [n_i d - n d_i] d / d^3
    n, d = f.num, f.den
    N = spec.N
    ng, dg = gradient(n), gradient(d)
    num = Polynomial.zero(N)
    for i in range(N):
        ci = spec.c[i]
        if ci:
            for j in range(N):
                cj = spec.c[j]
                if not cj:
                    continue
                second = (ng[i].diff(j) * d * d - (ng[i] * dg[j] + ng[j] * dg[i]) * d
                          - n * dg[i].diff(j) * d + n * dg[i] * dg[j] * 2)
                num = num + second * ci * cj
        if spec.b[i]:
            num = num + (ng[i] * d - n * dg[i]) * d * spec.b[i]
    return RationalFunction(num, d * d * d)


# -- identity residuals -----------------------------------------------------

def check_second_order_leibniz(spec: OperatorSpec, f: Polynomial, g: Polynomial) -> Polynomial:
    """``T(fg) - f T(g) - T(f) g - 2 A(f) A(g)``."""
    return (T_apply(spec, f * g) - f * T_apply(spec, g) - T_apply(spec, f) * g
            - A_apply(spec, f) * A_apply(spec, g) * 2)


def check_first_order_leibniz(spec: OperatorSpec, f: Polynomial, g: Polynomial) -> Polynomial:
    """``T(fg) - f T(g) - T(f) g``; vanishes for every spec with ``c = 0``."""
    return T_apply(spec, f * g) - f * T_apply(spec, g) - T_apply(spec, f) * g


def laplacian_identity(f: Polynomial, g: Polynomial) -> Polynomial:
    """``lap(fg) - g lap(f) - f lap(g) - 2 <grad f, grad g>``."""
    return laplacian(f * g) - g * laplacian(f) - f * laplacian(g) - dot(gradient(f), gradient(g)) * 2


def check_eq6(spec: OperatorSpec, f: Polynomial, n: int) -> Polynomial:
    """``T(f^n) - n f^(n-1) T(f) - n A(f) A(f^(n-1))``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    fn1 = f ** (n - 1)
    return (T_apply(spec, fn1 * f) - fn1 * T_apply(spec, f) * n
            - A_apply(spec, f) * A_apply(spec, fn1) * n)


def difference_op_apply(h: Sequence, f: Polynomial) -> Polynomial:
    """``x -> f(x + h) - f(x)``."""
    h = [Fraction(v) for v in h]
    if len(h) != f.nvars:
        raise ValueError(f"shift needs {f.nvars} components")
    if not any(h):
        raise ValueError("shift vector h must be nonzero")
    return f.shift(h) - f


def check_difference_example(h: Sequence, f: Polynomial, g: Polynomial) -> Polynomial:
    """Leibniz defect of ``T = A = shift difference`` with pairing ``B(u, v) = uv/2``.

    Equivalent to the form with ``A = -(sqrt 2/2) * difference`` and the plain
    product, since ``2 * (sqrt 2/2)^2 = 1``, but stays rational.
    """
    dfg = difference_op_apply(h, f * g)
    df, dg = difference_op_apply(h, f), difference_op_apply(h, g)
    return dfg - f * dg - df * g - df * dg * 2 * Fraction(1, 2)


def check_eq7(spec: OperatorSpec, f: Polynomial, domain: Optional[Box] = None) -> RationalFunction:
    """``T(1/f) + T(f)/f^2 - 2 A(f)^2 / f^3`` as an exact rational function.

    With ``domain`` given, ``f`` must be certified nonvanishing on it first.
    """
    if f.is_zero():
        raise ValueError("f must not be the zero polynomial")
    if domain is not None and not certify_nonvanishing(f, domain):
        raise HypothesisError(f"could not certify that {f} has no zero on the domain")
    return eq7_residual(spec, RationalFunction(f))


def eq7_residual(spec: OperatorSpec, f: RationalFunction) -> RationalFunction:
    inv = 1 / f
    return T_apply(spec, inv) + T_apply(spec, f) / f ** 2 - A_apply(spec, f) ** 2 * 2 / f ** 3


def validate_scaling_rationals(f: Polynomial, domain: Box, rationals: Sequence) -> List[Fraction]:
    """Return the rationals ``r`` for which ``(r f)^2 != 1`` is certified on ``domain``."""
    valid = []
    for r in rationals:
        r = Fraction(r)
        if r == 0:
            continue
        if certify_nonvanishing(f * f * (r * r) - 1, domain):
            valid.append(r)
    return valid


def auto_scaling_rationals(f: Polynomial, domain: Box, count: int = 5, limit: int = 200) -> List[Fraction]:
    """First ``count`` certified rationals from the sequence 2, 1/2, 3, 1/3, ..."""
    found: List[Fraction] = []
    for m in range(2, limit):
        for r in (Fraction(m), Fraction(1, m)):
            if validate_scaling_rationals(f, domain, [r]):
                found.append(r)
                if len(found) == count:
                    return found
    raise HypothesisError(f"found only {len(found)} admissible scaling rationals for {f}")


@dataclass
class ProofChain:
    residuals: Dict[str, object]
    rationals: List[Fraction] = field(default_factory=list)

    @property
    def all_zero(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    def nonzero(self) -> List[str]:
        return [name for name, r in self.residuals.items() if not r.is_zero()]


def check_eq7_proof_chain(spec: OperatorSpec, f: Polynomial, rationals: Optional[Sequence] = None,
                          domain: Optional[Box] = None, min_rationals: int = 5) -> ProofChain:
    """Every algebraic step from the reciprocal identity to the power identity.

    Residual names:

    * ``partial_fractions``: 2/(f^2-1) - [1/(f-1) - 1/(f+1)]
    * ``additivity``: T(2/(f^2-1)) - T(1/(f-1)) + T(1/(f+1))
    * ``eq7[f^2-1]``, ``eq7[f-1]``, ``eq7[f+1]``: the reciprocal identity at each shift
    * ``rearranged``: the combined relation multiplied through by (f^2-1)^3
    * ``key_identity``: (f^2-1)[T(f^2) - 2fT(f) - 2A(f)^2] - 2[A(f^2)^2 - 4f^2 A(f)^2]
    * ``power_defect``, ``chain_rule``: the two bracketed factors separately
    * ``r^4_coefficient``, ``r^2_coefficient``: coefficients of the scaled identity as a polynomial in r
    * ``scaled[r]``: the key identity with f replaced by r*f, for each admissible r

    With ``domain`` the scaling rationals are certified (or auto-generated when
    ``rationals`` is None) by interval bounds; without it ``rationals``
    defaults to 2, 3, 4, 5, 7 and is used as an identity-level check only.
    """
    if f.is_constant():
        raise ValueError("the proof chain needs a nonconstant f")
    N = f.nvars
    one = Polynomial.one(N)
    if domain is not None:
        if rationals is None:
            H = auto_scaling_rationals(f, domain, min_rationals)
        else:
            H = validate_scaling_rationals(f, domain, rationals)
            rejected = [str(Fraction(r)) for r in rationals if Fraction(r) not in H]
            if rejected:
                raise HypothesisError(f"(r f)^2 = 1 cannot be excluded on the domain for r in {rejected}")
    else:
        H = [Fraction(r) for r in (rationals if rationals is not None else (2, 3, 4, 5, 7))]
    if len(set(H)) < min_rationals:
        raise HypothesisError(f"need at least {min_rationals} distinct scaling rationals, have {len(set(H))}")

    T = lambda u: T_apply(spec, u)
    A = lambda u: A_apply(spec, u)
    f2m1, fm1, fp1 = f * f - one, f - one, f + one
    R = RationalFunction
    res: Dict[str, object] = {}

    res["partial_fractions"] = R(one * 2, f2m1) - (R(one, fm1) - R(one, fp1))
    res["additivity"] = T(R(one * 2, f2m1)) - T(R(one, fm1)) + T(R(one, fp1))
    for name, u in (("eq7[f^2-1]", f2m1), ("eq7[f-1]", fm1), ("eq7[f+1]", fp1)):
        res[name] = eq7_residual(spec, R(u))

    Tf, Af, Tf2, Af2 = T(f), A(f), T(f * f), A(f * f)
    res["rearranged"] = (Tf2 * f2m1 * -2 + Af2 * Af2 * 4) - (f * f2m1 * Tf * -4 + (f * f * 12 + 4) * Af * Af)
    power_defect = Tf2 - f * Tf * 2 - Af * Af * 2
    square_defect = Af2 * Af2 - f * f * Af * Af * 4
    res["key_identity"] = f2m1 * power_defect - square_defect * 2
    res["power_defect"] = power_defect
    res["chain_rule"] = Af2 - f * Af * 2
    # (r^2 f^2 - 1) X(rf) - 2 Y(rf) = r^4 (f^2 X - 2Y) - r^2 X
    res["r^4_coefficient"] = f * f * power_defect - square_defect * 2
    res["r^2_coefficient"] = -power_defect
    for r in H:
        rf = f * r
        X = T(rf * rf) - rf * T(rf) * 2 - A(rf) * A(rf) * 2
        Y = A(rf * rf) * A(rf * rf) - rf * rf * A(rf) * A(rf) * 4
        res[f"scaled[{r}]"] = (rf * rf - one) * X - Y * 2
    return ProofChain(res, list(H))


# -- compactly supported piecewise polynomials --------------------------------

@dataclass(frozen=True)
class PiecewisePolynomial:
    """Polynomials on closed axis-aligned boxes, zero outside their union."""

    dim: int
    pieces: Tuple[Tuple[Tuple[Tuple[Fraction, Fraction], ...], Polynomial], ...]
    k: int = 0

    def piece_at(self, x: Point) -> Optional[Polynomial]:
        for box, p in self.pieces:
            if all(lo <= v <= hi for v, (lo, hi) in zip(x, box)):
                return p
        return None

    def evaluate(self, x: Point) -> Fraction:
        p = self.piece_at(x)
        return Fraction(0) if p is None else p.evaluate(x)

    __call__ = evaluate

    def map_pieces(self, fn) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.dim, tuple((box, fn(p)) for box, p in self.pieces), self.k)

    def times(self, q: Polynomial) -> "PiecewisePolynomial":
        return self.map_pieces(lambda p: p * q)

    def support(self):
        lows = [min(box[i][0] for box, _ in self.pieces) for i in range(self.dim)]
        highs = [max(box[i][1] for box, _ in self.pieces) for i in range(self.dim)]
        return lows, highs


def make_bump(center: Point, radius, k: int) -> PiecewisePolynomial:
    """``prod_i beta((t_i - center_i)/radius)`` with ``beta(u) = (1 - u^2)^(k+1)`` on [-1, 1]."""
    radius = Fraction(radius)
    if radius <= 0:
        raise GeometryError("radius must be positive")
    center = [Fraction(v) for v in center]
    N = len(center)
    poly = Polynomial.one(N)
    for i, ci in enumerate(center):
        u = (Polynomial.var(N, i) - ci) * (1 / radius)
        poly = poly * (Polynomial.one(N) - u * u) ** (k + 1)
    box = tuple((ci - radius, ci + radius) for ci in center)
    return PiecewisePolynomial(N, ((box, poly),), k)


def _derivative(p: Polynomial, alpha: Sequence[int]) -> Polynomial:
    for i, a in enumerate(alpha):
        for _ in range(a):
            p = p.diff(i)
    return p


def check_regularity(pw: PiecewisePolynomial, grid: int = 3):
    """One-sided derivatives of order <= k agree across every piece face.

    Samples ``grid`` interior points per face coordinate.  Returns
    ``(True, None)`` or ``(False, witness)``.
    """
    multi = [alpha for alpha in itertools.product(range(pw.k + 1), repeat=pw.dim) if sum(alpha) <= pw.k]
    for idx, (box, p) in enumerate(pw.pieces):
        widths = [hi - lo for lo, hi in box]
        eps = min(widths) / 1000
        for axis in range(pw.dim):
            for side in (0, 1):
                others = [[lo + (hi - lo) * Fraction(j, grid + 1) for j in range(1, grid + 1)]
                          for d, (lo, hi) in enumerate(box) if d != axis]
                for combo in itertools.product(*others):
                    pt = list(combo)
                    pt.insert(axis, box[axis][side])
                    across = list(pt)
                    across[axis] += eps if side else -eps
                    neighbour = None
                    for jdx, (nbox, q) in enumerate(pw.pieces):
                        if jdx != idx and all(lo <= v <= hi for v, (lo, hi) in zip(across, nbox)):
                            neighbour = q
                            break
                    for alpha in multi:
                        inside = _derivative(p, alpha).evaluate(pt)
                        outside = Fraction(0) if neighbour is None else _derivative(neighbour, alpha).evaluate(pt)
                        if inside != outside:
                            return False, {"piece": idx, "point": [str(v) for v in pt],
                                           "derivative": list(alpha), "inside": str(inside),
                                           "outside": str(outside)}
    return True, None


# -- non-degeneracy certificates ------------------------------------------------

@dataclass
class DerivativeCertificate:
    ok: bool
    point: List[Fraction]
    axis: Optional[int] = None
    vectors: List[Tuple[Fraction, Fraction]] = field(default_factory=list)
    determinant: Fraction = Fraction(0)
    functions: List[PiecewisePolynomial] = field(default_factory=list)


def _first_nonzero_axis(spec: OperatorSpec, x: Point) -> Optional[int]:
    for j, cj in enumerate(spec.c):
        if cj.evaluate(x) != 0:
            return j
    return None


def _check_support(x: Point, radius: Fraction, domain: Optional[Box]):
    if domain is None:
        return
    if domain.dim != len(x):
        raise GeometryError("point and domain dimensions differ")
    if not domain.contains_point(x):
        raise GeometryError("point is not inside the domain")
    if not domain.contains_closed_cube(x, radius):
        raise GeometryError("bump support leaves the domain; shrink the radius")


def check_nondegenerate(spec: OperatorSpec, x: Point, radius=Fraction(1, 2),
                        domain: Optional[Box] = None) -> DerivativeCertificate:
    """Two bump-supported functions whose (value, A-value) vectors are independent at ``x``.

    ``g1`` is a bump centred at ``x`` and ``g2 = (t_j - x_j) g1`` for an axis
    with ``c_j(x) != 0``.  Fails exactly when ``c(x) = 0``.
    """
    x = [Fraction(v) for v in x]
    radius = Fraction(radius)
    _check_support(x, radius, domain)
    j = _first_nonzero_axis(spec, x)
    if j is None:
        return DerivativeCertificate(False, x)
    g1 = make_bump(x, radius, max(spec.k, 0))
    g2 = g1.times(Polynomial.var(spec.N, j) - x[j])
    vectors = [(g.evaluate(x), A_apply(spec, g).evaluate(x)) for g in (g1, g2)]
    det = vectors[0][0] * vectors[1][1] - vectors[0][1] * vectors[1][0]
    return DerivativeCertificate(det != 0, x, j, vectors, det, [g1, g2])


def depends_on_derivative(spec: OperatorSpec, x: Point, radius=Fraction(1, 2),
                          domain: Optional[Box] = None) -> DerivativeCertificate:
    """``f1 = 0`` and ``f2 = (t_j - x_j) * bump`` agree at ``x`` while ``A`` separates them."""
    x = [Fraction(v) for v in x]
    radius = Fraction(radius)
    _check_support(x, radius, domain)
    j = _first_nonzero_axis(spec, x)
    if j is None:
        return DerivativeCertificate(False, x)
    f1 = PiecewisePolynomial(spec.N, (), max(spec.k, 0))
    f2 = make_bump(x, radius, max(spec.k, 0)).times(Polynomial.var(spec.N, j) - x[j])
    vectors = [(f.evaluate(x), A_apply(spec, f).evaluate(x)) for f in (f1, f2)]
    ok = vectors[0][0] == vectors[1][0] and vectors[0][1] != vectors[1][1]
    return DerivativeCertificate(ok, x, j, vectors, vectors[1][1] - vectors[0][1], [f1, f2])
