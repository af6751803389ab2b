"""Exact rational polynomial arithmetic and classical pairings.

This module is the exact-arithmetic substrate for the rest of the package:

* univariate polynomials with Fraction coefficients (dense, ascending),
* quadratics stored in the half-coefficient convention
  q(x) = q0 + 2 q1 x + q2 x^2, together with the harmonic pairing,
  Poisson bracket and second transvectant used by the ambitoric formulas,
* projective (Mobius) transforms of polynomials of bounded degree,
* Sturm-sequence positivity certificates on open intervals,
* multivariate polynomials and rational functions over Fraction, which are
  the value type of all symbolic curvature computations,
* exact Gaussian elimination, used both for solving small square systems
  and for deciding membership of a polynomial in the span of a basis.

Everything here is immutable and exact; floats only ever appear when the
caller evaluates at a float point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    BadParameters,
    DegeneratePoint,
    Inconsistent,
    SingularMap,
    SingularSystem,
    ZeroPolynomial,
)

Rational = Fraction
Scalar = Union[int, Fraction]


def rat(x) -> Fraction:
    """Coerce an int, string ("3/4"), or Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        raise BadParameters(
            "refusing to coerce a float to an exact rational; "
            "pass a Fraction or a string like '3/4'"
        )
    raise BadParameters(f"cannot interpret {x!r} as a rational number")


def rat_str(x: Fraction) -> str:
    """Render a Fraction as 'p' or 'p/q' for JSON output."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# univariate polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Dense univariate polynomial with exact rational coefficients.

    coeffs[k] is the coefficient of var**k; the tuple carries no trailing
    zeros, and the zero polynomial is the empty tuple (degree -1).
    """

    coeffs: tuple
    var: str = "z"

    def __post_init__(self):
        cs = [rat(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- constructors -------------------------------------------------------

    @staticmethod
    def of(coeffs: Iterable, var: str = "z") -> "Polynomial":
        return Polynomial(tuple(rat(c) for c in coeffs), var)

    @staticmethod
    def constant(c, var: str = "z") -> "Polynomial":
        return Polynomial((rat(c),), var)

    @staticmethod
    def zero(var: str = "z") -> "Polynomial":
        return Polynomial((), var)

    @staticmethod
    def x(var: str = "z") -> "Polynomial":
        return Polynomial((Fraction(0), Fraction(1)), var)

    # -- basic queries ------------------------------------------------------

    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> Fraction:
        if self.is_zero:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def _join_var(self, other: "Polynomial") -> str:
        if self.var == other.var:
            return self.var
        if self.degree() <= 0:
            return other.var
        if other.degree() <= 0:
            return self.var
        raise BadParameters(
            f"incompatible variables {self.var!r} and {other.var!r}"
        )

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.var)
        var = self._join_var(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(
            tuple(self.coeff(k) + other.coeff(k) for k in range(n)), var
        )

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(tuple(-c for c in self.coeffs), self.var)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial(
                tuple(rat(other) * c for c in self.coeffs), self.var
            )
        var = self._join_var(other)
        if self.is_zero or other.is_zero:
            return Polynomial.zero(var)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Polynomial(tuple(out), var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise BadParameters("negative polynomial power")
        out = Polynomial.constant(1, self.var)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __divmod__(self, other: "Polynomial"):
        var = self._join_var(other)
        if other.is_zero:
            raise ZeroPolynomial("division by the zero polynomial")
        q = [Fraction(0)] * max(len(self.coeffs) - len(other.coeffs) + 1, 1)
        rem = list(self.coeffs)
        d, lead = other.degree(), other.leading()
        while len(rem) - 1 >= d and any(rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < d:
                break
            k = len(rem) - 1 - d
            f = rem[-1] / lead
            q[k] = f
            for i in range(d + 1):
                rem[k + i] -= f * other.coeffs[i]
            rem.pop()
        return Polynomial(tuple(q), var), Polynomial(tuple(rem), var)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # -- calculus and evaluation -------------------------------------------

    def derivative(self) -> "Polynomial":
        return Polynomial(
            tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1),
            self.var,
        )

    def __call__(self, x):
        out = 0 * x if not isinstance(x, (int, Fraction)) else Fraction(0)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def compose(self, inner: "Polynomial") -> "Polynomial":
        out = Polynomial.zero(inner.var)
        for c in reversed(self.coeffs):
            out = out * inner + Polynomial.constant(c, inner.var)
        return out

    def with_var(self, var: str) -> "Polynomial":
        return Polynomial(self.coeffs, var)

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coeffs."""
        if self.is_zero:
            return Fraction(1)
        from math import gcd

        num = 0
        den = 1
        for c in self.coeffs:
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "Polynomial":
        c = self.content()
        if self.leading() < 0:
            c = -c
        return Polynomial(tuple(a / c for a in self.coeffs), self.var)


def arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    """Dispatcher over the basic polynomial operations.

    op is one of add, mul, derive, compose; derive ignores q.
    """
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "derive":
        return p.derivative()
    if op == "compose":
        return p.compose(q)
    raise BadParameters(f"unknown op {op!r}")


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic greatest common divisor by the Euclidean algorithm."""
    a, b = p, q
    while not b.is_zero:
        r = a % b
        a, b = b, (r.primitive() if not r.is_zero else r)
    if a.is_zero:
        return a
    return a * (1 / a.leading())


def squarefree_part(p: Polynomial) -> Polynomial:
    """p divided by gcd(p, p'): same roots, all simple."""
    if p.is_zero:
        raise ZeroPolynomial("squarefree part of the zero polynomial")
    g = poly_gcd(p, p.derivative())
    if g.degree() <= 0:
        return p
    return p // g


# ---------------------------------------------------------------------------
# Mobius transforms
# ---------------------------------------------------------------------------


def mobius_transform(P: Polynomial, map4: Sequence, weight: int) -> Polynomial:
    """Projective transform of a polynomial of degree at most `weight`.

    With map4 = (alpha, beta, gamma, delta), returns the polynomial

        Q(z) = (gamma z + delta)^weight * P((alpha z + beta)/(gamma z + delta)),

    which has degree at most `weight` again.  This is how the profile
    polynomials of degree <= d transform under a projective change of the
    momentum coordinate: they transform "as d-ics", with the weight soaking
    up the denominator.
    """
    a, b, c, d = (rat(t) for t in map4)
    if a * d - b * c == 0:
        raise SingularMap("mobius map has zero determinant")
    if P.degree() > weight:
        raise BadParameters(
            f"degree {P.degree()} exceeds the transform weight {weight}"
        )
    num = Polynomial.of([b, a], P.var)  # alpha z + beta, ascending
    den = Polynomial.of([d, c], P.var)
    out = Polynomial.zero(P.var)
    for k, ck in enumerate(P.coeffs):
        if ck:
            out = out + ck * (num ** k) * (den ** (weight - k))
    return out


# ---------------------------------------------------------------------------
# positivity certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositivityVerdict:
    """Outcome of an open-interval positivity test.

    positive is True when the polynomial is strictly positive on the whole
    open interval (roots exactly at the endpoints are allowed and ignored).
    Otherwise root_intervals holds one exact isolating rational interval
    [lo, hi] per distinct real root inside the open interval; a degenerate
    pair lo == hi pins a root found exactly.  A polynomial that is negative
    throughout the interval has no roots to report and yields an empty
    tuple with positive=False.
    """

    positive: bool
    root_intervals: tuple = ()

    @property
    def kind(self) -> str:
        return "Positive" if self.positive else "HasRootAt"

    def __bool__(self) -> bool:
        return self.positive


def sturm_chain(p: Polynomial):
    """Canonical Sturm sequence p, p', -rem(...), ...

    Chain elements are rescaled only by positive constants, since the sign
    pattern at each evaluation point is what the root count reads off.
    """
    chain = [p, p.derivative()]
    while not chain[-1].is_zero and chain[-1].degree() > 0:
        r = chain[-2] % chain[-1]
        if r.is_zero:
            break
        nr = -r
        chain.append(nr * (1 / nr.content()))
    return [c for c in chain if not c.is_zero]


def _variations(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = p(x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_open(p: Polynomial, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots of p in the open interval (lo, hi).

    Requires p(lo) != 0 and p(hi) != 0; p need not be squarefree (the
    count is of distinct roots).
    """
    if p(lo) == 0 or p(hi) == 0:
        raise BadParameters("count_roots_open requires nonvanishing endpoints")
    chain = sturm_chain(squarefree_part(p))
    return _variations(chain, lo) - _variations(chain, hi)


def _refine_simple_root(q, lo, hi, width):
    """Shrink [lo, hi] around the single simple root of q inside it."""
    slo = q(lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = q(mid)
        if v == 0:
            return (mid, mid)
        if (slo > 0) != (v > 0):
            hi = mid
        else:
            lo, slo = mid, v
    return (lo, hi)


def isolate_roots(p: Polynomial, lo, hi, width=Fraction(1, 2 ** 24)):
    """Exact isolating intervals for the distinct roots of p in (lo, hi).

    Endpoints must not be roots.  Each returned [a, b] contains exactly one
    distinct root; a == b when the root was hit exactly during bisection.
    """
    lo, hi = rat(lo), rat(hi)
    q = squarefree_part(p)
    out = []
    stack = [(lo, hi, count_roots_open(q, lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        mid = (a + b) / 2
        if q(mid) == 0:
            out.append((mid, mid))
            q2 = q // Polynomial.of([-mid, 1], q.var)
            while q2(mid) == 0:
                q2 = q2 // Polynomial.of([-mid, 1], q.var)
            stack.append((a, mid, count_roots_open(q2, a, mid)))
            stack.append((mid, b, count_roots_open(q2, mid, b)))
            continue
        if k == 1:
            chain = sturm_chain(q)
            va, vm, vb = (_variations(chain, t) for t in (a, mid, b))
            if va - vm == 1:
                out.append(_refine_simple_root(q, a, mid, width))
            else:
                out.append(_refine_simple_root(q, mid, b, width))
            continue
        chain = sturm_chain(q)
        ka = _variations(chain, a) - _variations(chain, mid)
        stack.append((a, mid, ka))
        stack.append((mid, b, k - ka))
    return tuple(sorted(out))


def positive_on_open_interval(P: Polynomial, lo, hi) -> PositivityVerdict:
    """Decide strict positivity of P on the open interval (lo, hi).

    Roots exactly at the endpoints are divided out first, so a profile with
    the boundary behaviour A(lo) = A(hi) = 0 can still be "positive on the
    open interval".  The decision is exact, by a Sturm sequence; when P is
    not positive the verdict carries isolating rational intervals for every
    distinct root strictly inside.
    """
    lo, hi = rat(lo), rat(hi)
    if lo >= hi:
        raise BadParameters("need lo < hi")
    if P.is_zero:
        raise ZeroPolynomial("positivity of the zero polynomial is undefined")
    Q = P
    root = Polynomial.of([-lo, 1], P.var)  # z - lo, positive on (lo, hi)
    while not Q.is_zero and Q(lo) == 0:
        Q = Q // root
    while not Q.is_zero and Q(hi) == 0:
        # divide by hi - z, which is positive on (lo, hi), so the interior
        # sign of the quotient matches the original polynomial
        Q = -(Q // Polynomial.of([-hi, 1], P.var))
    if Q.degree() <= 0:
        return PositivityVerdict(Q.coeff(0) > 0)
    n = count_roots_open(Q, lo, hi)
    if n == 0:
        mid = (lo + hi) / 2
        return PositivityVerdict(Q(mid) > 0)
    return PositivityVerdict(False, isolate_roots(Q, lo, hi))


# ---------------------------------------------------------------------------
# paper quadratics: pairing, bracket, transvectant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PaperQuadratic:
    """Quadratic stored as q(x) = q0 + 2 q1 x + q2 x^2.

    The half coefficient on the middle term matches the polarization
    f_q = q0 + q1 (x1 + x2) + q2 x1 x2 used throughout the ambitoric
    formulas: restricting f_q to the diagonal x1 = x2 = x gives q(x).
    """

    q0: Fraction
    q1: Fraction
    q2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q0", rat(self.q0))
        object.__setattr__(self, "q1", rat(self.q1))
        object.__setattr__(self, "q2", rat(self.q2))

    @staticmethod
    def of(q0, q1, q2) -> "PaperQuadratic":
        return PaperQuadratic(rat(q0), rat(q1), rat(q2))

    @staticmethod
    def from_polynomial(p: Polynomial) -> "PaperQuadratic":
        if p.degree() > 2:
            raise BadParameters(
                f"degree {p.degree()} polynomial is not a quadratic"
            )
        return PaperQuadratic(p.coeff(0), p.coeff(1) / 2, p.coeff(2))

    def to_polynomial(self, var: str = "x") -> Polynomial:
        return Polynomial.of([self.q0, 2 * self.q1, self.q2], var)

    def __call__(self, x):
        return self.q0 + 2 * self.q1 * x + self.q2 * x * x

    def polarized(self, x1, x2):
        """f_q(x1, x2) = q0 + q1 (x1 + x2) + q2 x1 x2."""
        return self.q0 + self.q1 * (x1 + x2) + self.q2 * x1 * x2

    def scale(self, c) -> "PaperQuadratic":
        c = rat(c)
        return PaperQuadratic(c * self.q0, c * self.q1, c * self.q2)

    @property
    def is_zero(self) -> bool:
        return self.q0 == 0 and self.q1 == 0 and self.q2 == 0

    def vector(self):
        return (self.q0, self.q1, self.q2)


def quadratic_pairing(p: PaperQuadratic, q: PaperQuadratic) -> Fraction:
    """Harmonic pairing of two quadratics: p0 q2 - 2 p1 q1 + p2 q0.

    Vanishing of the pairing says exactly that the root pairs of p and q
    harmonically separate each other (cross ratio -1).  For example the
    roots {-1, 1} of x^2 - 1 and {0, infinity} of x are harmonic, and the
    pairing of (-1, 0, 1) with (0, 1/2, 0) is 0; pairing x with itself
    gives -2 (1/2)^2 = -1/2, nonzero, as a double root separates nothing.
    """
    return p.q0 * q.q2 - 2 * p.q1 * q.q1 + p.q2 * q.q0


def poisson_bracket(p: Polynomial, r: Polynomial) -> Polynomial:
    """{p, r} = p' r - p r'.

    On quadratics this is (twice) the sl2 bracket: the bracket of two
    quadratics is again a quadratic, because the cubic terms cancel.
    """
    return p.derivative() * r - p * r.derivative()


def transvectant2(p: Polynomial, P: Polynomial, variant: str) -> Polynomial:
    """Second transvectant of a quadratic p with a quartic P, two variants.

    variant="verbatim" computes p P'' - 3 p' P + 6 p'' P, which is the
    expression as printed in the source formula; generically it has degree
    5, so it is not an honest transvectant.  variant="alternate" computes
    p P'' - 3 p' P' + 6 p'' P, the classical second transvectant, which
    always has degree <= 2 when deg p <= 2, deg P <= 4.  Both are exposed;
    the conformal-scalar acceptance check decides which one reproduces the
    ambitoric scalar curvature, and the answer is the alternate form.
    """
    if variant == "verbatim":
        return p * P.derivative().derivative() - 3 * p.derivative() * P \
            + 6 * p.derivative().derivative() * P
    if variant == "alternate":
        return p * P.derivative().derivative() \
            - 3 * p.derivative() * P.derivative() \
            + 6 * p.derivative().derivative() * P
    raise BadParameters("variant must be 'verbatim' or 'alternate'")


# ---------------------------------------------------------------------------
# multivariate polynomials
# ---------------------------------------------------------------------------


def _canon_terms(d: dict) -> tuple:
    return tuple(sorted((e, c) for e, c in d.items() if c != 0))


@dataclass(frozen=True)
class MultiPoly:
    """Sparse multivariate polynomial over Fraction.

    terms is a sorted tuple of (exponent-tuple, coefficient) pairs; the
    number of variables is fixed at construction.
    """

    nvars: int
    terms: tuple

    @staticmethod
    def from_dict(d: dict, nvars: int) -> "MultiPoly":
        return MultiPoly(nvars, _canon_terms(d))

    @staticmethod
    def constant(c, nvars: int) -> "MultiPoly":
        c = rat(c)
        if c == 0:
            return MultiPoly(nvars, ())
        return MultiPoly(nvars, (((0,) * nvars, c),))

    @staticmethod
    def variable(i: int, nvars: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return MultiPoly(nvars, ((tuple(e), Fraction(1)),))

    @staticmethod
    def from_univariate(p: Polynomial, i: int, nvars: int) -> "MultiPoly":
        d = {}
        for k, c in enumerate(p.coeffs):
            if c:
                e = [0] * nvars
                e[i] = k
                d[tuple(e)] = c
        return MultiPoly.from_dict(d, nvars)

    # -- queries ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(x == 0 for x in e) for e, _ in self.terms)

    def constant_value(self) -> Fraction:
        for e, c in self.terms:
            if any(e):
                raise BadParameters("not a constant polynomial")
        return self.terms[0][1] if self.terms else Fraction(0)

    def total_degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e, _ in self.terms), default=-1)

    def as_dict(self) -> dict:
        return dict(self.terms)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise BadParameters("variable count mismatch")
            return other
        return MultiPoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        d = dict(self.terms)
        for e, c in other.terms:
            d[e] = d.get(e, Fraction(0)) + c
        return MultiPoly.from_dict(d, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = rat(other)
            if c == 0:
                return MultiPoly(self.nvars, ())
            return MultiPoly(
                self.nvars, tuple((e, c * a) for e, a in self.terms)
            )
        other = self._coerce(other)
        d = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, Fraction(0)) + c1 * c2
        return MultiPoly.from_dict(d, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise BadParameters("negative power of a polynomial")
        out = MultiPoly.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- calculus and evaluation -------------------------------------------

    def derivative(self, i: int) -> "MultiPoly":
        d = {}
        for e, c in self.terms:
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                e2 = tuple(e2)
                d[e2] = d.get(e2, Fraction(0)) + c * e[i]
        return MultiPoly.from_dict(d, self.nvars)

    def evaluate(self, point: Sequence):
        if len(point) != self.nvars:
            raise BadParameters("point has the wrong number of coordinates")
        out = None
        for e, c in self.terms:
            term = c if all(k == 0 for k in e) else c * _monomial(point, e)
            out = term if out is None else out + term
        if out is None:
            return Fraction(0) if _all_exact(point) else 0.0
        return out

    def coeff_of(self, i: int, k: int) -> "MultiPoly":
        """Coefficient of x_i^k, as a polynomial in the remaining variables
        (returned with the same variable count, x_i-degree zero)."""
        d = {}
        for e, c in self.terms:
            if e[i] == k:
                e2 = list(e)
                e2[i] = 0
                d[tuple(e2)] = c
        return MultiPoly.from_dict(d, self.nvars)

    def substitute(self, values: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute a MultiPoly for each variable (all same nvars)."""
        nv = values[0].nvars
        out = MultiPoly.constant(0, nv)
        for e, c in self.terms:
            term = MultiPoly.constant(c, nv)
            for i, k in enumerate(e):
                if k:
                    term = term * (values[i] ** k)
            out = out + term
        return out


def _monomial(point, exps):
    out = None
    for x, k in zip(point, exps):
        if k:
            p = x ** k
            out = p if out is None else out * p
    return out if out is not None else 1


def _all_exact(point) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in point)


def elementary_symmetric(r: int, nvars: int) -> MultiPoly:
    """sigma_r(x_1, ..., x_m): the r-th elementary symmetric polynomial."""
    from itertools import combinations

    if r == 0:
        return MultiPoly.constant(1, nvars)
    d = {}
    for idx in combinations(range(nvars), r):
        e = [0] * nvars
        for i in idx:
            e[i] = 1
        d[tuple(e)] = Fraction(1)
    return MultiPoly.from_dict(d, nvars)


# ---------------------------------------------------------------------------
# multivariate rational functions
# ---------------------------------------------------------------------------


def _monomial_content(terms):
    mins = None
    for e, _ in terms:
        mins = e if mins is None else tuple(min(a, b) for a, b in zip(mins, e))
    return mins


@dataclass(frozen=True)
class RationalExpr:
    """Quotient of two multivariate polynomials over Fraction.

    Normalization cancels the numeric content and any common monomial
    factor, and fixes the sign of the denominator's leading canonical
    term.  Full multivariate gcd cancellation is deliberately not
    performed; equality is decided by cross multiplication, which is exact
    regardless of common factors.
    """

    num: MultiPoly
    den: MultiPoly

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero:
            raise ZeroPolynomial("zero denominator in a rational expression")
        if num.nvars != den.nvars:
            raise BadParameters("variable count mismatch")
        if num.is_zero:
            object.__setattr__(self, "den", MultiPoly.constant(1, den.nvars))
            return
        shift_n = _monomial_content(num.terms)
        shift_d = _monomial_content(den.terms)
        shift = tuple(min(a, b) for a, b in zip(shift_n, shift_d))
        if any(shift):
            num = MultiPoly(num.nvars, tuple(
                (tuple(a - s for a, s in zip(e, shift)), c)
                for e, c in num.terms))
            den = MultiPoly(den.nvars, tuple(
                (tuple(a - s for a, s in zip(e, shift)), c)
                for e, c in den.terms))
        scale = den.terms[-1][1]
        if scale != 1:
            num = num * (1 / scale)
            den = den * (1 / scale)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_poly(p: MultiPoly) -> "RationalExpr":
        return RationalExpr(p, MultiPoly.constant(1, p.nvars))

    @staticmethod
    def constant(c, nvars: int) -> "RationalExpr":
        return RationalExpr.from_poly(MultiPoly.constant(c, nvars))

    # -- algebra ------------------------------------------------------------

    def _coerce(self, other) -> "RationalExpr":
        if isinstance(other, RationalExpr):
            return other
        if isinstance(other, MultiPoly):
            return RationalExpr.from_poly(other)
        return RationalExpr.constant(other, self.num.nvars)

    def __add__(self, other):
        o = self._coerce(other)
        return RationalExpr(self.num * o.den + o.num * self.den,
                            self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.num.is_zero:
            raise ZeroPolynomial("division by zero rational expression")
        return RationalExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalExpr(self.den ** (-n), self.num ** (-n))
        return RationalExpr(self.num ** n, self.den ** n)

    def derivative(self, i: int) -> "RationalExpr":
        return RationalExpr(
            self.num.derivative(i) * self.den
            - self.num * self.den.derivative(i),
            self.den * self.den,
        )

    def equals(self, other) -> bool:
        o = self._coerce(other)
        return (self.num * o.den - o.num * self.den).is_zero

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def evaluate(self, point: Sequence):
        den = self.den.evaluate(point)
        if den == 0:
            raise DegeneratePoint("denominator vanishes at the probe point")
        return self.num.evaluate(point) / den

    def as_poly(self) -> Optional[MultiPoly]:
        """Return the numerator if the denominator is the constant 1."""
        if self.den.is_constant():
            c = self.den.constant_value()
            return self.num * (1 / c)
        return None


# ---------------------------------------------------------------------------
# exact linear algebra
# ---------------------------------------------------------------------------


def exact_row_reduce(rows, rhs):
    """Gaussian elimination with full row handling over Fraction.

    Returns (solution, pivots) where solution assigns 0 to free columns.
    Raises Inconsistent when the augmented system has no solution.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    A = [[rat(x) for x in row] + [rat(b)] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if A[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        lead = A[r][c]
        A[r] = [x / lead for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if A[i][n] != 0:
            raise Inconsistent("linear system has no solution")
    sol = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        sol[c] = A[i][n]
    return sol, pivots


def solve_square(rows, rhs):
    """Solve a square full-rank system exactly; SingularSystem otherwise."""
    n = len(rows)
    try:
        sol, pivots = exact_row_reduce(rows, rhs)
    except Inconsistent as exc:
        raise SingularSystem(str(exc)) from exc
    if len(pivots) != n:
        raise SingularSystem("matrix is singular")
    return sol


def express_in_span(target: MultiPoly, basis: Sequence[MultiPoly]):
    """Write target as a rational combination of basis polynomials.

    Returns the coefficient list, or None when target is not in the span.
    """
    monomials = set()
    for p in list(basis) + [target]:
        monomials.update(e for e, _ in p.terms)
    monomials = sorted(monomials)
    index = {e: i for i, e in enumerate(monomials)}
    rows = [[Fraction(0)] * len(basis) for _ in monomials]
    for j, p in enumerate(basis):
        for e, c in p.terms:
            rows[index[e]][j] = c
    rhs = [Fraction(0)] * len(monomials)
    for e, c in target.terms:
        rhs[index[e]] = c
    try:
        sol, _ = exact_row_reduce(rows, rhs)
    except Inconsistent:
        return None
    return sol


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def polynomial_to_json(p: Polynomial) -> dict:
    return {"var": p.var, "coeffs": [rat_str(c) for c in p.coeffs]}


def polynomial_from_json(obj: dict) -> Polynomial:
    from .errors import SchemaError

    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise SchemaError("polynomial JSON needs a 'coeffs' field")
    var = obj.get("var", "z")
    try:
        coeffs = [Fraction(str(c)) for c in obj["coeffs"]]
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational coefficient: {exc}") from exc
    return Polynomial.of(coeffs, var)
