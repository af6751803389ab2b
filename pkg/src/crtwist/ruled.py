"""Existence of extremal structures over ruled surfaces, decided exactly.

A circle bundle over a ruled surface carries a distinguished family of
candidate profiles A(z) = P_{a,b}(z)/(z+a), where the quartic P_{a,b} is
pinned by boundary data and the parameters a (the Kahler class), b (the
Killing potential offset) and s = 2(1-genus)/ell.  Existence of the
corresponding extremal structure is equivalent to P_{a,b} > 0 on the open
momentum interval (-1, 1), a condition this module decides by exact Sturm
counts.

The same data arises as a join: for coprime (k, n) the bundle matches a
product of the base with a weighted projective line of weights
w_+ = n, w_- = n - k ell, and the bundle profile transported to the
product chart must satisfy the weighted boundary conditions
A~(+-1) = 0, A~'(+-1) = -+ 4 w_(-+)/k and reproduce the degree m+2
product family exactly.  join_correspondence_check performs that exact
round trip; critical_scan walks an a-grid along the critical curve
a = (1 + b^2)/(2b) looking for the unstable window that exists for every
base of genus at least two.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    BadParameters,
    BadRatio,
    Inconsistent,
    Mismatch,
    NotCoprime,
    SingularC,
)
from .extremal import solve_product_quintic
from .geom import CalabiBundle1D
from .poly import (
    Polynomial,
    count_roots_open,
    poly_gcd,
    positive_on_open_interval,
    rat,
)
from .twist import untwist_calabi


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuledSurfaceSpec:
    """Ruled-surface data: genus of the base, degree ell of the twisting
    line bundle, Kahler class parameter a > 1, potential offset |b| > 1.

    Derived quantities: s = 2(1-genus)/ell, the cross ratio
    c = (ab-1)/(a-b) for a != b (always |c| > 1 since
    (ab-1)^2 - (a-b)^2 = (a^2-1)(b^2-1) > 0), and the normalization
    constant kappa, recorded for traceability but never branched on.
    """

    genus: int
    ell: int
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 0:
            raise BadParameters("genus must be a nonnegative integer")
        if int(self.ell) != self.ell or self.ell < 1:
            raise BadParameters("ell must be a positive integer")
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "a", rat(self.a))
        object.__setattr__(self, "b", rat(self.b))
        if self.a <= 1:
            raise BadParameters("need a > 1")
        if self.b * self.b <= 1:
            raise BadParameters("need |b| > 1")

    @property
    def s(self) -> Fraction:
        return Fraction(2 * (1 - self.genus), self.ell)

    @property
    def c(self) -> Fraction:
        if self.a == self.b:
            raise BadParameters("c is undefined for a = b")
        return (self.a * self.b - 1) / (self.a - self.b)

    @property
    def kappa(self) -> Fraction:
        """Fibre moment integral ell * int_{-1}^{1} (z+b)(z+a) dz
        = 2 ell (ab + 1/3), the (a, b, ell)-dependent factor of the
        potential normalization; homothety and base-volume factors are
        conventional and omitted.
        """
        return 2 * self.ell * (self.a * self.b + Fraction(1, 3))


@dataclass(frozen=True)
class SasakiJoinSpec:
    """Join data: coprime positive integers k, n with n/k > ell.

    The join weights are w_+ = n and w_- = n - k ell > 0, and the
    matching Kahler class parameter is a = 2n/(k ell) - 1.
    """

    k: int
    n: int
    ell: int

    def __post_init__(self):
        for name in ("k", "n", "ell"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise BadParameters(f"{name} must be a positive integer")
            object.__setattr__(self, name, int(v))
        if math.gcd(self.k, self.n) != 1:
            raise NotCoprime(f"gcd({self.k}, {self.n}) != 1")
        if Fraction(self.n, self.k) <= self.ell:
            raise BadRatio("need n/k > ell so that w_- > 0")

    @property
    def w_plus(self) -> int:
        return self.n

    @property
    def w_minus(self) -> int:
        return self.n - self.k * self.ell

    @property
    def a(self) -> Fraction:
        return Fraction(2 * self.n, self.k * self.ell) - 1


@dataclass(frozen=True)
class JoinParameters:
    w_minus: int
    w_plus: int
    a: Fraction


def join_parameters(j: SasakiJoinSpec) -> JoinParameters:
    """The join weights and class parameter (w_-, w_+, a) of a spec.

    Example: (k, n, ell) = (1, 3, 2) gives (1, 3, 2); (2, 5, 1) gives
    (3, 5, 4).  Non-coprime or n/k <= ell data is rejected by the spec
    constructor.
    """
    return JoinParameters(j.w_minus, j.w_plus, j.a)


# ---------------------------------------------------------------------------
# the quartic and its positivity
# ---------------------------------------------------------------------------


def pab_polynomial(spec: RuledSurfaceSpec) -> Polynomial:
    """The boundary-pinned quartic P_{a,b} of a ruled-surface spec.

    For a != b,

        2 P_{a,b}(z) / (1 - z^2) = 2(z + a)
            + (1 - z^2) (3c + a + s) / (3c^2 - 1),

    with s = 2(1-genus)/ell and c = (ab-1)/(a-b); 3c^2 = 1 leaves the
    formula undefined and raises SingularC (unreachable for rational
    a, b in range, but guarded rather than redefined).  The limit a = b
    has an infinite c, killing the correction: P = (1 - z^2)(z + a).
    The result always satisfies P(+-1) = 0 and P'(+-1) = -+ 2(a +- 1)
    exactly, so A = P/(z+a) carries the unit boundary slopes.
    """
    one_minus = Polynomial.of([1, 0, -1], "z")
    base = one_minus * Polynomial.of([spec.a, 1], "z")
    if spec.a == spec.b:
        return base
    c = spec.c
    if 3 * c * c == 1:
        raise SingularC("3c^2 = 1: the quartic formula is undefined")
    correction = (3 * c + spec.a + spec.s) / (3 * c * c - 1)
    return base + one_minus * one_minus * (correction / 2)


def _quotient_min(spec: RuledSurfaceSpec) -> Fraction:
    """Exact minimum over [-1, 1] of Q = 2 P_{a,b} / (1 - z^2).

    Q is affine or quadratic with Q(-1) = 2(a-1) > 0 and
    Q(1) = 2(a+1) > 0, so the sign of the minimum decides positivity of
    P_{a,b} on the open interval, and its size is the stability margin.
    """
    a = spec.a
    candidates = [2 * (a - 1), 2 * (a + 1)]
    if spec.a != spec.b:
        c = spec.c
        if 3 * c * c == 1:
            raise SingularC("3c^2 = 1: the quartic formula is undefined")
        K = (3 * c + a + spec.s) / (3 * c * c - 1)
        # Q(z) = (2a + K) + 2z - K z^2
        if K != 0:
            vertex = 1 / K
            if -1 < vertex < 1:
                candidates.append(2 * a + K + 2 * vertex
                                  - K * vertex * vertex)
    return min(candidates)


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of the positivity decision for P_{a,b}.

    status is "Stable" exactly when the quartic is positive on the open
    interval (-1, 1); "Unstable" carries exact isolating intervals for
    the offending roots.  boundary_checks records the four endpoint
    identities P(-1) = 0, P(1) = 0, P'(-1) = 2(a-1), P'(1) = -2(a+1).
    """

    status: str
    polynomial: Polynomial
    boundary_checks: tuple
    root_intervals: tuple = ()

    def __bool__(self) -> bool:
        return self.status == "Stable"


def decide_existence(spec: RuledSurfaceSpec) -> StabilityVerdict:
    """Decide existence of the extremal structure for a spec, exactly.

    Stable iff P_{a,b} > 0 on (-1, 1), by Sturm counts after dividing
    out the endpoint roots.  Whenever the failure is a double root in
    the open interval, the b-derivative criterion is asserted: a double
    root forces 2cs + 3c^2 + 2ac + 1 != 0 (else the root could not be
    perturbed away in b, contradicting the elimination identity), and a
    violation raises Inconsistent.
    """
    P = pab_polynomial(spec)
    dP = P.derivative()
    boundary = (
        P(Fraction(-1)) == 0,
        P(Fraction(1)) == 0,
        dP(Fraction(-1)) == 2 * (spec.a - 1),
        dP(Fraction(1)) == -2 * (spec.a + 1),
    )
    pos = positive_on_open_interval(P, Fraction(-1), Fraction(1))
    if pos.positive:
        return StabilityVerdict("Stable", P, boundary)
    repeated = poly_gcd(P, dP)
    if repeated.degree() >= 1 \
            and count_roots_open(repeated, Fraction(-1), Fraction(1)) > 0:
        c = spec.c
        if 2 * c * spec.s + 3 * c * c + 2 * spec.a * c + 1 == 0:
            raise Inconsistent(
                "double root with vanishing b-derivative of P_{a,b}"
            )
    return StabilityVerdict("Unstable", P, boundary,
                            tuple(pos.root_intervals))


def calabi_bundle(spec: RuledSurfaceSpec) -> CalabiBundle1D:
    """The candidate metric of a spec as a line-bundle ansatz.

    Base of constant scalar curvature 4(1-genus), fibre coefficient
    ell(z + a), rational profile A = P_{a,b}/(z + a).  For Stable specs
    this metric is extremal for the weight z + b at parameter 4.
    """
    return CalabiBundle1D(
        Fraction(4 * (1 - spec.genus)), 1,
        spec.ell * spec.a, Fraction(spec.ell),
        pab_polynomial(spec), Polynomial.of([spec.a, 1], "z"),
    )


# ---------------------------------------------------------------------------
# critical scan
# ---------------------------------------------------------------------------


BORDERLINE_MARGIN = Fraction(1, 10 ** 8)


@dataclass(frozen=True)
class ScanRow:
    a: Fraction
    b_a: Fraction
    status: str
    leftmost_root: Optional[tuple] = None


@dataclass(frozen=True)
class ScanResult:
    """Rows of (a, b_a, verdict) along the critical curve, plus the
    largest grid value of a with an Unstable verdict (an empirical lower
    bound for the stability threshold), None when none was found."""

    rows: tuple
    largest_unstable_a: Optional[Fraction]


def rationalize_critical_b(a, bound: int = 10 ** 6) -> Fraction:
    """The root b_a = a + sqrt(a^2 - 1) of a = (1 + b^2)/(2b) with
    b > 1, as the best continued-fraction convergent with denominator
    at most bound."""
    a = rat(a)
    if a <= 1:
        raise BadParameters("need a > 1")
    value = float(a) + math.sqrt(float(a * a - 1))
    return Fraction(value).limit_denominator(bound)


def _scan_row(genus: int, ell: int, a, bound: int) -> ScanRow:
    a = rat(a)
    b_a = rationalize_critical_b(a, bound)
    spec = RuledSurfaceSpec(genus, ell, a, b_a)
    margin = _quotient_min(spec)
    if -BORDERLINE_MARGIN <= margin <= BORDERLINE_MARGIN:
        return ScanRow(a, b_a, "Borderline")
    verdict = decide_existence(spec)
    leftmost = verdict.root_intervals[0] if verdict.root_intervals else None
    return ScanRow(a, b_a, verdict.status, leftmost)


def critical_scan(genus: int, ell: int, a_grid: Sequence,
                  threads: int = 1, bound: int = 10 ** 6) -> ScanResult:
    """decide_existence along b = b_a for every a in the grid.

    Genus at least 2 is required (s < 0 is what makes the unstable
    window near a = 1 possible).  Each b_a is rationalized with
    denominator at most `bound`; rows whose exact stability margin is
    within 1e-8 of zero are flagged Borderline rather than decided,
    since the verdict there is an artifact of the rationalization (away
    from the flag, the verdict is independent of the bound).  Rows are
    computed independently and returned in grid order regardless of
    threads.
    """
    if genus < 2:
        raise BadParameters("the critical scan needs genus >= 2")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(
                lambda a: _scan_row(genus, ell, a, bound), a_grid))
    else:
        rows = tuple(_scan_row(genus, ell, a, bound) for a in a_grid)
    unstable = [row.a for row in rows if row.status == "Unstable"]
    return ScanResult(rows, max(unstable) if unstable else None)


# ---------------------------------------------------------------------------
# join correspondence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JoinReport:
    """Exact transport of a ruled profile to the join's product chart.

    twisted_profile is the polynomial A~ on the weighted projective
    line; slopes its endpoint derivatives (A~'(-1), A~'(1)) =
    (4 w_+/k, -4 w_-/k); product_offset the pushed-forward potential
    offset c_{a,b} (None in the degenerate a = b case); quintic_matched
    records that the transported profile equals the degree-4 product
    family solution exactly (None when a = b leaves no finite offset).
    """

    twisted_profile: Polynomial
    weights: tuple
    slopes: tuple
    product_offset: Optional[Fraction]
    quintic_matched: Optional[bool]


def join_correspondence_check(spec: RuledSurfaceSpec,
                              j: SasakiJoinSpec) -> JoinReport:
    """Check that the ruled profile twists onto the join's product data.

    The bundle with profile A = P_{a,b}/(z+a) is untwisted by its own
    fibre weight, which must produce a polynomial profile A~ with
    A~(+-1) = 0 and A~'(+-1) = -+ 4 w_(-+)/k; for a != b the same A~
    must equal, exactly, the product-family profile solved from those
    endpoint conditions with base curvature 4(1-genus) and offset
    c_{a,b}.  Any failing condition raises Mismatch naming it.
    """
    if j.ell != spec.ell:
        raise BadParameters("join and surface disagree on ell")
    if j.a != spec.a:
        raise BadParameters("join parameter a does not match the spec")
    product = untwist_calabi(calabi_bundle(spec))
    num, den = product.A, product.A_den
    if den is not None:
        if den.degree() != 0:
            raise Mismatch("transported profile is not a polynomial")
        num = num * (1 / den.coeff(0))
    profile = num.with_var("z")
    dprofile = profile.derivative()
    lo_slope = 4 * Fraction(j.w_plus, j.k)
    hi_slope = -4 * Fraction(j.w_minus, j.k)
    if profile(Fraction(-1)) != 0:
        raise Mismatch("A~(-1) != 0")
    if profile(Fraction(1)) != 0:
        raise Mismatch("A~(1) != 0")
    if dprofile(Fraction(-1)) != lo_slope:
        raise Mismatch("A~'(-1) != 4 w_+/k")
    if dprofile(Fraction(1)) != hi_slope:
        raise Mismatch("A~'(1) != -4 w_-/k")
    if spec.a == spec.b:
        return JoinReport(profile, (j.w_minus, j.w_plus),
                          (lo_slope, hi_slope), None, None)
    offset = spec.c
    sol = solve_product_quintic(2, Fraction(4 * (1 - spec.genus)), offset,
                                values=(0, 0),
                                slopes=(lo_slope, hi_slope))
    if sol.A.with_var("z") != profile:
        raise Mismatch("transported profile differs from the product "
                       "family solution")
    return JoinReport(profile, (j.w_minus, j.w_plus),
                      (lo_slope, hi_slope), offset, True)
