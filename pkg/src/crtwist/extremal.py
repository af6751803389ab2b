"""Extremality verification and the solvable families of separable metrics.

A metric g with weight function f and rational parameter nu is extremal in
the weighted sense when Scal_{f,nu}(g) is a Killing potential, which for
the separable kinds handled here means: an affine function of the momenta.
verify decides this exactly from the symbolic curvature and reports the
affine coefficients.

The constructive side inverts that test.  solve_endpoint_1d produces the
profile polynomials matching prescribed boundary values and slopes;
solve_product_quintic produces the degree m+2 profile of a Calabi type
metric over a constant scalar curvature base, where the base curvature s_B
forces the coefficient of f^2 in the weight-power expansion of the
profile; generate_family builds the catalogued extremal families and
checks them on construction.  classify_twisted_product recognises, for
m >= 3, which twisted products of 1-D profiles are extremal, by the
support of the twisting weight and the shape of the profiles alone.

The ambitoric helpers split a pair (A, B) of quartics into A = p1 p2 + P,
B = p1 p2 - P with harmonically paired quadratics p1, p2, and produce the
quadratic w with Scal((f_q/f_p)^2 g+) = -f_w/f_q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import BadParameters
from .geom import (
    Orthotoric,
    Profile1D,
    TwistedProduct,
    WeightFunction,
    is_affine_in_momenta,
    kind_of,
    weight_vector,
    weighted_scal,
)
from .poly import (
    PaperQuadratic,
    Polynomial,
    PositivityVerdict,
    poisson_bracket,
    poly_gcd,
    positive_on_open_interval,
    quadratic_pairing,
    rat,
    solve_square,
    transvectant2,
)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremalVerdict:
    """Outcome of a weighted extremality test.

    status is "Extremal" with the exact affine coefficients c (constant
    term first, then one coefficient per momentum) when Scal_{f,nu}(g) is
    an affine function of the metric's momenta, and "NotExtremal" with a
    monomial witness otherwise.  weight_used records the weight after the
    kind's normalization, nu the rational curvature parameter.
    """

    status: str
    weight_used: WeightFunction
    nu: Fraction
    c: Optional[tuple] = None
    witness: Optional[str] = None

    @property
    def is_extremal(self) -> bool:
        return self.status == "Extremal"

    def __bool__(self) -> bool:
        return self.is_extremal


def _coerce_weight(metric, f):
    """Raw coefficient tuples become the natural form for the kind."""
    if isinstance(f, (tuple, list)):
        if kind_of(metric) in ("Profile1D", "CalabiBundle1D",
                               "TwistedProduct"):
            return WeightFunction.product_affine(f)
        return WeightFunction.polarized(f)
    return f


def verify(metric, f, nu) -> ExtremalVerdict:
    """Decide whether Scal_{f,nu}(metric) is affine in the momenta.

    The decision is exact: the symbolic curvature is computed as a
    rational expression and membership in the affine span of the momenta
    is settled by rational linear algebra.  Positivity of the weight is
    not sampled here; the verdict is about the algebraic identity, and
    weights like sigma_m change sign on any box around the origin without
    affecting it.  Structural errors (wrong nu for the kind, incompatible
    weight shape) propagate from the curvature routine.
    """
    nu = rat(nu)
    f = _coerce_weight(metric, f)
    expr = weighted_scal(metric, f, nu, check_positive=False)
    av = is_affine_in_momenta(expr, metric)
    used = weight_vector(metric, f)
    if av.affine:
        return ExtremalVerdict("Extremal", used, nu, c=av.coeffs)
    return ExtremalVerdict("NotExtremal", used, nu, witness=av.witness)


# ---------------------------------------------------------------------------
# endpoint solves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EndpointFamily:
    """Affine family of endpoint-matching profiles.

    Every member is particular + sum t_k basis[k]; the basis polynomials
    vanish to second order at both endpoints, so the whole family matches
    the same boundary values and slopes.
    """

    particular: Polynomial
    basis: tuple

    @property
    def dimension(self) -> int:
        return len(self.basis)


def solve_endpoint_1d(interval, values, slopes, degree: int):
    """Profiles of degree <= degree with prescribed endpoint data.

    The four conditions A(lo) = values[0], A(hi) = values[1],
    A'(lo) = slopes[0], A'(hi) = slopes[1] always have full rank for
    lo < hi and degree >= 3, so the solution space is an affine family of
    dimension degree - 3.  At degree 3 the unique Polynomial is returned;
    for higher degree an EndpointFamily whose particular member is the
    degree <= 3 Hermite solution and whose homogeneous basis is
    (z - lo)^2 (z - hi)^2 z^k for k = 0..degree-4.

    Example: on [-1, 1] with values (0, 0) and slopes (2, -2) the unique
    cubic solution is 1 - z^2.
    """
    lo, hi = rat(interval[0]), rat(interval[1])
    if lo >= hi:
        raise BadParameters("need lo < hi")
    if degree < 3:
        raise BadParameters("endpoint data needs degree at least 3")
    data = [rat(values[0]), rat(values[1]), rat(slopes[0]), rat(slopes[1])]
    # rows over monomial coefficients a_0..a_3 of the cubic part; the
    # higher coefficients are carried by the explicit homogeneous basis.
    rows = [
        [lo ** k for k in range(4)],
        [hi ** k for k in range(4)],
        [k * lo ** (k - 1) if k else Fraction(0) for k in range(4)],
        [k * hi ** (k - 1) if k else Fraction(0) for k in range(4)],
    ]
    sol = solve_square(rows, data)
    particular = Polynomial.of(sol, "z")
    if degree == 3:
        return particular
    stem = Polynomial.of([-lo, 1], "z") ** 2 * Polynomial.of([-hi, 1], "z") ** 2
    basis = tuple(stem * Polynomial.of([Fraction(0)] * k + [Fraction(1)], "z")
                  for k in range(degree - 3))
    return EndpointFamily(particular, basis)


# ---------------------------------------------------------------------------
# the Calabi type product profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuinticProfile:
    """Profile of a Calabi type metric over a CSC base, with positivity.

    A is the degree m+2 profile in the momentum z of the distinguished
    leg; positivity reports whether A > 0 on the open interval (-1, 1),
    with isolating root intervals when it is not.
    """

    A: Polynomial
    positivity: PositivityVerdict


def _weight_powers(b0: Fraction, top: int) -> list:
    """1, f, f^2, .., f^top for the affine weight f = b0 + z."""
    f = Polynomial.of([b0, 1], "z")
    out = [Polynomial.of([Fraction(1)], "z")]
    for _ in range(top):
        out.append(out[-1] * f)
    return out


def solve_product_quintic(m: int, s_B, b0, values=(0, 0),
                          slopes=(4, -4)) -> QuinticProfile:
    """Degree m+2 profile extremal for the affine weight f = b0 + z.

    Over a base of constant scalar curvature s_B, the profile of the
    distinguished leg must have the form

        A = p0 f^{m+2} + p1 f^{m+1} + (s_B / (m(m-1))) f^2 + p3 f + p4,

    because f^{m+2} and f^{m+1} span the kernel of the weighted
    curvature operator and the f^2 coefficient is exactly what cancels
    the s_B source term.  The four endpoint conditions A(-1), A(1),
    A'(-1), A'(1) (defaults: boundary zeros with slopes 4 and -4)
    determine p0, p1, p3, p4 by an exact linear solve; a degenerate
    system is reported as SingularSystem, never regularized.  Requires
    |b0| > 1 so the weight has no zero in [-1, 1], and m >= 2 so the
    s_B coefficient is finite.
    """
    m = int(m)
    if m < 2:
        raise BadParameters("the product profile needs m >= 2")
    s_B, b0 = rat(s_B), rat(b0)
    if b0 * b0 <= 1:
        raise BadParameters("need |b0| > 1 so the weight avoids [-1, 1]")
    powers = _weight_powers(b0, m + 2)
    forced = powers[2] * (s_B / (m * (m - 1)))
    basis = [powers[m + 2], powers[m + 1], powers[1], powers[0]]
    lo, hi = Fraction(-1), Fraction(1)
    rows = []
    rhs = []
    for point, val in ((lo, rat(values[0])), (hi, rat(values[1]))):
        rows.append([p(point) for p in basis])
        rhs.append(val - forced(point))
    for point, slope in ((lo, rat(slopes[0])), (hi, rat(slopes[1]))):
        rows.append([p.derivative()(point) for p in basis])
        rhs.append(slope - forced.derivative()(point))
    sol = solve_square(rows, rhs)
    A = forced
    for coef, p in zip(sol, basis):
        A = A + p * coef
    return QuinticProfile(A, positive_on_open_interval(A, lo, hi))


# ---------------------------------------------------------------------------
# catalogued families
# ---------------------------------------------------------------------------


FAMILY_KINDS = ("Cubic1D", "OrthotoricQ1", "OrthotoricQXm",
                "BochnerFlatCommonP", "ProductQuintic")


@dataclass(frozen=True, eq=False)
class SolutionFamily:
    """A named extremal family instance: kind, leg count, parameters.

    build() materialises the metric through generate_family, so every
    instance that constructs successfully is extremal under the family's
    designated weight.
    """

    kind: str
    m: int
    parameters: dict

    def build(self):
        return generate_family(self.kind, self.m, self.parameters)

    def designated_weight(self):
        return family_weight(self.kind, self.m, self.parameters)


def _as_poly(value, var: str, what: str) -> Polynomial:
    if isinstance(value, Polynomial):
        return value.with_var(var)
    try:
        return Polynomial.of([rat(c) for c in value], var)
    except (TypeError, ValueError) as exc:
        raise BadParameters(f"{what} must be a polynomial or coefficient "
                            f"list") from exc


def _slot_constants(parameters: dict, key: str, m: int) -> list:
    vals = parameters.get(key)
    if vals is None:
        raise BadParameters(f"family needs per-slot constants '{key}'")
    vals = [rat(v) for v in vals]
    if len(vals) != m:
        raise BadParameters(f"'{key}' needs exactly {m} entries")
    return vals


def family_weight(kind: str, m: int, parameters: dict):
    """(weight argument, nu) under which the family is extremal.

    For Cubic1D and BochnerFlatCommonP one representative of the whole
    designated class is returned (any affine weight, any polarized q
    respectively).
    """
    if kind == "Cubic1D":
        return WeightFunction.product_affine((2, 1)), Fraction(3)
    if kind == "OrthotoricQ1":
        vec = [Fraction(1)] + [Fraction(0)] * m
        return WeightFunction.polarized(vec), Fraction(m + 2)
    if kind == "OrthotoricQXm":
        vec = [Fraction(0)] * m + [Fraction(1)]
        return WeightFunction.polarized(vec), Fraction(m + 2)
    if kind == "BochnerFlatCommonP":
        vec = [Fraction(1)] * (m + 1)
        return WeightFunction.polarized(vec), Fraction(m + 2)
    if kind == "ProductQuintic":
        b0 = rat(parameters.get("b0"))
        vec = [b0, Fraction(1)] + [Fraction(0)] * (m - 1)
        return WeightFunction.product_affine(vec), Fraction(m + 2)
    raise BadParameters(f"unknown family kind '{kind}'")


def generate_family(kind: str, m: int, parameters: dict):
    """Build a catalogued extremal metric and verify it on construction.

    Kinds and their data (all profile degrees are checked):

    * Cubic1D: a 1-D profile "A" of degree <= 3 on "interval" (default
      (-1, 1)); extremal for every affine weight at nu = 3.
    * OrthotoricQ1: orthotoric legs A_j = P + p1[j] x + p0[j], deg P <=
      m+2; extremal for the constant polarized weight at nu = m+2.
    * OrthotoricQXm: legs A_j = P + p1[j] x^{m+1} + p0[j] x^{m+2};
      extremal for the top elementary symmetric weight at nu = m+2.
    * BochnerFlatCommonP: all legs equal to P, deg P <= m+2; extremal
      for every polarized weight at nu = m+2.
    * ProductQuintic: distinguished first leg from solve_product_quintic
      over m-1 quadratic "legs" (the base curvature s_B is read off
      them), twisting weight trivial; extremal for the affine weight
      b0 + z_1 at nu = m+2.

    The returned metric has been passed through verify with the
    designated weight; a failure (only possible with out-of-family
    parameters) raises BadParameters rather than returning a metric that
    does not do what the family promises.
    """
    m = int(m)
    if kind not in FAMILY_KINDS:
        raise BadParameters(f"unknown family kind '{kind}'")
    if kind == "Cubic1D":
        A = _as_poly(parameters.get("A", [1, 0, -1]), "z", "profile A")
        if A.degree() > 3:
            raise BadParameters("Cubic1D needs deg A <= 3")
        interval = parameters.get("interval", (Fraction(-1), Fraction(1)))
        metric = Profile1D((rat(interval[0]), rat(interval[1])), A)
    elif kind == "ProductQuintic":
        if m < 2:
            raise BadParameters("ProductQuintic needs m >= 2")
        legs_in = parameters.get("legs")
        if legs_in is None or len(legs_in) != m - 1:
            raise BadParameters("ProductQuintic needs m-1 quadratic legs")
        legs = [_as_poly(p, "x", "leg profile") for p in legs_in]
        for p in legs:
            if p.degree() > 2:
                raise BadParameters("base legs must be quadratics")
        s_B = -sum((2 * p.coeff(2) for p in legs), Fraction(0))
        sol = solve_product_quintic(
            m, s_B, parameters.get("b0"),
            values=parameters.get("values", (0, 0)),
            slopes=parameters.get("slopes", (4, -4)),
        )
        first = sol.A.with_var("x")
        b = WeightFunction.product_affine(
            [Fraction(1)] + [Fraction(0)] * m)
        metric = TwistedProduct(m, tuple([first] + legs), b)
    else:
        if m < 2:
            raise BadParameters("orthotoric families need m >= 2")
        P = _as_poly(parameters.get("P"), "x", "common profile P")
        if P.degree() > m + 2:
            raise BadParameters("need deg P <= m + 2")
        if kind == "BochnerFlatCommonP":
            legs = [P] * m
        else:
            p0 = _slot_constants(parameters, "p0", m)
            p1 = _slot_constants(parameters, "p1", m)
            if kind == "OrthotoricQ1":
                legs = [P + Polynomial.of([p0[j], p1[j]], "x")
                        for j in range(m)]
            else:
                legs = [P
                        + Polynomial.of([Fraction(0)] * (m + 1) + [p1[j]], "x")
                        + Polynomial.of([Fraction(0)] * (m + 2) + [p0[j]], "x")
                        for j in range(m)]
        metric = Orthotoric(m, tuple(legs))

    checks = [family_weight(kind, m, parameters)]
    if kind == "Cubic1D":
        checks.append((WeightFunction.product_affine((1, 0)), Fraction(3)))
    if kind == "BochnerFlatCommonP":
        checks.append((WeightFunction.polarized(
            [Fraction(1)] + [Fraction(0)] * m), Fraction(m + 2)))
        checks.append((WeightFunction.polarized(
            [Fraction(0)] * m + [Fraction(1)]), Fraction(m + 2)))
    for w, nu in checks:
        verdict = verify(metric, w, nu)
        if not verdict.is_extremal:
            raise BadParameters(
                f"{kind} parameters leave the family: curvature term "
                f"{verdict.witness} is not affine"
            )
    return metric


# ---------------------------------------------------------------------------
# classification of extremal twisted products
# ---------------------------------------------------------------------------


def _expand_in_weight(A: Polynomial, f: Polynomial) -> list:
    """Coefficients gamma_k with A = sum_k gamma_k f^k, deg f = 1."""
    out = []
    rem = A
    while not rem.is_zero:
        out.append((rem % f).coeff(0))
        rem = rem // f
    return out


def classify_twisted_product(metric) -> Optional[str]:
    """Which extremal family a twisted product of 1-D profiles belongs to.

    The decision is purely structural, from the support of the twisting
    weight b and the profile shapes; the scalar curvature of the metric
    is an affine function of its momenta exactly when the verdict is not
    None.  For m >= 3 the possibilities are:

    * b constant: every profile of degree <= 3; a product of extremal
      surfaces ("ProductOfExtremalSurfaces").
    * exactly one slope b_j nonzero: the other profiles quadratic (a CSC
      base) and A_j in the Calabi family of solve_product_quintic for
      the weight f = b_0 + b_j x, whose f^2 coefficient is pinned to
      s_B / (b_j^2 m (m-1)) by the base curvature s_B
      ("CalabiOverCSCProduct").
    * two or more slopes nonzero: affine profiles on the support, and
      quadratic profiles with second derivatives summing to zero off it;
      a scalar-flat product times a flat product
      ("ScalarFlatTimesFlat").

    Anything else returns None.
    """
    if kind_of(metric) != "TwistedProduct":
        raise BadParameters("classification applies to twisted products")
    m = metric.m
    if m < 3:
        raise BadParameters("classification needs m >= 3")
    b = metric.b.coeffs
    degs = [p.degree() for p in metric.A]
    support = [j for j in range(m) if b[j + 1] != 0]

    if not support:
        if all(d <= 3 for d in degs):
            return "ProductOfExtremalSurfaces"
        return None

    if len(support) == 1:
        j = support[0]
        if any(degs[i] > 2 for i in range(m) if i != j):
            return None
        if degs[j] > m + 2:
            return None
        s_B = -sum((2 * metric.A[i].coeff(2) for i in range(m) if i != j),
                   Fraction(0))
        f = Polynomial.of([b[0], b[j + 1]], metric.A[j].var)
        gamma = _expand_in_weight(metric.A[j], f)
        gamma += [Fraction(0)] * (m + 3 - len(gamma))
        if any(gamma[k] != 0 for k in range(3, m + 1)):
            return None
        if gamma[2] != s_B / (b[j + 1] ** 2 * m * (m - 1)):
            return None
        return "CalabiOverCSCProduct"

    off = [i for i in range(m) if i not in support]
    if any(degs[j] > 1 for j in support):
        return None
    if any(degs[i] > 2 for i in off):
        return None
    if sum((2 * metric.A[i].coeff(2) for i in off), Fraction(0)) != 0:
        return None
    return "ScalarFlatTimesFlat"


# ---------------------------------------------------------------------------
# ambitoric decomposition and conformal scalar curvature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AmbitoricDecomposition:
    """Split of quartics (A, B) into A = p1 p2 + P, B = p1 p2 - P.

    P = (A - B)/2 is always well defined; p1, p2 are the harmonically
    paired quadratics factoring (A + B)/2 when they exist, and None with
    kind "NotExtremalFamily" when no conjugate-closed root pairing of
    (A + B)/2 has vanishing harmonic pairing.  The pair carries the
    reciprocal scaling freedom (lambda p1, p2/lambda).
    """

    P: Polynomial
    p1: Optional[PaperQuadratic] = None
    p2: Optional[PaperQuadratic] = None

    @property
    def kind(self) -> str:
        return "Decomposed" if self.p1 is not None else "NotExtremalFamily"

    def __bool__(self) -> bool:
        return self.p1 is not None


def _roots_with_multiplicity(S: Polynomial):
    """Numeric roots of S paired with exact multiplicities.

    Every distinct root is located on the squarefree part, where it is
    simple and numerically well conditioned; multiplicities come from
    recursing on gcd(S, S'), whose roots are the repeated ones with
    multiplicity lowered by one.
    """
    if S.degree() <= 0:
        return []
    g = poly_gcd(S, S.derivative())
    sf = S // g if g.degree() > 0 else S
    coeffs = [float(c) for c in reversed(sf.coeffs)]
    simple = list(np.roots(coeffs))
    if g.degree() == 0:
        return [(r, 1) for r in simple]
    deeper = _roots_with_multiplicity(g)
    out = []
    for r in simple:
        mult = 1
        for s, k in deeper:
            if abs(s - r) <= 1e-6 * (1 + abs(r)):
                mult += k
                break
        out.append((r, mult))
    return out


def _projective_roots(S: Polynomial):
    """Finite roots (complex, multiplicity-expanded, sorted) plus the
    count of roots at infinity of S read as a binary quartic."""
    d = S.degree()
    finite = [r for r, k in _roots_with_multiplicity(S) for _ in range(k)]
    if len(finite) != d:  # multiplicity matching misfired; use plain roots
        coeffs = [float(c) for c in reversed(S.coeffs)]
        finite = list(np.roots(coeffs)) if d > 0 else []
    finite.sort(key=lambda r: (r.real, r.imag))
    return finite, 4 - d


def _rationalize(root, S: Polynomial):
    """Exact rational value of a numeric root of S, or None.

    Small denominators are tried first and every candidate is confirmed
    against S exactly, so approximate input cannot smuggle in a wrong
    rational.
    """
    if abs(root.imag) > 1e-7 * (1 + abs(root)):
        return None
    for bound in (1, 12, 10 ** 3, 10 ** 6):
        cand = Fraction(root.real).limit_denominator(bound)
        if S(cand) == 0:
            return cand
    return None


def _group_polynomial(roots, n_inf, exact):
    """Monic polynomial with the given finite roots, degree 2 - n_inf.

    In exact mode roots are Fractions; otherwise a real quadratic is
    assembled from a conjugate pair or two real roots.
    """
    if n_inf == 2:
        return Polynomial.of([1], "x") if exact else [1.0]
    if exact:
        out = Polynomial.of([1], "x")
        for r in roots:
            out = out * Polynomial.of([-r, 1], "x")
        return out
    if n_inf == 1:
        return [-roots[0].real, 1.0]
    r, s = roots
    return [(r * s).real, -(r + s).real, 1.0]


def _conjugate_closed(roots) -> bool:
    vals = [complex(r) for r in roots]
    for r in vals:
        if abs(r.imag) < 1e-12 * max(1.0, abs(r)):
            continue
        if not any(abs(s - r.conjugate()) < 1e-7 * max(1.0, abs(r))
                   for s in vals):
            return False
    return True


def _float_quadratic(coeffs) -> PaperQuadratic:
    padded = list(coeffs) + [0.0] * (3 - len(coeffs))
    return PaperQuadratic(Fraction(padded[0]), Fraction(padded[1]) / 2,
                          Fraction(padded[2]))


def ambitoric_decompose(A: Polynomial, B: Polynomial) -> AmbitoricDecomposition:
    """Recover the harmonic quadratic pair behind an ambitoric (A, B).

    S = (A + B)/2 must factor as p1 p2 with <p1, p2> = 0, the quadratics
    read projectively (a linear factor has one root at infinity, a
    constant two).  Candidate pairs come from the conjugate-closed ways
    of grouping the four projective roots of S two and two; a grouping
    is accepted when the reassembled product matches S and the pairing
    vanishes, exactly when every finite root is rational and to a 1e-9
    relative tolerance otherwise.  The deterministic enumeration order
    makes repeated calls reproducible.
    """
    if A.degree() > 4 or B.degree() > 4:
        raise BadParameters("ambitoric profiles have degree <= 4")
    B = B.with_var(A.var)
    half = Fraction(1, 2)
    P = (A - B) * half
    S = (A + B) * half
    if S.is_zero:
        return AmbitoricDecomposition(P)
    finite, n_inf = _projective_roots(S.with_var("x"))
    rational = [_rationalize(r, S.with_var("x")) for r in finite]
    exact = all(r is not None for r in rational)
    slots = [("fin", i) for i in range(len(finite))] + [("inf", None)] * n_inf
    lead = S.leading()
    scale = max(1.0, max(abs(float(c)) for c in list(S.coeffs) + [1]))

    seen = set()
    for k in range(1, 4):
        group1 = (slots[0], slots[k])
        group2 = tuple(slots[i] for i in range(1, 4) if i != k)
        key = tuple(sorted([group1, group2]))
        if key in seen:
            continue
        seen.add(key)
        for ga, gb in ((group1, group2), ):
            fin_a = [i for tag, i in ga if tag == "fin"]
            fin_b = [i for tag, i in gb if tag == "fin"]
            inf_a = sum(1 for tag, _ in ga if tag == "inf")
            inf_b = sum(1 for tag, _ in gb if tag == "inf")
            if not _conjugate_closed([finite[i] for i in fin_a]):
                continue
            if not _conjugate_closed([finite[i] for i in fin_b]):
                continue
            if exact:
                g1 = _group_polynomial([rational[i] for i in fin_a], inf_a,
                                       True)
                g2 = _group_polynomial([rational[i] for i in fin_b], inf_b,
                                       True)
                p1 = g1 * lead
                if p1 * g2 != S.with_var("x"):
                    continue
                q1 = PaperQuadratic.from_polynomial(p1)
                q2 = PaperQuadratic.from_polynomial(g2)
                if quadratic_pairing(q1, q2) != 0:
                    continue
                return AmbitoricDecomposition(P, q1, q2)
            c1 = _group_polynomial([finite[i] for i in fin_a], inf_a, False)
            c2 = _group_polynomial([finite[i] for i in fin_b], inf_b, False)
            c1 = [float(lead) * c for c in c1]
            prod = np.polymul(list(reversed(c1)), list(reversed(c2)))
            want = [float(S.coeff(i)) for i in range(S.degree(), -1, -1)]
            want = np.array(want)
            if len(prod) != len(want) or \
                    np.max(np.abs(prod - want)) > 1e-9 * scale:
                continue
            q1 = _float_quadratic(c1)
            q2 = _float_quadratic(c2)
            pairing = float(quadratic_pairing(q1, q2))
            if abs(pairing) > 1e-9 * scale * scale:
                continue
            return AmbitoricDecomposition(P, q1, q2)
    return AmbitoricDecomposition(P)


@dataclass(frozen=True)
class ConformalScalVariants:
    """The quadratic w of Scal((f_q/f_p)^2 g+) = -f_w/f_q, both ways.

    alternate carries the classical second transvectant route
    p P'' - 3 p' P' + 6 p'' P, which always yields a quadratic and is
    the variant the finite-difference curvature probes confirm.
    verbatim carries p P'' - 3 p' P + 6 p'' P; its bracket generically
    has degree > 2, reported as None since no quadratic w exists then.
    """

    alternate: PaperQuadratic
    verbatim: Optional[PaperQuadratic]

    @property
    def selected(self) -> PaperQuadratic:
        return self.alternate


def ambitoric_conformal_scal(p: PaperQuadratic, q: PaperQuadratic,
                             P: Polynomial) -> ConformalScalVariants:
    """The scalar curvature quadratic of the conformal quotient metric.

    For an ambitoric pair built on A = p1 p2 + P, B = p1 p2 - P, the
    metric (f_q/f_p)^2 g+ has scalar curvature -f_w/f_q with
    w = {T, p} = T' p - T p', T the second transvectant of p with P.
    Both transvectant variants are returned; w does not involve q, which
    only enters the quotient formula the caller evaluates.  With p
    constant both variants agree and w = P'''.
    """
    pp = p.to_polynomial("x")
    Pq = P.with_var("x")
    if Pq.degree() > 4:
        raise BadParameters("the transvectant needs deg P <= 4")
    out = {}
    for variant in ("alternate", "verbatim"):
        T = transvectant2(pp, Pq, variant)
        w = poisson_bracket(T, pp)
        if w.degree() > 2:
            out[variant] = None
        else:
            out[variant] = PaperQuadratic.from_polynomial(w)
    if out["alternate"] is None:
        raise BadParameters("degenerate transvectant input")
    return ConformalScalVariants(out["alternate"], out["verbatim"])
