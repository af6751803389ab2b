"""Separable toric Kahler metrics and their weighted scalar curvature.

Five metric ansatze are modelled, each determined by polynomial profile
data in momentum coordinates:

* Profile1D: g = dz^2/A(z) + A(z) dt^2 on an interval (a Riemann surface).
* TwistedProduct: for an affine weight f_b = b0 + sum b_j x_j,
      g_b = (1/f_b) sum_j [dx_j^2/A_j + A_j alpha_j^2],
  where alpha_i = dtau_i - (b_i/f_b) sum_j x_j dtau_j; constant b gives a
  scaled plain product of Riemann surfaces.  Its momenta are 1/f_b and
  x_j/f_b, so "affine in momenta" means f_c(x)/f_b(x) for a coefficient
  vector c, and that is exactly how ProductAffine weights attached to a
  TwistedProduct are read.
* Orthotoric: g = sum_j [(Delta_j/A_j) dx_j^2
      + (A_j/Delta_j)(sum_r sigma_{r-1}(xhat_j) dt_r)^2],
  with Delta_j = prod_{k != j}(x_j - x_k); momenta are the elementary
  symmetric functions sigma_r(x).
* TwistedOrthotoric: the image of an orthotoric metric under the twist by
  a polarized weight f_q; its momenta are sigma_r/f_q, so Polarized
  weights w attached to it are read as f_w/f_q.
* Ambitoric: the quadratic-parametrized surface pair; with the positive
  sign the metric is the f_q twist of the orthotoric pair (A, -B), which
  is how its weighted curvature is computed.
* CalabiBundle1D: a line-bundle ansatz over a constant-scalar-curvature
  base of complex dimension d,
      g = (a0 + a1 z) g_B + dz^2/A + A theta^2,  dtheta = a1 omega_B.

The weighted scalar curvature of a positive weight f is

    Scal_{f,nu}(g) = f^2 Scal(g) - 2(nu-1) f Lap f - nu(nu-1) |df|^2,

with the geometers' Laplacian (minus divergence of the gradient).  It is
computed along two independent routes wherever both exist: the
three-piece definitional assembly above, and the closed form

    - sum_j (f^{nu+1}/Delta_j) d^2/dx_j^2 (A_j f^{1-nu})

(specialized per ansatz), which collapses to a polynomial in f and nu
because every admissible weight has vanishing pure second derivatives.
Both routes return exact RationalExpr values; the package's tests require
them to agree identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    BadParameters,
    DegeneratePoint,
    IncompatibleWeight,
    NonPositiveWeightSample,
    SchemaError,
    UnsupportedKind,
)
from .oracle import CoordinateMetricField, ScalarField
from .poly import (
    MultiPoly,
    PaperQuadratic,
    Polynomial,
    RationalExpr,
    elementary_symmetric,
    express_in_span,
    polynomial_from_json,
    polynomial_to_json,
    rat,
    rat_str,
)

F = Fraction


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightFunction:
    """An affine-in-momenta weight: coefficient vector in a momenta basis.

    form is "ProductAffine" (coefficients (b0, b1, ..., bm) against the
    product momenta) or "Polarized" (coefficients (q0, ..., qm) against
    the elementary symmetric momenta sigma_0 = 1, sigma_1, ..., sigma_m).
    Which concrete function of x a vector denotes depends on the metric it
    is attached to; see weight_expr.
    """

    form: str
    coeffs: tuple
    m: int

    def __post_init__(self):
        if self.form not in ("ProductAffine", "Polarized"):
            raise BadParameters(f"unknown weight form {self.form!r}")
        object.__setattr__(self, "coeffs", tuple(rat(c) for c in self.coeffs))
        if len(self.coeffs) != self.m + 1:
            raise BadParameters(
                f"weight needs m+1 = {self.m + 1} coefficients, "
                f"got {len(self.coeffs)}"
            )

    @staticmethod
    def product_affine(coeffs: Sequence) -> "WeightFunction":
        coeffs = tuple(coeffs)
        return WeightFunction("ProductAffine", coeffs, len(coeffs) - 1)

    @staticmethod
    def polarized(coeffs: Sequence) -> "WeightFunction":
        coeffs = tuple(coeffs)
        return WeightFunction("Polarized", coeffs, len(coeffs) - 1)

    def linear_poly(self) -> MultiPoly:
        """The polynomial sum of coefficients against the plain basis:
        b0 + sum b_j x_j for ProductAffine, sum q_r sigma_r for Polarized."""
        if self.form == "ProductAffine":
            out = MultiPoly.constant(self.coeffs[0], self.m)
            for j in range(1, self.m + 1):
                out = out + self.coeffs[j] * MultiPoly.variable(j - 1, self.m)
            return out
        out = MultiPoly.constant(0, self.m)
        for r, q in enumerate(self.coeffs):
            if q:
                out = out + q * elementary_symmetric(r, self.m)
        return out


@dataclass(frozen=True)
class AffineChart:
    """A chart on the (m+1)-dimensional space of affine momenta functions:
    the basis element epsilon_index is the normalizer, with pairing 1
    against the chart's coordinate section z."""

    epsilon_index: int
    basis_dim: int

    def __post_init__(self):
        if not (0 <= self.epsilon_index < self.basis_dim):
            raise BadParameters("epsilon index outside the basis")


@dataclass(frozen=True)
class Profile1D:
    interval: tuple
    A: Polynomial

    def __post_init__(self):
        lo, hi = self.interval
        object.__setattr__(self, "interval", (rat(lo), rat(hi)))

    @property
    def m(self) -> int:
        return 1


@dataclass(frozen=True)
class TwistedProduct:
    m: int
    A: tuple
    b: WeightFunction

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        if len(self.A) != self.m:
            raise BadParameters("need one profile polynomial per variable")
        if self.b.form != "ProductAffine" or self.b.m != self.m:
            raise BadParameters("b must be ProductAffine with matching m")

    @property
    def is_plain_product(self) -> bool:
        return all(c == 0 for c in self.b.coeffs[1:])


@dataclass(frozen=True)
class Orthotoric:
    m: int
    A: tuple

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        if len(self.A) != self.m:
            raise BadParameters("need one profile polynomial per variable")


@dataclass(frozen=True)
class TwistedOrthotoric:
    """The image of an Orthotoric metric under a polarized-weight twist."""

    m: int
    A: tuple
    q: WeightFunction

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(self.A))
        if len(self.A) != self.m:
            raise BadParameters("need one profile polynomial per variable")
        if self.q.form != "Polarized" or self.q.m != self.m:
            raise BadParameters("q must be Polarized with matching m")


@dataclass(frozen=True)
class Ambitoric:
    q: PaperQuadratic
    A: Polynomial
    B: Polynomial
    sign: str = "+"

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise BadParameters("sign must be '+' or '-'")
        if self.q.is_zero:
            raise BadParameters("q must be a nonzero quadratic")


@dataclass(frozen=True)
class CalabiBundle1D:
    """Line-bundle ansatz over a CSC base: g = h g_B + dz^2/A + A theta^2
    with h = a0 + a1 z and dtheta = a1 omega_B.

    The profile may be a genuine rational function A = A_num/A_den; the
    curvature formulas hold verbatim in that case, which the ruled-surface
    verification needs.
    """

    base_scal: Fraction
    d: int
    a0: Fraction
    a1: Fraction
    A: Polynomial
    A_den: Optional[Polynomial] = None

    def __post_init__(self):
        object.__setattr__(self, "base_scal", rat(self.base_scal))
        object.__setattr__(self, "a0", rat(self.a0))
        object.__setattr__(self, "a1", rat(self.a1))
        if self.A_den is not None and self.A_den.is_zero:
            raise BadParameters("A_den must be nonzero")

    @property
    def m(self) -> int:
        return 1


SeparableMetric = Union[
    Profile1D, TwistedProduct, Orthotoric, TwistedOrthotoric, Ambitoric,
    CalabiBundle1D,
]

Weight = Union[WeightFunction, int, Fraction]


def kind_of(metric) -> str:
    return type(metric).__name__


# ---------------------------------------------------------------------------
# symbolic building blocks
# ---------------------------------------------------------------------------


def _mvar(i: int, n: int) -> MultiPoly:
    return MultiPoly.variable(i, n)


def _embed(p: Polynomial, i: int, n: int) -> MultiPoly:
    return MultiPoly.from_univariate(p, i, n)


def _delta_j(j: int, m: int) -> MultiPoly:
    """Delta_j = prod_{k != j}(x_j - x_k)."""
    out = MultiPoly.constant(1, m)
    for k in range(m):
        if k != j:
            out = out * (_mvar(j, m) - _mvar(k, m))
    return out


def _sigma_hat(r: int, j: int, m: int) -> MultiPoly:
    """sigma_r of the variables with x_j omitted, as an m-variable poly."""
    from itertools import combinations

    if r == 0:
        return MultiPoly.constant(1, m)
    idxs = [k for k in range(m) if k != j]
    out = MultiPoly.constant(0, m)
    for combo in combinations(idxs, r):
        term = MultiPoly.constant(1, m)
        for k in combo:
            term = term * _mvar(k, m)
        out = out + term
    return out


def _nvars(metric) -> int:
    k = kind_of(metric)
    if k in ("Profile1D", "CalabiBundle1D"):
        return 1
    if k == "Ambitoric":
        return 2
    return metric.m


def _delta_all(m: int) -> MultiPoly:
    out = MultiPoly.constant(1, m)
    for j in range(m):
        for k in range(j + 1, m):
            diff = _mvar(j, m) - _mvar(k, m)
            out = out * diff * diff
    return out


def _delta_complement(j: int, m: int) -> MultiPoly:
    """_delta_all / Delta_j as a polynomial (no rational division).

    Pairs not containing j keep their squared factor; a pair containing j
    contributes a single factor, with one sign flip for every a < j since
    Delta_j carries (x_j - x_a) where the canonical pair order is
    (x_a - x_j)."""
    out = MultiPoly.constant(1, m)
    for a in range(m):
        for b in range(a + 1, m):
            diff = _mvar(a, m) - _mvar(b, m)
            out = out * diff * diff if (a != j and b != j) else out * diff
    if j % 2:
        out = -out
    return out


def _twisted_scal_num(metric) -> MultiPoly:
    """Numerator of Scal(g_b) over the denominator f_b."""
    m = metric.m
    fb = metric.b.linear_poly()
    num = MultiPoly.constant(0, m)
    for j in range(m):
        aj = _embed(metric.A[j], j, m)
        ajp = _embed(metric.A[j].derivative(), j, m)
        ajpp = _embed(metric.A[j].derivative().derivative(), j, m)
        bj = metric.b.coeffs[j + 1]
        num = num + ajpp * fb * fb - 2 * (m + 1) * bj * ajp * fb \
            + (m + 1) * (m + 2) * bj * bj * aj
    return -num


def _calabi_profile_expr(metric: CalabiBundle1D) -> RationalExpr:
    num = _embed(metric.A, 0, 1)
    if metric.A_den is None:
        return RationalExpr.from_poly(num)
    return RationalExpr(num, _embed(metric.A_den, 0, 1))


# ---------------------------------------------------------------------------
# weight resolution
# ---------------------------------------------------------------------------


def weight_vector(metric, f: Weight) -> WeightFunction:
    """Normalize a weight argument to a WeightFunction for this metric.

    A plain positive rational c denotes the constant function c, encoded
    in the metric's own momenta basis: for a TwistedProduct that is
    c * b (since f_b/f_b = 1), for everything else the literal vector.
    """
    k = kind_of(metric)
    if isinstance(f, WeightFunction):
        _check_weight_form(metric, f)
        return f
    c = rat(f)
    if c <= 0:
        raise NonPositiveWeightSample("constant weight must be positive")
    if k in ("Profile1D", "CalabiBundle1D"):
        return WeightFunction.product_affine((c, 0))
    if k == "TwistedProduct":
        return WeightFunction.product_affine(
            tuple(c * b for b in metric.b.coeffs)
        )
    if k == "Orthotoric":
        return WeightFunction.polarized((c,) + (F(0),) * metric.m)
    if k == "TwistedOrthotoric":
        return WeightFunction.polarized(
            tuple(c * q for q in metric.q.coeffs)
        )
    if k == "Ambitoric":
        return WeightFunction.polarized(
            (c * metric.q.q0, c * metric.q.q1, c * metric.q.q2)
        )
    raise UnsupportedKind(k)


def _check_weight_form(metric, f: WeightFunction) -> None:
    k = kind_of(metric)
    n = _nvars(metric)
    if f.m != n:
        raise IncompatibleWeight(
            f"weight has m={f.m}, metric wants m={n}"
        )
    if k in ("Profile1D", "CalabiBundle1D", "TwistedProduct"):
        if f.form != "ProductAffine" and k != "TwistedProduct":
            raise IncompatibleWeight(
                f"{k} takes ProductAffine weights, got {f.form}"
            )
    if k in ("Orthotoric", "TwistedOrthotoric", "Ambitoric"):
        if f.form != "Polarized":
            raise IncompatibleWeight(
                f"{k} takes Polarized weights, got {f.form}"
            )


def weight_expr(metric, f: Weight) -> RationalExpr:
    """The weight as a concrete function of the momentum variables.

    The coefficient vector is read against the metric's own momenta:

    * Profile1D, CalabiBundle1D: literal affine c0 + c1 z.
    * TwistedProduct: f_c(x)/f_b(x) for ProductAffine c (momenta are
      (1, x_j)/f_b); a Polarized vector is read literally (it is affine
      in each variable separately, which the assembly route allows).
    * Orthotoric: literal polarized f_q.
    * TwistedOrthotoric: f_w/f_q (momenta are sigma_r/f_q).
    * Ambitoric q: f_w/f_q with both polarized quadratics.
    """
    fv = weight_vector(metric, f)
    k = kind_of(metric)
    n = _nvars(metric)
    lin = fv.linear_poly()
    if k in ("Profile1D", "CalabiBundle1D", "Orthotoric"):
        return RationalExpr.from_poly(lin)
    if k == "TwistedProduct":
        if fv.form == "Polarized":
            return RationalExpr.from_poly(lin)
        return RationalExpr(lin, metric.b.linear_poly())
    if k == "TwistedOrthotoric":
        return RationalExpr(lin, metric.q.linear_poly())
    if k == "Ambitoric":
        qf = WeightFunction.polarized(metric.q.vector())
        return RationalExpr(lin, qf.linear_poly())
    raise UnsupportedKind(k)


def _sample_positive(metric, f: Weight, domain=None) -> None:
    """17-point low-discrepancy positivity sampling per variable."""
    expr = weight_expr(metric, f)
    box = domain if domain is not None else default_domain(metric)
    n = _nvars(metric)
    golden = 0.6180339887498949
    axes = []
    for i in range(n):
        lo, hi = (float(box[i][0]), float(box[i][1]))
        pts = [lo + ((0.5 + k * golden) % 1.0) * (hi - lo) for k in range(17)]
        axes.append(pts)
    idx = [0] * n
    while True:
        pt = [axes[i][idx[i]] for i in range(n)]
        try:
            val = expr.evaluate(pt)
        except DegeneratePoint:
            val = None
        if val is not None and val <= 0:
            raise NonPositiveWeightSample(
                f"weight is {val} at sample point {pt}"
            )
        i = 0
        while i < n:
            idx[i] += 1
            if idx[i] < 17:
                break
            idx[i] = 0
            i += 1
        if i == n:
            return


def default_domain(metric):
    """The conventional momentum box used for sampling and probing.

    Profile1D uses its own interval.  Product-type metrics use the box
    (-1/2, 1/2)^m.  Ordered ansatze (Orthotoric, TwistedOrthotoric,
    Ambitoric) use unit-separated bands x_j in (m-j-1/4, m-j+1/4) so that
    x_1 > ... > x_m holds with a gap on the whole box.  CalabiBundle1D
    uses z in (-1/2, 1/2).  Callers with different profile data can pass
    their own box wherever a domain parameter is accepted.
    """
    k = kind_of(metric)
    if k == "Profile1D":
        lo, hi = metric.interval
        return [(float(lo), float(hi))]
    if k in ("TwistedProduct",):
        return [(-0.5, 0.5)] * metric.m
    if k in ("Orthotoric", "TwistedOrthotoric"):
        m = metric.m
        return [(m - j - 1.25, m - j - 0.75) for j in range(m)]
    if k == "Ambitoric":
        return [(0.75, 1.25), (-0.25, 0.25)]
    if k == "CalabiBundle1D":
        return [(-0.5, 0.5)]
    raise UnsupportedKind(k)


# ---------------------------------------------------------------------------
# scalar curvature (symbolic)
# ---------------------------------------------------------------------------


def scal(metric) -> RationalExpr:
    """Exact scalar curvature in the momentum variables.

    Profile1D: -A''(z).  TwistedProduct:
    -sum_j f_b^{m+2} (A_j f_b^{-(m+1)})'' expanded; for constant b this is
    b0 * (-sum A_j'').  Orthotoric: -sum A_j''/Delta_j.  CalabiBundle1D:
    s_B/h - h^{-d} (A h^d)''.  TwistedOrthotoric: delivered through the
    weighted curvature of its orthotoric twin.  Ambitoric has no exposed
    symbolic Scal (use weighted_scal with f = 1, or the numeric oracle).
    """
    k = kind_of(metric)
    if k == "Profile1D":
        app = metric.A.derivative().derivative()
        return RationalExpr.from_poly(-_embed(app, 0, 1))
    if k == "TwistedProduct":
        return RationalExpr(_twisted_scal_num(metric),
                            metric.b.linear_poly())
    if k == "Orthotoric":
        m = metric.m
        num = MultiPoly.constant(0, m)
        for j in range(m):
            ajpp = _embed(metric.A[j].derivative().derivative(), j, m)
            num = num + ajpp * _delta_complement(j, m)
        return RationalExpr(-num, _delta_all(m))
    if k == "TwistedOrthotoric":
        twin = Orthotoric(metric.m, metric.A)
        top = weighted_scal(twin, metric.q, metric.m + 2)
        return top / RationalExpr.from_poly(metric.q.linear_poly())
    if k == "CalabiBundle1D":
        h = MultiPoly.constant(metric.a0, 1) \
            + metric.a1 * MultiPoly.variable(0, 1)
        hexpr = RationalExpr.from_poly(h)
        aexpr = _calabi_profile_expr(metric)
        hd = RationalExpr.from_poly(h ** metric.d)
        second = (aexpr * hd).derivative(0).derivative(0)
        return RationalExpr.constant(metric.base_scal, 1) / hexpr \
            - second / hd
    if k == "Ambitoric":
        raise UnsupportedKind(
            "Ambitoric scalar curvature is delivered via weighted_scal "
            "with f = 1 (and pointwise by the oracle)"
        )
    raise UnsupportedKind(k)


def _laplacian_sym(metric, Fx: RationalExpr) -> RationalExpr:
    """Geometers' Laplacian of a symbolic momentum function (1-D kinds)."""
    k = kind_of(metric)
    if k == "Profile1D":
        a = _embed(metric.A, 0, 1)
        return -(RationalExpr.from_poly(a) * Fx.derivative(0)).derivative(0)
    if k == "CalabiBundle1D":
        h = MultiPoly.constant(metric.a0, 1) \
            + metric.a1 * MultiPoly.variable(0, 1)
        hd = RationalExpr.from_poly(h ** metric.d)
        aexpr = _calabi_profile_expr(metric)
        return -(hd * aexpr * Fx.derivative(0)).derivative(0) / hd
    raise UnsupportedKind(f"no generic symbolic Laplacian for {k}")


def _grad_norm_sym(metric, Fx: RationalExpr) -> RationalExpr:
    """|dF|^2_g for a symbolic momentum function (1-D kinds)."""
    k = kind_of(metric)
    if k == "Profile1D" or k == "CalabiBundle1D":
        a = _calabi_profile_expr(metric) if k == "CalabiBundle1D" \
            else RationalExpr.from_poly(_embed(metric.A, 0, 1))
        d = Fx.derivative(0)
        return a * d * d
    raise UnsupportedKind(f"no generic symbolic gradient norm for {k}")


def _twisted_assembly(metric: TwistedProduct, fv: WeightFunction,
                      nu: Fraction) -> RationalExpr:
    """Three-piece assembly for TwistedProduct over a shared denominator.

    With F = f_c/f_b the pieces reduce (using u_j = c_j f_b - f_c b_j,
    whose x_j-derivative vanishes) to
        Scal = sn/f_b,
        Lap F = -sum_j u_j (A_j' f_b - (m+2) A_j b_j) / f_b^2,
        |dF|^2 = sum_j A_j u_j^2 / f_b^3,
    so the assembly is a single rational expression over f_b^3.  A
    Polarized weight is a literal multilinear polynomial p, for which
        Lap p = -sum_j [f_b (A_j p_j)_{,j} - m b_j A_j p_j],
        |dp|^2 = f_b sum_j A_j p_j^2
    are polynomial and the assembly sits over f_b.
    """
    m = metric.m
    fb = metric.b.linear_poly()
    sn = _twisted_scal_num(metric)
    if fv.form == "ProductAffine":
        fc = fv.linear_poly()
        lnum = MultiPoly.constant(0, m)
        gnum = MultiPoly.constant(0, m)
        for j in range(m):
            aj = _embed(metric.A[j], j, m)
            ajp = _embed(metric.A[j].derivative(), j, m)
            bj = metric.b.coeffs[j + 1]
            cj = fv.coeffs[j + 1]
            u = cj * fb - bj * fc
            lnum = lnum + u * (ajp * fb - (m + 2) * bj * aj)
            gnum = gnum + aj * u * u
        lnum = -lnum
        num = fc * fc * sn - 2 * (nu - 1) * fc * lnum \
            - nu * (nu - 1) * gnum
        return RationalExpr(num, fb ** 3)
    p = fv.linear_poly()
    lap = MultiPoly.constant(0, m)
    gn = MultiPoly.constant(0, m)
    for j in range(m):
        aj = _embed(metric.A[j], j, m)
        bj = metric.b.coeffs[j + 1]
        pj = p.derivative(j)
        lap = lap + fb * (aj * pj).derivative(j) - m * bj * aj * pj
        gn = gn + aj * pj * pj
    lap = -lap
    num = p * p * sn - 2 * (nu - 1) * p * lap * fb \
        - nu * (nu - 1) * fb * gn * fb
    return RationalExpr(num, fb)


def _orthotoric_assembly(metric: Orthotoric, fv: WeightFunction,
                         nu: Fraction) -> RationalExpr:
    """Three-piece assembly for Orthotoric over the shared denominator
    D = prod_{a<b}(x_a - x_b)^2, using the polynomial complements
    D/Delta_j."""
    m = metric.m
    p = fv.linear_poly()
    sn = MultiPoly.constant(0, m)
    ln = MultiPoly.constant(0, m)
    gn = MultiPoly.constant(0, m)
    for j in range(m):
        comp = _delta_complement(j, m)
        aj = _embed(metric.A[j], j, m)
        ajpp = _embed(metric.A[j].derivative().derivative(), j, m)
        pj = p.derivative(j)
        sn = sn + ajpp * comp
        ln = ln + (aj * pj).derivative(j) * comp
        gn = gn + aj * pj * pj * comp
    num = -p * p * sn + 2 * (nu - 1) * p * ln - nu * (nu - 1) * gn
    return RationalExpr(num, _delta_all(m))


def _closed_form_term(A: Polynomial, j: int, n: int, fpoly: MultiPoly,
                      nu: Fraction) -> MultiPoly:
    """f^{nu+1} d^2/dx_j^2 (A(x_j) f^{1-nu}) expanded for a weight with
    vanishing pure second derivative in x_j: equals
    A'' f^2 - 2(nu-1) A' (d_j f) f + nu(nu-1) A (d_j f)^2."""
    a = _embed(A, j, n)
    ap = _embed(A.derivative(), j, n)
    app = _embed(A.derivative().derivative(), j, n)
    dj = fpoly.derivative(j)
    if not fpoly.derivative(j).derivative(j).is_zero:
        raise IncompatibleWeight(
            "closed form needs a weight affine in each variable"
        )
    return app * fpoly * fpoly - 2 * (nu - 1) * ap * dj * fpoly \
        + nu * (nu - 1) * a * dj * dj


def weighted_scal(metric, f: Weight, nu, route: str = "auto",
                  domain=None, check_positive: bool = True) -> RationalExpr:
    """Exact weighted scalar curvature Scal_{f,nu}(g).

    route selects the computation path: "assembly" is the three-piece
    definitional form f^2 Scal - 2(nu-1) f Lap f - nu(nu-1) |df|^2;
    "closed" is the f^{nu+1} closed form (available for Profile1D,
    TwistedProduct with constant b and Orthotoric at any rational nu, and
    for nonconstant b exactly at nu = m+2); "auto" prefers the closed
    form where it exists.  The two routes agree identically; keeping them
    separate is what gives the agreement test its teeth.

    nu is an exact rational and may be fractional (e.g. 5/2).

    Ambitoric metrics (positive sign only) are handled at nu = 4 through
    their orthotoric twin (A, -B): Scal_{f_w/f_q,4}(g+) =
    Scal_{f_w,4}(twin)/f_q, which is the twist identity at m = 2.
    TwistedOrthotoric works the same way at nu = m+2.
    """
    nu = rat(nu)
    k = kind_of(metric)
    if k == "Ambitoric":
        if metric.sign != "+":
            raise UnsupportedKind(
                "weighted curvature of the negative ambitoric metric is "
                "not exposed symbolically; probe it with the oracle"
            )
        if nu != 4:
            raise IncompatibleWeight(
                "Ambitoric weighted curvature is defined at nu = 4"
            )
        w = weight_vector(metric, f)
        twin = Orthotoric(2, (metric.A, -metric.B))
        top = weighted_scal(twin, WeightFunction.polarized(w.coeffs), 4,
                            route=route, check_positive=False)
        fq = RationalExpr.from_poly(
            WeightFunction.polarized(metric.q.vector()).linear_poly()
        )
        if check_positive:
            _sample_positive(metric, f, domain)
        return top / fq
    if k == "TwistedOrthotoric":
        if nu != metric.m + 2:
            raise IncompatibleWeight(
                "TwistedOrthotoric weighted curvature is defined at nu = m+2"
            )
        w = weight_vector(metric, f)
        twin = Orthotoric(metric.m, metric.A)
        top = weighted_scal(twin, WeightFunction.polarized(w.coeffs), nu,
                            route=route, check_positive=False)
        if check_positive:
            _sample_positive(metric, f, domain)
        return top / RationalExpr.from_poly(metric.q.linear_poly())
    if check_positive:
        _sample_positive(metric, f, domain)
    fv = weight_vector(metric, f)
    Fx = weight_expr(metric, f)
    n = _nvars(metric)

    closed_ok = False
    if k == "Profile1D" or k == "Orthotoric":
        closed_ok = True
    elif k == "TwistedProduct" and fv.form == "ProductAffine":
        closed_ok = metric.is_plain_product or nu == metric.m + 2
    use_closed = (route == "closed") or (route == "auto" and closed_ok)
    if route == "closed" and not closed_ok:
        raise IncompatibleWeight(
            f"no closed form for {k} at nu = {nu} with this weight"
        )

    if use_closed:
        if k == "Profile1D":
            fpoly = fv.linear_poly()
            term = _closed_form_term(metric.A, 0, 1, fpoly, nu)
            return RationalExpr.from_poly(-term)
        if k == "TwistedProduct":
            m = metric.m
            fc = fv.linear_poly()
            total = MultiPoly.constant(0, m)
            for j in range(m):
                total = total + _closed_form_term(metric.A[j], j, m, fc, nu)
            return RationalExpr(-total, metric.b.linear_poly())
        if k == "Orthotoric":
            m = metric.m
            fq = fv.linear_poly()
            total = RationalExpr.constant(0, m)
            for j in range(m):
                term = _closed_form_term(metric.A[j], j, m, fq, nu)
                total = total + RationalExpr(term, _delta_j(j, m))
            return -total

    if k == "TwistedProduct":
        return _twisted_assembly(metric, fv, nu)
    if k == "Orthotoric":
        return _orthotoric_assembly(metric, fv, nu)
    s = scal(metric)
    lap = _laplacian_sym(metric, Fx)
    gn = _grad_norm_sym(metric, Fx)
    return Fx * Fx * s - 2 * (nu - 1) * Fx * lap - nu * (nu - 1) * gn


# ---------------------------------------------------------------------------
# affineness in momenta
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineVerdict:
    affine: bool
    coeffs: Optional[tuple] = None
    witness: Optional[str] = None

    @property
    def kind(self) -> str:
        return "Affine" if self.affine else "NotAffine"

    def __bool__(self) -> bool:
        return self.affine


def _momenta_clearing(metric):
    """(s, basis): momenta are basis[r]/s as functions of x."""
    k = kind_of(metric)
    n = _nvars(metric)
    one = MultiPoly.constant(1, n)
    if k in ("Profile1D", "CalabiBundle1D"):
        return one, [one, _mvar(0, 1)]
    if k == "TwistedProduct":
        basis = [one] + [_mvar(j, n) for j in range(n)]
        return metric.b.linear_poly(), basis
    if k == "Orthotoric":
        return one, [elementary_symmetric(r, n) for r in range(n + 1)]
    if k == "TwistedOrthotoric":
        return metric.q.linear_poly(), \
            [elementary_symmetric(r, n) for r in range(n + 1)]
    if k == "Ambitoric":
        fq = WeightFunction.polarized(metric.q.vector()).linear_poly()
        return fq, [elementary_symmetric(r, 2) for r in range(3)]
    raise UnsupportedKind(k)


def _monomial_str(e, nvars) -> str:
    if not any(e):
        return "1"
    names = ["z"] if nvars == 1 else [f"x{i + 1}" for i in range(nvars)]
    parts = []
    for i, k in enumerate(e):
        if k == 1:
            parts.append(names[i])
        elif k > 1:
            parts.append(f"{names[i]}^{k}")
    return "*".join(parts)


def is_affine_in_momenta(expr: RationalExpr, metric) -> AffineVerdict:
    """Decide whether expr is an affine function of the metric's momenta.

    With momenta mu_r = basis_r/s the question "expr = sum c_r mu_r" is
    cleared to the polynomial identity num * s = den * sum c_r basis_r,
    which is a linear system for the c_r; the denominators the curvature
    routes produce (powers of the weight, Delta_j products) are handled
    uniformly by this clearing.  On success the exact coefficient vector
    is returned; on failure, a monomial witnessing the obstruction.
    """
    if isinstance(expr, MultiPoly):
        expr = RationalExpr.from_poly(expr)
    s, basis = _momenta_clearing(metric)
    target = expr.num * s
    span = [expr.den * b for b in basis]
    sol = express_in_span(target, span)
    if sol is not None:
        return AffineVerdict(True, tuple(sol))
    covered = set()
    for p in span:
        covered.update(e for e, _ in p.terms)
    witness = None
    for e, _ in sorted(target.terms, key=lambda t: (sum(t[0]), t[0])):
        if e not in covered:
            witness = _monomial_str(e, target.nvars)
            break
    if witness is None:
        witness = "no consistent coefficient assignment"
    return AffineVerdict(False, witness=witness)


# ---------------------------------------------------------------------------
# pointwise metric evaluation
# ---------------------------------------------------------------------------


def evaluate_metric(metric, point) -> np.ndarray:
    """The full coordinate metric matrix at a point, as floats.

    Coordinate orders: Profile1D (z, t); TwistedProduct (x_1..x_m,
    tau_1..tau_m); Orthotoric (x_1..x_m, t_1..t_m); TwistedOrthotoric
    (x_1..x_m, then the m kept angle slots of (t_0..t_m) with t_{r*}
    frozen, r* the first index with q_{r*} != 0); Ambitoric (x_1, x_2,
    phi_1, phi_2) in the angle basis described in ambitoric_angle_basis;
    CalabiBundle1D (w_1, s_1, .., w_d, s_d, z, t) over a product base of
    d unit factors scaled to base scalar curvature s_B.
    """
    k = kind_of(metric)
    pt = [float(x) for x in point]
    if k == "Profile1D":
        z = pt[0]
        a = _polyval(metric.A, z)
        if a == 0:
            raise DegeneratePoint("profile vanishes at the point")
        return np.array([[1.0 / a, 0.0], [0.0, a]])
    if k == "TwistedProduct":
        m = metric.m
        x = pt[:m]
        b = [float(c) for c in metric.b.coeffs]
        fb = b[0] + sum(b[j + 1] * x[j] for j in range(m))
        if fb <= 0:
            raise DegeneratePoint("f_b is not positive at the point")
        g = np.zeros((2 * m, 2 * m))
        avals = [_polyval(metric.A[j], x[j]) for j in range(m)]
        for j in range(m):
            if avals[j] == 0:
                raise DegeneratePoint("profile vanishes at the point")
            g[j, j] = 1.0 / (fb * avals[j])
        for j in range(m):
            alpha = np.array(
                [(1.0 if i == j else 0.0) - b[j + 1] * x[i] / fb
                 for i in range(m)]
            )
            g[m:, m:] += (avals[j] / fb) * np.outer(alpha, alpha)
        return g
    if k == "Orthotoric":
        return _orthotoric_matrix(metric.m, metric.A, pt)
    if k == "TwistedOrthotoric":
        return _twisted_orthotoric_matrix(metric, pt)
    if k == "Ambitoric":
        return _ambitoric_matrix(metric, pt)
    if k == "CalabiBundle1D":
        return _calabi_matrix(metric, pt)
    raise UnsupportedKind(k)


def _polyval(p: Polynomial, x: float) -> float:
    out = 0.0
    for c in reversed(p.coeffs):
        out = out * x + float(c)
    return out


def _check_distinct(x) -> None:
    m = len(x)
    for i in range(m):
        for j in range(i + 1, m):
            if x[i] == x[j]:
                raise DegeneratePoint("coincident momentum coordinates")


def _orthotoric_matrix(m, A, pt) -> np.ndarray:
    x = pt[:m]
    _check_distinct(x)
    g = np.zeros((2 * m, 2 * m))
    for j in range(m):
        delta = 1.0
        for kk in range(m):
            if kk != j:
                delta *= x[j] - x[kk]
        aj = _polyval(A[j], x[j])
        if aj == 0:
            raise DegeneratePoint("profile vanishes at the point")
        g[j, j] = delta / aj
        others = [x[kk] for kk in range(m) if kk != j]
        v = np.array([_esym(others, r) for r in range(m)])
        g[m:, m:] += (aj / delta) * np.outer(v, v)
    return g


def _esym(vals, r) -> float:
    from itertools import combinations

    if r == 0:
        return 1.0
    out = 0.0
    for combo in combinations(vals, r):
        p = 1.0
        for v in combo:
            p *= v
        out += p
    return out


def _twisted_orthotoric_matrix(metric: TwistedOrthotoric, pt) -> np.ndarray:
    m = metric.m
    x = pt[:m]
    _check_distinct(x)
    q = [float(c) for c in metric.q.coeffs]
    sig = [_esym(x, r) for r in range(m + 1)]
    fq = sum(q[r] * sig[r] for r in range(m + 1))
    if fq <= 0:
        raise DegeneratePoint("f_q is not positive at the point")
    rstar = next(r for r in range(m + 1) if metric.q.coeffs[r] != 0)
    kept = [r for r in range(m + 1) if r != rstar]
    g = np.zeros((2 * m, 2 * m))
    for j in range(m):
        delta = 1.0
        for kk in range(m):
            if kk != j:
                delta *= x[j] - x[kk]
        aj = _polyval(metric.A[j], x[j])
        if aj == 0:
            raise DegeneratePoint("profile vanishes at the point")
        g[j, j] = delta / (aj * fq)
        others = [x[kk] for kk in range(m) if kk != j]
        djfq = sum(q[r] * _esym(others, r - 1) for r in range(1, m + 1))
        beta = []
        for r in kept:
            dsig = _esym(others, r - 1) if r >= 1 else 0.0
            beta.append((dsig * fq - sig[r] * djfq) / (fq * fq))
        beta = np.array(beta)
        g[m:, m:] += (aj * fq / delta) * np.outer(beta, beta)
    return g


def ambitoric_angle_basis(q: PaperQuadratic):
    """Two angle directions spanning the constraint plane
    2 q1 tau1 = q0 tau2 + q2 tau0.

    The preferred pair is dual to the Killing fields of f_w for w in
    {1, x}: with M_q the quadratic's twist matrix, K_w = M_q w gives
    e1 = (-q1, -q2/2, 0) and e2 = (q0/2, 0, -q2/2).  When q2 = 0 these
    degenerate, and a deterministic fallback ladder tries the pairs
    (1, x), (1, x^2), (x, x^2) in that order, taking the first whose
    Killing vectors are linearly independent.
    """
    q0, q1, q2 = (F(q.q0), F(q.q1), F(q.q2))
    k1 = (-q1, -q2 / 2, F(0))
    kx = (q0 / 2, F(0), -q2 / 2)
    kx2 = (F(0), q0 / 2, q1)
    for ea, eb in ((k1, kx), (k1, kx2), (kx, kx2)):
        cross = [
            ea[1] * eb[2] - ea[2] * eb[1],
            ea[2] * eb[0] - ea[0] * eb[2],
            ea[0] * eb[1] - ea[1] * eb[0],
        ]
        if any(c != 0 for c in cross):
            return ea, eb
    raise BadParameters("quadratic q admits no independent angle pair")


def _ambitoric_matrix(metric: Ambitoric, pt) -> np.ndarray:
    x1, x2 = pt[0], pt[1]
    if x1 <= x2:
        raise DegeneratePoint("ambitoric domain needs x1 > x2")
    q = metric.q
    fq = float(q.q0) + float(q.q1) * (x1 + x2) + float(q.q2) * x1 * x2
    if fq <= 0:
        raise DegeneratePoint("f_q is not positive at the point")
    av = _polyval(metric.A, x1)
    bv = _polyval(metric.B, x2)
    if av == 0 or bv == 0:
        raise DegeneratePoint("profile vanishes at the point")
    fac = (x1 - x2) / fq if metric.sign == "+" else fq / (x1 - x2)
    e1, e2 = ambitoric_angle_basis(q)
    e1 = np.array([float(c) for c in e1])
    e2 = np.array([float(c) for c in e2])
    c1 = np.array([1.0, 2 * x2, x2 * x2]) / ((x1 - x2) * fq)
    c2 = np.array([1.0, 2 * x1, x1 * x1]) / ((x1 - x2) * fq)
    a1 = np.array([c1 @ e1, c1 @ e2])
    a2 = np.array([c2 @ e1, c2 @ e2])
    g = np.zeros((4, 4))
    g[0, 0] = fac / av
    g[1, 1] = fac / bv
    g[2:, 2:] = fac * (av * np.outer(a1, a1) + bv * np.outer(a2, a2))
    return g


def _calabi_matrix(metric: CalabiBundle1D, pt) -> np.ndarray:
    d = metric.d
    if len(pt) != 2 * d + 2:
        raise BadParameters(f"point needs {2 * d + 2} coordinates")
    w = [pt[2 * i] for i in range(d)]
    z = pt[2 * d]
    a0, a1 = float(metric.a0), float(metric.a1)
    sb = float(metric.base_scal)
    h = a0 + a1 * z
    if h <= 0:
        raise DegeneratePoint("a0 + a1 z is not positive at the point")
    anum = _polyval(metric.A, z)
    aden = _polyval(metric.A_den, z) if metric.A_den is not None else 1.0
    if aden == 0:
        raise DegeneratePoint("profile denominator vanishes")
    av = anum / aden
    if av == 0:
        raise DegeneratePoint("profile vanishes at the point")
    n = 2 * d + 2
    g = np.zeros((n, n))
    for i in range(d):
        bi = 1.0 - (sb / (2 * d)) * w[i] * w[i]
        if bi <= 0:
            raise DegeneratePoint("base profile not positive at the point")
        g[2 * i, 2 * i] = h / bi
        g[2 * i + 1, 2 * i + 1] = h * bi
    # theta = dt + a1 sum_i w_i ds_i; fibre term A theta^2
    scoord = [2 * i + 1 for i in range(d)]
    tcoord = n - 1
    g[2 * d, 2 * d] = 1.0 / av
    g[tcoord, tcoord] += av
    for i in range(d):
        g[tcoord, scoord[i]] += av * a1 * w[i]
        g[scoord[i], tcoord] += av * a1 * w[i]
        for j in range(d):
            g[scoord[i], scoord[j]] += av * a1 * a1 * w[i] * w[j]
    return g


# ---------------------------------------------------------------------------
# oracle bridges
# ---------------------------------------------------------------------------


def coordinate_dim(metric) -> int:
    k = kind_of(metric)
    if k == "CalabiBundle1D":
        return 2 * metric.d + 2
    if k in ("Profile1D",):
        return 2
    if k == "Ambitoric":
        return 4
    return 2 * metric.m


def to_oracle_field(metric, domain=None) -> CoordinateMetricField:
    """Wrap a metric for the finite-difference oracle.

    The domain box covers the momentum coordinates from default_domain
    (or the override) and wide angle ranges for the remaining slots.
    """
    n = coordinate_dim(metric)
    mom = domain if domain is not None else default_domain(metric)
    k = kind_of(metric)
    if k == "CalabiBundle1D":
        box = []
        for _ in range(metric.d):
            box.extend([(-0.6, 0.6), (-8.0, 8.0)])
        box.append(tuple(float(v) for v in mom[0]))
        box.append((-8.0, 8.0))
    else:
        box = [tuple(float(v) for v in b) for b in mom]
        box += [(-8.0, 8.0)] * (n - len(box))
    return CoordinateMetricField(
        n, lambda p: evaluate_metric(metric, p), domain=box
    )


def momentum_slice(metric, point):
    """Extract the momentum coordinates (the symbolic variables) from a
    full coordinate point."""
    k = kind_of(metric)
    if k == "CalabiBundle1D":
        return [point[2 * metric.d]]
    return list(point[: _nvars(metric)])


def weight_scalar_field(metric, f: Weight) -> ScalarField:
    """The weight as a numeric function of full coordinate points."""
    expr = weight_expr(metric, f)

    def fn(p):
        xs = momentum_slice(metric, p)
        return float(expr.evaluate([float(v) for v in xs]))

    return ScalarField(fn)


def symbolic_scalar_field(metric, expr: RationalExpr) -> ScalarField:
    """Any symbolic momentum function as a numeric coordinate field."""

    def fn(p):
        xs = momentum_slice(metric, p)
        return float(expr.evaluate([float(v) for v in xs]))

    return ScalarField(fn)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def weight_to_json(w: WeightFunction) -> dict:
    return {"form": w.form, "coeffs": [rat_str(c) for c in w.coeffs]}


def weight_from_json(obj) -> WeightFunction:
    if not isinstance(obj, dict) or "form" not in obj or "coeffs" not in obj:
        raise SchemaError("weight JSON needs 'form' and 'coeffs'")
    try:
        coeffs = [F(str(c)) for c in obj["coeffs"]]
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational in weight: {exc}") from exc
    if obj["form"] == "ProductAffine":
        return WeightFunction.product_affine(coeffs)
    if obj["form"] == "Polarized":
        return WeightFunction.polarized(coeffs)
    raise SchemaError(f"unknown weight form {obj['form']!r}")


def metric_to_json(metric) -> dict:
    k = kind_of(metric)
    if k == "Profile1D":
        lo, hi = metric.interval
        return {"kind": k, "interval": [rat_str(lo), rat_str(hi)],
                "A": polynomial_to_json(metric.A)}
    if k == "TwistedProduct":
        return {"kind": k, "m": metric.m,
                "A": [polynomial_to_json(a) for a in metric.A],
                "b": weight_to_json(metric.b)}
    if k == "Orthotoric":
        return {"kind": k, "m": metric.m,
                "A": [polynomial_to_json(a) for a in metric.A]}
    if k == "TwistedOrthotoric":
        return {"kind": k, "m": metric.m,
                "A": [polynomial_to_json(a) for a in metric.A],
                "q": weight_to_json(metric.q)}
    if k == "Ambitoric":
        return {"kind": k,
                "q": [rat_str(c) for c in metric.q.vector()],
                "A": polynomial_to_json(metric.A),
                "B": polynomial_to_json(metric.B),
                "sign": metric.sign}
    if k == "CalabiBundle1D":
        out = {"kind": k, "base_scal": rat_str(metric.base_scal),
               "d": metric.d, "a0": rat_str(metric.a0),
               "a1": rat_str(metric.a1),
               "A": polynomial_to_json(metric.A)}
        if metric.A_den is not None:
            out["A_den"] = polynomial_to_json(metric.A_den)
        return out
    raise UnsupportedKind(k)


def metric_from_json(obj) -> SeparableMetric:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("metric JSON needs a 'kind' discriminator")
    k = obj["kind"]
    try:
        if k == "Profile1D":
            lo, hi = obj["interval"]
            return Profile1D((F(str(lo)), F(str(hi))),
                             polynomial_from_json(obj["A"]))
        if k == "TwistedProduct":
            return TwistedProduct(
                int(obj["m"]),
                tuple(polynomial_from_json(a) for a in obj["A"]),
                weight_from_json(obj["b"]),
            )
        if k == "Orthotoric":
            return Orthotoric(
                int(obj["m"]),
                tuple(polynomial_from_json(a) for a in obj["A"]),
            )
        if k == "TwistedOrthotoric":
            return TwistedOrthotoric(
                int(obj["m"]),
                tuple(polynomial_from_json(a) for a in obj["A"]),
                weight_from_json(obj["q"]),
            )
        if k == "Ambitoric":
            q = [F(str(c)) for c in obj["q"]]
            return Ambitoric(
                PaperQuadratic.of(*q),
                polynomial_from_json(obj["A"]),
                polynomial_from_json(obj["B"]),
                obj.get("sign", "+"),
            )
        if k == "CalabiBundle1D":
            return CalabiBundle1D(
                F(str(obj["base_scal"])), int(obj["d"]),
                F(str(obj["a0"])), F(str(obj["a1"])),
                polynomial_from_json(obj["A"]),
                polynomial_from_json(obj["A_den"])
                if "A_den" in obj else None,
            )
    except (KeyError, ValueError, TypeError, BadParameters) as exc:
        raise SchemaError(f"bad metric JSON for kind {k!r}: {exc}") from exc
    raise SchemaError(f"unknown metric kind {k!r}")
