"""CR twists of separable toric Kahler metrics.

A CR twist trades the quotient along one Reeb direction for the quotient
along f times that direction, where f is a positive affine function of
the momenta.  On the separable ansatze this is explicit bookkeeping: the
separable variables stay fixed (or move by a Mobius map in the 1-D
profile picture) while profiles, weights and angle forms transform by
rational formulas.  The governing identity, with nu = m + 2,

    Scal_{f_b, nu}(g) = f_a * (Scal_{f_b/f_a, nu}(g_twisted) o phi),

holds exactly; invariance_sides packages both sides of it for the
finite-difference oracle.

Profile twists come in two 1-D flavours.  With f_a = a0 + a1 z,

* Origin:             z~ = z/f_a(z),        A~ = a0^2 A / f_a^3,
* IntervalPreserving: z~ = (a0 z + a1)/f_a, A~ = (a0^2-a1^2)^2 A / f_a^3,

each read through the inverse substitution so that A~ is an explicit
rational function of z~ (a polynomial of degree <= 3 via the weight-3
Mobius rule whenever deg A <= 3).  The interval-preserving map fixes the
reference interval [-1, 1] endpointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BadParameters,
    DegeneratePoint,
    IncompatibleWeight,
    SingularSystem,
    UnsupportedKind,
    WeightVanishes,
    ZeroA0,
)
from .geom import (
    AffineChart,
    Ambitoric,
    CalabiBundle1D,
    Orthotoric,
    Profile1D,
    TwistedOrthotoric,
    TwistedProduct,
    WeightFunction,
    _sample_positive,
    ambitoric_angle_basis,
    kind_of,
    to_oracle_field,
    weight_scalar_field,
    weight_vector,
)
from .legendre import (
    PotentialFunction,
    numeric_potential,
    potential_gradient,
    potential_value,
)
from .poly import Polynomial, mobius_transform, rat

ORIGIN = "Origin"
INTERVAL_PRESERVING = "IntervalPreserving"
GENERAL = "General"
_VARIANTS = (ORIGIN, INTERVAL_PRESERVING, GENERAL)


@dataclass(frozen=True)
class TwistMap:
    """The record of one CR twist: its weight, charts, and flavour.

    translation is the 1-D re-charting offset: when the weight has
    a0 = 0 the source coordinate is first replaced by zeta = z - c with
    the smallest positive integer c keeping a0 + a1 c nonzero, and all
    recorded maps act on zeta.
    """

    weight: WeightFunction
    chart_in: AffineChart
    chart_out: AffineChart
    variant: str
    translation: F = F(0)

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise BadParameters(f"unknown twist variant {self.variant!r}")
        object.__setattr__(self, "translation", rat(self.translation))


def _mob_apply(map4, z):
    a, b, c, d = map4
    den = c * z + d
    if den == 0:
        raise DegeneratePoint("coordinate map is singular at the point")
    return (a * z + b) / den


@dataclass(frozen=True)
class TwistedProfile:
    """A twisted 1-D profile A~ = num/den in the twisted coordinate.

    forward and inverse are the Mobius 4-tuples (alpha, beta, gamma,
    delta) for z~ = (alpha z + beta)/(gamma z + delta) and its inverse;
    interval is the image of the source interval.  den is the constant 1
    whenever deg A <= 3, and then `profile` exposes A~ as a Polynomial.
    """

    num: Polynomial
    den: Polynomial
    interval: Tuple[F, F]
    map: TwistMap
    forward: tuple
    inverse: tuple

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    @property
    def profile(self) -> Polynomial:
        if not self.is_polynomial:
            raise BadParameters(
                "twisted profile has a nonconstant denominator"
            )
        return self.num
    def __call__(self, zt):
        return self.num(zt) / self.den(zt)


def _normalize_pair(num: Polynomial, den: Polynomial):
    """Scale num/den so den is either the constant 1 or primitive with a
    positive leading coefficient."""
    if den.is_zero:
        raise BadParameters("zero denominator in profile transform")
    if den.degree() == 0:
        return num * (F(1) / den.coeff(0)), Polynomial.of([F(1)], den.var)
    c = den.content()
    if den.leading() < 0:
        c = -c
    return num * (F(1) / c), den * (F(1) / c)


def _profile_transform(N: Polynomial, D: Optional[Polynomial], map4,
                       divisor: F, extra: F = F(1)):
    """The rational profile (N/D)(psi(z~)) * divisor^2 / (f_a o psi)^3.

    psi is the Mobius substitution with data map4 whose denominator is
    the linear polynomial delta + gamma*z~, against which f_a o psi =
    divisor/(delta + gamma z~).  The result is divided by `extra` and
    returned as a normalized (num, den) pair.
    """
    n = N.degree()
    dd = D.degree() if D is not None else 0
    dden = Polynomial.of([map4[3], map4[2]], N.var)
    num = mobius_transform(N, map4, max(n, 0))
    if D is not None:
        den = mobius_transform(D, map4, max(dd, 0))
    else:
        den = Polynomial.of([F(1)], N.var)
    p = 3 + dd - n
    if p >= 0:
        num = num * (dden ** p)
    else:
        den = den * (dden ** (-p))
    den = den * (divisor * extra)
    return _normalize_pair(num, den)


def twist_profile_1d(A: Polynomial, a0, a1, variant: str,
                     interval=(F(-1), F(1))) -> TwistedProfile:
    """Twist a 1-D profile by the affine weight a0 + a1 z.

    The weight must be positive on the closed source interval; the
    interval-preserving variant additionally needs a0^2 > a1^2 so the
    Mobius map fixing the endpoints of [-1, 1] is regular.  A zero or
    sign-changing weight raises WeightVanishes.  When a0 = 0 the source
    is re-charted by z = zeta + c first (translation recorded).
    """
    a0, a1 = rat(a0), rat(a1)
    lo, hi = rat(interval[0]), rat(interval[1])
    if a0 == 0 and a1 == 0:
        raise WeightVanishes("the twisting weight is identically zero")
    translation = F(0)
    if a0 == 0:
        c = F(1)
        while a0 + a1 * c == 0:
            c += 1
        translation = c
        A = A.compose(Polynomial.of([c, F(1)], A.var))
        lo, hi = lo - c, hi - c
        a0 = a0 + a1 * c
    if a0 + a1 * lo <= 0 or a0 + a1 * hi <= 0:
        raise WeightVanishes(
            f"weight {a0} + {a1} z is not positive on [{lo}, {hi}]"
        )
    if variant == ORIGIN:
        forward = (F(1), F(0), a1, a0)
        inverse = (a0, F(0), -a1, F(1))
        divisor = a0
    elif variant == INTERVAL_PRESERVING:
        if a0 * a0 <= a1 * a1:
            raise WeightVanishes(
                "interval-preserving twists need |a0| > |a1| so the "
                "weight is nonzero on the reference interval [-1, 1]"
            )
        forward = (a0, a1, a1, a0)
        inverse = (a0, -a1, -a1, a0)
        divisor = a0 * a0 - a1 * a1
    else:
        raise BadParameters(
            f"1-D profile twists take variant Origin or "
            f"IntervalPreserving, not {variant!r}"
        )
    num, den = _profile_transform(A, None, inverse, divisor)
    tm = TwistMap(
        WeightFunction.product_affine((a0, a1)),
        AffineChart(0, 2), AffineChart(0, 2), variant, translation,
    )
    new_interval = (_mob_apply(forward, lo), _mob_apply(forward, hi))
    return TwistedProfile(num, den, new_interval, tm, forward, inverse)


def pushforward_affine(b0, b1, a0, a1, variant: str):
    """The induced affine weight (f_b/f_a) o phi^{-1} on the twisted side.

    Origin:             ( b0 + (a0 b1 - a1 b0) z~ ) / a0,
    IntervalPreserving: ( (a0 b0 - a1 b1) + (a0 b1 - a1 b0) z~ )
                                                        / (a0^2 - a1^2).
    """
    b0, b1, a0, a1 = rat(b0), rat(b1), rat(a0), rat(a1)
    if variant == ORIGIN:
        if a0 == 0:
            raise ZeroA0("the Origin chart needs a0 != 0")
        return (b0 / a0, (a0 * b1 - a1 * b0) / a0)
    if variant == INTERVAL_PRESERVING:
        det = a0 * a0 - a1 * a1
        if det == 0:
            raise WeightVanishes("|a0| = |a1| degenerates the map")
        return ((a0 * b0 - a1 * b1) / det, (a0 * b1 - a1 * b0) / det)
    raise BadParameters(f"no affine pushforward for variant {variant!r}")


# ---------------------------------------------------------------------------
# twists of assembled metrics
# ---------------------------------------------------------------------------


def twist_twisted_product(metric: TwistedProduct, f_b) -> TwistedProduct:
    """Twist a (possibly already twisted) toric product by a weight.

    All twists of a product family live over one shared Lie algebra of
    affine momenta, so the operation just composes weight vectors: the
    argument c denotes the function f_c/f_b on the source, and twisting
    by it replaces the metric's b-vector with c.  Twisting the plain
    product by f_b produces TwistedProduct{A, b}; twisting that by the
    vector (1, 0, ..., 0) (the function 1/f_b) undoes it exactly.
    """
    fv = weight_vector(metric, f_b)
    if fv.form != "ProductAffine":
        raise IncompatibleWeight(
            "product twists take ProductAffine weights"
        )
    _sample_positive(metric, fv)
    return TwistedProduct(metric.m, metric.A, fv)


def twist_orthotoric(metric: Orthotoric, f_q):
    """Attach a polarized weight f_q to an orthotoric metric.

    The twisted metric keeps the separable variables and profiles and
    conformally rescales by 1/f_q with recombined angle forms; geometry
    code dispatches on the decorated kind.  A constant weight returns
    the input unchanged.
    """
    fv = weight_vector(metric, f_q)
    if all(c == 0 for c in fv.coeffs[1:]):
        return metric
    _sample_positive(metric, fv)
    return TwistedOrthotoric(metric.m, metric.A, fv)


def twist_calabi(metric: CalabiBundle1D, f) -> CalabiBundle1D:
    """Twist a Kahler product (a1 = 0, unit base coefficient) into the
    bundle ansatz with fibre weight f = a0 + a1 z.

    The bundle profile is the inverse interval-preserving transform of
    the product profile: applying the (a0, a1) twist to the result
    recovers the product profile exactly.  A constant weight returns the
    input unchanged.
    """
    if metric.a1 != 0:
        raise BadParameters(
            "the source of a Calabi twist must be a product (a1 = 0)"
        )
    if isinstance(f, WeightFunction):
        if f.form != "ProductAffine" or f.m != 1:
            raise IncompatibleWeight(
                "Calabi twists take 1-D ProductAffine weights"
            )
        a0, a1 = f.coeffs
    else:
        a0, a1 = (rat(c) for c in f)
    if a1 == 0:
        return metric
    if metric.a0 != 1:
        raise BadParameters(
            "normalize the product so the base coefficient is 1"
        )
    if a0 * a0 <= a1 * a1:
        raise WeightVanishes(
            f"fibre weight {a0} + {a1} z vanishes on [-1, 1]"
        )
    map4 = (a0, a1, a1, a0)
    det = a0 * a0 - a1 * a1
    num, den = _profile_transform(metric.A, metric.A_den, map4, det,
                                  extra=det)
    return CalabiBundle1D(
        metric.base_scal, metric.d, a0, a1, num,
        None if den.degree() == 0 and den.coeff(0) == 1 else den,
    )


def untwist_calabi(metric: CalabiBundle1D) -> CalabiBundle1D:
    """Twist a bundle by its own fibre weight a0 + a1 z, producing the
    Kahler product it came from:

        A~(z~) = (a0^2 - a1^2)^2 A(z) / (a0 + a1 z)^3,
        z = (a0 z~ - a1)/(a0 - a1 z~).

    This inverts twist_calabi exactly.
    """
    if metric.a1 == 0:
        return metric
    a0, a1 = metric.a0, metric.a1
    if a0 * a0 <= a1 * a1:
        raise WeightVanishes(
            f"fibre weight {a0} + {a1} z vanishes on [-1, 1]"
        )
    map4 = (a0, -a1, -a1, a0)
    det = a0 * a0 - a1 * a1
    num, den = _profile_transform(metric.A, metric.A_den, map4, det)
    return CalabiBundle1D(
        metric.base_scal, metric.d, F(1), F(0), num,
        None if den.degree() == 0 and den.coeff(0) == 1 else den,
    )


# ---------------------------------------------------------------------------
# potential-level twist (independent cross-check route)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialTwist:
    """The symplectic potential u~(z~) = u(z)/f_a(z) of a twist, with
    its momentum maps and the angle recombination matrix.

    angle_matrix acts on the torus coordinates (t_0, ..., t_m):
    t~_0 = t_0/a_0 and t~_j = t_j - (a_j/a_0) t_0.
    """

    potential: PotentialFunction
    weight: WeightFunction
    map: TwistMap
    momentum_forward: Callable
    momentum_inverse: Callable
    angle_matrix: tuple


def twist_potential(u: PotentialFunction, f_a) -> PotentialTwist:
    """Twist a symplectic potential by the affine weight f_a.

    The twisted chart has momenta z~_j = z_j/f_a(z) with inverse
    z_j = a_0 z~_j / (1 - sum_k a_k z~_k), and the potential transforms
    as a section of O(1): u~(z~) = u(z)/f_a(z).  Its exact gradient
    follows from how differential lifts change chart:

        du~/dz~_j = u_j - (a_j/a_0) (u - sum_k z_k u_k),

    so the result carries an analytic gradient whenever evaluation of u
    and its gradient is available.  Needs a_0 != 0 (re-chart first).
    """
    if isinstance(f_a, WeightFunction):
        if f_a.form != "ProductAffine":
            raise IncompatibleWeight(
                "potential twists take ProductAffine weights"
            )
        coeffs = f_a.coeffs
    else:
        coeffs = tuple(rat(c) for c in f_a)
    m = u.m
    if len(coeffs) != m + 1:
        raise BadParameters(
            f"weight needs {m + 1} coefficients for an m={m} potential"
        )
    if coeffs[0] == 0:
        raise ZeroA0(
            "the twisted chart needs a0 != 0; translate the chart first"
        )
    a = [float(c) for c in coeffs]
    a0 = a[0]

    def forward(z):
        z = [float(v) for v in z]
        fa = a0 + sum(aj * zj for aj, zj in zip(a[1:], z))
        if fa == 0:
            raise DegeneratePoint("the weight vanishes at the point")
        return [zj / fa for zj in z]

    def inverse(zt):
        zt = [float(v) for v in zt]
        s = 1.0 - sum(aj * vj for aj, vj in zip(a[1:], zt))
        if s == 0:
            raise DegeneratePoint("the inverse chart map is singular")
        return [a0 * vj / s for vj in zt]

    def fn(zt):
        z = inverse(zt)
        fa = a0 + sum(aj * zj for aj, zj in zip(a[1:], z))
        return potential_value(u, z) / fa

    def grad(zt):
        z = inverse(zt)
        val = potential_value(u, z)
        g = potential_gradient(u, z)
        head = val - sum(zj * gj for zj, gj in zip(z, g))
        return [gj - (aj / a0) * head for gj, aj in zip(g, a[1:])]

    ut = numeric_potential(fn, m, grad=grad)
    rows = []
    row0 = [F(0)] * (m + 1)
    row0[0] = F(1) / coeffs[0]
    rows.append(tuple(row0))
    for j in range(1, m + 1):
        row = [F(0)] * (m + 1)
        row[0] = -coeffs[j] / coeffs[0]
        row[j] = F(1)
        rows.append(tuple(row))
    tm = TwistMap(
        WeightFunction.product_affine(coeffs),
        AffineChart(0, m + 1), AffineChart(0, m + 1), ORIGIN,
    )
    return PotentialTwist(
        ut, tm.weight, tm, forward, inverse, tuple(rows)
    )


def _compose_rational_1d(expr, num_map: Polynomial,
                         den_map: Polynomial):
    """Substitute the rational map z = num_map/den_map into a univariate
    RationalExpr, exactly."""
    from .poly import MultiPoly, RationalExpr

    def coeffs_of(mp):
        d = mp.total_degree()
        out = [F(0)] * (d + 1)
        for mono, c in mp.as_dict().items():
            out[mono[0] if mono else 0] = c
        return out

    ncoef = coeffs_of(expr.num)
    dcoef = coeffs_of(expr.den)
    d = max(len(ncoef), len(dcoef)) - 1

    def homog(cs):
        out = Polynomial.zero(num_map.var)
        for k, c in enumerate(cs):
            if c:
                out = out + Polynomial.constant(c, num_map.var) \
                    * (num_map ** k) * (den_map ** (d - k))
        return out

    return RationalExpr(
        MultiPoly.from_univariate(homog(ncoef), 0, 1),
        MultiPoly.from_univariate(homog(dcoef), 0, 1),
    )


def profile_invariance_residual(metric: Profile1D, a0, a1, variant: str,
                                f_b):
    """Exact residual of the twist identity for a 1-D profile:

        Scal_{f_b,3}(g) - f_a * (Scal_{f_b/f_a,3}(g~) o phi)

    as a RationalExpr in the source coordinate; the identity says it is
    identically zero.  Works when the twisted profile is polynomial
    (deg A <= 3).  If the weight needs the a0 = 0 re-chart, the residual
    is computed in the translated chart.
    """
    from . import geom as geom_mod
    from .poly import MultiPoly, RationalExpr

    a0, a1 = rat(a0), rat(a1)
    b = tuple(rat(c) for c in f_b)
    tp = twist_profile_1d(metric.A, a0, a1, variant,
                          interval=metric.interval)
    c = tp.map.translation
    ta0, ta1 = tp.map.weight.coeffs
    src = metric
    if c:
        src = Profile1D(
            (metric.interval[0] - c, metric.interval[1] - c),
            metric.A.compose(Polynomial.of([c, F(1)], metric.A.var)),
        )
        b = (b[0] + b[1] * c, b[1])
    twisted = Profile1D(tp.interval, tp.profile)
    left = geom_mod.weighted_scal(
        src, WeightFunction.product_affine(b), 3, check_positive=False
    )
    pb = pushforward_affine(b[0], b[1], ta0, ta1, tp.map.variant)
    right = geom_mod.weighted_scal(
        twisted, WeightFunction.product_affine(pb), 3,
        check_positive=False,
    )
    al, be, ga, de = tp.forward
    comp = _compose_rational_1d(
        right,
        Polynomial.of([be, al], metric.A.var),
        Polynomial.of([de, ga], metric.A.var),
    )
    fa = RationalExpr.from_poly(
        MultiPoly.constant(ta0, 1)
        + MultiPoly.constant(ta1, 1) * MultiPoly.variable(0, 1)
    )
    return left - fa * comp


def product_invariance_residual(metric: TwistedProduct, c, w):
    """Exact residual of the twist identity for a (twisted) product:

        Scal_{w,m+2}(g) - (f_c/f_b) * Scal_{w,m+2}(g~),

    where g~ is the twist of g by the weight vector c and the separable
    variables are shared (phi = id).  The same vector w denotes f_w/f_b
    on the source and f_w/f_c on the twisted side, so it appears
    unchanged on both.  Identically zero.
    """
    from . import geom as geom_mod
    from .poly import RationalExpr

    twisted = twist_twisted_product(metric, c)
    nu = metric.m + 2
    left = geom_mod.weighted_scal(metric, w, nu, check_positive=False)
    right = geom_mod.weighted_scal(twisted, w, nu, check_positive=False)
    fa = RationalExpr(twisted.b.linear_poly(), metric.b.linear_poly())
    return left - fa * right


def ambitoric_twin(metric: Ambitoric):
    """The twisted-orthotoric chart of an ambitoric plus-metric.

    The plus metric of an ambitoric pair with quadratic q is, in the
    separable variables, the q-twist of the orthotoric metric with
    profiles (A, -B).  Returns (twin, M) where twin is that
    TwistedOrthotoric and M the exact 2x2 angle matrix: the chart map

        (x1, x2, p1, p2)  |->  (x1, x2, M @ (p1, p2))

    is an isometry onto the twin, so weighted curvatures agree pointwise
    under it.  M comes from matching the ambitoric angle basis vectors
    (dtau = e1 dp1 + e2 dp2) against the momenta differentials
    dtau_k = sum_r T[k][r] dt_r of the kept elementary-symmetric
    angles: solve (T S) M = [e1 e2] column by column, S selecting the
    kept columns.  All three rows must agree or the quadratic is too
    degenerate (SingularSystem).
    """
    if metric.sign != "+":
        raise UnsupportedKind(
            "only the plus metric of an ambitoric pair carries a "
            "twisted-orthotoric chart"
        )
    q0, q1, q2 = metric.q.q0, metric.q.q1, metric.q.q2
    qv = WeightFunction.polarized((q0, q1, q2))
    twin = TwistedOrthotoric(2, (metric.A, -metric.B), qv)
    T = (
        (-q1, q0, F(0)),
        (-q2 / 2, F(0), q0 / 2),
        (F(0), -q2, q1),
    )
    rstar = next(r for r in range(3) if qv.coeffs[r] != 0)
    kept = [r for r in range(3) if r != rstar]
    ts = [(T[i][kept[0]], T[i][kept[1]]) for i in range(3)]
    e1, e2 = ambitoric_angle_basis(metric.q)
    cols = [_solve_rows3(ts, e) for e in (e1, e2)]
    M = ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))
    return twin, M


def _solve_rows3(rows, target):
    """Solve the 3x2 system rows @ (u, v) = target exactly, requiring
    consistency of all three equations."""
    pair = None
    for i in range(3):
        for j in range(i + 1, 3):
            det = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]
            if det != 0:
                pair = (i, j, det)
                break
        if pair:
            break
    if pair is None:
        raise SingularSystem("angle system has rank below two")
    i, j, det = pair
    u = (target[i] * rows[j][1] - rows[i][1] * target[j]) / det
    v = (rows[i][0] * target[j] - target[i] * rows[j][0]) / det
    for k in range(3):
        if rows[k][0] * u + rows[k][1] * v != target[k]:
            raise SingularSystem("angle system is inconsistent")
    return (u, v)


# ---------------------------------------------------------------------------
# uniform dispatch
# ---------------------------------------------------------------------------


def make_twist(metric, weight, variant: Optional[str] = None) -> TwistMap:
    """Build the TwistMap record for twisting `metric` by `weight`.

    The default variant is Origin for 1-D profiles, IntervalPreserving
    for Calabi bundles, and General (separable variables fixed) for
    products and orthotoric metrics.
    """
    k = kind_of(metric)
    fv = weight_vector(metric, weight)
    if variant is None:
        variant = {
            "Profile1D": ORIGIN,
            "CalabiBundle1D": INTERVAL_PRESERVING,
        }.get(k, GENERAL)
    if k in ("Profile1D", "CalabiBundle1D"):
        basis = 2
    else:
        basis = metric.m + 1
    return TwistMap(fv, AffineChart(0, basis), AffineChart(0, basis),
                    variant)


def apply_twist(metric, twist: TwistMap):
    """Apply a twist, returning the twisted metric.

    Profile1D goes through twist_profile_1d (the result must stay a
    polynomial of degree <= 3); TwistedProduct and Orthotoric keep their
    separable variables; a Calabi product (a1 = 0) becomes a bundle, and
    a bundle twisted by its own fibre weight becomes a product.
    """
    k = kind_of(metric)
    if k == "Profile1D":
        if twist.variant not in (ORIGIN, INTERVAL_PRESERVING):
            raise BadParameters(
                "profile twists need an explicit 1-D variant"
            )
        a0, a1 = twist.weight.coeffs
        tp = twist_profile_1d(metric.A, a0, a1, twist.variant,
                              interval=metric.interval)
        return Profile1D(tp.interval, tp.profile)
    if k == "TwistedProduct":
        return twist_twisted_product(metric, twist.weight)
    if k == "Orthotoric":
        return twist_orthotoric(metric, twist.weight)
    if k == "CalabiBundle1D":
        if metric.a1 == 0:
            return twist_calabi(metric, twist.weight)
        if tuple(twist.weight.coeffs) == (metric.a0, metric.a1):
            return untwist_calabi(metric)
        raise BadParameters(
            "a Calabi bundle only untwists by its own fibre weight"
        )
    raise UnsupportedKind(f"no twist implemented for kind {k}")


def invariance_sides(metric, twist: TwistMap, f_b) -> dict:
    """Package both sides of the twist identity for the oracle.

    Returns a dict with keys nu, field, weight, f_a, map, field_t and
    weight_t: the source metric field, the weight f_b and twist weight
    f_a as coordinate functions, the coordinate map phi onto the twisted
    chart, and the twisted field with its induced weight (f_b/f_a) o
    phi^{-1}.  Angle coordinates pass through phi unchanged; the metrics
    do not depend on them.
    """
    k = kind_of(metric)
    twisted = apply_twist(metric, twist)
    wv = weight_vector(metric, f_b)
    field = to_oracle_field(metric)
    field_t = to_oracle_field(twisted)
    # probe points are chosen by the caller; no box margins are enforced
    field.domain = None
    field_t.domain = None
    out = {
        "field": field,
        "weight": weight_scalar_field(metric, wv),
        "f_a": None,
        "map": None,
        "field_t": field_t,
        "weight_t": None,
    }
    if k == "Profile1D":
        out["nu"] = F(3)
        a0, a1 = twist.weight.coeffs
        tp = twist_profile_1d(metric.A, a0, a1, twist.variant,
                              interval=metric.interval)
        c = tp.map.translation
        ta0, ta1 = tp.map.weight.coeffs
        b0, b1 = wv.coeffs
        tb = (b0 + b1 * c, b1)
        fwd = tuple(float(v) for v in tp.forward)

        def phi(p):
            zt = _mob_apply(fwd, float(p[0]) - float(c))
            return np.concatenate([[zt], np.asarray(p[1:], dtype=float)])

        out["map"] = phi
        out["f_a"] = weight_scalar_field(metric, twist.weight).value
        pb = pushforward_affine(tb[0], tb[1], ta0, ta1, tp.map.variant)
        out["weight_t"] = weight_scalar_field(
            twisted, WeightFunction.product_affine(pb)
        )
        return out
    if k in ("TwistedProduct", "Orthotoric"):
        out["nu"] = F(metric.m + 2)
        out["map"] = lambda p: np.asarray(p, dtype=float)
        out["f_a"] = weight_scalar_field(metric, twist.weight).value
        out["weight_t"] = weight_scalar_field(twisted, wv)
        return out
    if k == "CalabiBundle1D":
        if metric.a1 == 0:
            raise BadParameters(
                "probe the bundle side: pass the bundle metric and its "
                "fibre weight"
            )
        if tuple(twist.weight.coeffs) != (metric.a0, metric.a1):
            raise BadParameters(
                "a Calabi bundle only untwists by its own fibre weight"
            )
        out["nu"] = F(metric.d + 3)
        a0, a1 = metric.a0, metric.a1
        fwd = tuple(float(v) for v in (a0, a1, a1, a0))
        zslot = 2 * metric.d

        def phi(p):
            q = np.asarray(p, dtype=float).copy()
            q[zslot] = _mob_apply(fwd, q[zslot])
            return q

        out["map"] = phi
        out["f_a"] = weight_scalar_field(metric, twist.weight).value
        b0, b1 = wv.coeffs
        pb = pushforward_affine(b0, b1, a0, a1, INTERVAL_PRESERVING)
        out["weight_t"] = weight_scalar_field(
            twisted, WeightFunction.product_affine(pb)
        )
        return out
    raise UnsupportedKind(f"no twist identity wiring for kind {k}")
