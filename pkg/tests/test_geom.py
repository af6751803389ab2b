"""Tests for the separable-metric ansatze and weighted curvature."""

import random
from fractions import Fraction as F

import numpy as np
import pytest

from crtwist import geom, oracle
from crtwist.errors import (
    BadParameters,
    DegeneratePoint,
    IncompatibleWeight,
    NonPositiveWeightSample,
    UnsupportedKind,
)
from crtwist.poly import MultiPoly, PaperQuadratic, Polynomial, RationalExpr

P = Polynomial.of
WF = geom.WeightFunction


def sphere():
    return geom.Profile1D((F(-1), F(1)), P([1, 0, -1]))


def rand_frac(rng, lo=-2, hi=2, den=8):
    return F(rng.randint(lo * den, hi * den), den)


# -- frozen examples --------------------------------------------------------


def test_profile_weighted_example():
    w = WF.product_affine((2, 1))
    for route in ("assembly", "closed"):
        r = geom.weighted_scal(sphere(), w, 3, route=route)
        p = r.as_poly()
        assert p is not None
        assert p.as_dict() == {(0,): F(2), (1,): F(-8)}


def test_scal_examples():
    assert geom.scal(sphere()).equals(RationalExpr.constant(2, 1))
    flat = geom.Profile1D((F(0), F(1)), P([0, 1]))
    assert geom.scal(flat).is_zero
    tp = geom.TwistedProduct(
        2, (P([1, 0, -1]), P([2, 0, -1])), WF.product_affine((1, 0, 0))
    )
    assert geom.scal(tp).equals(RationalExpr.constant(4, 2))


def test_orthotoric_common_cubic_scal():
    orth = geom.Orthotoric(2, (P([0, 0, 0, 1]), P([0, 0, 0, 1])))
    # -(6x1/(x1-x2) + 6x2/(x2-x1)) = -6
    assert geom.scal(orth).equals(RationalExpr.constant(-6, 2))


def test_evaluate_metric_examples():
    g = geom.evaluate_metric(sphere(), [0.0, 0.3])
    assert np.allclose(g, np.eye(2))
    tw = geom.TwistedProduct(1, (P([1, 0, -1]),), WF.product_affine((2, 1)))
    g = geom.evaluate_metric(tw, [0.0, 0.7])
    assert np.allclose(g, 0.5 * np.eye(2))
    orth = geom.Orthotoric(2, (P([0, 0, 0, 1]), P([0, 0, 0, 1])))
    g = geom.evaluate_metric(orth, [2.0, 1.0, 0.1, 0.2])
    assert g[0, 0] == pytest.approx(1.0 / 8.0)


def test_weight_expr_conventions():
    tp = geom.TwistedProduct(
        2, (P([1, 0, -1]), P([1, 0, -1])), WF.product_affine((2, 1, 0))
    )
    # c = (1, 0, 0) denotes 1/f_b
    e = geom.weight_expr(tp, WF.product_affine((1, 0, 0)))
    fb = MultiPoly.from_dict({(0, 0): F(2), (1, 0): F(1)}, 2)
    assert e.equals(RationalExpr(MultiPoly.constant(1, 2), fb))
    # the constant weight 1 is the vector b itself
    assert geom.weight_expr(tp, 1).equals(RationalExpr.constant(1, 2))
    # Profile1D vectors are literal affine functions
    e = geom.weight_expr(sphere(), WF.product_affine((2, 1)))
    assert e.equals(RationalExpr.from_poly(
        MultiPoly.from_dict({(0,): F(2), (1,): F(1)}, 1)))


# -- dual-route identity ----------------------------------------------------


def rand_poly(rng, deg, den=4, lo=-2, hi=2):
    while True:
        p = P([rand_frac(rng, lo, hi, den) for _ in range(deg + 1)])
        if not p.is_zero:
            return p


def test_two_routes_agree_plain_products():
    rng = random.Random(11)
    for m in (1, 2, 3):
        for _ in range(7):
            mets = geom.TwistedProduct(
                m, tuple(rand_poly(rng, 3) for _ in range(m)),
                WF.product_affine((F(rng.randint(1, 4)),) + (F(0),) * m),
            )
            w = WF.product_affine(
                (F(rng.randint(3, 6)),)
                + tuple(rand_frac(rng, -1, 1) for _ in range(m))
            )
            for nu in (F(5, 2), F(3), F(4), F(m + 2), F(2 * m)):
                a = geom.weighted_scal(mets, w, nu, route="assembly",
                                       check_positive=False)
                c = geom.weighted_scal(mets, w, nu, route="closed",
                                       check_positive=False)
                assert a.equals(c)


def test_two_routes_agree_twisted_products_at_crnu():
    rng = random.Random(12)
    for m in (1, 2, 3):
        for _ in range(4):
            mets = geom.TwistedProduct(
                m, tuple(rand_poly(rng, 3) for _ in range(m)),
                WF.product_affine(
                    (F(rng.randint(2, 4)),)
                    + tuple(rand_frac(rng, -1, 1) for _ in range(m))
                ),
            )
            w = WF.product_affine(
                (F(rng.randint(3, 6)),)
                + tuple(rand_frac(rng, -1, 1) for _ in range(m))
            )
            a = geom.weighted_scal(mets, w, m + 2, route="assembly",
                                   check_positive=False)
            c = geom.weighted_scal(mets, w, m + 2, route="closed",
                                   check_positive=False)
            assert a.equals(c)


def test_two_routes_agree_orthotoric():
    rng = random.Random(13)
    for m in (2, 3):
        for _ in range(3):
            mets = geom.Orthotoric(
                m, tuple(rand_poly(rng, 3) for _ in range(m))
            )
            q = WF.polarized(
                (F(rng.randint(3, 6)),)
                + tuple(rand_frac(rng, -1, 1) for _ in range(m))
            )
            for nu in (F(5, 2), F(m + 2)):
                a = geom.weighted_scal(mets, q, nu, route="assembly",
                                       check_positive=False)
                c = geom.weighted_scal(mets, q, nu, route="closed",
                                       check_positive=False)
                assert a.equals(c)


def test_unit_weight_reproduces_scal():
    rng = random.Random(14)
    tp = geom.TwistedProduct(
        2, (rand_poly(rng, 3), rand_poly(rng, 3)),
        WF.product_affine((3, F(1, 2), F(-1, 4))),
    )
    for metric in (sphere(), tp,
                   geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1]))),
                   geom.CalabiBundle1D(F(4), 1, F(3), F(1), P([1, 0, -1]))):
        s = geom.scal(metric)
        for nu in (F(5, 2), F(4)):
            w = geom.weighted_scal(metric, 1, nu, check_positive=False)
            assert w.equals(s)


# -- oracle agreement -------------------------------------------------------


def fd_check(metric, w, nu, pts, dom=None, tol=1e-5):
    field = geom.to_oracle_field(metric, dom)
    fs = geom.weight_scalar_field(metric, w)
    sym = geom.weighted_scal(metric, w, nu, domain=dom, check_positive=False)
    for pt in pts:
        fd = oracle.weighted_scal_fd(field, fs, float(nu), pt, 1e-3)
        sv = float(sym.evaluate(
            [float(v) for v in geom.momentum_slice(metric, pt)]
        ))
        assert abs(fd - sv) / max(1.0, abs(sv)) < tol


def test_oracle_agreement_twisted_product():
    rng = random.Random(21)
    tp = geom.TwistedProduct(
        2, (P([1, 0, F(-1, 2)]), P([F(3, 2), F(1, 5), -1])),
        WF.product_affine((2, F(1, 3), F(-1, 4))),
    )
    w = WF.product_affine((3, F(1, 2), F(1, 5)))
    pts = [[rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
            rng.uniform(-1, 1), rng.uniform(-1, 1)] for _ in range(3)]
    fd_check(tp, w, F(4), pts)
    fd_check(tp, w, F(5, 2), pts)


def test_oracle_agreement_orthotoric():
    rng = random.Random(22)
    orth = geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1])))
    dom = [(1.75, 2.25), (-0.25, 0.25)]
    q = WF.polarized((4, F(1, 4), F(1, 8)))
    pts = [[rng.uniform(1.9, 2.1), rng.uniform(-0.1, 0.1),
            rng.uniform(-1, 1), rng.uniform(-1, 1)] for _ in range(3)]
    fd_check(orth, q, F(3), pts, dom)


def test_oracle_agreement_ambitoric_and_twin():
    rng = random.Random(23)
    q = PaperQuadratic.of(3, F(1, 2), F(1, 4))
    amb = geom.Ambitoric(q, P([1, 0, 1]), P([1, 0, 1]), "+")
    torth = geom.TwistedOrthotoric(
        2, (P([1, 0, 1]), P([-1, 0, -1])), WF.polarized(q.vector())
    )
    w = WF.polarized((2, F(-1, 10), F(1, 8)))
    pts = [[rng.uniform(0.9, 1.1), rng.uniform(-0.1, 0.1),
            rng.uniform(-1, 1), rng.uniform(-1, 1)] for _ in range(3)]
    fd_check(amb, w, F(4), pts, tol=5e-5)
    fd_check(torth, w, F(4), pts, tol=5e-5)
    # the two presentations of the same geometry agree pointwise
    fa = geom.to_oracle_field(amb)
    ft = geom.to_oracle_field(torth)
    for pt in pts:
        sa = oracle.scal_fd(fa, pt, 1e-3)
        st = oracle.scal_fd(ft, pt, 1e-3)
        assert sa == pytest.approx(st, rel=1e-6, abs=1e-6)


def test_oracle_agreement_calabi():
    rng = random.Random(24)
    cal = geom.CalabiBundle1D(F(4), 1, F(3), F(1), P([1, 0, -1, F(1, 5)]))
    field = geom.to_oracle_field(cal)
    s = geom.scal(cal)
    for _ in range(3):
        pt = [rng.uniform(-0.2, 0.2), rng.uniform(-1, 1),
              rng.uniform(-0.3, 0.3), rng.uniform(-1, 1)]
        fd = oracle.scal_fd(field, pt, 1e-3)
        sv = float(s.evaluate([pt[2]]))
        assert abs(fd - sv) / max(1.0, abs(sv)) < 1e-5


def test_oracle_agreement_calabi_rational_profile():
    rng = random.Random(25)
    cal = geom.CalabiBundle1D(F(-4), 2, F(3), F(1), P([6, 1, -1]), P([4, 1]))
    field = geom.to_oracle_field(cal)
    s = geom.scal(cal)
    for _ in range(2):
        pt = [rng.uniform(-0.2, 0.2), rng.uniform(-1, 1),
              rng.uniform(-0.2, 0.2), rng.uniform(-1, 1),
              rng.uniform(-0.3, 0.3), rng.uniform(-1, 1)]
        fd = oracle.scal_fd(field, pt, 1e-3)
        sv = float(s.evaluate([pt[4]]))
        assert abs(fd - sv) / max(1.0, abs(sv)) < 1e-5


# -- affineness in momenta --------------------------------------------------


def test_affine_examples():
    orth = geom.Orthotoric(3, (P([0, 0, 0, 1]),) * 3)
    sig2 = MultiPoly.from_dict(
        {(1, 1, 0): F(1), (1, 0, 1): F(1), (0, 1, 1): F(1)}, 3
    )
    v = geom.is_affine_in_momenta(RationalExpr.from_poly(sig2), orth)
    assert v.affine and v.coeffs == (F(0), F(0), F(1), F(0))
    tp = geom.TwistedProduct(
        2, (P([1, 0, -1]),) * 2, WF.product_affine((1, 0, 0))
    )
    x1x2 = MultiPoly.from_dict({(1, 1): F(1)}, 2)
    v = geom.is_affine_in_momenta(RationalExpr.from_poly(x1x2), tp)
    assert not v.affine and v.witness == "x1*x2"


def test_affine_recovers_weight_vectors():
    rng = random.Random(31)
    tp = geom.TwistedProduct(
        2, (P([1, 0, -1]),) * 2, WF.product_affine((2, F(1, 3), F(1, 5)))
    )
    c = (F(3), rand_frac(rng), rand_frac(rng))
    v = geom.is_affine_in_momenta(
        geom.weight_expr(tp, WF.product_affine(c)), tp
    )
    assert v.affine and v.coeffs == c


def test_extremal_products_invariant():
    # constant b, all cubics: weighted_scal(., 1, m+2) is affine in momenta
    rng = random.Random(32)
    for m in (1, 2, 3):
        for _ in range(3):
            tp = geom.TwistedProduct(
                m, tuple(rand_poly(rng, 3) for _ in range(m)),
                WF.product_affine((F(rng.randint(1, 3)),) + (F(0),) * m),
            )
            r = geom.weighted_scal(tp, 1, m + 2, check_positive=False)
            assert geom.is_affine_in_momenta(r, tp).affine


def test_flat_local_invariant():
    # plain products, affine A_j: weighted for every nu and positive f_b
    rng = random.Random(33)
    for m in (1, 2, 3):
        tp = geom.TwistedProduct(
            m, tuple(rand_poly(rng, 1) for _ in range(m)),
            WF.product_affine((F(1),) + (F(0),) * m),
        )
        for nu in (F(5, 2), F(3), F(4), F(7)):
            w = WF.product_affine(
                (F(rng.randint(3, 5)),)
                + tuple(rand_frac(rng, -1, 1) for _ in range(m))
            )
            r = geom.weighted_scal(tp, w, nu, check_positive=False)
            assert geom.is_affine_in_momenta(r, tp).affine


def test_bf_local_invariant():
    # common profile of degree <= m+2: weighted_scal(., f_q, m+2) affine
    rng = random.Random(34)
    for m in (2, 3):
        common = rand_poly(rng, m + 2)
        orth = geom.Orthotoric(m, (common,) * m)
        for _ in range(3):
            q = WF.polarized(
                (F(rng.randint(3, 6)),)
                + tuple(rand_frac(rng, -1, 1) for _ in range(m))
            )
            r = geom.weighted_scal(orth, q, m + 2, check_positive=False)
            assert geom.is_affine_in_momenta(r, orth).affine


def test_generic_orthotoric_not_affine():
    orth = geom.Orthotoric(2, (P([0, 0, 0, 0, 1]), P([0, 0, 0, 1])))
    r = geom.weighted_scal(orth, 1, 4, check_positive=False)
    assert not geom.is_affine_in_momenta(r, orth).affine


# -- error paths and guards -------------------------------------------------


def test_weight_form_mismatch():
    with pytest.raises(IncompatibleWeight):
        geom.weighted_scal(sphere(), WF.polarized((1, 0)), 3)
    orth = geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1])))
    with pytest.raises(IncompatibleWeight):
        geom.weighted_scal(orth, WF.product_affine((1, 0, 0)), 4)
    with pytest.raises(IncompatibleWeight):
        geom.weighted_scal(orth, WF.polarized((1, 0, 0, 0)), 4)


def test_nonpositive_weight_sampled():
    with pytest.raises(NonPositiveWeightSample):
        geom.weighted_scal(sphere(), WF.product_affine((0, 1)), 3)


def test_ambitoric_guards():
    amb = geom.Ambitoric(
        PaperQuadratic.of(3, F(1, 2), F(1, 4)), P([1, 0, 1]), P([1, 0, 1])
    )
    with pytest.raises(UnsupportedKind):
        geom.scal(amb)
    with pytest.raises(IncompatibleWeight):
        geom.weighted_scal(amb, 1, 3)
    neg = geom.Ambitoric(
        PaperQuadratic.of(3, F(1, 2), F(1, 4)), P([1, 0, 1]), P([1, 0, 1]),
        "-",
    )
    with pytest.raises(UnsupportedKind):
        geom.weighted_scal(neg, 1, 4)
    # the negative-sign metric still evaluates pointwise
    g = geom.evaluate_metric(neg, [1.0, 0.0, 0.2, 0.3])
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_degenerate_points():
    orth = geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1])))
    with pytest.raises(DegeneratePoint):
        geom.evaluate_metric(orth, [1.0, 1.0, 0.0, 0.0])
    amb = geom.Ambitoric(
        PaperQuadratic.of(3, F(1, 2), F(1, 4)), P([1, 0, 1]), P([1, 0, 1])
    )
    with pytest.raises(DegeneratePoint):
        geom.evaluate_metric(amb, [0.0, 1.0, 0.0, 0.0])
    tw = geom.TwistedProduct(1, (P([1, 0, -1]),), WF.product_affine((0, 1)))
    with pytest.raises(DegeneratePoint):
        geom.evaluate_metric(tw, [-0.5, 0.0])


def test_angle_basis_fallbacks():
    e1, e2 = geom.ambitoric_angle_basis(PaperQuadratic.of(3, F(1, 2), F(1, 4)))
    assert e1 == (F(-1, 2), F(-1, 8), F(0))
    # q2 = 0 and q constant both fall back to later ladder pairs
    e1, e2 = geom.ambitoric_angle_basis(PaperQuadratic.of(1, 0, 0))
    assert e1 == (F(1, 2), F(0), F(0)) and e2 == (F(0), F(1, 2), F(0))
    e1, e2 = geom.ambitoric_angle_basis(PaperQuadratic.of(0, 1, 0))
    assert e1 == (F(-1), F(0), F(0)) and e2 == (F(0), F(0), F(1))


def test_spd_at_probe_points():
    rng = random.Random(41)
    metrics = [
        sphere(),
        geom.TwistedProduct(
            2, (P([1, 0, F(-1, 2)]), P([F(3, 2), 0, -1])),
            WF.product_affine((2, F(1, 3), F(-1, 4))),
        ),
        geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1]))),
        geom.CalabiBundle1D(F(4), 1, F(3), F(1), P([1, 0, -1, F(1, 5)])),
    ]
    for metric in metrics:
        field = geom.to_oracle_field(metric)
        lo_hi = field.domain
        for _ in range(5):
            pt = [rng.uniform(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo))
                  for lo, hi in lo_hi]
            g = geom.evaluate_metric(metric, pt)
            assert np.allclose(g, g.T)
            assert np.all(np.linalg.eigvalsh(g) > 0)


# -- serialization ----------------------------------------------------------


def test_metric_json_round_trip():
    metrics = [
        sphere(),
        geom.TwistedProduct(
            2, (P([1, 0, -1]), P([2, 0, -1])),
            WF.product_affine((2, F(1, 3), F(-1, 4))),
        ),
        geom.Orthotoric(2, (P([1, 0, 1]), P([-1, 0, -1]))),
        geom.TwistedOrthotoric(
            2, (P([1, 0, 1]), P([-1, 0, -1])),
            WF.polarized((3, F(1, 2), F(1, 4))),
        ),
        geom.Ambitoric(
            PaperQuadratic.of(3, F(1, 2), F(1, 4)),
            P([1, 0, 1]), P([1, 0, 1]), "-",
        ),
        geom.CalabiBundle1D(F(4), 1, F(3), F(1), P([1, 0, -1])),
        geom.CalabiBundle1D(F(-4), 2, F(3), F(1), P([6, 1, -1]), P([4, 1])),
    ]
    for metric in metrics:
        j = geom.metric_to_json(metric)
        back = geom.metric_from_json(j)
        assert back == metric
        assert geom.metric_to_json(back) == j


def test_bad_parameters():
    with pytest.raises(BadParameters):
        geom.TwistedProduct(2, (P([1]),), WF.product_affine((1, 0, 0)))
    with pytest.raises(BadParameters):
        geom.Ambitoric(PaperQuadratic.of(0, 0, 0), P([1]), P([1]))
    with pytest.raises(BadParameters):
        WF("Quadratic", (1, 0), 1)
