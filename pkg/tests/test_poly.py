"""Exact polynomial layer: arithmetic, Mobius transforms, Sturm positivity,
pairings and brackets, multivariate rational expressions, linear algebra."""

import random
from fractions import Fraction

import pytest

from crtwist.errors import (
    BadParameters,
    DegeneratePoint,
    SchemaError,
    SingularMap,
    SingularSystem,
    ZeroPolynomial,
)
from crtwist.poly import (
    MultiPoly,
    PaperQuadratic,
    Polynomial,
    RationalExpr,
    arith,
    elementary_symmetric,
    express_in_span,
    isolate_roots,
    mobius_transform,
    poisson_bracket,
    polynomial_from_json,
    polynomial_to_json,
    positive_on_open_interval,
    quadratic_pairing,
    rat,
    rat_str,
    solve_square,
    squarefree_part,
    transvectant2,
)

F = Fraction


def P(*coeffs):
    return Polynomial.of(coeffs)


def rand_poly(rng, deg, var="z", span=6):
    return Polynomial.of(
        [F(rng.randint(-span, span), rng.randint(1, 4)) for _ in range(deg + 1)],
        var,
    )


# -- basic arithmetic -------------------------------------------------------


def test_arith_frozen_examples():
    one_minus_z2 = P(1, 0, -1)
    assert arith(one_minus_z2, one_minus_z2, "derive") == P(0, -2)
    assert arith(P(1, 1), P(-1, 1), "mul") == P(-1, 0, 1)
    assert arith(P(0, 0, 1), P(1, 1), "compose") == P(1, 2, 1)


def test_divmod_exact():
    rng = random.Random(7)
    for _ in range(25):
        a = rand_poly(rng, rng.randint(0, 6))
        b = rand_poly(rng, rng.randint(0, 4))
        if b.is_zero:
            continue
        q, r = divmod(a, b)
        assert q * b + r == a
        assert r.is_zero or r.degree() < b.degree()


def test_evaluation_and_composition():
    p = P(2, -3, 1)  # 2 - 3z + z^2
    assert p(F(1, 2)) == F(2) - F(3, 2) + F(1, 4)
    assert abs(p(0.5) - 0.75) < 1e-15
    inner = P(1, 1)
    assert p.compose(inner)(F(3)) == p(F(4))


def test_variable_compatibility():
    with pytest.raises(BadParameters):
        Polynomial.of([0, 1], "z") + Polynomial.of([0, 1], "x")
    # constants are compatible with anything
    assert (Polynomial.constant(2, "x") + Polynomial.of([0, 1], "z")).var == "z"


# -- Mobius transforms ------------------------------------------------------


def test_mobius_identity_and_inversion():
    p = P(1, 0, -1)
    assert mobius_transform(p, (1, 0, 0, 1), 4) == p
    assert mobius_transform(Polynomial.x(), (0, 1, 1, 0), 1) == P(1)


def test_mobius_weight3_example():
    # z = (2 zt + 1)/(zt + 2) applied to 1 - z^2 with weight 3
    q = mobius_transform(P(1, 0, -1), (2, 1, 1, 2), 3)
    assert q(F(0)) == 6  # (0 + 2)^3 * (1 - (1/2)^2) = 8 * 3/4
    rng = random.Random(1)
    for _ in range(10):
        t = F(rng.randint(-8, 8), rng.randint(1, 5))
        if t == -2:
            continue
        src = (2 * t + 1) / (t + 2)
        assert q(t) == (t + 2) ** 3 * (1 - src * src)


def test_mobius_round_trip_is_det_power():
    rng = random.Random(3)
    for _ in range(20):
        d = rng.randint(1, 5)
        p = rand_poly(rng, rng.randint(0, d))
        while True:
            a, b, c, e = (F(rng.randint(-4, 4)) for _ in range(4))
            if a * e - b * c != 0:
                break
        det = a * e - b * c
        # the inverse up to scale (adjugate) keeps entries rational and
        # turns the round trip into multiplication by det^d
        q = mobius_transform(mobius_transform(p, (a, b, c, e), d), (e, -b, -c, a), d)
        assert q == det ** d * p


def test_mobius_errors():
    with pytest.raises(SingularMap):
        mobius_transform(P(1, 1), (1, 2, 2, 4), 3)
    with pytest.raises(BadParameters):
        mobius_transform(P(1, 0, 0, 1), (1, 0, 0, 1), 2)


# -- positivity -------------------------------------------------------------


def test_positivity_frozen_examples():
    assert positive_on_open_interval(P(1, 0, -1), -1, 1).positive
    v = positive_on_open_interval(Polynomial.x(), -1, 1)
    assert not v.positive
    assert v.root_intervals == ((F(0), F(0)),)
    assert v.kind == "HasRootAt"


def test_positivity_endpoint_deflation():
    # (1 - z^2)^3 * (z^2 + 2) vanishes to high order at both ends
    p = P(1, 0, -1) ** 3 * P(2, 0, 1)
    assert positive_on_open_interval(p, -1, 1).positive
    # an interior double root is not strictly positive
    q = P(1, 0, -1) * (Polynomial.x() - F(1, 3)) ** 2
    v = positive_on_open_interval(q, -1, 1)
    assert not v.positive
    lo, hi = v.root_intervals[0]
    assert lo <= F(1, 3) <= hi


def test_positivity_negative_constantish():
    v = positive_on_open_interval(P(-2, 0, 0, -1), -1, 1)
    assert not v.positive


def test_positivity_zero_polynomial():
    with pytest.raises(ZeroPolynomial):
        positive_on_open_interval(Polynomial.zero(), -1, 1)


def test_sturm_agrees_with_dense_sampling():
    rng = random.Random(11)
    lo, hi = F(-1), F(1)
    for _ in range(40):
        p = rand_poly(rng, rng.randint(1, 6))
        if p.is_zero or p(lo) == 0 or p(hi) == 0:
            continue
        v = positive_on_open_interval(p, lo, hi)
        samples = [lo + (hi - lo) * F(k, 1000) for k in range(1, 1000)]
        sampled_positive = all(p(x) > 0 for x in samples)
        if v.positive:
            assert sampled_positive
        else:
            # certify the failure exactly rather than trusting the grid:
            # each reported interval really contains a root
            q = squarefree_part(p)
            if v.root_intervals:
                for a, b in v.root_intervals:
                    assert q(a) == 0 if a == b else q(a) * q(b) < 0
            else:
                assert p((lo + hi) / 2) < 0


def test_isolate_roots_multiplicities():
    # roots at -1/2 (double) and 2/3 (simple) inside (-1, 1)
    x = Polynomial.x()
    p = (x + F(1, 2)) ** 2 * (x - F(2, 3)) * P(5, 0, 1)
    ivs = isolate_roots(p, -1, 1)
    assert len(ivs) == 2
    (a1, b1), (a2, b2) = ivs
    assert a1 <= F(-1, 2) <= b1 and a2 <= F(2, 3) <= b2
    assert b1 < a2


# -- pairing, bracket, transvectant ----------------------------------------


def test_quadratic_pairing_frozen():
    one = PaperQuadratic.of(1, 0, 0)
    xsq = PaperQuadratic.of(0, 0, 1)
    x = PaperQuadratic.of(0, F(1, 2), 0)
    x2m1 = PaperQuadratic.of(-1, 0, 1)
    assert quadratic_pairing(one, xsq) == 1
    assert quadratic_pairing(x2m1, x) == 0
    # harmonic normalization: the middle term carries the factor 2, so a
    # quadratic with a double root pairs with itself to -1/2, not -1/4
    assert quadratic_pairing(x, x) == F(-1, 2)


def test_quadratic_pairing_symmetric_bilinear():
    rng = random.Random(5)
    for _ in range(20):
        p, q, r = (
            PaperQuadratic.of(*(F(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(3)))
            for _ in range(3)
        )
        s = F(rng.randint(-4, 4), rng.randint(1, 3))
        assert quadratic_pairing(p, q) == quadratic_pairing(q, p)
        pq_plus = PaperQuadratic.of(
            p.q0 + s * r.q0, p.q1 + s * r.q1, p.q2 + s * r.q2
        )
        assert quadratic_pairing(pq_plus, q) == quadratic_pairing(
            p, q
        ) + s * quadratic_pairing(r, q)


def test_pairing_detects_harmonic_roots():
    # p with roots u, v and q with roots s, t harmonically separate iff
    # 2(uv + st) = (u + v)(s + t); pick a concrete harmonic quadruple
    u, v, s, t = F(0), F(2), F(3), F(3, 2)
    assert 2 * (u * v + s * t) == (u + v) * (s + t)
    p = PaperQuadratic.from_polynomial((Polynomial.x() - u) * (Polynomial.x() - v))
    q = PaperQuadratic.from_polynomial((Polynomial.x() - s) * (Polynomial.x() - t))
    assert quadratic_pairing(p, q) == 0


def test_poisson_bracket_frozen():
    x = Polynomial.x("x")
    assert poisson_bracket(x, Polynomial.constant(1, "x")) == Polynomial.constant(1, "x")
    assert poisson_bracket(x * x, x * x).is_zero
    assert poisson_bracket(x * x, x) == x * x


def test_poisson_bracket_antisymmetry_and_leibniz():
    rng = random.Random(9)
    for _ in range(20):
        p = rand_poly(rng, rng.randint(0, 3), "x")
        q = rand_poly(rng, rng.randint(0, 3), "x")
        r = rand_poly(rng, rng.randint(0, 3), "x")
        assert poisson_bracket(p, q) == -poisson_bracket(q, p)
        # literal expansion: {p, qr} = {p,q} r + q {p,r} - p' q r
        lhs = poisson_bracket(p, q * r)
        rhs = poisson_bracket(p, q) * r + q * poisson_bracket(p, r) \
            - p.derivative() * q * r
        assert lhs == rhs


def test_bracket_of_quadratics_is_quadratic():
    rng = random.Random(13)
    for _ in range(20):
        p = rand_poly(rng, 2, "x")
        q = rand_poly(rng, 2, "x")
        assert poisson_bracket(p, q).degree() <= 2


def test_transvectant_frozen():
    x = Polynomial.x("x")
    one = Polynomial.constant(1, "x")
    assert transvectant2(one, x ** 4, "verbatim") == 12 * x * x
    # p = x^2, P = 1: the verbatim middle term -3 p' P = -6x survives, the
    # alternate one -3 p' P' vanishes with P'
    assert transvectant2(x * x, one, "verbatim") == 12 - 6 * x
    assert transvectant2(x * x, one, "alternate") == Polynomial.constant(12, "x")
    assert transvectant2(x, x * x, "verbatim") == 2 * x - 3 * x * x
    assert transvectant2(x, x * x, "alternate") == -4 * x
    with pytest.raises(BadParameters):
        transvectant2(x, x, "classic")


def test_alternate_transvectant_is_quadratic():
    rng = random.Random(17)
    for _ in range(20):
        p = rand_poly(rng, 2, "x")
        quartic = rand_poly(rng, 4, "x")
        assert transvectant2(p, quartic, "alternate").degree() <= 2


# -- PaperQuadratic conversions --------------------------------------------


def test_paper_quadratic_round_trip():
    q = PaperQuadratic.of(3, F(-1, 2), F(2, 5))
    p = q.to_polynomial()
    assert p == Polynomial.of([3, -1, F(2, 5)], "x")
    assert PaperQuadratic.from_polynomial(p) == q
    assert q(F(2)) == q.polarized(F(2), F(2))
    with pytest.raises(BadParameters):
        PaperQuadratic.from_polynomial(Polynomial.of([0, 0, 0, 1], "x"))


# -- multivariate layer -----------------------------------------------------


def test_multipoly_basics():
    x = MultiPoly.variable(0, 2)
    y = MultiPoly.variable(1, 2)
    p = (x + y) ** 2
    assert p.evaluate([F(1), F(2)]) == 9
    assert p.derivative(0) == 2 * (x + y)
    assert p.coeff_of(0, 1) == 2 * y
    assert p.degree_in(1) == 2
    assert (p - x * x - 2 * x * y - y * y).is_zero


def test_multipoly_float_evaluation():
    x = MultiPoly.variable(0, 1)
    p = x ** 3 - 2 * x
    assert abs(p.evaluate([0.5]) - (0.125 - 1.0)) < 1e-15


def test_multipoly_substitute():
    x = MultiPoly.variable(0, 2)
    y = MultiPoly.variable(1, 2)
    p = x * y + x
    sub = p.substitute([y, x])  # swap the variables
    assert sub == x * y + y


def test_elementary_symmetric():
    s1 = elementary_symmetric(1, 3)
    s2 = elementary_symmetric(2, 3)
    s3 = elementary_symmetric(3, 3)
    pt = [F(1), F(2), F(3)]
    assert s1.evaluate(pt) == 6
    assert s2.evaluate(pt) == 11
    assert s3.evaluate(pt) == 6
    assert elementary_symmetric(0, 3).evaluate(pt) == 1


def test_rational_expr_algebra():
    x = MultiPoly.variable(0, 2)
    y = MultiPoly.variable(1, 2)
    r = RationalExpr(x * x - y * y, x - y)
    s = RationalExpr.from_poly(x + y)
    assert r.equals(s)  # equality by cross multiplication, no gcd needed
    assert (r - s).is_zero is False or (r - s).equals(RationalExpr.constant(0, 2))
    t = r / s
    assert t.equals(RationalExpr.constant(1, 2))
    assert (r * s).equals(RationalExpr.from_poly((x + y) ** 2))
    assert r.evaluate([F(3), F(1)]) == 4


def test_rational_expr_derivative_and_poles():
    x = MultiPoly.variable(0, 1)
    r = RationalExpr(MultiPoly.constant(1, 1), x)  # 1/x
    dr = r.derivative(0)  # -1/x^2
    assert dr.equals(RationalExpr(MultiPoly.constant(-1, 1), x * x))
    with pytest.raises(DegeneratePoint):
        r.evaluate([F(0)])
    with pytest.raises(ZeroPolynomial):
        RationalExpr(x, MultiPoly.constant(0, 1))


def test_rational_expr_monomial_normalization():
    x = MultiPoly.variable(0, 1)
    r = RationalExpr(x * x, x)  # common monomial factor cancels
    assert r.num == x and r.den.is_constant()


# -- exact linear algebra ---------------------------------------------------


def test_solve_square_random():
    rng = random.Random(19)
    for _ in range(15):
        n = rng.randint(1, 5)
        rows = [[F(rng.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
        x = [F(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(n)]
        rhs = [sum(r[j] * x[j] for j in range(n)) for r in rows]
        try:
            sol = solve_square(rows, rhs)
        except SingularSystem:
            continue
        assert sol == x


def test_solve_square_singular():
    with pytest.raises(SingularSystem):
        solve_square([[1, 2], [2, 4]], [1, 3])
    with pytest.raises(SingularSystem):
        solve_square([[1, 2], [2, 4]], [1, 2])  # rank deficient, consistent


def test_express_in_span():
    x = MultiPoly.variable(0, 2)
    y = MultiPoly.variable(1, 2)
    one = MultiPoly.constant(1, 2)
    target = 3 * x - 2 * y + one * F(1, 2)
    coeffs = express_in_span(target, [one, x, y])
    assert coeffs == [F(1, 2), F(3), F(-2)]
    assert express_in_span(x * y, [one, x, y]) is None


# -- JSON -------------------------------------------------------------------


def test_polynomial_json_round_trip():
    p = Polynomial.of([1, 0, -1], "z")
    obj = polynomial_to_json(p)
    assert obj == {"var": "z", "coeffs": ["1", "0", "-1"]}
    assert polynomial_from_json(obj) == p
    q = Polynomial.of([F(1, 3), F(-2, 7)], "x")
    assert polynomial_from_json(polynomial_to_json(q)) == q
    with pytest.raises(SchemaError):
        polynomial_from_json({"var": "z"})
    with pytest.raises(SchemaError):
        polynomial_from_json({"var": "z", "coeffs": ["1/0"]})


def test_rat_helpers():
    assert rat("3/4") == F(3, 4)
    assert rat_str(F(-5, 3)) == "-5/3"
    assert rat_str(F(4, 2)) == "2"
    with pytest.raises(BadParameters):
        rat(0.5)
