"""Tests for the ruled-surface quartic, exact stability decisions, join
parameters, the critical scan, and the join correspondence round trip."""

import random
from fractions import Fraction as F
from types import SimpleNamespace

import pytest

from crtwist import geom, oracle, ruled
from crtwist.errors import BadParameters, BadRatio, Mismatch, NotCoprime
from crtwist.extremal import solve_product_quintic, verify
from crtwist.poly import Polynomial, positive_on_open_interval

P = Polynomial.of
WF = geom.WeightFunction


def rand_frac(rng, lo=-2, hi=2, den=8):
    return F(rng.randint(lo * den, hi * den), den)


def rand_spec(rng):
    genus = rng.randint(0, 3)
    ell = rng.randint(1, 4)
    a = 1 + F(rng.randint(1, 24), 8)
    style = rng.random()
    if style < 0.25:
        b = a
    elif style < 0.6:
        b = 1 + F(rng.randint(1, 24), 8)
    else:
        b = -1 - F(rng.randint(1, 24), 8)
    return ruled.RuledSurfaceSpec(genus, ell, a, b)


# -- the quartic: frozen examples -------------------------------------------


def test_pab_frozen_quartic():
    spec = ruled.RuledSurfaceSpec(0, 2, F(3), F(2))
    assert spec.s == 1
    assert spec.c == 5
    expected = P([3, 1, -3, -1]) + P([1, 0, -2, 0, 1]) * F(19, 148)
    assert ruled.pab_polynomial(spec) == expected


def test_pab_equal_parameters_is_cubic():
    spec = ruled.RuledSurfaceSpec(1, 1, F(3, 2), F(3, 2))
    assert ruled.pab_polynomial(spec) == P([F(3, 2), 1, F(-3, 2), -1])
    with pytest.raises(BadParameters):
        spec.c


def test_endpoint_identities_seeded_grid():
    rng = random.Random(71)
    for _ in range(60):
        spec = rand_spec(rng)
        Pq = ruled.pab_polynomial(spec)
        dP = Pq.derivative()
        assert Pq(F(-1)) == 0 and Pq(F(1)) == 0
        assert dP(F(-1)) == 2 * (spec.a - 1)
        assert dP(F(1)) == -2 * (spec.a + 1)


def test_spec_validation_and_kappa():
    with pytest.raises(BadParameters):
        ruled.RuledSurfaceSpec(-1, 1, F(2), F(2))
    with pytest.raises(BadParameters):
        ruled.RuledSurfaceSpec(0, 0, F(2), F(2))
    with pytest.raises(BadParameters):
        ruled.RuledSurfaceSpec(0, 1, F(1), F(2))
    with pytest.raises(BadParameters):
        ruled.RuledSurfaceSpec(0, 1, F(2), F(1, 2))
    spec = ruled.RuledSurfaceSpec(0, 2, F(3), F(2))
    assert spec.kappa == F(76, 3)


# -- stability decisions ----------------------------------------------------


def test_decide_existence_frozen_stable():
    b = ruled.rationalize_critical_b(F(21, 20))
    verdict = ruled.decide_existence(ruled.RuledSurfaceSpec(2, 1, F(21, 20), b))
    assert verdict.status == "Stable" and bool(verdict)
    assert all(verdict.boundary_checks)
    assert verdict.root_intervals == ()


def test_decide_existence_frozen_unstable():
    b = ruled.rationalize_critical_b(F(101, 100))
    verdict = ruled.decide_existence(
        ruled.RuledSurfaceSpec(2, 1, F(101, 100), b)
    )
    assert verdict.status == "Unstable" and not verdict
    assert all(verdict.boundary_checks)
    assert verdict.root_intervals
    for lo, hi in verdict.root_intervals:
        assert -1 < lo <= hi < 1


def test_decide_existence_exact_double_root():
    # c = -3/2, s = -33/4, a = 5/4 collapse the quartic to
    # (1 - z^2)(z + 1/2)^2: a tangential zero, hence Unstable, and the
    # double-root consistency branch runs (2cs + 3c^2 + 2ac + 1 = 115/4).
    spec = ruled.RuledSurfaceSpec(34, 8, F(5, 4), F(7, 2))
    assert spec.c == F(-3, 2) and spec.s == F(-33, 4)
    assert ruled.pab_polynomial(spec) == P([F(1, 4), 1, F(3, 4), -1, -1])
    verdict = ruled.decide_existence(spec)
    assert verdict.status == "Unstable"
    assert verdict.root_intervals == ((F(-1, 2), F(-1, 2)),)


def test_decide_existence_low_genus_samples_stable():
    for genus in (0, 1):
        for a, b in ((F(5, 4), F(5, 4)), (F(5, 4), F(10)),
                     (F(10), F(5, 4)), (F(10), F(10))):
            for ell in (1, 3):
                spec = ruled.RuledSurfaceSpec(genus, ell, a, b)
                assert ruled.decide_existence(spec).status == "Stable"


def test_decide_matches_positivity_and_sampling():
    rng = random.Random(72)
    import numpy as np

    zs = np.linspace(-0.999, 0.999, 400)
    for _ in range(25):
        spec = rand_spec(rng)
        Pq = ruled.pab_polynomial(spec)
        verdict = ruled.decide_existence(spec)
        pos = positive_on_open_interval(Pq, F(-1), F(1))
        assert bool(verdict) == pos.positive
        vals = np.polyval([float(c) for c in reversed(Pq.coeffs)], zs)
        if verdict.status == "Stable":
            assert vals.min() > 0
        else:
            assert vals.min() < 1e-6
            for lo, hi in verdict.root_intervals:
                assert -1 < lo <= hi < 1


# -- join parameters --------------------------------------------------------


def test_join_parameters_frozen():
    assert ruled.join_parameters(ruled.SasakiJoinSpec(1, 3, 2)) == \
        ruled.JoinParameters(1, 3, F(2))
    assert ruled.join_parameters(ruled.SasakiJoinSpec(2, 5, 1)) == \
        ruled.JoinParameters(3, 5, F(4))
    assert ruled.join_parameters(ruled.SasakiJoinSpec(3, 7, 2)) == \
        ruled.JoinParameters(1, 7, F(4, 3))


def test_join_parameter_guards():
    with pytest.raises(NotCoprime):
        ruled.SasakiJoinSpec(2, 4, 1)
    with pytest.raises(BadRatio):
        ruled.SasakiJoinSpec(1, 2, 2)
    with pytest.raises(BadRatio):
        ruled.SasakiJoinSpec(3, 2, 1)
    with pytest.raises(BadParameters):
        ruled.SasakiJoinSpec(1, 3, 0)
    with pytest.raises(BadParameters):
        ruled.SasakiJoinSpec(0, 3, 1)


# -- critical scan ----------------------------------------------------------


def test_rationalize_critical_b():
    assert ruled.rationalize_critical_b(F(5, 4)) == 2
    b = ruled.rationalize_critical_b(F(2))
    assert abs(b * b - 4 * b + 1) < F(1, 10 ** 9)
    with pytest.raises(BadParameters):
        ruled.rationalize_critical_b(F(1))


def test_critical_scan_genus_two():
    grid = [F(100 + i, 100) for i in range(1, 9)]
    result = ruled.critical_scan(2, 1, grid)
    statuses = [row.status for row in result.rows]
    assert statuses[0] == "Unstable"
    assert statuses[-1] == "Stable"
    assert "Borderline" not in statuses
    # single transition from the unstable window to stability
    first_stable = statuses.index("Stable")
    assert all(s == "Unstable" for s in statuses[:first_stable])
    assert all(s == "Stable" for s in statuses[first_stable:])
    assert result.largest_unstable_a is not None
    assert 1 < result.largest_unstable_a <= F(6, 5)
    row = result.rows[0]
    assert row.leftmost_root is not None
    lo, hi = row.leftmost_root
    assert -1 < lo <= hi < 1
    stable_rows = [r for r in result.rows if r.status == "Stable"]
    assert all(r.leftmost_root is None for r in stable_rows)


def test_critical_scan_determinism_and_threads():
    grid = [F(100 + i, 100) for i in range(1, 9)]
    base = ruled.critical_scan(2, 1, grid)
    assert ruled.critical_scan(2, 1, grid, threads=3) == base
    coarse = ruled.critical_scan(2, 1, grid, bound=10 ** 4)
    for fine_row, coarse_row in zip(base.rows, coarse.rows):
        if "Borderline" not in (fine_row.status, coarse_row.status):
            assert fine_row.status == coarse_row.status


def test_critical_scan_borderline_flag():
    # walk the grid parameter toward the stability transition; once the
    # exact margin of the rationalized row is inside the guard band the
    # scan must refuse to decide
    lo, hi = F(101, 100), F(21, 20)
    row = None
    for _ in range(60):
        mid = (lo + hi) / 2
        r = ruled.critical_scan(2, 1, [mid]).rows[0]
        if r.status == "Borderline":
            row = r
            break
        if r.status == "Unstable":
            lo = mid
        else:
            hi = mid
    assert row is not None
    assert row.leftmost_root is None


def test_critical_scan_guards():
    with pytest.raises(BadParameters):
        ruled.critical_scan(1, 1, [F(3, 2)])


# -- join correspondence ----------------------------------------------------


def test_join_correspondence_frozen_equal_parameters():
    spec = ruled.RuledSurfaceSpec(0, 2, F(2), F(2))
    j = ruled.SasakiJoinSpec(1, 3, 2)
    report = ruled.join_correspondence_check(spec, j)
    assert report.twisted_profile == P([4, -2, -4, 2])
    assert report.weights == (1, 3)
    assert report.slopes == (F(12), F(-4))
    assert report.product_offset is None
    assert report.quintic_matched is None


def test_join_correspondence_quintic_match():
    spec = ruled.RuledSurfaceSpec(2, 1, F(5), F(2))
    j = ruled.SasakiJoinSpec(1, 3, 1)
    report = ruled.join_correspondence_check(spec, j)
    assert report.product_offset == 3
    assert report.quintic_matched is True
    assert report.slopes == (F(12), F(-8))
    sol = solve_product_quintic(2, F(-4), F(3), values=(0, 0),
                                slopes=(F(12), F(-8)))
    assert report.twisted_profile == sol.A
    # the transported profile really is an extremal product profile
    product = geom.CalabiBundle1D(F(-4), 1, F(1), F(0),
                                  report.twisted_profile)
    assert verify(product, (3, 1), 4).is_extremal


def test_join_correspondence_guards():
    spec = ruled.RuledSurfaceSpec(0, 2, F(5), F(2))
    with pytest.raises(BadParameters):
        ruled.join_correspondence_check(spec, ruled.SasakiJoinSpec(1, 3, 1))
    spec2 = ruled.RuledSurfaceSpec(0, 2, F(2), F(2))
    with pytest.raises(BadParameters):
        ruled.join_correspondence_check(spec2, ruled.SasakiJoinSpec(1, 4, 2))


def test_join_correspondence_mismatch_detected():
    # consistent (ell, a) but corrupted weights: the endpoint slopes of
    # the transported profile cannot match and the check must say so
    spec = ruled.RuledSurfaceSpec(0, 2, F(2), F(2))
    fake = SimpleNamespace(k=1, n=5, ell=2, w_plus=5, w_minus=3, a=F(2))
    with pytest.raises(Mismatch):
        ruled.join_correspondence_check(spec, fake)


# -- the bundle metric ------------------------------------------------------


def test_calabi_bundle_is_weighted_extremal():
    spec = ruled.RuledSurfaceSpec(0, 2, F(3), F(2))
    bundle = ruled.calabi_bundle(spec)
    assert bundle.base_scal == 4 and bundle.d == 1
    assert (bundle.a0, bundle.a1) == (F(6), F(2))
    v = verify(bundle, (spec.b, 1), 4)
    assert v.is_extremal
    spec2 = ruled.RuledSurfaceSpec(2, 1, F(5), F(2))
    assert verify(ruled.calabi_bundle(spec2), (2, 1), 4).is_extremal


def test_calabi_bundle_oracle_probe():
    spec = ruled.RuledSurfaceSpec(0, 2, F(3), F(2))
    bundle = ruled.calabi_bundle(spec)
    c = verify(bundle, (spec.b, 1), 4).c
    field = geom.to_oracle_field(bundle)
    wfield = geom.weight_scalar_field(
        bundle, WF.product_affine((spec.b, 1)))
    rng = random.Random(73)
    for _ in range(3):
        pt = [rng.uniform(lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo))
              for lo, hi in field.domain]
        fd = oracle.weighted_scal_fd(field, wfield, 4, pt, step=1.5e-4)
        sym = float(c[0]) + float(c[1]) * pt[2]
        assert abs(fd - sym) / max(1.0, abs(sym)) < 1e-5
