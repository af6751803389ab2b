"""Finite-difference verification oracle.

Every symbolic curvature formula in this package is checked against plain
numerics: scalar curvature from central-difference Christoffel symbols,
Laplacian and gradient norm from divergence-form stencils, assembled into
the weighted scalar curvature

    Scal_{f,nu}(g) = f^2 Scal(g) - 2(nu - 1) f Lap_g f - nu (nu - 1) |df|^2_g.

The oracle knows nothing about the symbolic layer: it sees a metric only
as a callable from a coordinate point to a symmetric matrix, which is what
makes it an independent arbiter.

Sign conventions are pinned by two fixtures before any comparison runs:
the flat plane has scalar curvature 0, the unit round sphere (profile
A = 1 - z^2 in momentum-angle coordinates) has scalar curvature 2 and
Lap z = -A'(z) = 2z.  The Laplacian therefore carries the geometers'
minus sign: Lap f = -(1/sqrt(det g)) d_i(sqrt(det g) g^{ij} d_j f).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainBoundary, NonPositiveWeight, SingularMetric

DEFAULT_STEP = 1e-3
MARGIN_STEPS = 5.0  # recommended distance from the boundary, in steps


@dataclass
class CoordinateMetricField:
    """A coordinate metric for the oracle: dimension, matrix callable, and
    an optional box domain [(lo_1, hi_1), ...] used for margin checks."""

    dim: int
    g: Callable[[np.ndarray], np.ndarray]
    domain: Optional[Sequence] = None

    def matrix(self, point) -> np.ndarray:
        m = np.asarray(self.g(np.asarray(point, dtype=float)), dtype=float)
        if m.shape != (self.dim, self.dim):
            raise SingularMetric(
                f"metric callable returned shape {m.shape}, wanted "
                f"({self.dim}, {self.dim})"
            )
        if not np.all(np.isfinite(m)):
            raise SingularMetric("metric has non-finite entries at the point")
        return 0.5 * (m + m.T)

    def check_margin(self, point, step: float) -> None:
        if self.domain is None:
            return
        for x, (lo, hi) in zip(point, self.domain):
            if not (lo + 2 * step <= x <= hi - 2 * step):
                raise DomainBoundary(
                    f"coordinate {x} within 2 steps of [{lo}, {hi}]"
                )


@dataclass
class ScalarField:
    """A scalar function seen purely numerically."""

    f: Callable[[np.ndarray], float]

    def value(self, point) -> float:
        return float(self.f(np.asarray(point, dtype=float)))


def _inverse(m: np.ndarray) -> np.ndarray:
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(str(exc)) from exc
    if not np.all(np.isfinite(inv)):
        raise SingularMetric("metric inverse has non-finite entries")
    return inv


def metric_condition(field: CoordinateMetricField, point) -> float:
    """2-norm condition number of g at the point (tolerance scaling aid)."""
    return float(np.linalg.cond(field.matrix(point)))


def _christoffel(field: CoordinateMetricField, x: np.ndarray, h: float):
    """Gamma^k_{ij} at x by central differences of the metric entries."""
    n = field.dim
    g = field.matrix(x)
    ginv = _inverse(g)
    dg = np.empty((n, n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        dg[a] = (field.matrix(x + e) - field.matrix(x - e)) / (2 * h)
    # dg[a][i, j] = d_a g_{ij}
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for l in range(n):
                    s += ginv[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j])
                gamma[k, i, j] = 0.5 * s
    return gamma


def scal_fd(field: CoordinateMetricField, point, step: float = DEFAULT_STEP) -> float:
    """Scalar curvature at a point, entirely by finite differences.

    Christoffel symbols come from central differences of the metric; their
    derivatives from a second central difference; the Ricci tensor from

        R_{ij} = d_k Gamma^k_{ij} - d_j Gamma^k_{ik}
                 + Gamma^k_{kl} Gamma^l_{ij} - Gamma^k_{jl} Gamma^l_{ik},

    and the scalar curvature is the g-trace.  Second-order accurate.
    """
    _ensure_calibrated()
    return _scal_fd_raw(field, point, step)


def _scal_fd_raw(field, point, step):
    x = np.asarray(point, dtype=float)
    field.check_margin(x, step)
    n = field.dim
    h = step
    gamma0 = _christoffel(field, x, h)
    dgamma = np.empty((n, n, n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        dgamma[a] = (_christoffel(field, x + e, h)
                     - _christoffel(field, x - e, h)) / (2 * h)
    ric = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(n):
                s += dgamma[k][k, i, j] - dgamma[j][k, i, k]
                for l in range(n):
                    s += gamma0[k, k, l] * gamma0[l, i, j] \
                        - gamma0[k, j, l] * gamma0[l, i, k]
            ric[i, j] = s
    ginv = _inverse(field.matrix(x))
    return float(np.tensordot(ginv, ric))


def laplacian_fd(field: CoordinateMetricField, f: ScalarField, point,
                 step: float = DEFAULT_STEP) -> float:
    """Lap_g f = -(1/sqrt(det g)) d_i(sqrt(det g) g^{ij} d_j f).

    The leading minus makes Lap positive on the lowest sphere harmonics;
    concretely, on the unit round sphere Lap z = 2z.
    """
    _ensure_calibrated()
    x = np.asarray(point, dtype=float)
    field.check_margin(x, step)
    n = field.dim
    h = step

    def flux(y):
        # sqrt(det g) g^{ij} d_j f at y, as a vector
        g = field.matrix(y)
        det = np.linalg.det(g)
        if det <= 0:
            raise SingularMetric("metric determinant is not positive")
        ginv = _inverse(g)
        grad = np.empty(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            grad[j] = (f.value(y + e) - f.value(y - e)) / (2 * h)
        return np.sqrt(det) * (ginv @ grad)

    g = field.matrix(x)
    det = np.linalg.det(g)
    if det <= 0:
        raise SingularMetric("metric determinant is not positive")
    div = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        div += (flux(x + e)[i] - flux(x - e)[i]) / (2 * h)
    return float(-div / np.sqrt(det))


def grad_norm_fd(field: CoordinateMetricField, f: ScalarField, point,
                 step: float = DEFAULT_STEP) -> float:
    """|df|^2_g = g^{ij} d_i f d_j f by central differences."""
    _ensure_calibrated()
    x = np.asarray(point, dtype=float)
    field.check_margin(x, step)
    n = field.dim
    h = step
    grad = np.empty(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        grad[j] = (f.value(x + e) - f.value(x - e)) / (2 * h)
    ginv = _inverse(field.matrix(x))
    return float(grad @ ginv @ grad)


def weighted_scal_fd(field: CoordinateMetricField, f: ScalarField, nu,
                     point, step: float = DEFAULT_STEP) -> float:
    """The definitional assembly f^2 Scal - 2(nu-1) f Lap f - nu(nu-1)|df|^2."""
    fval = f.value(point)
    if fval <= 0:
        raise NonPositiveWeight(f"weight is {fval} at the probe point")
    nu = float(nu)
    return (fval * fval * scal_fd(field, point, step)
            - 2.0 * (nu - 1.0) * fval * laplacian_fd(field, f, point, step)
            - nu * (nu - 1.0) * grad_norm_fd(field, f, point, step))


def richardson(coarse: float, fine: float) -> float:
    """Second-order Richardson combination (4*fine - coarse)/3."""
    return (4.0 * fine - coarse) / 3.0


def invariance_probe(metric, twist, f_b, points, step: float = DEFAULT_STEP) -> float:
    """Max deviation of the twist identity over the probe points.

    For each point x the probe evaluates, purely by finite differences,

        Scal_{f_b, m+2}(g)(x)  -  f_a(x) * Scal_{f_btilde, m+2}(gtilde)(phi(x))

    where phi is the coordinate map of the twist, f_a its weight, and
    f_btilde the induced weight on the twisted side.  The identity says
    the difference vanishes; the return value is the largest |difference|.
    """
    from . import twist as twist_mod

    sides = twist_mod.invariance_sides(metric, twist, f_b)
    nu = sides["nu"]
    worst = 0.0
    for pt in points:
        left = weighted_scal_fd(sides["field"], sides["weight"], nu, pt, step)
        fa = sides["f_a"](np.asarray(pt, dtype=float))
        image = sides["map"](np.asarray(pt, dtype=float))
        right = weighted_scal_fd(
            sides["field_t"], sides["weight_t"], nu, image, step
        )
        worst = max(worst, abs(left - fa * right))
    return worst


# ---------------------------------------------------------------------------
# fixture calibration
# ---------------------------------------------------------------------------

_CALIBRATED = False


def _ensure_calibrated() -> None:
    """Pin the sign conventions against two closed-form fixtures.

    Runs once per process: the flat plane must give scalar curvature 0 and
    the unit round sphere (g = dz^2/A + A dt^2 with A = 1 - z^2) must give
    2, with Lap z = 2z.  A failure here means the stencils or the index
    conventions are wrong, so it raises instead of letting comparisons run.
    """
    global _CALIBRATED
    if _CALIBRATED:
        return
    _CALIBRATED = True  # set first so the fixture calls do not recurse
    flat = CoordinateMetricField(2, lambda x: np.eye(2))
    s = _scal_fd_raw(flat, [0.3, -0.2], DEFAULT_STEP)
    if abs(s) > 1e-9:
        _fail_calibration(f"flat plane gave scalar curvature {s}")

    def sphere(x):
        a = 1.0 - x[0] * x[0]
        return np.array([[1.0 / a, 0.0], [0.0, a]])

    field = CoordinateMetricField(2, sphere, domain=[(-1.0, 1.0), (-4.0, 4.0)])
    s = _scal_fd_raw(field, [0.3, 0.1], DEFAULT_STEP)
    if abs(s - 2.0) > 1e-6:
        _fail_calibration(f"round sphere gave scalar curvature {s}")
    z = ScalarField(lambda x: x[0])
    lap = laplacian_fd(field, z, [0.5, 0.0])
    if abs(lap - 1.0) > 1e-6:
        _fail_calibration(f"round sphere gave Lap z = {lap} at z = 0.5")


def _fail_calibration(msg: str) -> None:
    global _CALIBRATED
    _CALIBRATED = False
    raise SingularMetric(f"oracle calibration failed: {msg}")
