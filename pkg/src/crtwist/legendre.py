"""The projectively invariant Legendre transform of symplectic potentials.

A symplectic potential u lives on an affine chart z = (1, z_1, ..., z_m)
of P(h*).  Its differential lift is the h-valued function

    L(u) = (u - sum_j z_j du/dz_j, du/dz_1, ..., du/dz_m),

characterized by the envelope identities <z, L(u)> = u and
<z, dL(u)> = 0; it depends only on the point, not on the chart.  The
modified lift L_a(u) instead satisfies <z, dL_a(u)> = 2a (pairing against
the chart differentials), which in coordinates adds
2(sum_j a_j z_j, -a_1, ..., -a_m) to L(u); it produces the cone metric
of the Sasaki structure xi_a when Hess(u) is nondegenerate and <a, z>
does not vanish.

For a toric Riemann surface with profile A the potential is the integral

    u(z_1) = int^{z_1} (z_1 - x)/A(x) dx,

whose derivative is int dx/A and whose hessian is exactly 1/A(z_1).  The
basepoint is a free choice: u is only defined modulo affine functions,
which the hessian and all downstream geometry kill.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    BadParameters,
    DegenerateHessian,
    DomainBoundary,
)
from .geom import AffineChart, Profile1D
from .poly import Polynomial, rat

FD_STEP = 1e-4
QUAD_TOL = 1e-12


@dataclass(frozen=True)
class Profile1DIntegral:
    """u(z_1) = int_b^{z_1} (z_1 - x)/A(x) dx for a profile polynomial A
    without roots between the basepoint b and the evaluation point."""

    A: Polynomial
    basepoint: Fraction

    def __post_init__(self):
        object.__setattr__(self, "basepoint", rat(self.basepoint))


@dataclass(frozen=True)
class NumericPotential:
    """A numeric potential: u(zvec) with an optional analytic gradient."""

    fn: Callable
    grad: Optional[Callable] = None


Representation = Union[Profile1DIntegral, NumericPotential]


@dataclass(frozen=True)
class PotentialFunction:
    representation: Representation
    chart: AffineChart

    @property
    def m(self) -> int:
        return self.chart.basis_dim - 1


def potential_from_profile(metric: Profile1D,
                           basepoint=None) -> PotentialFunction:
    """The symplectic potential of a Profile1D metric; the basepoint
    defaults to the interval midpoint."""
    if basepoint is None:
        lo, hi = metric.interval
        basepoint = (lo + hi) / 2
    return PotentialFunction(
        Profile1DIntegral(metric.A, rat(basepoint)),
        AffineChart(0, 2),
    )


def numeric_potential(fn: Callable, m: int,
                      grad: Optional[Callable] = None) -> PotentialFunction:
    return PotentialFunction(NumericPotential(fn, grad), AffineChart(0, m + 1))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _gl_panel(f, lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * sum(
        w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS)
    )


def adaptive_quadrature(f, lo: float, hi: float,
                        tol: float = QUAD_TOL, depth: int = 48) -> float:
    """Adaptive Gauss-Legendre integration to absolute tolerance tol."""
    if lo == hi:
        return 0.0
    whole = _gl_panel(f, lo, hi)
    return _adapt(f, lo, hi, whole, tol, depth)


def _adapt(f, lo, hi, whole, tol, depth) -> float:
    mid = 0.5 * (lo + hi)
    left = _gl_panel(f, lo, mid)
    right = _gl_panel(f, mid, hi)
    if abs(left + right - whole) <= tol:
        return left + right
    if depth == 0:
        raise DomainBoundary(
            f"integral fails to converge near [{lo}, {hi}];"
            " the integrand is not resolvable on this path"
        )
    return (_adapt(f, lo, mid, left, tol / 2, depth - 1)
            + _adapt(f, mid, hi, right, tol / 2, depth - 1))


# ---------------------------------------------------------------------------
# evaluation of potentials
# ---------------------------------------------------------------------------


def _profile_value_at(A: Polynomial, x: float) -> float:
    out = 0.0
    for c in reversed(A.coeffs):
        out = out * x + float(c)
    return out


def _check_profile_path(A: Polynomial, b: float, z: float) -> None:
    lo, hi = (b, z) if b <= z else (z, b)
    vals = [_profile_value_at(A, lo + (hi - lo) * k / 32.0) for k in range(33)]
    if min(abs(v) for v in vals) < 1e-12 or min(vals) * max(vals) <= 0:
        raise DomainBoundary(
            "profile vanishes on the integration path"
            f" between {lo} and {hi}"
        )


def potential_value(u: PotentialFunction, point: Sequence) -> float:
    rep = u.representation
    pt = [float(v) for v in point]
    if isinstance(rep, Profile1DIntegral):
        z = pt[0]
        b = float(rep.basepoint)
        _check_profile_path(rep.A, b, z)
        return adaptive_quadrature(
            lambda x: (z - x) / _profile_value_at(rep.A, x), b, z
        )
    return float(rep.fn(pt))


def potential_gradient(u: PotentialFunction, point: Sequence) -> np.ndarray:
    rep = u.representation
    pt = [float(v) for v in point]
    if isinstance(rep, Profile1DIntegral):
        z = pt[0]
        b = float(rep.basepoint)
        _check_profile_path(rep.A, b, z)
        val = adaptive_quadrature(
            lambda x: 1.0 / _profile_value_at(rep.A, x), b, z
        )
        return np.array([val])
    if rep.grad is not None:
        return np.asarray([float(v) for v in rep.grad(pt)])
    out = np.zeros(len(pt))
    for i in range(len(pt)):
        hp = list(pt)
        hm = list(pt)
        hp[i] += FD_STEP
        hm[i] -= FD_STEP
        out[i] = (float(rep.fn(hp)) - float(rep.fn(hm))) / (2 * FD_STEP)
    return out


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------


def differential_lift(u: PotentialFunction, point: Sequence) -> np.ndarray:
    """L(u)(point) = (u - sum z_j u_j, u_1, ..., u_m): the universal
    Legendre transform, satisfying <z, L(u)> = u and <z, dL(u)> = 0."""
    pt = [float(v) for v in point]
    val = potential_value(u, pt)
    grad = potential_gradient(u, pt)
    head = val - sum(z * g for z, g in zip(pt, grad))
    return np.concatenate([[head], grad])


def modified_lift(u: PotentialFunction, a: Sequence,
                  point: Sequence) -> np.ndarray:
    """L_a(u): the lift with <z, L_a(u)> = u and <z, dL_a(u)> = 2a.

    In the chart this adds 2(sum_j a_j z_j, -a_1, ..., -a_m) to L(u);
    the a_0 component drops out because dz_0 = 0 on the chart.
    """
    pt = [float(v) for v in point]
    avec = [float(v) for v in a]
    if len(avec) != u.m + 1:
        raise BadParameters("a must have m+1 components")
    if any(avec[1:]):
        h = projective_hessian(u, pt)
        hf = np.array([[float(x) for x in row] for row in np.atleast_2d(h)])
        if abs(np.linalg.det(hf)) < 1e-12:
            raise DegenerateHessian(
                "modified lift needs a nondegenerate hessian"
            )
    lift = differential_lift(u, pt)
    lift[0] += 2 * sum(aj * zj for aj, zj in zip(avec[1:], pt))
    lift[1:] = lift[1:] - 2 * np.asarray(avec[1:])
    return lift


def projective_hessian(u: PotentialFunction, point: Sequence):
    """The m x m hessian of u in its chart.

    For Profile1DIntegral this is exactly 1/A(z); with a Fraction input
    the result is an exact Fraction matrix.  Numeric representations with
    an analytic gradient use central differences of the gradient (noise
    roughly eps/h); otherwise second differences of values (noise roughly
    eps/h^2, adequate for 1e-4-level work but too coarse to differentiate
    again downstream).
    """
    rep = u.representation
    if isinstance(rep, Profile1DIntegral):
        z = point[0]
        if isinstance(z, (int, Fraction)):
            a = rep.A(rat(z))
            if a == 0:
                raise DomainBoundary("profile vanishes at the point")
            return np.array([[Fraction(1, 1) / a]], dtype=object)
        a = _profile_value_at(rep.A, float(z))
        if a == 0:
            raise DomainBoundary("profile vanishes at the point")
        return np.array([[1.0 / a]])
    pt = [float(v) for v in point]
    m = len(pt)
    h = FD_STEP
    out = np.zeros((m, m))
    if rep.grad is not None:
        for k in range(m):
            pp = list(pt)
            pm = list(pt)
            pp[k] += h
            pm[k] -= h
            gp = np.asarray([float(v) for v in rep.grad(pp)])
            gm = np.asarray([float(v) for v in rep.grad(pm)])
            out[:, k] = (gp - gm) / (2 * h)
        return 0.5 * (out + out.T)
    f = rep.fn
    f0 = float(f(pt))
    for i in range(m):
        pp = list(pt)
        pm = list(pt)
        pp[i] += h
        pm[i] -= h
        out[i, i] = (float(f(pp)) - 2 * f0 + float(f(pm))) / (h * h)
        for j in range(i + 1, m):
            ppp = list(pt)
            ppm = list(pt)
            pmp = list(pt)
            pmm = list(pt)
            ppp[i] += h
            ppp[j] += h
            ppm[i] += h
            ppm[j] -= h
            pmp[i] -= h
            pmp[j] += h
            pmm[i] -= h
            pmm[j] -= h
            val = (float(f(ppp)) - float(f(ppm)) - float(f(pmp))
                   + float(f(pmm))) / (4 * h * h)
            out[i, j] = out[j, i] = val
    return out


def integrability_residual(G: Callable, point: Sequence,
                           step: float = FD_STEP) -> np.ndarray:
    """The obstruction dG_ij/dz_k - dG_ik/dz_j to G being a hessian.

    G is a callable returning an m x m symmetric matrix; the result is an
    (m, m, m) tensor computed by central differences, identically zero
    (to tolerance) exactly when G is locally Hess(u)."""
    pt = [float(v) for v in point]
    m = len(pt)
    dG = np.zeros((m, m, m))
    for k in range(m):
        pp = list(pt)
        pm = list(pt)
        pp[k] += step
        pm[k] -= step
        dG[k] = (np.asarray(G(pp), dtype=float)
                 - np.asarray(G(pm), dtype=float)) / (2 * step)
    out = np.zeros((m, m, m))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                out[i, j, k] = dG[k][i, j] - dG[j][i, k]
    return out


# ---------------------------------------------------------------------------
# closed forms for reference potentials
# ---------------------------------------------------------------------------


def sphere_potential_value(z: float) -> float:
    """u(z) = ((1+z) log(1+z) + (1-z) log(1-z))/2: the round-sphere
    potential for A = 1 - z^2 with basepoint 0."""
    out = 0.0
    if z > -1.0 and 1.0 + z > 0:
        out += 0.5 * (1.0 + z) * math.log1p(z)
    if z < 1.0 and 1.0 - z > 0:
        out += 0.5 * (1.0 - z) * math.log1p(-z)
    return out
