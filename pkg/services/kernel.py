"""
Singular kernel K(z, v) = |z|^(-beta) - |z - v|^(-beta) and its integrals over
the disk, annuli and the far field, with a quadrature oracle.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from services.specfun import (a_beta, hyp2f1, kernel_decay_exponent, kernel_ratio,
                              require_converged, sum_series)
from utils.errors import AccuracyError, DomainError
from utils.logger.logger import LabLogger
from utils.validators import BoundContext, Hyp2F1Args, KernelSpec, QuadControl, SeriesControl

logger = LabLogger()


def kernel_diff(z: Sequence[float], spec: KernelSpec) -> float:
    """|z|^(-beta) - |z - v|^(-beta) for z away from 0 and v."""
    z1, z2 = float(z[0]), float(z[1])
    r0 = math.hypot(z1, z2)
    r1 = math.hypot(z1 - spec.v[0], z2 - spec.v[1])
    if r0 == 0.0 or r1 == 0.0:
        raise DomainError(f"kernel is singular at z = ({z1:g}, {z2:g})")
    return r0 ** -spec.beta - r1 ** -spec.beta


def angular_integral(r: float, beta: float, ctrl: Optional[SeriesControl] = None) -> float:
    """
    Integral over theta in (0, 2 pi) of (r^2 + 1 - 2 r cos theta)^(-beta/2).

    Args:
        r: Radius, positive and different from 1
        beta: Kernel exponent
        ctrl: Series policy for the hypergeometric evaluation

    Returns:
        2 pi 2F1(beta/2, 1/2; 1; r^2) for r < 1, 2 pi r^(-beta) 2F1(beta/2, 1/2; 1; r^-2) for r > 1
    """
    if r <= 0.0:
        raise DomainError(f"radius must be positive, got {r:g}")
    if r == 1.0:
        raise DomainError("the angular integral diverges at r = 1")
    if r < 1.0:
        return 2 * math.pi * hyp2f1(Hyp2F1Args(a=beta / 2, b=0.5, c=1.0, z=r * r), ctrl)
    return 2 * math.pi * r ** -beta * hyp2f1(Hyp2F1Args(a=beta / 2, b=0.5, c=1.0, z=r ** -2), ctrl)


def angular_integral_quadrature(r: float, beta: float, nodes: int = 4096) -> float:
    """Periodic trapezoidal rule for the angular integral; spectrally accurate off r = 1."""
    theta = 2 * math.pi * np.arange(nodes) / nodes
    values = (r * r + 1.0 - 2.0 * r * np.cos(theta)) ** (-beta / 2)
    return float(2 * math.pi * values.mean())


def outer_series(beta: float, L: float, ctrl: Optional[SeriesControl] = None) -> float:
    """Sum over m >= 1 of c_m L^(2 - beta - 2m) / (2(m - 1) + beta)."""
    if L < 1.0:
        raise DomainError(f"L must be at least 1, got {L:g}")
    log_l = math.log(L)
    result = sum_series(beta / 4.0, kernel_ratio(beta), ctrl or SeriesControl(), start=1,
                        weight=lambda m: np.exp((2.0 - beta - 2.0 * m) * log_l) / (2.0 * (m - 1.0) + beta),
                        decay_exponent=kernel_decay_exponent(beta), label=f"outer_series({beta:g},{L:g})")
    return require_converged(result, "outer annulus series")


def annulus_inner(beta: float, *, a_value: Optional[float] = None) -> float:
    """Integral of K over the unit disk: 2 pi (1/(2 - beta) - A(beta))."""
    if not 1.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (1, 2), got {beta:g}")
    a = a_beta(beta) if a_value is None else a_value
    return 2 * math.pi * (1.0 / (2.0 - beta) - a)


def annulus_outer(beta: float, L: float, ctrl: Optional[SeriesControl] = None, *,
                  a_value: Optional[float] = None) -> float:
    """Integral of K over 1 < |z| < L in telescoped form; vanishes at L = 1."""
    if not 1.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (1, 2), got {beta:g}")
    a = a_beta(beta) if a_value is None else a_value
    return 2 * math.pi * (outer_series(beta, L, ctrl) + (a - 1.0) / (2.0 - beta))


def annulus_outer_termwise(beta: float, L: float, ctrl: Optional[SeriesControl] = None) -> float:
    """Integral of K over 1 < |z| < L, summed before telescoping."""
    if L < 1.0:
        raise DomainError(f"L must be at least 1, got {L:g}")
    log_l = math.log(L)
    result = sum_series(beta / 4.0, kernel_ratio(beta), ctrl or SeriesControl(), start=1,
                        weight=lambda m: np.expm1((2.0 - beta - 2.0 * m) * log_l) / (2.0 * m + beta - 2.0),
                        decay_exponent=kernel_decay_exponent(beta), label=f"outer_termwise({beta:g},{L:g})")
    return 2 * math.pi * require_converged(result, "term-wise outer annulus series")


def leading_constant(beta: float, L: float, ctrl: Optional[SeriesControl] = None, *,
                     a_value: Optional[float] = None) -> float:
    """C(beta, L) = A(beta)(beta - 1)/(2 - beta) + outer series."""
    a = a_beta(beta) if a_value is None else a_value
    return a * (beta - 1.0) / (2.0 - beta) + outer_series(beta, L, ctrl)


def i1_closed(ctx: BoundContext, tau: float, ctrl: Optional[SeriesControl] = None) -> float:
    """Leading term C_beta tau^(2-beta) 2 pi |theta(0,t)| C(beta, L)."""
    if tau < 0.0:
        raise DomainError(f"tau must be nonnegative, got {tau:g}")
    if tau == 0.0:
        return 0.0
    return (ctx.C_beta_norm * tau ** (2.0 - ctx.beta) * 2 * math.pi * ctx.theta0_inf
            * leading_constant(ctx.beta, ctx.L, ctrl))


def farfield_i4_bound(ctx: BoundContext, tau: float, K_remainder: float) -> float:
    """Bound C_beta tau^(2-beta) |theta(0,t)| pi L^(-beta) (beta + 2 K) of the far-field term."""
    if tau == 0.0:
        return 0.0
    return (ctx.C_beta_norm * tau ** (2.0 - ctx.beta) * ctx.theta0_inf * math.pi
            * ctx.L ** -ctx.beta * (ctx.beta + 2.0 * K_remainder))


# --------------------------------------------------------------------------- quadrature oracle

def _ray_disk_interval(c: float, radius: float) -> Optional[tuple[float, float]]:
    """rho >= 0 with |v + rho e|^2 = 1 + 2 rho c + rho^2 < radius^2, where c = cos(phi)."""
    if radius <= 0.0:
        return None
    disc = c * c - 1.0 + radius * radius
    if disc <= 0.0:
        return None
    root = math.sqrt(disc)
    lo, hi = max(-c - root, 0.0), -c + root
    if hi <= lo:
        return None
    return lo, hi


def _tangency_angles(radius: float) -> list[float]:
    """Ray angles in (0, pi) where a ray from v touches the circle |z| = radius."""
    if 0.0 < radius < 1.0:
        return [math.acos(-math.sqrt(1.0 - radius * radius))]
    if radius == 1.0:
        return [math.pi / 2]
    return []


def _shifted_ray_integral(phi: float, beta: float, r_in: float, r_out: float) -> float:
    """Exact radial integral of rho^(1-beta) along the ray from v in direction phi, inside the annulus."""
    c = math.cos(phi)
    outer = _ray_disk_interval(c, r_out)
    if outer is None:
        return 0.0
    inner = _ray_disk_interval(c, r_in)
    pieces = [outer] if inner is None else [(outer[0], inner[0]), (inner[1], outer[1])]
    p = 2.0 - beta
    return sum((hi ** p - lo ** p) / p for lo, hi in pieces if hi > lo)


def _centered_part(beta: float, r_in: float, r_out: float, ctrl: QuadControl, limit: int) -> tuple[float, float]:
    """2 pi times the integral of rho^(1-beta) over (r_in, r_out), singular endpoint by algebraic weight."""
    value, err = 0.0, 0.0
    lower = r_in
    if r_in == 0.0:
        ring = min(ctrl.singularity_ring_width, r_out)
        out = integrate.quad(lambda rho: 1.0, 0.0, ring, weight='alg', wvar=(1.0 - beta, 0.0),
                             epsabs=ctrl.abs_tol / 8, epsrel=0.0, limit=limit, full_output=1)
        if len(out) > 3:
            raise AccuracyError(f"centered ring quadrature: {out[3]}", 2 * math.pi * out[0], 2 * math.pi * out[1])
        value, err, lower = out[0], out[1], ring
    if lower < r_out:
        out = integrate.quad(lambda rho: rho ** (1.0 - beta), lower, r_out,
                             epsabs=ctrl.abs_tol / 8, epsrel=0.0, limit=limit, full_output=1)
        if len(out) > 3:
            raise AccuracyError(f"centered quadrature: {out[3]}", 2 * math.pi * (value + out[0]),
                                2 * math.pi * (err + out[1]))
        value, err = value + out[0], err + out[1]
    return 2 * math.pi * value, 2 * math.pi * err


def _annulus_once(beta: float, r_in: float, r_out: float, ctrl: QuadControl, limit: int) -> tuple[float, float]:
    centered, centered_err = _centered_part(beta, r_in, r_out, ctrl, limit)
    points = sorted(set(_tangency_angles(r_in) + _tangency_angles(r_out)))
    out = integrate.quad(_shifted_ray_integral, 0.0, math.pi, args=(beta, r_in, r_out),
                         points=points or None, epsabs=ctrl.abs_tol / 8, epsrel=0.0,
                         limit=limit, full_output=1)
    # the ray integrand is even in phi
    shifted, shifted_err = 2.0 * out[0], 2.0 * out[1]
    value, err = centered - shifted, centered_err + shifted_err
    if len(out) > 3:
        raise AccuracyError(f"shifted-polar quadrature: {out[3]}", value, err)
    if err > ctrl.abs_tol:
        raise AccuracyError(f"error estimate {err:.3e} above {ctrl.abs_tol:.3e}", value, err)
    return value, err


def quad_kernel_annulus(spec: KernelSpec, ctrl: Optional[QuadControl] = None) -> tuple[float, float]:
    """
    Quadrature oracle for the integral of K(z, v) over r_in < |z| < r_out.

    The |z|^(-beta) part is integrated in polar coordinates about 0 and the
    |z - v|^(-beta) part in polar coordinates about v, where the radial
    integral along each ray is exact and the ray angle is integrated
    adaptively with breakpoints at the tangency angles. Only |v| = 1 enters,
    so v is taken as (1, 0). Accuracy failures are retried with a doubled
    subdivision budget.

    Args:
        spec: Kernel exponent, v and annulus radii
        ctrl: Tolerance and subdivision budget

    Returns:
        (value, error estimate)

    Raises:
        AccuracyError: Tolerance not met after ctrl.max_attempts attempts
    """
    ctrl = ctrl or QuadControl()
    for attempt in Retrying(stop=stop_after_attempt(ctrl.max_attempts),
                            retry=retry_if_exception_type(AccuracyError),
                            before_sleep=before_sleep_log(logging.getLogger(__name__), logging.WARNING),
                            reraise=True):
        with attempt:
            limit = ctrl.max_subdivisions * 2 ** (attempt.retry_state.attempt_number - 1)
            value, err = _annulus_once(spec.beta, spec.r_in, spec.r_out, ctrl, limit)
    logger.log("DEBUG", f"annulus ({spec.r_in:g}, {spec.r_out:g}) beta={spec.beta:g}: {value:.12g} +- {err:.1e}")
    return value, err


def annulus_radial_quadrature(beta: float, r_in: float, r_out: float,
                              ctrl: Optional[QuadControl] = None) -> tuple[float, float]:
    """Integral of K over an annulus through the angular identity, for annuli with 1 not inside."""
    if r_in < 1.0 < r_out:
        raise DomainError("annulus must not straddle |z| = 1")
    ctrl = ctrl or QuadControl()

    def integrand(r: float) -> float:
        return r * (2 * math.pi * r ** -beta - angular_integral(r, beta))

    value, err = integrate.quad(integrand, r_in, r_out, epsabs=ctrl.abs_tol, epsrel=0.0,
                                limit=ctrl.max_subdivisions)
    return float(value), float(err)
