"""
Explicit constants and inequalities for stream-function differences near a
saddle point: C(beta, L), D(beta, L), the admissible L and radius, the lower
and upper bounds on |psi(p1) - psi(p2)|, the remainder bounds and the
velocity sup bound.
"""
import math
import sys
from typing import Optional

import numpy as np

from services.kernel import farfield_i4_bound, i1_closed, leading_constant
from services.specfun import (a_beta, gamma_fn, inc_beta, kernel_decay_exponent, kernel_ratio,
                              require_converged, sum_series)
from utils.errors import DomainError, PreconditionError
from utils.logger.logger import LabLogger
from utils.validators import (BoundContext, FieldNorms, NormalizationMode, RadiusRule, SeriesControl,
                              StreamBoundReport, UpperBoundConstants)

logger = LabLogger()

LOG_MIN_RADIUS = math.log(sys.float_info.min)


def _check_beta(beta: float) -> None:
    if not 1.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (1, 2), got {beta:g}")


def riesz_normalization(beta: float, mode: NormalizationMode = NormalizationMode.RIESZ) -> float:
    """C_beta with psi = C_beta * (theta convolved with |x|^(-beta)) equal to (-Delta)^(beta/2 - 1) theta."""
    if mode is NormalizationMode.UNIT:
        return 1.0
    _check_beta(beta)
    return gamma_fn(beta / 2) / (2.0 ** (2.0 - beta) * math.pi * gamma_fn((2.0 - beta) / 2))


def c_beta_L(beta: float, L: float, ctrl: Optional[SeriesControl] = None) -> float:
    """C(beta, L), strictly positive; tends to A(beta)(beta-1)/(2-beta) as L grows."""
    _check_beta(beta)
    if L < 1.0:
        raise DomainError(f"L must be at least 1, got {L:g}")
    return leading_constant(beta, L, ctrl)


def d_beta_L(beta: float, L: float, ctrl: Optional[SeriesControl] = None) -> float:
    """
    D(beta, L) = (L^(2-beta) - 1)/(2-beta) + sum over m >= 0 of c_m (L^(2-beta-2m) - 1)/(2(1-m) - beta).

    Every summand is nonnegative for L >= 1 and D(beta, 1) = 0.
    """
    _check_beta(beta)
    if L < 1.0:
        raise DomainError(f"L must be at least 1, got {L:g}")
    log_l = math.log(L)
    result = sum_series(1.0, kernel_ratio(beta), ctrl or SeriesControl(),
                        weight=lambda m: np.expm1((2.0 - beta - 2.0 * m) * log_l) / (2.0 * (1.0 - m) - beta),
                        decay_exponent=kernel_decay_exponent(beta), label=f"D({beta:g},{L:g})")
    return math.expm1((2.0 - beta) * log_l) / (2.0 - beta) + require_converged(result, "D(beta, L) series")


def admissible_L(beta: float, K_const: float) -> float:
    """Threshold above which L keeps C(beta, L) - (beta - K) L^(-beta) positive."""
    _check_beta(beta)
    if K_const <= 0.0:
        raise DomainError(f"K_const must be positive, got {K_const:g}")
    if K_const >= beta:
        return 1.0
    base = (beta - K_const) * (2.0 - beta) / (a_beta(beta) * (beta - 1.0))
    return max(1.0, base ** (1.0 / beta))


def positivity_certificate(beta: float, K_const: float, L: float,
                           ctrl: Optional[SeriesControl] = None) -> tuple[float, float]:
    """
    Both sides of C(beta, L) - (beta - K) L^-beta > A(beta)(beta-1)/(2-beta) - (beta - K) L^-beta > 0.

    Returns:
        (C-side, A-side); the certificate holds when C-side > A-side > 0
    """
    shift = (beta - K_const) * L ** -beta
    c_side = c_beta_L(beta, L, ctrl) - shift
    a_side = a_beta(beta) * (beta - 1.0) / (2.0 - beta) - shift
    return c_side, a_side


def _i2_bracket(ctx: BoundContext, ctrl: Optional[SeriesControl]) -> float:
    return 1.0 / (2.0 - ctx.beta) + a_beta(ctx.beta) + ctx.L ** ctx.sigma * d_beta_L(ctx.beta, ctx.L, ctrl)


def _i3_brackets(ctx: BoundContext, ctrl: Optional[SeriesControl]) -> tuple[float, float]:
    beta, sigma, L = ctx.beta, ctx.sigma, ctx.L
    if sigma >= beta - 1.0:
        raise DomainError(f"sigma ({sigma:g}) must stay below beta - 1 ({beta - 1.0:g})")
    direct = (1.0 / (beta - sigma - 1.0) + (beta + 1.0) / (beta - sigma)) * L ** (sigma + 1.0 - beta)
    via_beta = inc_beta(1.0 / L, beta - sigma - 1.0, -beta, ctrl)
    return direct, via_beta


def log_admissible_radius(ctx: BoundContext, rule: RadiusRule = RadiusRule.STANDARD,
                          ctrl: Optional[SeriesControl] = None) -> float:
    """ln r of the admissible radius; finite even where r itself underflows."""
    sigma = ctx.sigma
    scale = c_beta_L(ctx.beta, ctx.L, ctrl) * ctx.theta0_inf / ctx.N_sigma
    bracket = _i2_bracket(ctx, ctrl)
    if rule is RadiusRule.STANDARD:
        r_sigma = scale / (2.0 ** (sigma + 2.0) * bracket)
    else:
        r_sigma = scale / (2.0 ** (sigma + 3.0) * (bracket + max(_i3_brackets(ctx, ctrl))))
    return math.log(r_sigma) / sigma


def admissible_radius(ctx: BoundContext, rule: RadiusRule = RadiusRule.STANDARD,
                      ctrl: Optional[SeriesControl] = None) -> float:
    """
    Largest radius r allowed by the chosen rule.

    ``standard`` bounds the I2 remainder alone by half the leading term;
    ``certified`` also absorbs the I3 bracket so that I2 + I3 stays below a
    quarter of the leading term for |p1| <= r and tau <= 2r.

    Args:
        ctx: Bound inputs; ctx.r is ignored
        rule: Radius rule
        ctrl: Series policy

    Returns:
        r > 0

    Raises:
        DomainError: r lies below the smallest positive double (small sigma)
    """
    log_r = log_admissible_radius(ctx, rule, ctrl)
    if log_r < LOG_MIN_RADIUS:
        raise DomainError(f"admissible radius exp({log_r:.6g}) underflows double precision "
                          f"for sigma = {ctx.sigma:g}; use a larger sigma")
    return math.exp(log_r)


def working_radius(ctx: BoundContext, ctrl: Optional[SeriesControl] = None) -> float:
    return ctx.r if ctx.r is not None else admissible_radius(ctx, RadiusRule.CERTIFIED, ctrl)


def stream_lower_bound(ctx: BoundContext, tau: float) -> float:
    """
    Lower bound C_beta pi tau^(2-beta) |theta(0,t)| A(beta)(beta-1)/(2-beta) for two points in B_r(0).

    Raises:
        PreconditionError: tau > 2r
    """
    if tau == 0.0:
        return 0.0
    r = working_radius(ctx)
    if tau > 2.0 * r:
        raise PreconditionError(f"tau = {tau:g} exceeds the diameter 2r = {2.0 * r:g}")
    beta = ctx.beta
    return (ctx.C_beta_norm * math.pi * tau ** (2.0 - beta) * ctx.theta0_inf
            * a_beta(beta) * (beta - 1.0) / (2.0 - beta))


def lower_envelope_constant(ctx: BoundContext, m_p: float = 1.0) -> float:
    """Coefficient of tau^(2-beta) in the lower bound divided by the placeholder M(p)."""
    beta = ctx.beta
    return ctx.C_beta_norm * math.pi * ctx.theta0_inf * a_beta(beta) * (beta - 1.0) / (2.0 - beta) / m_p


def stream_upper_constants(beta: float, norms: FieldNorms, L_cut: float = 1.0,
                           C_beta: Optional[float] = None) -> UpperBoundConstants:
    """Near-, mid- and far-field constants of the upper bound."""
    _check_beta(beta)
    c_beta = riesz_normalization(beta) if C_beta is None else C_beta
    near = c_beta * norms.sup_norm * 2 * math.pi * 3.0 ** (2.0 - beta) / (2.0 - beta)
    mid = 8.0 * math.pi * beta * c_beta * norms.sup_norm
    far = c_beta * norms.l2_norm * beta * 2.0 ** (beta + 1.0) * math.sqrt(math.pi / beta) * L_cut ** -beta
    return UpperBoundConstants(near=near, mid=mid, far=far)


def stream_upper_bound(beta: float, tau: float, norms: FieldNorms, L_cut: float = 1.0,
                       C_beta: Optional[float] = None) -> float:
    """
    Upper bound on |psi(p1) - psi(p2)| of order tau^(2-beta) |ln tau|.

    Args:
        beta: Kernel exponent
        tau: Distance of the two points, below 1/2
        norms: Sup and L2 norms of theta
        L_cut: Radius separating mid and far field
        C_beta: Normalization, default the Riesz constant

    Returns:
        near tau^(2-beta) + mid tau^(2-beta) (|ln tau| + max(0, ln(L_cut/2))) + far tau^(2-beta)
    """
    if tau == 0.0:
        return 0.0
    if not 0.0 < tau < 0.5:
        raise PreconditionError(f"tau must lie in (0, 1/2), got {tau:g}")
    const = stream_upper_constants(beta, norms, L_cut, C_beta)
    log_factor = abs(math.log(tau)) + max(0.0, math.log(L_cut / 2.0))
    return tau ** (2.0 - beta) * (const.near + const.mid * log_factor + const.far)


def _remainder_prefactor(ctx: BoundContext, tau: float, p1_norm: float) -> float:
    return (2 * math.pi * ctx.C_beta_norm * tau ** (2.0 - ctx.beta) * ctx.N_sigma
            * (p1_norm ** ctx.sigma + tau ** ctx.sigma))


def remainder_i2_bound(ctx: BoundContext, tau: float, p1_norm: float,
                       ctrl: Optional[SeriesControl] = None) -> float:
    if tau == 0.0:
        return 0.0
    return _remainder_prefactor(ctx, tau, p1_norm) * _i2_bracket(ctx, ctrl)


def remainder_i3_routes(ctx: BoundContext, tau: float, p1_norm: float,
                        ctrl: Optional[SeriesControl] = None) -> dict[str, float]:
    """I3 bound through the direct power bracket and through B_{1/L}(beta - sigma - 1, -beta)."""
    direct, via_beta = _i3_brackets(ctx, ctrl)
    prefactor = _remainder_prefactor(ctx, tau, p1_norm) if tau > 0.0 else 0.0
    return {"direct": prefactor * direct, "incomplete_beta": prefactor * via_beta}


def remainder_i3_bound(ctx: BoundContext, tau: float, p1_norm: float,
                       ctrl: Optional[SeriesControl] = None) -> float:
    """Certified I3 bound: the larger of the two evaluation routes."""
    return max(remainder_i3_routes(ctx, tau, p1_norm, ctrl).values())


def velocity_sup_bound(beta: float, lam: float, holder_norm: float, sup_norm: float,
                       eps: float, k: float, C: float = 1.0) -> float:
    """
    Velocity ceiling

        C/(1-beta+lam) |theta|_{C^lam} (eps^(1-beta+lam) + k^(1-beta+lam)) + C |theta|_inf k^(1-beta)/(beta-1)

    Raises:
        DomainError: lam <= beta - 1 or k <= eps
    """
    if lam <= beta - 1.0:
        raise DomainError(f"lambda ({lam:g}) must exceed beta - 1 ({beta - 1.0:g})")
    if eps <= 0.0 or k <= eps:
        raise DomainError(f"need 0 < eps < k, got eps={eps:g}, k={k:g}")
    gap = 1.0 - beta + lam
    return (C / gap * holder_norm * (eps ** gap + k ** gap)
            + C * sup_norm * k ** (1.0 - beta) / (beta - 1.0))


def lemma_report(ctx: BoundContext, tau: float, p1_norm: Optional[float] = None,
                 norms: Optional[FieldNorms] = None, L_cut: float = 1.0,
                 K_remainder: Optional[float] = None,
                 ctrl: Optional[SeriesControl] = None) -> StreamBoundReport:
    """Every bound of the decomposition at one tau; p1_norm defaults to the working radius."""
    r = working_radius(ctx, ctrl)
    ctx = ctx.model_copy(update={"r": r})
    p1 = r if p1_norm is None else p1_norm
    i1 = i1_closed(ctx, tau, ctrl)
    i2 = remainder_i2_bound(ctx, tau, p1, ctrl)
    i3 = remainder_i3_bound(ctx, tau, p1, ctrl)
    i4 = farfield_i4_bound(ctx, tau, ctx.K_const if K_remainder is None else K_remainder)
    upper, constants = None, None
    if norms is not None and tau < 0.5:
        constants = stream_upper_constants(ctx.beta, norms, L_cut, ctx.C_beta_norm)
        upper = stream_upper_bound(ctx.beta, tau, norms, L_cut, ctx.C_beta_norm)
    report = StreamBoundReport(tau=tau, lower=stream_lower_bound(ctx, tau), upper=upper, i1=i1,
                               i2_bound=i2, i3_bound=i3, i4_bound=i4, chain_lower=i1 - i2 - i3 - i4,
                               constants=constants)
    logger.log("DEBUG", f"lemma report beta={ctx.beta:g} sigma={ctx.sigma:g} L={ctx.L:g} r={r:.3e}: "
                        f"(I2+I3)/I1 = {report.remainder_ratio:.3f}")
    return report
