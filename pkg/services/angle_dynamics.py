"""
Opening-angle dynamics of a closing saddle: rate envelopes, their
integration up to collapse, and blow-up time estimates.

Trajectories are integrated in the collapse depth w = ln(-ln gamma), in
which every envelope has a smooth, positive rate; gamma = exp(-exp(w)).
"""
import math
import sys
from abc import ABC, abstractmethod
from typing import Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, special

from utils.errors import AccuracyError, DomainError
from utils.logger.logger import LabLogger
from utils.validators import AngleState, AngleTrajectory, QuadControl, StepControl

logger = LabLogger()


def lower_envelope_rhs(gamma: float, C_tilde: float, C3: float, beta: float) -> float:
    """dgamma/dt = -(C_tilde gamma^(2-beta) - C3 gamma)."""
    if gamma <= 0.0:
        raise DomainError(f"gamma must be positive, got {gamma:g}")
    return -(C_tilde * gamma ** (2.0 - beta) - C3 * gamma)


def upper_envelope_rhs(gamma: float, C2_tilde: float, beta: float) -> float:
    """dgamma/dt = -C2_tilde gamma^(2-beta) |ln gamma| on 0 < gamma < 1/2."""
    if not 0.0 < gamma < 0.5:
        raise DomainError(f"gamma must lie in (0, 1/2), got {gamma:g}")
    return -C2_tilde * gamma ** (2.0 - beta) * abs(math.log(gamma))


def full_upper_envelope_rhs(gamma: float, C2: float, C3: float, beta: float) -> float:
    """Rate before absorbing the linear term: -(C2 gamma^(2-beta) |ln gamma| + C3 gamma)."""
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma:g}")
    return -(C2 * gamma ** (2.0 - beta) * abs(math.log(gamma)) + C3 * gamma)


def absorbed_upper_constant(C2: float, C3: float, beta: float, gamma0: float) -> float:
    """
    C2_tilde with C2 g^(2-b) |ln g| + C3 g <= C2_tilde g^(2-b) |ln g| on (0, gamma0].

    g^(beta-1) / |ln g| increases on (0, 1), so its sup over the interval sits at gamma0.
    """
    if not 0.0 < gamma0 < 1.0:
        raise DomainError(f"gamma0 must lie in (0, 1), got {gamma0:g}")
    return C2 + C3 * gamma0 ** (beta - 1.0) / abs(math.log(gamma0))


# exp(w) is only taken inside this window; past W_MAX gamma is 0.0 in double precision
W_MIN, W_MAX = -40.0, 700.0
GROWTH_EXPONENT_MAX = 600.0
RATE_MAX = 1e300


def _depth(gamma: float) -> float:
    return math.log(-math.log(gamma))


def _angle(w: float) -> float:
    if w > W_MAX:
        return 0.0
    return math.exp(-math.exp(w))


def _log_depth(w: float) -> float:
    """L = -ln gamma = exp(w), with w clipped to the representable window."""
    return math.exp(min(max(w, W_MIN), W_MAX))


class AngleRate(BaseModel, ABC):
    """Signed rate dgamma/dt of a closing angle, with its collapse-depth form."""
    model_config = ConfigDict(frozen=True)

    @abstractmethod
    def __call__(self, gamma: float) -> float:
        """Signed rate at gamma."""

    @abstractmethod
    def depth_rate(self, w: float) -> float:
        """dw/dt for w = ln(-ln gamma)."""

    @property
    @abstractmethod
    def finite_collapse(self) -> bool:
        """Whether gamma reaches 0 in finite time (the integral of dgamma/|rate| near 0 is finite)."""

    @abstractmethod
    def remaining_time(self, gamma: float) -> float:
        """Time to go from gamma to 0 along the rate."""

    def describe(self) -> str:
        return type(self).__name__


class CallableRate(AngleRate):
    """
    Any signed rate gamma -> dgamma/dt, moved to the collapse depth by
    dw/dt = -rate(gamma) / (gamma L) with L = -ln gamma.

    ``collapses`` declares whether the angle closes in finite time; the
    remaining time is the quadrature of dgamma / |rate| from 0.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    fn: Callable[[float], float]
    collapses: bool = True

    def __call__(self, gamma: float) -> float:
        return self.fn(gamma)

    def depth_rate(self, w: float) -> float:
        depth = _log_depth(w)
        gamma = max(math.exp(-depth), sys.float_info.min)
        try:
            value = -self.fn(gamma) / (gamma * depth)
        except (OverflowError, ZeroDivisionError):
            return RATE_MAX
        return min(value, RATE_MAX)

    @property
    def finite_collapse(self) -> bool:
        return self.collapses

    def remaining_time(self, gamma: float) -> float:
        if not self.collapses:
            return math.inf
        value, _ = integrate.quad(lambda g: -1.0 / self.fn(g) if g > 0.0 else 0.0, 0.0, gamma, limit=200)
        return value if math.isfinite(value) and value > 0.0 else math.inf


class EnvelopeRate(AngleRate):
    """Rates built from powers gamma^(2-beta); beta = 1 only where the envelope allows it."""
    beta: float = Field(ge=1.0, lt=2.0)

    def _growth(self, depth: float) -> float:
        # exp((beta - 1) L) with L = -ln gamma
        if self.beta == 1.0:
            return 1.0
        return math.exp(min((self.beta - 1.0) * depth, GROWTH_EXPONENT_MAX))

    def describe(self) -> str:
        return f"{type(self).__name__}(beta={self.beta:g})"


class PowerRate(EnvelopeRate):
    """dgamma/dt = -c gamma^(2-beta)."""
    c: float = Field(gt=0.0)

    def __call__(self, gamma: float) -> float:
        return -self.c * gamma ** (2.0 - self.beta)

    def depth_rate(self, w: float) -> float:
        depth = _log_depth(w)
        return min(self.c * self._growth(depth) / depth, RATE_MAX)

    @property
    def finite_collapse(self) -> bool:
        return self.beta > 1.0

    def remaining_time(self, gamma: float) -> float:
        if not self.finite_collapse:
            return math.inf
        return gamma ** (self.beta - 1.0) / (self.c * (self.beta - 1.0))


class LowerEnvelope(EnvelopeRate):
    """dgamma/dt = -(C_tilde gamma^(2-beta) - C3 gamma), meaningful below the balance point."""
    C_tilde: float = Field(gt=0.0)
    C3: float = Field(0.0, ge=0.0)

    def __call__(self, gamma: float) -> float:
        return lower_envelope_rhs(gamma, self.C_tilde, self.C3, self.beta)

    @property
    def balance_point(self) -> float:
        """Angle where the rate vanishes; infinite without the linear term."""
        if self.C3 == 0.0:
            return math.inf
        return (self.C_tilde / self.C3) ** (1.0 / (self.beta - 1.0))

    def depth_rate(self, w: float) -> float:
        depth = _log_depth(w)
        return min((self.C_tilde * self._growth(depth) - self.C3) / depth, RATE_MAX)

    @property
    def finite_collapse(self) -> bool:
        return self.beta > 1.0

    def remaining_time(self, gamma: float) -> float:
        if not self.finite_collapse:
            return math.inf
        u = gamma ** (self.beta - 1.0)
        if self.C3 == 0.0:
            return u / (self.C_tilde * (self.beta - 1.0))
        return -math.log1p(-self.C3 * u / self.C_tilde) / (self.C3 * (self.beta - 1.0))


class UpperEnvelope(EnvelopeRate):
    """dgamma/dt = -C2_tilde gamma^(2-beta) |ln gamma|; at beta = 1 the angle never closes."""
    C2_tilde: float = Field(gt=0.0)

    def __call__(self, gamma: float) -> float:
        return -self.C2_tilde * gamma ** (2.0 - self.beta) * abs(math.log(gamma))

    def depth_rate(self, w: float) -> float:
        if self.beta == 1.0:
            return self.C2_tilde
        return min(self.C2_tilde * self._growth(_log_depth(w)), RATE_MAX)

    @property
    def finite_collapse(self) -> bool:
        return self.beta > 1.0

    def remaining_time(self, gamma: float) -> float:
        if not self.finite_collapse:
            return math.inf
        return float(special.exp1((self.beta - 1.0) * abs(math.log(gamma)))) / self.C2_tilde


def integrate_angle(rate: Union[AngleRate, Callable[[float], float]], gamma0: float, t_max: float,
                    step: Optional[StepControl] = None, gamma_floor: float = 1e-12) -> AngleTrajectory:
    """
    Integrate an opening-angle rate from gamma0 until collapse or t_max.

    For rates with finite collapse, integration stops when gamma reaches
    gamma_floor (a terminal event in the depth variable); the vanish time is
    that instant plus the exact remaining time from gamma_floor to 0, and a
    final sample with gamma = 0 is appended. Without finite collapse no
    vanish time is reported.

    Args:
        rate: Signed rate object, or a plain callable gamma -> dgamma/dt
        gamma0: Initial angle in (0, 1)
        t_max: Integration horizon
        step: Tolerances and method for solve_ivp
        gamma_floor: Numerical zero of the angle

    Returns:
        AngleTrajectory
    """
    if not 0.0 < gamma0 < 1.0:
        raise DomainError(f"gamma0 must lie in (0, 1), got {gamma0:g}")
    if not 0.0 < gamma_floor < gamma0:
        raise DomainError(f"gamma_floor must lie in (0, gamma0), got {gamma_floor:g}")
    if not isinstance(rate, AngleRate):
        rate = CallableRate(fn=rate)
    if isinstance(rate, LowerEnvelope) and gamma0 >= rate.balance_point:
        raise DomainError(f"gamma0 = {gamma0:g} is not below the balance point {rate.balance_point:g}")
    step = step or StepControl()
    w_floor = _depth(gamma_floor)
    horizon = min(t_max, rate.remaining_time(gamma0)) if rate.finite_collapse else t_max
    max_step = min(step.max_step, horizon / 10.0)

    def floor_reached(t: float, y: np.ndarray) -> float:
        return y[0] - w_floor

    floor_reached.terminal = True
    floor_reached.direction = 1.0

    sol = integrate.solve_ivp(lambda t, y: [rate.depth_rate(y[0])], (0.0, t_max), [_depth(gamma0)],
                              method=step.method, rtol=step.rtol, atol=step.atol, max_step=max_step,
                              first_step=1e-4 * max_step,
                              events=floor_reached if rate.finite_collapse else None)
    samples = [AngleState(t=float(t), gamma=_angle(float(w)), depth=float(w)) for t, w in zip(sol.t, sol.y[0])]
    vanish_time, underflow = None, False

    if sol.status == 1 and sol.t_events[0].size:
        t_floor = float(sol.t_events[0][0])
        vanish_time = t_floor + rate.remaining_time(gamma_floor)
        samples.append(AngleState(t=vanish_time, gamma=0.0, depth=math.inf))
    elif sol.status == -1:
        underflow = True
        last = samples[-1]
        if rate.finite_collapse and last.gamma > 0.0:
            vanish_time = last.t + 0.5 * rate.remaining_time(last.gamma)
        logger.log("WARNING", f"angle integration stopped at t={last.t:g}: {sol.message}")

    logger.log("DEBUG", f"{rate.describe()} from gamma0={gamma0:g}: "
                        f"{len(samples)} samples, vanish time {vanish_time}")
    return AngleTrajectory(samples=samples, vanish_time=vanish_time, gamma_floor=gamma_floor,
                           finite_collapse=rate.finite_collapse, step_underflow=underflow)


def power_ode_exact_vanish_time(beta: float, gamma0: float, c: float) -> float:
    """Collapse time gamma0^(beta-1) / (c (beta-1)) of dgamma/dt = -c gamma^(2-beta)."""
    if not 1.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (1, 2), got {beta:g}")
    return gamma0 ** (beta - 1.0) / (c * (beta - 1.0))


def _check_blowup_args(beta: float, gamma0: float, C: float) -> None:
    if not 1.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (1, 2), got {beta:g}")
    if not 0.0 < gamma0 < 0.5:
        raise DomainError(f"gamma0 must lie in (0, 1/2), got {gamma0:g}")
    if C <= 0.0:
        raise DomainError(f"C must be positive, got {C:g}")


def blowup_time_lower_bound(beta: float, gamma0: float, C: float, quad: Optional[QuadControl] = None) -> float:
    """
    Lower bound (1/C) * integral over (0, gamma0) of dgamma / (gamma^(2-beta) |ln gamma|).

    Evaluated with u = gamma^(beta-1), which turns the integrand into the
    bounded 1 / (-ln u) on (0, gamma0^(beta-1)).

    Raises:
        AccuracyError: quadrature tolerance not met
    """
    _check_blowup_args(beta, gamma0, C)
    quad = quad or QuadControl()
    out = integrate.quad(lambda u: -1.0 / math.log(u) if u > 0.0 else 0.0, 0.0, gamma0 ** (beta - 1.0),
                         epsabs=quad.abs_tol, epsrel=0.0, limit=quad.max_subdivisions, full_output=1)
    value, err = out[0] / C, out[1] / C
    if len(out) > 3 or err > quad.abs_tol:
        raise AccuracyError(f"blow-up time quadrature: error {err:.3e}", value, err)
    return value


def blowup_time_exponential_integral(beta: float, gamma0: float, C: float) -> float:
    """Closed form E1((beta - 1) |ln gamma0|) / C of the same bound."""
    _check_blowup_args(beta, gamma0, C)
    return float(special.exp1((beta - 1.0) * abs(math.log(gamma0)))) / C


def blowup_time_log_substitution(beta: float, gamma0: float, C: float, quad: Optional[QuadControl] = None) -> float:
    """Same bound with s = -ln gamma: (1/C) * integral over (|ln gamma0|, inf) of exp(-(beta-1) s) / s."""
    _check_blowup_args(beta, gamma0, C)
    quad = quad or QuadControl()
    out = integrate.quad(lambda s: math.exp(-(beta - 1.0) * s) / s, abs(math.log(gamma0)), math.inf,
                         epsabs=quad.abs_tol, epsrel=0.0, limit=quad.max_subdivisions, full_output=1)
    value, err = out[0] / C, out[1] / C
    if len(out) > 3 or err > quad.abs_tol:
        raise AccuracyError(f"log-substituted blow-up time quadrature: error {err:.3e}", value, err)
    return value


def holder_distance_bound(c1: float, c2: float, seminorm: float, sigma: float) -> float:
    """Distance lower bound (|c2 - c1| / seminorm)^(1/sigma) between two level sets."""
    if c1 == c2:
        raise DomainError("level values must differ")
    if seminorm <= 0.0:
        raise DomainError("a constant field has no distinct level sets")
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma:g}")
    return (abs(c2 - c1) / seminorm) ** (1.0 / sigma)


def saddle_angle(alpha: float, delta: float) -> tuple[float, float]:
    """Opening angle arctan((alpha + delta) / (1 - alpha delta)) and its small-angle value alpha + delta."""
    if alpha * delta == 1.0:
        raise DomainError("alpha * delta = 1 gives a degenerate saddle")
    return math.atan((delta + alpha) / (1.0 - alpha * delta)), alpha + delta


def saddle_point_separation(y1: float, alpha: float, delta: float) -> float:
    """Distance |y1| |alpha + delta| of the two saddle branches at abscissa y1."""
    return abs(y1) * abs(alpha + delta)
