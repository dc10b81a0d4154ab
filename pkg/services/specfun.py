"""
Special-function layer: Gamma, Pochhammer, Gauss 2F1, incomplete Beta and the
two kernel series whose sums are expressed through A(beta).

All series are generated by term ratios in vectorised chunks; see
``sum_series`` for the stopping and tail rules.
"""
import math
from typing import Callable, Optional

import numpy as np
from scipy import special

from utils.errors import ConvergenceError, DomainError
from utils.logger.logger import LabLogger
from utils.validators import Hyp2F1Args, SeriesControl, SeriesResult, TailPolicy

logger = LabLogger()

ArrayFn = Callable[[np.ndarray], np.ndarray]

_SQRT_PI = math.sqrt(math.pi)
# below this many terms a tail fit has nothing to stand on
_MIN_TERMS_FOR_TAIL = 16


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """
    Gamma function for real arguments off the poles.

    Args:
        x: Argument, not a non-positive integer

    Returns:
        Gamma(x)

    Raises:
        DomainError: x is a pole of Gamma
    """
    if _is_pole(x):
        raise DomainError(f"Gamma has a pole at x = {x:g}")
    return float(special.gamma(x))


def pochhammer(a: float, m: int) -> float:
    """Rising factorial (a)_m, with (a)_0 = 1."""
    if m < 0 or int(m) != m:
        raise DomainError(f"Pochhammer order must be a nonnegative integer, got {m}")
    m = int(m)
    if m <= 64:
        return float(np.prod(a + np.arange(m, dtype=float)))
    return float(special.poch(a, m))


def kernel_coefficients(beta: float, start: int, count: int) -> np.ndarray:
    """c_m = (beta/2)_m (1/2)_m / (m!)^2 for m = start, ..., start + count - 1."""
    m = np.arange(start, start + count, dtype=float)
    log_c = (special.gammaln(m + beta / 2) - special.gammaln(beta / 2)
             + special.gammaln(m + 0.5) - special.gammaln(0.5)
             - 2.0 * special.gammaln(m + 1.0))
    return np.exp(log_c)


def kernel_ratio(beta: float) -> ArrayFn:
    """c_{m+1} / c_m as a vectorised function of m."""
    half_beta = beta / 2.0

    def ratio(m: np.ndarray) -> np.ndarray:
        return (m + half_beta) * (m + 0.5) / ((m + 1.0) ** 2)

    return ratio


def kernel_decay_exponent(beta: float) -> float:
    """Algebraic decay rate p of c_m / (2m + const), terms ~ m^(-p)."""
    return (5.0 - beta) / 2.0


def _shifted_power_tail(terms: np.ndarray, start: int, k: int, p: float) -> float:
    """
    Tail beyond index k for terms modelled as K (m + s)^(-p).

    The shift s is fitted from the terms at k and k // 2; the tail is then a
    Hurwitz zeta value. Falls back to s = 0 when the fit is not usable.
    """
    t_k = float(terms[k])
    if t_k == 0.0:
        return 0.0
    m_k = start + k
    m_h = start + k // 2
    t_h = float(terms[k // 2])
    shift = 0.0
    ratio = t_h / t_k
    if ratio > 1.0 and m_k > m_h:
        rho = ratio ** (1.0 / p)
        if rho > 1.0:
            candidate = (m_k - rho * m_h) / (rho - 1.0)
            if math.isfinite(candidate) and m_k + candidate > 0:
                shift = candidate
    scale = t_k * (m_k + shift) ** p
    return float(scale * special.zeta(p, m_k + 1.0 + shift))


def _tail_estimate(terms: np.ndarray, start: int, decay_exponent: Optional[float]) -> tuple[float, float]:
    """
    Returns (tail, error_estimate) for a series cut after ``terms``.

    Algebraic decay uses the shifted power-law tail and compares the
    tail-corrected sums at the full and at half the length; otherwise a
    geometric tail from the last term ratio is used and its size is the
    error estimate.
    """
    if terms.size < _MIN_TERMS_FOR_TAIL:
        return 0.0, math.inf
    last = terms.size - 1
    if terms[last] == 0.0:
        return 0.0, 0.0
    if decay_exponent is not None and decay_exponent > 1.0:
        tail_full = _shifted_power_tail(terms, start, last, decay_exponent)
        half = last // 2
        tail_half = _shifted_power_tail(terms, start, half, decay_exponent)
        head_full = math.fsum(terms[half + 1:])
        # (S_half + tail_half) - (S_full + tail_full) without re-summing the head
        err = abs(tail_half - head_full - tail_full)
        return tail_full, err
    q = float(terms[last] / terms[last - 1]) if terms[last - 1] != 0.0 else math.nan
    if not 0.0 < q < 1.0:
        return 0.0, math.inf
    tail = float(terms[last]) * q / (1.0 - q)
    return tail, abs(tail)


def sum_series(first_term: float, ratio: ArrayFn, ctrl: SeriesControl, *,
               weight: Optional[ArrayFn] = None, start: int = 0,
               decay_exponent: Optional[float] = None, label: str = "series") -> SeriesResult:
    """
    Sum t_m = b_m * weight(m) for m >= start, where b_start = first_term and
    b_{m+1} = b_m * ratio(m).

    Summation stops after the first term with |t_m| < ctrl.abs_tol. If the
    budget ctrl.max_terms is exhausted first, the result is converged only
    under the tail_bound policy and only if the tail estimate is
    self-consistent within ctrl.tail_tol.

    Args:
        first_term: b_start
        ratio: Vectorised b_{m+1} / b_m
        ctrl: Truncation policy
        weight: Optional vectorised factor applied to b_m
        start: First index
        decay_exponent: p with |t_m| ~ m^(-p); selects the power-law tail
        label: Name used in log messages

    Returns:
        SeriesResult with the partial sum plus tail (when used)
    """
    chunks: list[np.ndarray] = []
    coeff = float(first_term)
    m0 = start
    used = 0
    reached_tol = False

    while used < ctrl.max_terms:
        count = min(ctrl.chunk_size, ctrl.max_terms - used)
        idx = np.arange(m0, m0 + count, dtype=float)
        coeffs = coeff * np.concatenate(([1.0], np.cumprod(ratio(idx[:-1]))))
        terms = coeffs if weight is None else coeffs * weight(idx)
        small = np.flatnonzero(np.abs(terms) < ctrl.abs_tol)
        if small.size:
            cut = int(small[0]) + 1
            chunks.append(terms[:cut])
            used += cut
            reached_tol = True
            break
        chunks.append(terms)
        used += count
        coeff = float(coeffs[-1] * ratio(idx[-1:])[0])
        m0 += count

    terms = np.concatenate(chunks)
    partial = math.fsum(terms)
    if reached_tol:
        logger.log("DEBUG", f"{label}: {used} terms, tolerance reached")
        return SeriesResult(value=partial, terms_used=used, converged=True)

    if ctrl.tail_policy is TailPolicy.TRUNCATE:
        logger.log("DEBUG", f"{label}: budget of {used} terms exhausted without tail policy")
        return SeriesResult(value=partial, terms_used=used, converged=False)

    tail, err = _tail_estimate(terms, start, decay_exponent)
    converged = math.isfinite(err) and err <= ctrl.tail_tol
    logger.log("DEBUG", f"{label}: {used} terms, tail {tail:.3e}, tail error {err:.3e}")
    return SeriesResult(value=partial + tail, terms_used=used, converged=converged,
                        tail_estimate=tail, error_estimate=err)


def require_converged(result: SeriesResult, label: str) -> float:
    if not result.converged:
        raise ConvergenceError(
            f"{label} did not converge after {result.terms_used} terms "
            f"(error estimate {result.error_estimate:.3e})",
            partial_sum=result.value, terms_used=result.terms_used)
    return result.value


def gauss_summation(a: float, b: float, c: float) -> float:
    """2F1(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)) for c - a - b > 0."""
    if c - a - b <= 0:
        raise DomainError(f"Gauss summation needs c - a - b > 0, got {c - a - b:g}")
    return float(gamma_fn(c) * gamma_fn(c - a - b) * special.rgamma(c - a) * special.rgamma(c - b))


def hyp2f1_result(args: Hyp2F1Args, ctrl: Optional[SeriesControl] = None) -> SeriesResult:
    """Power-series evaluation of 2F1 for z < 1 with the full convergence report."""
    if args.z >= 1.0:
        raise DomainError("the power series path of 2F1 needs z < 1")
    a, b, c, z = args.a, args.b, args.c, args.z

    def ratio(m: np.ndarray) -> np.ndarray:
        return (a + m) * (b + m) * z / ((c + m) * (m + 1.0))

    return sum_series(1.0, ratio, ctrl or SeriesControl(), label=f"2F1({a:g},{b:g};{c:g};{z:g})")


def hyp2f1(args: Hyp2F1Args, ctrl: Optional[SeriesControl] = None) -> float:
    """
    Gauss hypergeometric function 2F1(a, b; c; z) on 0 <= z <= 1.

    Args:
        args: Parameters; z = 1 uses Gauss summation
        ctrl: Series policy for z < 1

    Returns:
        Function value

    Raises:
        DomainError: z = 1 with c - a - b <= 0
        ConvergenceError: series budget exhausted
    """
    if args.z == 1.0:
        return gauss_summation(args.a, args.b, args.c)
    return require_converged(hyp2f1_result(args, ctrl), "2F1 series")


def a_beta(beta: float) -> float:
    """A(beta) = Gamma((3-beta)/2) / (sqrt(pi) Gamma(2 - beta/2)), defined for beta in (0, 2)."""
    if not 0.0 < beta < 2.0:
        raise DomainError(f"A(beta) is defined for beta in (0, 2), got {beta:g}")
    return gamma_fn((3.0 - beta) / 2.0) / (_SQRT_PI * gamma_fn(2.0 - beta / 2.0))


def soma_closed_form_gamma(beta: float) -> float:
    """Closed form of the second kernel series written with Gamma((4-beta)/2)."""
    if not 0.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (0, 2), got {beta:g}")
    return gamma_fn((3.0 - beta) / 2.0) / ((beta - 2.0) * _SQRT_PI * gamma_fn((4.0 - beta) / 2.0))


def series_A(beta: float, ctrl: Optional[SeriesControl] = None) -> float:
    """Sum over m >= 0 of c_m / (2m + 2); equals A(beta)."""
    if not 0.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (0, 2), got {beta:g}")
    result = sum_series(1.0, kernel_ratio(beta), ctrl or SeriesControl(),
                        weight=lambda m: 1.0 / (2.0 * m + 2.0),
                        decay_exponent=kernel_decay_exponent(beta), label=f"series_A({beta:g})")
    return require_converged(result, "series_A")


def series_soma(beta: float, ctrl: Optional[SeriesControl] = None) -> float:
    """Sum over m >= 0 of c_m / (2m + beta - 2); equals A(beta) / (beta - 2)."""
    if not 0.0 < beta < 2.0:
        raise DomainError(f"beta must lie in (0, 2), got {beta:g}")
    result = sum_series(1.0, kernel_ratio(beta), ctrl or SeriesControl(),
                        weight=lambda m: 1.0 / (2.0 * m + beta - 2.0),
                        decay_exponent=kernel_decay_exponent(beta), label=f"series_soma({beta:g})")
    return require_converged(result, "series_soma")


def inc_beta(x: float, a: float, b: float, ctrl: Optional[SeriesControl] = None) -> float:
    """
    Incomplete Beta B_x(a, b) = (x^a / a) 2F1(a, 1 - b; a + 1; x), b may be negative.

    Args:
        x: Upper limit in (0, 1]
        a: First parameter, positive
        b: Second parameter; b <= 0 requires x < 1
        ctrl: Series policy

    Returns:
        Integral of u^(a-1) (1-u)^(b-1) over (0, x)
    """
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must lie in (0, 1], got {x:g}")
    if a <= 0.0:
        raise DomainError(f"a must be positive, got {a:g}")
    if x == 1.0 and b <= 0.0:
        raise DomainError(f"B_1(a, b) diverges for b = {b:g} <= 0")
    return x ** a / a * hyp2f1(Hyp2F1Args(a=a, b=1.0 - b, c=a + 1.0, z=x), ctrl)
