"""
Identity suite behind the ``verify`` command: every closed form of the
special-function and kernel layers against an independent evaluation.
"""
import math
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from services.kernel import (angular_integral, angular_integral_quadrature, annulus_inner, annulus_outer,
                             annulus_outer_termwise, leading_constant, quad_kernel_annulus)
from services.specfun import a_beta, inc_beta, series_A, series_soma, soma_closed_form_gamma
from utils.errors import AccuracyError, ConvergenceError, DomainError
from utils.logger.logger import LabLogger
from utils.validators import IdentityRow, KernelSpec, QuadControl, SeriesControl, VerifyParams

logger = LabLogger()

SERIES_BETAS = tuple(round(1.1 + 0.1 * i, 1) for i in range(9))
KERNEL_BETAS = (1.2, 1.5, 1.8)
KERNEL_LS = (1.5, 2.0, 4.0)
ANGULAR_RADII = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.5, 2.0, 5.0)

CheckJob = Callable[[], IdentityRow]


def _compare(identity: str, beta: Optional[float], L: Optional[float], closed: Callable[[], float],
             oracle: Callable[[], float], tol: float, relative: bool = False) -> IdentityRow:
    """Evaluate both sides; numerical failures become failing rows."""
    passed = True
    try:
        closed_value = closed()
    except ConvergenceError as exc:
        closed_value, passed = exc.partial_sum, False
    try:
        oracle_value = oracle()
    except AccuracyError as exc:
        oracle_value, passed = exc.best_estimate, False
    diff = abs(closed_value - oracle_value)
    limit = tol * abs(oracle_value) if relative else tol
    passed = passed and diff <= limit
    if not passed:
        logger.log("WARNING", f"{identity} failed at beta={beta} L={L}: |diff| = {diff:.3e} > {limit:.3e}")
    return IdentityRow(identity=identity, beta=beta, L=L, closed_form=closed_value, oracle=oracle_value,
                       abs_diff=diff, passed=passed)


def _oracle_annulus(beta: float, r_in: float, r_out: float, quad: QuadControl) -> float:
    return quad_kernel_annulus(KernelSpec(beta=beta, r_in=r_in, r_out=r_out), quad)[0]


def _inc_beta_quadrature(x: float, a: float, b: float) -> float:
    value, _ = integrate.quad(lambda u: (1.0 - u) ** (b - 1.0), 0.0, x, weight='alg', wvar=(a - 1.0, 0.0),
                              epsabs=1e-13, epsrel=1e-12)
    return float(value)


def _perturbed_a(beta: float, perturb: float) -> Optional[float]:
    return a_beta(beta) * (1.0 + perturb) if perturb else None


def _a_closed(beta: float, perturb: float) -> float:
    return a_beta(beta) * (1.0 + perturb)


def _soma_closed(beta: float, perturb: float) -> float:
    return _a_closed(beta, perturb) / (beta - 2.0)


def _total_closed(beta: float, L: float, ctrl: SeriesControl, a_value: Optional[float]) -> float:
    return 2 * math.pi * leading_constant(beta, L, ctrl, a_value=a_value)


def build_checks(params: VerifyParams, seed: int, ctrl: Optional[SeriesControl] = None,
                 quad: Optional[QuadControl] = None) -> list[CheckJob]:
    """
    Jobs for every identity row, in report order.

    ``params.beta`` / ``params.L`` restrict the grids to one value; a nonzero
    ``params.perturb_a`` multiplies A(beta) by 1 + perturb_a on every closed
    form that uses it, which must make those rows fail.
    """
    ctrl = ctrl or SeriesControl.tight()
    quad = quad or QuadControl()
    series_betas = (params.beta,) if params.beta is not None else SERIES_BETAS
    kernel_betas = (params.beta,) if params.beta is not None else KERNEL_BETAS
    kernel_ls = (params.L,) if params.L is not None else KERNEL_LS
    p = params.perturb_a
    jobs: list[CheckJob] = []

    for beta in series_betas:
        jobs.append(partial(_compare, "series_identity", beta, None, partial(_a_closed, beta, p),
                            partial(series_A, beta, ctrl), params.series_tol))
        jobs.append(partial(_compare, "soma_beta", beta, None,
                            partial(_soma_closed, beta, p),
                            partial(series_soma, beta, ctrl), params.soma_tol))
        jobs.append(partial(_compare, "soma_beta_gamma_form", beta, None,
                            partial(soma_closed_form_gamma, beta),
                            partial(series_soma, beta, ctrl), params.soma_tol))

    for beta in kernel_betas:
        for r in ANGULAR_RADII:
            jobs.append(partial(_compare, f"key_Gauss[r={r:g}]", beta, None,
                                partial(angular_integral, r, beta, ctrl),
                                partial(angular_integral_quadrature, r, beta), params.angular_tol))

        a_value = _perturbed_a(beta, p)
        jobs.append(partial(_compare, "annulus_inner", beta, None,
                            partial(annulus_inner, beta, a_value=a_value),
                            partial(_oracle_annulus, beta, 0.0, 1.0, quad), params.annulus_rel_tol, True))
        for L in kernel_ls:
            jobs.append(partial(_compare, "annulus_outer", beta, L,
                                partial(annulus_outer, beta, L, ctrl, a_value=a_value),
                                partial(_oracle_annulus, beta, 1.0, L, quad), params.annulus_rel_tol, True))
            jobs.append(partial(_compare, "annulus_outer_termwise", beta, L,
                                partial(annulus_outer_termwise, beta, L, ctrl),
                                partial(_oracle_annulus, beta, 1.0, L, quad), params.annulus_rel_tol, True))
            jobs.append(partial(_compare, "annulus_total", beta, L,
                                partial(_total_closed, beta, L, ctrl, a_value),
                                partial(_oracle_annulus, beta, 0.0, L, quad), params.annulus_rel_tol, True))

    rng = np.random.default_rng(seed)
    for _ in range(params.inc_beta_samples):
        x, a, b = rng.uniform(0.05, 0.9), rng.uniform(0.2, 2.0), rng.uniform(-1.5, 2.0)
        jobs.append(partial(_compare, f"inc_beta[x={x:.4f},a={a:.4f},b={b:.4f}]", None, None,
                            partial(inc_beta, x, a, b, ctrl),
                            partial(_inc_beta_quadrature, x, a, b), params.identity_rel_tol, True))
    return jobs


def run_checks(params: VerifyParams, seed: int) -> list[IdentityRow]:
    """Serial evaluation of every job; the CLI runs the same jobs concurrently."""
    try:
        return [job() for job in build_checks(params, seed)]
    except DomainError:
        logger.log("ERROR", f"verify parameters outside the identity domain: {params}")
        raise
