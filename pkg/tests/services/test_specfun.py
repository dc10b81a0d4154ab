import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
import unittest

import numpy as np
from scipy import integrate, special

from services.specfun import (a_beta, gamma_fn, gauss_summation, hyp2f1, hyp2f1_result, inc_beta,
                              kernel_coefficients, kernel_ratio, pochhammer, require_converged,
                              series_A, series_soma, soma_closed_form_gamma, sum_series)
from utils.errors import ConvergenceError, DomainError
from utils.validators import Hyp2F1Args, SeriesControl, TailPolicy

try:
    import mpmath
except ImportError:  # optional test extra
    mpmath = None


class TestElementaryFunctions(unittest.TestCase):
    """Gamma, Pochhammer and the kernel coefficients"""

    def test_gamma_matches_factorial(self):
        self.assertAlmostEqual(gamma_fn(5.0), 24.0, places=12)
        self.assertAlmostEqual(gamma_fn(0.5), math.sqrt(math.pi), places=13)

    def test_gamma_poles_rejected(self):
        for x in (0.0, -1.0, -3.0):
            with self.assertRaises(DomainError):
                gamma_fn(x)

    def test_gamma_negative_non_integer(self):
        self.assertAlmostEqual(gamma_fn(-0.5), -2.0 * math.sqrt(math.pi), places=12)

    def test_pochhammer_small_orders(self):
        self.assertEqual(pochhammer(0.5, 0), 1.0)
        self.assertAlmostEqual(pochhammer(0.5, 3), 0.5 * 1.5 * 2.5, places=14)

    def test_pochhammer_large_order_uses_library(self):
        self.assertAlmostEqual(pochhammer(0.3, 100) / special.poch(0.3, 100), 1.0, places=10)

    def test_pochhammer_splits_over_orders(self):
        for a in (0.3, 1.5, -2.5):
            for m, n in ((0, 7), (3, 5), (20, 20), (40, 40), (70, 3)):
                with self.subTest(a=a, m=m, n=n):
                    split = pochhammer(a, m) * pochhammer(a + m, n)
                    self.assertAlmostEqual(pochhammer(a, m + n) / split, 1.0, delta=1e-11)

    def test_pochhammer_rejects_negative_order(self):
        with self.assertRaises(DomainError):
            pochhammer(1.0, -1)

    def test_kernel_coefficients_first_terms(self):
        beta = 1.5
        c = kernel_coefficients(beta, 0, 3)
        self.assertAlmostEqual(c[0], 1.0, places=14)
        self.assertAlmostEqual(c[1], beta / 4.0, places=14)
        self.assertAlmostEqual(c[2], (beta / 2) * (beta / 2 + 1) * 0.5 * 1.5 / 4.0, places=14)

    def test_kernel_ratio_matches_coefficients(self):
        beta = 1.3
        c = kernel_coefficients(beta, 10, 6)
        ratio = kernel_ratio(beta)(np.arange(10, 15, dtype=float))
        np.testing.assert_allclose(c[1:] / c[:-1], ratio, rtol=1e-12)


class TestSumSeries(unittest.TestCase):
    """Ratio-driven summation engine"""

    def test_geometric_series_reaches_tolerance(self):
        result = sum_series(1.0, lambda m: np.full_like(m, 0.5), SeriesControl(abs_tol=1e-17))
        self.assertTrue(result.converged)
        self.assertAlmostEqual(result.value, 2.0, places=14)

    def test_truncate_policy_reports_non_convergence(self):
        ctrl = SeriesControl(max_terms=100, tail_policy=TailPolicy.TRUNCATE)
        result = sum_series(1.0, lambda m: ((m + 1.0) / (m + 2.0)) ** 2, ctrl)
        self.assertFalse(result.converged)
        self.assertEqual(result.terms_used, 100)
        with self.assertRaises(ConvergenceError) as ctx:
            require_converged(result, "basel")
        self.assertEqual(ctx.exception.terms_used, 100)
        self.assertAlmostEqual(ctx.exception.partial_sum, result.value)

    def test_power_tail_recovers_basel_sum(self):
        ctrl = SeriesControl(max_terms=100, tail_policy=TailPolicy.TAIL_BOUND)
        result = sum_series(1.0, lambda m: ((m + 1.0) / (m + 2.0)) ** 2, ctrl, decay_exponent=2.0)
        self.assertTrue(result.converged)
        self.assertAlmostEqual(result.value, math.pi ** 2 / 6.0, places=10)
        self.assertGreater(result.tail_estimate, 0.0)


class TestHypergeometric(unittest.TestCase):
    """2F1 on [0, 1] against scipy"""

    def test_power_series_inside_disk(self):
        for a, b, c, z in ((0.5, 0.5, 1.5, 0.25), (0.75, 0.5, 1.0, 0.81), (1.2, -0.3, 2.2, 0.6)):
            value = hyp2f1(Hyp2F1Args(a=a, b=b, c=c, z=z))
            self.assertAlmostEqual(value, special.hyp2f1(a, b, c, z), places=12)

    def test_gauss_summation_at_one(self):
        value = hyp2f1(Hyp2F1Args(a=0.3, b=0.4, c=1.5, z=1.0))
        self.assertAlmostEqual(value, special.hyp2f1(0.3, 0.4, 1.5, 1.0), places=12)
        self.assertAlmostEqual(value, gauss_summation(0.3, 0.4, 1.5), places=14)

    def test_series_approaches_gauss_value(self):
        a, b, c = 0.25, 0.5, 2.25
        limit = gauss_summation(a, b, c)
        gaps = []
        for k in (1, 2, 3, 4):
            z = 1.0 - 10.0 ** -k
            value = hyp2f1(Hyp2F1Args(a=a, b=b, c=c, z=z))
            self.assertAlmostEqual(value, special.hyp2f1(a, b, c, z), places=10)
            gaps.append(limit - value)
        self.assertTrue(all(0.0 < later < earlier for earlier, later in zip(gaps, gaps[1:])))
        self.assertLess(gaps[-1], 1e-4)

    def test_divergent_gauss_sum_rejected(self):
        with self.assertRaises(DomainError):
            hyp2f1(Hyp2F1Args(a=0.75, b=0.5, c=1.0, z=1.0))

    def test_result_reports_terms(self):
        result = hyp2f1_result(Hyp2F1Args(a=0.5, b=0.5, c=1.5, z=0.5))
        self.assertTrue(result.converged)
        self.assertGreater(result.terms_used, 10)

    def test_power_series_rejects_z_one(self):
        with self.assertRaises(DomainError):
            hyp2f1_result(Hyp2F1Args(a=0.3, b=0.4, c=1.5, z=1.0))

    @unittest.skipIf(mpmath is None, "mpmath not installed")
    def test_against_arbitrary_precision(self):
        value = hyp2f1(Hyp2F1Args(a=0.65, b=0.5, c=1.0, z=0.9))
        self.assertAlmostEqual(value, float(mpmath.hyp2f1(0.65, 0.5, 1.0, 0.9)), places=11)


class TestKernelSeries(unittest.TestCase):
    """A(beta) and the two kernel series"""

    def test_a_beta_reference_values(self):
        self.assertAlmostEqual(a_beta(1.0), 2.0 / math.pi, places=14)
        self.assertAlmostEqual(a_beta(1.5), 0.7627598, places=6)

    def test_a_beta_positive_and_continuous(self):
        values = np.array([a_beta(beta) for beta in np.linspace(0.01, 1.99, 199)])
        self.assertTrue(np.all(np.isfinite(values)))
        self.assertTrue(np.all(values > 0.0))
        self.assertLess(np.abs(np.diff(values)).max(), 0.02)

    def test_a_beta_domain(self):
        for beta in (0.0, 2.0, 2.5):
            with self.assertRaises(DomainError):
                a_beta(beta)

    def test_series_identity(self):
        ctrl = SeriesControl.tight()
        for beta in (1.1, 1.5, 1.9):
            self.assertAlmostEqual(series_A(beta, ctrl), a_beta(beta), delta=1e-8)

    def test_soma_identity(self):
        ctrl = SeriesControl.tight()
        for beta in (1.2, 1.5, 1.8):
            self.assertAlmostEqual(series_soma(beta, ctrl), a_beta(beta) / (beta - 2.0), delta=1e-6)

    def test_gamma_form_agrees_with_a_beta(self):
        for beta in (1.1, 1.5, 1.9):
            self.assertAlmostEqual(soma_closed_form_gamma(beta), a_beta(beta) / (beta - 2.0), places=12)


class TestIncompleteBeta(unittest.TestCase):
    """B_x(a, b) including negative b"""

    def test_positive_b_matches_scipy(self):
        for x, a, b in ((0.3, 0.5, 1.5), (0.8, 2.0, 0.7), (1.0, 1.3, 2.4)):
            expected = special.betainc(a, b, x) * special.beta(a, b)
            self.assertAlmostEqual(inc_beta(x, a, b) / expected, 1.0, places=10)

    def test_random_samples_match_scipy(self):
        rng = np.random.default_rng(7)
        for x, a, b in zip(rng.uniform(0.05, 0.95, 50), rng.uniform(0.2, 3.0, 50), rng.uniform(0.2, 3.0, 50)):
            with self.subTest(x=x, a=a, b=b):
                expected = special.betainc(a, b, x) * special.beta(a, b)
                self.assertAlmostEqual(inc_beta(x, a, b) / expected, 1.0, delta=1e-9)

    def test_negative_b_matches_quadrature(self):
        x, a, b = 0.5, 0.25, -1.5
        expected, _ = integrate.quad(lambda u: (1.0 - u) ** (b - 1.0), 0.0, x, weight='alg',
                                     wvar=(a - 1.0, 0.0), epsabs=1e-13, epsrel=1e-12)
        self.assertAlmostEqual(inc_beta(x, a, b) / expected, 1.0, places=9)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            inc_beta(1.0, 1.0, -0.5)
        with self.assertRaises(DomainError):
            inc_beta(0.5, 0.0, 1.0)
        with self.assertRaises(DomainError):
            inc_beta(1.5, 1.0, 1.0)


if __name__ == '__main__':
    unittest.main()
