import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
import unittest

import numpy as np

from services.angle_dynamics import saddle_angle
from services.sim.diagnostics import (calibrate_velocity_constant, diagnostics, ellipse_eccentricity,
                                      extract_contours, holder_seminorm_estimate, level_distance,
                                      measure_stream_differences, opening_angle_estimate, pair_offsets)
from services.sim.initial_data import make_initial_field
from utils.validators import ScalarField, SimConfig


def mesh_field(n: int, fn) -> ScalarField:
    axis = -math.pi + 2 * math.pi / n * np.arange(n)
    y1, y2 = np.meshgrid(axis, axis, indexing='ij')
    return ScalarField(n=n, values=fn(y1, y2))


class TestHolderSeminorm(unittest.TestCase):
    """Stratified-pair seminorm estimate"""

    def test_pair_offsets(self):
        self.assertEqual(pair_offsets(16), [1, 2, 3, 4, 6, 8])

    def test_cosine_lower_estimate(self):
        field = mesh_field(64, lambda y1, y2: np.cos(y1))
        estimate = holder_seminorm_estimate(field.values, field.spacing, 0.5)
        # the pair at distance pi alone gives 2 / sqrt(pi); the true seminorm is about 1.2045
        self.assertGreaterEqual(estimate, 2.0 / math.sqrt(math.pi) - 1e-12)
        self.assertLessEqual(estimate, 1.21)

    def test_constant_field(self):
        field = mesh_field(32, lambda y1, y2: np.full_like(y1, 2.0))
        self.assertEqual(holder_seminorm_estimate(field.values, field.spacing, 0.5), 0.0)


class TestContours(unittest.TestCase):
    """Level-set geometry"""

    def test_straight_levels(self):
        field = mesh_field(64, lambda y1, y2: y1)
        lines = extract_contours(field, 0.1)
        self.assertEqual(len(lines), 1)
        np.testing.assert_allclose(lines[0][:, 0], 0.1, atol=1e-12)
        self.assertAlmostEqual(level_distance(field, 0.1, 0.3), 0.2, places=9)

    def test_diagonal_levels_on_coarse_grid(self):
        # vertices sit on grid lines 0.39 apart; the nearest vertex pair is 10% farther than the levels
        field = mesh_field(16, lambda y1, y2: y1 + y2)
        self.assertAlmostEqual(level_distance(field, 0.1, 0.5), 0.4 / math.sqrt(2.0), places=9)
        self.assertAlmostEqual(level_distance(field, 0.5, 0.1), 0.4 / math.sqrt(2.0), places=9)

    def test_missing_level(self):
        field = mesh_field(32, lambda y1, y2: np.full_like(y1, 2.0))
        self.assertEqual(extract_contours(field, 1.0), [])
        self.assertIsNone(level_distance(field, 1.0, 1.5))
        self.assertIsNone(opening_angle_estimate(field, 1.0, 1.0))
        self.assertIsNone(ellipse_eccentricity(field, 1.0, 1.0))

    def test_ellipse_eccentricity(self):
        field = mesh_field(128, lambda y1, y2: y1 ** 2 + 2.0 * y2 ** 2)
        eccentricity = ellipse_eccentricity(field, 0.1, 1.0)
        self.assertAlmostEqual(eccentricity / math.sqrt(0.5), 1.0, delta=0.02)

    def test_ellipse_is_not_a_saddle(self):
        field = mesh_field(128, lambda y1, y2: y1 ** 2 + 2.0 * y2 ** 2)
        self.assertIsNone(opening_angle_estimate(field, 0.1, 1.0))

    def test_saddle_opening_angle(self):
        alpha, delta = 0.5, 0.5
        field = mesh_field(128, lambda y1, y2: (alpha * y1 + y2) * (delta * y1 - y2))
        angle = opening_angle_estimate(field, -0.05, 0.7)
        expected, _ = saddle_angle(alpha, delta)
        self.assertAlmostEqual(angle / expected, 1.0, delta=0.02)

    def test_asymmetric_saddle(self):
        alpha, delta = 0.2, 0.6
        field = mesh_field(128, lambda y1, y2: (alpha * y1 + y2) * (delta * y1 - y2))
        angle = opening_angle_estimate(field, -0.05, 0.7)
        self.assertAlmostEqual(angle / (math.atan(alpha) + math.atan(delta)), 1.0, delta=0.02)


class TestRecords(unittest.TestCase):
    """Diagnostic records of simulated fields"""

    def test_saddle_record(self):
        cfg = SimConfig(beta=1.5, n=128, dt=0.01, t_end=0.0, alpha0=0.5, delta0=0.5)
        field = make_initial_field(cfg)
        record = diagnostics(field, cfg)
        self.assertEqual(record.time, 0.0)
        self.assertEqual(record.theta_at_origin, cfg.offset)
        self.assertEqual(record.holder_time_integral, 0.0)
        self.assertGreater(record.sup_velocity, 0.0)
        self.assertIsNotNone(record.level_distance)
        expected, _ = saddle_angle(0.5, 0.5)
        self.assertAlmostEqual(record.opening_angle / expected, 1.0, delta=0.05)

    def test_holder_integral_accumulates(self):
        cfg = SimConfig(beta=1.5, n=32, dt=0.01, t_end=1.0, initial_data='single_mode')
        field = make_initial_field(cfg)
        first = diagnostics(field, cfg)
        second = diagnostics(field.with_values(field.values, time=0.5), cfg, first)
        self.assertIsNone(first.opening_angle)
        self.assertAlmostEqual(second.holder_time_integral, 0.5 * first.holder_norm, places=12)

    def test_stream_differences_of_shear(self):
        field = mesh_field(64, lambda y1, y2: np.cos(y1))
        taus, diffs = measure_stream_differences(field, 1.5, n_pairs=50, max_tau=0.45, seed=5)
        self.assertEqual(len(taus), 50)
        self.assertTrue(np.all(taus > 0.0))
        self.assertTrue(np.all(taus <= 0.45 + 1e-12))
        # psi = cos(x1) is 1-Lipschitz
        self.assertTrue(np.all(diffs <= taus + 1e-10))

    def test_stream_differences_reproducible(self):
        field = mesh_field(32, lambda y1, y2: np.cos(y1) * np.sin(y2))
        first = measure_stream_differences(field, 1.5, n_pairs=10, seed=9)
        second = measure_stream_differences(field, 1.5, n_pairs=10, seed=9)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])

    def test_velocity_constant(self):
        field = mesh_field(64, lambda y1, y2: np.cos(y1))
        constant = calibrate_velocity_constant(field, 1.5, 0.75, 0.05, 1.0)
        self.assertTrue(math.isfinite(constant))
        self.assertGreater(constant, 0.0)


if __name__ == '__main__':
    unittest.main()
