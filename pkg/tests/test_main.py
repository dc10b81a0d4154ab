import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import csv
import io
import math
import tempfile
import unittest
from unittest.mock import patch

from scipy import special

from main import build_parser, flag_for, main
from services.kernel import annulus_inner
from utils.logger.logger import LabLogger


def read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


class TestParser(unittest.TestCase):
    """Command-line surface"""

    def test_flag_names(self):
        self.assertEqual(flag_for('t_end'), '--t-end')
        self.assertEqual(flag_for('K'), '--K')

    def test_fields_become_flags(self):
        args = build_parser().parse_args(['simulate', '--t-end', '0.5', '--initial-data', 'elliptic'])
        self.assertEqual(args.t_end, '0.5')
        self.assertEqual(args.initial_data, 'elliptic')
        self.assertIsNone(args.beta)
        self.assertFalse(args.dump_config)


class TestMain(unittest.TestCase):
    """Exit codes and artifacts of each command"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_main(self, argv: list[str]) -> tuple[int, str, str]:
        stdout, stderr = io.StringIO(), io.StringIO()
        with patch('sys.stdout', stdout), patch('sys.stderr', stderr):
            code = main(argv)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_dump_config(self):
        config = str(project_root / 'configs' / 'saddle.cfg')
        code, out, _ = self.run_main(['simulate', '--config', config, '--n', '64', '--dump-config'])
        self.assertEqual(code, 0)
        self.assertIn('beta = 1.8\n', out)
        self.assertIn('n = 64\n', out)
        self.assertIn('level_values = 0.9,0.95\n', out)

    def test_invalid_value_exits_with_usage_error(self):
        code, _, err = self.run_main(['verify', '--beta', '2.5', '--out', str(self.out)])
        self.assertEqual(code, 2)
        self.assertIn("key 'beta'", err)
        self.assertEqual(len(err.strip().splitlines()), 1)

    def test_missing_required_key(self):
        code, _, err = self.run_main(['simulate', '--n', '64', '--out', str(self.out)])
        self.assertEqual(code, 2)
        self.assertIn('missing required key', err)

    def test_missing_config_file(self):
        code, _, _ = self.run_main(['bounds', '--config', str(self.out / 'absent.cfg')])
        self.assertEqual(code, 2)

    def test_bounds_with_large_K(self):
        target = self.out / 'bounds.csv'
        code, _, _ = self.run_main(['bounds', '--beta', '1.5', '--K', '1.5', '--L', '2', '--out', str(target)])
        self.assertEqual(code, 0)
        rows = read_rows(target)
        self.assertEqual(len(rows), 1)
        self.assertEqual(float(rows[0]['L_threshold']), 1.0)
        self.assertEqual(float(rows[0]['sigma']), 0.25)
        self.assertLessEqual(float(rows[0]['lower']), float(rows[0]['upper']))

    def test_bounds_grid_is_sorted(self):
        target = self.out / 'bounds.csv'
        code, _, _ = self.run_main(['bounds', '--beta', '1.8,1.4', '--sigma-fraction', '0.5,0.25',
                                    '--out', str(target)])
        self.assertEqual(code, 0)
        keys = [(float(r['beta']), float(r['sigma'])) for r in read_rows(target)]
        self.assertEqual(len(keys), 4)
        self.assertEqual(keys, sorted(keys))

    def test_bounds_below_threshold(self):
        code, _, err = self.run_main(['bounds', '--beta', '1.5', '--K', '0.5', '--L', '1.1',
                                      '--out', str(self.out)])
        self.assertEqual(code, 2)
        self.assertIn('threshold', err)

    def test_bounds_small_sigma_radius_underflow(self):
        code, _, err = self.run_main(['bounds', '--beta', '1.1', '--sigma', '0.01', '--K', '1.1', '--L', '2',
                                      '--out', str(self.out)])
        self.assertEqual(code, 2)
        self.assertIn('underflow', err)
        self.assertEqual(len(err.strip().splitlines()), 1)

    def test_verify_detects_perturbation(self):
        args = ['verify', '--beta', '1.5', '--L', '2', '--inc-beta-samples', '0']
        code, _, _ = self.run_main(args + ['--out', str(self.out / 'clean')])
        self.assertEqual(code, 0)
        code, _, err = self.run_main(args + ['--perturb-a', '0.001', '--out', str(self.out / 'perturbed')])
        self.assertEqual(code, 1)
        self.assertIn('failed', err)
        rows = read_rows(self.out / 'perturbed' / 'verify.csv')
        self.assertIn('false', [row['pass'] for row in rows])

    def test_blowup_time(self):
        code, _, _ = self.run_main(['blowup-time', '--beta', '1.5', '--gamma0', '0.1,0.01', '--out', str(self.out)])
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'blowup_time.csv')
        self.assertEqual([float(r['gamma0']) for r in rows], [0.01, 0.1])
        expected = special.exp1(0.5 * math.log(100.0))
        self.assertAlmostEqual(float(rows[0]['T_star_lower']) / expected, 1.0, delta=1e-6)

    def test_angle_power_envelope(self):
        target = self.out / 'angle.csv'
        code, _, _ = self.run_main(['angle', '--envelope', 'power', '--beta', '1.5', '--gamma0', '0.01',
                                    '--C', '1', '--out', str(target), '--plot'])
        self.assertEqual(code, 0)
        rows = read_rows(target)
        self.assertAlmostEqual(float(rows[0]['gamma']), 0.01, places=15)
        self.assertEqual(float(rows[-1]['gamma']), 0.0)
        self.assertAlmostEqual(float(rows[-1]['t']), 0.2, delta=1e-6)
        self.assertTrue((self.out / 'angle.png').is_file())

    def test_angle_upper_envelope_steep_beta(self):
        target = self.out / 'angle.csv'
        code, _, _ = self.run_main(['angle', '--envelope', 'upper', '--beta', '1.8', '--gamma0', '0.01',
                                    '--out', str(target)])
        self.assertEqual(code, 0)
        rows = read_rows(target)
        self.assertEqual(float(rows[-1]['gamma']), 0.0)
        self.assertTrue(all(math.isfinite(float(row['t'])) for row in rows))

    def test_compute_step_is_timed(self):
        with patch.object(LabLogger, 'log') as log:
            code, _, _ = self.run_main(['oracle', '--beta', '1.5', '--out', str(self.out)])
        self.assertEqual(code, 0)
        messages = [call.args[1] for call in log.call_args_list if call.args and call.args[0] == 'debug']
        self.assertTrue(any('OracleCommand.compute' in message for message in messages))

    def test_oracle(self):
        code, _, _ = self.run_main(['oracle', '--beta', '1.5', '--out', str(self.out)])
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'oracle.csv')
        self.assertAlmostEqual(float(rows[0]['value']) / annulus_inner(1.5), 1.0, delta=1e-5)

    def test_simulate(self):
        code, _, _ = self.run_main(['simulate', '--beta', '1.5', '--n', '16', '--dt', '0.01', '--t-end', '0.02',
                                    '--initial-data', 'single_mode', '--out', str(self.out)])
        self.assertEqual(code, 0)
        rows = read_rows(self.out / 'diagnostics.csv')
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[0]['opening_angle'], '')
        self.assertAlmostEqual(float(rows[-1]['time']), 0.02, places=12)


if __name__ == '__main__':
    unittest.main()
