import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import asyncio
import tempfile
import unittest

import numpy as np

from services import reporting
from utils.validators import AngleState, AngleTrajectory, DiagRecord


def make_record(time: float, opening_angle=None) -> DiagRecord:
    return DiagRecord(time=time, sup_theta=1.0, l2_theta=2.0, sup_grad=3.0 + time, holder_seminorm=1.5,
                      theta_at_origin=1.0, opening_angle=opening_angle, level_distance=None,
                      holder_time_integral=1.5 * time, sup_velocity=0.5)


class TestCsv(unittest.TestCase):
    """Cell rendering and CSV text"""

    def test_render_cell(self):
        self.assertEqual(reporting.render_cell(None), '')
        self.assertEqual(reporting.render_cell(True), 'true')
        self.assertEqual(reporting.render_cell(False), 'false')
        self.assertEqual(reporting.render_cell(0.1), '0.1')
        self.assertEqual(reporting.render_cell(np.float64(1e-20)), '1e-20')
        self.assertEqual(reporting.render_cell(3), '3')
        self.assertEqual(reporting.render_cell('key_Gauss[r=0.5]'), 'key_Gauss[r=0.5]')

    def test_csv_text(self):
        text = reporting.csv_text(['a', 'b'], [[1.5, None], [True, 'x,y']])
        self.assertEqual(text, 'a,b\n1.5,\ntrue,"x,y"\n')

    def test_float_cells_round_trip(self):
        value = 0.1 + 0.2
        text = reporting.csv_text(['v'], [[value]])
        self.assertEqual(float(text.splitlines()[1]), value)

    def test_write_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = Path(tmp) / 'nested' / 'out.csv'
            written = asyncio.run(reporting.write_csv(target, reporting.TRAJECTORY_HEADER, [[0.0, 0.01]]))
            self.assertTrue(Path(written).is_file())
            self.assertEqual(Path(written).read_text(encoding='utf-8'), 't,gamma\n0.0,0.01\n')


class TestRows(unittest.TestCase):
    """Row builders for the simulation and trajectory tables"""

    def test_diag_rows_follow_header(self):
        rows = reporting.diag_rows([make_record(0.0), make_record(0.5, opening_angle=0.2)])
        self.assertEqual(len(rows), 2)
        self.assertEqual(len(rows[0]), len(reporting.DIAG_HEADER))
        self.assertIsNone(rows[0][reporting.DIAG_HEADER.index('opening_angle')])
        self.assertEqual(rows[1][reporting.DIAG_HEADER.index('opening_angle')], 0.2)
        self.assertEqual(rows[1][reporting.DIAG_HEADER.index('holder_time_integral')], 0.75)

    def test_trajectory_rows(self):
        trajectory = AngleTrajectory(samples=[AngleState(t=0.0, gamma=0.01), AngleState(t=0.1, gamma=0.005)],
                                     gamma_floor=1e-12)
        self.assertEqual(reporting.trajectory_rows(trajectory), [[0.0, 0.01], [0.1, 0.005]])


class TestPlots(unittest.TestCase):
    """Image output"""

    def test_plot_diagnostics_skips_empty_quantities(self):
        records = [make_record(0.0, opening_angle=0.3), make_record(0.5, opening_angle=0.2)]
        with tempfile.TemporaryDirectory() as tmp:
            written = reporting.plot_diagnostics(records, tmp, dpi=40)
            names = sorted(Path(p).name for p in written)
            self.assertEqual(names, ['holder_seminorm.png', 'opening_angle.png', 'sup_grad.png'])
            self.assertTrue(all(Path(p).is_file() for p in written))

    def test_plot_trajectory(self):
        trajectory = AngleTrajectory(samples=[AngleState(t=0.0, gamma=0.01), AngleState(t=0.1, gamma=0.001),
                                              AngleState(t=0.2, gamma=0.0)], gamma_floor=1e-12)
        with tempfile.TemporaryDirectory() as tmp:
            path = reporting.plot_trajectory(trajectory, Path(tmp) / 'angle.png', dpi=40)
            self.assertTrue(Path(path).is_file())

    def test_plot_blowup_times(self):
        self.assertIsNone(reporting.plot_blowup_times([], 'unused.png'))
        with tempfile.TemporaryDirectory() as tmp:
            rows = [[1.5, 0.1, 1.0, 0.3], [1.5, 0.01, 1.0, 0.03]]
            path = reporting.plot_blowup_times(rows, Path(tmp) / 'blowup.png', dpi=40)
            self.assertTrue(Path(path).is_file())


if __name__ == '__main__':
    unittest.main()
