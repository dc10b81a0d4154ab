"""
CSV artifacts and optional plots for the command line.

CSV cells: floats in ``repr`` form, booleans as ``true``/``false``, missing
values as empty cells.
"""
import csv
import io
import math
from typing import Any, Iterable, Optional, Sequence

import aiofiles
import matplotlib
import numpy as np
from path import Path

from utils.logger.logger import LabLogger
from utils.validators import AngleTrajectory, DiagRecord

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

logger = LabLogger()

VERIFY_HEADER = ['identity', 'beta', 'L', 'closed_form', 'oracle', 'abs_diff', 'pass']
BOUNDS_HEADER = ['beta', 'sigma', 'K_const', 'L_threshold', 'L', 'A_beta', 'C_betaL', 'D_betaL',
                 'r_admissible', 'tau', 'lower', 'upper', 'i2', 'i3', 'i4']
TRAJECTORY_HEADER = ['t', 'gamma']
BLOWUP_HEADER = ['beta', 'gamma0', 'C', 'T_star_lower']
ORACLE_HEADER = ['beta', 'r_in', 'r_out', 'v1', 'v2', 'value', 'err_est']
DIAG_HEADER = ['time', 'sup_theta', 'l2_theta', 'sup_grad', 'holder_seminorm', 'theta_at_origin',
               'opening_angle', 'level_distance', 'holder_time_integral', 'sup_velocity']

DIAG_PLOTS = {
    'opening_angle': 'opening angle',
    'holder_seminorm': 'Hölder seminorm',
    'level_distance': 'level-set distance',
    'sup_grad': 'sup |grad theta|',
}


def render_cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([render_cell(value) for value in row])
    return buffer.getvalue()


async def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.makedirs_p()
    text = csv_text(header, rows)
    async with aiofiles.open(path, 'w', encoding='utf-8') as f:
        await f.write(text)
    logger.log("INFO", f"Wrote {text.count(chr(10)) - 1} rows to {path}")
    return path


def diag_rows(records: Iterable[DiagRecord]) -> list[list[Any]]:
    return [[getattr(record, name) for name in DIAG_HEADER] for record in records]


def trajectory_rows(trajectory: AngleTrajectory) -> list[list[float]]:
    return [[state.t, state.gamma] for state in trajectory.samples]


def _line_plot(path: Path, x: np.ndarray, y: np.ndarray, xlabel: str, ylabel: str, dpi: int,
               logy: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        ax.plot(x, y, marker='.', linewidth=1)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if logy and np.all(y[np.isfinite(y)] > 0):
            ax.set_yscale('log')
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, dpi=dpi)
    finally:
        plt.close(fig)
    return path


def plot_diagnostics(records: Sequence[DiagRecord], out_dir: Path, dpi: int = 120) -> list[Path]:
    """One image per tracked quantity; quantities never measured are skipped."""
    out_dir = Path(out_dir)
    out_dir.makedirs_p()
    times = np.array([record.time for record in records])
    written = []
    for name, label in DIAG_PLOTS.items():
        values = np.array([math.nan if getattr(r, name) is None else getattr(r, name) for r in records])
        if not np.isfinite(values).any():
            logger.log("DEBUG", f"No finite values for {name}, plot skipped")
            continue
        written.append(_line_plot(out_dir / f"{name}.png", times, values, 't', label, dpi))
    return written


def plot_trajectory(trajectory: AngleTrajectory, path: Path, dpi: int = 120) -> Path:
    finite = [s for s in trajectory.samples if s.gamma > 0.0]
    return _line_plot(Path(path), np.array([s.t for s in finite]), np.array([s.gamma for s in finite]),
                      't', 'gamma', dpi, logy=True)


def plot_blowup_times(rows: Sequence[Sequence[float]], path: Path, dpi: int = 120) -> Optional[Path]:
    """T* lower bound against gamma0, one point per sweep row."""
    if not rows:
        return None
    data = np.array(rows, dtype=float)
    order = np.argsort(data[:, 1])
    return _line_plot(Path(path), data[order, 1], data[order, 3], 'gamma0', 'T* lower bound', dpi)
