"""
Pseudo-spectral transport solver: three-stage strong-stability-preserving
Runge-Kutta steps of theta_t + u . grad(theta) = 0 with a dealiased product.
"""
import math
from typing import Callable, Optional

import numpy as np
from path import Path

from services.sim.diagnostics import diagnostics
from services.sim.initial_data import make_initial_field
from services.sim.snapshot import write_snapshot
from services.sim.spectral import SpectralGrid
from utils.errors import CFLViolation, SimulationAborted
from utils.logger.logger import LabLogger
from utils.validators import DiagRecord, ScalarField, SimConfig

logger = LabLogger()

RecordSink = Callable[[DiagRecord], None]

SAFETY = 0.9


class DiagnosticsCollector:
    """Serial sink keeping every emitted record in order."""

    def __init__(self):
        self.records: list[DiagRecord] = []

    def __call__(self, record: DiagRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last(self) -> Optional[DiagRecord]:
        return self.records[-1] if self.records else None


def courant_number(dt: float, max_speed: float, cfg: SimConfig) -> float:
    return dt * max_speed * cfg.n / cfg.box_length


def stable_dt(max_speed: float, cfg: SimConfig) -> float:
    if max_speed == 0.0:
        return math.inf
    return SAFETY * cfg.cfl_max * cfg.box_length / (cfg.n * max_speed)


def _tendency(theta_hat: np.ndarray, stream: np.ndarray, grid: SpectralGrid) -> tuple[np.ndarray, float]:
    """-P(u . grad theta_P) with P the dealiasing projection; also returns max |u|."""
    filtered = theta_hat * grid.mask
    psi_hat = filtered * stream
    u1, u2 = grid.inverse(grid.ik2 * psi_hat), grid.inverse(-grid.ik1 * psi_hat)
    g1, g2 = grid.gradient_from_spectrum(filtered)
    advection = grid.forward(u1 * g1 + u2 * g2) * grid.mask
    return -advection, float(np.sqrt(u1 ** 2 + u2 ** 2).max())


def step(field: ScalarField, cfg: SimConfig, grid: Optional[SpectralGrid] = None,
         dt: Optional[float] = None) -> ScalarField:
    """
    One SSP-RK3 step of size ``dt`` (default ``cfg.dt``).

    Raises:
        CFLViolation: the Courant number at the start of the step exceeds cfg.cfl_max
    """
    grid = grid or SpectralGrid(cfg.n, cfg.box_length, cfg.dealias)
    dt = cfg.dt if dt is None else dt
    stream = grid.stream_multiplier(cfg.beta)

    theta0 = grid.forward(field.values)
    rate0, max_speed = _tendency(theta0, stream, grid)
    if courant_number(dt, max_speed, cfg) > cfg.cfl_max:
        raise CFLViolation(f"dt = {dt:g} violates the CFL limit {cfg.cfl_max:g} at t = {field.time:g}",
                           suggested_dt=stable_dt(max_speed, cfg))

    theta1 = theta0 + dt * rate0
    theta2 = 0.75 * theta0 + 0.25 * (theta1 + dt * _tendency(theta1, stream, grid)[0])
    theta3 = theta0 / 3.0 + 2.0 / 3.0 * (theta2 + dt * _tendency(theta2, stream, grid)[0])
    return field.with_values(grid.inverse(theta3), time=field.time + dt)


def run(cfg: SimConfig, sink: RecordSink, snapshot_dir: Optional[Path] = None) -> ScalarField:
    """
    Integrate from the initial field to cfg.t_end.

    A record is emitted at t = 0, every cfg.diag_every steps and at the end.
    CFL rejections shrink dt for the rest of the run. Non-finite values abort
    with the last good record.
    """
    grid = SpectralGrid(cfg.n, cfg.box_length, cfg.dealias)
    field = make_initial_field(cfg)
    record = diagnostics(field, cfg, None, grid)
    sink(record)

    dt = cfg.dt
    initial_speed = record.sup_velocity
    if courant_number(dt, initial_speed, cfg) > cfg.cfl_max:
        dt = stable_dt(initial_speed, cfg)
        logger.log("WARNING", f"dt = {cfg.dt:g} exceeds the CFL limit at t = 0, using {dt:.6g}")

    logger.log("INFO", f"Simulation start: beta={cfg.beta:g} n={cfg.n} dt={dt:.6g} t_end={cfg.t_end:g}")
    steps = 0
    slack = 1e-12 * max(1.0, cfg.t_end)
    while field.time < cfg.t_end - slack:
        h = min(dt, cfg.t_end - field.time)
        try:
            field = step(field, cfg, grid, dt=h)
        except CFLViolation as exc:
            dt = exc.suggested_dt
            logger.log("WARNING", f"Step rejected at t = {field.time:.6g}, reducing dt to {dt:.6g}")
            continue
        steps += 1
        if not field.is_finite():
            logger.log("ERROR", f"Non-finite field after step {steps} (t = {field.time:.6g})")
            raise SimulationAborted(f"simulation diverged at t = {field.time:g}", last_record=record)

        done = field.time >= cfg.t_end - slack
        if steps % cfg.diag_every == 0 or done:
            record = diagnostics(field, cfg, record, grid)
            sink(record)
        if snapshot_dir is not None and cfg.snapshot_every and steps % cfg.snapshot_every == 0:
            write_snapshot(Path(snapshot_dir) / f"theta_{steps:06d}.bin", field)

    logger.log("INFO", f"Simulation finished after {steps} steps at t = {field.time:.6g}")
    return field
