from services.sim.diagnostics import (calibrate_velocity_constant, diagnostics, ellipse_eccentricity,
                                      holder_seminorm_estimate, level_distance, measure_stream_differences,
                                      opening_angle_estimate)
from services.sim.initial_data import make_initial_field
from services.sim.snapshot import read_snapshot, write_snapshot
from services.sim.solver import DiagnosticsCollector, run, step
from services.sim.spectral import SpectralGrid, riesz_stream, velocity

__all__ = [
    'SpectralGrid', 'riesz_stream', 'velocity', 'make_initial_field', 'step', 'run', 'DiagnosticsCollector',
    'diagnostics', 'holder_seminorm_estimate', 'opening_angle_estimate', 'ellipse_eccentricity',
    'level_distance', 'measure_stream_differences', 'calibrate_velocity_constant', 'read_snapshot',
    'write_snapshot',
]
