import math

import numpy as np

from utils.validators import InitialDataKind, ProfileKind, ScalarField, SimConfig


def coordinates(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    spacing = cfg.box_length / cfg.n
    axis = -cfg.box_length / 2 + spacing * np.arange(cfg.n)
    return np.meshgrid(axis, axis, indexing='ij')


def profile(s: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """g(s) with g(0) = offset and g'(0) = amplitude."""
    if cfg.profile is ProfileKind.TANH:
        width = cfg.profile_width
        return cfg.offset + cfg.amplitude * width * np.tanh(s / width)
    return cfg.offset + cfg.amplitude * s


def radial_cutoff(y1: np.ndarray, y2: np.ndarray, radius: float) -> np.ndarray:
    """exp(-(r/R)^8): flat to O(r^8) at the origin, below 1e-16 at r = 1.6 R."""
    return np.exp(-((y1 ** 2 + y2 ** 2) / radius ** 2) ** 4)


def hyperbolic_coordinate(y1: np.ndarray, y2: np.ndarray, alpha0: float, delta0: float) -> np.ndarray:
    return (y1 * alpha0 + y2) * (y1 * delta0 - y2)


def make_initial_field(cfg: SimConfig) -> ScalarField:
    """
    Initial scalar for a simulation.

    ``saddle``: g(rho) times the radial cutoff, rho the hyperbolic coordinate,
    so theta(0) = g(0) = offset. ``elliptic``: g(a0 y1^2 + b0 y2^2) times the
    cutoff. ``single_mode``: amplitude * cos(k x1) on the box.
    """
    y1, y2 = coordinates(cfg)
    if cfg.initial_data is InitialDataKind.SINGLE_MODE:
        values = cfg.amplitude * np.cos(cfg.mode_k * 2 * math.pi / cfg.box_length * y1)
    elif cfg.initial_data is InitialDataKind.ELLIPTIC:
        values = profile(cfg.a0 * y1 ** 2 + cfg.b0 * y2 ** 2, cfg) * radial_cutoff(y1, y2, cfg.cutoff_radius)
    else:
        rho = hyperbolic_coordinate(y1, y2, cfg.alpha0, cfg.delta0)
        values = profile(rho, cfg) * radial_cutoff(y1, y2, cfg.cutoff_radius)
    return ScalarField(n=cfg.n, box_length=cfg.box_length, values=values, time=0.0)
