"""
Grid diagnostics of a simulated scalar: norms, a Hölder seminorm estimate,
contour geometry near the origin and simulator measurements used to
cross-check the analytic bounds.
"""
import math
from typing import Optional

import contourpy
import numpy as np

from services.bounds import velocity_sup_bound
from services.sim.spectral import SpectralGrid, grid_for, riesz_stream
from utils.logger.logger import LabLogger
from utils.validators import DiagRecord, InitialDataKind, ScalarField, SimConfig

logger = LabLogger()

DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


def pair_offsets(n: int) -> list[int]:
    """Dyadic separations 2^j and 3 * 2^j up to n/2 nodes."""
    offsets = set()
    step = 1
    while step <= n // 2:
        offsets.add(step)
        if 3 * step <= n // 2:
            offsets.add(3 * step)
        step *= 2
    return sorted(offsets)


def holder_seminorm_estimate(values: np.ndarray, spacing: float, sigma: float) -> float:
    """
    Max of |theta(x) - theta(y)| / |x - y|^sigma over all node pairs whose
    offset is a stratified separation along an axis or a diagonal.

    This is a lower estimate of the true seminorm.
    """
    n = values.shape[0]
    best = 0.0
    for s in pair_offsets(n):
        for d1, d2 in DIRECTIONS:
            shift = (s * d1, s * d2)
            jump = np.abs(values - np.roll(values, shift, axis=(0, 1))).max()
            dist = spacing * math.hypot(min(abs(shift[0]), n - abs(shift[0])),
                                        min(abs(shift[1]), n - abs(shift[1])))
            best = max(best, float(jump) / dist ** sigma)
    return best


def extract_contours(field: ScalarField, level: float) -> list[np.ndarray]:
    """Marching-squares polylines of one level, as (N, 2) arrays of (x1, x2)."""
    axis = field.axis
    generator = contourpy.contour_generator(x=axis, y=axis, z=field.values.T,
                                            line_type=contourpy.LineType.Separate)
    return [np.asarray(line) for line in generator.lines(level) if len(line)]


def _points_near_origin(field: ScalarField, level: float, fit_radius: float) -> Optional[np.ndarray]:
    lines = extract_contours(field, level)
    if not lines:
        return None
    points = np.concatenate(lines)
    points = points[np.hypot(points[:, 0], points[:, 1]) <= fit_radius]
    return points if len(points) >= 6 else None


def opening_angle_estimate(field: ScalarField, level: float, fit_radius: float) -> Optional[float]:
    """
    Angle between the asymptotes of the level curve through the fit disk.

    The points are fitted by y2^2 = a y1^2 + b y1 y2 + k; the asymptote
    slopes are the roots of s^2 - b s - a = 0. None when the contour is
    absent or the fitted conic is not a hyperbola.
    """
    points = _points_near_origin(field, level, fit_radius)
    if points is None:
        return None
    y1, y2 = points[:, 0], points[:, 1]
    design = np.column_stack([y1 ** 2, y1 * y2, np.ones_like(y1)])
    (a, b, _), *_ = np.linalg.lstsq(design, y2 ** 2, rcond=None)
    disc = b * b + 4 * a
    if disc <= 0.0:
        return None
    root = math.sqrt(disc)
    return math.atan((b + root) / 2) - math.atan((b - root) / 2)


def ellipse_eccentricity(field: ScalarField, level: float, fit_radius: float) -> Optional[float]:
    """Eccentricity of the ellipse a y1^2 + b y1 y2 + c y2^2 = 1 fitted to a closed contour."""
    points = _points_near_origin(field, level, fit_radius)
    if points is None:
        return None
    y1, y2 = points[:, 0], points[:, 1]
    design = np.column_stack([y1 ** 2, y1 * y2, y2 ** 2])
    (a, b, c), *_ = np.linalg.lstsq(design, np.ones_like(y1), rcond=None)
    low, high = np.linalg.eigvalsh(np.array([[a, b / 2], [b / 2, c]]))
    if low <= 0.0:
        return None
    return math.sqrt(1.0 - low / high)


def _segments(lines: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Start and end points of every polyline edge; a lone vertex becomes a zero-length edge."""
    starts = [line[:-1] if len(line) > 1 else line for line in lines]
    ends = [line[1:] if len(line) > 1 else line for line in lines]
    return np.concatenate(starts), np.concatenate(ends)


def _distance_to_segments(points: np.ndarray, starts: np.ndarray, ends: np.ndarray, chunk: int = 256) -> float:
    edges = ends - starts
    length2 = np.einsum('mk,mk->m', edges, edges)
    length2 = np.where(length2 > 0.0, length2, 1.0)
    best = math.inf
    for lo in range(0, len(points), chunk):
        offsets = points[lo:lo + chunk, None, :] - starts
        t = np.clip(np.einsum('cmk,mk->cm', offsets, edges) / length2, 0.0, 1.0)
        gaps = offsets - t[..., None] * edges
        best = min(best, float(np.sqrt(np.einsum('cmk,cmk->cm', gaps, gaps).min())))
    return best


def level_distance(field: ScalarField, c1: float, c2: float) -> Optional[float]:
    """
    Smallest distance between the c1- and c2-contours as polylines.

    Vertices of each contour are projected onto the edges of the other, so
    the result is exact for non-crossing polylines and does not depend on
    where marching squares happened to place the vertices.
    """
    first, second = extract_contours(field, c1), extract_contours(field, c2)
    if not first or not second:
        return None
    return min(_distance_to_segments(np.concatenate(first), *_segments(second)),
               _distance_to_segments(np.concatenate(second), *_segments(first)))



def sup_gradient(field: ScalarField, grid: SpectralGrid) -> float:
    g1, g2 = grid.gradient_from_spectrum(grid.forward(field.values))
    return float(np.hypot(g1, g2).max())


def sup_velocity(field: ScalarField, beta: float, grid: SpectralGrid) -> float:
    u1, u2 = grid.velocity_from_spectrum(grid.forward(field.values), beta)
    return float(np.hypot(u1, u2).max())


def diagnostics(field: ScalarField, cfg: SimConfig, accum: Optional[DiagRecord] = None,
                grid: Optional[SpectralGrid] = None) -> DiagRecord:
    grid = grid or grid_for(cfg.n, cfg.box_length, cfg.dealias)
    values = field.values
    origin = float(values[cfg.n // 2, cfg.n // 2])
    seminorm = holder_seminorm_estimate(values, field.spacing, cfg.sigma)
    sup_theta = float(np.abs(values).max())

    angle = None
    if cfg.initial_data is InitialDataKind.SADDLE:
        angle = opening_angle_estimate(field, origin - cfg.epsilon_level * abs(origin), cfg.effective_fit_radius)

    integral = 0.0
    if accum is not None:
        integral = accum.holder_time_integral + 0.5 * (field.time - accum.time) * (
            accum.holder_norm + sup_theta + seminorm)

    record = DiagRecord(
        time=field.time,
        sup_theta=sup_theta,
        l2_theta=float(math.sqrt(np.sum(values ** 2)) * field.spacing),
        sup_grad=sup_gradient(field, grid),
        holder_seminorm=seminorm,
        theta_at_origin=origin,
        opening_angle=angle,
        level_distance=level_distance(field, *cfg.level_values),
        holder_time_integral=integral,
        sup_velocity=sup_velocity(field, cfg.beta, grid),
    )
    logger.log("DEBUG", f"t={record.time:.6g} seminorm={seminorm:.6g} angle={angle} d={record.level_distance}")
    return record


def measure_stream_differences(field: ScalarField, beta: float, n_pairs: int = 100, max_tau: float = 0.45,
                               seed: int = 12345,
                               grid: Optional[SpectralGrid] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    |psi(p1) - psi(p2)| for random node pairs at distance tau <= max_tau.

    Returns the arrays (tau, difference).
    """
    psi = riesz_stream(field, beta, grid).values
    n, spacing = field.n, field.spacing
    reach = max(1, int(max_tau / (spacing * math.sqrt(2))))
    rng = np.random.default_rng(seed)
    taus, diffs = np.empty(n_pairs), np.empty(n_pairs)
    for idx in range(n_pairs):
        i, j = rng.integers(0, n, size=2)
        d1, d2 = 0, 0
        while d1 == 0 and d2 == 0:
            d1, d2 = rng.integers(-reach, reach + 1, size=2)
        taus[idx] = spacing * math.hypot(d1, d2)
        diffs[idx] = abs(psi[i, j] - psi[(i + d1) % n, (j + d2) % n])
    return taus, diffs


def calibrate_velocity_constant(field: ScalarField, beta: float, lam: float, eps: float, k: float,
                                grid: Optional[SpectralGrid] = None) -> float:
    """The constant C making the velocity ceiling exact for this field."""
    grid = grid or grid_for(field.n, field.box_length)
    sup_theta = float(np.abs(field.values).max())
    holder_norm = sup_theta + holder_seminorm_estimate(field.values, field.spacing, lam)
    ceiling = velocity_sup_bound(beta, lam, holder_norm, sup_theta, eps, k, C=1.0)
    return sup_velocity(field, beta, grid) / ceiling
