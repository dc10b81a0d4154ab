"""
Fourier machinery on the periodic box: wavenumbers, the dealiasing mask and
the Riesz stream function / velocity of a scalar field.
"""
import math
import os
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import fft

from utils.validators import ScalarField

WORKERS = int(os.getenv("GSQG_FFT_WORKERS", "-1"))


class SpectralGrid:
    """
    Real-to-complex transform layout for an ``n x n`` grid of period ``box_length``.

    Axis 0 carries the full ``fftfreq`` set, axis 1 the ``rfftfreq`` half.
    Derivative multipliers have the Nyquist row and column zeroed.
    """

    def __init__(self, n: int, box_length: float = 2 * math.pi, dealias: float = 2.0 / 3.0,
                 workers: int = WORKERS):
        self.n = n
        self.box_length = box_length
        self.workers = workers
        scale = 2 * math.pi / box_length

        index1 = fft.fftfreq(n, d=1.0 / n)
        index2 = fft.rfftfreq(n, d=1.0 / n)
        self.k1 = (scale * index1)[:, None]
        self.k2 = (scale * index2)[None, :]
        self.kmag = np.sqrt(self.k1 ** 2 + self.k2 ** 2)

        d1 = scale * index1
        d1[n // 2] = 0.0
        d2 = scale * index2
        d2[-1] = 0.0
        self.ik1 = 1j * d1[:, None]
        self.ik2 = 1j * d2[None, :]

        cutoff = dealias * n / 2
        self.mask = (np.abs(index1)[:, None] <= cutoff) & (np.abs(index2)[None, :] <= cutoff)

    def forward(self, values: np.ndarray) -> np.ndarray:
        return fft.rfft2(values, workers=self.workers)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return fft.irfft2(spectrum, s=(self.n, self.n), workers=self.workers)

    def power_multiplier(self, power: float) -> np.ndarray:
        """|k|^power on nonzero modes, 0 on the mean."""
        out = np.zeros_like(self.kmag)
        nonzero = self.kmag > 0
        out[nonzero] = self.kmag[nonzero] ** power
        return out

    def stream_multiplier(self, beta: float) -> np.ndarray:
        return self.power_multiplier(beta - 2.0)

    def velocity_from_spectrum(self, theta_hat: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
        psi_hat = theta_hat * self.stream_multiplier(beta)
        return self.inverse(self.ik2 * psi_hat), self.inverse(-self.ik1 * psi_hat)

    def gradient_from_spectrum(self, theta_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.inverse(self.ik1 * theta_hat), self.inverse(self.ik2 * theta_hat)


@lru_cache(maxsize=8)
def grid_for(n: int, box_length: float, dealias: float = 2.0 / 3.0) -> SpectralGrid:
    return SpectralGrid(n, box_length, dealias)


def _grid(field: ScalarField, grid: Optional[SpectralGrid]) -> SpectralGrid:
    return grid if grid is not None else grid_for(field.n, field.box_length)


def apply_power(field: ScalarField, power: float, grid: Optional[SpectralGrid] = None) -> ScalarField:
    """Fourier multiplier |k|^power; the mean of the result is zero."""
    g = _grid(field, grid)
    values = g.inverse(g.forward(field.values) * g.power_multiplier(power))
    return field.with_values(values)


def riesz_stream(field: ScalarField, beta: float, grid: Optional[SpectralGrid] = None) -> ScalarField:
    """psi = (-Delta)^(beta/2 - 1) theta, with the mean mode of psi set to zero."""
    return apply_power(field, beta - 2.0, grid)


def velocity(field: ScalarField, beta: float, grid: Optional[SpectralGrid] = None) -> tuple[np.ndarray, np.ndarray]:
    """u = (d2 psi, -d1 psi)."""
    g = _grid(field, grid)
    return g.velocity_from_spectrum(g.forward(field.values), beta)


def gradient(field: ScalarField, grid: Optional[SpectralGrid] = None) -> tuple[np.ndarray, np.ndarray]:
    g = _grid(field, grid)
    return g.gradient_from_spectrum(g.forward(field.values))


def divergence(u1: np.ndarray, u2: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return grid.inverse(grid.ik1 * grid.forward(u1) + grid.ik2 * grid.forward(u2))
