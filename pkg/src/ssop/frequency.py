"""Time/frequency discretization and block DFT conventions.

The forward transform is unnormalized, q_hat_k = sum_j q_j exp(-i w_k t_j);
the inverse carries the 1/N factor. Every frequency-domain operator in the
package assumes exactly this pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ssop.util import InvalidArgumentError


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform time grid of ``n_omega`` steps and its DFT frequencies."""

    n_omega: int
    dt: float

    def __post_init__(self):
        if self.n_omega < 1:
            raise InvalidArgumentError("n_omega must be positive")
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")

    @property
    def t_total(self):
        return self.n_omega * self.dt

    @property
    def times(self):
        return np.arange(self.n_omega) * self.dt

    @property
    def omegas(self):
        """w_k = 2*pi*(k - n_omega*[k >= n_omega/2]) / T, the usual DFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_omega, d=self.dt)

    def omega(self, k):
        return self.omegas[k]

    @property
    def signed_indices(self):
        """Integer s with w_k = 2*pi*s/T; s in [-n/2, n/2)."""
        k = np.arange(self.n_omega)
        return np.where(k < (self.n_omega + 1) // 2, k, k - self.n_omega)

    def index_of_signed(self, s):
        return int(s) % self.n_omega


@dataclass
class Trajectory:
    """Complex state history; column j is the state at t_j."""

    states: np.ndarray
    grid: FrequencyGrid

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.ndim != 2:
            raise InvalidArgumentError("trajectory states must be a 2-D array")
        if self.states.shape[1] != self.grid.n_omega:
            raise InvalidArgumentError(
                f"trajectory has {self.states.shape[1]} columns, grid expects {self.grid.n_omega}"
            )

    @property
    def n_x(self):
        return self.states.shape[0]


def dft_block(traj):
    """Per-frequency components of one trajectory block (unnormalized forward).

    Returns an (n_x, n_omega) array whose k-th column is
    sum_j q_j exp(-i w_k t_j).
    """
    states = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=complex)
    return np.fft.fft(states, axis=-1)


def idft_block(spectral, grid=None):
    """Inverse of :func:`dft_block`; q_j = (1/N) sum_k (.)_k exp(i w_k t_j)."""
    spectral = np.asarray(spectral, dtype=complex)
    states = np.fft.ifft(spectral, axis=-1)
    if grid is None:
        return states
    return Trajectory(states, grid)
