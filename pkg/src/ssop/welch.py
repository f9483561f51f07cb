"""Welch blocking: overlapping segments of a long run, DFT'd per block and
stacked into per-frequency realization ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ssop.frequency import FrequencyGrid, Trajectory
from ssop.util import InvalidArgumentError


@dataclass
class SpectralStack:
    """blocks[k] is the (n_x, n_d) ensemble of DFT realizations at frequency k."""

    blocks: np.ndarray  # (n_omega, n_x, n_d)
    grid: FrequencyGrid

    @property
    def n_d(self):
        return self.blocks.shape[2]

    @property
    def n_x(self):
        return self.blocks.shape[1]

    def block(self, k):
        return self.blocks[k]


def welch_blocks(snapshots, grid: FrequencyGrid, overlap_fraction=0.75, window=None) -> SpectralStack:
    """Partition a long snapshot matrix into overlapping length-n_omega blocks.

    ``snapshots`` is (n_x, n_steps) or a Trajectory-like with ``.states``.
    ``window`` optionally tapers each block (default rectangular). The number
    of blocks is floor((n_steps - n_omega)/hop) + 1 with
    hop = round(n_omega*(1 - overlap)).
    """
    states = snapshots.states if hasattr(snapshots, "states") else np.asarray(snapshots)
    n_omega = grid.n_omega
    n_steps = states.shape[1]
    if not (0.0 <= overlap_fraction < 1.0):
        raise InvalidArgumentError("overlap fraction must be in [0, 1)")
    if n_steps < n_omega:
        raise InvalidArgumentError(
            f"need at least {n_omega} snapshots for one block, got {n_steps}"
        )
    hop = max(1, int(round(n_omega * (1.0 - overlap_fraction))))
    n_d = (n_steps - n_omega) // hop + 1

    blocks = np.empty((n_omega, states.shape[0], n_d), dtype=complex)
    for d in range(n_d):
        seg = states[:, d * hop : d * hop + n_omega]
        if window is not None:
            seg = seg * window[None, :]
        blocks[:, :, d] = np.fft.fft(seg, axis=1).T
    return SpectralStack(blocks=blocks, grid=grid)
