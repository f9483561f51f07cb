"""POD-Galerkin baseline: space-only Galerkin compression of the governing
equations onto r POD modes, time-stepped with the same integrator contract
as the full model."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from ssop.frequency import FrequencyGrid, Trajectory
from ssop.integrate import _solve
from ssop.pod import pod_modes
from ssop.util import left_wmult


@dataclass
class PodGalerkinRom:
    phi_r: np.ndarray  # (n_x, r), W-orthonormal
    a_tilde: np.ndarray  # (r, r)
    b_tilde: np.ndarray  # (r, n_f)
    weights: np.ndarray
    nonlinearity: object = None  # full-space callable or None for linear
    deim: object = None  # (DeimArtifacts, local_operators) or None

    @property
    def r(self):
        return self.phi_r.shape[1]

    def reduced_nonlinearity(self):
        """a -> Phi^* W n(Phi a), lifted directly or through interpolation."""
        if self.nonlinearity is None:
            return None
        phi_w = left_wmult(self.phi_r, self.weights)
        if self.deim is None:
            phi = self.phi_r
            n = self.nonlinearity

            def reduced(a):
                return phi_w @ n(phi @ a)

            return reduced
        artifacts, local_ops, pointwise = self.deim
        lift = phi_w @ artifacts.interpolation_matrix()
        idx = artifacts.sample_indices
        sampled = [
            (self.phi_r if op is None else op @ self.phi_r)[idx, :] for op in local_ops
        ]

        def reduced(a):
            return lift @ pointwise(*[s @ a for s in sampled])

        return reduced


def build_pod_galerkin(snapshots, weights, r, a_matrix, b_matrix,
                       nonlinearity=None, deim=None) -> PodGalerkinRom:
    """Galerkin-compressed operators from training snapshots.

    ``deim``, when given, is (DeimArtifacts, local_operators, pointwise) and
    replaces the direct nonlinearity lift for timing-parity studies.
    """
    snaps = snapshots.states if hasattr(snapshots, "states") else np.asarray(snapshots)
    modes, energies = pod_modes(snaps, weights)
    rank = int(np.sum(energies > energies[0] * 1e-26)) if energies.size else 0
    if r > rank:
        warnings.warn(f"requested r={r} exceeds snapshot rank {rank}; reducing")
        r = rank
    phi_r = modes[:, :r]
    phi_w = left_wmult(phi_r, weights)
    return PodGalerkinRom(
        phi_r=phi_r,
        a_tilde=phi_w @ (np.asarray(a_matrix, dtype=complex) @ phi_r),
        b_tilde=phi_w @ np.asarray(b_matrix, dtype=complex),
        weights=np.asarray(weights, dtype=float),
        nonlinearity=nonlinearity,
        deim=deim,
    )


def integrate_rom(rom: PodGalerkinRom, q0, forcing, grid: FrequencyGrid,
                  rel_tol=1e-8, abs_tol=1e-10):
    """Time-step the reduced system and decode; returns (Trajectory, reduced
    coefficient history, online seconds from IC projection to coefficients)."""
    t0 = time.perf_counter()
    a0 = left_wmult(rom.phi_r, rom.weights) @ np.asarray(q0, dtype=complex)
    a_t = rom.a_tilde
    reduced_n = rom.reduced_nonlinearity()
    if forcing is not None:
        f_of_t = forcing.interpolator()
        b_t = rom.b_tilde
        if reduced_n is None:
            def rhs(t, a):
                return a_t @ a + b_t @ f_of_t(t)
        else:
            def rhs(t, a):
                return a_t @ a + b_t @ f_of_t(t) + reduced_n(a)
    else:
        if reduced_n is None:
            def rhs(t, a):
                return a_t @ a
        else:
            def rhs(t, a):
                return a_t @ a + reduced_n(a)
    coeffs = _solve(rhs, a0, grid.times, rel_tol, abs_tol)
    online_seconds = time.perf_counter() - t0
    return Trajectory(rom.phi_r @ coeffs, grid), coeffs, online_seconds
