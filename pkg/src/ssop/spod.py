"""Per-frequency orthogonal bases: computation, mode allocation across
frequencies, trajectory encoding/decoding, and projection-error oracles.

At each frequency k the basis solves the weighted low-rank problem for the
ensemble of DFT realizations: the SVD of (1/n_d) W^(1/2) Qhat_k gives modes
Psi_k = W^(-1/2) U and energies lambda = sigma^2. A trajectory is encoded by
a_k = Psi_k^* W qhat_k and decoded by the inverse DFT of Psi_k a_k.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ssop.containers import read_json, read_matrix, write_json, write_matrix
from ssop.frequency import FrequencyGrid, Trajectory, idft_block
from ssop.util import InvalidArgumentError, NumericalError, left_wmult, wnorm_traj
from ssop.welch import SpectralStack


@dataclass
class SpodBasis:
    """Full per-frequency mode sets with a retained-count allocation."""

    modes_full: np.ndarray  # (n_omega, n_x, n_d), W-orthonormal columns
    energies: np.ndarray  # (n_omega, n_d), descending per frequency
    retained: np.ndarray  # (n_omega,) ints
    r_avg: float
    weights: np.ndarray  # (n_x,)
    grid: FrequencyGrid
    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        self.retained = np.asarray(self.retained, dtype=int)
        self.offsets = np.concatenate([[0], np.cumsum(self.retained)])

    @property
    def n_d(self):
        return self.modes_full.shape[2]

    @property
    def n_x(self):
        return self.modes_full.shape[1]

    @property
    def coeff_size(self):
        return int(self.offsets[-1])

    def modes(self, k):
        """Retained modes at frequency k, (n_x, r_k)."""
        return self.modes_full[k, :, : self.retained[k]]

    def with_r_avg(self, r_avg):
        """Same mode sets, reallocated retained counts for a new average r."""
        retained = allocate_modes(self.energies, r_avg, self.grid.n_omega)
        return SpodBasis(
            modes_full=self.modes_full,
            energies=self.energies,
            retained=retained,
            r_avg=float(r_avg),
            weights=self.weights,
            grid=self.grid,
        )

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k in range(self.grid.n_omega):
            write_matrix(out / f"modes_{k:05d}.ssopmat", self.modes_full[k])
        write_matrix(out / "energies.ssopmat", self.energies.astype(complex))
        write_matrix(out / "weights.ssopmat", self.weights[None, :].astype(complex))
        write_json(
            out / "manifest.json",
            {
                "kind": "spod-basis",
                "n_omega": self.grid.n_omega,
                "dt": self.grid.dt,
                "n_x": self.n_x,
                "n_d": self.n_d,
                "r_avg": self.r_avg,
                "retained": self.retained.tolist(),
                "weights_sha256": hashlib.sha256(
                    np.ascontiguousarray(self.weights).tobytes()
                ).hexdigest(),
            },
        )

    @classmethod
    def load(cls, in_dir):
        src = Path(in_dir)
        man = read_json(src / "manifest.json")
        grid = FrequencyGrid(man["n_omega"], man["dt"])
        modes = np.stack(
            [read_matrix(src / f"modes_{k:05d}.ssopmat") for k in range(grid.n_omega)]
        )
        energies = read_matrix(src / "energies.ssopmat").real
        weights = read_matrix(src / "weights.ssopmat").real[0]
        return cls(
            modes_full=modes,
            energies=energies,
            retained=np.asarray(man["retained"], dtype=int),
            r_avg=man["r_avg"],
            weights=weights,
            grid=grid,
        )


@dataclass
class CoefficientSet:
    """Per-frequency coefficient vectors, stored flat with offsets."""

    data: np.ndarray
    offsets: np.ndarray

    @classmethod
    def zeros(cls, basis: SpodBasis):
        return cls(np.zeros(basis.coeff_size, dtype=complex), basis.offsets)

    @classmethod
    def from_blocks(cls, blocks, basis: SpodBasis):
        data = np.concatenate([np.asarray(b, dtype=complex).ravel() for b in blocks])
        if data.size != basis.coeff_size:
            raise InvalidArgumentError("coefficient blocks do not match the basis allocation")
        return cls(data, basis.offsets)

    def block(self, k):
        return self.data[self.offsets[k] : self.offsets[k + 1]]

    def blocks(self):
        return [self.block(k) for k in range(len(self.offsets) - 1)]

    def copy(self):
        return CoefficientSet(self.data.copy(), self.offsets)

    @property
    def n_omega(self):
        return len(self.offsets) - 1

    def norm(self):
        return float(np.linalg.norm(self.data))


def allocate_modes(energies, r_avg, n_omega):
    """Retained count per frequency: keep the r_avg*n_omega globally most
    energetic modes; ties at the threshold go to the lower mode index, then
    the lower frequency index (so a flat spectrum allocates uniformly)."""
    energies = np.asarray(energies)
    target = int(round(r_avg * n_omega))
    if target > energies.size:
        raise InvalidArgumentError(
            f"requested {target} modes but only {energies.size} are available"
        )
    k_idx, m_idx = np.unravel_index(np.arange(energies.size), energies.shape)
    order = np.lexsort((k_idx, m_idx, -energies.ravel()))
    return np.bincount(k_idx[order[:target]], minlength=n_omega)


def compute_spod(stack: SpectralStack, weights, r_avg) -> SpodBasis:
    """Weighted SVD per frequency plus the global mode allocation.

    Energies are the squared singular values of W^(1/2) Qhat_k / sqrt(n_d),
    i.e. eigenvalues of the sample cross-spectral estimate
    (1/n_d) W^(1/2) Qhat Qhat^* W^(1/2): the sample mean of |<qhat, psi>_x|^2
    over realizations, matching the variational definition of the energies.
    """
    n_omega, n_x, n_d = stack.blocks.shape
    sqw = np.sqrt(weights)
    n_modes = min(n_x, n_d)
    modes = np.empty((n_omega, n_x, n_modes), dtype=complex)
    energies = np.empty((n_omega, n_modes))
    for k in range(n_omega):
        try:
            u, s, _ = np.linalg.svd(sqw[:, None] * stack.blocks[k] / np.sqrt(n_d), full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed at frequency index {k}") from exc
        modes[k] = u / sqw[:, None]
        energies[k] = s**2
    retained = allocate_modes(energies, r_avg, n_omega)
    return SpodBasis(
        modes_full=modes,
        energies=energies,
        retained=retained,
        r_avg=float(r_avg),
        weights=np.asarray(weights, dtype=float),
        grid=stack.grid,
    )


def encode(traj: Trajectory, basis: SpodBasis) -> CoefficientSet:
    """a_k = Psi_k^* W qhat_k with the unnormalized forward DFT."""
    states = traj.states if hasattr(traj, "states") else np.asarray(traj)
    if states.shape[0] != basis.n_x:
        raise InvalidArgumentError("trajectory and basis have different space dimensions")
    qhat = np.fft.fft(states, axis=1)
    out = CoefficientSet.zeros(basis)
    w = basis.weights
    for k in range(basis.grid.n_omega):
        r_k = basis.retained[k]
        if r_k:
            out.block(k)[:] = left_wmult(basis.modes(k), w) @ qhat[:, k]
    return out


def decode(coeffs: CoefficientSet, basis: SpodBasis) -> Trajectory:
    """q_j = (1/n_omega) sum_k Psi_k a_k exp(i w_k t_j)."""
    qhat = np.zeros((basis.n_x, basis.grid.n_omega), dtype=complex)
    for k in range(basis.grid.n_omega):
        if basis.retained[k]:
            qhat[:, k] = basis.modes(k) @ coeffs.block(k)
    return idft_block(qhat, basis.grid)


def projection_error(traj: Trajectory, basis) -> float:
    """Relative squared space-time error of the orthogonal reconstruction.

    ``basis`` is a SpodBasis, or a space-only mode matrix Phi (reconstruction
    Phi Phi^* W q_j per time step). Returns 0 for an identically zero input.
    """
    states = traj.states if hasattr(traj, "states") else np.asarray(traj)
    if isinstance(basis, SpodBasis):
        recon = decode(encode(traj, basis), basis).states
        w = basis.weights
    else:
        phi = np.asarray(basis[0] if isinstance(basis, tuple) else basis)
        w = basis[1] if isinstance(basis, tuple) else None
        if w is None:
            raise InvalidArgumentError("pass (phi, weights) for a space-only basis")
        recon = phi @ (left_wmult(phi, w) @ states)
    denom = wnorm_traj(w, states) ** 2
    if denom == 0.0:
        return 0.0
    return float(wnorm_traj(w, states - recon) ** 2 / denom)
