"""Discrete empirical interpolation of a pointwise-local nonlinearity.

The classic greedy algorithm: POD modes of nonlinearity snapshots, sample
points chosen by argmax of the interpolation residual. The sampled state fed
to the pointwise rule may include extra linear images of the state (e.g. a
differentiated copy for advective nonlinearities).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ssop.pod import pod_modes
from ssop.util import InvalidArgumentError, left_wmult


@dataclass
class DeimArtifacts:
    u_n: np.ndarray  # (n_x, p2) nonlinearity basis
    sample_indices: np.ndarray  # (p2,) unique ints
    interp_condition: float  # cond(P^T U)

    @property
    def p2(self):
        return self.u_n.shape[1]

    def interpolation_matrix(self):
        """U (P^T U)^{-1}, mapping sampled values to the full approximation."""
        if self.p2 == 0:
            return np.zeros_like(self.u_n)
        pu = self.u_n[self.sample_indices, :]
        return np.linalg.solve(pu.T, self.u_n.T).T


def deim(nonlinearity_snapshots, p2, weights=None):
    """Greedy interpolation basis and sample points.

    ``weights`` selects the inner product for the snapshot POD (unweighted
    if None). p2 beyond the numerical snapshot rank is reduced with a warning.
    """
    snaps = np.asarray(nonlinearity_snapshots)
    if weights is None:
        weights = np.ones(snaps.shape[0])
    if p2 == 0:
        return DeimArtifacts(
            u_n=np.zeros((snaps.shape[0], 0), dtype=complex),
            sample_indices=np.zeros(0, dtype=int),
            interp_condition=1.0,
        )
    modes, energies = pod_modes(snaps, weights)
    tol = energies[0] * 1e-26 if energies.size and energies[0] > 0 else 0.0
    rank = int(np.sum(energies > tol))
    if p2 > rank:
        warnings.warn(f"requested p2={p2} exceeds snapshot rank {rank}; reducing")
        p2 = rank
    if p2 < 1:
        raise InvalidArgumentError("nonlinearity snapshots are identically zero")
    u = modes[:, :p2]

    indices = np.empty(p2, dtype=int)
    indices[0] = int(np.argmax(np.abs(u[:, 0])))
    for i in range(1, p2):
        sub = u[:, :i]
        coef = np.linalg.solve(sub[indices[:i], :], u[indices[:i], i])
        residual = u[:, i] - sub @ coef
        residual[indices[:i]] = 0.0
        indices[i] = int(np.argmax(np.abs(residual)))
    pu = u[indices, :]
    cond = float(np.linalg.cond(pu))
    return DeimArtifacts(u_n=u, sample_indices=indices, interp_condition=cond)


@dataclass
class DeimOperators:
    """Per-frequency operators for the sampled-nonlinearity closure.

    ``dealias`` evaluates the pointwise products on a twice-oversampled time
    grid (padded transforms), removing the sampling-route aliasing; used for
    quadratic systems where the triadic path is alias-free by construction.
    """

    n_ops: list  # (r_k, p2) per frequency
    m_ops: np.ndarray  # (n_omega, p1, p2)
    s_ops: list  # one list per local operator; each entry (p2, r_k)
    artifacts: DeimArtifacts
    dealias: bool = False

    kind = "deim"

    @property
    def p2(self):
        return self.artifacts.p2


def build_deim_operators(surrogate, basis, phi, artifacts: DeimArtifacts,
                         local_operators=None, dealias=False) -> DeimOperators:
    """N_k, M_k from the resolvent surrogate and the sampling matrices S_k.

    ``local_operators`` lists the linear maps whose sampled values the
    pointwise nonlinearity needs (None entries mean the identity); one set of
    S_k matrices is built per map.
    """
    if local_operators is None:
        local_operators = [None]
    w = basis.weights
    u_eff = artifacts.interpolation_matrix()
    idx = artifacts.sample_indices
    n_ops, s_ops = [], [[] for _ in local_operators]
    n_omega = basis.grid.n_omega
    m_ops = np.empty((n_omega, phi.shape[1], artifacts.p2), dtype=complex)
    phi_w = left_wmult(phi, w)
    for k in range(n_omega):
        psi = basis.modes(k)
        sol = surrogate.gram_solve(k, surrogate.gw(k, u_eff))
        core = surrogate.qhat[k] @ sol
        n_ops.append(left_wmult(psi, w) @ core)
        m_ops[k] = phi_w @ core
        for op_i, op in enumerate(local_operators):
            mapped = psi if op is None else op @ psi
            s_ops[op_i].append(mapped[idx, :])
    return DeimOperators(n_ops=n_ops, m_ops=m_ops, s_ops=s_ops, artifacts=artifacts,
                         dealias=dealias)
