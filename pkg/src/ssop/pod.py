"""Space-only POD under a diagonal weighted inner product."""

from __future__ import annotations

import numpy as np

from ssop.util import InvalidArgumentError


def pod_modes(snapshots, weights, r=None):
    """Leading POD modes of a snapshot matrix.

    Returns (modes, energies): modes (n_x, r) W-orthonormal, energies the
    eigenvalues of the weighted snapshot covariance, descending.
    """
    q = snapshots.states if hasattr(snapshots, "states") else np.asarray(snapshots)
    sqw = np.sqrt(weights)
    u, s, _ = np.linalg.svd(sqw[:, None] * q / np.sqrt(q.shape[1]), full_matrices=False)
    energies = s**2
    if r is not None:
        if r > u.shape[1]:
            raise InvalidArgumentError(f"requested {r} modes, only {u.shape[1]} available")
        u = u[:, :r]
    return u / sqw[:, None], energies
