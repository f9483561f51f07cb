"""Data-driven approximation of the resolvent action.

With G_k = (i w_k I - A) Qhat_k, the identity Qhat_k = R_k G_k provides the
action of the resolvent R_k on span(G_k); the surrogate R_k ~ Qhat_k G_k^+
(weighted pseudoinverse) is exact there and a W-orthogonal projection
composed with R_k elsewhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ssop.util import NumericalError, left_wmult
from ssop.welch import SpectralStack

GRAM_COND_LIMIT = 1e12
GRAM_JITTER_SCALE = 1e-12


@dataclass
class ResolventSurrogate:
    """Per-frequency G_k matrices and factorized grams G_k^* W G_k."""

    qhat: np.ndarray  # (n_omega, n_x, n_d)
    g: np.ndarray  # (n_omega, n_x, n_d)
    weights: np.ndarray
    grid: object
    factors: list = field(default_factory=list)
    gram_conds: np.ndarray | None = None

    @property
    def n_d(self):
        return self.qhat.shape[2]

    def gw(self, k, x):
        """G_k^* W x."""
        return left_wmult(self.g[k], self.weights) @ x

    def gram_solve(self, k, rhs):
        return cho_solve(self.factors[k], rhs)

    def apply(self, k, v):
        """Surrogate resolvent action Qhat_k (G_k^* W G_k)^{-1} G_k^* W v."""
        return self.qhat[k] @ self.gram_solve(k, self.gw(k, v))

    def core(self, k, left):
        """left @ Qhat_k gram^{-1}, the reusable piece of every operator."""
        return left @ self.qhat[k]


def build_resolvent_surrogate(stack: SpectralStack, a_matrix, weights) -> ResolventSurrogate:
    """Form G_k = (i w_k I - A) Qhat_k and factor the weighted grams.

    Raises if i w_k coincides with an eigenvalue of A (the resolvent does not
    exist there); grams with condition number beyond 1e12 are regularized
    with a trace-scaled jitter and reported in a warning.
    """
    a_matrix = np.asarray(a_matrix, dtype=complex)
    omegas = stack.grid.omegas
    eigs = np.linalg.eigvals(a_matrix)
    scale = max(np.abs(eigs).max(), 1.0)
    for k, w_k in enumerate(omegas):
        if np.abs(eigs - 1j * w_k).min() <= 1e-12 * scale:
            raise NumericalError(
                f"i*omega_{k} (omega = {w_k:.6g}) is an eigenvalue of A; "
                "the resolvent is singular at this frequency"
            )

    aq = np.tensordot(a_matrix, stack.blocks, axes=([1], [1])).transpose(1, 0, 2)
    g = 1j * omegas[:, None, None] * stack.blocks - aq

    weights = np.asarray(weights, dtype=float)
    n_omega, _, n_d = g.shape
    factors = []
    conds = np.empty(n_omega)
    bad = []
    for k in range(n_omega):
        gram = left_wmult(g[k], weights) @ g[k]
        gram = 0.5 * (gram + gram.conj().T)
        evals = np.linalg.eigvalsh(gram)
        conds[k] = evals[-1] / max(evals[0], np.finfo(float).tiny)
        if conds[k] > GRAM_COND_LIMIT:
            gram = gram + np.eye(n_d) * (GRAM_JITTER_SCALE * np.trace(gram).real / n_d)
            bad.append(k)
        try:
            factors.append(cho_factor(gram, lower=True))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"gram factorization failed at frequency index {k}") from exc
    if bad:
        warnings.warn(
            f"ill-conditioned resolvent gram at frequency indices {bad[:8]}"
            f"{'...' if len(bad) > 8 else ''}; applied jitter regularization"
        )
    return ResolventSurrogate(
        qhat=stack.blocks,
        g=g,
        weights=weights,
        grid=stack.grid,
        factors=factors,
        gram_conds=conds,
    )
