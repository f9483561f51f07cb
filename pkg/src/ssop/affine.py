"""Parameter-independent precomputations for fast operator reassembly.

With A(mu) = sum_j zeta_j(mu) A_j, every parameter-dependent ROM operator
factors through G_k(mu) = i w_k Qhat_k - sum_j zeta_j(mu) A_j Qhat_k. Storing
the per-term matrices G_k^(a) (a = 0 for the i w_k piece) and all pairwise
weighted grams lets the online phase rebuild E, J, H, the nonlinearity
operators, and the shift correction at any mu without any O(n_x) work beyond
the one-time projection of the initial condition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ssop.deim import DeimOperators
from ssop.resolvent import GRAM_COND_LIMIT, GRAM_JITTER_SCALE
from ssop.romops import RomOperators, _h_from_a_tilde
from ssop.triadic import TriadicTable
from ssop.util import InvalidArgumentError, left_wmult


@dataclass
class AffineBundle:
    basis: object
    phi: np.ndarray
    b_matrix: np.ndarray
    affine_op: object  # AffineOperator providing zetas and identity_term
    gg: np.ndarray  # (n_omega, m+1, m+1, n_d, n_d)
    bg: np.ndarray  # (n_omega, m+1, n_d, n_f)
    cpsi: list  # (r_k, n_d)
    cphi: np.ndarray  # (n_omega, p1, n_d)
    psi_w_phi: np.ndarray  # (n_omega, n_d, p1)
    a_tilde_terms: np.ndarray  # (n_omega, m, n_d, n_d)
    psig: list | None = None  # (m+1, n_d, r_k) per k, shift support
    ug: np.ndarray | None = None  # (n_omega, m+1, n_d, p2)
    deim_template: DeimOperators | None = None
    triadic_template: TriadicTable | None = None
    bg_vecs: list | None = None  # (m+1, n_d, cnt_k) per k
    omit_h_sum_normalization: bool = False

    @property
    def n_terms(self):
        return self.gg.shape[1]

    @property
    def grid(self):
        return self.basis.grid


def estimate_bundle_bytes(n_omega, n_d, m_terms, n_f, p1, p2=0, triad_count=0):
    per_k = (
        (m_terms + 1) ** 2 * n_d**2  # grams
        + (m_terms + 1) * n_d * n_f  # forcing blocks
        + n_d * p1  # transient inner products
        + m_terms * n_d**2  # compressed-operator terms
        + (m_terms + 1) * n_d * p2  # nonlinearity-basis blocks
    )
    return 16 * (n_omega * per_k + (m_terms + 1) * n_d * triad_count)


def build_affine_bundle(surrogate, affine_op, basis, phi, b_matrix,
                        closure=None, shift_support=True,
                        memory_budget=2_000_000_000) -> AffineBundle:
    """Precompute every weighted gram block needed by assemble_at_mu.

    ``surrogate`` supplies the frequency ensemble Qhat; ``closure`` is an
    already-built DeimOperators or TriadicTable whose mu-independent parts
    (sample matrices, retained index sets) are reused. Refuses with a sizing
    report when the estimate exceeds ``memory_budget`` bytes.
    """
    grid = basis.grid
    w = basis.weights
    qhat = surrogate.qhat
    mats = affine_op.matrices()
    m_terms = len(mats)
    n_omega, n_x, n_d = qhat.shape
    p1 = phi.shape[1]
    p2 = closure.p2 if isinstance(closure, DeimOperators) else 0
    triad_count = closure.retained_count if isinstance(closure, TriadicTable) else 0

    est = estimate_bundle_bytes(n_omega, n_d, m_terms, b_matrix.shape[1], p1, p2, triad_count)
    if est > memory_budget:
        raise InvalidArgumentError(
            f"affine bundle would need ~{est/1e9:.2f} GB "
            f"(n_omega={n_omega}, n_d={n_d}, terms={m_terms}, p1={p1}, p2={p2}, "
            f"triads={triad_count}); budget is {memory_budget/1e9:.2f} GB"
        )

    omegas = grid.omegas
    gg = np.empty((n_omega, m_terms + 1, m_terms + 1, n_d, n_d), dtype=complex)
    bg = np.empty((n_omega, m_terms + 1, n_d, b_matrix.shape[1]), dtype=complex)
    cpsi, psig, bg_vecs = [], [] if shift_support else None, None
    cphi = np.empty((n_omega, p1, n_d), dtype=complex)
    psi_w_phi = np.empty((n_omega, n_d, p1), dtype=complex)
    a_tilde_terms = np.empty((n_omega, m_terms, n_d, n_d), dtype=complex)
    ug = (
        np.empty((n_omega, m_terms + 1, n_d, p2), dtype=complex)
        if isinstance(closure, DeimOperators)
        else None
    )
    u_eff = closure.artifacts.interpolation_matrix() if isinstance(closure, DeimOperators) else None
    if isinstance(closure, TriadicTable):
        bg_vecs = []

    phi_w = left_wmult(phi, w)
    for k in range(n_omega):
        terms = [1j * omegas[k] * qhat[k]] + [-(a_j @ qhat[k]) for a_j in mats]
        terms_w = [left_wmult(t, w) for t in terms]
        for a in range(m_terms + 1):
            bg[k, a] = terms_w[a] @ b_matrix
            for b_i in range(m_terms + 1):
                gg[k, a, b_i] = terms_w[a] @ terms[b_i]
        psi_full = basis.modes_full[k]
        full_w = left_wmult(psi_full, w)
        cpsi.append(left_wmult(basis.modes(k), w) @ qhat[k])
        cphi[k] = phi_w @ qhat[k]
        psi_w_phi[k] = full_w @ phi
        for j, a_j in enumerate(mats):
            a_tilde_terms[k, j] = full_w @ (a_j @ psi_full)
        if shift_support:
            psig.append(np.stack([tw @ basis.modes(k) for tw in terms_w]))
        if ug is not None:
            ug[k] = np.stack([tw @ u_eff for tw in terms_w])
        if bg_vecs is not None:
            cnt = closure.l_idx[k].size
            cols = np.empty((n_x, cnt), dtype=complex)
            for j in range(cnt):
                cols[:, j] = _bvec(closure, basis, k, j)
            bg_vecs.append(np.stack([tw @ cols for tw in terms_w]))

    return AffineBundle(
        basis=basis,
        phi=np.asarray(phi, dtype=complex),
        b_matrix=np.asarray(b_matrix, dtype=complex),
        affine_op=affine_op,
        gg=gg,
        bg=bg,
        cpsi=cpsi,
        cphi=cphi,
        psi_w_phi=psi_w_phi,
        a_tilde_terms=a_tilde_terms,
        psig=psig,
        ug=ug,
        deim_template=closure if isinstance(closure, DeimOperators) else None,
        triadic_template=closure if isinstance(closure, TriadicTable) else None,
        bg_vecs=bg_vecs,
    )


def _bvec(table: TriadicTable, basis, k, j):
    """Recompute the raw bilinear vector of one retained entry."""
    b = table.bilinear
    if b is None:
        raise InvalidArgumentError(
            "triadic closure must carry its bilinear form for affine precomputation"
        )
    l = table.l_idx[k][j]
    i = table.i_idx[k][j]
    m = table.m_idx[k][j]
    n = table.n_idx[k][j]
    return b(basis.modes_full[l, :, m], basis.modes_full[i, :, n])


def compressed_abscissa(bundle: AffineBundle, mu):
    """Largest real part over frequencies of the compressed operator's
    spectrum at mu (before any shift); the transient exponentials stay
    bounded only when a shift clears this value."""
    zetas = bundle.affine_op.zetas(mu).astype(complex)
    worst = -np.inf
    for k in range(bundle.grid.n_omega):
        a_til = np.tensordot(zetas, bundle.a_tilde_terms[k], axes=(0, 0))
        worst = max(worst, np.linalg.eigvals(a_til).real.max())
    return float(worst)


def assemble_at_mu(bundle: AffineBundle, mu, stability_shift=0.0) -> RomOperators:
    """Rebuild all ROM operators at a parameter; no O(n_x) work.

    ``stability_shift`` is subtracted from the identity affine term (error if
    the decomposition has none) and drives the exact linear closure term.
    """
    zetas = bundle.affine_op.zetas(mu)
    if stability_shift != 0.0:
        if bundle.affine_op.identity_term is None:
            raise InvalidArgumentError(
                "stability shift requires an identity term in the affine decomposition"
            )
        zetas = zetas.copy()
        zetas[bundle.affine_op.identity_term] -= stability_shift
    zs = np.concatenate([[1.0], zetas]).astype(complex)

    grid = bundle.grid
    basis = bundle.basis
    n_omega = grid.n_omega
    n_d = bundle.gg.shape[-1]
    outer = np.conj(zs)[:, None] * zs[None, :]

    e_ops, h_ops = [], []
    j_ops = np.empty((n_omega, bundle.phi.shape[1], bundle.b_matrix.shape[1]), dtype=complex)
    a_tilde = np.empty((n_omega, n_d, n_d), dtype=complex)
    shift_psi = [] if stability_shift != 0.0 else None
    shift_phi = [] if stability_shift != 0.0 else None
    deim_n, triadic_n, triadic_m = [], [], []
    deim_m = None
    if bundle.deim_template is not None:
        deim_m = np.empty_like(bundle.deim_template.m_ops)
    bad = []
    inv_n = 1.0 / n_omega

    for k in range(n_omega):
        gram = np.tensordot(outer, bundle.gg[k], axes=([0, 1], [0, 1]))
        gram = 0.5 * (gram + gram.conj().T)
        evals = np.linalg.eigvalsh(gram)
        if evals[-1] / max(evals[0], np.finfo(float).tiny) > GRAM_COND_LIMIT:
            gram = gram + np.eye(n_d) * (GRAM_JITTER_SCALE * np.trace(gram).real / n_d)
            bad.append(k)
        factor = cho_factor(gram, lower=True)
        zc = np.conj(zs)

        kb = np.tensordot(zc, bundle.bg[k], axes=(0, 0))
        sol = cho_solve(factor, kb)
        e_ops.append(bundle.cpsi[k] @ sol)
        j_ops[k] = bundle.cphi[k] @ sol

        a_tilde[k] = np.tensordot(zetas.astype(complex), bundle.a_tilde_terms[k], axes=(0, 0))
        h_ops.append(
            _h_from_a_tilde(a_tilde[k], grid.omega(k), grid, bundle.psi_w_phi[k], basis.retained[k])
        )

        if shift_psi is not None:
            kp = np.tensordot(zc, bundle.psig[k], axes=(0, 0))
            solp = cho_solve(factor, kp)
            shift_psi.append(stability_shift * (bundle.cpsi[k] @ solp))
            shift_phi.append(stability_shift * (bundle.cphi[k] @ solp))

        if bundle.ug is not None:
            ku = np.tensordot(zc, bundle.ug[k], axes=(0, 0))
            solu = cho_solve(factor, ku)
            deim_n.append(bundle.cpsi[k] @ solu)
            deim_m[k] = bundle.cphi[k] @ solu

        if bundle.bg_vecs is not None:
            kv = np.tensordot(zc, bundle.bg_vecs[k], axes=(0, 0))
            solv = cho_solve(factor, kv)
            triadic_n.append((bundle.cpsi[k] @ solv) * inv_n)
            triadic_m.append((bundle.cphi[k] @ solv) * inv_n)

    if bad:
        warnings.warn(
            f"ill-conditioned assembled gram at frequency indices {bad[:8]}"
            f"{'...' if len(bad) > 8 else ''}; applied jitter regularization"
        )

    closure = None
    if bundle.deim_template is not None:
        t = bundle.deim_template
        closure = DeimOperators(n_ops=deim_n, m_ops=deim_m, s_ops=t.s_ops, artifacts=t.artifacts)
    elif bundle.triadic_template is not None:
        t = bundle.triadic_template
        closure = TriadicTable(
            epsilon=t.epsilon,
            candidate_count=t.candidate_count,
            offsets=t.offsets,
            retained_fraction=t.retained_fraction,
        )
        for k in range(n_omega):
            closure.append_frequency(
                k, t.l_idx[k], t.i_idx[k], t.m_idx[k], t.n_idx[k], triadic_n[k], triadic_m[k]
            )
        closure.finalize()

    return RomOperators(
        basis=basis,
        phi=bundle.phi,
        b_matrix=bundle.b_matrix,
        e_ops=e_ops,
        j_ops=j_ops,
        h_ops=h_ops,
        a_tilde=a_tilde,
        closure=closure,
        shift_alpha=stability_shift,
        shift_psi=shift_psi,
        shift_phi=shift_phi,
        omit_h_sum_normalization=bundle.omit_h_sum_normalization,
    )
