"""Quadratic nonlinearities as sparse sums over triadic frequency
interactions.

A pair of modes at frequencies w_l and w_i drives frequency w_k = w_l + w_i.
Candidate interactions pair retained modes at exactly-summing frequencies
(no modulo wrap, which drops the aliasing terms); each candidate's impact is
ranked by the proxy ||n_klmn||^2 lambda_lm lambda_in and kept when the proxy
exceeds a threshold.

Factor convention: the decoder carries 1/n_omega, so the spectral content of
b(q, q) at frequency k is (1/n_omega) * sum over exact pairs of
b(Psi_l a_l, Psi_i a_i). The stored online vectors fold this 1/n_omega in;
the selection proxy uses the unnormalized vectors so thresholds are quoted in
the same units as the per-frequency operator entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ssop.util import InvalidArgumentError, InvalidNonlinearityError, left_wmult, rng_for


class BilinearForm:
    """Symmetric bilinear b with b(q, q) = n(q) for a quadratic n.

    b(q1, q2) = (n(q1 + q2) - n(q1) - n(q2)) / 2; ``block`` evaluates all
    column pairs of two matrices at once (m-major flattening).
    """

    def __init__(self, n):
        self.n = n

    def __call__(self, q1, q2):
        return 0.5 * (self.n(q1 + q2) - self.n(q1) - self.n(q2))

    def block(self, x, y):
        nx, mx = x.shape
        my = y.shape[1]
        ny = self.n(y)
        out = np.empty((nx, mx * my), dtype=complex)
        for m in range(mx):
            col = x[:, m : m + 1]
            out[:, m * my : (m + 1) * my] = 0.5 * (self.n(col + y) - self.n(col) - ny)
        return out


def symmetric_bilinear(n, n_x=None, probes=5, seed=1234) -> BilinearForm:
    """Wrap ``n`` as a symmetric bilinear form, self-testing that ``n`` is
    exactly quadratic (b(q,q) = n(q) and homogeneity of degree one in each
    argument). Raises InvalidNonlinearityError otherwise."""
    b = BilinearForm(n)
    if n_x is not None:
        rng = rng_for(seed, 0)
        for _ in range(probes):
            q1 = rng.standard_normal(n_x) + 1j * rng.standard_normal(n_x)
            q2 = rng.standard_normal(n_x) + 1j * rng.standard_normal(n_x)
            scale = max(np.abs(n(q1)).max(), 1e-30)
            if np.abs(b(q1, q1) - n(q1)).max() > 1e-10 * scale:
                raise InvalidNonlinearityError("b(q, q) != n(q); n is not a quadratic form")
            lhs = b(2.5 * q1, q2)
            rhs = 2.5 * b(q1, q2)
            ref = max(np.abs(rhs).max(), 1e-30)
            if np.abs(lhs - rhs).max() > 1e-9 * ref:
                raise InvalidNonlinearityError("b is not bilinear; n is not a quadratic form")
    return b


@dataclass
class TriadicCatalog:
    """Every candidate interaction with its selection proxy, grouped by k.

    Per frequency k: integer arrays l_idx/i_idx/m_idx/n_idx, the candidate
    vectors n_klmn (unnormalized, (r_k, n_cand)), and the proxy values.
    """

    basis: object
    surrogate: object
    b: BilinearForm
    l_arrays: list = field(default_factory=list)
    i_arrays: list = field(default_factory=list)
    m_arrays: list = field(default_factory=list)
    n_arrays: list = field(default_factory=list)
    nvec_arrays: list = field(default_factory=list)
    proxy_arrays: list = field(default_factory=list)
    max_signed_index: int | None = None

    @property
    def candidate_count(self):
        return int(sum(p.size for p in self.proxy_arrays))

    def impact_map(self):
        """T[k, l] = sum over mode pairs of the selection proxy (Fig-9 style)."""
        n_omega = self.basis.grid.n_omega
        t = np.zeros((n_omega, n_omega))
        for k in range(n_omega):
            np.add.at(t[k], self.l_arrays[k], self.proxy_arrays[k])
        return t

    def count_map(self, epsilon=None):
        """Candidate (or retained, given epsilon) counts per (k, l) pair."""
        n_omega = self.basis.grid.n_omega
        c = np.zeros((n_omega, n_omega), dtype=int)
        for k in range(n_omega):
            sel = slice(None) if epsilon is None else self.proxy_arrays[k] > epsilon
            np.add.at(c[k], self.l_arrays[k][sel], 1)
        return c

    def table_at(self, epsilon, phi) -> "TriadicTable":
        """Materialize the retained table for a threshold; recomputes the
        intermediary-basis vectors for retained entries only."""
        basis, surr = self.basis, self.surrogate
        w = basis.weights
        n_omega = basis.grid.n_omega
        inv_n = 1.0 / n_omega
        phi_w = left_wmult(phi, w)
        table = TriadicTable(
            epsilon=float(epsilon),
            candidate_count=self.candidate_count,
            offsets=basis.offsets,
            bilinear=self.b,
        )
        retained = 0
        for k in range(n_omega):
            keep = np.where(self.proxy_arrays[k] > epsilon)[0]
            retained += keep.size
            l_k = self.l_arrays[k][keep]
            i_k = self.i_arrays[k][keep]
            m_k = self.m_arrays[k][keep]
            n_k = self.n_arrays[k][keep]
            n_mat = self.nvec_arrays[k][:, keep] * inv_n
            if keep.size:
                cphi = phi_w @ surr.qhat[k]
                zphi = cphi @ surr.gram_solve(k, left_wmult(surr.g[k], w))
                cols = np.empty((phi.shape[0], keep.size), dtype=complex)
                for j, (l, i, m, n) in enumerate(zip(l_k, i_k, m_k, n_k)):
                    cols[:, j] = self.b(
                        basis.modes_full[l, :, m], basis.modes_full[i, :, n]
                    )
                m_mat = (zphi @ cols) * inv_n
            else:
                m_mat = np.zeros((phi.shape[0], 0), dtype=complex)
            table.append_frequency(k, l_k, i_k, m_k, n_k, n_mat, m_mat)
        table.retained_fraction = retained / max(self.candidate_count, 1)
        table.finalize()
        return table


@dataclass
class TriadicTable:
    """Retained interactions with dense per-frequency coefficient blocks and
    flat gather indices for the online sum."""

    epsilon: float
    candidate_count: int
    offsets: np.ndarray  # coefficient offsets of the basis allocation
    l_idx: list = field(default_factory=list)
    i_idx: list = field(default_factory=list)
    m_idx: list = field(default_factory=list)
    n_idx: list = field(default_factory=list)
    n_mats: list = field(default_factory=list)
    m_mats: list = field(default_factory=list)
    gather_left: list = field(default_factory=list)
    gather_right: list = field(default_factory=list)
    retained_fraction: float = 0.0
    bilinear: BilinearForm | None = None

    kind = "triadic"

    def append_frequency(self, k, l_k, i_k, m_k, n_k, n_mat, m_mat):
        self.l_idx.append(l_k)
        self.i_idx.append(i_k)
        self.m_idx.append(m_k)
        self.n_idx.append(n_k)
        self.n_mats.append(n_mat)
        self.m_mats.append(m_mat)

    def finalize(self):
        off = self.offsets
        self.gather_left = [off[l] + m for l, m in zip(self.l_idx, self.m_idx)]
        self.gather_right = [off[i] + n for i, n in zip(self.i_idx, self.n_idx)]

    @property
    def retained_count(self):
        return int(sum(a.size for a in self.l_idx))

    def entries(self):
        """Iterate (k, l, m, n, n_vec, m_vec); the i index is implied by
        omega_i = omega_k - omega_l."""
        for k in range(len(self.l_idx)):
            for j in range(self.l_idx[k].size):
                yield (
                    k,
                    int(self.l_idx[k][j]),
                    int(self.m_idx[k][j]),
                    int(self.n_idx[k][j]),
                    self.n_mats[k][:, j],
                    self.m_mats[k][:, j],
                )


def _valid_pairs(grid, max_signed_index):
    """For each k: arrays of (l, i) frequency-index pairs with exact sums."""
    n = grid.n_omega
    s = grid.signed_indices
    cap = n // 2 if max_signed_index is None else int(max_signed_index)
    lo, hi = -(n // 2), n // 2 - 1
    pairs = []
    for k in range(n):
        if abs(s[k]) > cap:
            pairs.append((np.empty(0, dtype=int), np.empty(0, dtype=int)))
            continue
        s_i = s[k] - s
        ok = (s_i >= lo) & (s_i <= hi) & (np.abs(s) <= cap) & (np.abs(s_i) <= cap)
        l_list = np.where(ok)[0]
        i_list = np.mod(s_i[l_list], n)
        pairs.append((l_list, i_list))
    return pairs


def build_triadic_catalog(surrogate, basis, b: BilinearForm, max_signed_index=None) -> TriadicCatalog:
    """Evaluate every candidate interaction vector and its selection proxy."""
    grid = basis.grid
    w = basis.weights
    retained = basis.retained
    energies = basis.energies
    cat = TriadicCatalog(basis=basis, surrogate=surrogate, b=b, max_signed_index=max_signed_index)
    pairs = _valid_pairs(grid, max_signed_index)
    for k in range(grid.n_omega):
        r_k = retained[k]
        l_parts, i_parts, m_parts, n_parts, nvec_parts, proxy_parts = [], [], [], [], [], []
        if r_k:
            cpsi = left_wmult(basis.modes(k), w) @ surrogate.qhat[k]
            zpsi = cpsi @ surrogate.gram_solve(k, left_wmult(surrogate.g[k], w))
            for l, i in zip(*pairs[k]):
                r_l, r_i = retained[l], retained[i]
                if r_l == 0 or r_i == 0:
                    continue
                block = b.block(basis.modes(l), basis.modes(i))
                nvec = zpsi @ block  # (r_k, r_l*r_i)
                lam = np.outer(energies[l, :r_l], energies[i, :r_i]).ravel()
                proxy = np.sum(np.abs(nvec) ** 2, axis=0) * lam
                mm, nn = np.divmod(np.arange(r_l * r_i), r_i)
                l_parts.append(np.full(r_l * r_i, l, dtype=int))
                i_parts.append(np.full(r_l * r_i, i, dtype=int))
                m_parts.append(mm)
                n_parts.append(nn)
                nvec_parts.append(nvec)
                proxy_parts.append(proxy)
        if l_parts:
            cat.l_arrays.append(np.concatenate(l_parts))
            cat.i_arrays.append(np.concatenate(i_parts))
            cat.m_arrays.append(np.concatenate(m_parts))
            cat.n_arrays.append(np.concatenate(n_parts))
            cat.nvec_arrays.append(np.concatenate(nvec_parts, axis=1))
            cat.proxy_arrays.append(np.concatenate(proxy_parts))
        else:
            cat.l_arrays.append(np.empty(0, dtype=int))
            cat.i_arrays.append(np.empty(0, dtype=int))
            cat.m_arrays.append(np.empty(0, dtype=int))
            cat.n_arrays.append(np.empty(0, dtype=int))
            cat.nvec_arrays.append(np.empty((r_k, 0), dtype=complex))
            cat.proxy_arrays.append(np.empty(0))
    return cat


def build_triadic_table(surrogate, basis, phi, b: BilinearForm, epsilon,
                        max_signed_index=None) -> TriadicTable:
    """Candidate pass plus thresholding in one call (spec operation)."""
    if not getattr(b, "__call__", None):
        raise InvalidArgumentError("b must be callable")
    catalog = build_triadic_catalog(surrogate, basis, b, max_signed_index)
    return catalog.table_at(epsilon, phi)


@dataclass
class DenseQuadraticClosure:
    """Reference closure applying the surrogate to the exact alias-free
    quadratic spectrum; equal to the epsilon = 0 triadic sum without storing
    the table."""

    z_psi: list  # (r_k, n_x) per frequency
    z_phi: list  # (p1, n_x) per frequency
    bilinear: BilinearForm

    kind = "dense_quadratic"


def build_dense_quadratic_closure(surrogate, basis, phi, b: BilinearForm) -> DenseQuadraticClosure:
    w = basis.weights
    phi_w = left_wmult(phi, w)
    z_psi, z_phi = [], []
    for k in range(basis.grid.n_omega):
        t_k = surrogate.gram_solve(k, left_wmult(surrogate.g[k], w))
        core = surrogate.qhat[k] @ t_k
        z_psi.append(left_wmult(basis.modes(k), w) @ core)
        z_phi.append(phi_w @ core)
    return DenseQuadraticClosure(z_psi=z_psi, z_phi=z_phi, bilinear=b)


def exact_quadratic_spectrum(qhat_cols, b: BilinearForm, pad_factor=2):
    """Alias-free spectral content of b(q, q) for a band-limited trajectory.

    ``qhat_cols`` holds the unnormalized per-frequency vectors (n_x, n_omega).
    The signal is resampled on a pad_factor-finer time grid (zero-padded
    spectrum), the quadratic form is evaluated pointwise there, and the
    original band is extracted; with pad_factor >= 2 no product aliases back
    into the band, so entry k equals (1/n_omega) * sum over exact triads.
    """
    n_x, n = qhat_cols.shape
    n2 = pad_factor * n
    padded = np.zeros((n_x, n2), dtype=complex)
    half = n // 2
    padded[:, :half] = qhat_cols[:, :half]
    padded[:, n2 - (n - half) :] = qhat_cols[:, half:]
    q_fine = np.fft.ifft(padded, axis=1) * (n2 / n)
    n_fine = np.fft.fft(b(q_fine, q_fine), axis=1)
    out = np.empty((n_x, n), dtype=complex)
    out[:, :half] = n_fine[:, :half]
    out[:, half:] = n_fine[:, n2 - (n - half) :]
    return out / pad_factor
