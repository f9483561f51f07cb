import numpy as np
import pytest

from ssop.frequency import FrequencyGrid, Trajectory
from ssop.pod import pod_modes
from ssop.spod import (
    CoefficientSet,
    allocate_modes,
    compute_spod,
    decode,
    encode,
    projection_error,
)
from ssop.util import InvalidArgumentError, left_wmult, wnorm_traj
from ssop.welch import SpectralStack, welch_blocks


def random_stack(n_x=10, n_d=6, n_omega=16, seed=0, weights=None):
    rng = np.random.default_rng(seed)
    grid = FrequencyGrid(n_omega, 0.5)
    blocks = rng.standard_normal((n_omega, n_x, n_d)) + 1j * rng.standard_normal(
        (n_omega, n_x, n_d)
    )
    w = np.ones(n_x) if weights is None else weights
    return SpectralStack(blocks=blocks, grid=grid), w


def test_w_orthonormal_modes():
    rng = np.random.default_rng(1)
    weights = rng.uniform(0.5, 2.0, 10)
    stack, w = random_stack(weights=weights, seed=1)
    basis = compute_spod(stack, w, 3)
    for k in range(stack.grid.n_omega):
        psi = basis.modes_full[k]
        gram = left_wmult(psi, w) @ psi
        assert np.abs(gram - np.eye(stack.n_d)).max() <= 1e-10


def test_energies_descending():
    stack, w = random_stack(seed=2)
    basis = compute_spod(stack, w, 3)
    assert np.all(np.diff(basis.energies, axis=1) <= 1e-14)


def test_rank_one_single_realization():
    """One realization: the first mode is the W-normalized snapshot."""
    rng = np.random.default_rng(3)
    grid = FrequencyGrid(4, 0.5)
    w = rng.uniform(0.5, 2.0, 8)
    blocks = rng.standard_normal((4, 8, 1)) + 1j * rng.standard_normal((4, 8, 1))
    stack = SpectralStack(blocks=blocks, grid=grid)
    basis = compute_spod(stack, w, 1)
    for k in range(4):
        q = blocks[k][:, 0]
        unit = q / np.sqrt(np.real(np.vdot(q, w * q)))
        psi = basis.modes_full[k][:, 0]
        phase = np.vdot(unit, w * psi) / abs(np.vdot(unit, w * psi))
        assert np.abs(psi - phase * unit).max() <= 1e-10


def test_planted_energies_recovered():
    """Qhat = Psi sqrt(n_d lambda) V^* recovers the planted spectrum."""
    rng = np.random.default_rng(4)
    n_x, n_d, n_omega = 12, 3, 8
    grid = FrequencyGrid(n_omega, 0.5)
    w = rng.uniform(0.5, 2.0, n_x)
    lam = np.array([3.0, 1.0, 0.1])
    blocks = np.empty((n_omega, n_x, n_d), dtype=complex)
    for k in range(n_omega):
        raw = rng.standard_normal((n_x, n_d)) + 1j * rng.standard_normal((n_x, n_d))
        psi, _ = np.linalg.qr(np.sqrt(w)[:, None] * raw)
        psi /= np.sqrt(w)[:, None]  # W-orthonormal columns
        z = rng.standard_normal((n_d, n_d)) + 1j * rng.standard_normal((n_d, n_d))
        v, _ = np.linalg.qr(z)
        blocks[k] = psi @ np.diag(np.sqrt(n_d * lam)) @ v.conj().T
    basis = compute_spod(SpectralStack(blocks=blocks, grid=grid), w, 2)
    for k in range(n_omega):
        np.testing.assert_allclose(basis.energies[k], lam, atol=1e-10)


def test_allocation_uniform_spectrum():
    energies = np.ones((6, 4))
    retained = allocate_modes(energies, 2, 6)
    assert retained.sum() == 12
    np.testing.assert_array_equal(retained, np.full(6, 2))


def test_allocation_matches_brute_force_sort():
    rng = np.random.default_rng(5)
    energies = rng.uniform(0.1, 5.0, (3, 2))
    retained = allocate_modes(energies, 1, 3)
    # brute force: pick the 3 globally largest, ties toward low (m, k)
    flat = sorted(
        ((-energies[k, m], m, k) for k in range(3) for m in range(2))
    )[:3]
    expected = np.zeros(3, dtype=int)
    for _, _, k in flat:
        expected[k] += 1
    np.testing.assert_array_equal(retained, expected)


def test_allocation_tie_break_low_mode_then_frequency():
    # a flat spectrum allocates evenly; leftover ties go to lower frequency
    energies = np.array([[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(allocate_modes(energies, 1, 2), [1, 1])
    np.testing.assert_array_equal(allocate_modes(energies, 1.5, 2), [2, 1])


def test_allocation_monotone_in_budget():
    rng = np.random.default_rng(6)
    energies = rng.uniform(0, 1, (8, 5))
    prev = np.zeros(8, dtype=int)
    for r in (1, 2, 3, 4):
        cur = allocate_modes(energies, r, 8)
        assert np.all(cur >= prev)
        prev = cur


def test_allocation_budget_limit():
    with pytest.raises(InvalidArgumentError):
        allocate_modes(np.ones((4, 2)), 3, 4)


@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(7)
    grid = FrequencyGrid(16, 0.4)
    w = rng.uniform(0.5, 2.0, 10)
    snaps = rng.standard_normal((10, 200)) + 1j * rng.standard_normal((10, 200))
    stack = welch_blocks(snaps, grid, 0.5)
    basis = compute_spod(stack, w, 4)
    return grid, w, basis


def test_encode_left_inverse_on_span(trained):
    grid, w, basis = trained
    rng = np.random.default_rng(8)
    coeffs = CoefficientSet(
        rng.standard_normal(basis.coeff_size) + 1j * rng.standard_normal(basis.coeff_size),
        basis.offsets,
    )
    back = encode(decode(coeffs, basis), basis)
    assert np.abs(back.data - coeffs.data).max() <= 1e-10


def test_encode_zero(trained):
    grid, w, basis = trained
    traj = Trajectory(np.zeros((10, 16)), grid)
    assert np.all(encode(traj, basis).data == 0)


def test_residual_w_orthogonal_to_retained_modes(trained):
    grid, w, basis = trained
    rng = np.random.default_rng(9)
    traj = Trajectory(
        rng.standard_normal((10, 16)) + 1j * rng.standard_normal((10, 16)), grid
    )
    resid = traj.states - decode(encode(traj, basis), basis).states
    # inner products against every retained space-time mode vanish
    resid_hat = np.fft.fft(resid, axis=1)
    for k in range(16):
        r_k = basis.retained[k]
        if r_k:
            ips = left_wmult(basis.modes(k), w) @ resid_hat[:, k]
            assert np.abs(ips).max() <= 1e-10 * max(wnorm_traj(w, traj.states), 1)


def test_projection_idempotent(trained):
    grid, w, basis = trained
    rng = np.random.default_rng(10)
    traj = Trajectory(
        rng.standard_normal((10, 16)) + 1j * rng.standard_normal((10, 16)), grid
    )
    once = decode(encode(traj, basis), basis)
    twice = decode(encode(once, basis), basis)
    assert np.abs(once.states - twice.states).max() <= 1e-10


def test_parseval(trained):
    grid, w, basis = trained
    rng = np.random.default_rng(11)
    states = rng.standard_normal((10, 16)) + 1j * rng.standard_normal((10, 16))
    lhs = wnorm_traj(w, states) ** 2
    qhat = np.fft.fft(states, axis=1)
    rhs = sum(np.real(np.vdot(qhat[:, k], w * qhat[:, k])) for k in range(16)) / 16
    assert abs(lhs - rhs) <= 1e-12 * lhs


def test_projection_error_exact_basis(trained):
    grid, w, basis = trained
    rng = np.random.default_rng(12)
    coeffs = CoefficientSet(
        rng.standard_normal(basis.coeff_size) + 1j * rng.standard_normal(basis.coeff_size),
        basis.offsets,
    )
    traj = decode(coeffs, basis)
    assert projection_error(traj, basis) <= 1e-20


def test_projection_error_frequency_domain_identity(trained):
    """Time-domain relative error equals the Parseval recomputation."""
    grid, w, basis = trained
    rng = np.random.default_rng(13)
    traj = Trajectory(
        rng.standard_normal((10, 16)) + 1j * rng.standard_normal((10, 16)), grid
    )
    err = projection_error(traj, basis)
    qhat = np.fft.fft(traj.states, axis=1)
    num = 0.0
    den = 0.0
    for k in range(16):
        a_k = left_wmult(basis.modes(k), w) @ qhat[:, k]
        resid = qhat[:, k] - basis.modes(k) @ a_k
        num += np.real(np.vdot(resid, w * resid))
        den += np.real(np.vdot(qhat[:, k], w * qhat[:, k]))
    assert abs(err - num / den) <= 1e-10


def test_pod_truncation_identity():
    """Truncated-POD training reconstruction error equals the truncated
    eigenvalue sum."""
    rng = np.random.default_rng(14)
    w = rng.uniform(0.5, 2.0, 12)
    snaps = rng.standard_normal((12, 60)) + 1j * rng.standard_normal((12, 60))
    modes, energies = pod_modes(snaps, w)
    r = 4
    phi = modes[:, :r]
    recon = phi @ (left_wmult(phi, w) @ snaps)
    err = wnorm_traj(w, snaps - recon) ** 2 / snaps.shape[1]
    assert abs(err - energies[r:].sum()) <= 1e-8 * energies.sum()


def test_basis_save_load_round_trip(tmp_path, trained):
    grid, w, basis = trained
    basis.save(tmp_path / "basis")
    from ssop.spod import SpodBasis

    back = SpodBasis.load(tmp_path / "basis")
    np.testing.assert_array_equal(back.retained, basis.retained)
    np.testing.assert_allclose(back.modes_full, basis.modes_full, atol=0)
    np.testing.assert_allclose(back.energies, basis.energies, atol=0)
    np.testing.assert_allclose(back.weights, basis.weights, atol=0)
    assert back.grid.n_omega == 16


def test_training_block_error_equals_excluded_energy(smoke_cubic):
    """Energy-weighted reconstruction error over the training blocks equals
    the excluded-energy fraction (training identity for the eigenvalues)."""
    cfg, model, forcings, q0s, trajs = smoke_cubic
    basis = model.basis
    stack = model.stack
    w = model.weights
    num = 0.0
    den = 0.0
    for k in range(basis.grid.n_omega):
        psi = basis.modes(k)
        block = stack.blocks[k]
        recon = psi @ (left_wmult(psi, w) @ block)
        num += np.sum(w[:, None] * np.abs(block - recon) ** 2)
        den += np.sum(w[:, None] * np.abs(block) ** 2)
    lam = np.sort(basis.energies.ravel())[::-1]
    target = int(round(basis.r_avg * basis.grid.n_omega))
    excluded = lam[target:].sum() / lam.sum()
    assert abs(num / den - excluded) <= 1e-10
