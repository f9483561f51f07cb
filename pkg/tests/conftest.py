"""Shared fixtures: small dense systems with exact operators, and smoke-scale
Ginzburg-Landau pipelines reused across test modules."""

import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from ssop.config import ExperimentConfig
from ssop.frequency import FrequencyGrid
from ssop.romops import RomOperators
from ssop.spod import SpodBasis

warnings.filterwarnings("ignore", message="ill-conditioned")


def stable_dense_system(n=6, seed=7, margin=0.35):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a -= np.eye(n) * (np.linalg.eigvals(a).real.max() + margin)
    return a


def identity_basis(n, grid):
    """Full identity modes at every frequency with W = I (exact setting)."""
    modes = np.tile(np.eye(n, dtype=complex)[None, :, :], (grid.n_omega, 1, 1))
    energies = np.tile(np.linspace(3.0, 0.5, n)[None, :], (grid.n_omega, 1))
    return SpodBasis(
        modes_full=modes,
        energies=energies,
        retained=np.full(grid.n_omega, n),
        r_avg=float(n),
        weights=np.ones(n),
        grid=grid,
    )


def exact_rom(a, b, grid, basis=None, phi=None):
    """RomOperators with dense exact resolvents and transient operators."""
    n = a.shape[0]
    basis = basis or identity_basis(n, grid)
    phi = np.eye(n, dtype=complex) if phi is None else phi
    t_total = grid.t_total
    e_ops, h_ops, j_list = [], [], []
    for k in range(grid.n_omega):
        w_k = grid.omega(k)
        r_k = np.linalg.inv(1j * w_k * np.eye(n) - a)
        e_full = r_k @ b
        e_ops.append(e_full)
        j_list.append(phi.conj().T @ e_full)
        h_full = np.linalg.solve(
            np.eye(n) - expm((a - 1j * w_k * np.eye(n)) * grid.dt),
            np.eye(n) - expm(a * t_total),
        )
        h_ops.append(h_full @ phi)
    return RomOperators(
        basis=basis, phi=phi, b_matrix=b,
        e_ops=e_ops, j_ops=np.stack(j_list), h_ops=h_ops,
    )


@pytest.fixture(scope="session")
def dense6():
    grid = FrequencyGrid(32, 0.35)
    a = stable_dense_system(6, seed=7)
    rng = np.random.default_rng(8)
    b = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    return a, b, grid


@pytest.fixture(scope="session")
def smoke_cubic():
    """Small cubic GL pipeline with DEIM closure and a 3-trajectory test set."""
    from ssop.bench import make_test_set, train_model

    cfg = ExperimentConfig.from_dict({
        "experiment_id": "smoke-cubic",
        "seed": 42,
        "system": {"n_x": 64, "half_width": 30.0},
        "data": {"n_steps": 400, "dt": 0.8, "n_omega": 64, "ic_spacing": 8},
        "rom": {"r": 4, "p1": 12, "p2": 12, "closure": "deim"},
        "test": {"n_test": 3},
    }).validate()
    model = train_model(cfg)
    forcings, q0s, trajs = make_test_set(model, cfg)
    return cfg, model, forcings, q0s, trajs


@pytest.fixture(scope="session")
def smoke_quadratic():
    """Small quadratic GL pipeline with the triadic closure."""
    from ssop.bench import make_test_set, train_model

    cfg = ExperimentConfig.from_dict({
        "experiment_id": "smoke-quad",
        "seed": 43,
        "system": {"n_x": 64, "half_width": 30.0, "nonlinearity": "quadratic"},
        "data": {"n_steps": 400, "dt": 0.8, "n_omega": 64, "ic_spacing": 8},
        "rom": {"r": 4, "p1": 12, "p2": 12, "closure": "triadic", "epsilon": 0.0},
        "test": {"n_test": 2},
    }).validate()
    model = train_model(cfg)
    forcings, q0s, trajs = make_test_set(model, cfg)
    return cfg, model, forcings, q0s, trajs
