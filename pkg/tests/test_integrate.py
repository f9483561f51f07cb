import numpy as np
import pytest
from scipy.linalg import expm

from ssop.forcing import ForcingRealization
from ssop.frequency import FrequencyGrid
from ssop.integrate import integrate, integrate_ensemble
from ssop.util import InvalidArgumentError
from tests.conftest import stable_dense_system


def test_null_dynamics_constant():
    grid = FrequencyGrid(16, 0.5)
    v = np.array([1.0 + 1j, -2.0, 0.5j])
    traj = integrate(np.zeros((3, 3)), None, v, grid)
    np.testing.assert_allclose(traj.states, np.tile(v[:, None], (1, 16)), atol=1e-12)


def test_scalar_exponential_decay():
    grid = FrequencyGrid(32, 0.25)
    traj = integrate(np.array([[-1.0 + 0j]]), None, np.array([1.0 + 0j]), grid,
                     rel_tol=1e-10, abs_tol=1e-12)
    np.testing.assert_allclose(traj.states[0], np.exp(-grid.times), rtol=1e-8)


def test_matrix_exponential_oracle():
    a = stable_dense_system(4, seed=3)
    grid = FrequencyGrid(20, 0.4)
    rng = np.random.default_rng(4)
    q0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    traj = integrate(a, None, q0, grid, rel_tol=1e-11, abs_tol=1e-13)
    for j in (1, 7, 19):
        exact = expm(a * grid.times[j]) @ q0
        assert np.abs(traj.states[:, j] - exact).max() <= 1e-8


def test_tolerance_convergence():
    """Halving tolerances moves the endpoint by less than the coarse tolerance."""
    from ssop.gl import make_gl_system
    from ssop.forcing import ForcingSpec, realize_forcing

    system = make_gl_system(n_x=48, half_width=25.0, mu0=0.229, auto_shift=False)
    grid = FrequencyGrid(32, 0.8)
    forcing = realize_forcing(ForcingSpec(kind="stochastic", amplitude=0.05, seed=2),
                              system.grid, grid, 32)
    q0 = np.zeros(48, dtype=complex)
    coarse = system.integrate(forcing, q0, grid, rel_tol=1e-6, abs_tol=1e-8)
    fine = system.integrate(forcing, q0, grid, rel_tol=3e-7, abs_tol=4e-9)
    delta = np.abs(coarse.states[:, -1] - fine.states[:, -1]).max()
    assert delta <= 1e-6 * max(np.abs(fine.states[:, -1]).max(), 1.0)


def test_positive_tolerances_required():
    grid = FrequencyGrid(4, 0.1)
    with pytest.raises(InvalidArgumentError):
        integrate(np.zeros((2, 2)), None, np.zeros(2), grid, rel_tol=0.0)


def test_ensemble_matches_individual_runs():
    a = stable_dense_system(5, seed=9)
    grid = FrequencyGrid(16, 0.4)
    rng = np.random.default_rng(10)
    b = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
    forcings, q0s = [], []
    for i in range(3):
        vals = rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16))
        forcings.append(ForcingRealization(values=vals, b_matrix=b, dt=grid.dt))
        q0s.append(rng.standard_normal(5) + 1j * rng.standard_normal(5))
    batch = integrate_ensemble(a, None, forcings, q0s, grid, rel_tol=1e-10, abs_tol=1e-12)
    for i in range(3):
        solo = integrate(a, forcings[i], q0s[i], grid, rel_tol=1e-10, abs_tol=1e-12)
        assert np.abs(batch[i].states - solo.states).max() <= 1e-7
