"""Adaptive time integration of the full-order model.

An embedded explicit Runge-Kutta 4(5) pair integrates dq/dt = A q + B f(t)
+ n(q), with dense output sampled exactly at the ROM time grid t_j = j*dt.
Runs are deterministic given the forcing samples and tolerances.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from ssop.frequency import FrequencyGrid, Trajectory
from ssop.util import IntegrationFailureError, InvalidArgumentError


def _solve(rhs, q0, t_grid, rel_tol, abs_tol):
    if rel_tol <= 0 or abs_tol <= 0:
        raise InvalidArgumentError("tolerances must be positive")
    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        np.asarray(q0, dtype=complex),
        method="RK45",
        t_eval=t_grid,
        rtol=rel_tol,
        atol=abs_tol,
    )
    if not sol.success:
        t_reached = sol.t[-1] if sol.t.size else t_grid[0]
        raise IntegrationFailureError(
            f"integration failed near t = {t_reached:.6g}: {sol.message}"
        )
    return sol.y


def integrate(a_matrix, forcing, q0, grid: FrequencyGrid, rel_tol=1e-8, abs_tol=1e-10,
              nonlinearity=None):
    """Integrate dq/dt = A q + B f + n(q) over the window, sampled at t_j.

    ``a_matrix`` is the assembled linear operator (pass the shifted operator
    together with a ``nonlinearity`` that includes the compensating shift*q
    when the stabilizing transformation is active); ``forcing`` is a
    ForcingRealization or None; ``nonlinearity`` is a callable or None.
    """
    a_matrix = np.asarray(a_matrix, dtype=complex)
    t_grid = grid.times

    if forcing is not None:
        f_of_t = forcing.interpolator()
        b = forcing.b_matrix
        if nonlinearity is None:
            def rhs(t, q):
                return a_matrix @ q + b @ f_of_t(t)
        else:
            def rhs(t, q):
                return a_matrix @ q + b @ f_of_t(t) + nonlinearity(q)
    else:
        if nonlinearity is None:
            def rhs(t, q):
                return a_matrix @ q
        else:
            def rhs(t, q):
                return a_matrix @ q + nonlinearity(q)

    states = _solve(rhs, q0, t_grid, rel_tol, abs_tol)
    return Trajectory(states, grid)


def integrate_ensemble(a_matrix, nonlinearity, forcings, q0s, grid: FrequencyGrid,
                       rel_tol=1e-8, abs_tol=1e-10):
    """Integrate many independent trajectories as one stacked system.

    Sharing the adaptive step across members costs nothing but step-size
    choices (error control stays per component) and turns each stage into one
    large matmul, much faster than separate runs. Members must share B, and
    ``nonlinearity`` must accept a state matrix with one column per member.
    """
    a_matrix = np.asarray(a_matrix, dtype=complex)
    n_x = a_matrix.shape[0]
    n_traj = len(q0s)
    if len(forcings) != n_traj:
        raise InvalidArgumentError("one forcing per initial condition required")
    b = forcings[0].b_matrix
    interps = [f.interpolator() for f in forcings]

    def rhs(t, y):
        q = y.reshape(n_x, n_traj, order="F")
        f_now = np.stack([fi(t) for fi in interps], axis=1)
        dq = a_matrix @ q + b @ f_now
        if nonlinearity is not None:
            dq = dq + nonlinearity(q)
        return dq.reshape(-1, order="F")

    y0 = np.stack([np.asarray(q, dtype=complex) for q in q0s], axis=1).reshape(-1, order="F")
    states = _solve(rhs, y0, grid.times, rel_tol, abs_tol)
    cube = states.reshape(n_x, n_traj, grid.n_omega, order="F")
    return [Trajectory(cube[:, i, :], grid) for i in range(n_traj)]
