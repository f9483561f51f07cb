"""Online phase: constant term, nonlinear closures, and solvers.

The algebraic system is a_K = c_K + w_K(a_K), where c_K collects the forcing
and initial-condition terms and w_K the closure's approximation of the
nonlinearity. The fixed-point iteration starts from zero, so its first
iterate is the linear solution; pseudo-time stepping relaxes the same system
through da/dtau = c + w(a) - a and tolerates Jacobian eigenvalues that the
fixed-point map cannot.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ssop.frequency import Trajectory
from ssop.spod import CoefficientSet, decode
from ssop.util import InvalidArgumentError, left_wmult

DIVERGENCE_GROWTH_RUNS = 3
DIVERGENCE_SCALE = 1e3


@dataclass
class OnlineProblem:
    operators: object  # RomOperators
    q0: np.ndarray
    forcing_values: np.ndarray  # (n_f, n_omega) samples on the ROM grid

    def __post_init__(self):
        self.q0 = np.asarray(self.q0, dtype=complex)
        self.forcing_values = np.atleast_2d(np.asarray(self.forcing_values, dtype=complex))
        if self.forcing_values.shape[1] != self.operators.grid.n_omega:
            raise InvalidArgumentError(
                "forcing must provide one sample per ROM time step"
            )

    @property
    def grid(self):
        return self.operators.grid


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    converged: bool = False
    method: str = "fixed_point"
    wall_time_breakdown: dict = field(default_factory=dict)
    diverged: bool = False

    @property
    def residual_monotone(self):
        """Recorded for divergence diagnosis; never enforced."""
        h = self.residual_history
        return all(b <= a for a, b in zip(h, h[1:]))

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "residual_monotone": bool(self.residual_monotone),
            "converged": bool(self.converged),
            "method": self.method,
            "wall_time_breakdown": {k: float(v) for k, v in self.wall_time_breakdown.items()},
            "diverged": bool(self.diverged),
        }


def constant_term(problem: OnlineProblem) -> CoefficientSet:
    """c_k = E_k fhat_k + H_k (Phi^* W q0 - (1/n) sum_l J_l fhat_l)."""
    rom = problem.operators
    basis = rom.basis
    fhat = np.fft.fft(problem.forcing_values, axis=1)
    q0_phi = left_wmult(rom.phi, basis.weights) @ problem.q0
    qt0_phi = np.einsum("kpf,fk->p", rom.j_ops, fhat) / problem.grid.n_omega
    resid = q0_phi - qt0_phi
    c = CoefficientSet.zeros(basis)
    for k in range(problem.grid.n_omega):
        if basis.retained[k]:
            c.block(k)[:] = rom.e_ops[k] @ fhat[:, k] + rom.h_ops[k] @ resid
    return c


def _h_couple(rom, w_blocks, acc_phi):
    """Subtract H_k times the intermediary-basis accumulation from each block."""
    scale = 1.0 if rom.omit_h_sum_normalization else 1.0 / rom.grid.n_omega
    acc = acc_phi * scale
    for k in range(rom.grid.n_omega):
        if rom.basis.retained[k]:
            w_blocks[k] -= rom.h_ops[k] @ acc
    return w_blocks


def _shift_contribution(rom, a: CoefficientSet, w_blocks, acc_phi):
    """Exact linear closure term for the stabilizing shift alpha*q."""
    for k in range(rom.grid.n_omega):
        if rom.basis.retained[k]:
            a_k = a.block(k)
            w_blocks[k] += rom.shift_psi[k] @ a_k
            acc_phi += rom.shift_phi[k] @ a_k
    return acc_phi


def nonlinear_term_deim(a: CoefficientSet, rom, pointwise) -> CoefficientSet:
    """Sampled-nonlinearity closure (hyper-reduction path).

    ``pointwise`` maps the sampled streams (one per local operator) to the
    nonlinearity values at the sample points.
    """
    closure = rom.closure
    grid = rom.grid
    n_omega = grid.n_omega
    pad = 2 if closure.dealias else 1
    n_fine = pad * n_omega
    half = n_omega // 2
    streams = []
    for s_list in closure.s_ops:
        qs = np.zeros((closure.p2, n_fine), dtype=complex)
        for k in range(n_omega):
            if rom.basis.retained[k]:
                col = k if k < half else k + (pad - 1) * n_omega
                qs[:, col] = s_list[k] @ a.block(k)
        streams.append(np.fft.ifft(qs, axis=1) * pad)
    nhat_fine = np.fft.fft(pointwise(*streams), axis=1)
    if pad == 1:
        nhat = nhat_fine
    else:
        nhat = np.concatenate(
            [nhat_fine[:, :half], nhat_fine[:, n_fine - (n_omega - half):]], axis=1
        ) / pad

    w_blocks = [np.zeros(r, dtype=complex) for r in rom.basis.retained]
    for k in range(n_omega):
        if rom.basis.retained[k]:
            w_blocks[k] += closure.n_ops[k] @ nhat[:, k]
    acc_phi = np.einsum("kpq,qk->p", closure.m_ops, nhat)
    if rom.shift_psi is not None:
        acc_phi = _shift_contribution(rom, a, w_blocks, acc_phi)
    _h_couple(rom, w_blocks, acc_phi)
    return CoefficientSet.from_blocks(w_blocks, rom.basis)


def nonlinear_term_triadic(a: CoefficientSet, rom) -> CoefficientSet:
    """Sparse triadic closure: w_k = sum over retained (l,m,n) of
    n_klmn a_lm a_in, minus the transient coupling."""
    table = rom.closure
    n_omega = rom.grid.n_omega
    w_blocks = [np.zeros(r, dtype=complex) for r in rom.basis.retained]
    acc_phi = np.zeros(rom.p1, dtype=complex)
    data = a.data
    for k in range(n_omega):
        if table.l_idx[k].size:
            prods = data[table.gather_left[k]] * data[table.gather_right[k]]
            w_blocks[k] += table.n_mats[k] @ prods
            acc_phi += table.m_mats[k] @ prods
    if rom.shift_psi is not None:
        acc_phi = _shift_contribution(rom, a, w_blocks, acc_phi)
    _h_couple(rom, w_blocks, acc_phi)
    return CoefficientSet.from_blocks(w_blocks, rom.basis)


def nonlinear_term_dense(a: CoefficientSet, rom) -> CoefficientSet:
    """Reference closure: the exact alias-free quadratic spectrum routed
    through the surrogate (equivalent to the epsilon = 0 triadic sum)."""
    from ssop.triadic import exact_quadratic_spectrum

    closure = rom.closure
    basis = rom.basis
    n_omega = rom.grid.n_omega
    qcols = np.zeros((basis.n_x, n_omega), dtype=complex)
    for k in range(n_omega):
        if basis.retained[k]:
            qcols[:, k] = basis.modes(k) @ a.block(k)
    nhat = exact_quadratic_spectrum(qcols, closure.bilinear)
    w_blocks = [np.zeros(r, dtype=complex) for r in basis.retained]
    acc_phi = np.zeros(rom.p1, dtype=complex)
    for k in range(n_omega):
        if basis.retained[k]:
            w_blocks[k] += closure.z_psi[k] @ nhat[:, k]
        acc_phi += closure.z_phi[k] @ nhat[:, k]
    if rom.shift_psi is not None:
        acc_phi = _shift_contribution(rom, a, w_blocks, acc_phi)
    _h_couple(rom, w_blocks, acc_phi)
    return CoefficientSet.from_blocks(w_blocks, rom.basis)


def make_nonlinear_term(rom, pointwise=None):
    """Bind the closure evaluator for a RomOperators instance (None closure
    means a linear model: w = 0)."""
    kind = rom.closure_kind
    if kind is None:
        if rom.shift_psi is not None:
            def w_of(a):
                w_blocks = [np.zeros(r, dtype=complex) for r in rom.basis.retained]
                acc = _shift_contribution(rom, a, w_blocks, np.zeros(rom.p1, dtype=complex))
                _h_couple(rom, w_blocks, acc)
                return CoefficientSet.from_blocks(w_blocks, rom.basis)
            return w_of
        return lambda a: CoefficientSet.zeros(rom.basis)
    if kind == "deim":
        if pointwise is None:
            raise InvalidArgumentError("the sampled closure needs the pointwise nonlinearity")
        return lambda a: nonlinear_term_deim(a, rom, pointwise)
    if kind == "triadic":
        return lambda a: nonlinear_term_triadic(a, rom)
    if kind == "dense_quadratic":
        return lambda a: nonlinear_term_dense(a, rom)
    raise InvalidArgumentError(f"unknown closure kind {kind!r}")


def fixed_point_iterate(c_vec, w_vec_of, tol, max_iter):
    """Core iteration a_{i+1} = c + w(a_i) from a_0 = 0, on flat vectors.

    Because w(0) = 0 the first iterate is c itself (the linear solution).
    Divergence is declared after three consecutive growing updates once the
    update norm passes 1e3 times ||c||. Returns
    (a, converged, diverged, residual_history, iterations, w_seconds);
    residuals are relative update norms ||a^{i+1} - a^i|| / ||a^i||.
    """
    c_vec = np.asarray(c_vec)
    c_norm = float(np.linalg.norm(c_vec))
    a = c_vec.copy()
    iterations = 1
    history = []
    converged = c_norm == 0.0
    diverged = False
    growth_run = 0
    prev_update = None
    w_seconds = 0.0
    while not converged and iterations < max_iter:
        t0 = time.perf_counter()
        w_val = w_vec_of(a)
        w_seconds += time.perf_counter() - t0
        a_next = c_vec + w_val
        iterations += 1
        update = float(np.linalg.norm(a_next - a))
        base = float(np.linalg.norm(a))
        rel = update / max(base, 1e-300)
        history.append(rel)
        a = a_next
        if rel <= tol:
            converged = True
            break
        if prev_update is not None and update > prev_update and update > DIVERGENCE_SCALE * c_norm:
            growth_run += 1
            if growth_run >= DIVERGENCE_GROWTH_RUNS:
                diverged = True
                break
        else:
            growth_run = 0
        prev_update = update
    return a, converged, diverged, history, iterations, w_seconds


def fixed_point_solve(problem: OnlineProblem, pointwise=None, tol=1e-10, max_iter=100,
                      c=None, accelerator=None):
    """Fixed-point solution of the closed system.

    ``accelerator`` is a reserved no-op hook for update-sequence acceleration
    schemes; only None is implemented.
    """
    if accelerator is not None:
        raise InvalidArgumentError("update acceleration is not implemented; pass None")
    timer = {}
    t0 = time.perf_counter()
    if c is None:
        tc = time.perf_counter()
        c = constant_term(problem)
        timer["constant_term_s"] = time.perf_counter() - tc
    w_of = make_nonlinear_term(problem.operators, pointwise)
    offsets = c.offsets

    def w_vec_of(vec):
        return w_of(CoefficientSet(vec, offsets)).data

    a_vec, converged, diverged, history, iterations, w_seconds = fixed_point_iterate(
        c.data, w_vec_of, tol, max_iter
    )
    timer["nonlinear_s"] = w_seconds
    timer["total_s"] = time.perf_counter() - t0
    report = SolveReport(
        iterations=iterations,
        residual_history=history,
        converged=converged,
        method="fixed_point",
        wall_time_breakdown=timer,
        diverged=diverged,
    )
    return CoefficientSet(a_vec, offsets), report


def _rk23_step(f, y, h, k1):
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.75 * h * k2)
    y_new = y + h * (2.0 * k1 + 3.0 * k2 + 4.0 * k3) / 9.0
    k4 = f(y_new)
    err = h * (-5.0 * k1 / 72.0 + k2 / 12.0 + k3 / 9.0 - k4 / 8.0)
    return y_new, k4, err


def pseudo_time_solve(problem: OnlineProblem, pointwise=None, tol=1e-10, max_steps=5000,
                      c=None, mode="adaptive", dtau=1.0, rel_step_tol=1e-4):
    """Relax da/dtau = c + w(a) - a from a(0) = c to its equilibrium.

    The default adaptive scheme is a step-controlled explicit Euler
    relaxation: steps that grow the residual are rejected and the step
    halved, monotone progress lets it recover toward dtau = 1 (where one
    step is exactly the fixed-point map). ``mode='euler'`` takes fixed steps
    of size ``dtau``; ``mode='rk23'`` uses an embedded pair with local error
    control. Iterations still converge when the fixed-point Jacobian has
    eigenvalues outside the unit circle, provided their real parts are
    below one.
    """
    timer = {}
    t0 = time.perf_counter()
    if c is None:
        tc = time.perf_counter()
        c = constant_term(problem)
        timer["constant_term_s"] = time.perf_counter() - tc
    w_of = make_nonlinear_term(problem.operators, pointwise)
    offsets = c.offsets

    w_seconds = 0.0

    def rhs(vec):
        nonlocal w_seconds
        t1 = time.perf_counter()
        w_val = w_of(CoefficientSet(vec, offsets))
        w_seconds += time.perf_counter() - t1
        return c.data + w_val.data - vec

    y = c.data.copy()
    history = []
    converged = False
    steps = 0
    floor = 1e-300
    if mode == "euler":
        for steps in range(1, max_steps + 1):
            dy = rhs(y)
            rel = np.linalg.norm(dy) / max(np.linalg.norm(y), floor)
            history.append(rel)
            y = y + dtau * dy
            if rel <= tol:
                converged = True
                break
    elif mode == "adaptive":
        h = min(dtau, 1.0)
        dy = rhs(y)
        res = np.linalg.norm(dy)
        for steps in range(1, max_steps + 1):
            rel = res / max(np.linalg.norm(y), floor)
            history.append(rel)
            if rel <= tol:
                converged = True
                break
            y_trial = y + h * dy
            dy_trial = rhs(y_trial)
            res_trial = np.linalg.norm(dy_trial)
            if res_trial <= res * (1.0 + 1e-12) or h <= 1e-3:
                y, dy, res = y_trial, dy_trial, res_trial
                h = min(1.0, h * 1.25)
            else:
                h = max(1e-3, 0.5 * h)
    elif mode == "rk23":
        h = 0.5
        k1 = rhs(y)
        for steps in range(1, max_steps + 1):
            rel = np.linalg.norm(k1) / max(np.linalg.norm(y), floor)
            history.append(rel)
            if rel <= tol:
                converged = True
                break
            y_new, k_new, err = _rk23_step(rhs, y, h, k1)
            err_ref = rel_step_tol * max(np.linalg.norm(y), np.linalg.norm(y_new), floor)
            ratio = np.linalg.norm(err) / err_ref if err_ref > 0 else np.inf
            if ratio <= 1.0:
                y, k1 = y_new, k_new
                h = min(4.0, h * min(2.0, 0.9 * ratio ** (-1.0 / 3.0) if ratio > 0 else 2.0))
            else:
                h = h * max(0.2, 0.9 * ratio ** (-1.0 / 3.0))
    else:
        raise InvalidArgumentError(f"unknown pseudo-time mode {mode!r}")

    timer["nonlinear_s"] = w_seconds
    timer["total_s"] = time.perf_counter() - t0
    report = SolveReport(
        iterations=steps,
        residual_history=history,
        converged=converged,
        method="pseudo_time",
        wall_time_breakdown=timer,
    )
    return CoefficientSet(y, offsets), report


def solve(problem: OnlineProblem, pointwise=None, method="auto", tol=1e-10,
          max_iter=100, max_steps=5000):
    """Constant term + chosen solver + decode.

    ``method='auto'`` runs the fixed-point iteration and falls back to
    pseudo-time stepping if it diverges. Returns (Trajectory, coefficients,
    SolveReport).
    """
    timer = {}
    t0 = time.perf_counter()
    tc = time.perf_counter()
    c = constant_term(problem)
    const_s = time.perf_counter() - tc

    if method not in ("auto", "fixed", "pseudo"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    if method in ("auto", "fixed"):
        a, report = fixed_point_solve(problem, pointwise, tol, max_iter, c=c)
        if method == "auto" and not report.converged:
            a, report = pseudo_time_solve(problem, pointwise, tol, max_steps, c=c)
    else:
        a, report = pseudo_time_solve(problem, pointwise, tol, max_steps, c=c)

    report.wall_time_breakdown["constant_term_s"] = const_s
    report.wall_time_breakdown["total_s"] = time.perf_counter() - t0
    traj = decode(a, problem.operators.basis)
    return traj, a, report
