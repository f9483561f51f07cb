"""Precomputed frequency-domain ROM operators.

Per frequency k the linear pieces are

    E_k = Psi_k^* W Qhat_k G_k^+ B           (forcing -> coefficients)
    J_k = Phi^*   W Qhat_k G_k^+ B           (forcing -> intermediary basis)
    H_k = P_k (I - e^{(At - i w_k I) dt})^{-1} (I - e^{At T}) Psi_k^{Nd*} W Phi

with At the Galerkin compression of A onto the full per-frequency mode set.
An optional exact linear closure term (the stabilizing-shift correction
alpha*q routed through the resolvent surrogate) is carried alongside the
nonlinear closure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from ssop.containers import read_json, write_json, read_matrix, write_matrix
from ssop.deim import DeimArtifacts, DeimOperators
from ssop.frequency import dft_block
from ssop.spod import SpodBasis
from ssop.triadic import TriadicTable
from ssop.util import InvalidArgumentError, NumericalError, left_wmult


@dataclass
class RomOperators:
    basis: SpodBasis
    phi: np.ndarray
    b_matrix: np.ndarray
    e_ops: list  # (r_k, n_f) per frequency
    j_ops: np.ndarray  # (n_omega, p1, n_f)
    h_ops: list  # (r_k, p1) per frequency
    a_tilde: np.ndarray | None = None  # (n_omega, n_d, n_d), galerkin mode only
    closure: object = None  # DeimOperators | TriadicTable | None
    shift_alpha: float = 0.0
    shift_psi: list | None = None  # alpha * Psi^*WQG+ Psi, (r_k, r_k)
    shift_phi: list | None = None  # alpha * Phi^*WQG+ Psi, (p1, r_k)
    h_mode: str = "galerkin"
    omit_h_sum_normalization: bool = False

    @property
    def grid(self):
        return self.basis.grid

    @property
    def p1(self):
        return self.phi.shape[1]

    @property
    def n_f(self):
        return self.b_matrix.shape[1]

    @property
    def closure_kind(self):
        return None if self.closure is None else self.closure.kind


def _h_from_a_tilde(a_tilde_k, omega_k, grid, psi_w_phi, r_k):
    """P_k (I - e^{-i w dt} e1)^{-1} (I - e1^{n}) psi_w_phi via one expm."""
    n_d = a_tilde_k.shape[0]
    e1 = expm(a_tilde_k * grid.dt)
    e_t = np.linalg.matrix_power(e1, grid.n_omega)
    if not np.all(np.isfinite(e_t)):
        raise NumericalError(
            "matrix exponential of the compressed operator overflowed over the "
            "window; apply a stability shift to the system"
        )
    lhs = np.eye(n_d) - np.exp(-1j * omega_k * grid.dt) * e1
    full = np.linalg.solve(lhs, (np.eye(n_d) - e_t) @ psi_w_phi)
    return full[:r_k]


def build_linear_operators(surrogate, basis: SpodBasis, phi, b_matrix, a_matrix,
                           shift_alpha=0.0) -> RomOperators:
    """All parameter-dependent linear operators at a fixed parameter."""
    grid = basis.grid
    w = basis.weights
    phi = np.asarray(phi, dtype=complex)
    b_matrix = np.asarray(b_matrix, dtype=complex)
    a_matrix = np.asarray(a_matrix, dtype=complex)
    n_omega = grid.n_omega
    phi_w = left_wmult(phi, w)

    e_ops, h_ops = [], []
    j_ops = np.empty((n_omega, phi.shape[1], b_matrix.shape[1]), dtype=complex)
    a_tilde = np.empty((n_omega, basis.n_d, basis.n_d), dtype=complex)
    shift_psi = [] if shift_alpha != 0.0 else None
    shift_phi = [] if shift_alpha != 0.0 else None

    a_phi_full = a_matrix @ basis.modes_full.transpose(1, 0, 2).reshape(basis.n_x, -1)
    a_phi_full = a_phi_full.reshape(basis.n_x, n_omega, basis.n_d)

    for k in range(n_omega):
        r_k = basis.retained[k]
        psi_r = basis.modes(k)
        psi_full = basis.modes_full[k]
        cpsi = left_wmult(psi_r, w) @ surrogate.qhat[k]
        cphi = phi_w @ surrogate.qhat[k]

        sol_b = surrogate.gram_solve(k, surrogate.gw(k, b_matrix))
        e_ops.append(cpsi @ sol_b)
        j_ops[k] = cphi @ sol_b

        full_w = left_wmult(psi_full, w)
        a_tilde[k] = full_w @ a_phi_full[:, k, :]
        h_ops.append(_h_from_a_tilde(a_tilde[k], grid.omega(k), grid, full_w @ phi, r_k))

        if shift_alpha != 0.0:
            sol_psi = surrogate.gram_solve(k, surrogate.gw(k, psi_r))
            shift_psi.append(shift_alpha * (cpsi @ sol_psi))
            shift_phi.append(shift_alpha * (cphi @ sol_psi))

    return RomOperators(
        basis=basis,
        phi=phi,
        b_matrix=b_matrix,
        e_ops=e_ops,
        j_ops=j_ops,
        h_ops=h_ops,
        a_tilde=a_tilde,
        shift_alpha=shift_alpha,
        shift_psi=shift_psi,
        shift_phi=shift_phi,
    )


def build_h_via_linear_runs(a_matrix, phi, basis: SpodBasis, grid,
                            rel_tol=1e-10, abs_tol=1e-12):
    """Simulation-based transient operators: column l of the k-th operator is
    Psi_k^* W DFT_k of the unforced linear response started from phi_l.

    Exact up to time-stepping error; incompatible with affine fast
    reassembly (each new parameter needs new runs).
    """
    from ssop.integrate import integrate

    phi = np.asarray(phi, dtype=complex)
    n_x, p1 = phi.shape
    dfts = np.empty((n_x, grid.n_omega, p1), dtype=complex)
    for l in range(p1):
        traj = integrate(a_matrix, None, phi[:, l], grid, rel_tol, abs_tol)
        dfts[:, :, l] = dft_block(traj)
    w = basis.weights
    h_ops = []
    for k in range(grid.n_omega):
        h_ops.append(left_wmult(basis.modes(k), w) @ dfts[:, k, :])
    return h_ops


def attach_closure(rom: RomOperators, closure):
    rom.closure = closure
    return rom


def with_h_from_runs(rom: RomOperators, a_matrix, rel_tol=1e-10, abs_tol=1e-12):
    """Replace the Galerkin transient operators with simulation-based ones."""
    rom.h_ops = build_h_via_linear_runs(a_matrix, rom.phi, rom.basis, rom.grid,
                                        rel_tol, abs_tol)
    rom.h_mode = "runs"
    return rom


def _pack_ragged(mats):
    """Stack per-frequency (r_k, cols) blocks with equal column counts."""
    if not mats:
        return np.zeros((0, 0), dtype=complex)
    return np.concatenate(list(mats), axis=0)


def _pack_padded(mats):
    """Stack blocks whose column counts vary, zero-padding to the widest."""
    rows = sum(m.shape[0] for m in mats)
    cols = max((m.shape[1] for m in mats), default=0)
    out = np.zeros((max(rows, 1), max(cols, 1)), dtype=complex)
    at = 0
    for m in mats:
        out[at : at + m.shape[0], : m.shape[1]] = m
        at += m.shape[0]
    return out


def _pack_rowpad(mats):
    """Concatenate along columns, zero-padding rows to the tallest block."""
    rows = max((m.shape[0] for m in mats), default=0)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((max(rows, 1), max(cols, 1)), dtype=complex)
    at = 0
    for m in mats:
        out[: m.shape[0], at : at + m.shape[1]] = m
        at += m.shape[1]
    return out


def save_rom(rom: RomOperators, out_dir, basis_dir=None):
    """Operator store: packed containers plus a JSON manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "e.ssopmat", _pack_ragged(rom.e_ops))
    write_matrix(out / "h.ssopmat", _pack_ragged(rom.h_ops))
    write_matrix(out / "j.ssopmat", rom.j_ops.reshape(-1, rom.n_f))
    write_matrix(out / "phi.ssopmat", rom.phi)
    write_matrix(out / "b.ssopmat", rom.b_matrix)
    if rom.a_tilde is not None:
        write_matrix(out / "a_tilde.ssopmat", rom.a_tilde.reshape(-1, rom.basis.n_d))
    if rom.shift_psi is not None:
        write_matrix(out / "shift_psi.ssopmat", _pack_padded(rom.shift_psi))
        write_matrix(out / "shift_phi.ssopmat", np.concatenate(rom.shift_phi, axis=1))
    manifest = {
        "kind": "rom-operators",
        "closure": rom.closure_kind,
        "h_mode": rom.h_mode,
        "shift_alpha": rom.shift_alpha,
        "omit_h_sum_normalization": rom.omit_h_sum_normalization,
        "retained": rom.basis.retained.tolist(),
        "p1": rom.p1,
        "n_f": rom.n_f,
        "n_omega": rom.grid.n_omega,
        "dt": rom.grid.dt,
        "basis_dir": str(basis_dir) if basis_dir else None,
    }
    if rom.closure_kind == "deim":
        c = rom.closure
        write_matrix(out / "deim_n.ssopmat", _pack_ragged(c.n_ops))
        write_matrix(out / "deim_m.ssopmat", c.m_ops.reshape(-1, c.p2))
        for i, s_list in enumerate(c.s_ops):
            write_matrix(out / f"deim_s{i}.ssopmat", np.concatenate([s.T for s in s_list], axis=0))
        write_matrix(out / "deim_u.ssopmat", c.artifacts.u_n)
        manifest["deim"] = {
            "p2": c.p2,
            "sample_indices": c.artifacts.sample_indices.tolist(),
            "interp_condition": c.artifacts.interp_condition,
            "n_local_ops": len(c.s_ops),
        }
    elif rom.closure_kind == "triadic":
        c = rom.closure
        write_matrix(out / "triadic_n.ssopmat", _pack_rowpad(c.n_mats).T)
        write_matrix(out / "triadic_m.ssopmat", np.concatenate(c.m_mats, axis=1).T)
        manifest["triadic"] = {
            "epsilon": c.epsilon,
            "candidate_count": c.candidate_count,
            "retained_fraction": c.retained_fraction,
            "counts": [int(a.size) for a in c.l_idx],
            "l_idx": np.concatenate(c.l_idx).tolist(),
            "i_idx": np.concatenate(c.i_idx).tolist(),
            "m_idx": np.concatenate(c.m_idx).tolist(),
            "n_idx": np.concatenate(c.n_idx).tolist(),
        }
    write_json(out / "manifest.json", manifest)
    return out


def load_rom(in_dir, basis: SpodBasis | None = None) -> RomOperators:
    src = Path(in_dir)
    man = read_json(src / "manifest.json")
    if basis is None:
        if not man.get("basis_dir"):
            raise InvalidArgumentError("pass a basis or save the store with basis_dir")
        basis = SpodBasis.load(man["basis_dir"])
    retained = np.asarray(man["retained"], dtype=int)
    bounds = np.concatenate([[0], np.cumsum(retained)])

    def unpack(tall):
        return [tall[bounds[k] : bounds[k + 1]] for k in range(len(retained))]

    e_tall = read_matrix(src / "e.ssopmat")
    h_tall = read_matrix(src / "h.ssopmat")
    phi = read_matrix(src / "phi.ssopmat")
    b = read_matrix(src / "b.ssopmat")
    j_ops = read_matrix(src / "j.ssopmat").reshape(man["n_omega"], man["p1"], man["n_f"])
    a_tilde = None
    if (src / "a_tilde.ssopmat").exists():
        a_tilde = read_matrix(src / "a_tilde.ssopmat").reshape(
            man["n_omega"], basis.n_d, basis.n_d
        )
    rom = RomOperators(
        basis=basis,
        phi=phi,
        b_matrix=b,
        e_ops=unpack(e_tall),
        j_ops=j_ops,
        h_ops=unpack(h_tall),
        a_tilde=a_tilde,
        shift_alpha=man["shift_alpha"],
        h_mode=man["h_mode"],
        omit_h_sum_normalization=man["omit_h_sum_normalization"],
    )
    if (src / "shift_psi.ssopmat").exists():
        tall = read_matrix(src / "shift_psi.ssopmat")
        rom.shift_psi = [
            tall[bounds[k] : bounds[k + 1], : retained[k]] for k in range(len(retained))
        ]
        wide = read_matrix(src / "shift_phi.ssopmat")
        rom.shift_phi = [
            wide[:, bounds[k] : bounds[k + 1]] for k in range(len(retained))
        ]
    if man["closure"] == "deim":
        dm = man["deim"]
        art = DeimArtifacts(
            u_n=read_matrix(src / "deim_u.ssopmat"),
            sample_indices=np.asarray(dm["sample_indices"], dtype=int),
            interp_condition=dm["interp_condition"],
        )
        n_tall = read_matrix(src / "deim_n.ssopmat")
        m_ops = read_matrix(src / "deim_m.ssopmat").reshape(man["n_omega"], man["p1"], dm["p2"])
        s_ops = []
        for i in range(dm["n_local_ops"]):
            s_tall = read_matrix(src / f"deim_s{i}.ssopmat")
            s_ops.append([s_tall[bounds[k] : bounds[k + 1]].T for k in range(len(retained))])
        rom.closure = DeimOperators(n_ops=unpack(n_tall), m_ops=m_ops, s_ops=s_ops, artifacts=art)
    elif man["closure"] == "triadic":
        tm = man["triadic"]
        counts = tm["counts"]
        starts = np.concatenate([[0], np.cumsum(counts)])
        n_all = read_matrix(src / "triadic_n.ssopmat").T
        m_all = read_matrix(src / "triadic_m.ssopmat").T
        table = TriadicTable(
            epsilon=tm["epsilon"],
            candidate_count=tm["candidate_count"],
            offsets=bounds,
            retained_fraction=tm["retained_fraction"],
        )
        for k in range(len(retained)):
            sl = slice(starts[k], starts[k + 1])
            table.append_frequency(
                k,
                np.asarray(tm["l_idx"][sl], dtype=int),
                np.asarray(tm["i_idx"][sl], dtype=int),
                np.asarray(tm["m_idx"][sl], dtype=int),
                np.asarray(tm["n_idx"][sl], dtype=int),
                n_all[: retained[k], sl],
                m_all[:, sl],
            )
        table.finalize()
        rom.closure = table
    return rom
