"""Synthetic CSV fixtures matching the documented benchmark output formats
(no dependency on the producing package)."""

import csv

import numpy as np
import pytest


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture()
def csv_dir(tmp_path):
    rng = np.random.default_rng(0)
    methods = ["ssop", "podg", "spod_proj", "pod_proj"]

    rows = []
    for method in methods:
        base = {"ssop": 1e-4, "podg": 1e-2, "spod_proj": 8e-5, "pod_proj": 3e-3}[method]
        for traj in range(3):
            for j in range(32):
                rows.append(["e", method, 0.229, 5, traj, j,
                             f"{base * (1 + 0.3 * rng.random()):.6e}"])
    write_rows(tmp_path / "error_vs_time.csv",
               ["experiment_id", "method", "mu0", "r", "trajectory_index",
                "time_index", "e_j"], rows)

    rows = []
    for r in (3, 4, 5, 6):
        for method in methods:
            base = {"ssop": 1e-3, "podg": 1e-1, "spod_proj": 8e-4, "pod_proj": 2e-2}[method]
            rows.append([r, method, f"{base * 2.0 ** (5 - r):.6e}"])
    write_rows(tmp_path / "error_vs_r.csv", ["r", "method", "e_timeavg"], rows)

    rows = [[r, 0.01 * r, 0.002, 8, 0.02 * r] for r in (3, 4, 5, 6)]
    write_rows(tmp_path / "timing_vs_r.csv",
               ["r", "ssop_seconds", "ssop_constant_term_seconds",
                "ssop_iterations", "podg_seconds"], rows)

    rows = [[r, f"{10.0 ** (-r):.4e}"] for r in range(1, 9)]
    write_rows(tmp_path / "excluded_energy.csv", ["r", "excluded_fraction"], rows)

    rows = []
    for k in range(-8, 8):
        for m in range(4):
            energy = np.exp(-abs(k) / 3) * 10.0 ** (-m)
            rows.append([f"{0.4 * k:.4e}", m, f"{energy:.6e}", int(m < 2), "1e-3"])
    write_rows(tmp_path / "energy_spectrum.csv",
               ["omega", "mode_index", "energy", "retained", "threshold"], rows)

    for kind in ("periodic", "pulse", "quasiperiodic", "series"):
        rows = []
        for method in methods:
            base = {"ssop": 1e-4, "podg": 1e-2, "spod_proj": 8e-5, "pod_proj": 3e-3}[method]
            for j in range(32):
                rows.append([f"e:{kind}", method, 0.229, 5, 0, j,
                             f"{base * (1 + j / 32):.6e}"])
        write_rows(tmp_path / f"forcing_{kind}_error_vs_time.csv",
                   ["experiment_id", "method", "mu0", "r", "trajectory_index",
                    "time_index", "e_j"], rows)

    rows = []
    for mu in np.linspace(0.079, 0.499, 5):
        for method in methods:
            base = {"ssop": 1e-4, "podg": 1e-2, "spod_proj": 8e-5, "pod_proj": 3e-3}[method]
            for traj in range(2):
                rows.append(["e", method, f"{mu:.3f}", 5, traj,
                             f"{base * (1 + mu):.6e}", "", ""])
    write_rows(tmp_path / "mu_sweep_per_mu.csv",
               ["experiment_id", "method", "mu0", "r", "trajectory_index",
                "e_timeavg", "iterations", "online_seconds"], rows)
    rows = [["e:transfer", "ssop_transfer", f"{mu:.3f}", 5, 0, f"{2e-4 * (1 + mu):.6e}",
             9, 0.01] for mu in np.linspace(0.079, 0.499, 5)]
    write_rows(tmp_path / "mu_sweep_transfer.csv",
               ["experiment_id", "method", "mu0", "r", "trajectory_index",
                "e_timeavg", "iterations", "online_seconds"], rows)

    rows = []
    for k in range(16):
        for l in range(16):
            rows.append([k, l, f"{np.exp(-abs(k - l)):.4e}", 16, int(abs(k - l) < 3)])
    write_rows(tmp_path / "interaction_map.csv",
               ["k", "l", "impact", "candidates", "retained"], rows)

    rows = [[f"{10.0 ** (-e):.3e}", int(100 * e), f"{0.001 * e:.4f}",
             f"{1e-3 / e:.4e}", f"{0.002 * e:.4f}", 12] for e in (1, 2, 3, 4)]
    write_rows(tmp_path / "epsilon_sweep.csv",
               ["epsilon", "retained", "retained_fraction", "e_timeavg",
                "online_seconds", "iterations"], rows)
    return tmp_path
