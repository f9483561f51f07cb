"""Command-line interface.

Subcommands mirror the pipeline stages: ``fom-run`` generates trajectory
data, ``spod`` educes the per-frequency basis, ``offline`` precomputes ROM
operators, ``solve`` runs the online phase, ``baseline`` builds the
POD-Galerkin reference, and ``bench``/``sweep``/``timing`` drive the
configuration-based experiment suites. Exit code 0 means every stage
succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ssop.util import SsopError, parse_extended_float


def _add_common(parser):
    parser.add_argument("--config", help="JSON experiment config file")
    parser.add_argument("--seed", type=int, help="override the root seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="BLAS thread cap (needs threadpoolctl; 1 keeps runs deterministic)")
    parser.add_argument("--out", help="output directory")


def _apply_threads(n):
    if n is None:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=int(n))
    except ImportError:
        if n != 1:
            print("note: threadpoolctl not installed; set OMP_NUM_THREADS instead",
                  file=sys.stderr)


def _load_config(args):
    from ssop.config import ExperimentConfig

    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    return cfg.validate()


def _load_system(path):
    from ssop.config import SystemConfig
    from ssop.bench import _system_at
    from ssop.config import ExperimentConfig

    cfg = ExperimentConfig()
    cfg.system = SystemConfig.from_dict(json.loads(Path(path).read_text()))
    return cfg, _system_at(cfg, cfg.system.mu0)


def cmd_fom_run(args):
    from ssop.containers import write_matrix
    from ssop.forcing import ForcingSpec, realize_forcing
    from ssop.frequency import FrequencyGrid

    cfg, system = _load_system(args.system)
    grid = FrequencyGrid(args.steps, args.dt)
    spec_dict = json.loads(Path(args.forcing).read_text()) if args.forcing else {}
    spec = ForcingSpec(**spec_dict)
    if args.seed is not None:
        spec.seed = args.seed
    forcing = realize_forcing(spec, system.grid, grid, args.steps)
    if args.ic:
        from ssop.containers import read_matrix

        q0 = read_matrix(args.ic).ravel()
    else:
        q0 = np.zeros(system.grid.n_x, dtype=complex)
    traj = system.integrate(forcing, q0, grid)
    out = Path(args.out or "trajectory.ssopmat")
    write_matrix(out, traj.states, meta={
        "dt": grid.dt,
        "n_omega": grid.n_omega,
        "n_x": system.grid.n_x,
        "half_width": system.grid.half_width,
        "forcing_kind": spec.kind,
        "forcing_seed": spec.seed,
        "mu0": system.params.mu0,
        "stability_shift": system.shift,
    })
    write_matrix(out.with_name(out.stem + "_forcing" + out.suffix), forcing.values,
                 meta={"dt": grid.dt, "kind": spec.kind, "seed": spec.seed})
    print(f"wrote {out}")
    return 0


def cmd_spod(args):
    from ssop.containers import read_matrix
    from ssop.frequency import FrequencyGrid
    from ssop.hermite import build_hermite_grid
    from ssop.spod import compute_spod
    from ssop.welch import welch_blocks

    states, meta = read_matrix(args.input, with_meta=True)
    dt = args.dt or (meta or {}).get("dt")
    if dt is None:
        raise SsopError("pass --dt or provide a trajectory sidecar with dt")
    grid = FrequencyGrid(args.nomega, float(dt))
    sgrid = build_hermite_grid(states.shape[0], (meta or {}).get("half_width", 40.0))
    stack = welch_blocks(states, grid, args.overlap)
    basis = compute_spod(stack, sgrid.weights, args.r)
    out = Path(args.out or "basis")
    basis.save(out)
    print(f"wrote basis with {basis.coeff_size} coefficients ({stack.n_d} blocks) to {out}")
    return 0


def cmd_offline(args):
    from ssop.bench import _system_at
    from ssop.containers import read_matrix
    from ssop.deim import build_deim_operators, deim
    from ssop.forcing import ForcingSpec, sample_stochastic_forcing
    from ssop.romops import attach_closure, build_linear_operators, save_rom, with_h_from_runs
    from ssop.resolvent import build_resolvent_surrogate
    from ssop.spod import SpodBasis
    from ssop.triadic import build_triadic_catalog, symmetric_bilinear
    from ssop.welch import welch_blocks

    cfg, system = _load_system(args.system)
    basis = SpodBasis.load(args.basis)
    states, _ = read_matrix(args.input, with_meta=True)
    stack = welch_blocks(states, basis.grid, args.overlap)
    surrogate = build_resolvent_surrogate(stack, system.a_matrix, system.grid.weights)
    from ssop.pod import pod_modes

    phi, _ = pod_modes(states, system.grid.weights, args.p1)
    spec = ForcingSpec(seed=0)
    b_matrix = sample_stochastic_forcing(spec, system.grid, basis.grid, 2).b_matrix
    rom = build_linear_operators(surrogate, basis, phi, b_matrix, system.a_matrix,
                                 shift_alpha=system.shift)
    if args.h_mode == "runs":
        with_h_from_runs(rom, system.a_matrix)
    nonlin = system.nonlinearity
    if args.closure == "deim":
        artifacts = deim(nonlin(states), args.p2, system.grid.weights)
        attach_closure(rom, build_deim_operators(surrogate, basis, phi, artifacts,
                                                 nonlin.local_operators(system.grid)))
    elif args.closure == "triadic":
        bilinear = symmetric_bilinear(nonlin, n_x=system.grid.n_x)
        catalog = build_triadic_catalog(surrogate, basis, bilinear)
        attach_closure(rom, catalog.table_at(parse_extended_float(args.epsilon), phi))
    out = Path(args.out or "operators")
    save_rom(rom, out, basis_dir=args.basis)
    print(f"wrote operator store to {out}")
    return 0


def cmd_solve(args):
    from ssop.bench import _system_at
    from ssop.containers import read_matrix, write_json, write_matrix
    from ssop.online import OnlineProblem, solve
    from ssop.romops import load_rom

    rom = load_rom(args.operators)
    q0 = read_matrix(args.ic).ravel() if args.ic else np.zeros(rom.basis.n_x, dtype=complex)
    forcing_values = read_matrix(args.forcing)
    pointwise = None
    if rom.closure_kind == "deim":
        if not args.system:
            raise SsopError("the sampled closure needs --system to evaluate the nonlinearity")
        _, system = _load_system(args.system)
        pointwise = system.nonlinearity.pointwise
    problem = OnlineProblem(operators=rom, q0=q0, forcing_values=forcing_values)
    traj, coeffs, report = solve(problem, pointwise=pointwise, method=args.method,
                                 tol=args.tol)
    out = Path(args.out or "solution")
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "trajectory.ssopmat", traj.states,
                 meta={"dt": rom.grid.dt, "n_omega": rom.grid.n_omega})
    write_matrix(out / "coefficients.ssopmat", coeffs.data[None, :])
    write_json(out / "solve_report.json", report.as_dict())
    print(f"{report.method}: converged={report.converged} iterations={report.iterations}")
    return 0 if report.converged else 1


def cmd_baseline(args):
    from ssop.bench import _system_at
    from ssop.containers import read_matrix, write_json, write_matrix
    from ssop.forcing import ForcingSpec, sample_stochastic_forcing
    from ssop.frequency import FrequencyGrid
    from ssop.podg import build_pod_galerkin

    cfg, system = _load_system(args.system)
    states, meta = read_matrix(args.snapshots, with_meta=True)
    grid = FrequencyGrid(meta["n_omega"] if meta else states.shape[1],
                         meta["dt"] if meta else 1.0)
    b_matrix = sample_stochastic_forcing(ForcingSpec(seed=0), system.grid, grid, 2).b_matrix
    a_original = system.a_matrix + system.shift * np.eye(system.grid.n_x)
    rom = build_pod_galerkin(states, system.grid.weights, args.r, a_original, b_matrix,
                             nonlinearity=system.nonlinearity)
    out = Path(args.out or "baseline")
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "phi.ssopmat", rom.phi_r)
    write_matrix(out / "a_tilde.ssopmat", rom.a_tilde)
    write_matrix(out / "b_tilde.ssopmat", rom.b_tilde)
    write_json(out / "manifest.json", {"kind": "pod-galerkin", "r": rom.r})
    print(f"wrote baseline (r={rom.r}) to {out}")
    return 0


def cmd_bench(args):
    from ssop.bench import run_experiment

    cfg = _load_config(args)
    metrics, artifacts = run_experiment(cfg, out_dir=args.out, workers=args.workers)
    for method, stats in metrics.summary_dict().items():
        print(f"{method}: mean e = {stats['e_timeavg_mean']:.3e} "
              f"({stats['n_trajectories']} trajectories)")
    print(f"outputs in {artifacts['out_dir']}")
    return 0


def cmd_sweep(args):
    from ssop.bench import run_mu_sweep

    cfg = _load_config(args)
    metrics = run_mu_sweep(cfg, train_mode=args.mode, out_dir=args.out, n_test=args.n_test)
    for method in metrics.methods():
        print(f"{method}: mean e = {metrics.aggregate(method=method):.3e}")
    return 0


def cmd_timing(args):
    from ssop.bench import run_timing_study

    cfg = _load_config(args)
    r_list = [int(v) for v in args.r_list.split(",")]
    rows = run_timing_study(cfg, r_list, out_dir=args.out, repeats=args.repeats)
    for row in rows:
        print(f"r={row['r']}: ssop {row['ssop_seconds']*1e3:.2f} ms, "
              f"podg {row['podg_seconds']*1e3:.2f} ms")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ssop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fom-run", help="integrate the full-order model")
    p.add_argument("--system", required=True, help="system JSON")
    p.add_argument("--forcing", help="forcing spec JSON (default: stochastic seed 0)")
    p.add_argument("--ic", help="initial-condition container (default: zero)")
    p.add_argument("--steps", type=int, default=256)
    p.add_argument("--dt", type=float, default=0.8)
    _add_common(p)
    p.set_defaults(func=cmd_fom_run)

    p = sub.add_parser("spod", help="educe the per-frequency basis from a long run")
    p.add_argument("--input", required=True, help="trajectory container")
    p.add_argument("--nomega", type=int, default=256)
    p.add_argument("--overlap", type=float, default=0.75)
    p.add_argument("--r", type=float, default=5)
    p.add_argument("--dt", type=float, help="time step if no sidecar")
    _add_common(p)
    p.set_defaults(func=cmd_spod)

    p = sub.add_parser("offline", help="precompute ROM operators")
    p.add_argument("--basis", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--input", required=True, help="training trajectory container")
    p.add_argument("--closure", choices=["deim", "triadic", "none"], default="deim")
    p.add_argument("--p1", type=int, default=30)
    p.add_argument("--p2", type=int, default=30)
    p.add_argument("--epsilon", default="1e-1.8",
                   help="triadic threshold; fractional exponents accepted")
    p.add_argument("--overlap", type=float, default=0.75)
    p.add_argument("--h-mode", choices=["galerkin", "runs"], default="galerkin")
    _add_common(p)
    p.set_defaults(func=cmd_offline)

    p = sub.add_parser("solve", help="online phase from stored operators")
    p.add_argument("--operators", required=True)
    p.add_argument("--ic", help="initial-condition container")
    p.add_argument("--forcing", required=True, help="forcing samples container")
    p.add_argument("--system", help="system JSON (needed for the sampled closure)")
    p.add_argument("--method", choices=["auto", "fixed", "pseudo"], default="auto")
    p.add_argument("--tol", type=float, default=1e-10)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("baseline", help="build the POD-Galerkin reference")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--r", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("bench", help="run a configured experiment")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="parameter sweep (per-mu and/or transfer)")
    p.add_argument("--mode", choices=["per-mu", "transfer", "both"], default="both")
    p.add_argument("--n-test", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timing", help="online CPU versus mode budget")
    p.add_argument("--r-list", default="3,4,5,6,7,8,9,10")
    p.add_argument("--repeats", type=int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_timing)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _apply_threads(getattr(args, "threads", 1))
    try:
        return args.func(args)
    except SsopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
