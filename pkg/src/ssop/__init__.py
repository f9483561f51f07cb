"""Space-time reduced-order modeling with per-frequency spectral bases.

The package educes a per-frequency orthonormal basis from trajectory data,
precomputes frequency-domain operators that map an initial condition and a
forcing to the basis coefficients of the solution, and solves the resulting
nonlinear algebraic system by fixed-point iteration or pseudo-time stepping.
A POD-Galerkin baseline and a benchmark CLI for Ginzburg-Landau systems are
included.

Module map
----------
fom            : hermite, gl, forcing, integrate
spectra        : frequency, welch, spod, pod
offline        : resolvent, romops, deim, triadic, affine
online         : online
baselines      : podg
bench-cli      : config, bench, metrics, cli
shared         : containers, util
"""

from ssop.frequency import FrequencyGrid, Trajectory
from ssop.hermite import SpaceGrid, build_hermite_grid
from ssop.gl import GlParams, AffineOperator, build_gl_operator, evaluate_nonlinearity
from ssop.forcing import ForcingSpec, sample_stochastic_forcing
from ssop.integrate import integrate, integrate_ensemble
from ssop.welch import welch_blocks, SpectralStack
from ssop.spod import (
    SpodBasis,
    CoefficientSet,
    compute_spod,
    allocate_modes,
    encode,
    decode,
    projection_error,
)
from ssop.pod import pod_modes
from ssop.resolvent import ResolventSurrogate, build_resolvent_surrogate
from ssop.romops import RomOperators, build_linear_operators, build_h_via_linear_runs
from ssop.deim import DeimArtifacts, deim, build_deim_operators
from ssop.triadic import (
    TriadicTable,
    symmetric_bilinear,
    build_triadic_catalog,
    build_triadic_table,
)
from ssop.affine import AffineBundle, build_affine_bundle, assemble_at_mu
from ssop.online import (
    OnlineProblem,
    SolveReport,
    constant_term,
    nonlinear_term_deim,
    nonlinear_term_triadic,
    fixed_point_solve,
    pseudo_time_solve,
    solve,
)
from ssop.podg import PodGalerkinRom, build_pod_galerkin, integrate_rom

__version__ = "0.1.0"
