"""Forcing generators: the stochastic training forcing and deterministic
test signals (periodic, pulse, quasiperiodic, series).

The stochastic forcing is a zero-mean complex Gaussian process with the
separable space-time covariance

    E[f(x1,t1) f*(x2,t2)] = amp^2 exp[-(x1-xb)^2 - (x2-xb)^2 - (x1-x2)^2
                                      - (0.3 (t2-t1))^2],

supported on x in [-12, -8] and peaked at xb = -10. Realizations are drawn
through eigenfactorizations of the two kernel factors; equal seeds give
bit-identical draws.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ssop.frequency import FrequencyGrid
from ssop.hermite import SpaceGrid
from ssop.util import InvalidArgumentError, rng_for

STOCHASTIC = "stochastic"
PERIODIC = "periodic"
PULSE = "pulse"
QUASIPERIODIC = "quasiperiodic"
SERIES = "series"
CUSTOM = "custom"

KINDS = (STOCHASTIC, PERIODIC, PULSE, QUASIPERIODIC, SERIES, CUSTOM)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass
class ForcingSpec:
    kind: str = STOCHASTIC
    amplitude: float = 1.0
    seed: int = 0
    support: tuple = (-12.0, -8.0)
    x_bar: float = -10.0
    time_corr: float = 0.3  # rate in exp[-(rate*dt)^2]; corr length = 1/rate
    params: dict = field(default_factory=dict)
    custom_values: np.ndarray | None = None
    custom_b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown forcing kind {self.kind!r}")


@dataclass
class ForcingRealization:
    """Sampled forcing values (n_f x n_steps) and the input map B (n_x x n_f)."""

    values: np.ndarray
    b_matrix: np.ndarray
    dt: float

    @property
    def n_f(self):
        return self.b_matrix.shape[1]

    def interpolator(self, kind="cubic"):
        """Interpolant used by the time integrator.

        The ROM sees only the samples (through their DFT), so the integrator
        must agree with some smooth reading of the same samples. The default
        cubic interpolant avoids the slope kinks of a piecewise-linear one,
        whose broadband spectral content otherwise sets an artificial floor
        on the per-frequency representation error.
        """
        vals = self.values
        dt = self.dt
        n = vals.shape[1]
        if kind == "linear" or n < 4:
            def f_of_t(t):
                s = t / dt
                i = int(s)
                if i >= n - 1:
                    return vals[:, n - 1]
                if i < 0:
                    return vals[:, 0]
                frac = s - i
                return vals[:, i] * (1.0 - frac) + vals[:, i + 1] * frac

            return f_of_t
        if kind != "cubic":
            raise InvalidArgumentError(f"unknown interpolation kind {kind!r}")
        from scipy.interpolate import CubicSpline

        spline = CubicSpline(np.arange(n) * dt, vals, axis=1)
        coeffs = spline.c  # (4, n-1, n_f)

        def f_of_t(t):
            i = int(t / dt)
            if i < 0:
                i = 0
            elif i > n - 2:
                i = n - 2
            s = t - i * dt
            c = coeffs[:, i, :]
            return ((c[0] * s + c[1]) * s + c[2]) * s + c[3]

        return f_of_t


def support_indices(space_grid: SpaceGrid, support):
    lo, hi = support
    idx = np.where((space_grid.points >= lo) & (space_grid.points <= hi))[0]
    if idx.size == 0:
        raise InvalidArgumentError(f"no grid points inside support {support}")
    return idx


def spatial_profile(space_grid: SpaceGrid, spec: ForcingSpec):
    """exp(-(x - x_bar)^2 / 2) inside the support window, zero outside."""
    x = space_grid.points
    g = np.exp(-0.5 * (x - spec.x_bar) ** 2)
    lo, hi = spec.support
    g[(x < lo) | (x > hi)] = 0.0
    return g.astype(complex)


def _kernel_factor(kernel, what):
    """Symmetric PSD factor L with L L^T = kernel, by eigendecomposition."""
    vals, vecs = np.linalg.eigh(kernel)
    floor = -1e-10 * max(vals.max(), 1.0)
    if vals.min() < floor:
        warnings.warn(
            f"{what} covariance has negative eigenvalue {vals.min():.3e}; "
            "clipping to zero (jitter-level regularization)"
        )
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)[None, :]


def stochastic_covariances(space_grid: SpaceGrid, spec: ForcingSpec, dt, n_steps):
    """Spatial and temporal covariance factors of the Eq.-style kernel."""
    idx = support_indices(space_grid, spec.support)
    xs = space_grid.points[idx]
    dxb = xs - spec.x_bar
    kx = np.exp(-(dxb[:, None] ** 2) - (dxb[None, :] ** 2) - (xs[:, None] - xs[None, :]) ** 2)
    tt = np.arange(n_steps) * dt
    kt = np.exp(-((spec.time_corr * (tt[:, None] - tt[None, :])) ** 2))
    return idx, kx, kt


_FACTOR_CACHE: dict = {}


def _cached_factor(key, build):
    if key not in _FACTOR_CACHE:
        _FACTOR_CACHE[key] = build()
    return _FACTOR_CACHE[key]


def sample_stochastic_forcing(spec: ForcingSpec, space_grid: SpaceGrid, grid: FrequencyGrid, n_steps: int):
    """Draw one stochastic realization; (n_f x n_steps) values plus B."""
    if spec.kind != STOCHASTIC:
        raise InvalidArgumentError("sample_stochastic_forcing requires a stochastic spec")
    idx, kx, kt = stochastic_covariances(space_grid, spec, grid.dt, n_steps)
    lx = _cached_factor(
        ("kx", space_grid.n_x, space_grid.half_width, spec.support, spec.x_bar),
        lambda: _kernel_factor(kx, "spatial"),
    )
    lt = _cached_factor(
        ("kt", n_steps, grid.dt, spec.time_corr),
        lambda: _kernel_factor(kt, "temporal"),
    )
    rng = rng_for(spec.seed, 0)
    z = (rng.standard_normal((idx.size, n_steps)) + 1j * rng.standard_normal((idx.size, n_steps))) / np.sqrt(2.0)
    values = spec.amplitude * (lx @ z @ lt.T)
    b = np.zeros((space_grid.n_x, idx.size), dtype=complex)
    b[idx, np.arange(idx.size)] = 1.0
    return ForcingRealization(values=values, b_matrix=b, dt=grid.dt)


def _time_signal(spec: ForcingSpec, t):
    p = spec.params
    t_end = t[-1] + (t[1] - t[0] if len(t) > 1 else 0.0)
    if spec.kind == PERIODIC:
        return np.cos(p.get("omega", 0.4) * t)
    if spec.kind == PULSE:
        t0 = p.get("center", 0.25 * t_end)
        width = p.get("width", 8.0)
        return np.exp(-(((t - t0) / width) ** 2))
    if spec.kind == QUASIPERIODIC:
        w = p.get("omega", 0.35)
        return 0.5 * (np.cos(w * t) + np.cos(GOLDEN * w * t))
    if spec.kind == SERIES:
        w = p.get("omega", 0.35)
        pulse = np.exp(-(((t - 0.10 * t_end) / 5.0) ** 2))
        rise = 1.0 / (1.0 + np.exp(-(t - 0.35 * t_end) / 2.0))
        fall = 1.0 / (1.0 + np.exp(-(t - 0.55 * t_end) / 2.0))
        step = 0.8 * (rise - fall)
        envelope = np.exp(-(((t - 0.72 * t_end) / (0.08 * t_end)) ** 2))
        burst = envelope * 0.7 * (np.cos(w * t) + np.cos(GOLDEN * w * t))
        return pulse + step + burst
    raise InvalidArgumentError(f"{spec.kind!r} is not a deterministic signal kind")


def realize_forcing(spec: ForcingSpec, space_grid: SpaceGrid, grid: FrequencyGrid, n_steps: int):
    """Forcing samples on the ROM time grid for any spec kind.

    Every kind shares the same input map B (the support selection matrix),
    so ROM operators built once against B serve stochastic and deterministic
    test forcings alike; deterministic kinds place the Gaussian spatial
    profile on the support points.
    """
    if spec.kind == STOCHASTIC:
        return sample_stochastic_forcing(spec, space_grid, grid, n_steps)
    if spec.kind == CUSTOM:
        if spec.custom_values is None or spec.custom_b is None:
            raise InvalidArgumentError("custom forcing needs custom_values and custom_b")
        vals = np.asarray(spec.custom_values, dtype=complex)
        if vals.shape[1] != n_steps:
            raise InvalidArgumentError("custom forcing length mismatch")
        return ForcingRealization(vals, np.asarray(spec.custom_b, dtype=complex), grid.dt)
    t = np.arange(n_steps) * grid.dt
    sig = spec.amplitude * _time_signal(spec, t)
    idx = support_indices(space_grid, spec.support)
    profile = spatial_profile(space_grid, spec)[idx]
    b = np.zeros((space_grid.n_x, idx.size), dtype=complex)
    b[idx, np.arange(idx.size)] = 1.0
    return ForcingRealization(values=np.outer(profile, sig), b_matrix=b, dt=grid.dt)


def zero_forcing(space_grid: SpaceGrid, grid: FrequencyGrid, n_steps: int):
    b = np.zeros((space_grid.n_x, 1), dtype=complex)
    return ForcingRealization(np.zeros((1, n_steps), dtype=complex), b, grid.dt)
