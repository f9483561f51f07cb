"""Ginzburg-Landau full-order models with cubic or quadratic nonlinearity.

The linear operator is A(mu0) = -nu d1 + gamma d2 + diag(mu0 - c_mu^2 +
(mu2/2) x^2), affine in mu0. The cubic model carries -alpha q|q|^2, the
quadratic (Burgers-type) model kappa q (d1 q). An optional stabilizing
transformation A -> A - shift I, n -> n + shift q keeps the solution-operator
exponentials bounded when A is unstable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ssop.hermite import SpaceGrid, build_hermite_grid
from ssop.util import InvalidArgumentError

CUBIC = "cubic"
QUADRATIC = "quadratic"


@dataclass
class GlParams:
    nu: complex = 2.0 + 0.4j
    gamma: complex = 1.0 - 1.0j
    c_mu: float = 0.2
    mu2: float = -0.01
    mu0: float = 0.229
    alpha: float = 1.0
    kappa: float = 5.0
    nonlinearity_kind: str = CUBIC
    stability_shift: float = 0.0

    def __post_init__(self):
        if self.nonlinearity_kind not in (CUBIC, QUADRATIC):
            raise InvalidArgumentError(
                f"nonlinearity_kind must be '{CUBIC}' or '{QUADRATIC}'"
            )


@dataclass
class AffineOperator:
    """A(mu) = sum_j zeta_j(mu) A_j with scalar coefficient functions."""

    terms: list  # list of (zeta callable mu -> scalar, matrix)
    identity_term: int | None = None  # index of an identity A_j, if any

    @property
    def m_mu(self):
        return len(self.terms)

    @property
    def n_x(self):
        return self.terms[0][1].shape[0]

    def zetas(self, mu):
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        return np.array([zeta(mu) for zeta, _ in self.terms])

    def assemble(self, mu):
        zs = self.zetas(mu)
        out = np.zeros_like(self.terms[0][1])
        for z, (_, a_j) in zip(zs, self.terms):
            out = out + z * a_j
        return out

    def matrices(self):
        return [a_j for _, a_j in self.terms]


def build_gl_operator(grid: SpaceGrid, params: GlParams) -> AffineOperator:
    """Affine GL operator with terms (A_1, 1) and (I, mu0 - stability_shift).

    A_1 collects every mu0-independent piece. The stability shift, when
    nonzero, is folded into the identity coefficient and must be compensated
    by adding shift*q to the nonlinearity (see :func:`evaluate_nonlinearity`).
    """
    x = grid.points
    a1 = (
        -params.nu * grid.d1
        + params.gamma * grid.d2
        + np.diag((-params.c_mu**2 + 0.5 * params.mu2 * x**2).astype(complex))
    )
    eye = np.eye(grid.n_x, dtype=complex)
    shift = params.stability_shift

    return AffineOperator(
        terms=[
            (lambda mu: 1.0, a1),
            (lambda mu: float(mu[0]) - shift, eye),
        ],
        identity_term=1,
    )


def default_stability_shift(op: AffineOperator, mu0: float, margin: float = 0.1) -> float:
    """shift = max(0, max Re lambda(A)) + margin when A(mu0) is unstable, else 0."""
    spectral_abscissa = np.linalg.eigvals(op.assemble([mu0])).real.max()
    if spectral_abscissa <= 0.0:
        return 0.0
    return float(spectral_abscissa + margin)


def numerical_abscissa_shift(op: AffineOperator, mu0, weights, margin: float = 0.1) -> float:
    """Shift clearing the weighted numerical abscissa of A(mu0).

    Galerkin compressions onto any W-orthonormal basis have spectra inside
    the W-field of values, so shifting past its rightmost point guarantees
    decaying compressed exponentials regardless of the basis. Needed when
    operators are assembled against a basis educed from a different
    parameter (transfer), where the spectral-abscissa rule can leave the
    compressed operator exponentially growing over the window.
    """
    a = op.assemble([mu0])
    sq = np.sqrt(weights)
    b = (sq[:, None] * a) / sq[None, :]
    omega_w = np.linalg.eigvalsh(0.5 * (b + b.conj().T)).max()
    if omega_w <= 0.0:
        return 0.0
    return float(omega_w + margin)


class CubicNonlinearity:
    """n(q) = -alpha q |q|^2, a pointwise-local function of the state."""

    is_quadratic_form = False

    def __init__(self, alpha):
        self.alpha = alpha

    def __call__(self, q):
        return -self.alpha * q * np.abs(q) ** 2

    def local_operators(self, grid):
        """Linear maps whose sampled values the pointwise rule consumes."""
        return [None]  # identity only

    def pointwise(self, q):
        return -self.alpha * q * np.abs(q) ** 2


class QuadraticNonlinearity:
    """n(q) = kappa q (d1 q), local in q and one differentiated copy of q."""

    is_quadratic_form = True

    def __init__(self, kappa, d1):
        self.kappa = kappa
        self.d1 = d1

    def __call__(self, q):
        return self.kappa * q * (self.d1 @ q)

    def local_operators(self, grid):
        return [None, self.d1]

    def pointwise(self, q, dq):
        return self.kappa * q * dq


def make_nonlinearity(params: GlParams, grid: SpaceGrid):
    """The pure nonlinearity of the model (stability shift not included)."""
    if params.nonlinearity_kind == CUBIC:
        return CubicNonlinearity(params.alpha)
    return QuadraticNonlinearity(params.kappa, grid.d1)


def evaluate_nonlinearity(params: GlParams, grid: SpaceGrid, q):
    """Effective nonlinear term, including the stabilizing shift*q if active."""
    q = np.asarray(q, dtype=complex)
    if q.shape[0] != grid.n_x:
        raise InvalidArgumentError(
            f"state has {q.shape[0]} entries, grid has {grid.n_x} points"
        )
    n = make_nonlinearity(params, grid)(q)
    if params.stability_shift != 0.0:
        n = n + params.stability_shift * q
    return n


@dataclass
class GlSystem:
    """Grid, parameters, assembled operator, and nonlinearity in one place."""

    grid: SpaceGrid
    params: GlParams
    operator: AffineOperator = field(init=False)
    a_matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        self.operator = build_gl_operator(self.grid, self.params)
        self.a_matrix = self.operator.assemble([self.params.mu0])

    @property
    def nonlinearity(self):
        return make_nonlinearity(self.params, self.grid)

    @property
    def shift(self):
        return self.params.stability_shift

    def rhs_nonlinear(self, q):
        """n(q) + shift*q, the forcing-side term paired with the shifted A."""
        n = self.nonlinearity(np.asarray(q, dtype=complex))
        if self.shift != 0.0:
            n = n + self.shift * np.asarray(q, dtype=complex)
        return n

    def integrate(self, forcing, q0, grid, rel_tol=1e-8, abs_tol=1e-10):
        from ssop.integrate import integrate

        return integrate(
            self.a_matrix, forcing, q0, grid, rel_tol, abs_tol,
            nonlinearity=self.rhs_nonlinear,
        )

    def integrate_ensemble(self, forcings, q0s, grid, rel_tol=1e-8, abs_tol=1e-10):
        from ssop.integrate import integrate_ensemble

        return integrate_ensemble(
            self.a_matrix, self.rhs_nonlinear, forcings, q0s, grid, rel_tol, abs_tol
        )


def make_gl_system(
    n_x=220,
    half_width=40.0,
    params: GlParams | None = None,
    auto_shift=True,
    **param_overrides,
) -> GlSystem:
    if params is None:
        params = GlParams(**param_overrides)
    grid = build_hermite_grid(n_x, half_width)
    if auto_shift and params.stability_shift == 0.0:
        unshifted = build_gl_operator(grid, params)
        shift = default_stability_shift(unshifted, params.mu0)
        if shift != 0.0:
            params = GlParams(**{**params.__dict__, "stability_shift": shift})
    return GlSystem(grid=grid, params=params)
