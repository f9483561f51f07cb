import numpy as np
import pytest

from ssop.forcing import ForcingSpec, realize_forcing
from ssop.frequency import FrequencyGrid
from ssop.gl import (
    GlParams,
    build_gl_operator,
    default_stability_shift,
    evaluate_nonlinearity,
    make_gl_system,
)
from ssop.hermite import build_hermite_grid
from ssop.util import InvalidArgumentError


@pytest.fixture(scope="module")
def grid220():
    return build_hermite_grid(220, 40.0)


def test_stable_at_reference_mu(grid220):
    op = build_gl_operator(grid220, GlParams(mu0=0.229))
    eigs = np.linalg.eigvals(op.assemble([0.229]))
    assert eigs.real.max() < 0


def test_unstable_past_bifurcation(grid220):
    op = build_gl_operator(grid220, GlParams(mu0=0.499))
    eigs = np.linalg.eigvals(op.assemble([0.499]))
    assert eigs.real.max() > 0


def test_bifurcation_location(grid220):
    # closed form puts the leading eigenvalue crossing at mu0 ~ 0.3977
    params = GlParams()
    h = np.sqrt(-2 * params.mu2 * params.gamma)
    base = -params.c_mu**2 - params.nu**2 / (4 * params.gamma) - 0.5 * h
    mu_crit = -base.real
    assert np.isclose(mu_crit, 0.397, atol=2.5e-3)
    op = build_gl_operator(grid220, params)
    for mu, sign in ((mu_crit - 0.01, -1), (mu_crit + 0.01, +1)):
        assert np.sign(np.linalg.eigvals(op.assemble([mu])).real.max()) == sign


def test_discrete_spectrum_matches_closed_form(grid220):
    params = GlParams(mu0=0.229)
    op = build_gl_operator(grid220, params)
    eigs = np.linalg.eigvals(op.assemble([0.229]))
    h = np.sqrt(-2 * params.mu2 * params.gamma)
    for n in range(6):
        lam = params.mu0 - params.c_mu**2 - params.nu**2 / (4 * params.gamma) - (n + 0.5) * h
        assert np.abs(eigs - lam).min() <= 1e-9


def test_affine_identity(grid220):
    op = build_gl_operator(grid220, GlParams())
    a1 = op.terms[0][1]
    direct = op.assemble([0.31])
    np.testing.assert_allclose(direct, a1 + 0.31 * np.eye(220), atol=0)


def test_affine_reassembly_random_mus(grid220):
    params = GlParams()
    op = build_gl_operator(grid220, params)
    x = grid220.points
    rng = np.random.default_rng(3)
    for mu in rng.uniform(0.079, 0.499, 10):
        direct = (
            -params.nu * grid220.d1
            + params.gamma * grid220.d2
            + np.diag((mu - params.c_mu**2 + 0.5 * params.mu2 * x**2).astype(complex))
        )
        err = np.abs(op.assemble([mu]) - direct).max()
        assert err <= 1e-13 * np.abs(direct).max()


def test_stability_shift_recorded(grid220):
    op = build_gl_operator(grid220, GlParams(mu0=0.499))
    shift = default_stability_shift(op, 0.499)
    abscissa = np.linalg.eigvals(op.assemble([0.499])).real.max()
    assert np.isclose(shift, abscissa + 0.1)
    shifted = build_gl_operator(grid220, GlParams(mu0=0.499, stability_shift=shift))
    assert np.linalg.eigvals(shifted.assemble([0.499])).real.max() < 0
    assert default_stability_shift(op, 0.229) == 0.0


def test_nonlinearity_vanishes_at_origin(grid220):
    q = np.zeros(220, dtype=complex)
    for kind in ("cubic", "quadratic"):
        out = evaluate_nonlinearity(GlParams(nonlinearity_kind=kind), grid220, q)
        assert np.all(out == 0)


def test_cubic_pointwise_formula(grid220):
    q = np.zeros(220, dtype=complex)
    v = 0.7 - 0.4j
    q[37] = v
    out = evaluate_nonlinearity(GlParams(alpha=1.0), grid220, q)
    assert np.isclose(out[37], -v * abs(v) ** 2)
    mask = np.ones(220, dtype=bool)
    mask[37] = False
    assert np.all(out[mask] == 0)


def test_quadratic_matches_analytic_product(grid220):
    # kappa f f' for f = exp(-x^2/2)
    x = grid220.points
    f = np.exp(-(x**2) / 2).astype(complex)
    out = evaluate_nonlinearity(
        GlParams(nonlinearity_kind="quadratic", kappa=5.0), grid220, f
    )
    exact = 5.0 * f * (-x * f)
    interior = np.abs(x) <= 5.0
    assert np.abs(out - exact)[interior].max() / np.abs(exact).max() <= 1e-6


def test_dimension_mismatch_rejected(grid220):
    with pytest.raises(InvalidArgumentError):
        evaluate_nonlinearity(GlParams(), grid220, np.zeros(10))


def test_shift_folded_into_identity_coefficient(grid220):
    plain = build_gl_operator(grid220, GlParams(mu0=0.3))
    shifted = build_gl_operator(grid220, GlParams(mu0=0.3, stability_shift=0.25))
    np.testing.assert_allclose(
        shifted.assemble([0.3]), plain.assemble([0.3]) - 0.25 * np.eye(220), atol=1e-14
    )


def test_stabilizing_transformation_invariance():
    """Integrating (A - aI, n + a q) equals integrating (A, n)."""
    system_plain = make_gl_system(n_x=48, half_width=25.0, mu0=0.229, auto_shift=False)
    params_shifted = GlParams(mu0=0.229, stability_shift=0.4)
    from ssop.gl import GlSystem

    system_shifted = GlSystem(grid=system_plain.grid, params=params_shifted)
    grid = FrequencyGrid(48, 0.8)
    spec = ForcingSpec(kind="stochastic", amplitude=0.05, seed=11)
    forcing = realize_forcing(spec, system_plain.grid, grid, 48)
    q0 = np.zeros(48, dtype=complex)
    t1 = system_plain.integrate(forcing, q0, grid, 1e-10, 1e-12)
    t2 = system_shifted.integrate(forcing, q0, grid, 1e-10, 1e-12)
    scale = np.abs(t1.states).max()
    assert np.abs(t1.states - t2.states).max() <= 1e-7 * scale


def test_numerical_abscissa_shift_clears_compressions(grid220):
    from ssop.gl import numerical_abscissa_shift
    from ssop.util import left_wmult, rng_for

    op = build_gl_operator(grid220, GlParams(mu0=0.379))
    w = grid220.weights
    shift = numerical_abscissa_shift(op, 0.379, w)
    assert shift > 0
    a_shifted = op.assemble([0.379]) - shift * np.eye(220)
    rng = rng_for(0, 0)
    raw = rng.standard_normal((220, 12)) + 1j * rng.standard_normal((220, 12))
    q, _ = np.linalg.qr(np.sqrt(w)[:, None] * raw)
    psi = q / np.sqrt(w)[:, None]
    compressed = left_wmult(psi, w) @ (a_shifted @ psi)
    assert np.linalg.eigvals(compressed).real.max() < 0
