import numpy as np
import pytest

from ssop.forcing import (
    ForcingSpec,
    realize_forcing,
    sample_stochastic_forcing,
    spatial_profile,
    stochastic_covariances,
    support_indices,
    zero_forcing,
)
from ssop.frequency import FrequencyGrid
from ssop.hermite import build_hermite_grid


@pytest.fixture(scope="module")
def sgrid():
    return build_hermite_grid(220, 40.0)


@pytest.fixture(scope="module")
def fgrid():
    return FrequencyGrid(64, 0.8)


def test_support_window(sgrid, fgrid):
    spec = ForcingSpec(kind="stochastic", seed=0)
    f = sample_stochastic_forcing(spec, sgrid, fgrid, 64)
    lifted = f.b_matrix @ f.values
    x = sgrid.points
    outside = (x < -12) | (x > -8)
    assert np.all(lifted[outside] == 0)
    assert np.abs(lifted[~outside]).max() > 0


def test_covariance_psd(sgrid, fgrid):
    spec = ForcingSpec(kind="stochastic", seed=0)
    _, kx, kt = stochastic_covariances(sgrid, spec, fgrid.dt, 64)
    np.testing.assert_allclose(kx, kx.T, atol=1e-15)
    np.testing.assert_allclose(kt, kt.T, atol=1e-15)
    assert np.linalg.eigvalsh(kx).min() >= -1e-10 * np.linalg.eigvalsh(kx).max()
    assert np.linalg.eigvalsh(kt).min() >= -1e-10 * np.linalg.eigvalsh(kt).max()
    # full space-time covariance is the kronecker product of PSD factors
    full = np.kron(kx[:3, :3], kt[:4, :4])
    assert np.linalg.eigvalsh(full).min() >= -1e-12


def test_zero_mean(sgrid, fgrid):
    draws = []
    for seed in range(500):
        spec = ForcingSpec(kind="stochastic", seed=seed)
        draws.append(sample_stochastic_forcing(spec, sgrid, fgrid, 8).values[:, 0])
    draws = np.array(draws)
    sigma = draws.std(axis=0)
    mean = np.abs(draws.mean(axis=0))
    assert np.all(mean <= 3 * sigma / np.sqrt(500))


def test_temporal_correlation_length(sgrid):
    """Empirical autocorrelation decays to 1/e near lag 3.33."""
    fgrid = FrequencyGrid(64, 0.8)
    n_lags = 10
    acc = np.zeros(n_lags)
    n_draws = 500
    for seed in range(n_draws):
        spec = ForcingSpec(kind="stochastic", seed=seed)
        vals = sample_stochastic_forcing(spec, sgrid, fgrid, 64).values
        for lag in range(n_lags):
            acc[lag] += np.real(
                np.vdot(vals[:, : 64 - lag], vals[:, lag:64])
            )
    rho = acc / acc[0]
    lags = np.arange(n_lags) * 0.8
    crossing = np.interp(-1 / np.e, -rho, lags)  # rho decreasing
    assert abs(crossing - 3.33) <= 0.2 * 3.33


def test_seed_reproducibility_and_decorrelation(sgrid, fgrid):
    spec = ForcingSpec(kind="stochastic", seed=1234)
    a = sample_stochastic_forcing(spec, sgrid, fgrid, 3000).values
    b = sample_stochastic_forcing(spec, sgrid, fgrid, 3000).values
    assert np.array_equal(a, b)
    c = sample_stochastic_forcing(
        ForcingSpec(kind="stochastic", seed=77), sgrid, fgrid, 3000
    ).values
    corr = np.abs(np.vdot(a, c)) / (np.linalg.norm(a) * np.linalg.norm(c))
    assert corr <= 0.1


def test_deterministic_kinds_share_input_map(sgrid, fgrid):
    stoch = realize_forcing(ForcingSpec(kind="stochastic", seed=0), sgrid, fgrid, 64)
    for kind in ("periodic", "pulse", "quasiperiodic", "series"):
        det = realize_forcing(ForcingSpec(kind=kind, amplitude=1.0), sgrid, fgrid, 64)
        np.testing.assert_array_equal(det.b_matrix, stoch.b_matrix)
        assert det.values.shape == stoch.values.shape


def test_profile_peak_location(sgrid):
    g = spatial_profile(sgrid, ForcingSpec(kind="pulse"))
    x = sgrid.points
    peak = x[np.argmax(np.abs(g))]
    assert abs(peak - (-10.0)) < 0.5
    assert np.all(g[(x < -12) | (x > -8)] == 0)


def test_pulse_decays_by_interval_end(sgrid):
    fgrid = FrequencyGrid(256, 0.8)
    f = realize_forcing(ForcingSpec(kind="pulse", amplitude=1.0), sgrid, fgrid, 256)
    sig = np.abs(f.values).max(axis=0)
    assert sig[-64:].max() <= 1e-8 * sig.max()


def test_zero_forcing_shape(sgrid, fgrid):
    f = zero_forcing(sgrid, fgrid, 64)
    assert f.values.shape == (1, 64)
    assert np.all(f.values == 0)


def test_interpolator_hits_samples(sgrid, fgrid):
    f = realize_forcing(ForcingSpec(kind="periodic"), sgrid, fgrid, 64)
    interp = f.interpolator()
    for j in (0, 5, 63):
        np.testing.assert_allclose(interp(j * fgrid.dt), f.values[:, j], atol=1e-10)
