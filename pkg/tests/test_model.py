"""Level schemes, baths, and frequency trajectories."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vibroprobe.model import (BathSpec, FrequencyTrajectory, LevelScheme,
                              PreparedState, pair_dephasing,
                              sample_ou_trajectory)
from vibroprobe.units import cm1_to_radfs


def test_pair_dephasing_sum_convention():
    assert pair_dephasing(2e-3, 5e-3) == 7e-3


def test_scheme_validation():
    with pytest.raises(ValueError):
        LevelScheme.build(omega_a=[1.0, 2.0], gamma_a=[1e-3], mu_ag=[1.0])
    with pytest.raises(ValueError):
        LevelScheme.build(omega_a=[1.0], gamma_a=[1e-3], mu_ag=[1.0],
                          omega_c=[2.0], gamma_c=[1e-3],
                          mu_c=[[1.0, 2.0]])  # wrong (n_c, n_a) shape


def test_prepared_state_outer_product(simple_scheme):
    prep = PreparedState.from_impulsive_pump(simple_scheme)
    mu = simple_scheme.mu_ag
    assert np.allclose(prep.rho, np.outer(mu, mu.conj()))


def test_bath_variance_and_thermal_time():
    bath = BathSpec(lam=cm1_to_radfs(50.0), Lambda=1e-2,
                    temperature_K=300.0)
    assert abs(bath.variance - 2.0 * bath.lam / bath.beta_hbar) < 1e-18


# -- trajectories -----------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(t1=st.floats(-500, 2500), t2=st.floats(-500, 2500),
       t3=st.floats(-500, 2500))
def test_phase_integral_additivity(t1, t2, t3):
    traj = FrequencyTrajectory.erf_switch(0.4, 0.04, 500.0, 35.0)
    total = traj.phase_integral(t1, t3)
    split = traj.phase_integral(t1, t2) + traj.phase_integral(t2, t3)
    assert abs(total - split) < 1e-9 * max(1.0, abs(total))


@pytest.mark.parametrize("traj", [
    FrequencyTrajectory.constant(0.38),
    FrequencyTrajectory.linear_chirp(0.38, 1e-4),
    FrequencyTrajectory.erf_switch(0.38, 0.04, 400.0, 25.0),
    FrequencyTrajectory.tabulated([0.0, 300.0, 600.0, 1200.0],
                                  [0.38, 0.40, 0.41, 0.41]),
])
def test_phase_integral_matches_quadrature(traj):
    """[DERIVED] exact antiderivatives vs dense trapezoid quadrature."""
    t = np.linspace(20.0, 1100.0, 200001)
    numeric = np.trapezoid(traj.frequency_at(t), t)
    assert abs(traj.phase_integral(20.0, 1100.0) - numeric) < 1e-6 * abs(numeric)


def test_erf_switch_limits():
    traj = FrequencyTrajectory.erf_switch(0.38, 0.04, 500.0, 20.0)
    assert abs(traj.frequency_at(0.0) - 0.38) < 1e-12
    assert abs(traj.frequency_at(5000.0) - 0.42) < 1e-12


def test_trajectory_validation():
    with pytest.raises(ValueError):
        FrequencyTrajectory.erf_switch(0.4, 0.01, 0.0, 0.0)
    with pytest.raises(ValueError):
        FrequencyTrajectory.tabulated([0.0, 0.0], [1.0, 1.0])


# -- OU sampling ------------------------------------------------------------

def test_ou_sampler_statistics():
    """Stationary variance and exp(-Lambda*t) autocorrelation.

    The exact one-step discretization must reproduce the OU moments for
    any step, so a coarse grid is statistically exact.
    """
    bath = BathSpec(lam=cm1_to_radfs(40.0), Lambda=5e-3,
                    temperature_K=300.0)
    base = FrequencyTrajectory.constant(cm1_to_radfs(2000.0))
    times = np.arange(0.0, 400.0, 20.0)
    n = 4000
    devs = np.empty((n, len(times)))
    for k in range(n):
        traj = sample_ou_trajectory(base, bath, times, seed=k)
        devs[k] = traj.frequency_at(times) - base.frequency_at(times)
    var = devs.var(axis=0).mean()
    assert abs(var - bath.variance) < 5.0 * bath.variance / np.sqrt(n)
    lag = 8  # 160 fs
    corr = (devs[:, :-lag] * devs[:, lag:]).mean() / bath.variance
    expected = np.exp(-bath.Lambda * times[lag])
    assert abs(corr - expected) < 0.05


def test_ou_sampler_seed_determinism():
    bath = BathSpec(lam=cm1_to_radfs(40.0), Lambda=5e-3,
                    temperature_K=300.0)
    base = FrequencyTrajectory.constant(0.4)
    times = np.linspace(0.0, 500.0, 64)
    a = sample_ou_trajectory(base, bath, times, seed=3)
    b = sample_ou_trajectory(base, bath, times, seed=3)
    assert np.array_equal(a.frequency_at(times), b.frequency_at(times))
