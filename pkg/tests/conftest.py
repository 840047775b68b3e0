"""Shared fixtures and scheme generators for the test suite."""

import numpy as np
import pytest

from vibroprobe.model import LevelScheme, PreparedState
from vibroprobe.units import cm1_to_radfs


def random_scheme(rng, n_a=2, n_c=1, n_d=0, gamma_lo=5e-3, gamma_hi=2e-2):
    """Random constant-gap level scheme with moderate dephasing.

    The dephasing window keeps quadrature windows short enough for the
    time-domain engines to run in seconds.
    """
    kw = dict(
        omega_a=cm1_to_radfs(rng.uniform(700.0, 1100.0, n_a)),
        gamma_a=rng.uniform(gamma_lo, gamma_hi, n_a),
        mu_ag=rng.uniform(0.5, 1.5, n_a),
    )
    if n_c:
        kw.update(omega_c=cm1_to_radfs(rng.uniform(2600.0, 3000.0, n_c)),
                  gamma_c=rng.uniform(gamma_lo, gamma_hi, n_c),
                  mu_c=rng.uniform(0.4, 1.2, (n_c, n_a)),
                  alpha_c=rng.uniform(0.4, 1.2, (n_c, n_a)))
    if n_d:
        kw.update(omega_d=cm1_to_radfs(rng.uniform(150.0, 350.0, n_d)),
                  gamma_d=rng.uniform(gamma_lo, gamma_hi, n_d),
                  mu_d=rng.uniform(0.4, 1.2, (n_d, n_a)),
                  alpha_d=rng.uniform(0.4, 1.2, (n_d, n_a)))
    return LevelScheme.build(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def simple_scheme():
    """One pumped state, one c state, one d state."""
    return LevelScheme.build(
        omega_a=[cm1_to_radfs(800.0)], gamma_a=[5e-3], mu_ag=[1.0],
        omega_c=[cm1_to_radfs(2800.0)], gamma_c=[8e-3], mu_c=[[1.0]],
        alpha_c=[[1.0]],
        omega_d=[cm1_to_radfs(250.0)], gamma_d=[6e-3], mu_d=[[0.8]],
        alpha_d=[[0.8]])


@pytest.fixture
def prepared(simple_scheme):
    return PreparedState.from_impulsive_pump(simple_scheme)


def rel_diff(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.abs(a - b).max() / np.abs(b).max())
