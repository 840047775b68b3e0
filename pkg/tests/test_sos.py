"""Sum-over-states engine: closed forms, assembly identities, lineshapes."""

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import random_scheme, rel_diff
from vibroprobe.loop import assemble_from_delta, assemble_time_gated
from vibroprobe.model import LevelScheme, PreparedState
from vibroprobe.pulses import PulseSpec
from vibroprobe.sos import (sos_delta_dispersed_prepared,
                            sos_frequency_gated, sos_impulsive,
                            sos_time_gated, sos_time_gated_kernel)
from vibroprobe.units import cm1_to_radfs


def test_impulsive_absorption_line_is_lorentzian(simple_scheme):
    """[DERIVED] the c line is a positive Lorentzian of width gamma_ac."""
    gap = simple_scheme.c.omega[0] - simple_scheme.omega_a[0]
    width = simple_scheme.gamma_a[0] + simple_scheme.c.gamma[0]
    omega = gap + np.linspace(-5 * width, 5 * width, 401)
    sig = sos_impulsive(simple_scheme, omega, T=0.0).values
    # peak at the gap
    assert abs(omega[np.argmax(sig)] - gap) < omega[1] - omega[0]
    assert sig.max() > 0
    # Lorentzian ratio test at half width
    mu = simple_scheme.mu_ag[0]
    w_c = simple_scheme.c.mu[0, 0]
    amp = abs(mu) ** 2 * abs(w_c) ** 2 / width
    line = amp * width ** 2 / (width ** 2 + (omega - gap) ** 2)
    # the d term contributes only a flat tail here
    assert rel_diff(sig, line) < 5e-3


def test_emission_and_absorption_same_sign_frequency_gated(simple_scheme):
    gap_c = simple_scheme.c.omega[0] - simple_scheme.omega_a[0]
    gap_d = simple_scheme.omega_a[0] - simple_scheme.d.omega[0]
    omega = np.array([gap_c, gap_d])
    sig = sos_impulsive(simple_scheme, omega, T=0.0).values
    assert sig[0] > 0 and sig[1] > 0


def test_delay_beats_decay_at_pair_dephasing():
    """Coherently pumped doublet: T-dependence beats at omega_aa'."""
    scheme = LevelScheme.build(
        omega_a=cm1_to_radfs(np.array([800.0, 900.0])),
        gamma_a=[4e-3, 4e-3], mu_ag=[1.0, 1.0],
        omega_c=[cm1_to_radfs(2800.0)], gamma_c=[6e-3], mu_c=[[1.0, 1.0]])
    gap = scheme.c.omega[0] - scheme.omega_a[0]
    beat = scheme.omega_a[1] - scheme.omega_a[0]
    T = np.linspace(0.0, 600.0, 241)
    sig = np.array([sos_impulsive(scheme, np.array([gap]), T=Tk).values[0]
                    for Tk in T])
    # detrend the non-beating decay before locating the beat frequency
    trend = np.polynomial.polynomial.polyfit(T, sig, 3)
    resid = sig - np.polynomial.polynomial.polyval(T, trend)
    spec = np.abs(np.fft.rfft(resid * np.hanning(len(T))))
    freqs = 2 * np.pi * np.fft.rfftfreq(len(T), T[1] - T[0])
    assert abs(freqs[np.argmax(spec)] - beat) <= freqs[1] - freqs[0]


def test_assembled_delta_equals_frequency_gated(simple_scheme, prepared):
    """Delta assembly against the probe envelope reproduces the exact
    frequency-gated closed form for separated pulses."""
    T = 400.0
    probe = PulseSpec.gaussian(sigma_fs=60.0, omega0_cm1=2000.0,
                               center_fs=T)
    gap = simple_scheme.c.omega[0] - simple_scheme.omega_a[0]
    omega = gap + np.linspace(-0.05, 0.05, 101)
    delta = np.linspace(-0.3, 0.3, 1501)
    sg = sos_delta_dispersed_prepared(simple_scheme, prepared, omega,
                                      delta, T)
    assembled = assemble_from_delta(sg, probe)
    exact = sos_frequency_gated(simple_scheme, PulseSpec.impulsive(),
                                probe, omega)
    assert rel_diff(assembled.values, exact.values) < 1e-6


def test_time_gated_assembly_matches_direct(simple_scheme, prepared):
    T = 350.0
    probe = PulseSpec.gaussian(sigma_fs=40.0, omega0_cm1=2000.0,
                               center_fs=T)
    t = np.linspace(150.0, 800.0, 301)
    tau = np.linspace(100.0, 700.0, 1201)
    kern = sos_time_gated_kernel(simple_scheme, prepared, t, tau)
    a = assemble_time_gated(kern, probe)
    b = sos_time_gated(simple_scheme, prepared, probe, t)
    # both are trapezoid quadratures of an oscillatory integrand on
    # slightly different tau grids; agreement is step-limited
    assert rel_diff(a.values, b.values) < 1e-2


def test_far_detuned_window_sees_only_lorentzian_tails(rng):
    """A window far from every resonance carries only power-law tails."""
    scheme = random_scheme(rng, n_a=2, n_c=1, n_d=2)
    gap = scheme.c.omega[0] - scheme.omega_a.max()
    on = sos_impulsive(scheme, np.array([gap]), T=120.0).values
    far = sos_impulsive(scheme, np.array([gap + 1.0]), T=120.0).values
    assert abs(far[0]) < 5e-3 * abs(on[0])


def test_srs_is_shifted_fdir_with_alpha_couplings(simple_scheme):
    """FDIR <-> SRS mapping at machine precision (same couplings)."""
    omega3 = cm1_to_radfs(12000.0)
    gap = simple_scheme.c.omega[0] - simple_scheme.omega_a[0]
    omega = gap + np.linspace(-0.05, 0.05, 41)
    fdir = sos_impulsive(simple_scheme, omega, T=80.0).values
    # alpha couplings of simple_scheme equal mu up to global factors
    srs = sos_impulsive(simple_scheme, omega + omega3, T=80.0,
                        mode="srs", omega3=omega3).values
    ratio = (abs(simple_scheme.c.alpha[0, 0] / simple_scheme.c.mu[0, 0])
             ** 2)
    # both manifolds scale by the same alpha/mu ratio here
    assert rel_diff(srs, fdir * ratio) < 1e-12


@settings(max_examples=15, deadline=None)
@given(scale=st.floats(min_value=0.2, max_value=3.0))
def test_quadratic_scaling_in_pump_coupling(scale):
    base = LevelScheme.build(
        omega_a=[0.15], gamma_a=[5e-3], mu_ag=[1.0],
        omega_c=[0.52], gamma_c=[8e-3], mu_c=[[1.0]])
    scaled = LevelScheme.build(
        omega_a=[0.15], gamma_a=[5e-3], mu_ag=[scale],
        omega_c=[0.52], gamma_c=[8e-3], mu_c=[[1.0]])
    omega = np.linspace(0.30, 0.44, 21)
    a = sos_impulsive(base, omega, T=50.0).values
    b = sos_impulsive(scaled, omega, T=50.0).values
    assert rel_diff(b, a * scale ** 2) < 1e-10
