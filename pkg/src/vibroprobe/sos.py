"""Sum-over-states (SOS) closed-form signal engine.

Two loop diagrams contribute to the gated pump-probe signal of a pumped
manifold {a}: (i) probe-stimulated emission down to the manifold {d} and
(ii) probe absorption up to the manifold {c}.  With amplitude-level
propagators exp(-(i*omega_nu+gamma_nu)t) the two elementary kernels in
the interval between the first probe interaction (tau) and detection (t)
are

    k_i  = rho_{aa'} w_{ad} w*_{a'd} exp(-(i w_{aa'}+g_{aa'}) tau)
                               * exp(-(i w_{ad}+g_{ad}) (t-tau))
    k_ii = rho_{a'a} w*_{a'c} w_{ac} exp(-(i w_{a'a}+g_{a'a}) tau)
                               * exp(-(i w_{ca}+g_{ca}) (t-tau))

with w_{xy} = omega_x - omega_y and g_{xy} = gamma_x + gamma_y.  All
closed forms below are exact time integrals of these kernels; every
other engine in the package must agree with them for constant gaps.

The Delta-dispersed signal is reported as the complex amplitude
S~(omega, Delta) = i * sum(terms); physical (real) signals are obtained
by Im[...] after the probe assembly integral.  One global positive
constant is dropped throughout; the global sign is fixed so that the
emission pathway produces a positive absorptive Lorentzian.
"""

from __future__ import annotations

import numpy as np

from .grids import SignalGrid
from .model import LevelScheme, PreparedState
from .pulses import PulseSpec


def _detection_shift(mode, omega3=0.0):
    """SRS signals are dispersed against the Raman shift omega - omega3."""
    return float(omega3) if mode == "srs" else 0.0


def _pathways(scheme: LevelScheme, mode: str):
    """Yield (sign, rho-index order, gap, width, weight-matrix) per branch.

    Returns two entries (emission via d, absorption via c); each is a
    dict with per-(state, a) arrays of detection gaps omega_R, widths
    gamma_R and coupling matrix w (shape (n, n_a)).
    """
    out = []
    for label, man in (("d", scheme.d), ("c", scheme.c)):
        if man.size == 0:
            continue
        w = man.coupling(mode)
        if label == "d":
            gap = scheme.omega_a[None, :] - man.omega[:, None]
        else:
            gap = man.omega[:, None] - scheme.omega_a[None, :]
        width = scheme.gamma_a[None, :] + man.gamma[:, None]
        out.append({"label": label, "w": w, "gap": gap, "width": width})
    return out


def _coherence_terms(scheme, rho, branch):
    """Collect flat per-(a, a', j) term tables for one branch.

    Each term carries a coherence frequency/width pair for the interval
    before the first probe interaction and a detection gap/width pair
    for the coherence interval, plus a complex weight.
    """
    n_a = scheme.n_a
    omega_a, gamma_a = scheme.omega_a, scheme.gamma_a
    w = branch["w"]
    rows = []
    for a in range(n_a):
        for ap in range(n_a):
            g_pair = gamma_a[a] + gamma_a[ap]
            for j in range(w.shape[0]):
                if branch["label"] == "d":
                    weight = rho[a, ap] * w[j, a] * np.conj(w[j, ap])
                    coh = omega_a[a] - omega_a[ap]          # w_{aa'}
                else:
                    weight = rho[ap, a] * np.conj(w[j, ap]) * w[j, a]
                    coh = omega_a[ap] - omega_a[a]          # w_{a'a}
                if weight == 0.0:
                    continue
                rows.append((weight, coh, g_pair,
                             branch["gap"][j, a], branch["width"][j, a],
                             a, ap, j))
    return rows


def sos_delta_dispersed_prepared(scheme: LevelScheme, prepared: PreparedState,
                                 omega, delta, T, mode="fdir", omega3=0.0):
    """Delta-dispersed signal amplitude for a prepared a-state.

    Args:
        omega: detection frequency grid, rad/fs.
        delta: frequency-difference grid, rad/fs.
        T: delay between preparation (t = 0) and the probe center, fs.
        mode: "fdir" (dipole couplings) or "srs" (polarizabilities,
            dispersed against the Raman shift omega - omega3).

    Returns:
        SignalGrid of the complex amplitude S~(omega, Delta) with the
        probe-assembly phase exp(i*Delta*T) included.
    """
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)
    total = np.zeros((len(omega), len(delta)), dtype=complex)
    for branch in _pathways(scheme, mode):
        for (weight, coh, g_pair, gap, width, _, _, _) in \
                _coherence_terms(scheme, prepared.rho, branch):
            # the pre-probe coherence oscillates at exp(-i*coh*tau), so
            # the Delta resonance sits at Delta = -coh
            lor_delta = 1.0 / (g_pair + 1j * (delta + coh))
            lor_omega = 1.0 / (width - 1j * (om_eff - gap))
            total += weight * np.outer(lor_omega, lor_delta)
    total *= 1j * np.exp(1j * delta * T)[None, :]
    return SignalGrid(("omega", "delta"), (omega, delta), total,
                      meta={"T_fs": float(T), "mode": mode, "signal": "delta"})


def _pump_amplitudes(scheme: LevelScheme, pump: PulseSpec):
    """Per-state pump amplitudes P_a = mu_ag * E1(omega_a - i*gamma_a)."""
    z = scheme.omega_a - 1j * scheme.gamma_a
    return scheme.mu_ag * pump.envelope_freq(z)


def sos_frequency_gated(scheme: LevelScheme, pump: PulseSpec,
                        probe: PulseSpec, omega,
                        mode="fdir", omega3=0.0, amp3=1.0):
    """Frequency-gated signal S(omega, T) for Gaussian/impulsive pulses.

    The pump enters through envelope values at the complex resonances
    omega_a - i*gamma_a; the probe-assembly Delta integral is evaluated
    at the coherence pole Delta = w_coh + i*g_pair, which is exact up to
    terms that vanish for pulses well separated in time.  The delay T is
    the probe center relative to the pump center; all translation phases
    are carried by the complex envelope spectra, so the delay dependence
    (coherence beats during T damped by the pair dephasing rate) emerges
    from the product of envelope values at complex frequencies.
    """
    omega = np.asarray(omega, dtype=float)
    T = probe.center - pump.center
    om_eff = omega - _detection_shift(mode, omega3)
    amps = _pump_amplitudes(scheme, pump)
    rho = np.outer(amps, amps.conj())
    e2_det = probe.envelope_freq(omega).conj()
    total = np.zeros(len(omega), dtype=complex)
    for branch in _pathways(scheme, mode):
        for (weight, coh, g_pair, gap, width, _, _, _) in \
                _coherence_terms(scheme, rho, branch):
            # Delta-pole residue at Delta = -coh + i*g_pair; the
            # coherence oscillates at -coh during the delay.
            pole = -coh + 1j * g_pair
            e2 = probe.envelope_freq(omega + pole)
            total += (weight * e2_det * e2
                      / (width - 1j * (om_eff - gap)))
    signal = np.imag(1j * total)
    if mode == "srs":
        signal = signal * abs(amp3) ** 2
    return SignalGrid(("omega",), (omega,), signal,
                      meta={"T_fs": T, "mode": mode, "signal": "freq_gated"})


def sos_impulsive(scheme: LevelScheme, omega, T, mode="fdir", omega3=0.0):
    """Fully impulsive pump and probe limit of the frequency-gated signal."""
    return sos_frequency_gated(scheme, PulseSpec.impulsive(),
                               PulseSpec.impulsive(center_fs=T), omega,
                               mode=mode, omega3=omega3)


def sos_time_gated_kernel(scheme: LevelScheme, prepared: PreparedState,
                          t, tau, mode="fdir"):
    """Tau-dispersed time-domain kernel S~(t; tau) for a prepared state.

    theta(tau) theta(t - tau) times the canonical kernels; the
    absorption (c) pathway enters with a relative minus sign in the
    time-gated representation, mirroring that it removes probe photons
    while the emission (d) pathway adds them.
    """
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    tt, uu = np.meshgrid(t, tau, indexing="ij")
    support = (uu >= 0.0) & (tt >= uu)
    total = np.zeros(tt.shape, dtype=complex)
    for branch in _pathways(scheme, mode):
        sign = -1.0 if branch["label"] == "c" else 1.0
        for (weight, coh, g_pair, gap, width, _, _, _) in \
                _coherence_terms(scheme, prepared.rho, branch):
            total += (sign * weight
                      * np.exp(-(1j * coh + g_pair) * uu)
                      * np.exp(-(1j * gap + width) * (tt - uu)))
    total[~support] = 0.0
    total *= 1j
    return SignalGrid(("t", "tau"), (t, tau), total,
                      meta={"mode": mode, "signal": "time_kernel"})


def sos_time_gated(scheme: LevelScheme, prepared: PreparedState,
                   probe: PulseSpec, t, mode="fdir", n_tau=1200):
    """Time-gated signal S(t, T) assembled against a Gaussian probe.

    S(t, T) = Im[E2*(t) \\int_0^t dtau E2(tau) S~(t; tau)].
    """
    t = np.asarray(t, dtype=float)
    lo = max(0.0, probe.center - 6.0 * probe.sigma)
    hi = min(t.max(), probe.center + 6.0 * probe.sigma)
    tau = np.linspace(lo, max(hi, lo + 1.0), n_tau)
    kern = sos_time_gated_kernel(scheme, prepared, t, tau, mode=mode).values
    integrand = kern * probe.envelope_time(tau)[None, :]
    inner = np.trapezoid(integrand, tau, axis=1)
    signal = np.imag(probe.envelope_time(t).conj() * inner)
    return SignalGrid(("t",), (t,), signal,
                      meta={"T_fs": probe.center, "mode": mode,
                            "signal": "time_gated"})


def sos_time_gated_impulsive(scheme: LevelScheme, prepared: PreparedState,
                             T, mode="fdir"):
    """Impulsive-probe limit: the signal collapses onto t = T.

    Returns the T-profile multiplying delta(t - T): the emission sum
    minus the absorption sum, each weighted by the pumped coherence
    evolved to T.
    """
    T = np.asarray(T, dtype=float)
    total = np.zeros(len(T), dtype=complex)
    for branch in _pathways(scheme, mode):
        sign = -1.0 if branch["label"] == "c" else 1.0
        for (weight, coh, g_pair, _, _, _, _) in \
                _coherence_terms(scheme, prepared.rho, branch):
            total += sign * weight * np.exp(-(1j * coh + g_pair) * T)
    return SignalGrid(("T",), (T,), np.imag(1j * total),
                      meta={"mode": mode, "signal": "time_gated_impulsive"})
