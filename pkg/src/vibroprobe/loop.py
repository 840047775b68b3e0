"""Direct loop-integral engine: nested time-domain propagation and
frequency-domain resolvent chains.

This engine evaluates the same two pathway diagrams as the SOS engine
by brute-force quadrature instead of closed forms, which makes it the
numerical cross-check for every other protocol.  It also performs the
probe assembly integrals that turn dispersed amplitudes into physical
(real) signals.
"""

from __future__ import annotations

import numpy as np

from .grids import SignalGrid
from .model import FrequencyTrajectory, LevelScheme, PreparedState
from .pulses import PulseSpec
from .sos import _coherence_terms, _detection_shift, _pathways


def _auto_windows(scheme, T, tau3_max=None, s_max=None):
    g_a = scheme.gamma_a.min()
    widths = [man.gamma.min() + g_a for man in (scheme.c, scheme.d)
              if man.size]
    if tau3_max is None:
        tau3_max = T + 4.0 / max(2.0 * g_a, 1e-6)
    if s_max is None:
        s_max = 8.0 / max(min(widths), 1e-6)
    return float(tau3_max), float(s_max)


def _delta_dispersed_at_step(scheme, prepared, omega, delta, T, mode,
                             omega3, trajectories, dt, tau3_max, s_max):
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)
    tau3 = np.arange(0.0, tau3_max + dt, dt)
    s = np.arange(0.0, s_max + dt, dt)
    wts_tau = np.full(len(tau3), dt)
    wts_tau[[0, -1]] *= 0.5
    # cap the (tau3, s) work arrays at ~128 MB by blocking over tau3
    block = max(1, int(8e6 // max(len(s), 1)))
    total = np.zeros((len(omega), len(delta)), dtype=complex)
    for branch in _pathways(scheme, mode):
        for (weight, coh, g_pair, gap, width, a, ap, j) in \
                _coherence_terms(scheme, prepared.rho, branch):
            traj = (trajectories or {}).get((branch["label"], j))
            gap_end = gap if traj is None \
                else float(traj.frequency_at(tau3[-1] + s[-1]))
            line_end = 1.0 / (width - 1j * (om_eff - gap_end))
            for lo in range(0, len(tau3), block):
                t3 = tau3[lo:lo + block]
                if traj is None:
                    # constant-gap coherence phase over the interval s
                    phase = np.exp(-(1j * gap + width) * s)[None, :]
                    phase = np.broadcast_to(phase, (len(t3), len(s)))
                else:
                    cum0 = traj._cumulative(t3)
                    cum1 = traj._cumulative(t3[:, None] + s[None, :])
                    phase = np.exp(-1j * (cum1 - cum0[:, None])
                                   - width * s[None, :])
                # inner integral over the coherence interval per omega,
                # closed beyond s_max with the settled (constant) gap
                inner = np.empty((len(t3), len(omega)), dtype=complex)
                for k, om in enumerate(om_eff):
                    row = phase * np.exp(1j * om * s)[None, :]
                    inner[:, k] = np.trapezoid(row, s, axis=1) \
                        + row[:, -1] * line_end[k]
                pre = weight * np.exp(-(1j * coh + g_pair) * t3) \
                    * wts_tau[lo:lo + block]
                kernel = np.exp(-1j * np.outer(t3 - T, delta))
                total += np.einsum("k,kj,kd->jd", pre, inner, kernel,
                                   optimize=True)
            # pre-probe tail beyond tau3_max, where the interval
            # integral has reached its asymptotic Lorentzian
            t_end = tau3[-1]
            tail = np.exp(-(1j * coh + g_pair) * t_end) \
                * np.exp(-1j * (t_end - T) * delta) \
                / (g_pair + 1j * (coh + delta))
            total += weight * np.outer(line_end, tail)
    return 1j * total


def loop_delta_dispersed(scheme: LevelScheme, prepared: PreparedState,
                         omega, delta, T, mode="fdir", omega3=0.0,
                         trajectories=None, dt=None,
                         tau3_max=None, s_max=None, richardson=True):
    """Delta-dispersed amplitude by nested time-domain quadrature.

    Propagates the two pathway kernels on a (tau3, t) grid, with
    optional instantaneous-frequency trajectories replacing the
    constant detection gaps (keys ("c", j) / ("d", j) of
    ``trajectories`` select the probed state).  A step-halving
    Richardson pass refines the result; the reached step difference is
    stored in ``meta["refinement_delta"]``.

    The step defaults to one twentieth of the shortest detected
    oscillation period.
    """
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    tau3_max, s_max = _auto_windows(scheme, T, tau3_max, s_max)
    if dt is None:
        om_max = max(np.abs(omega).max(), 1e-3)
        dt = 2.0 * np.pi / om_max / 20.0
    args = (scheme, prepared, omega, delta, T, mode, omega3, trajectories)
    coarse = _delta_dispersed_at_step(*args, dt, tau3_max, s_max)
    meta = {"T_fs": float(T), "mode": mode, "signal": "delta", "dt_fs": dt}
    if richardson:
        fine = _delta_dispersed_at_step(*args, dt / 2.0, tau3_max, s_max)
        meta["refinement_delta"] = float(np.max(np.abs(fine - coarse)))
        coarse = (4.0 * fine - coarse) / 3.0
    return SignalGrid(("omega", "delta"), (omega, delta), coarse, meta=meta)


def resolvent_frequency_gated(scheme: LevelScheme, pump: PulseSpec,
                              probe: PulseSpec, omega, mode="fdir",
                              omega3=0.0, n_omega1=1201, n_delta=501,
                              span_sigma=6.0):
    """Frequency-gated signal from resolvent chains on a 2D quadrature.

    Both pathway chains are integrated over the probe frequency pair
    split Delta and the bra-side pump frequency omega1:

        S = Im[ i/(2 pi)^2 int dDelta domega1 E2*(w) E2(w+Delta)
                 E1*(w1) E1(w1-Delta) * (chain_i + chain_ii) ]

    Pathway (i) promotes the bra to a', converts it to d at the first
    probe interaction and detects against the ket in a:

        chain_i = 1/(g_a + i(w_a - nu)) * 1/(g_a' + i(w1 - w_a'))
                * 1/(g_d - i(w_eff - nu + w_d)),   nu = w1 - Delta,

    while pathway (ii) promotes the ket to a' and takes it through c:

        chain_ii = 1/(g_a' + i(w_a' - nu)) * 1/(g_a + i(w1 - w_a))
                 * 1/(g_c - i(w_eff + w1 - w_c)).

    The grids cover the pump bandwidth around the pumped resonances
    (omega1) and the probe bandwidth plus pair-coherence splittings
    (Delta).
    """
    omega = np.asarray(omega, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)

    g_min = float(scheme.gamma_a.min())
    bw1 = span_sigma / max(pump.sigma, 1e-6) if pump.kind == "gaussian" \
        else 40.0 * g_min
    w1_lo = scheme.omega_a.min() - bw1
    w1_hi = scheme.omega_a.max() + bw1
    omega1 = np.linspace(w1_lo, w1_hi, n_omega1)

    splits = np.subtract.outer(scheme.omega_a, scheme.omega_a).ravel()
    bw2 = span_sigma / max(probe.sigma, 1e-6) if probe.kind == "gaussian" \
        else 40.0 * g_min
    d_lo = splits.min() - bw2
    d_hi = splits.max() + bw2
    delta = np.linspace(d_lo, d_hi, n_delta)

    # Pathway (ii) integrates over the bra pump frequency w1; pathway (i)
    # over the ket pump frequency nu = w1 - Delta, which keeps the
    # detection resolvent separable in (Delta, frequency).  Both share the
    # same quadrature nodes.
    e1 = pump.envelope_freq(omega1[None, :] - delta[:, None])
    e1c = pump.envelope_freq(omega1).conj()[None, :]
    pump_fac_ii = e1 * e1c                           # (delta, omega1)
    nu = omega1
    pump_fac_i = pump.envelope_freq(nu)[None, :] \
        * pump.envelope_freq(nu[None, :] + delta[:, None]).conj()

    mu = scheme.mu_ag
    om_a, g_a = scheme.omega_a, scheme.gamma_a
    e2_det = probe.envelope_freq(omega).conj()
    e2_pair = probe.envelope_freq(omega[:, None] + delta[None, :])

    w1_wts = np.full(len(omega1), omega1[1] - omega1[0])
    w1_wts[[0, -1]] *= 0.5
    d_wts = np.full(len(delta), delta[1] - delta[0])
    d_wts[[0, -1]] *= 0.5

    # detection resolvents, (state j fixed inside loop): (omega, omega1)
    total = np.zeros(len(omega), dtype=complex)
    for branch in _pathways(scheme, mode):
        w = branch["w"]
        man = scheme.d if branch["label"] == "d" else scheme.c
        for a in range(scheme.n_a):
            for ap in range(scheme.n_a):
                if branch["label"] == "d":
                    # ket pumped to a at nu, bra pumped to a' at nu + Delta
                    amp = mu[a] * np.conj(mu[ap])
                    ket = 1.0 / (g_a[a] + 1j * (om_a[a] - nu))[None, :]
                    bra = 1.0 / (g_a[ap]
                                 + 1j * (nu[None, :] + delta[:, None]
                                         - om_a[ap]))
                    pair = pump_fac_i * ket * bra    # (delta, nu)
                else:
                    # ket pumped to a' at w1 - Delta, bra pumped to a at w1
                    amp = mu[ap] * np.conj(mu[a])
                    ket = 1.0 / (g_a[ap]
                                 + 1j * (om_a[ap] - omega1[None, :]
                                         + delta[:, None]))
                    bra = 1.0 / (g_a[a]
                                 + 1j * (omega1 - om_a[a]))[None, :]
                    pair = pump_fac_ii * ket * bra   # (delta, omega1)
                for j in range(w.shape[0]):
                    if branch["label"] == "d":
                        weight = amp * w[j, a] * np.conj(w[j, ap])
                    else:
                        weight = amp * np.conj(w[j, ap]) * w[j, a]
                    if weight == 0.0:
                        continue
                    if branch["label"] == "d":
                        det = 1.0 / (man.gamma[j]
                                     - 1j * (om_eff[:, None] - nu[None, :]
                                             + man.omega[j]))
                    else:
                        det = 1.0 / (man.gamma[j]
                                     - 1j * (om_eff[:, None]
                                             + omega1[None, :]
                                             - man.omega[j]))
                    inner = (pair * w1_wts[None, :]) @ det.T  # (delta, omega)
                    total += weight * np.einsum(
                        "k,kd,d,dk->k", e2_det, e2_pair, d_wts, inner,
                        optimize=True)
    signal = np.imag(1j * total) / (2.0 * np.pi) ** 2
    return SignalGrid(("omega",), (omega,), signal,
                      meta={"T_fs": probe.center - pump.center, "mode": mode,
                            "signal": "freq_gated_resolvent"})


def _stripped(probe: PulseSpec) -> PulseSpec:
    """Probe copy with the center translation phase removed.

    Dispersed amplitudes S~ already carry the exp(i*Delta*T) assembly
    phase, so the envelope factors must be evaluated for a pulse
    centered at zero.
    """
    return PulseSpec(probe.kind, probe.amplitude, probe.omega0,
                     probe.sigma, 0.0)


def assemble_from_delta(sgrid: SignalGrid, probe: PulseSpec) -> SignalGrid:
    """Assemble S(omega, T) = Im int dDelta/2pi E2*(w) E2(w+D) S~(w, T; D)."""
    omega = sgrid.axis("omega")
    delta = sgrid.axis("delta")
    bare = _stripped(probe)
    if probe.kind == "impulsive":
        fac = np.full((len(omega), len(delta)), probe.amplitude ** 2,
                      dtype=complex)
    else:
        fac = (bare.envelope_freq(omega).conj()[:, None]
               * bare.envelope_freq(omega[:, None] + delta[None, :]))
    values = np.imag(np.trapezoid(fac * sgrid.values, delta, axis=1)
                     / (2.0 * np.pi))
    return SignalGrid(("omega",), (omega,), values,
                      meta={**sgrid.meta, "signal": "freq_gated_assembled"})


def assemble_time_gated(kernel: SignalGrid, probe: PulseSpec) -> SignalGrid:
    """Assemble S(t, T) = Im[E2*(t) int_0^t dtau E2(tau) S~(t; tau)]."""
    t = kernel.axis("t")
    tau = kernel.axis("tau")
    integrand = kernel.values * probe.envelope_time(tau)[None, :]
    inner = np.trapezoid(integrand, tau, axis=1)
    values = np.imag(probe.envelope_time(t).conj() * inner)
    return SignalGrid(("t",), (t,), values,
                      meta={**kernel.meta, "signal": "time_gated_assembled"})
