"""Time/frequency resolution analysis of gated probe signals.

Tools for the dressed Delta-dispersed signal of a moving vibrational
gap, its linear-chirp closed form, the Delta -> tau spectrogram
transform, uncertainty products, and the two scan drivers that generate
the quench-spectrogram and probe-duration survey datasets.

Conventions: the matter kernel carries the trajectory phase
exp(+i*[Phi(t) - Phi(tau)]) and damping exp(-gamma_a*(t + tau)); the
probe enters through its real envelope (the carrier is part of the
detection frequency).  With a linear chirp Omega(tau) = w0_m + alpha*tau
the dressed profile is Gaussian in Delta with

    |S(Delta)|^2 ~ exp(-(Delta - Delta0)^2 / sigma_eff^2),
    Delta0 = w0_pr - w0_m + alpha*(T - sigma_pr^2 * gamma_a),
    sigma_eff^2 = 1/sigma_pr^2 + alpha^2 * sigma_pr^2,

valid as printed for resonant probing (w0_pr tuned to the gap at the
probe arrival); only resonant tuples are used in the closed-form
checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .grids import SignalGrid
from .model import FrequencyTrajectory, LevelScheme, PreparedState
from .pulses import PulseSpec
from .semiclassical import sc_delta_dispersed
from .units import cm1_to_radfs


@dataclass(frozen=True)
class ChirpClosedForm:
    """Gaussian Delta-profile parameters of a linearly chirped gap."""

    delta0: float
    sigma_eff: float


def chirp_closed_form(omega0, omega_gap0, alpha, T, gamma_a,
                      sigma_pr) -> ChirpClosedForm:
    """Closed-form center and width of the dressed chirp profile."""
    if sigma_pr <= 0.0:
        raise ValueError("sigma_pr must be positive")
    delta0 = omega0 - omega_gap0 + alpha * (T - sigma_pr ** 2 * gamma_a)
    sigma_eff = np.sqrt(1.0 / sigma_pr ** 2 + (alpha * sigma_pr) ** 2)
    return ChirpClosedForm(float(delta0), float(sigma_eff))


def uncertainty_product(sigma_pr, alpha):
    """sigma_eff * sigma_pr = sqrt(1 + alpha^2 sigma_pr^4) >= 1."""
    sigma_pr = np.asarray(sigma_pr, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    return np.sqrt(1.0 + (alpha * sigma_pr ** 2) ** 2)


def matter_tau_kernel(traj: FrequencyTrajectory, gamma_a, t,
                      tau) -> SignalGrid:
    """Matter kernel S(tau) at fixed detection time t.

    S(tau) = theta(tau) theta(t - tau) exp(-gamma_a*(t + tau))
             * exp(+i*[Phi(t) - Phi(tau)]).
    """
    tau = np.asarray(tau, dtype=float)
    phase = traj.phase_integral(tau, t)
    vals = np.exp(-gamma_a * (t + tau) + 1j * phase)
    vals = np.where((tau >= 0.0) & (tau <= t), vals, 0.0)
    return SignalGrid(("tau",), (tau,), vals.astype(complex),
                      meta={"t_fs": float(t), "gamma_a": float(gamma_a),
                            "signal": "tau_kernel"})


def dressed_delta_signal(kernel: SignalGrid, probe: PulseSpec, omega,
                         delta) -> SignalGrid:
    """Probe-dressed Delta profile of a tau-resolved matter kernel.

    S(w, Delta) = int dtau env2(tau - T) S(tau) exp(i*(w + Delta)*tau)

    with env2 the real probe envelope centered at T = probe.center.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    delta = np.asarray(delta, dtype=float)
    tau = kernel.axis("tau")
    if probe.kind != "gaussian":
        raise ValueError("dressed_delta_signal needs a gaussian probe")
    env = np.exp(-0.5 * ((tau - probe.center) / probe.sigma) ** 2)
    weighted = probe.amplitude * env * kernel.values
    phase = np.exp(1j * np.multiply.outer(
        omega[:, None] + delta[None, :], tau))
    vals = np.trapezoid(weighted[None, None, :] * phase, tau, axis=-1)
    meta = {"T_fs": float(probe.center), "signal": "dressed_delta"}
    meta.update({k: v for k, v in kernel.meta.items() if k != "signal"})
    return SignalGrid(("omega", "delta"), (omega, delta), vals, meta=meta)


def delta_to_tau(sgrid: SignalGrid, tau, T=None) -> SignalGrid:
    """Map a Delta-dispersed amplitude to probe-interaction time tau.

    S(w, tau) = exp(-i*w*tau)/(2 pi)
                * int dDelta S(w, Delta) exp(+i*Delta*(tau - T))

    The pre-probe coherence then appears at its physical time, so the
    tau marginal starts at the pump and decays at the pair dephasing
    rate.  T defaults to the grid's recorded pump-probe delay.
    """
    tau = np.asarray(tau, dtype=float)
    delta = sgrid.axis("delta")
    if T is None:
        T = float(sgrid.meta.get("T_fs", 0.0))
    omega = sgrid.axis("omega")
    wts = np.gradient(delta)
    kernel = np.exp(1j * np.outer(delta, tau - T)) * wts[:, None]
    vals = (sgrid.values @ kernel) / (2.0 * np.pi)
    vals = vals * np.exp(-1j * np.outer(omega, tau))
    meta = dict(sgrid.meta)
    meta["signal"] = "tau_dispersed"
    return SignalGrid(("omega", "tau"), (omega, tau), vals, meta=meta)


def tau_to_delta(sgrid: SignalGrid, delta, T=None) -> SignalGrid:
    """Inverse of :func:`delta_to_tau` on band-limited grids."""
    delta = np.asarray(delta, dtype=float)
    tau = sgrid.axis("tau")
    if T is None:
        T = float(sgrid.meta.get("T_fs", 0.0))
    omega = sgrid.axis("omega")
    vals = sgrid.values * np.exp(1j * np.outer(omega, tau))
    wts = np.gradient(tau)
    kernel = np.exp(-1j * np.outer(tau - T, delta)) * wts[:, None]
    vals = vals @ kernel
    meta = dict(sgrid.meta)
    meta["signal"] = "delta"
    return SignalGrid(("omega", "delta"), (omega, delta), vals, meta=meta)


def count_peaks(axis, profile, smooth_width, prominence_frac=0.1):
    """Count local maxima after Gaussian smoothing.

    The profile is smoothed with a kernel of standard deviation
    ``smooth_width`` (axis units) and maxima below ``prominence_frac``
    of the global peak are discarded.
    """
    axis = np.asarray(axis, dtype=float)
    profile = np.abs(np.asarray(profile)).astype(float)
    step = axis[1] - axis[0]
    smoothed = gaussian_filter1d(profile, max(smooth_width / step, 1e-9))
    peaks, _ = find_peaks(smoothed,
                          prominence=prominence_frac * smoothed.max())
    return len(peaks), axis[peaks]


def moment_product(sgrid: SignalGrid) -> float:
    """Second-moment time-frequency product of an (omega|delta, tau) map.

    Marginals of |S|^2 along each axis give the rms frequency and time
    spreads; the product is bounded below by 1/2 for any transform pair
    (Gaussian equality).
    """
    names = sgrid.axis_names
    if "tau" not in names:
        raise ValueError("moment_product needs a tau axis")
    freq_name = names[0] if names[1] == "tau" else names[1]
    f = sgrid.axis(freq_name)
    t = sgrid.axis("tau")
    inten = np.abs(sgrid.values) ** 2
    if names.index("tau") == 0:
        inten = inten.T
    pf = np.trapezoid(inten, t, axis=1)
    pt = np.trapezoid(inten, f, axis=0)

    def rms(x, p):
        norm = np.trapezoid(p, x)
        mean = np.trapezoid(x * p, x) / norm
        return np.sqrt(np.trapezoid((x - mean) ** 2 * p, x) / norm)

    return float(rms(f, pf) * rms(t, pt))


def fourier_moment_product(sgrid: SignalGrid, tau=None) -> float:
    """Moment product of a 1D Delta profile and its tau transform."""
    delta = sgrid.axis("delta")
    vals = sgrid.values
    if tau is None:
        # conjugate grid: resolution 2*pi/span, centered on tau = 0
        span = delta[-1] - delta[0]
        n = len(delta)
        tau = (np.arange(n) - n // 2) * (2.0 * np.pi / span)
    tau = np.asarray(tau, dtype=float)
    kernel = np.exp(1j * np.outer(delta, tau))
    ft = (vals * np.gradient(delta)) @ kernel

    def rms(x, p):
        norm = np.trapezoid(p, x)
        mean = np.trapezoid(x * p, x) / norm
        return np.sqrt(np.trapezoid((x - mean) ** 2 * p, x) / norm)

    return float(rms(delta, np.abs(vals) ** 2) * rms(tau, np.abs(ft) ** 2))


# ---------------------------------------------------------------------------
# scan drivers


def _quench_scheme(gamma_a, gamma_probe):
    """Single pumped state with one probed absorption gap."""
    return LevelScheme.build(
        omega_a=[cm1_to_radfs(800.0)], gamma_a=[gamma_a], mu_ag=[1.0],
        omega_c=[cm1_to_radfs(2800.0)], gamma_c=[gamma_probe],
        mu_c=[[1.0]], alpha_c=[[1.0]])


def erf_switch_rate(jump, sigma_m):
    """Peak chirp rate alpha = jump / (sqrt(pi) * sigma_m) of a switch."""
    return jump / (np.sqrt(np.pi) * sigma_m)


def switch_sigma_eff(jump, sigma_m, sigma_pr):
    """Effective Delta width of a probed frequency switch.

    Combines the probe bandwidth with the matter bandwidth
    min(alpha*sigma_pr, jump): the linear-chirp contribution saturates
    at the total excursion of the switch.
    """
    matter = min(erf_switch_rate(jump, sigma_m) * sigma_pr, jump)
    return np.sqrt(1.0 / sigma_pr ** 2 + matter ** 2)


def fig3_scan(sigma_m, gap0_cm1=2000.0, jump_cm1=200.0, t0=500.0, T=500.0,
              gamma_a=5e-4, gamma_probe=0.25, omega_cm1=None, tau=None,
              n_delta=1201, mode="fdir", omega3=0.0):
    """Quench spectrogram: sc engine -> Delta -> tau map.

    An erf switch of the probed gap (gap0 -> gap0 + jump, centered at
    t0 with timescale sigma_m) is propagated through the semiclassical
    engine and Fourier-mapped to the probe-interaction time tau.
    gamma_probe sets the dephasing of the probed interval; a fast rate
    localizes the interval so each tau column tracks the instantaneous
    gap instead of the settled line.
    """
    scheme = _quench_scheme(gamma_a, gamma_probe)
    prep = PreparedState.from_impulsive_pump(scheme)
    gap0 = cm1_to_radfs(gap0_cm1)
    traj = FrequencyTrajectory.erf_switch(gap0, cm1_to_radfs(jump_cm1),
                                          t0, sigma_m)
    if omega_cm1 is None:
        omega_cm1 = np.linspace(gap0_cm1 - 150.0,
                                gap0_cm1 + jump_cm1 + 150.0, 126)
    omega = cm1_to_radfs(np.asarray(omega_cm1, dtype=float))
    if omega3:
        omega = omega + omega3
    # Delta window: wide enough that the tau resolution ~pi/span stays
    # sharp relative to the switch timescales
    d_span = 0.3
    delta = np.linspace(-d_span, d_span, n_delta)
    if tau is None:
        tau = np.linspace(0.0, 2500.0, 626)
    sg = sc_delta_dispersed(scheme, prep, omega, delta, T,
                            trajectories={("c", 0): traj}, mode=mode,
                            omega3=omega3)
    out = delta_to_tau(sg, tau)
    extra = {"sigma_m_fs": float(sigma_m), "gap0_cm1": float(gap0_cm1),
             "jump_cm1": float(jump_cm1), "t0_fs": float(t0),
             "gamma_a": float(gamma_a), "gamma_probe": float(gamma_probe),
             "signal": "fig3"}
    sg.meta.update(extra)
    out.meta.update(extra)
    return sg, out


def fig4_scan(sigma_m_list=(20.0, 200.0),
              sigma_pr_list=(400.0, 200.0, 50.0, 20.0),
              gap0_cm1=2000.0, jump_cm1=200.0, t0=500.0, T=850.0,
              gamma_a=5e-4, n_delta=1401):
    """Probe-duration survey of the dressed switch profile.

    Resonant probing of an erf switch with the probe centered shortly
    after the switchover, one Delta profile per (sigma_m, sigma_pr)
    pair, all at a common detection time well past the longest probe.
    The long probes reach back through the switch: a fast switch shows
    both the initial and final frequency, a slow one a single swept
    line.
    """
    gap0 = cm1_to_radfs(gap0_cm1)
    jump = cm1_to_radfs(jump_cm1)
    t_det = T + 5.0 * max(sigma_pr_list)
    span = jump + 10.0 / min(sigma_pr_list)
    delta = np.linspace(-0.5 * span, jump + 0.5 * span, n_delta)
    out = []
    for sigma_m in sigma_m_list:
        traj = FrequencyTrajectory.erf_switch(gap0, jump, t0, sigma_m)
        for sigma_pr in sigma_pr_list:
            probe = PulseSpec.gaussian(sigma_fs=sigma_pr,
                                       omega0_cm1=gap0_cm1, center_fs=T)
            tau = np.linspace(max(0.0, T - 8.0 * sigma_pr),
                              min(t_det, T + 8.0 * sigma_pr), 4001)
            kern = matter_tau_kernel(traj, gamma_a, t_det, tau)
            sg = dressed_delta_signal(kern, probe, [gap0], delta)
            prof = SignalGrid(("delta",), (delta,), sg.values[0],
                              meta={"sigma_m_fs": float(sigma_m),
                                    "sigma_pr_fs": float(sigma_pr),
                                    "gap0_cm1": float(gap0_cm1),
                                    "jump_cm1": float(jump_cm1),
                                    "t0_fs": float(t0), "T_fs": float(T),
                                    "gamma_a": float(gamma_a),
                                    "signal": "fig4"})
            out.append(prof)
    return out
