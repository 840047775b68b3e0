"""Semiclassical stochastic-bath engine.

The detected coherence gap is allowed to move in time, either along a
prescribed deterministic trajectory (quenches, chirps), along sampled
Ornstein-Uhlenbeck realizations of an overdamped Brownian bath, or
through the corresponding second-cumulant lineshape taken in closed
form.  All protocols share the two pathway kernels of the SOS engine;
only the coherence-interval phase differs:

    constant gap:   exp(-i * gap * s)
    trajectory:     exp(-i * int_{tau3}^{tau3+s} Omega(t') dt')
    cumulant:       exp(-i * gap * s - g(s)),

with s = t - tau3 the interval between the two probe interactions and
g(s) the stationary-interval Kubo lineshape of the bath.  The classical
Monte-Carlo average over OU trajectories reproduces exp(-Re g(s))
exactly, which is what ``classical=True`` selects in the cumulant
protocols.
"""

from __future__ import annotations

import numpy as np

from .grids import SignalGrid
from .model import BathSpec, LevelScheme, PreparedState
from .sos import _coherence_terms, _detection_shift, _pathways


# ---------------------------------------------------------------------------
# bath statistics


def interval_kubo_g(bath: BathSpec, s, classical: bool = False):
    """Second-cumulant lineshape g(s) over a stationary interval.

    g(s) = (A / Lambda^2) * (exp(-Lambda*s) + Lambda*s - 1) with the
    high-temperature amplitude A = 2*lambda/(beta*hbar) - i*lambda*Lambda.
    ``classical=True`` keeps only the real (classical fluctuation) part,
    which is exact for the sampled OU process.
    """
    s = np.asarray(s, dtype=float)
    amp = 2.0 * bath.lam / bath.beta_hbar
    if not classical:
        amp = amp - 1j * bath.lam * bath.Lambda
    return amp / bath.Lambda ** 2 * (np.exp(-bath.Lambda * s)
                                     + bath.Lambda * s - 1.0)


def lineshape_g(bath: BathSpec, T, t):
    """Two-time lineshape g(T, t) for evolution started at the probe.

    g(T, t) = 4*lambda*T / (beta*hbar*Lambda)
            + (A / Lambda^2) * [exp(-Lambda*t)
                                + (Lambda*(t - T) - 1) * exp(-Lambda*T)]

    so that g(T, T) = 4*lambda*T / (beta*hbar*Lambda).
    """
    T = np.asarray(T, dtype=float)
    t = np.asarray(t, dtype=float)
    amp = 2.0 * bath.lam / bath.beta_hbar - 1j * bath.lam * bath.Lambda
    return (4.0 * bath.lam * T / (bath.beta_hbar * bath.Lambda)
            + amp / bath.Lambda ** 2 * (np.exp(-bath.Lambda * t)
                                        + (bath.Lambda * (t - T) - 1.0)
                                        * np.exp(-bath.Lambda * T)))


def brownian_spectral_density(bath: BathSpec, omega):
    """Imaginary part C''(w) = 2*lambda*w*Lambda / (w^2 + Lambda^2)."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * bath.lam * omega * bath.Lambda / (omega ** 2
                                                   + bath.Lambda ** 2)


def bath_spectrum(bath: BathSpec, omega):
    """Full fluctuation spectrum C(w) = [1 + coth(beta*hbar*w/2)] C''(w).

    Satisfies detailed balance C(w) = exp(beta*hbar*w) * C(-w); the
    w -> 0 limit is taken analytically.
    """
    omega = np.asarray(omega, dtype=float)
    half = 0.5 * bath.beta_hbar * omega
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = 1.0 + 1.0 / np.tanh(half)
    cpp = brownian_spectral_density(bath, omega)
    out = factor * cpp
    zero = np.isclose(omega, 0.0)
    if np.any(zero):
        # [1 + coth(x)] * w -> 2/(beta*hbar) * ... expanded at w = 0
        out = np.where(zero, 4.0 * bath.lam * bath.Lambda
                       / (bath.beta_hbar * bath.Lambda ** 2), out)
    return out


# ---------------------------------------------------------------------------
# deterministic-trajectory protocol


def _sc_at_step(scheme, prepared, omega, om_eff, delta, T, trajectories,
                mode, dt, tau3_max, s_max):
    t = np.arange(0.0, tau3_max + s_max + dt, dt)
    n3 = int(np.searchsorted(t, tau3_max, side="right"))
    tau3 = t[:n3]
    wts_tau = np.full(n3, dt)
    wts_tau[0] *= 0.5
    wts_tau[-1] *= 0.5

    kernel = np.exp(-1j * np.outer(tau3 - T, delta))
    total = np.zeros((len(omega), len(delta)), dtype=complex)
    for branch in _pathways(scheme, mode):
        for (weight, coh, g_pair, gap, width, a, ap, j) in \
                _coherence_terms(scheme, prepared.rho, branch):
            traj = (trajectories or {}).get((branch["label"], j))
            phi = gap * t if traj is None else traj._cumulative(t)
            gap_end = gap if traj is None \
                else float(traj.frequency_at(t[-1]))
            line_end = 1.0 / (width - 1j * (om_eff - gap_end))
            # reversed cumulative integral R(t) = int_t^{t_cut} f dt',
            # closed beyond the cut with the settled (constant) gap.
            # The damping exponent is referenced to the chunk start so
            # exp(width * t) never overflows for strong dephasing.
            max_exp = 30.0
            chunk = n3 if width * dt * n3 <= max_exp \
                else max(1, int(max_exp / (width * dt)))
            ext = len(t) - n3 if width * dt * (len(t) - n3) <= max_exp \
                else max(1, int(max_exp / (width * dt)))
            inner = np.empty((n3, len(om_eff)), dtype=complex)
            for i0 in range(0, n3, chunk):
                i1 = min(i0 + chunk, n3)
                j1 = min(len(t), i1 + ext)
                tc = t[i0:j1]
                f = np.exp(1j * np.multiply.outer(tc, om_eff)
                           - (1j * phi[i0:j1]
                              + width * (tc - tc[0]))[:, None])
                rev = np.zeros_like(f)
                seg = 0.5 * dt * (f[1:] + f[:-1])
                rev[:-1] = np.cumsum(seg[::-1], axis=0)[::-1]
                rev += (f[-1] * line_end)[None, :]
                n_loc = i1 - i0
                inner[i0:i1] = rev[:n_loc] * np.exp(
                    (1j * phi[i0:i1] + width * (t[i0:i1] - tc[0]))[:, None]
                    - 1j * np.multiply.outer(t[i0:i1], om_eff))
            pre = weight * np.exp(-(1j * coh + g_pair) * tau3) * wts_tau
            total += np.einsum("k,kj,kd->jd", pre, inner, kernel,
                               optimize=True)
            # pre-probe tail beyond tau3_max, where the interval integral
            # has reached its asymptotic Lorentzian
            t_end = tau3[-1]
            tail = np.exp(-(1j * coh + g_pair) * t_end) \
                * np.exp(-1j * (t_end - T) * delta) \
                / (g_pair + 1j * (coh + delta))
            total += weight * np.outer(line_end, tail)
    return 1j * total


def sc_delta_dispersed(scheme: LevelScheme, prepared: PreparedState,
                       omega, delta, T, trajectories=None, mode="fdir",
                       omega3=0.0, dt=None, tau3_max=None, s_max=None,
                       richardson=True):
    """Delta-dispersed amplitude with moving detection gaps.

    Same observable as ``loop_delta_dispersed`` but evaluated on a
    single absolute time grid: the interval integral over t >= tau3 is
    a reversed cumulative integral of exp(i*w_eff*t - i*Phi(t) - G*t),
    with Phi the exact phase antiderivative of the gap trajectory, so
    the cost is one cumulative pass per (term, omega) instead of a
    nested quadrature.  ``trajectories`` maps ("c"|"d", j) to the gap
    trajectory of the probed state; missing keys keep the static gap.
    A step-halving Richardson pass refines the quadrature.
    """
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)

    g_min = scheme.gamma_a.min()
    widths = [man.gamma.min() + g_min for man in (scheme.c, scheme.d)
              if man.size]
    if tau3_max is None:
        tau3_max = T + 4.0 / max(2.0 * g_min, 1e-6)
    if s_max is None:
        s_max = 8.0 / max(min(widths), 1e-6)
    if dt is None:
        dt = 2.0 * np.pi / max(np.abs(omega).max(), 1e-3) / 20.0
    args = (scheme, prepared, omega, om_eff, delta, T, trajectories, mode)
    total = _sc_at_step(*args, dt, tau3_max, s_max)
    meta = {"T_fs": float(T), "mode": mode, "signal": "delta",
            "dt_fs": float(dt)}
    if richardson:
        fine = _sc_at_step(*args, dt / 2.0, tau3_max, s_max)
        meta["refinement_delta"] = float(np.max(np.abs(fine - total)))
        total = (4.0 * fine - total) / 3.0
    return SignalGrid(("omega", "delta"), (omega, delta), total,
                      meta=meta)


# ---------------------------------------------------------------------------
# cumulant protocol


def _cumulant_line(om_det, gap, width, bath, classical, s_max, dt,
                   conj_g=False):
    """Interval integral int_0^smax ds exp(i*(w-gap)*s - width*s - g(s)).

    ``conj_g`` selects the conjugate lineshape exp(-g*(s)) carried by
    the emission pathway.
    """
    s = np.arange(0.0, s_max + dt, dt)
    g = interval_kubo_g(bath, s, classical)
    if conj_g:
        g = np.conj(g)
    damp = np.exp(-width * s - g)
    f = np.exp(1j * np.multiply.outer(om_det - gap, s)) * damp[None, :]
    return np.trapezoid(f, s, axis=1)


def sc_cumulant_delta_dispersed(scheme: LevelScheme, prepared: PreparedState,
                                omega, delta, T, bath: BathSpec,
                                mode="fdir", omega3=0.0, classical=False,
                                s_max=None, dt=None):
    """Delta-dispersed amplitude with second-cumulant bath dephasing.

    The coherence-interval Lorentzian of the SOS closed form is replaced
    by the numerically integrated cumulant line; the pre-probe coherence
    and the Delta dependence stay analytic.
    """
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)
    if s_max is None:
        g_floor = max(scheme.gamma_a.min(), 1e-6)
        s_max = 8.0 / g_floor
    if dt is None:
        dt = min(0.05 / max(np.sqrt(bath.variance), 1e-6),
                 2.0 * np.pi / max(np.abs(om_eff).max(), 1e-3) / 20.0)
    total = np.zeros((len(omega), len(delta)), dtype=complex)
    for branch in _pathways(scheme, mode):
        conj_g = branch["label"] == "d"
        for (weight, coh, g_pair, gap, width, a, ap, j) in \
                _coherence_terms(scheme, prepared.rho, branch):
            line = _cumulant_line(om_eff, gap, width, bath, classical,
                                  s_max, dt, conj_g=conj_g)
            dterm = 1.0 / (g_pair + 1j * (delta + coh))
            total += weight * np.outer(line, dterm)
    total *= 1j * np.exp(1j * delta * T)[None, :]
    return SignalGrid(("omega", "delta"), (omega, delta), total,
                      meta={"T_fs": float(T), "mode": mode,
                            "signal": "delta", "dt_fs": float(dt)})


def sc_cumulant_impulsive(scheme: LevelScheme, prepared: PreparedState,
                          omega, T, bath: BathSpec, mode="fdir",
                          omega3=0.0, classical=False, s_max=None, dt=None):
    """Impulsive-probe frequency-gated signal under cumulant dephasing.

    With an impulsive probe the Delta integral collapses onto the probe
    arrival, so the signal is the pre-probe coherence at T times the
    cumulant line:

        S(w) = Im[ i * sum weight * exp(-(i*coh + g_pair) * T)
                       * int_0^inf ds exp(i*(w_eff - gap)*s
                                          - width*s - g(s)) ]
    """
    omega = np.asarray(omega, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)
    if s_max is None:
        g_floor = max(scheme.gamma_a.min(), 1e-6)
        s_max = 8.0 / g_floor
    if dt is None:
        dt = min(0.05 / max(np.sqrt(bath.variance), 1e-6),
                 2.0 * np.pi / max(np.abs(om_eff).max(), 1e-3) / 20.0)
    total = np.zeros(len(omega), dtype=complex)
    for branch in _pathways(scheme, mode):
        conj_g = branch["label"] == "d"
        for (weight, coh, g_pair, gap, width, a, ap, j) in \
                _coherence_terms(scheme, prepared.rho, branch):
            line = _cumulant_line(om_eff, gap, width, bath, classical,
                                  s_max, dt, conj_g=conj_g)
            total += weight * np.exp(-(1j * coh + g_pair) * T) * line
    return SignalGrid(("omega",), (omega,), np.imag(1j * total),
                      meta={"T_fs": float(T), "mode": mode,
                            "signal": "freq_gated_cumulant"})


# ---------------------------------------------------------------------------
# Monte-Carlo protocol


def _ou_phases(bath, s, n_traj, rng):
    """Accumulated fluctuation phases Psi[n, i] = int_0^{s_i} dw_n dt'.

    Draws stationary OU paths with the exact one-step update and
    integrates them by the trapezoid rule on the interval grid.
    """
    sigma = np.sqrt(bath.variance)
    decay = np.exp(-bath.Lambda * np.diff(s))
    kick = sigma * np.sqrt(1.0 - decay ** 2)
    x = np.empty((n_traj, len(s)))
    x[:, 0] = sigma * rng.standard_normal(n_traj)
    noise = rng.standard_normal((n_traj, len(decay)))
    for i in range(len(decay)):
        x[:, i + 1] = x[:, i] * decay[i] + kick[i] * noise[:, i]
    psi = np.zeros_like(x)
    np.cumsum(0.5 * (x[:, 1:] + x[:, :-1]) * np.diff(s)[None, :],
              axis=1, out=psi[:, 1:])
    return psi


def mc_impulsive(scheme: LevelScheme, prepared: PreparedState, omega, T,
                 bath: BathSpec, n_traj=1000, seed=0, mode="fdir",
                 omega3=0.0, s_max=None, dt=None):
    """Monte-Carlo average of the impulsive-probe signal over OU baths.

    Each trajectory multiplies every detection gap by the same sampled
    fluctuation phase exp(-i*Psi(s)); the per-trajectory signals are
    evaluated in one matrix product and reduced to mean and standard
    error, so the ensemble average converges to the classical cumulant
    result of ``sc_cumulant_impulsive(..., classical=True)``.
    """
    omega = np.asarray(omega, dtype=float)
    om_eff = omega - _detection_shift(mode, omega3)
    if s_max is None:
        g_floor = max(scheme.gamma_a.min(), 1e-6)
        s_max = 8.0 / g_floor
    if dt is None:
        dt = min(0.05 / max(np.sqrt(bath.variance), 1e-6),
                 2.0 * np.pi / max(np.abs(om_eff).max(), 1e-3) / 20.0)
    s = np.arange(0.0, s_max + dt, dt)
    wts = np.full(len(s), dt)
    wts[0] *= 0.5
    wts[-1] *= 0.5

    # deterministic part of the interval integrand, summed over terms
    e_det = np.zeros((len(s), len(omega)), dtype=complex)
    for branch in _pathways(scheme, mode):
        for (weight, coh, g_pair, gap, width, a, ap, j) in \
                _coherence_terms(scheme, prepared.rho, branch):
            pre = weight * np.exp(-(1j * coh + g_pair) * T)
            e_det += pre * np.exp(1j * np.multiply.outer(s, om_eff)
                                  - ((1j * gap + width) * s)[:, None])
    e_det *= wts[:, None]

    rng = np.random.default_rng(seed)
    psi = _ou_phases(bath, s, int(n_traj), rng)
    per_traj = np.imag(1j * (np.exp(-1j * psi) @ e_det))  # (n_traj, omega)
    mean = per_traj.mean(axis=0)
    stderr = per_traj.std(axis=0, ddof=1) / np.sqrt(n_traj)
    return SignalGrid(("omega",), (omega,), mean, stderr=stderr,
                      meta={"T_fs": float(T), "mode": mode,
                            "n_traj": int(n_traj), "seed": int(seed),
                            "signal": "freq_gated_mc"})
