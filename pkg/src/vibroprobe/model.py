"""Few-level vibronic model: level schemes, prepared states, baths and
instantaneous-frequency trajectories.

States are grouped into the optically pumped manifold {a}, a higher
vibrational manifold {c} probed by absorption, and a lower manifold {d}
probed by stimulated emission.  Each state nu carries a frequency
omega_nu (rad/fs) and a lifetime-dephasing rate gamma_nu (fs^-1); the
amplitude-level propagator of state nu is exp(-(i*omega_nu+gamma_nu)*t)
and pair dephasing rates follow the sum convention
gamma_{nu,nu'} = gamma_nu + gamma_nu'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .units import thermal_time


def pair_dephasing(gamma_nu: float, gamma_nu2: float) -> float:
    """Dephasing rate of a (nu, nu') coherence: gamma_nu + gamma_nu'."""
    return gamma_nu + gamma_nu2


@dataclass(frozen=True)
class Manifold:
    """A group of vibronic levels probed through a common pathway.

    Attributes:
        omega: state frequencies in rad/fs, shape (n,).
        gamma: lifetime-dephasing rates in fs^-1, shape (n,).
        mu: probe transition dipoles to the a-manifold, shape (n, n_a).
        alpha: probe transition polarizabilities, shape (n, n_a);
            used instead of mu when the probe couples off-resonantly
            (stimulated Raman detection).
    """

    omega: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray | None = None

    def coupling(self, mode: str) -> np.ndarray:
        if mode == "fdir":
            return self.mu
        if mode == "srs":
            if self.alpha is None:
                raise ValueError("manifold has no polarizabilities for SRS")
            return self.alpha
        raise ValueError(f"unknown detection mode {mode!r}")

    @property
    def size(self) -> int:
        return len(self.omega)


def _as_complex_matrix(x, n_rows, n_cols, name):
    arr = np.asarray(x, dtype=complex)
    if arr.shape != (n_rows, n_cols):
        raise ValueError(f"{name} must have shape ({n_rows}, {n_cols})")
    return arr


@dataclass(frozen=True)
class LevelScheme:
    """Complete few-level scheme for the pump-probe signal engines.

    Attributes:
        omega_a / gamma_a: pumped-manifold frequencies and rates.
        mu_ag: pump transition dipoles g -> a, shape (n_a,).
        c: higher probed manifold (absorption pathway), may be empty.
        d: lower probed manifold (emission pathway), may be empty.
    """

    omega_a: np.ndarray
    gamma_a: np.ndarray
    mu_ag: np.ndarray
    c: Manifold
    d: Manifold

    @classmethod
    def build(cls, omega_a, gamma_a, mu_ag,
              omega_c=(), gamma_c=(), mu_c=None, alpha_c=None,
              omega_d=(), gamma_d=(), mu_d=None, alpha_d=None):
        omega_a = np.atleast_1d(np.asarray(omega_a, dtype=float))
        gamma_a = np.atleast_1d(np.asarray(gamma_a, dtype=float))
        mu_ag = np.atleast_1d(np.asarray(mu_ag, dtype=complex))
        n_a = len(omega_a)
        if len(gamma_a) != n_a or len(mu_ag) != n_a:
            raise ValueError("inconsistent a-manifold arrays")

        def manifold(omega, gamma, mu, alpha, label):
            omega = np.atleast_1d(np.asarray(omega, dtype=float))
            gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
            n = len(omega)
            if len(gamma) != n:
                raise ValueError(f"inconsistent {label}-manifold arrays")
            mu = (_as_complex_matrix(mu, n, n_a, f"mu_{label}")
                  if mu is not None else np.zeros((n, n_a), dtype=complex))
            if alpha is not None:
                alpha = _as_complex_matrix(alpha, n, n_a, f"alpha_{label}")
            return Manifold(omega, gamma, mu, alpha)

        return cls(omega_a, gamma_a, mu_ag,
                   manifold(omega_c, gamma_c, mu_c, alpha_c, "c"),
                   manifold(omega_d, gamma_d, mu_d, alpha_d, "d"))

    @property
    def n_a(self) -> int:
        return len(self.omega_a)


@dataclass(frozen=True)
class PreparedState:
    """Reduced density matrix over the a-manifold after the pump.

    rho must be Hermitian; an impulsive pump prepares the rank-one
    matrix rho ~ mu_ag mu_ag^dagger (normalized to unit trace when the
    trace is nonzero).
    """

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be a square matrix")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("rho must be Hermitian")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_impulsive_pump(cls, scheme: LevelScheme,
                            normalize: bool = False) -> "PreparedState":
        rho = np.outer(scheme.mu_ag, scheme.mu_ag.conj())
        tr = np.trace(rho).real
        if normalize and tr > 0.0:
            rho = rho / tr
        return cls(rho)


@dataclass(frozen=True)
class BathSpec:
    """Overdamped Brownian-oscillator bath coupled to a probed gap.

    Attributes:
        lam: reorganization energy lambda in rad/fs.
        Lambda: inverse bath correlation time in fs^-1.
        temperature_K: bath temperature in kelvin.
    """

    lam: float
    Lambda: float
    temperature_K: float

    @property
    def beta_hbar(self) -> float:
        return thermal_time(self.temperature_K)

    @property
    def variance(self) -> float:
        """Stationary variance 2*lambda/(beta*hbar) of the classical
        frequency fluctuation, in (rad/fs)^2."""
        return 2.0 * self.lam / self.beta_hbar


def _erf_antideriv(u):
    """Antiderivative of erf: u*erf(u) + exp(-u^2)/sqrt(pi)."""
    return u * erf(u) + np.exp(-np.square(u)) / np.sqrt(np.pi)


@dataclass(frozen=True)
class FrequencyTrajectory:
    """Time-dependent transition-frequency trajectory omega(t).

    Variants:
        constant:      omega(t) = omega0
        linear_chirp:  omega(t) = omega0 + rate * t
        erf_switch:    omega(t) = omega0 + (jump/2) * [erf(t0/sigma_m)
                                       - erf((t0 - t)/sigma_m)]
        tabulated:     linear interpolation of sampled values

    phase_integral(t1, t2) returns \\int_{t1}^{t2} omega(t') dt' and is
    exactly additive over adjacent intervals for every variant.
    """

    variant: str
    omega0: float = 0.0
    rate: float = 0.0
    jump: float = 0.0
    center: float = 0.0
    sigma_m: float = 0.0
    times: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def constant(cls, omega0):
        return cls("constant", omega0=float(omega0))

    @classmethod
    def linear_chirp(cls, omega0, rate):
        return cls("linear_chirp", omega0=float(omega0), rate=float(rate))

    @classmethod
    def erf_switch(cls, omega0, jump, center, sigma_m):
        if sigma_m <= 0.0:
            raise ValueError("erf_switch requires sigma_m > 0")
        return cls("erf_switch", omega0=float(omega0), jump=float(jump),
                   center=float(center), sigma_m=float(sigma_m))

    @classmethod
    def tabulated(cls, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("tabulated trajectory needs matching 1d arrays")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("tabulated times must be strictly increasing")
        return cls("tabulated", times=times, values=values)

    def frequency_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.variant == "constant":
            return np.broadcast_to(self.omega0, t.shape).copy()
        if self.variant == "linear_chirp":
            return self.omega0 + self.rate * t
        if self.variant == "erf_switch":
            u0 = self.center / self.sigma_m
            return self.omega0 + 0.5 * self.jump * (
                erf(u0) - erf((self.center - t) / self.sigma_m))
        if self.variant == "tabulated":
            return np.interp(t, self.times, self.values)
        raise ValueError(f"unknown trajectory variant {self.variant!r}")

    def _cumulative(self, t):
        """Exact antiderivative Phi(t) with Phi(ref)=arbitrary constant."""
        t = np.asarray(t, dtype=float)
        if self.variant == "constant":
            return self.omega0 * t
        if self.variant == "linear_chirp":
            return self.omega0 * t + 0.5 * self.rate * t * t
        if self.variant == "erf_switch":
            u0 = self.center / self.sigma_m
            base = (self.omega0 + 0.5 * self.jump * erf(u0)) * t
            u = (self.center - t) / self.sigma_m
            return base + 0.5 * self.jump * self.sigma_m * _erf_antideriv(u)
        if self.variant == "tabulated":
            tt, vv = self.times, self.values
            nodes = np.concatenate(
                ([0.0], np.cumsum(0.5 * (vv[1:] + vv[:-1]) * np.diff(tt))))
            k = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, len(tt) - 2)
            t0, t1 = tt[k], tt[k + 1]
            v0, v1 = vv[k], vv[k + 1]
            # local trapezoid of the linear interpolant from node k to t
            dt = t - t0
            slope = (v1 - v0) / (t1 - t0)
            return nodes[k] + v0 * dt + 0.5 * slope * dt * dt
        raise ValueError(f"unknown trajectory variant {self.variant!r}")

    def phase_integral(self, t1, t2):
        """Accumulated phase \\int_{t1}^{t2} omega(t') dt' in rad."""
        return self._cumulative(t2) - self._cumulative(t1)


def sample_ou_trajectory(base: FrequencyTrajectory, bath: BathSpec,
                         times, seed) -> FrequencyTrajectory:
    """Draw one stationary Ornstein-Uhlenbeck frequency trajectory.

    The fluctuation delta-omega(t) has mean zero, stationary variance
    2*lambda/(beta*hbar) and autocovariance proportional to
    exp(-Lambda*|t - t'|); it is added to the deterministic base
    trajectory and returned as a tabulated trajectory.  Uses the exact
    one-step discretization, so statistics are unbiased for any grid.
    """
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(bath.variance)
    x = np.empty(len(times))
    x[0] = sigma * rng.standard_normal()
    decay = np.exp(-bath.Lambda * np.diff(times))
    kicks = sigma * np.sqrt(1.0 - decay ** 2) * rng.standard_normal(len(decay))
    for i, (d, k) in enumerate(zip(decay, kicks)):
        x[i + 1] = x[i] * d + k
    return FrequencyTrajectory.tabulated(times, base.frequency_at(times) + x)
