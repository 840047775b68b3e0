"""Pulse envelope definitions shared by all signal engines.

Fourier convention: E(z) = \\int dt E(t) exp(+i z t).  For the Gaussian
envelope this transform is an entire function of the complex argument z,
which the sum-over-states engine exploits by evaluating envelopes at
complex frequencies such as omega_a - i*gamma_a.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import cm1_to_radfs

_KINDS = ("gaussian", "impulsive", "cw_narrowband")


@dataclass(frozen=True)
class PulseSpec:
    """Specification of a single laser pulse.

    Attributes:
        kind: one of "gaussian", "impulsive", "cw_narrowband".
        amplitude: peak field amplitude (arbitrary units).
        omega0: carrier angular frequency in rad/fs.
        sigma: Gaussian envelope duration in fs (ignored otherwise).
        center: envelope center time in fs.
    """

    kind: str
    amplitude: float = 1.0
    omega0: float = 0.0
    sigma: float = 0.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0.0:
            raise ValueError("gaussian pulse requires sigma > 0")

    @classmethod
    def gaussian(cls, sigma_fs, omega0_cm1=0.0, center_fs=0.0, amplitude=1.0):
        return cls("gaussian", amplitude, float(cm1_to_radfs(omega0_cm1)),
                   float(sigma_fs), float(center_fs))

    @classmethod
    def impulsive(cls, center_fs=0.0, amplitude=1.0):
        return cls("impulsive", amplitude, 0.0, 0.0, float(center_fs))

    @classmethod
    def narrowband(cls, omega_cm1, amplitude=1.0):
        return cls("cw_narrowband", amplitude, float(cm1_to_radfs(omega_cm1)))

    def envelope_time(self, t):
        """Complex field E(t) on a real time grid.

        Only defined for the Gaussian kind; impulsive and narrowband
        pulses are symbolic objects handled analytically by the engines.
        """
        if self.kind != "gaussian":
            raise ValueError(f"{self.kind} pulse has no sampled time envelope")
        t = np.asarray(t, dtype=float)
        env = np.exp(-((t - self.center) ** 2) / (2.0 * self.sigma ** 2))
        return self.amplitude * env * np.exp(-1j * self.omega0 * t)

    def envelope_freq(self, z):
        """Analytic Fourier transform evaluated at complex frequency z."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "gaussian":
            d = z - self.omega0
            return (self.amplitude * self.sigma * np.sqrt(2.0 * np.pi)
                    * np.exp(-0.5 * (self.sigma * d) ** 2)
                    * np.exp(1j * d * self.center))
        if self.kind == "impulsive":
            return self.amplitude * np.exp(1j * (z - self.omega0) * self.center)
        raise ValueError("cw_narrowband pulse has no pointwise spectrum")
