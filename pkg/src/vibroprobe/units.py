"""Unit conventions and conversions.

All internal quantities are expressed in femtoseconds (time) and rad/fs
(angular frequency), with hbar = 1 so that energies are angular
frequencies.  User-facing spectroscopic quantities are wavenumbers
(cm^-1) and femtoseconds; temperatures are kelvin.
"""

from __future__ import annotations

import numpy as np

#: speed of light in cm/fs
C_CM_PER_FS = 2.99792458e-5

#: Boltzmann constant in cm^-1 / K
KB_CM1_PER_K = 0.6950348

TWO_PI = 2.0 * np.pi


def cm1_to_radfs(wavenumber):
    """Convert a wavenumber (cm^-1) to an angular frequency (rad/fs)."""
    return TWO_PI * C_CM_PER_FS * np.asarray(wavenumber, dtype=float)


def radfs_to_cm1(omega):
    """Convert an angular frequency (rad/fs) to a wavenumber (cm^-1)."""
    return np.asarray(omega, dtype=float) / (TWO_PI * C_CM_PER_FS)


def thermal_time(temperature_K: float) -> float:
    """Return beta * hbar in fs for a given temperature.

    With hbar = 1 this is the inverse of the thermal energy k_B T
    expressed as an angular frequency in rad/fs.
    """
    if temperature_K <= 0.0:
        raise ValueError("temperature must be positive")
    return 1.0 / float(cm1_to_radfs(KB_CM1_PER_K * temperature_K))
