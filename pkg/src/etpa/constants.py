"""Physical constants (CODATA 2018 exact values) and unit helpers."""

import math

PLANCK = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 2.99792458e8  # m/s
AVOGADRO = 6.02214076e23  # 1/mol

NM = 1e-9
UM = 1e-6
FS = 1e-15


def omega_from_wavelength(wavelength_nm):
    """Angular frequency (rad/s) of a vacuum wavelength given in nm."""
    return 2.0 * math.pi * SPEED_OF_LIGHT / (wavelength_nm * NM)


def wavelength_from_omega(omega):
    """Vacuum wavelength in nm of an angular frequency in rad/s."""
    return 2.0 * math.pi * SPEED_OF_LIGHT / omega / NM


def bandwidth_to_omega(sigma_nm, center_nm):
    """Convert a wavelength bandwidth to angular frequency at ``center_nm``.

    sigma_omega = 2 pi c sigma_lambda / lambda^2, evaluated at the band center.
    """
    return 2.0 * math.pi * SPEED_OF_LIGHT * (sigma_nm * NM) / (center_nm * NM) ** 2
