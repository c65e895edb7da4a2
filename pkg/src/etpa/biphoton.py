"""Joint spectral amplitude on a square detuning grid, and its reductions.

Amplitude matrices are indexed ``f[s, i]``: rows follow the signal frequency,
columns the idler frequency. All integrals use the midpoint rule on the
uniform grid, so a sum of ``|f|^2`` times ``cell_area`` is the L2 norm.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import (
    bandwidth_to_omega,
    omega_from_wavelength,
    wavelength_from_omega,
)
from .dispersion import phase_matching_function
from .errors import Degenerate

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
DEFAULT_POINTS = 512
DEFAULT_BANDPASS_NM = 90.0


@dataclass(frozen=True)
class PumpSpec:
    lambda_p0: float  # nm
    sigma_p: float  # nm, Gaussian sigma of the amplitude envelope

    def __post_init__(self):
        if not self.lambda_p0 > 0:
            raise ValueError("pump wavelength lambda_p0 must be positive")
        if not self.sigma_p > 0:
            raise ValueError("pump bandwidth sigma_p must be positive")

    @property
    def omega_p0(self):
        return omega_from_wavelength(self.lambda_p0)

    @property
    def sigma_omega(self):
        return bandwidth_to_omega(self.sigma_p, self.lambda_p0)


@dataclass(frozen=True)
class SpectralGrid:
    """Cell-centred uniform grid of detunings Omega = omega - omega_0 on both axes."""

    n_points: int
    center_omega0: float  # rad/s
    half_span: float  # rad/s

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError("grid needs n_points >= 16")
        if not (self.center_omega0 > 0 and self.half_span > 0):
            raise ValueError("grid centre and half span must be positive")
        if self.half_span >= self.center_omega0:
            raise ValueError("half span reaches zero frequency")

    @property
    def spacing(self):
        return 2.0 * self.half_span / self.n_points

    @property
    def cell_area(self):
        return self.spacing**2

    @property
    def detuning(self):
        return (np.arange(self.n_points) + 0.5) * self.spacing - self.half_span

    @property
    def omega(self):
        return self.center_omega0 + self.detuning

    @property
    def wavelength_nm(self):
        return wavelength_from_omega(self.omega)

    def mesh(self):
        """Absolute (omega_s, omega_i) matrices with ``ij`` indexing."""
        w = self.omega
        return np.meshgrid(w, w, indexing="ij")

    def same_as(self, other):
        return (
            self.n_points == other.n_points
            and self.center_omega0 == other.center_omega0
            and self.half_span == other.half_span
        )


def default_grid(pump, n_points=DEFAULT_POINTS, bandpass_nm=DEFAULT_BANDPASS_NM):
    """Grid centred on omega_p0/2 spanning the larger of 3 sigma_omega and half the bandpass."""
    center = 0.5 * pump.omega_p0
    window = bandwidth_to_omega(0.5 * bandpass_nm, 2.0 * pump.lambda_p0)
    return SpectralGrid(n_points, center, max(3.0 * pump.sigma_omega, window))


@dataclass(frozen=True, eq=False)
class BiphotonState:
    grid: SpectralGrid
    amplitude: np.ndarray
    pair_rate: float = 1.0  # pairs/s carried by the unit-norm amplitude

    def __post_init__(self):
        n = self.grid.n_points
        if self.amplitude.shape != (n, n):
            raise ValueError(f"amplitude shape {self.amplitude.shape} does not match grid {n}x{n}")
        if self.pair_rate < 0:
            raise ValueError("pair_rate must be non-negative")

    @property
    def norm(self):
        """Discrete L2 norm sum |f|^2 dOmega^2 (1 for a freshly built state)."""
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.cell_area)

    @property
    def total_rate(self):
        return self.norm * self.pair_rate

    def with_pair_rate(self, pair_rate):
        return replace(self, pair_rate=float(pair_rate))

    def scaled(self, factor):
        """Amplitude multiplied by a constant (a flat linear loss)."""
        return replace(self, amplitude=self.amplitude * factor)


def pump_envelope(omega_s, omega_i, pump):
    detune = np.asarray(omega_s) + np.asarray(omega_i) - pump.omega_p0
    return np.exp(-(detune**2) / (2.0 * pump.sigma_omega**2))


def normalized(grid, amplitude, pair_rate=1.0):
    amplitude = np.asarray(amplitude, dtype=complex)
    norm = np.sum(np.abs(amplitude) ** 2) * grid.cell_area
    if norm <= 0:
        raise ValueError("cannot normalise an all-zero amplitude")
    return BiphotonState(grid, amplitude / math.sqrt(norm), float(pair_rate))


def build_jsa(pump, crystal, grid, pair_rate=None, source=None):
    """f = pump envelope x phase matching, L2-normalised on ``grid``.

    The pair rate comes from ``pair_rate`` if given, else from the photon
    budget of ``source`` (a ``budget.SourceBudget``), else 1.
    """
    ws, wi = grid.mesh()
    amp = pump_envelope(ws, wi, pump) * phase_matching_function(ws, wi, crystal)
    if pair_rate is None:
        if source is not None:
            from .budget import photon_budget

            pair_rate = photon_budget(source).R_in
        else:
            pair_rate = 1.0
    return normalized(grid, amp, pair_rate)


def jsi(state):
    """Pairs/s per bin; sums to ``state.total_rate``."""
    return np.abs(state.amplitude) ** 2 * state.grid.cell_area * state.pair_rate


def marginals(state):
    """(signal, idler) single-photon spectra in pairs/s per bin."""
    j = jsi(state)
    return j.sum(axis=1), j.sum(axis=0)


def _moments(state):
    j = np.abs(state.amplitude) ** 2
    total = j.sum()
    if total <= 0:
        raise Degenerate("JSI is identically zero")
    x = state.grid.detuning
    ps, pi_ = j.sum(axis=1) / total, j.sum(axis=0) / total
    ms, mi = ps @ x, pi_ @ x
    dx = x - ms
    dy = x - mi
    cxx = ps @ dx**2
    cyy = pi_ @ dy**2
    cxy = dx @ (j / total) @ dy
    return cxx, cyy, cxy


def antidiagonal_width(state):
    """FWHM-equivalent width (rad/s) of the JSI projected on Omega = ws - wi."""
    cxx, cyy, cxy = _moments(state)
    return FWHM_PER_SIGMA * math.sqrt(max(cxx + cyy - 2.0 * cxy, 0.0))


def tilt_angle(state, rel_tol=1e-9):
    """Rotation (degrees) of the JSI's major principal axis away from the anti-diagonal.

    The anti-diagonal points along (1, -1) in (Omega_s, Omega_i). A positive
    angle means the major axis is turned clockwise from it, i.e. the band is
    stretched more along the idler axis than the signal axis. Swapping the
    axes flips the sign. Result lies in (-90, 90].
    """
    cxx, cyy, cxy = _moments(state)
    spread = math.hypot(cxx - cyy, 2.0 * cxy)
    if spread <= rel_tol * (cxx + cyy):
        raise Degenerate("JSI covariance is isotropic; tilt undefined")
    major = 0.5 * math.degrees(math.atan2(2.0 * cxy, cxx - cyy))
    tilt = -45.0 - major
    while tilt <= -90.0:
        tilt += 180.0
    while tilt > 90.0:
        tilt -= 180.0
    return tilt


def bandpass_window(grid, center_nm, full_width_nm):
    """1-D top-hat transmission over the grid's per-photon wavelengths."""
    lam = grid.wavelength_nm
    half = 0.5 * full_width_nm
    return ((lam >= center_nm - half) & (lam <= center_nm + half)).astype(float)


def apply_bandpass(state, center_nm, full_width_nm):
    """Separable rectangular filter on both photons; no renormalisation."""
    if not full_width_nm > 0:
        raise ValueError("bandpass full width must be positive")
    w = bandpass_window(state.grid, center_nm, full_width_nm)
    return replace(state, amplitude=state.amplitude * np.outer(w, w))


def exchange_asymmetry(state):
    """A = (1/4) int |f - f^T|^2 / ((1/2) int |f|^2), equal to R_C(0) / R_C(inf).

    Ranges over [0, 2]: 0 for an exchange-symmetric state, 2 for an
    antisymmetric one.
    """
    f = state.amplitude
    n2 = np.sum(np.abs(f) ** 2)
    if n2 <= 0:
        raise ValueError("exchange asymmetry of a zero state")
    return float(0.25 * np.sum(np.abs(f - f.T) ** 2) / (0.5 * n2))


def with_total_rate(state, rate):
    """Rescale ``pair_rate`` so the state's bin sum equals ``rate``."""
    norm = state.norm
    if norm <= 0:
        raise ValueError("state carries no pairs")
    return state.with_pair_rate(rate / norm)


def gaussian_state(grid, sigma_sum, sigma_diff, pair_rate=1.0, center=(0.0, 0.0)):
    """Separable Gaussian JSA in sum/difference coordinates (test and demo helper).

    |f|^2 has standard deviation ``sigma_diff`` along Omega_s - Omega_i and
    ``sigma_sum`` along Omega_s + Omega_i.
    """
    x = grid.detuning
    xs, xi = np.meshgrid(x - center[0], x - center[1], indexing="ij")
    amp = np.exp(-((xs + xi) ** 2) / (4.0 * sigma_sum**2) - (xs - xi) ** 2 / (4.0 * sigma_diff**2))
    return normalized(grid, amp, pair_rate)


def state_metadata(state, pump=None, crystal=None):
    """JSON-ready description of a state (grid, norms, optional source parameters)."""
    g = state.grid
    meta = {
        "grid": {
            "n_points": g.n_points,
            "center_omega0_rad_s": g.center_omega0,
            "half_span_rad_s": g.half_span,
            "spacing_rad_s": g.spacing,
            "center_wavelength_nm": wavelength_from_omega(g.center_omega0),
        },
        "norm": state.norm,
        "pair_rate": state.pair_rate,
        "total_rate_pairs_s": state.total_rate,
    }
    if pump is not None:
        meta["pump"] = {
            "lambda_p0_nm": pump.lambda_p0,
            "sigma_p_nm": pump.sigma_p,
            "omega_p0_rad_s": pump.omega_p0,
            "sigma_omega_rad_s": pump.sigma_omega,
        }
    if crystal is not None:
        meta["crystal"] = {
            "process": crystal.process.value,
            "length_m": crystal.length,
            "poling_period_m": crystal.poling_period,
            "axes": [crystal.pump_axis, crystal.signal_axis, crystal.idler_axis],
        }
    return meta
