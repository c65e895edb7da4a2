"""Refractive indices, collinear phase mismatch and poling period for PPKTP.

Index models use the Sellmeier form

    n^2 = A + sum_j B_j / (1 - C_j / lambda^2) - D lambda^2      (lambda in um)

with coefficients listed as ``[A, B_1, C_1, ..., B_m, C_m, D]``.
"""

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .constants import NM, SPEED_OF_LIGHT, UM
from .datafiles import data_path, parse_float_list
from .errors import NoRoot, OutOfRange

SELLMEIER_FILE = "ktp_sellmeier.ini"
PERIOD_BRACKET = (0.5 * UM, 100.0 * UM)


class Process(str, Enum):
    TYPE0 = "TYPE0"
    TYPEII = "TYPEII"


@dataclass(frozen=True)
class IndexModel:
    axis_label: str
    coefficients: tuple
    valid_range: tuple  # nm
    provenance: str = ""

    def __post_init__(self):
        if len(self.coefficients) < 4 or len(self.coefficients) % 2:
            raise ValueError(
                f"axis {self.axis_label}: expected A, (B, C) pairs and D, "
                f"got {len(self.coefficients)} coefficients"
            )
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ValueError(f"axis {self.axis_label}: bad valid range {self.valid_range}")

    @property
    def poles(self):
        c = self.coefficients
        return [(c[j], c[j + 1]) for j in range(1, len(c) - 1, 2)]


def _check_range(wavelength_nm, model):
    lam = np.asarray(wavelength_nm, dtype=float)
    lo, hi = model.valid_range
    bad = ~((lam >= lo) & (lam <= hi))
    if np.any(bad):
        worst = lam[bad].flat[0] if lam.ndim else float(lam)
        raise OutOfRange(
            f"wavelength {worst:.3f} nm outside {model.axis_label}-axis "
            f"validity window [{lo:g}, {hi:g}] nm"
        )
    return lam


def _n_squared(lam_um, model):
    a, d = model.coefficients[0], model.coefficients[-1]
    n2 = a - d * lam_um**2
    for b, c in model.poles:
        n2 = n2 + b / (1.0 - c / lam_um**2)
    return n2


def refractive_index(wavelength_nm, model):
    """Phase index n(lambda); accepts scalars or arrays.

    Raises OutOfRange instead of extrapolating past ``model.valid_range``.
    """
    lam = _check_range(wavelength_nm, model)
    n = np.sqrt(_n_squared(lam * 1e-3, model))
    return float(n) if n.ndim == 0 else n


def group_index(wavelength_nm, model):
    """Analytic group index n_g = n - lambda dn/dlambda."""
    lam = _check_range(wavelength_nm, model)
    lu = lam * 1e-3
    n = np.sqrt(_n_squared(lu, model))
    dn2 = -2.0 * model.coefficients[-1] * lu
    for b, c in model.poles:
        dn2 = dn2 - 2.0 * b * c / (lu**3 * (1.0 - c / lu**2) ** 2)
    ng = n - lu * dn2 / (2.0 * n)
    return float(ng) if ng.ndim == 0 else ng


def wavevector(omega, model):
    """k = n(omega) omega / c in rad/m."""
    omega = np.asarray(omega, dtype=float)
    lam_nm = 2.0 * math.pi * SPEED_OF_LIGHT / omega / NM
    return refractive_index(lam_nm, model) * omega / SPEED_OF_LIGHT


def inverse_group_velocity(omega, model):
    """dk/domega = n_g / c in s/m."""
    omega = np.asarray(omega, dtype=float)
    lam_nm = 2.0 * math.pi * SPEED_OF_LIGHT / omega / NM
    return group_index(lam_nm, model) / SPEED_OF_LIGHT


def load_index_models(path=None):
    """Read every axis section of a Sellmeier data file into ``{axis: IndexModel}``."""
    path = data_path(SELLMEIER_FILE) if path is None else path
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"Sellmeier data file not found: {path}")
    models = {}
    for name in parser.sections():
        sec = parser[name]
        if "coefficients" not in sec:
            continue
        lo, hi = parse_float_list(sec["valid_range_nm"])
        model = IndexModel(
            axis_label=sec.get("axis", name.split(".")[-1]),
            coefficients=tuple(parse_float_list(sec["coefficients"])),
            valid_range=(lo, hi),
            provenance=sec.get("citation", ""),
        )
        models[model.axis_label] = model
    if not models:
        raise ValueError(f"no index models found in {path}")
    return models


@dataclass(frozen=True)
class CrystalSpec:
    length: float  # m
    poling_period: float  # m
    process: Process
    pump_axis: str
    signal_axis: str
    idler_axis: str
    index_models: dict = field(repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "process", Process(self.process))
        if not self.length > 0:
            raise ValueError("crystal length must be positive")
        if not self.poling_period > 0:
            raise ValueError("poling period must be positive")
        axes = (self.pump_axis, self.signal_axis, self.idler_axis)
        if self.process is Process.TYPE0 and len(set(axes)) != 1:
            raise ValueError(f"TYPE0 needs one common axis, got {axes}")
        if self.process is Process.TYPEII and self.signal_axis == self.idler_axis:
            raise ValueError("TYPEII needs orthogonal signal and idler axes")
        missing = [a for a in axes if a not in self.index_models]
        if missing:
            raise ValueError(f"no index model for axis {missing[0]!r}")

    def model(self, role):
        return self.index_models[getattr(self, f"{role}_axis")]


# Type-II default: pump and signal polarised along y, idler along z.
DEFAULT_AXES = {Process.TYPE0: ("z", "z", "z"), Process.TYPEII: ("y", "y", "z")}


def ktp_crystal(process, length=10e-3, poling_period=10e-6, axes=None, models=None):
    """PPKTP crystal with the shipped Sellmeier sets and default axis assignment."""
    process = Process(process)
    models = load_index_models() if models is None else models
    pump, signal, idler = axes or DEFAULT_AXES[process]
    return CrystalSpec(length, poling_period, process, pump, signal, idler, models)


def phase_mismatch(omega_s, omega_i, crystal):
    """Collinear mismatch k_p(ws+wi) - k_s(ws) - k_i(wi) - 2 pi / Lambda, rad/m."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    dk = (
        wavevector(omega_s + omega_i, crystal.model("pump"))
        - wavevector(omega_s, crystal.model("signal"))
        - wavevector(omega_i, crystal.model("idler"))
        - 2.0 * math.pi / crystal.poling_period
    )
    return float(dk) if np.ndim(dk) == 0 else dk


def sinc(x):
    """sin(x)/x with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def phase_matching_function(omega_s, omega_i, crystal):
    return sinc(0.5 * crystal.length * np.asarray(phase_mismatch(omega_s, omega_i, crystal)))


def solve_poling_period(crystal, omega_p0):
    """Poling period that phase-matches degenerate down-conversion of ``omega_p0``.

    Bracketed Brent search on [0.5 um, 100 um]; NoRoot when the mismatch does
    not change sign across the bracket.
    """
    half = 0.5 * omega_p0
    k_bulk = (
        wavevector(omega_p0, crystal.model("pump"))
        - wavevector(half, crystal.model("signal"))
        - wavevector(half, crystal.model("idler"))
    )

    def mismatch(period):
        return k_bulk - 2.0 * math.pi / period

    lo, hi = PERIOD_BRACKET
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise NoRoot(
            f"no quasi-phase-matching period in [{lo / UM:g}, {hi / UM:g}] um "
            f"(bulk mismatch {k_bulk:.4g} rad/m)"
        )
    return brentq(mismatch, lo, hi, xtol=1e-22, rtol=4 * np.finfo(float).eps, maxiter=500)
