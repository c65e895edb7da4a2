"""Molecular two-photon absorption as a notch filter on the biphoton state."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .biphoton import jsi
from .constants import bandwidth_to_omega, omega_from_wavelength
from .errors import EmptyInput, GridMismatch
from .hom import visibility


class NotchMode(str, Enum):
    INTENSITY = "INTENSITY"
    AMPLITUDE = "AMPLITUDE"


@dataclass(frozen=True)
class NotchFilterSpec:
    lambda_N0: float  # nm, per-photon absorption centre
    sigma_N: float  # nm
    eta: float
    mode: NotchMode = NotchMode.INTENSITY

    def __post_init__(self):
        object.__setattr__(self, "mode", NotchMode(self.mode))
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"notch eta must lie in [0, 1], got {self.eta}")
        if not self.sigma_N > 0:
            raise ValueError("notch sigma_N must be positive")
        if not self.lambda_N0 > 0:
            raise ValueError("notch lambda_N0 must be positive")

    @property
    def omega_N0(self):
        return omega_from_wavelength(self.lambda_N0)

    @property
    def sigma_omega(self):
        return bandwidth_to_omega(self.sigma_N, self.lambda_N0)


# RhB-like absorber: 816 nm centre, 20 nm width.
RHB_PRESET = NotchFilterSpec(lambda_N0=816.0, sigma_N=20.0, eta=0.9)


def _profile(omega_s, omega_i, spec):
    detune = np.asarray(omega_s) + np.asarray(omega_i) - 2.0 * spec.omega_N0
    return np.exp(-(detune**2) / (2.0 * spec.sigma_omega**2))


def notch_transmission(omega_s, omega_i, spec):
    """The factor h_N = 1 - eta G(ws + wi).

    Read as an intensity factor in INTENSITY mode, as an amplitude factor
    (intensity factor squared) in AMPLITUDE mode.
    """
    return 1.0 - spec.eta * _profile(omega_s, omega_i, spec)


def intensity_factor(omega_s, omega_i, spec):
    h = notch_transmission(omega_s, omega_i, spec)
    return h if spec.mode is NotchMode.INTENSITY else h**2


def apply_notch(state, spec):
    """Transmitted state; pair_rate is kept, so the bin sum drops by the absorbed pairs."""
    ws, wi = state.grid.mesh()
    h = notch_transmission(ws, wi, spec)
    amp_factor = np.sqrt(h) if spec.mode is NotchMode.INTENSITY else h
    return replace(state, amplitude=state.amplitude * amp_factor)


def _check_pair(a, b):
    if not a.grid.same_as(b.grid):
        raise GridMismatch("states live on different grids")
    if a.pair_rate != b.pair_rate:
        raise GridMismatch(f"pair rates differ ({a.pair_rate} vs {b.pair_rate})")


def absorbed_jsi(state_in, state_out):
    """|f_in|^2 - |f_out|^2 in pairs/s per bin, round-off negatives clipped to 0."""
    _check_pair(state_in, state_out)
    diff = jsi(state_in) - jsi(state_out)
    return np.where(diff < 0.0, 0.0, diff)


def realized_efficiency(state_in, state_out):
    _check_pair(state_in, state_out)
    total_in = jsi(state_in).sum()
    if total_in <= 0:
        raise EmptyInput("input state carries no pairs")
    return float(absorbed_jsi(state_in, state_out).sum() / total_in)


def transmitted_fraction(state_in, state_out):
    _check_pair(state_in, state_out)
    total_in = jsi(state_in).sum()
    if total_in <= 0:
        raise EmptyInput("input state carries no pairs")
    return float(jsi(state_out).sum() / total_in)


def notch_for_efficiency(state, template, target):
    """Copy of ``template`` whose eta makes the realised efficiency equal ``target``.

    Exact in INTENSITY mode, where the absorbed fraction is linear in eta.
    """
    if template.mode is not NotchMode.INTENSITY:
        raise ValueError("efficiency matching needs INTENSITY mode")
    j = jsi(state)
    total = j.sum()
    if total <= 0:
        raise EmptyInput("input state carries no pairs")
    ws, wi = state.grid.mesh()
    overlap = float((j * _profile(ws, wi, template)).sum() / total)
    if overlap <= 0 or target > overlap:
        raise ValueError(
            f"target efficiency {target:g} not reachable (max {overlap:g} at eta = 1)"
        )
    return replace(template, eta=target / overlap)


@dataclass(frozen=True)
class SweepRow:
    sigma_N: float
    lambda_N0: float
    visibility: float
    transmitted_fraction: float


def sweep_notch(state, spec_template, sigma_N_values, lambda_N0_values, workers=1):
    """Visibility and transmission for every (lambda_N0, sigma_N) combination.

    Rows come out lambda-major in the order the values were given, whatever
    ``workers`` is.
    """
    sigma_N_values = list(sigma_N_values)
    lambda_N0_values = list(lambda_N0_values)
    if not sigma_N_values or not lambda_N0_values:
        raise ValueError("sweep needs at least one sigma_N and one lambda_N0")
    combos = [(s, lam) for lam in lambda_N0_values for s in sigma_N_values]

    def one(combo):
        s, lam = combo
        out = apply_notch(state, replace(spec_template, sigma_N=s, lambda_N0=lam))
        return SweepRow(s, lam, visibility(out), transmitted_fraction(state, out))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, combos))
    return [one(c) for c in combos]


def notch_from_sample(sample, eta, mode=NotchMode.INTENSITY):
    """Notch with a sample profile's centre and width."""
    if sample.lambda_N0 is None or sample.sigma_N is None:
        raise ValueError(f"sample {sample.name!r} has no absorption band profile")
    return NotchFilterSpec(sample.lambda_N0, sample.sigma_N, eta, mode)

