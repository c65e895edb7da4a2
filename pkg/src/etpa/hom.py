"""Hong-Ou-Mandel coincidence rate, interferogram, visibility and dip width.

R_C(tau) = 1/4 sum |f(s, i) exp(i (ws - wi) tau) - f(i, s)|^2 dOmega^2 * pair_rate

evaluated with the midpoint rule on the state's grid. The interference term
only depends on the index difference s - i, so it is collapsed onto the
diagonals of ``conj(f^T) * f`` once and then Fourier-summed per delay.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoDip, ZeroBaseline

DEFAULT_TAU_MAX = 2e-12  # s
DEFAULT_N_TAU = 401


@dataclass(frozen=True, eq=False)
class Interferogram:
    tau_values: np.ndarray  # s
    rates: np.ndarray  # pairs/s
    baseline: float  # pairs/s, the tau -> infinity limit

    def __post_init__(self):
        if np.any(np.diff(self.tau_values) <= 0):
            raise ValueError("tau_values must be strictly increasing")


def _diagonal_overlaps(state):
    """p[k] = sum over s - i = k of conj(f[i, s]) f[s, i], k = -(n-1)..n-1."""
    f = state.amplitude
    prod = np.conj(f.T) * f
    n = f.shape[0]
    # np.trace(offset=m) sums prod[j, j+m]: s - i = -m
    return np.array([np.trace(prod, offset=-k) for k in range(-(n - 1), n)])


def _scale(state):
    return state.grid.cell_area * state.pair_rate


def baseline_rate(state):
    """Analytic R_C(infinity): the cross term dropped, i.e. half the transmitted pairs."""
    return 0.5 * float(np.sum(np.abs(state.amplitude) ** 2)) * _scale(state)


def _cross_terms(state, taus):
    n = state.grid.n_points
    p = _diagonal_overlaps(state)
    k = np.arange(-(n - 1), n)
    phase = np.exp(1j * np.outer(np.atleast_1d(taus), k * state.grid.spacing))
    return (phase @ p).real


def coincidence_rates(state, taus):
    """Vectorised R_C over an array of delays (pairs/s)."""
    taus = np.asarray(taus, dtype=float)
    total = float(np.sum(np.abs(state.amplitude) ** 2))
    rates = 0.25 * (2.0 * total - 2.0 * _cross_terms(state, taus)) * _scale(state)
    rates = np.maximum(rates, 0.0)
    return rates.reshape(taus.shape)


def coincidence_rate(state, tau):
    return float(coincidence_rates(state, np.array([tau]))[0])


def interferogram(state, tau_max=DEFAULT_TAU_MAX, n_tau=DEFAULT_N_TAU):
    if n_tau < 3:
        raise ValueError("n_tau must be at least 3")
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    taus = np.linspace(-tau_max, tau_max, n_tau)
    return Interferogram(taus, coincidence_rates(state, taus), baseline_rate(state))


def visibility(state):
    """(R_C(inf) - R_C(0)) / (R_C(inf) + R_C(0)) with the analytic baseline."""
    base = baseline_rate(state)
    if base <= 0:
        raise ZeroBaseline("state carries no pairs; visibility undefined")
    r0 = coincidence_rate(state, 0.0)
    return (base - r0) / (base + r0)


def dip_fwhm(gram):
    """Full width at half depth, linearly interpolated between samples (s)."""
    rates = np.asarray(gram.rates)
    taus = np.asarray(gram.tau_values)
    j = int(np.argmin(rates))
    r_min = rates[j]
    if r_min >= 0.999 * gram.baseline:
        raise NoDip("no dip below 0.999 of the baseline")
    level = 0.5 * (gram.baseline + r_min)

    def crossing(indices):
        prev = j
        for k in indices:
            if rates[k] >= level:
                t0, t1 = taus[prev], taus[k]
                r0, r1 = rates[prev], rates[k]
                return t0 + (level - r0) * (t1 - t0) / (r1 - r0)
            prev = k
        raise NoDip("dip does not recover to half depth inside the delay window")

    left = crossing(range(j - 1, -1, -1))
    right = crossing(range(j + 1, len(rates)))
    return float(right - left)


def hom_summary(state, gram=None):
    """JSON-ready visibility, FWHM and baseline."""
    gram = interferogram(state) if gram is None else gram
    try:
        fwhm = dip_fwhm(gram)
    except NoDip:
        fwhm = None
    return {
        "visibility": visibility(state),
        "fwhm_s": fwhm,
        "fwhm_fs": None if fwhm is None else fwhm * 1e15,
        "baseline_pairs_s": gram.baseline,
        "r0_pairs_s": coincidence_rate(state, 0.0),
        "tau_max_s": float(gram.tau_values[-1]),
        "n_tau": int(len(gram.tau_values)),
    }
