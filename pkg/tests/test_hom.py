import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etpa.biphoton import (
    FWHM_PER_SIGMA,
    BiphotonState,
    SpectralGrid,
    antidiagonal_width,
    exchange_asymmetry,
    gaussian_state,
)
from etpa.errors import NoDip, ZeroBaseline
from etpa.hom import (
    Interferogram,
    baseline_rate,
    coincidence_rate,
    coincidence_rates,
    dip_fwhm,
    hom_summary,
    interferogram,
    visibility,
)


def brute_force_rate(state, tau):
    """Independent double loop over every (s, i) bin pair."""
    f = state.amplitude
    x = state.grid.detuning
    n = len(x)
    acc = 0.0
    for s in range(n):
        for i in range(n):
            term = f[s, i] * complex(math.cos((x[s] - x[i]) * tau), math.sin((x[s] - x[i]) * tau)) - f[i, s]
            acc += term.real**2 + term.imag**2
    return 0.25 * acc * state.grid.cell_area * state.pair_rate


def random_state(seed, n=32, real=False):
    rng = np.random.default_rng(seed)
    grid = SpectralGrid(n, 2.3e15, 5e13)
    amp = rng.normal(size=(n, n)) + (0 if real else 1j * rng.normal(size=(n, n)))
    return BiphotonState(grid, amp, pair_rate=1.7e3)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("tau", [0.0, 3.3e-14, -1.1e-13, 5e-13])
def test_quadrature_matches_brute_force(seed, tau):
    state = random_state(seed)
    assert coincidence_rate(state, tau) == pytest.approx(brute_force_rate(state, tau), rel=1e-12)


def test_physical_states_match_brute_force(states):
    # Coarse-grain a real JSA onto 32 x 32 by subsampling the amplitude.
    s = states[("type2", "pulsed")]
    sub = s.amplitude[::16, ::16]
    grid = SpectralGrid(32, s.grid.center_omega0, s.grid.half_span)
    coarse = BiphotonState(grid, sub, pair_rate=1.0)
    for tau in (0.0, 2e-13):
        assert coincidence_rate(coarse, tau) == pytest.approx(brute_force_rate(coarse, tau), rel=1e-12)


def test_symmetric_state_zero_at_origin():
    grid = SpectralGrid(64, 2.3e15, 5e13)
    s = gaussian_state(grid, 5e12, 1e13, pair_rate=1e6)
    assert coincidence_rate(s, 0.0) <= 1e-10 * baseline_rate(s)
    assert visibility(s) == pytest.approx(1.0, abs=1e-10)


def test_baseline_is_large_delay_limit():
    grid = SpectralGrid(256, 2.3e15, 8e13)
    s = gaussian_state(grid, 4e12, 1.2e13, pair_rate=7.99e7, center=(3e12, -1e12))
    tau = 10 / antidiagonal_width(s)
    # stay well below the grid's alias period 2 pi / dOmega
    assert tau < 0.2 * 2 * math.pi / s.grid.spacing
    far = coincidence_rates(s, tau * np.linspace(1.0, 1.3, 7))
    np.testing.assert_allclose(far, baseline_rate(s), rtol=1e-3)
    assert baseline_rate(s) == pytest.approx(0.5 * s.total_rate, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 2e-12))
def test_interferogram_even_in_tau(seed, tau):
    # holds for real amplitudes, which is what the source model produces
    s = random_state(seed, n=16, real=True)
    a, b = coincidence_rate(s, tau), coincidence_rate(s, -tau)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9 * baseline_rate(s))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_visibility_asymmetry_identity(seed):
    s = random_state(seed, n=24)
    a = exchange_asymmetry(s)
    assert visibility(s) == pytest.approx((1 - a) / (1 + a), abs=1e-12)


def test_identity_on_physical_states(states):
    for key, s in states.items():
        a = exchange_asymmetry(s)
        assert visibility(s) == pytest.approx((1 - a) / (1 + a), abs=1e-6), key


def test_gaussian_dip_fwhm_closed_form():
    sigma_diff = 1.0e13  # JSI standard deviation along Omega_s - Omega_i
    grid = SpectralGrid(256, 2.3e15, 8e13)
    s = gaussian_state(grid, 4e12, sigma_diff)
    gram = interferogram(s, tau_max=1e-12, n_tau=2001)
    # R_C(tau) = R_inf (1 - exp(-sigma_diff^2 tau^2 / 2)) -> FWHM = 2 sqrt(2 ln 2) / sigma_diff
    assert dip_fwhm(gram) == pytest.approx(FWHM_PER_SIGMA / sigma_diff, rel=0.02)


def test_gaussian_dip_profile():
    sigma_diff = 1.0e13
    grid = SpectralGrid(256, 2.3e15, 8e13)
    s = gaussian_state(grid, 4e12, sigma_diff, pair_rate=2.0)
    taus = np.linspace(-4e-13, 4e-13, 41)
    expected = baseline_rate(s) * (1 - np.exp(-(sigma_diff**2) * taus**2 / 2))
    np.testing.assert_allclose(coincidence_rates(s, taus), expected, atol=1e-9 * baseline_rate(s))


def test_narrower_band_gives_wider_dip():
    grid = SpectralGrid(256, 2.3e15, 8e13)
    wide = gaussian_state(grid, 4e12, 1.5e13)
    narrow = gaussian_state(grid, 4e12, 0.7e13)
    assert antidiagonal_width(narrow) < antidiagonal_width(wide)
    g_w = interferogram(wide, 1.5e-12, 1501)
    g_n = interferogram(narrow, 1.5e-12, 1501)
    assert dip_fwhm(g_n) > dip_fwhm(g_w)


def test_flat_interferogram_has_no_dip():
    gram = Interferogram(np.linspace(-1, 1, 11), np.ones(11), 1.0)
    with pytest.raises(NoDip):
        dip_fwhm(gram)


def test_dip_must_recover_inside_window():
    grid = SpectralGrid(128, 2.3e15, 8e13)
    s = gaussian_state(grid, 4e12, 1e12)  # dip much wider than the window
    with pytest.raises(NoDip):
        dip_fwhm(interferogram(s, tau_max=1e-13, n_tau=21))


def test_zero_state():
    grid = SpectralGrid(16, 2.3e15, 5e13)
    with pytest.raises(ZeroBaseline):
        visibility(BiphotonState(grid, np.zeros((16, 16), complex)))


def test_interferogram_arguments():
    s = random_state(0, 16)
    with pytest.raises(ValueError):
        interferogram(s, n_tau=2)
    with pytest.raises(ValueError):
        interferogram(s, tau_max=0.0)
    with pytest.raises(ValueError):
        Interferogram(np.array([1.0, 0.0]), np.zeros(2), 1.0)


def test_type0_cw_full_visibility(states):
    assert visibility(states[("type0", "cw")]) == pytest.approx(1.0, abs=5e-3)


@pytest.mark.parametrize("loss", [0.9, 0.5, 0.1])
def test_linear_loss_invariance(states, loss):
    s = states[("type0", "pulsed")]
    lossy = s.scaled(math.sqrt(loss))
    assert visibility(lossy) == pytest.approx(visibility(s), abs=1e-12)
    g0 = interferogram(s, 5e-13, 401)
    g1 = interferogram(lossy, 5e-13, 401)
    assert dip_fwhm(g1) == pytest.approx(dip_fwhm(g0), rel=1e-9)
    assert g1.baseline == pytest.approx(loss * g0.baseline, rel=1e-12)


def test_summary_fields(states):
    out = hom_summary(states[("type0", "pulsed")])
    assert set(out) >= {"visibility", "fwhm_s", "fwhm_fs", "baseline_pairs_s", "r0_pairs_s"}
    assert out["fwhm_fs"] == pytest.approx(out["fwhm_s"] * 1e15)
