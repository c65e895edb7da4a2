"""Monte-Carlo frames of noisy transmitted spectra, accumulation and SNR.

Each frame records the incident and transmitted marginals (and optionally the
full JSIs) as expected counts plus independent per-bin noise. Frames are summed,
not averaged, and the absorbed spectrum is the accumulated difference.

Frame ``k`` draws from its own Philox stream keyed by ``(rng_seed, k)``, so the
result does not depend on how many workers generate frames.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .biphoton import marginals
from .errors import EmptyBackground, GridMismatch

GAUSSIAN = "gaussian"
POISSON = "poisson"


@dataclass(frozen=True)
class NoiseRunConfig:
    n_frames: int = 100
    integration_time: float = 0.01  # s per frame
    per_bin_noise_sigma: float = 0.0  # counts per bin per frame
    rng_seed: int = 0
    background_region: tuple = ()  # ((start, stop), ...) bin index ranges
    signal_region: tuple | None = None  # defaults to the complement of the background
    include_jsi: bool = False
    noise_model: str = GAUSSIAN

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if not self.integration_time > 0:
            raise ValueError("integration_time must be positive")
        if self.per_bin_noise_sigma < 0:
            raise ValueError("per_bin_noise_sigma must be >= 0")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.noise_model not in (GAUSSIAN, POISSON):
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        for start, stop in self.background_region:
            if not 0 <= start < stop:
                raise ValueError(f"bad background range ({start}, {stop})")


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    """Accumulated counts; marginal arrays have shape (2, n): row 0 signal, row 1 idler."""

    marginals_in: np.ndarray
    marginals_out: np.ndarray
    expected_absorbed: np.ndarray  # noiseless accumulated absorbed marginals
    seed: int
    n_frames: int
    jsi_in: np.ndarray | None = None
    jsi_out: np.ndarray | None = None
    snr: float = math.nan
    snr_db: float = math.nan
    peak_snr: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def absorbed(self):
        return self.marginals_in - self.marginals_out

    @property
    def absorbed_jsi(self):
        if self.jsi_in is None:
            return None
        return self.jsi_in - self.jsi_out


@dataclass(frozen=True)
class SnrEstimate:
    snr: float
    snr_db: float
    peak_snr: float
    signal_counts: float
    background_sigma: float
    n_signal_bins: int


def calibrate_noise(R_in, fano, n_signal_bins, integration_time, arms=1):
    """Per-bin Gaussian sigma (counts per frame) matching the pair-rate fluctuation.

    The root-sum-square over ``n_signal_bins`` bins (and over ``arms``
    independently noisy spectra whose difference is taken) equals the
    counting fluctuation sqrt(F R_in T) of one frame, which is delta R_det
    for a 1 s frame.
    """
    if min(R_in, fano, integration_time) <= 0 or n_signal_bins < 1 or arms < 1:
        raise ValueError("calibrate_noise needs positive inputs")
    return math.sqrt(fano * R_in * integration_time / (n_signal_bins * arms))


def region_indices(region, n):
    idx = [i for start, stop in region for i in range(start, min(stop, n))]
    return np.array(sorted(set(idx)), dtype=int)


def _ranges(mask):
    """Contiguous True runs of a boolean vector as ((start, stop), ...)."""
    out = []
    start = None
    for k, flag in enumerate(mask):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            out.append((start, k))
            start = None
    if start is not None:
        out.append((start, len(mask)))
    return tuple(out)


def default_regions(state_in, rel_threshold=1e-12):
    """(signal, background) ranges: bins where the noiseless input marginal is / is not lit."""
    m_s, m_i = marginals(state_in)
    lit = (m_s + m_i) > rel_threshold * max(m_s.max(), m_i.max())
    return _ranges(lit), _ranges(~lit)


def _frame_generator(seed, frame):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(frame,))))


def _draw(rng, expected, config):
    if config.noise_model == POISSON:
        return rng.poisson(np.clip(expected, 0.0, None)).astype(float)
    if config.per_bin_noise_sigma == 0:
        return expected.copy()
    return expected + rng.normal(0.0, config.per_bin_noise_sigma, expected.shape)


def simulate_frames(state_in, state_out, config, workers=1):
    """Accumulate ``config.n_frames`` noisy frames of both states and estimate the SNR."""
    if not state_in.grid.same_as(state_out.grid) or state_in.pair_rate != state_out.pair_rate:
        raise GridMismatch("input and output states must share grid and pair rate")
    t = config.integration_time
    exp_in = np.vstack(marginals(state_in)) * t
    exp_out = np.vstack(marginals(state_out)) * t
    jsi_exp = None
    if config.include_jsi:
        from .biphoton import jsi

        jsi_exp = (jsi(state_in) * t, jsi(state_out) * t)

    def frame(k):
        rng = _frame_generator(config.rng_seed, k)
        parts = [_draw(rng, exp_in, config), _draw(rng, exp_out, config)]
        if jsi_exp is not None:
            parts += [_draw(rng, jsi_exp[0], config), _draw(rng, jsi_exp[1], config)]
        return parts

    acc = None
    frames = range(config.n_frames)
    if workers > 1:
        pool = ThreadPoolExecutor(max_workers=workers)
        stream = pool.map(frame, frames)
    else:
        pool = None
        stream = map(frame, frames)
    try:
        for parts in stream:  # fixed frame order keeps the sums bit-stable
            if acc is None:
                acc = [p.copy() for p in parts]
            else:
                for a, p in zip(acc, parts):
                    a += p
    finally:
        if pool is not None:
            pool.shutdown()

    result = MeasurementResult(
        marginals_in=acc[0],
        marginals_out=acc[1],
        expected_absorbed=(exp_in - exp_out) * config.n_frames,
        seed=config.rng_seed,
        n_frames=config.n_frames,
        jsi_in=acc[2] if jsi_exp is not None else None,
        jsi_out=acc[3] if jsi_exp is not None else None,
    )
    if not config.background_region:
        return result
    est = estimate_snr(result, config)
    return MeasurementResult(
        **{**result.__dict__, "snr": est.snr, "snr_db": est.snr_db, "peak_snr": est.peak_snr}
    )


def _db(ratio):
    if ratio == math.inf:
        return math.inf
    return 20.0 * math.log10(ratio) if ratio > 0 else -math.inf


def estimate_snr(result, config, axis=0):
    """Band-integrated absorbed counts over the background noise of that band.

    The signal is the accumulated absorbed marginal summed over the signal
    region; the noise is the background-region standard deviation per bin
    scaled by sqrt(number of signal bins). ``peak_snr`` is the largest single
    signal bin over the per-bin background deviation. A noiseless run gives
    ``+inf`` (or 0.0 when nothing was absorbed either).
    """
    absorbed = result.absorbed[axis]
    n = absorbed.size
    bg = region_indices(config.background_region, n)
    if bg.size < 2:
        raise EmptyBackground("background region needs at least two bins")
    if config.signal_region is not None:
        sig = region_indices(config.signal_region, n)
    else:
        sig = np.setdiff1d(np.arange(n), bg)
    if sig.size == 0:
        raise EmptyBackground("no signal bins left outside the background region")
    if np.intersect1d(sig, bg).size:
        raise ValueError("signal and background regions overlap")

    sigma = float(np.std(absorbed[bg], ddof=1))
    signal = float(absorbed[sig].sum())
    if sigma == 0.0:
        snr = math.inf if signal > 0 else 0.0
        peak = snr
    else:
        snr = signal / (sigma * math.sqrt(sig.size))
        peak = float(absorbed[sig].max()) / sigma
    return SnrEstimate(snr, _db(snr), peak, signal, sigma, int(sig.size))
