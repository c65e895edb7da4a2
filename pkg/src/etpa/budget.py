"""ETPA rate algebra, photon budget, coincidence correction and detection limits.

Units follow the laboratory habit: concentrations in mol/L, path lengths and
beam radii in cm, cross-sections in cm^2/molecule.
"""

import configparser
import math
from dataclasses import asdict, dataclass

from .constants import AVOGADRO, NM, PLANCK, SPEED_OF_LIGHT
from .datafiles import data_path
from .errors import NegativeCorrected

DEFAULT_FANO = 0.5
EFFECTIVE_CONCENTRATION = 0.058  # mol/L
SAMPLES_FILE = "samples.ini"
GM = 1e-50  # cm^4 s / (photon molecule)


@dataclass(frozen=True)
class SourceBudget:
    avg_power: float = 30e-3  # W
    rep_rate: float = 80e6  # Hz
    pulse_duration: float = 110e-15  # s
    pump_wavelength: float = 405.0  # nm
    spdc_efficiency: float = 1.3e-9
    beam_waist_radius: float = 15e-4  # cm

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"source {name} must be positive, got {value}")
        if self.spdc_efficiency > 1:
            raise ValueError("spdc_efficiency cannot exceed 1")


@dataclass(frozen=True)
class SampleSpec:
    name: str
    concentration: float  # mol/L
    sigma_E: float | None  # cm^2 / molecule
    path_length: float = 1.0  # cm
    sigma_C: float | None = None  # GM, comparison only
    lambda_N0: float | None = None  # nm
    sigma_N: float | None = None  # nm
    reference: str = ""
    table1: bool = False

    def __post_init__(self):
        if self.concentration < 0:
            raise ValueError(f"{self.name}: concentration must be >= 0")
        if not self.path_length > 0:
            raise ValueError(f"{self.name}: path length must be positive")
        if self.sigma_E is not None and self.sigma_E < 0:
            raise ValueError(f"{self.name}: sigma_E must be >= 0")

    @property
    def molecules_per_area(self):
        """C N_A l in molecules/cm^2 (C converted from mol/L to mol/cm^3)."""
        return self.concentration * 1e-3 * AVOGADRO * self.path_length


@dataclass(frozen=True)
class DetectorModel:
    beta1: float = 0.21
    beta2: float = 0.21
    dark1: float = 200.0  # counts/s
    dark2: float = 200.0
    accidental: float = 10.0  # coincidences/s
    fano: float = DEFAULT_FANO

    def __post_init__(self):
        if not (0 < self.beta1 <= 1 and 0 < self.beta2 <= 1):
            raise ValueError("detector throughputs beta must lie in (0, 1]")
        if min(self.dark1, self.dark2, self.accidental) < 0:
            raise ValueError("dark and accidental rates must be >= 0")
        if not 0 < self.fano <= 1:
            raise ValueError("fano factor must lie in (0, 1]")


@dataclass(frozen=True)
class PhotonBudget:
    E_pulse: float  # J
    E_photon: float  # J
    P_peak: float  # W
    R_peak: float  # photons/s
    R2_peak: float  # pairs/s
    pairs_per_pulse: float
    R_in: float  # pairs/s
    phi_peak: float  # pairs / (cm^2 s)
    beam_area: float  # cm^2


@dataclass(frozen=True)
class DetectionBudget:
    R_in: float
    eta_E: float
    R_abs: float
    R_out: float
    noise_floor: float
    eta_min: float
    sigma_E_min: float
    detectable: bool


def photon_energy(wavelength_nm):
    return PLANCK * SPEED_OF_LIGHT / (wavelength_nm * NM)


def photon_budget(source):
    """Pulse energy -> peak photon rate -> SPDC pairs per pulse -> average pair rate."""
    e_pulse = source.avg_power / source.rep_rate
    e_photon = photon_energy(source.pump_wavelength)
    p_peak = e_pulse / source.pulse_duration
    r_peak = p_peak / e_photon
    r2_peak = r_peak * source.spdc_efficiency
    per_pulse = r2_peak * source.pulse_duration
    area = math.pi * source.beam_waist_radius**2
    return PhotonBudget(
        E_pulse=e_pulse,
        E_photon=e_photon,
        P_peak=p_peak,
        R_peak=r_peak,
        R2_peak=r2_peak,
        pairs_per_pulse=per_pulse,
        R_in=per_pulse * source.rep_rate,
        phi_peak=r2_peak / area,
        beam_area=area,
    )


def etpa_efficiency(sample):
    """eta_E = sigma_E C N_A l."""
    if sample.sigma_E is None:
        raise ValueError(f"{sample.name}: sigma_E unknown")
    return sample.sigma_E * sample.molecules_per_area


def absorbed_rate(eta_E, R_in):
    """(R_abs, R_out) in pairs/s."""
    if not 0.0 <= eta_E <= 1.0:
        raise ValueError(f"eta_E must lie in [0, 1], got {eta_E}")
    r_abs = eta_E * R_in
    return r_abs, R_in - r_abs


def noise_floor(R_in, fano=DEFAULT_FANO):
    """delta R_det = sqrt(F R_in)."""
    if R_in < 0:
        raise ValueError("R_in must be >= 0")
    if not 0 < fano <= 1:
        raise ValueError("fano factor must lie in (0, 1]")
    return math.sqrt(fano * R_in)


def detection_limits(R_in, fano, sample):
    """(eta_min, sigma_E_min) for the given source rate and sample geometry."""
    if not R_in > 0:
        raise ValueError("R_in must be positive")
    eta_min = noise_floor(R_in, fano) / R_in
    per_area = sample.molecules_per_area
    sigma_min = eta_min / per_area if per_area > 0 else math.inf
    return eta_min, sigma_min


def is_detectable(sample, R_in, fano=DEFAULT_FANO):
    eta = etpa_efficiency(sample)
    r_abs, r_out = absorbed_rate(eta, R_in)
    floor = noise_floor(R_in, fano)
    eta_min, sigma_min = detection_limits(R_in, fano, sample)
    return DetectionBudget(
        R_in=R_in,
        eta_E=eta,
        R_abs=r_abs,
        R_out=r_out,
        noise_floor=floor,
        eta_min=eta_min,
        sigma_E_min=sigma_min,
        detectable=r_abs > floor,
    )


@dataclass(frozen=True)
class PairRateEstimate:
    R_in: float
    beta1: float
    beta2: float
    R1_corrected: float
    R2_corrected: float
    R12_corrected: float


def corrected_pair_rate(R1, R2, R12, detector):
    """Klyshko estimate R_in = R1' R2' / R12' from dark-corrected rates."""
    r1 = R1 - detector.dark1
    r2 = R2 - detector.dark2
    r12 = R12 - detector.accidental
    for label, value in (("R1", r1), ("R2", r2), ("R12", r12)):
        if value <= 0:
            raise NegativeCorrected(f"{label} is not above its dark/accidental rate")
    return PairRateEstimate(
        R_in=r1 * r2 / r12,
        beta1=r12 / r2,
        beta2=r12 / r1,
        R1_corrected=r1,
        R2_corrected=r2,
        R12_corrected=r12,
    )


def forward_rates(R_in, detector):
    """Noiseless singles and coincidences for a true pair rate (inverse of the above)."""
    return (
        detector.beta1 * R_in + detector.dark1,
        detector.beta2 * R_in + detector.dark2,
        detector.beta1 * detector.beta2 * R_in + detector.accidental,
    )


def classical_photon_chain(pulse_energy, wavelength_nm, rep_rate):
    """(photons per pulse, photons per second) for a classical pulse train."""
    if min(pulse_energy, wavelength_nm, rep_rate) <= 0:
        raise ValueError("pulse energy, wavelength and repetition rate must be positive")
    per_pulse = pulse_energy / photon_energy(wavelength_nm)
    return per_pulse, per_pulse * rep_rate


@dataclass(frozen=True)
class TableRow:
    name: str
    concentration: float  # mol/L as listed
    sigma_C: float | None
    sigma_E: float | None
    R_abs: float | None
    eta_E: float | None
    detectable: bool | None

    @property
    def computable(self):
        return self.eta_E is not None


def table1(samples, R_in, fano=DEFAULT_FANO, effective_concentration=EFFECTIVE_CONCENTRATION):
    """One row per sample plus the caption constants (R_in, delta R_det).

    With ``effective_concentration`` set, every row is evaluated at that
    concentration and the listed one is carried as metadata; pass ``None`` to
    use each sample's own concentration.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("table1 needs at least one sample")
    rows = []
    for s in samples:
        if s.sigma_E is None:
            rows.append(TableRow(s.name, s.concentration, s.sigma_C, None, None, None, None))
            continue
        calc = s
        if effective_concentration is not None:
            calc = SampleSpec(s.name, effective_concentration, s.sigma_E, s.path_length)
        verdict = is_detectable(calc, R_in, fano)
        rows.append(
            TableRow(
                s.name,
                s.concentration,
                s.sigma_C,
                s.sigma_E,
                verdict.R_abs,
                verdict.eta_E,
                verdict.detectable,
            )
        )
    return rows, {"R_in": R_in, "noise_floor": noise_floor(R_in, fano), "fano": fano}


def _opt_float(sec, key):
    raw = sec.get(key, "").strip()
    return float(raw) if raw else None


def load_samples(path=None):
    """Sample profiles keyed by name, in file order."""
    path = data_path(SAMPLES_FILE) if path is None else path
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise FileNotFoundError(f"sample profile file not found: {path}")
    samples = {}
    for name in parser.sections():
        sec = parser[name]
        samples[name] = SampleSpec(
            name=name,
            concentration=float(sec["concentration_mM"]) * 1e-3,
            sigma_E=_opt_float(sec, "sigma_E_cm2"),
            path_length=float(sec.get("path_length_cm", "1")),
            sigma_C=_opt_float(sec, "sigma_C_GM"),
            lambda_N0=_opt_float(sec, "lambda_N0_nm"),
            sigma_N=_opt_float(sec, "sigma_N_nm"),
            reference=sec.get("reference", ""),
            table1=sec.getboolean("table1", fallback=False),
        )
    return samples


def table1_samples(path=None):
    return [s for s in load_samples(path).values() if s.table1]
