"""Run configuration: INI sections mirroring the domain types, with overrides.

Precedence, lowest first: scenario defaults, the ``--config`` file, ``--set
section.key=value`` overrides, then dedicated CLI flags. Every problem is
reported as ConfigError with a dotted ``section.key`` field.
"""

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .absorption import NotchFilterSpec, NotchMode
from .biphoton import DEFAULT_POINTS, PumpSpec
from .budget import DetectorModel, SampleSpec, SourceBudget, load_samples
from .dispersion import DEFAULT_AXES, Process
from .errors import ConfigError
from .hom import DEFAULT_N_TAU, DEFAULT_TAU_MAX
from .noisesim import GAUSSIAN, POISSON, NoiseRunConfig

SCENARIOS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig7", "table1", "custom")

SCENARIO_HELP = {
    "fig1": "type-0 JSA, marginals and HOM interferogram",
    "fig2": "type-II JSA, marginals and HOM interferogram",
    "fig3": "type-0 state before/after a narrow notch absorber",
    "fig4": "type-II state before/after a narrow notch absorber",
    "fig5": "notch bandwidth and detuning sweep on the pulsed type-II state",
    "fig7": "noise-accumulated absorbed spectra for two Rh6G cross-section bounds",
    "table1": "ETPA efficiencies, absorbed rates and detection limits per sample",
    "custom": "user-defined source, crystal and optional notch/sample/noise",
}

# Sections a custom run must define itself; figure scenarios get defaults.
CUSTOM_REQUIRED = ("pump", "crystal")

_BASE = {
    "source": {
        "avg_power_W": "0.03",
        "rep_rate_Hz": "80e6",
        "pulse_duration_s": "110e-15",
        "pump_wavelength_nm": "405",
        "spdc_efficiency": "1.3e-9",
        "beam_waist_radius_cm": "15e-4",
    },
    "detector": {
        "beta1": "0.21",
        "beta2": "0.21",
        "dark1": "200",
        "dark2": "200",
        "accidental": "10",
        "fano": "0.5",
    },
    "grid": {"n_points": str(DEFAULT_POINTS), "half_span_rad_s": "auto", "bandpass_nm": "none"},
    "hom": {"tau_max_fs": str(DEFAULT_TAU_MAX * 1e15), "n_tau": str(DEFAULT_N_TAU)},
}
_PULSED = {"lambda_p0": "405", "sigma_p": "5"}
_NARROW_NOTCH = {"lambda_N0": "810", "sigma_N": "1", "eta": "0.9", "mode": "INTENSITY"}

SCENARIO_DEFAULTS = {
    "fig1": {"pump": _PULSED, "crystal": {"process": "TYPE0"}},
    "fig2": {"pump": _PULSED, "crystal": {"process": "TYPEII"}},
    "fig3": {"pump": _PULSED, "crystal": {"process": "TYPE0"}, "notch": _NARROW_NOTCH},
    "fig4": {"pump": _PULSED, "crystal": {"process": "TYPEII"}, "notch": _NARROW_NOTCH},
    "fig5": {
        "pump": _PULSED,
        "crystal": {"process": "TYPEII"},
        "notch": _NARROW_NOTCH,
        "sweep": {"sigma_N_nm": "1:30:1", "lambda_N0_nm": "810, 816"},
    },
    "fig7": {
        "pump": _PULSED,
        "crystal": {"process": "TYPEII"},
        "grid": {"bandpass_nm": "90"},
        "notch": {"lambda_N0": "816", "sigma_N": "20", "eta": "0.9", "mode": "INTENSITY"},
        "fig7": {
            "samples": "Rh6G (Parzuchowski), Rh6G (He)",
            "R_in": "7.99e7",
            "effective_concentration_mM": "58",
        },
        "noise": {"n_frames": "100", "integration_time_s": "0.01", "per_bin_noise_sigma": "auto"},
    },
    "table1": {"table1": {"R_in": "7.99e7", "effective_concentration_mM": "58"}},
    "custom": {},
}


@dataclass
class CrystalConfig:
    process: Process
    length: float = 10e-3
    poling_period: float | None = None  # None: solve for the pump
    axes: tuple = ()
    sellmeier_file: str | None = None


@dataclass
class GridConfig:
    n_points: int = DEFAULT_POINTS
    half_span: float | None = None
    bandpass_nm: float | None = None
    bandpass_center_nm: float | None = None


@dataclass
class RunConfig:
    scenario: str
    source: SourceBudget
    detector: DetectorModel
    grid: GridConfig
    output_dir: Path
    pump: PumpSpec | None = None
    crystal: CrystalConfig | None = None
    notch: NotchFilterSpec | None = None
    sample: SampleSpec | None = None
    noise: NoiseRunConfig | None = None
    noise_auto_sigma: bool = False
    tau_max: float = DEFAULT_TAU_MAX
    n_tau: int = DEFAULT_N_TAU
    sweep_sigma_N: list = field(default_factory=list)
    sweep_lambda_N0: list = field(default_factory=list)
    fig7_samples: list = field(default_factory=list)
    R_in: float | None = None
    effective_concentration: float | None = None
    seed: int = 0
    threads: int = 1
    samples_file: str | None = None
    raw: dict = field(default_factory=dict)


def read_ini(path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", field="--config") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", field="--config") from None
    return {sec: dict(parser[sec]) for sec in parser.sections()}


def merge(*layers):
    out = {}
    for layer in layers:
        for sec, values in layer.items():
            out.setdefault(sec, {}).update(values)
    return out


def parse_override(text):
    """``section.key=value`` -> ({section: {key: value}})."""
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override {text!r} is not of the form section.key=value", field="--set")
    lhs, value = text.split("=", 1)
    sec, key = lhs.strip().split(".", 1)
    return {sec.strip(): {key.strip(): value.strip()}}


class _Reader:
    """Typed access to one section with field-named errors."""

    def __init__(self, raw, section):
        self.section = section
        self.values = raw.get(section, {})

    def name(self, key):
        return f"{self.section}.{key}"

    def has(self, key):
        return key in self.values and self.values[key].strip().lower() not in ("", "auto", "none")

    def text(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default=None, *, positive=False, nonneg=False, lo=None, hi=None):
        raw = self.values.get(key)
        if raw is None or raw.strip().lower() in ("", "auto", "none"):
            if default is None:
                raise ConfigError(f"missing required field {self.name(key)}", field=self.name(key))
            return default
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{self.name(key)}: {raw!r} is not a number", field=self.name(key)) from None
        if positive and not value > 0:
            raise ConfigError(f"{self.name(key)} must be positive (> 0), got {value:g}", field=self.name(key))
        if nonneg and value < 0:
            raise ConfigError(f"{self.name(key)} must be >= 0, got {value:g}", field=self.name(key))
        if lo is not None and hi is not None and not lo <= value <= hi:
            raise ConfigError(
                f"{self.name(key)} must lie in [{lo:g}, {hi:g}], got {value:g}", field=self.name(key)
            )
        return value

    def integer(self, key, default=None, minimum=None):
        value = self.number(key, default)
        if value != int(value):
            raise ConfigError(f"{self.name(key)} must be an integer", field=self.name(key))
        value = int(value)
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.name(key)} must be >= {minimum}, got {value}", field=self.name(key))
        return value

    def flag(self, key, default=False):
        raw = self.values.get(key)
        if raw is None or not raw.strip():
            return default
        low = raw.strip().lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"{self.name(key)}: {raw!r} is not a boolean", field=self.name(key))

    def number_list(self, key):
        raw = self.values.get(key, "")
        try:
            if ":" in raw:
                start, stop, step = (float(t) for t in raw.split(":"))
                n = int(round((stop - start) / step)) + 1
                return [start + k * step for k in range(n)]
            return [float(t) for t in raw.split(",") if t.strip()]
        except ValueError:
            raise ConfigError(f"{self.name(key)}: cannot parse list {raw!r}", field=self.name(key)) from None


def _wrap(section, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {exc}", field=section) from None


def build_config(raw, output_dir=None, seed=None, threads=None):
    """Validate a merged raw mapping into a RunConfig; no numerics are run."""
    run = _Reader(raw, "run")
    scenario = run.text("scenario", "custom").strip()
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"run.scenario must be one of {', '.join(SCENARIOS)}, got {scenario!r}", field="run.scenario"
        )
    if scenario == "custom":
        for sec in CUSTOM_REQUIRED:
            if sec not in raw:
                raise ConfigError(f"custom scenario requires a [{sec}] section", field=sec)

    src = _Reader(raw, "source")
    source = _wrap(
        "source",
        SourceBudget,
        avg_power=src.number("avg_power_W", positive=True),
        rep_rate=src.number("rep_rate_Hz", positive=True),
        pulse_duration=src.number("pulse_duration_s", positive=True),
        pump_wavelength=src.number("pump_wavelength_nm", positive=True),
        spdc_efficiency=src.number("spdc_efficiency", positive=True, lo=0, hi=1),
        beam_waist_radius=src.number("beam_waist_radius_cm", positive=True),
    )
    det = _Reader(raw, "detector")
    detector = _wrap(
        "detector",
        DetectorModel,
        beta1=det.number("beta1", lo=1e-300, hi=1),
        beta2=det.number("beta2", lo=1e-300, hi=1),
        dark1=det.number("dark1", nonneg=True),
        dark2=det.number("dark2", nonneg=True),
        accidental=det.number("accidental", nonneg=True),
        fano=det.number("fano", lo=1e-300, hi=1),
    )

    cfg = RunConfig(
        scenario=scenario,
        source=source,
        detector=detector,
        grid=GridConfig(),
        output_dir=Path(output_dir or run.text("output_dir", f"out/{scenario}")),
        seed=int(seed if seed is not None else run.integer("seed", 0, minimum=0)),
        threads=int(threads if threads is not None else run.integer("threads", 1, minimum=1)),
        raw=raw,
    )
    cfg.samples_file = run.text("samples_file") or None

    if "pump" in raw:
        p = _Reader(raw, "pump")
        cfg.pump = _wrap(
            "pump",
            PumpSpec,
            lambda_p0=p.number("lambda_p0", positive=True),
            sigma_p=p.number("sigma_p", positive=True),
        )
    if "crystal" in raw:
        c = _Reader(raw, "crystal")
        try:
            process = Process(c.text("process", "").strip().upper())
        except ValueError:
            raise ConfigError("crystal.process must be TYPE0 or TYPEII", field="crystal.process") from None
        axes = DEFAULT_AXES[process]
        axes = tuple(c.text(f"{r}_axis", a).strip() for r, a in zip(("pump", "signal", "idler"), axes))
        period = c.number("poling_period_um", positive=True) * 1e-6 if c.has("poling_period_um") else None
        cfg.crystal = CrystalConfig(
            process=process,
            length=c.number("length_mm", 10.0, positive=True) * 1e-3,
            poling_period=period,
            axes=axes,
            sellmeier_file=c.text("sellmeier_file") or None,
        )
        if process is Process.TYPE0 and len(set(axes)) != 1:
            raise ConfigError("TYPE0 requires identical pump/signal/idler axes", field="crystal.signal_axis")
        if process is Process.TYPEII and axes[1] == axes[2]:
            raise ConfigError("TYPEII requires different signal and idler axes", field="crystal.idler_axis")

    g = _Reader(raw, "grid")
    cfg.grid = GridConfig(
        n_points=g.integer("n_points", DEFAULT_POINTS, minimum=16),
        half_span=g.number("half_span_rad_s", positive=True) if g.has("half_span_rad_s") else None,
        bandpass_nm=g.number("bandpass_nm", positive=True) if g.has("bandpass_nm") else None,
        bandpass_center_nm=g.number("bandpass_center_nm", positive=True) if g.has("bandpass_center_nm") else None,
    )
    h = _Reader(raw, "hom")
    cfg.tau_max = h.number("tau_max_fs", DEFAULT_TAU_MAX * 1e15, positive=True) * 1e-15
    cfg.n_tau = h.integer("n_tau", DEFAULT_N_TAU, minimum=3)

    if "notch" in raw:
        n = _Reader(raw, "notch")
        mode = n.text("mode", "INTENSITY").strip().upper()
        if mode not in NotchMode.__members__:
            raise ConfigError("notch.mode must be INTENSITY or AMPLITUDE", field="notch.mode")
        cfg.notch = _wrap(
            "notch",
            NotchFilterSpec,
            lambda_N0=n.number("lambda_N0", positive=True),
            sigma_N=n.number("sigma_N", positive=True),
            eta=n.number("eta", lo=0, hi=1),
            mode=NotchMode(mode),
        )

    samples = None
    if "sample" in raw:
        s = _Reader(raw, "sample")
        profile = s.text("profile")
        if profile:
            samples = _load_samples(cfg)
            if profile not in samples:
                raise ConfigError(f"sample.profile {profile!r} not in the sample file", field="sample.profile")
            base = samples[profile]
        else:
            base = SampleSpec(s.text("name", "sample"), 0.0, None)
        cfg.sample = _wrap(
            "sample",
            replace,
            base,
            concentration=s.number("concentration_mM", base.concentration * 1e3, nonneg=True) * 1e-3,
            path_length=s.number("path_length_cm", base.path_length, positive=True),
            sigma_E=s.number("sigma_E_cm2", nonneg=True) if s.has("sigma_E_cm2") else base.sigma_E,
        )

    if "noise" in raw:
        z = _Reader(raw, "noise")
        model = z.text("noise_model", GAUSSIAN).strip().lower()
        if model not in (GAUSSIAN, POISSON):
            raise ConfigError("noise.noise_model must be gaussian or poisson", field="noise.noise_model")
        cfg.noise_auto_sigma = not z.has("per_bin_noise_sigma")
        cfg.noise = _wrap(
            "noise",
            NoiseRunConfig,
            n_frames=z.integer("n_frames", 100, minimum=1),
            integration_time=z.number("integration_time_s", 0.01, positive=True),
            per_bin_noise_sigma=0.0 if cfg.noise_auto_sigma else z.number("per_bin_noise_sigma", nonneg=True),
            rng_seed=cfg.seed,
            include_jsi=z.flag("include_jsi"),
            noise_model=model,
        )

    if "sweep" in raw:
        w = _Reader(raw, "sweep")
        cfg.sweep_sigma_N = w.number_list("sigma_N_nm")
        cfg.sweep_lambda_N0 = w.number_list("lambda_N0_nm")
        if not cfg.sweep_sigma_N or min(cfg.sweep_sigma_N) <= 0:
            raise ConfigError("sweep.sigma_N_nm needs positive values", field="sweep.sigma_N_nm")
        if not cfg.sweep_lambda_N0:
            raise ConfigError("sweep.lambda_N0_nm needs at least one value", field="sweep.lambda_N0_nm")

    for sec in ("fig7", "table1"):
        if sec in raw:
            t = _Reader(raw, sec)
            cfg.R_in = t.number("R_in", positive=True)
            conc = t.text("effective_concentration_mM", "").strip().lower()
            cfg.effective_concentration = None if conc in ("", "none", "strict") else (
                t.number("effective_concentration_mM", nonneg=True) * 1e-3
            )
    if "fig7" in raw:
        names = [x.strip() for x in raw["fig7"].get("samples", "").split(",") if x.strip()]
        samples = samples or _load_samples(cfg)
        for name in names:
            if name not in samples:
                raise ConfigError(f"fig7.samples: unknown profile {name!r}", field="fig7.samples")
        cfg.fig7_samples = names

    _check_scenario(cfg)
    return cfg


def _load_samples(cfg):
    try:
        return load_samples(cfg.samples_file)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read sample profiles: {exc}", field="run.samples_file") from None


def _check_scenario(cfg):
    needs = {
        "fig1": ("pump", "crystal"),
        "fig2": ("pump", "crystal"),
        "fig3": ("pump", "crystal", "notch"),
        "fig4": ("pump", "crystal", "notch"),
        "fig5": ("pump", "crystal", "notch"),
        "fig7": ("pump", "crystal", "notch", "noise"),
        "table1": (),
        "custom": ("pump", "crystal"),
    }[cfg.scenario]
    for attr in needs:
        if getattr(cfg, attr) is None:
            raise ConfigError(f"scenario {cfg.scenario} requires a [{attr}] section", field=attr)
    if cfg.scenario == "fig5" and not cfg.sweep_sigma_N:
        raise ConfigError("scenario fig5 requires a [sweep] section", field="sweep")
    if cfg.scenario in ("fig7", "table1") and cfg.R_in is None:
        raise ConfigError(f"scenario {cfg.scenario} requires {cfg.scenario}.R_in", field=f"{cfg.scenario}.R_in")
    if cfg.scenario == "fig7" and not cfg.fig7_samples:
        raise ConfigError("fig7.samples lists no sample profiles", field="fig7.samples")
    if cfg.scenario == "custom" and cfg.noise is not None and cfg.sample is None and cfg.notch is None:
        raise ConfigError("custom noise runs need a [notch] or [sample] section", field="noise")


def resolve_raw(scenario=None, config_path=None, overrides=(), flags=None):
    """Merge defaults, file, ``--set`` overrides and flags into one raw mapping."""
    file_layer = read_ini(config_path) if config_path else {}
    chosen = scenario or file_layer.get("run", {}).get("scenario") or "custom"
    if chosen not in SCENARIOS:
        raise ConfigError(f"unknown scenario {chosen!r}", field="run.scenario")
    layers = [_BASE, SCENARIO_DEFAULTS[chosen], file_layer]
    layers += [parse_override(o) for o in overrides]
    if flags:
        layers.append(flags)
    raw = merge(*layers)
    raw.setdefault("run", {})["scenario"] = chosen
    return raw


def normalized_echo(cfg):
    """Resolved configuration as INI text (defaults filled in)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    raw = merge(cfg.raw, {"run": {"output_dir": str(cfg.output_dir), "seed": str(cfg.seed), "threads": str(cfg.threads)}})
    if cfg.crystal is not None and "poling_period_um" not in raw.get("crystal", {}):
        raw["crystal"]["poling_period_um"] = "auto"
    for sec in sorted(raw, key=lambda s: (s != "run", s)):
        parser[sec] = {k: raw[sec][k] for k in sorted(raw[sec])}
    import io

    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
