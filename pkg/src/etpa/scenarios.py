"""Scenario drivers: turn a validated RunConfig into data files.

Each driver computes its quantities, writes them through an OutputWriter and
returns a summary dict. ``run_scenario`` adds the manifest.
"""

from dataclasses import replace

import numpy as np

from . import __version__
from .absorption import (
    NotchMode,
    absorbed_jsi,
    apply_notch,
    notch_for_efficiency,
    notch_from_sample,
    notch_transmission,
    realized_efficiency,
    sweep_notch,
    transmitted_fraction,
)
from .biphoton import (
    SpectralGrid,
    antidiagonal_width,
    apply_bandpass,
    build_jsa,
    default_grid,
    exchange_asymmetry,
    jsi,
    marginals,
    pump_envelope,
    state_metadata,
    tilt_angle,
    with_total_rate,
)
from .budget import (
    EFFECTIVE_CONCENTRATION,
    SampleSpec,
    classical_photon_chain,
    corrected_pair_rate,
    detection_limits,
    etpa_efficiency,
    forward_rates,
    is_detectable,
    load_samples,
    noise_floor,
    photon_budget,
    table1,
)
from .datafiles import data_path
from .dispersion import SELLMEIER_FILE, CrystalSpec, load_index_models, phase_matching_function, solve_poling_period
from .errors import Degenerate
from .hom import hom_summary, interferogram
from .noisesim import calibrate_noise, default_regions, simulate_frames
from .outputs import OutputWriter, sha256_file, sha256_text


def sellmeier_path(cfg):
    return cfg.crystal.sellmeier_file if cfg.crystal and cfg.crystal.sellmeier_file else data_path(SELLMEIER_FILE)


def samples_path(cfg):
    return cfg.samples_file or data_path("samples.ini")


def resolve_crystal(cfg):
    """CrystalSpec from the config, solving the poling period when it is 'auto'."""
    c = cfg.crystal
    models = load_index_models(sellmeier_path(cfg))
    pump, signal, idler = c.axes
    trial = CrystalSpec(c.length, c.poling_period or 10e-6, c.process, pump, signal, idler, models)
    if c.poling_period is None:
        trial = replace(trial, poling_period=solve_poling_period(trial, cfg.pump.omega_p0))
    return trial


def build_grid(cfg):
    if cfg.grid.half_span is not None:
        return SpectralGrid(cfg.grid.n_points, 0.5 * cfg.pump.omega_p0, cfg.grid.half_span)
    return default_grid(cfg.pump, cfg.grid.n_points)


def source_state(cfg):
    """(state, crystal): JSA for the configured pump/crystal, bandpass applied if configured.

    The pair rate is the photon-budget R_in carried by the full state.
    """
    crystal = resolve_crystal(cfg)
    grid = build_grid(cfg)
    state = build_jsa(cfg.pump, crystal, grid, source=cfg.source)
    if cfg.grid.bandpass_nm is not None:
        center = cfg.grid.bandpass_center_nm or 2.0 * cfg.pump.lambda_p0
        state = apply_bandpass(state, center, cfg.grid.bandpass_nm)
    return state, crystal


# ----------------------------------------------------------------- writers


def write_axes(w, grid, name="axes.csv"):
    w.columns(name, ["index", "detuning [rad/s]", "omega [rad/s]", "wavelength [nm]"],
              [np.arange(grid.n_points), grid.detuning, grid.omega, grid.wavelength_nm])


def write_marginals(w, state, name):
    g = state.grid
    m_s, m_i = marginals(state)
    w.columns(name, ["detuning [rad/s]", "wavelength [nm]", "signal [pairs/s/bin]", "idler [pairs/s/bin]"],
              [g.detuning, g.wavelength_nm, m_s, m_i])


def write_hom(w, state, cfg, stem):
    gram = interferogram(state, cfg.tau_max, cfg.n_tau)
    w.columns(f"{stem}.csv", ["tau [fs]", "coincidence rate [pairs/s]"], [gram.tau_values * 1e15, gram.rates])
    summary = hom_summary(state, gram)
    summary["exchange_asymmetry"] = exchange_asymmetry(state)
    w.json(f"{stem}.json", summary)
    return summary


def geometry(state):
    out = {"antidiagonal_width_rad_s": antidiagonal_width(state)}
    try:
        out["tilt_deg"] = tilt_angle(state)
    except Degenerate:
        out["tilt_deg"] = None
    return out


def write_state(w, state, cfg, crystal, suffix=""):
    """jsi, marginals, hom (+json) for one state."""
    w.matrix(f"jsi{suffix}.csv", jsi(state), "JSI [pairs/s per bin]")
    write_marginals(w, state, f"marginals{suffix}.csv")
    hom = write_hom(w, state, cfg, f"hom{suffix}")
    meta = state_metadata(state, cfg.pump, crystal)
    meta.update(geometry(state))
    w.json(f"jsi{suffix}.json", meta)
    return hom, meta


# --------------------------------------------------------------- scenarios


def run_source(cfg, w):
    """fig1 / fig2: JSA factors, JSI, marginals and HOM interferogram."""
    state, crystal = source_state(cfg)
    write_axes(w, state.grid)
    ws, wi = state.grid.mesh()
    w.matrix("pump_envelope.csv", np.abs(pump_envelope(ws, wi, cfg.pump)) ** 2, "|alpha|^2 [dimensionless]")
    w.matrix("phase_matching.csv", np.abs(phase_matching_function(ws, wi, crystal)) ** 2, "|phi|^2 [dimensionless]")
    hom, meta = write_state(w, state, cfg, crystal)
    return {"visibility": hom["visibility"], "fwhm_fs": hom["fwhm_fs"], "tilt_deg": meta["tilt_deg"],
            "poling_period_um": crystal.poling_period * 1e6}


def run_notch(cfg, w):
    """fig3 / fig4 (and custom with a notch): state before and after the absorber."""
    state, crystal = source_state(cfg)
    out = apply_notch(state, cfg.notch)
    write_axes(w, state.grid)
    ws, wi = state.grid.mesh()
    w.matrix("notch.csv", notch_transmission(ws, wi, cfg.notch), "h_N [dimensionless]")
    hom_in, _ = write_state(w, state, cfg, crystal, "_in")
    hom_out, _ = write_state(w, out, cfg, crystal, "_out")
    w.matrix("absorbed_jsi.csv", absorbed_jsi(state, out), "absorbed JSI [pairs/s per bin]")
    summary = {
        "notch": {"lambda_N0_nm": cfg.notch.lambda_N0, "sigma_N_nm": cfg.notch.sigma_N, "eta": cfg.notch.eta,
                  "mode": cfg.notch.mode.value},
        "visibility_in": hom_in["visibility"],
        "visibility_out": hom_out["visibility"],
        "transmitted_fraction": transmitted_fraction(state, out),
        "realized_efficiency": realized_efficiency(state, out),
        "pairs_in_per_s": state.total_rate,
        "pairs_out_per_s": out.total_rate,
    }
    w.json("notch.json", summary)
    return summary


def run_sweep(cfg, w):
    """fig5: visibility and transmission versus notch width and centre."""
    state, crystal = source_state(cfg)
    rows = sweep_notch(state, cfg.notch, cfg.sweep_sigma_N, cfg.sweep_lambda_N0, workers=cfg.threads)
    v_in = hom_summary(state, interferogram(state, cfg.tau_max, cfg.n_tau))["visibility"]
    w.columns("sweep.csv", ["sigma_N [nm]", "lambda_N0 [nm]", "visibility_out [1]", "transmitted_fraction [1]"],
              [[r.sigma_N for r in rows], [r.lambda_N0 for r in rows], [r.visibility for r in rows],
               [r.transmitted_fraction for r in rows]])
    optimum = {}
    for lam in cfg.sweep_lambda_N0:
        sub = [r for r in rows if r.lambda_N0 == lam]
        best = min(sub, key=lambda r: r.visibility)
        optimum[f"{lam:g}"] = {"sigma_N_nm": best.sigma_N, "visibility_out": best.visibility}
    summary = {"visibility_in": v_in, "eta": cfg.notch.eta, "mode": cfg.notch.mode.value, "argmin": optimum,
               "poling_period_um": crystal.poling_period * 1e6}
    w.json("sweep.json", summary)
    return summary


def _effective(sample, concentration):
    if concentration is None:
        return sample
    return replace(sample, concentration=concentration)


def absorption_pair(state, sample, R_in, concentration=None, eta=0.9, mode=NotchMode.INTENSITY):
    """(state_in, state_out, eta_E) for one sample profile.

    The input carries ``R_in`` pairs/s in total. The notch takes the sample's
    band centre and width, and its depth is scaled so that the absorbed
    fraction equals the sample's ETPA efficiency (at ``concentration`` when
    given, else at the listed one).
    """
    eta_E = etpa_efficiency(_effective(sample, concentration))
    state_in = with_total_rate(state, R_in)
    notch = notch_for_efficiency(state_in, notch_from_sample(sample, eta, mode), eta_E)
    return state_in, apply_notch(state_in, notch), eta_E


def calibrated_noise(base, state_in, R_in, fano, seed=None):
    """``base`` with default signal/background regions and the calibrated per-bin sigma.

    The sigma makes the band-summed difference of the two noisy spectra
    fluctuate by sqrt(F R_in T) per frame.
    """
    signal, background = default_regions(state_in)
    n_signal = sum(b - a for a, b in signal)
    sigma = calibrate_noise(R_in, fano, n_signal, base.integration_time, arms=2)
    seed = base.rng_seed if seed is None else seed
    return replace(base, background_region=background, signal_region=signal, per_bin_noise_sigma=sigma,
                   rng_seed=seed)


def fig7_pair(cfg, sample, state):
    return absorption_pair(state, sample, cfg.R_in, cfg.effective_concentration, cfg.notch.eta, cfg.notch.mode)


def noise_config(cfg, state_in):
    """Noise settings for a run: regions always, calibrated sigma when the config says 'auto'."""
    noise = calibrated_noise(cfg.noise, state_in, cfg.R_in, cfg.detector.fano, cfg.seed)
    if not cfg.noise_auto_sigma:
        noise = replace(noise, per_bin_noise_sigma=cfg.noise.per_bin_noise_sigma)
    return noise


def _tag(name):
    return "".join(ch if ch.isalnum() else "_" for ch in name).strip("_").lower()


def run_fig7(cfg, w):
    """Noise-accumulated absorbed marginals for each configured sample profile."""
    state, crystal = source_state(cfg)
    samples = load_samples(samples_path(cfg))
    write_axes(w, state.grid)
    results = {}
    for name in cfg.fig7_samples:
        sample = samples[name]
        s_in, s_out, eta_E = fig7_pair(cfg, sample, state)
        noise = noise_config(cfg, s_in)
        res = simulate_frames(s_in, s_out, noise, workers=cfg.threads)
        tag = _tag(name)
        g = state.grid
        w.columns(
            f"absorbed_{tag}.csv",
            ["detuning [rad/s]", "wavelength [nm]", "signal_absorbed [counts]", "idler_absorbed [counts]",
             "signal_expected [counts]", "idler_expected [counts]", "signal_in [counts]", "signal_out [counts]"],
            [g.detuning, g.wavelength_nm, res.absorbed[0], res.absorbed[1], res.expected_absorbed[0],
             res.expected_absorbed[1], res.marginals_in[0], res.marginals_out[0]],
        )
        w.matrix(f"absorbed_jsi_{tag}.csv", absorbed_jsi(s_in, s_out), "absorbed JSI [pairs/s per bin]")
        floor = noise_floor(cfg.R_in, cfg.detector.fano)
        r_abs = eta_E * cfg.R_in
        results[name] = {
            "eta_E": eta_E,
            "realized_efficiency": realized_efficiency(s_in, s_out),
            "R_abs_pairs_s": r_abs,
            "single_shot_snr": r_abs / floor,
            "accumulated_snr": res.snr,
            "accumulated_snr_db": res.snr_db,
            "peak_snr": res.peak_snr,
            "per_bin_noise_sigma": noise.per_bin_noise_sigma,
            "n_frames": noise.n_frames,
            "integration_time_s": noise.integration_time,
            "file": f"absorbed_{tag}.csv",
        }
    summary = {"R_in": cfg.R_in, "noise_floor": noise_floor(cfg.R_in, cfg.detector.fano), "seed": cfg.seed,
               "samples": results, "state": state_metadata(state, cfg.pump, crystal)}
    w.json("fig7.json", summary)
    return summary


def run_table1(cfg, w):
    """Table of ETPA efficiencies and absorbed rates plus the photon and detection budgets."""
    samples = [s for s in load_samples(samples_path(cfg)).values() if s.table1]
    rows, caption = table1(samples, cfg.R_in, cfg.detector.fano, cfg.effective_concentration)
    header = ["sample", "concentration [mM]", "sigma_C [GM]", "sigma_E [cm^2]", "R_abs [pairs/s]", "eta_E [1]",
              "detectable"]
    cells = [[r.name, r.concentration * 1e3, r.sigma_C, r.sigma_E, r.R_abs, r.eta_E, r.detectable] for r in rows]
    w.table("table1.csv", header, cells)
    w.text("table1.txt", format_table(rows, caption, cfg.effective_concentration))

    pb = photon_budget(cfg.source)
    # detection limits depend only on the geometry: 1 cm cell at the effective concentration
    reference = SampleSpec("reference", cfg.effective_concentration or EFFECTIVE_CONCENTRATION, None)
    verdicts = {s.name: is_detectable(_effective(s, cfg.effective_concentration), cfg.R_in, cfg.detector.fano)
                for s in samples if s.sigma_E is not None}
    singles = forward_rates(cfg.R_in, cfg.detector)
    klyshko = corrected_pair_rate(*singles, cfg.detector)
    per_pulse, per_second = classical_photon_chain(pb.E_pulse, cfg.source.pump_wavelength, cfg.source.rep_rate)
    eta_min, sigma_min = detection_limits(cfg.R_in, cfg.detector.fano, reference)
    w.json("budget.json", {
        "caption": caption,
        "effective_concentration_mol_L": cfg.effective_concentration,
        "photon_budget": pb.__dict__,
        "detection_limits": {"eta_min": eta_min, "sigma_E_min_cm2": sigma_min},
        "verdicts": {k: v.__dict__ for k, v in verdicts.items()},
        "coincidence_model": {"R1": singles[0], "R2": singles[1], "R12": singles[2], **klyshko.__dict__},
        "classical_chain": {"photons_per_pulse": per_pulse, "photons_per_s": per_second},
    })
    return {"rows": len(rows), **caption}


def format_table(rows, caption, conc):
    head = f"{'sample':<28}{'C [mM]':>10}{'sigma_C [GM]':>14}{'sigma_E [cm^2]':>16}{'R_abs [1/s]':>14}" \
           f"{'eta_E':>12}  detectable"
    lines = [head, "-" * len(head)]
    for r in rows:
        def f(v, spec, width):
            return format(v, spec) if v is not None else "-".rjust(width)

        det = "-" if r.detectable is None else ("yes" if r.detectable else "no")
        lines.append(f"{r.name:<28}{f(r.concentration * 1e3, '>10.3g', 10)}{f(r.sigma_C, '>14g', 14)}"
                     f"{f(r.sigma_E, '>16.3e', 16)}{f(r.R_abs, '>14.2f', 14)}{f(r.eta_E, '>12.3e', 12)}  {det}")
    lines.append("")
    lines.append(f"R_in = {caption['R_in']:.4g} pairs/s, delta R_det = {caption['noise_floor']:.1f} pairs/s "
                 f"(F = {caption['fano']:g})")
    if conc is not None:
        lines.append(f"all rows evaluated at C = {conc * 1e3:g} mM, path length 1 cm")
    return "\n".join(lines) + "\n"


def run_custom(cfg, w):
    if cfg.notch is not None:
        summary = run_notch(cfg, w)
    else:
        summary = run_source(cfg, w)
    state, crystal = source_state(cfg)
    if cfg.sample is not None and cfg.sample.sigma_E is not None:
        R_in = cfg.R_in or state.total_rate
        verdict = is_detectable(cfg.sample, R_in, cfg.detector.fano)
        summary["detection"] = verdict.__dict__
        w.json("budget.json", {"photon_budget": photon_budget(cfg.source).__dict__, "detection": verdict.__dict__})
    if cfg.noise is not None:
        tmp = replace(cfg, R_in=cfg.R_in or state.total_rate)
        if cfg.sample is not None and cfg.sample.sigma_E is not None and cfg.sample.lambda_N0 is not None:
            s_in, s_out, _ = fig7_pair(replace(tmp, effective_concentration=None), cfg.sample, state)
        else:
            s_in = with_total_rate(state, tmp.R_in)
            s_out = apply_notch(s_in, cfg.notch)
        noise = noise_config(tmp, s_in)
        res = simulate_frames(s_in, s_out, noise, workers=cfg.threads)
        g = state.grid
        w.columns("absorbed.csv",
                  ["detuning [rad/s]", "wavelength [nm]", "signal_absorbed [counts]", "idler_absorbed [counts]",
                   "signal_expected [counts]", "idler_expected [counts]"],
                  [g.detuning, g.wavelength_nm, res.absorbed[0], res.absorbed[1], res.expected_absorbed[0],
                   res.expected_absorbed[1]])
        summary["noise"] = {"snr": res.snr, "snr_db": res.snr_db, "peak_snr": res.peak_snr, "seed": cfg.seed,
                            "per_bin_noise_sigma": noise.per_bin_noise_sigma}
        w.json("noise.json", summary["noise"])
    return summary


DRIVERS = {
    "fig1": run_source,
    "fig2": run_source,
    "fig3": run_notch,
    "fig4": run_notch,
    "fig5": run_sweep,
    "fig7": run_fig7,
    "table1": run_table1,
    "custom": run_custom,
}


def run_scenario(cfg, config_echo):
    """Run ``cfg.scenario`` into ``cfg.output_dir``; returns (summary, manifest)."""
    w = OutputWriter(cfg.output_dir)
    w.text("config.ini", config_echo)
    summary = DRIVERS[cfg.scenario](cfg, w)
    summary = {"scenario": cfg.scenario, "seed": cfg.seed, "version": __version__, **summary}
    w.json("summary.json", summary)
    inputs = {"config_sha256": sha256_text(config_echo)}
    if cfg.crystal is not None:
        inputs["sellmeier_sha256"] = sha256_file(sellmeier_path(cfg))
    if cfg.scenario in ("fig7", "table1") or cfg.sample is not None:
        inputs["samples_sha256"] = sha256_file(samples_path(cfg))
    manifest = w.manifest(cfg.scenario, inputs, cfg.seed)
    return summary, manifest
