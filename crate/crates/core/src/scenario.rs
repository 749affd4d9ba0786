//! Scenario orchestration: each scenario reads a resolved [`ScenarioConfig`],
//! runs the simulation and writes its CSV, report and optional SVG files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::power_law_exponent;
use crate::bloch::{evolve, Conservation, Stepping};
use crate::config::ScenarioConfig;
use crate::density::DensityMatrix;
use crate::eit::{group_delay, susceptibility_spectrum, symmetric_grid, EitDrive};
use crate::ensemble::{coherent_spin_state, ensemble_evolve, fid_decay_time, two_photon_map};
use crate::error::{Error, Result};
use crate::fwm::{detector_intensity, onset_index, phase_match, sweep_readout, verify_conversion_law, WaveVector};
use crate::medium::MediumParams;
use crate::output::{
    render_lines_svg, render_map_svg, render_svg, write_csv, write_map_csv, write_table, write_text,
};
use crate::propagation::{extract_delay, propagate_pulse, DelayMethod, Envelope, PropagationGrid};
use crate::pulse::{Edge, Pulse, PulseSequence, Transition};
use crate::routing::{route, RoutingSetup};
use crate::series::{Channel, TimeSeries};

pub const SCENARIOS: [&str; 8] = [
    "fig2",
    "fig3",
    "fid",
    "eit-spectrum",
    "slowlight",
    "routing",
    "detuning-sweep",
    "phase-match",
];

/// What a scenario produced.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    /// Files written, in write order.
    pub files: Vec<PathBuf>,
    /// Named scalar results, also written to `report.txt`.
    pub metrics: Vec<(String, f64)>,
    /// Free-form report lines.
    pub notes: Vec<String>,
    pub conservation: Conservation,
}

impl ScenarioReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            files: Vec::new(),
            metrics: Vec::new(),
            notes: Vec::new(),
            conservation: Conservation::default(),
        }
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.push((key.to_string(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn text(&self) -> String {
        let mut out = format!("scenario = {}\n", self.name);
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{k} = {v}");
        }
        let c = &self.conservation;
        let _ = writeln!(out, "max_trace_error = {}", c.max_trace_error);
        let _ = writeln!(out, "max_hermiticity_error = {}", c.max_hermiticity_error);
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out
    }
}

struct Sink<'a> {
    dir: &'a Path,
    svg: bool,
    report: ScenarioReport,
}

impl Sink<'_> {
    fn path(&mut self, file: &str) -> PathBuf {
        let p = self.dir.join(file);
        self.report.files.push(p.clone());
        p
    }

    fn series(&mut self, file: &str, ts: &TimeSeries, title: &str, channels: &[Channel]) -> Result<()> {
        let p = self.path(&format!("{file}.csv"));
        write_csv(ts, &p)?;
        if self.svg {
            let p = self.path(&format!("{file}.svg"));
            render_svg(ts, channels, title, &p)?;
        }
        Ok(())
    }
}

/// Runs `name` with `cfg`, writing into `cfg.out_dir()`.
pub fn run_scenario(name: &str, cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    if !SCENARIOS.contains(&name) {
        return Err(Error::UnknownScenario {
            name: name.to_string(),
            valid: SCENARIOS.join(", "),
        });
    }
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut sink = Sink {
        dir: &dir,
        svg: cfg.flag("svg"),
        report: ScenarioReport::new(name),
    };
    let resolved = sink.path("resolved_config.txt");
    write_text(&resolved, &cfg.resolved_text())?;
    match name {
        "fig2" => fig2(cfg, &mut sink)?,
        "fig3" => fig3(cfg, &mut sink)?,
        "fid" => fid(cfg, &mut sink)?,
        "eit-spectrum" => eit_spectrum(cfg, &mut sink)?,
        "slowlight" => slowlight(cfg, &mut sink)?,
        "routing" => routing(cfg, &mut sink)?,
        "detuning-sweep" => detuning_sweep(cfg, &mut sink)?,
        "phase-match" => phase_match_report(cfg, &mut sink)?,
        _ => unreachable!(),
    }
    let report_path = sink.path("report.txt");
    write_text(&report_path, &sink.report.text())?;
    Ok(sink.report)
}

fn stepping(cfg: &ScenarioConfig) -> Stepping {
    Stepping::new(cfg.real("dt_us"), cfg.count("output_stride"))
}

fn pulse(
    cfg: &ScenarioConfig,
    transition: Transition,
    rabi: f64,
    t_on: f64,
    t_off: f64,
) -> Result<Pulse> {
    let edge_us = cfg.real("edge_us");
    let edge = if edge_us > 0.0 {
        Edge::RaisedCosine { edge_us }
    } else {
        Edge::Square
    };
    let detuning = match transition {
        Transition::Probe => cfg.real("probe_detuning_khz"),
        Transition::Coupling => cfg.real("coupling_detuning_khz"),
    };
    Pulse::new(transition, rabi, t_on, t_off, edge, detuning)
}

/// Preparation pulses E_P and Ω_C over `[0, prep_len_us]`.
fn preparation(cfg: &ScenarioConfig, probe_rabi: f64) -> Result<Vec<Pulse>> {
    let len = cfg.real("prep_len_us");
    Ok(vec![
        pulse(cfg, Transition::Probe, probe_rabi, 0.0, len)?,
        pulse(cfg, Transition::Coupling, cfg.real("coupling_rabi_khz"), 0.0, len)?,
    ])
}

/// Full fig2 sequence: preparation, free evolution, read-out.
fn fig2_sequence(cfg: &ScenarioConfig, probe_rabi: f64) -> Result<PulseSequence> {
    let start = cfg.real("readout_start_us");
    let end = start + cfg.real("readout_len_us");
    let mut pulses = preparation(cfg, probe_rabi)?;
    pulses.push(pulse(cfg, Transition::Coupling, cfg.real("readout_rabi_khz"), start, end)?);
    PulseSequence::new(pulses, end)
}

fn integral(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

fn fig2(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let step = stepping(cfg);
    let seq = fig2_sequence(cfg, cfg.real("probe_rabi_khz"))?;
    let rho0 = DensityMatrix::ground();
    let ens = ensemble_evolve(&rho0, &seq, &params, &cfg.ensemble(), &step)?;
    sink.report.conservation.merge(&ens.conservation);
    sink.series(
        "fig2_timeseries",
        &ens.series,
        "ensemble-averaged coherences",
        &[Channel::ReRho12, Channel::ImRho13, Channel::Pop3],
    )?;

    let start = cfg.real("readout_start_us");
    let prep_end = cfg.real("prep_len_us");
    let ts = &ens.series;
    let re12 = ts.channel(Channel::ReRho12)?;
    let k_prep = ts.index_at(prep_end).unwrap_or(0);
    let k_read = ts.index_at(start).unwrap_or(0);
    sink.report.metric("re_rho12_at_prep_end", re12[k_prep]);
    sink.report.metric("re_rho12_at_readout_start", re12[k_read]);
    sink.report.metric("re_rho12_at_end", *re12.last().unwrap_or(&0.0));
    let w = ts.window(start, seq.total_duration_us());
    sink.report
        .metric("readout_integral_im_rho13", integral(w.t_us(), w.channel(Channel::ImRho13)?));

    let lo = cfg.real("map_delta2_min_khz");
    let hi = cfg.real("map_delta2_max_khz");
    let n = cfg.count("map_points");
    let grid = linspace(lo, hi, n)?;
    for (channel, file, title) in [
        (Channel::ImRho13, "fig2_map_im_rho13", "Im ρ13 over two-photon detuning"),
        (Channel::ReRho12, "fig2_map_re_rho12", "Re ρ12 over two-photon detuning"),
    ] {
        let map = two_photon_map(&rho0, &seq, &params, &grid, &step, channel)?;
        let p = sink.path(&format!("{file}.csv"));
        write_map_csv(&map, &p)?;
        if sink.svg {
            let p = sink.path(&format!("{file}.svg"));
            render_map_svg(&map, title, &p)?;
        }
        if channel == Channel::ReRho12 {
            let col = map.column_at(prep_end);
            let (k, _) = col
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
            sink.report.metric("map_peak_abs_re_rho12_delta2_khz", map.delta2_khz[k]);
        }
    }
    // conservation of the map members
    let members = grid
        .par_iter()
        .map(|&d| evolve(&rho0, &seq, &params, d, &step).map(|e| e.conservation))
        .collect::<Result<Vec<_>>>()?;
    for c in &members {
        sink.report.conservation.merge(c);
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || (n > 1 && !(hi > lo)) {
        return Err(Error::InvalidInput(format!(
            "grid [{lo}, {hi}] with {n} points is empty"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            if v.abs() < 1e-12 * (hi - lo) {
                0.0
            } else {
                v
            }
        })
        .collect())
}

/// Single homogeneous member prepared by the fig2 pulses and left to t = read-out start.
pub fn prepared_state(cfg: &ScenarioConfig, params: &MediumParams) -> Result<(TimeSeries, DensityMatrix, Conservation)> {
    let seq = PulseSequence::new(
        preparation(cfg, cfg.real("probe_rabi_khz"))?,
        cfg.real("readout_start_us"),
    )?;
    let ev = evolve(&DensityMatrix::ground(), &seq, params, 0.0, &stepping(cfg))?;
    Ok((ev.series, ev.final_state, ev.conservation))
}

fn fig3(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let (prep, rho_start, cons) = prepared_state(cfg, &params)?;
    sink.report.conservation.merge(&cons);
    let start = cfg.real("readout_start_us");
    let template = pulse(
        cfg,
        Transition::Coupling,
        0.0,
        start,
        start + cfg.real("sweep_readout_len_us"),
    )?;
    let rabis = cfg.reals("sweep_rabi_khz");
    let results = sweep_readout(&rho_start, &rabis, &template, &params, &stepping(cfg))?;

    let mut cols: [Vec<f64>; 8] = Default::default();
    for r in &results {
        sink.report.conservation.merge(&r.conservation);
        let full = prep.concat(&r.series)?;
        sink.series(
            &format!("fig3_omega_a_{:03}khz", r.omega_a_khz.round() as i64),
            &full,
            &format!("read-out Ω_A = {} kHz", r.omega_a_khz),
            &[Channel::ReRho12, Channel::ImRho13],
        )?;
        let fit = verify_conversion_law(r)?;
        let t = r.series.t_us();
        let re = r.series.channel(Channel::ReRho12)?;
        let im = r.series.channel(Channel::ImRho13)?;
        cols[0].push(r.omega_a_khz);
        cols[1].push(fit.pearson_r);
        cols[2].push(fit.scale);
        cols[3].push(fit.max_residual);
        cols[4].push(if r.oscillation_detected { 1.0 } else { 0.0 });
        cols[5].push(r.slope_reversals as f64);
        cols[6].push(re.last().unwrap().abs() - re[0].abs());
        cols[7].push(integral(t, im));
    }
    let p = sink.path("fig3_conversion_fit.csv");
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    write_table(
        &p,
        &[
            "omega_a_khz",
            "pearson_r",
            "scale",
            "max_residual",
            "oscillation_detected",
            "slope_reversals",
            "abs_re_rho12_change",
            "integral_im_rho13",
        ],
        &refs,
    )?;
    let min_r = cols[1].iter().cloned().fold(f64::INFINITY, f64::min);
    sink.report.metric("min_pearson_r", min_r);
    let detected: Vec<bool> = results.iter().map(|r| r.oscillation_detected).collect();
    match onset_index(&detected) {
        Some(i) => {
            sink.report.metric("oscillation_onset_khz", rabis[i]);
            sink.report.notes.push(format!(
                "oscillation onset between {} and {} kHz",
                rabis[i - 1],
                rabis[i]
            ));
        }
        None => sink
            .report
            .notes
            .push(format!("no single oscillation onset; detected = {detected:?}")),
    }
    if sink.svg {
        let t = results[0].series.t_us().to_vec();
        let names: Vec<String> = rabis.iter().map(|r| format!("{r} kHz")).collect();
        let curves: Vec<(&str, &[f64])> = names
            .iter()
            .zip(&results)
            .filter(|(_, r)| r.series.len() == t.len())
            .map(|(n, r)| (n.as_str(), r.series.channel(Channel::EdArb).unwrap()))
            .collect();
        let p = sink.path("fig3_e_d.svg");
        render_lines_svg(&p, "E_D (Im ρ13) during read-out", "t (μs)", "Im ρ13", &t, &curves)?;
    }
    Ok(())
}

fn fid(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let seq = PulseSequence::free(0.0, cfg.real("fid_duration_us"))?;
    let spec = cfg.ensemble();
    let ens = ensemble_evolve(&coherent_spin_state(), &seq, &params, &spec, &stepping(cfg))?;
    sink.report.conservation.merge(&ens.conservation);
    sink.series("fid", &ens.series, "free induction decay", &[Channel::ReRho12, Channel::ImRho12])?;
    let t2 = fid_decay_time(&ens.series, Channel::ReRho12, 0.0)?;
    sink.report.metric("t2_star_us", t2);
    let width_per_us = spec.fwhm_khz * 1e-3;
    let analytic = match spec.distribution {
        crate::ensemble::Distribution::Lorentzian => 1.0 / (std::f64::consts::PI * width_per_us),
        crate::ensemble::Distribution::Gaussian => {
            2.0 * 2f64.ln().sqrt() / (std::f64::consts::PI * width_per_us)
        }
    };
    sink.report.metric("t2_star_analytic_us", analytic);
    Ok(())
}

fn cw_drive(cfg: &ScenarioConfig, coupling: f64) -> EitDrive {
    EitDrive {
        probe_rabi_khz: cfg.real("cw_probe_rabi_khz"),
        coupling_rabi_khz: coupling,
        coupling_detuning_khz: 0.0,
    }
}

/// Group delay predicted from the dispersion slope for CW coupling `coupling_khz`.
pub fn predicted_delay(params: &MediumParams, probe_khz: f64, coupling_khz: f64) -> Result<f64> {
    let h = (coupling_khz / 40.0).min(1.0).max(1e-3);
    let spec = susceptibility_spectrum(
        params,
        &symmetric_grid(2.0 * h, 5),
        &EitDrive {
            probe_rabi_khz: probe_khz,
            coupling_rabi_khz: coupling_khz,
            coupling_detuning_khz: 0.0,
        },
    )?;
    Ok(group_delay(&spec, params)?.delay_us)
}

fn eit_spectrum(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let grid = symmetric_grid(cfg.real("spectrum_half_width_khz"), cfg.count("spectrum_points"));
    let drive = cw_drive(cfg, cfg.real("cw_coupling_rabi_khz"));
    let spec = susceptibility_spectrum(&params, &grid, &drive)?;
    let p = sink.path("eit_spectrum.csv");
    write_table(
        &p,
        &["probe_detuning_khz", "chi_re", "chi_im"],
        &[&spec.probe_detuning_khz, &spec.chi_re, &spec.chi_im],
    )?;
    if sink.svg {
        let p = sink.path("eit_spectrum.svg");
        render_lines_svg(
            &p,
            "EIT susceptibility",
            "δ_P (kHz)",
            "χ (μs)",
            &spec.probe_detuning_khz,
            &[("Re χ", &spec.chi_re), ("Im χ", &spec.chi_im)],
        )?;
    }
    let g = group_delay(&spec, &params)?;
    sink.report.metric("group_delay_us", g.delay_us);
    sink.report.metric("vacuum_transit_us", g.vacuum_transit_us);
    sink.report.metric("group_velocity_mm_per_us", g.group_velocity_mm_per_us);
    sink.report.metric("group_index", g.group_index);
    sink.report.metric("dispersion_slope_us2", g.slope);

    let couplings = cfg.reals("omega_c_sweep_khz");
    let delays = couplings
        .iter()
        .map(|&c| predicted_delay(&params, cfg.real("cw_probe_rabi_khz"), c))
        .collect::<Result<Vec<_>>>()?;
    let p = sink.path("eit_delay_scaling.csv");
    write_table(&p, &["coupling_rabi_khz", "group_delay_us"], &[&couplings, &delays])?;
    if couplings.len() >= 2 {
        let exponent = power_law_exponent(&couplings, &delays)?;
        sink.report.metric("delay_vs_coupling_exponent", exponent);
        sink.report
            .notes
            .push("delay falls as Ω_C^-2 in the weak-probe model; the fitted exponent is reported".into());
    }
    Ok(())
}

fn input_pulse(cfg: &ScenarioConfig) -> Result<Envelope> {
    Envelope::gaussian(
        cfg.real("probe_center_us"),
        cfg.real("probe_len_us"),
        cfg.real("cw_probe_rabi_khz"),
        cfg.real("window_us"),
        cfg.real("dt_us"),
    )
}

/// `values` delayed by `shift` on the same grid, linearly interpolated.
fn shifted(t: &[f64], values: &[f64], shift: f64) -> Vec<f64> {
    let dt = t[1] - t[0];
    t.iter()
        .map(|&x| {
            let s = (x - shift - t[0]) / dt;
            if s < 0.0 || s > (t.len() - 1) as f64 {
                return 0.0;
            }
            let k = (s.floor() as usize).min(t.len() - 2);
            let f = s - k as f64;
            values[k] * (1.0 - f) + values[k + 1] * f
        })
        .collect()
}

fn slowlight(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let input = input_pulse(cfg)?;
    let coupling = cfg.real("cw_coupling_rabi_khz");
    let grid = PropagationGrid {
        n_slabs: cfg.count("n_slabs"),
    };
    let res = propagate_pulse(&input, coupling, &params, &grid)?;
    sink.report.conservation.merge(&res.conservation);
    let tin = input.trace();
    let tout = res.output.trace();
    let peak = extract_delay(&tin, &tout, DelayMethod::Peak)?;
    let centroid = extract_delay(&tin, &tout, DelayMethod::Centroid)?;
    let predicted = predicted_delay(&params, input.peak_khz(), coupling)?;
    let overlay = shifted(&tin.t_us, &tin.values, predicted);
    let p = sink.path("slowlight_envelopes.csv");
    write_table(
        &p,
        &["t_us", "input_abs_khz", "output_abs_khz", "predicted_abs_khz"],
        &[&tin.t_us, &tin.values, &tout.values, &overlay],
    )?;
    let z: Vec<f64> = (0..res.slab_energy.len())
        .map(|i| params.length_mm * i as f64 / grid.n_slabs as f64)
        .collect();
    let p = sink.path("slowlight_slab_energy.csv");
    write_table(&p, &["z_mm", "energy_khz2_us"], &[&z, &res.slab_energy])?;
    if sink.svg {
        let p = sink.path("slowlight_envelopes.svg");
        render_lines_svg(
            &p,
            "slow light",
            "t (μs)",
            "|Ω_P| (kHz)",
            &tin.t_us,
            &[("input", &tin.values), ("output", &tout.values), ("predicted", &overlay)],
        )?;
    }
    sink.report.metric("delay_peak_us", peak);
    sink.report.metric("delay_centroid_us", centroid);
    sink.report.metric("predicted_delay_us", predicted);
    sink.report.metric("energy_ratio", res.output.energy() / input.energy());
    sink.report.metric("delay_over_pulse_len", peak / cfg.real("probe_len_us"));
    Ok(())
}

fn routing(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let setup = RoutingSetup {
        probe: input_pulse(cfg)?,
        coupling_khz: cfg.real("cw_coupling_rabi_khz"),
        readout_rabi_khz: cfg.real("routing_readout_rabi_khz"),
        readout_start_us: cfg.real("routing_readout_start_us"),
        readout_len_us: cfg.real("routing_readout_len_us"),
        n_phases: cfg.count("n_phases"),
    };
    let grid = PropagationGrid {
        n_slabs: cfg.count("n_slabs"),
    };
    let r = route(&setup, &params, &grid)?;
    sink.report.conservation.merge(&r.conservation);
    let t = setup.probe.times();
    let input = setup.probe.magnitudes();
    let reference = r.reference.magnitudes();
    let signal = r.signal.magnitudes();
    let ed = r.readout.magnitudes();
    let id: Vec<f64> = ed.iter().map(|v| v * v).collect();
    let p = sink.path("routing_traces.csv");
    write_table(
        &p,
        &["t_us", "e_p_abs_khz", "e_s_reference_abs_khz", "e_s_abs_khz", "e_d_abs_khz", "i_d_khz2"],
        &[&t, &input, &reference, &signal, &ed, &id],
    )?;
    if sink.svg {
        let p = sink.path("routing_traces.svg");
        render_lines_svg(
            &p,
            "delayed routing",
            "t (μs)",
            "|Ω| (kHz)",
            &t,
            &[("E_P in", &input), ("E_S no read-out", &reference), ("E_S", &signal), ("E_D", &ed)],
        )?;
    }
    let e_in = setup.probe.energy();
    sink.report.metric("reference_energy_ratio", r.reference.energy() / e_in);
    sink.report.metric("signal_energy_ratio", r.signal.energy() / e_in);
    sink.report.metric("readout_energy_ratio", r.readout.energy() / e_in);
    sink.report.metric("readout_peak_khz", r.readout.peak_khz());
    Ok(())
}

fn detuning_sweep(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg.medium();
    let step = Stepping {
        record_states: false,
        ..stepping(cfg)
    };
    let grid = linspace(
        cfg.real("sweep_detuning_min_khz"),
        cfg.real("sweep_detuning_max_khz"),
        cfg.count("sweep_points"),
    )?;
    let start = cfg.real("readout_start_us");
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for (label, probe) in [("low", cfg.real("low_probe_rabi_khz")), ("high", cfg.real("high_probe_rabi_khz"))] {
        let seq = fig2_sequence(cfg, probe)?;
        for mode in ["two_photon", "one_photon"] {
            let runs = grid
                .par_iter()
                .map(|&d| {
                    let (seq, dinh) = if mode == "two_photon" {
                        (seq.clone(), d)
                    } else {
                        let pulses = seq
                            .pulses()
                            .iter()
                            .map(|p| Pulse { detuning_khz: d, ..*p })
                            .collect();
                        (PulseSequence::new(pulses, seq.total_duration_us())?, 0.0)
                    };
                    let ev = evolve(&DensityMatrix::ground(), &seq, &params, dinh, &step)?;
                    let w = ev.series.window(start, seq.total_duration_us());
                    let peak = detector_intensity(&w)?.into_iter().fold(0.0, f64::max);
                    Ok((peak, ev.conservation))
                })
                .collect::<Result<Vec<_>>>()?;
            let peaks: Vec<f64> = runs.iter().map(|r| r.0).collect();
            for r in &runs {
                sink.report.conservation.merge(&r.1);
            }
            let k = peaks
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a })
                .0;
            sink.report
                .metric(&format!("argmax_{mode}_{label}_khz"), grid[k]);
            columns.push((format!("peak_i_d_{mode}_{label}"), peaks));
        }
    }
    let mut header = vec!["detuning_khz"];
    header.extend(columns.iter().map(|(n, _)| n.as_str()));
    let mut cols: Vec<&[f64]> = vec![&grid];
    cols.extend(columns.iter().map(|(_, v)| v.as_slice()));
    let p = sink.path("detuning_sweep.csv");
    write_table(&p, &header, &cols)?;
    if sink.svg {
        let curves: Vec<(&str, &[f64])> = columns.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
        let p = sink.path("detuning_sweep.svg");
        render_lines_svg(&p, "peak E_D intensity", "detuning (kHz)", "peak (Im ρ13)²", &grid, &curves)?;
    }
    sink.report
        .notes
        .push("two_photon shifts the spin transition; one_photon detunes both fields together".into());
    Ok(())
}

fn phase_match_report(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let k0 = std::f64::consts::TAU / (cfg.real("wavelength_nm") * 1e-9);
    let beam = |key: &str| WaveVector::in_plane(k0, cfg.real(key) * 1e-3);
    let (kp, kc, ka) = (beam("theta_p_mrad"), beam("theta_c_mrad"), beam("theta_a_mrad"));
    let (kd, mismatch) = phase_match(kc, kp, ka, k0);
    let mut text = String::from("beam,kx_rad_per_m,ky_rad_per_m,kz_rad_per_m,theta_mrad\n");
    for (name, k) in [("P", kp), ("C", kc), ("A", ka), ("D", kd)] {
        let _ = writeln!(text, "{name},{},{},{},{}", k.kx, k.ky, k.kz, k.angle_rad() * 1e3);
    }
    let p = sink.path("phase_match.csv");
    write_text(&p, &text)?;
    sink.report.metric("k0_rad_per_m", k0);
    sink.report.metric("theta_d_mrad", kd.angle_rad() * 1e3);
    sink.report.metric("k_d_norm_rad_per_m", kd.norm());
    sink.report.metric("mismatch_rad_per_m", mismatch);
    sink.report.metric("mismatch_over_k0", mismatch / k0);
    Ok(())
}
