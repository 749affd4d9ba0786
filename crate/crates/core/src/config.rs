//! Flat `key = value` scenario configuration.
//!
//! Precedence is defaults, then the config file, then `--set` overrides. Every
//! dimensioned key carries its unit as a suffix (`_khz`, `_us`, `_mm`,
//! `_mrad`, `_nm`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ensemble::{Distribution, EnsembleSpec, Sampling};
use crate::error::{Error, Result};
use crate::medium::MediumParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Seed,
    Flag,
    Choice(&'static [&'static str]),
    RealList,
    Text,
}

struct Key {
    name: &'static str,
    default: &'static str,
    kind: Kind,
    doc: &'static str,
}

const fn key(name: &'static str, default: &'static str, kind: Kind, doc: &'static str) -> Key {
    Key {
        name,
        default,
        kind,
        doc,
    }
}

use Kind::*;

const SCHEMA: &[Key] = &[
    // medium
    key("gamma12_khz", "0", Real, "spin dephasing rate; coherence decays as exp(-2π·γ·t)"),
    key("gamma13_khz", "1", Real, "optical coherence decay rate on |1>-|3>"),
    key("gamma23_khz", "1", Real, "optical coherence decay rate on |2>-|3>"),
    key("decay31_khz", "0", Real, "population decay |3> -> |1>"),
    key("decay32_khz", "0", Real, "population decay |3> -> |2>"),
    key("delta_s_khz", "30", Real, "spin inhomogeneous FWHM"),
    key("length_mm", "3", Real, "medium length"),
    key("coupling_const", "17", Real, "atom-field coupling in rad/(μs·mm)"),
    key("n_density_rel", "1", Real, "relative atom density"),
    // ensemble
    key("distribution", "lorentzian", Choice(&["lorentzian", "gaussian"]), "spin inhomogeneous line shape"),
    key("n_members", "401", Count, "ensemble members"),
    key("sampling", "quantile", Choice(&["quantile", "grid", "monte_carlo"]), "member sampling: equal-mass quantiles, density-weighted uniform grid, or random draws"),
    key("seed", "1", Seed, "seed for monte_carlo sampling"),
    key("clip_fwhm", "32", Real, "distribution support in units of its FWHM"),
    // integration
    key("dt_us", "0.01", Real, "RK4 step"),
    key("output_stride", "10", Count, "record every n-th step"),
    // fig2 / fig3 / detuning-sweep sequence
    key("probe_rabi_khz", "50", Real, "preparation probe E_P"),
    key("coupling_rabi_khz", "100", Real, "preparation coupling Ω_C"),
    key("probe_detuning_khz", "0", Real, "δ_P"),
    key("coupling_detuning_khz", "0", Real, "δ_C"),
    key("prep_len_us", "10", Real, "preparation pulse length"),
    key("edge_us", "0", Real, "raised-cosine edge of every pulse; 0 for square pulses"),
    key("readout_start_us", "35", Real, "read-out turn-on time"),
    key("readout_len_us", "10", Real, "fig2 read-out length"),
    key("readout_rabi_khz", "80", Real, "fig2 and detuning-sweep read-out Ω_A"),
    key("sweep_readout_len_us", "20", Real, "fig3 read-out length"),
    key("sweep_rabi_khz", "20,40,60,80,100,120,140", RealList, "fig3 read-out Ω_A values"),
    // fig2 maps
    key("map_delta2_min_khz", "-50", Real, "two-photon detuning map lower edge"),
    key("map_delta2_max_khz", "50", Real, "two-photon detuning map upper edge"),
    key("map_points", "101", Count, "two-photon detuning map points"),
    // fid
    key("fid_duration_us", "60", Real, "free-decay window"),
    // CW slow light
    key("cw_probe_rabi_khz", "10", Real, "weak probe peak for eit-spectrum, slowlight, routing"),
    key("cw_coupling_rabi_khz", "400", Real, "CW coupling for eit-spectrum, slowlight, routing"),
    key("spectrum_half_width_khz", "400", Real, "eit-spectrum grid half width"),
    key("spectrum_points", "8001", Count, "eit-spectrum grid points (odd keeps line center)"),
    key("omega_c_sweep_khz", "200,300,400,500", RealList, "coupling values for the delay scaling fit"),
    key("probe_len_us", "8", Real, "probe pulse intensity FWHM"),
    key("probe_center_us", "20", Real, "probe pulse center at the medium entrance"),
    key("window_us", "80", Real, "propagation time window"),
    key("n_slabs", "4100", Count, "propagation slabs"),
    // routing
    key("routing_readout_start_us", "29", Real, "routing read-out turn-on time"),
    key("routing_readout_len_us", "10", Real, "routing read-out length"),
    key("routing_readout_rabi_khz", "400", Real, "routing read-out Ω_A"),
    key("n_phases", "4", Count, "read-out phases used to separate E_D from E_S"),
    // detuning-sweep
    key("sweep_detuning_min_khz", "-50", Real, "detuning sweep lower edge"),
    key("sweep_detuning_max_khz", "50", Real, "detuning sweep upper edge"),
    key("sweep_points", "41", Count, "detuning sweep points"),
    key("low_probe_rabi_khz", "10", Real, "low-power probe E_P"),
    key("high_probe_rabi_khz", "100", Real, "high-power probe E_P"),
    // phase-match
    key("wavelength_nm", "605.98", Real, "common optical wavelength"),
    key("theta_p_mrad", "0", Real, "probe angle"),
    key("theta_c_mrad", "35", Real, "coupling angle"),
    key("theta_a_mrad", "70", Real, "read-out angle"),
    // output
    key("out_dir", "out", Text, "output directory"),
    key("svg", "false", Flag, "also render SVG plots"),
];

const UNIT_SUFFIXES: &[&str] = &["_khz", "_us", "_mm", "_mrad", "_nm"];

/// Resolved configuration: one canonical value per schema key.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    values: Vec<String>,
}

fn index_of(name: &str) -> Option<usize> {
    SCHEMA.iter().position(|k| k.name == name)
}

fn canonical(kind: Kind, raw: &str) -> std::result::Result<String, String> {
    let real = |s: &str| -> std::result::Result<f64, String> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{s}` is not finite"))
        }
    };
    match kind {
        Real => real(raw).map(|v| format!("{v}")),
        Count => raw
            .parse::<usize>()
            .map(|v| v.to_string())
            .map_err(|_| format!("`{raw}` is not a non-negative integer")),
        Seed => raw
            .parse::<u64>()
            .map(|v| v.to_string())
            .map_err(|_| format!("`{raw}` is not an unsigned integer")),
        Flag => match raw {
            "true" | "1" | "yes" => Ok("true".into()),
            "false" | "0" | "no" => Ok("false".into()),
            _ => Err(format!("`{raw}` is not true/false")),
        },
        Choice(options) => {
            let v = raw.to_ascii_lowercase().replace('-', "_");
            if options.contains(&v.as_str()) {
                Ok(v)
            } else {
                Err(format!("`{raw}` is not one of {}", options.join(", ")))
            }
        }
        RealList => {
            if raw.trim().is_empty() {
                return Ok(String::new());
            }
            let parts = raw
                .split(',')
                .map(|s| real(s).map(|v| format!("{v}")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(parts.join(","))
        }
        Text => {
            if raw.is_empty() {
                Err("value is empty".into())
            } else {
                Ok(raw.to_string())
            }
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            values: SCHEMA
                .iter()
                .map(|k| canonical(k.kind, k.default).expect("schema defaults parse"))
                .collect(),
        }
    }
}

impl ScenarioConfig {
    /// Defaults, then `path` (if any), then `overrides` (`key=value`).
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (i, o) in overrides.iter().enumerate() {
            let location = format!("--set #{}", i + 1);
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                key: o.trim().to_string(),
                message: "expected key=value".into(),
            })?;
            cfg.set_at(k.trim(), v.trim(), &location)?;
        }
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{source}:{}", n + 1);
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
            self.set_at(k.trim(), v.trim(), &location)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_at(key, value, "api")
    }

    fn set_at(&mut self, key: &str, value: &str, location: &str) -> Result<()> {
        let err = |message: String| Error::Config {
            location: location.to_string(),
            key: key.to_string(),
            message,
        };
        let Some(i) = index_of(key) else {
            if let Some(full) = UNIT_SUFFIXES
                .iter()
                .map(|s| format!("{key}{s}"))
                .find(|k| index_of(k).is_some())
            {
                return Err(err(format!("missing unit suffix; did you mean `{full}`?")));
            }
            return Err(err("unknown key".into()));
        };
        self.values[i] = canonical(SCHEMA[i].kind, value).map_err(err)?;
        Ok(())
    }

    fn raw(&self, name: &str) -> &str {
        let i = index_of(name).unwrap_or_else(|| panic!("no config key {name}"));
        &self.values[i]
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        index_of(name).map(|i| self.values[i].as_str())
    }

    pub fn real(&self, name: &str) -> f64 {
        self.raw(name).parse().expect("canonical real")
    }

    pub fn count(&self, name: &str) -> usize {
        self.raw(name).parse().expect("canonical count")
    }

    pub fn flag(&self, name: &str) -> bool {
        self.raw(name) == "true"
    }

    pub fn reals(&self, name: &str) -> Vec<f64> {
        let raw = self.raw(name);
        if raw.is_empty() {
            return Vec::new();
        }
        raw.split(',').map(|s| s.parse().expect("canonical real")).collect()
    }

    pub fn text(&self, name: &str) -> &str {
        self.raw(name)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out_dir"))
    }

    pub fn medium(&self) -> MediumParams {
        MediumParams {
            gamma12_khz: self.real("gamma12_khz"),
            gamma13_khz: self.real("gamma13_khz"),
            gamma23_khz: self.real("gamma23_khz"),
            decay31_khz: self.real("decay31_khz"),
            decay32_khz: self.real("decay32_khz"),
            delta_s_khz: self.real("delta_s_khz"),
            length_mm: self.real("length_mm"),
            coupling_const: self.real("coupling_const"),
            n_density_rel: self.real("n_density_rel"),
        }
    }

    pub fn ensemble(&self) -> EnsembleSpec {
        EnsembleSpec {
            distribution: match self.raw("distribution") {
                "gaussian" => Distribution::Gaussian,
                _ => Distribution::Lorentzian,
            },
            fwhm_khz: self.real("delta_s_khz"),
            n_members: self.count("n_members"),
            sampling: match self.raw("sampling") {
                "monte_carlo" => Sampling::MonteCarlo {
                    seed: self.raw("seed").parse().expect("canonical seed"),
                },
                "grid" => Sampling::Grid,
                _ => Sampling::Quantile,
            },
            clip_fwhm: self.real("clip_fwhm"),
        }
    }

    /// Every key in schema order as `key = value`, loadable by [`ScenarioConfig::load`].
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in SCHEMA.iter().zip(&self.values) {
            let _ = writeln!(out, "{} = {}", k.name, v);
        }
        out
    }

    /// Commented reference of every key with its default.
    pub fn reference() -> String {
        let mut out = String::new();
        for k in SCHEMA {
            let _ = writeln!(out, "# {}\n{} = {}", k.doc, k.name, k.default);
        }
        out
    }

    pub fn keys() -> impl Iterator<Item = &'static str> {
        SCHEMA.iter().map(|k| k.name)
    }
}
