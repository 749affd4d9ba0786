//! Weak-probe steady-state EIT: optical coherence, susceptibility and group delay.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::units::{angular, SPEED_OF_LIGHT_MM_PER_US};

/// CW drive for the analytic steady state. Detunings and Rabi frequencies in kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitDrive {
    pub probe_rabi_khz: f64,
    pub coupling_rabi_khz: f64,
    pub coupling_detuning_khz: f64,
}

impl EitDrive {
    pub fn resonant(probe_rabi_khz: f64, coupling_rabi_khz: f64) -> Self {
        Self {
            probe_rabi_khz,
            coupling_rabi_khz,
            coupling_detuning_khz: 0.0,
        }
    }

    fn check(&self, params: &MediumParams) -> Result<()> {
        if !(self.probe_rabi_khz >= 0.0) || !(self.coupling_rabi_khz >= 0.0) {
            return Err(Error::InvalidInput("Rabi frequencies must be ≥ 0".into()));
        }
        // Weak probe: small against whichever of Ω_C and γ13 bounds the optical response.
        let limit = self.coupling_rabi_khz.max(params.gamma13_khz) / 5.0;
        if self.probe_rabi_khz > limit {
            return Err(Error::Regime(format!(
                "probe Rabi {} kHz exceeds the weak-probe limit {} kHz",
                self.probe_rabi_khz, limit
            )));
        }
        Ok(())
    }
}

/// `ρ13 / Ω_P` (Ω_P angular) in the weak-probe limit.
fn response(params: &MediumParams, probe_detuning_khz: f64, drive: &EitDrive) -> Complex64 {
    let g12 = angular(params.gamma12_khz);
    let g13 = angular(params.gamma13_khz);
    let dp = angular(probe_detuning_khz);
    let d2 = angular(probe_detuning_khz - drive.coupling_detuning_khz);
    let oc = angular(drive.coupling_rabi_khz);
    if oc == 0.0 {
        // the spin factor cancels; keeps δ2 = γ12 = 0 finite
        return Complex64::new(0.0, -0.5) / Complex64::new(g13, dp);
    }
    let spin = Complex64::new(g12, d2);
    let denom = Complex64::new(g13, dp) * spin + 0.25 * oc * oc;
    Complex64::new(0.0, -0.5) * spin / denom
}

/// Analytic weak-probe steady state of ρ13 at probe detuning `δ_P`.
pub fn steady_state_coherence(
    params: &MediumParams,
    probe_detuning_khz: f64,
    drive: &EitDrive,
) -> Result<Complex64> {
    params.validate()?;
    drive.check(params)?;
    Ok(angular(drive.probe_rabi_khz) * response(params, probe_detuning_khz, drive))
}

/// Susceptibility over a probe-detuning grid.
///
/// `χ = 2·n_density_rel·ρ31/Ω_P` in μs; `Im χ > 0` is absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub probe_detuning_khz: Vec<f64>,
    pub chi_re: Vec<f64>,
    pub chi_im: Vec<f64>,
    pub drive: EitDrive,
}

pub fn susceptibility_spectrum(
    params: &MediumParams,
    probe_detuning_khz: &[f64],
    drive: &EitDrive,
) -> Result<Spectrum> {
    params.validate()?;
    drive.check(params)?;
    if probe_detuning_khz.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("detuning grid must be strictly increasing".into()));
    }
    let chi: Vec<Complex64> = probe_detuning_khz
        .iter()
        .map(|&d| 2.0 * params.n_density_rel * response(params, d, drive).conj())
        .collect();
    Ok(Spectrum {
        probe_detuning_khz: probe_detuning_khz.to_vec(),
        chi_re: chi.iter().map(|c| c.re).collect(),
        chi_im: chi.iter().map(|c| c.im).collect(),
        drive: *drive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDelay {
    /// Medium contribution to the delay, vacuum transit excluded.
    pub delay_us: f64,
    pub vacuum_transit_us: f64,
    pub group_velocity_mm_per_us: f64,
    /// `c / v_g`.
    pub group_index: f64,
    /// `dRe χ/dδ` at line center, δ angular (μs²).
    pub slope: f64,
}

/// Group delay from the dispersion slope at `δ_P = 0`:
/// `τ_g = (coupling_const·L/2)·dRe χ/dδ`.
pub fn group_delay(spec: &Spectrum, params: &MediumParams) -> Result<GroupDelay> {
    params.validate()?;
    let grid = &spec.probe_detuning_khz;
    let k = grid
        .iter()
        .position(|&d| d.abs() < 1e-12)
        .ok_or_else(|| Error::Resolution("δ_P = 0 is not on the grid".into()))?;
    if k < 2 || k + 2 >= grid.len() {
        return Err(Error::Resolution(
            "need two grid points on each side of line center".into(),
        ));
    }
    let h = grid[k + 1] - grid[k];
    for j in k - 2..k + 2 {
        if ((grid[j + 1] - grid[j]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(Error::Resolution("grid is not uniform around line center".into()));
        }
    }
    let limit = spec.drive.coupling_rabi_khz / 20.0;
    if h > limit {
        return Err(Error::Resolution(format!(
            "spacing {h} kHz exceeds Ω_C/20 = {limit} kHz"
        )));
    }
    let f = &spec.chi_re;
    let slope =
        (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / (12.0 * angular(h));
    let delay_us = 0.5 * params.coupling_const * params.length_mm * slope;
    let vacuum_transit_us = params.length_mm / SPEED_OF_LIGHT_MM_PER_US;
    let group_velocity_mm_per_us = params.length_mm / (delay_us + vacuum_transit_us);
    Ok(GroupDelay {
        delay_us,
        vacuum_transit_us,
        group_velocity_mm_per_us,
        group_index: SPEED_OF_LIGHT_MM_PER_US / group_velocity_mm_per_us,
        slope,
    })
}

/// Uniform grid `[-half, half]` with `n` points (`n` odd keeps 0 on the grid).
pub fn symmetric_grid(half_khz: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    let mid = (n - 1) as f64 / 2.0;
    (0..n)
        .map(|i| {
            let x = (i as f64 - mid) / mid * half_khz;
            if x.abs() < 1e-12 * half_khz {
                0.0
            } else {
                x
            }
        })
        .collect()
}
