//! Read-out of stored spin coherence into the four-wave-mixing field E_D.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::analysis::{centered_derivative, count_slope_reversals, fit_scale, pearson};
use crate::bloch::{evolve, Conservation, Stepping};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::pulse::{Pulse, PulseSequence, Transition};
use crate::series::{Channel, TimeSeries};

/// Excursions of Im ρ13 below this are ignored when counting slope reversals.
pub const OSCILLATION_FLOOR: f64 = 1e-6;

/// Least-squares fit `e_d ≈ scale·g` with `g = −d/dt Re ρ12` (oriented, see
/// [`verify_conversion_law`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionFit {
    pub scale: f64,
    pub pearson_r: f64,
    /// Largest `|e_d − scale·g|` relative to `max |e_d|`.
    pub max_residual: f64,
}

#[derive(Debug, Clone)]
pub struct ReadoutResult {
    pub series: TimeSeries,
    pub omega_a_khz: f64,
    pub oscillation_detected: bool,
    pub slope_reversals: usize,
    /// Sign of Re ρ12 when the read-out starts (+1 for zero).
    pub stored_sign: f64,
    /// `None` when there is nothing to fit (no stored coherence).
    pub conversion_fit: Option<ConversionFit>,
    pub conservation: Conservation,
}

/// Evolves `rho_start` under the read-out pulse alone.
///
/// `e_d_arb` is Im ρ13; oscillation is reported when Im ρ13 reverses its
/// slope at least twice inside the pulse.
pub fn readout_conversion(
    rho_start: &DensityMatrix,
    readout: &Pulse,
    params: &MediumParams,
    stepping: &Stepping,
) -> Result<ReadoutResult> {
    if readout.transition != Transition::Coupling {
        return Err(Error::InvalidInput(
            "the read-out pulse drives the coupling transition".into(),
        ));
    }
    let seq = PulseSequence::with_start(vec![*readout], readout.t_on_us, readout.t_off_us)?;
    let ev = evolve(rho_start, &seq, params, 0.0, stepping)?;
    let im13 = ev.series.channel(Channel::ImRho13)?;
    let slope_reversals = count_slope_reversals(im13, OSCILLATION_FLOOR);
    let stored_sign = if rho_start.rho12().re >= 0.0 { 1.0 } else { -1.0 };
    let mut result = ReadoutResult {
        series: ev.series,
        omega_a_khz: readout.rabi_khz,
        oscillation_detected: slope_reversals >= 2,
        slope_reversals,
        stored_sign,
        conversion_fit: None,
        conservation: ev.conservation,
    };
    result.conversion_fit = verify_conversion_law(&result).ok();
    Ok(result)
}

/// Fits `e_d_arb` against `−σ·d/dt Re ρ12`, where `σ` is the sign of the
/// stored coherence at read-out start, so the fit is made in the frame where
/// the stored coherence is positive.
pub fn verify_conversion_law(result: &ReadoutResult) -> Result<ConversionFit> {
    conversion_fit(
        result.series.t_us(),
        result.series.channel(Channel::ReRho12)?,
        result.series.channel(Channel::EdArb)?,
        result.stored_sign,
    )
}

pub(crate) fn conversion_fit(
    t: &[f64],
    re12: &[f64],
    e_d: &[f64],
    stored_sign: f64,
) -> Result<ConversionFit> {
    if t.len() < 3 {
        return Err(Error::Fit("need at least three samples".into()));
    }
    let g: Vec<f64> = centered_derivative(t, re12)
        .into_iter()
        .map(|d| -stored_sign * d)
        .collect();
    let e = &e_d[1..e_d.len() - 1];
    let peak = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 || g.iter().all(|v| *v == 0.0) {
        return Err(Error::Fit("degenerate all-zero series".into()));
    }
    let scale = fit_scale(&g, e).ok_or_else(|| Error::Fit("zero derivative".into()))?;
    let pearson_r =
        pearson(e, &g).ok_or_else(|| Error::Fit("constant series has no correlation".into()))?;
    let max_residual = e
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - scale * b).abs())
        .fold(0.0, f64::max)
        / peak;
    Ok(ConversionFit {
        scale,
        pearson_r,
        max_residual,
    })
}

/// [`readout_conversion`] for each Rabi frequency, in input order.
pub fn sweep_readout(
    rho_start: &DensityMatrix,
    omega_a_khz: &[f64],
    template: &Pulse,
    params: &MediumParams,
    stepping: &Stepping,
) -> Result<Vec<ReadoutResult>> {
    let pulses = omega_a_khz
        .iter()
        .map(|&w| template.with_rabi(w))
        .collect::<Result<Vec<_>>>()?;
    pulses
        .par_iter()
        .map(|p| readout_conversion(rho_start, p, params, stepping))
        .collect()
}

/// Index of the single false→true change of `detected`, if the sequence is
/// monotone with exactly one transition.
pub fn onset_index(detected: &[bool]) -> Option<usize> {
    let changes: Vec<usize> = (1..detected.len())
        .filter(|&i| detected[i] != detected[i - 1])
        .collect();
    match changes.as_slice() {
        [i] if detected[*i] => Some(*i),
        _ => None,
    }
}

/// `I_D = e_d²`, pointwise.
pub fn detector_intensity(ts: &TimeSeries) -> Result<Vec<f64>> {
    Ok(ts.channel(Channel::EdArb)?.iter().map(|v| v * v).collect())
}

/// Wavevector in rad/m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveVector {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
}

impl WaveVector {
    pub fn new(kx: f64, ky: f64, kz: f64) -> Result<Self> {
        if !(kx.is_finite() && ky.is_finite() && kz.is_finite()) {
            return Err(Error::InvalidInput("wavevector components must be finite".into()));
        }
        Ok(Self { kx, ky, kz })
    }

    /// Magnitude `k` at angle `theta_rad` from `z` in the x–z plane.
    pub fn in_plane(k: f64, theta_rad: f64) -> Self {
        Self {
            kx: k * theta_rad.sin(),
            ky: 0.0,
            kz: k * theta_rad.cos(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.kx * self.kx + self.ky * self.ky + self.kz * self.kz).sqrt()
    }

    /// Angle from `z` in the x–z plane.
    pub fn angle_rad(&self) -> f64 {
        self.kx.atan2(self.kz)
    }
}

impl Add for WaveVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            kx: self.kx + o.kx,
            ky: self.ky + o.ky,
            kz: self.kz + o.kz,
        }
    }
}

impl Sub for WaveVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            kx: self.kx - o.kx,
            ky: self.ky - o.ky,
            kz: self.kz - o.kz,
        }
    }
}

impl Mul<WaveVector> for f64 {
    type Output = WaveVector;
    fn mul(self, v: WaveVector) -> WaveVector {
        WaveVector {
            kx: self * v.kx,
            ky: self * v.ky,
            kz: self * v.kz,
        }
    }
}

/// `k_D = k_C − k_P + k_A` and the mismatch `| |k_D| − ω_D/c |` (rad/m).
pub fn phase_match(
    k_c: WaveVector,
    k_p: WaveVector,
    k_a: WaveVector,
    omega_d_over_c: f64,
) -> (WaveVector, f64) {
    let k_d = k_c - k_p + k_a;
    let mismatch = (k_d.norm() - omega_d_over_c).abs();
    (k_d, mismatch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_derivative_pair_fits_exactly() {
        let w = 0.7;
        let t: Vec<f64> = (0..2001).map(|k| k as f64 * 0.001).collect();
        let re: Vec<f64> = t.iter().map(|x| (w * x).cos()).collect();
        let e: Vec<f64> = t.iter().map(|x| w * (w * x).sin()).collect();
        let fit = conversion_fit(&t, &re, &e, 1.0).unwrap();
        assert!((fit.pearson_r - 1.0).abs() < 1e-9);
        assert!((fit.scale - 1.0).abs() < 1e-6);
    }

    #[test]
    fn all_zero_series_is_a_fit_error() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let z = vec![0.0; 10];
        assert!(matches!(conversion_fit(&t, &z, &z, 1.0), Err(Error::Fit(_))));
    }

    #[test]
    fn no_stored_coherence_emits_nothing() {
        let p = Pulse::square(Transition::Coupling, 80.0, 35.0, 45.0).unwrap();
        let r = readout_conversion(
            &DensityMatrix::ground(),
            &p,
            &MediumParams::default(),
            &Stepping::default(),
        )
        .unwrap();
        assert!(r.series.channel(Channel::EdArb).unwrap().iter().all(|v| v.abs() < 1e-9));
        assert!(!r.oscillation_detected);
        assert!(r.conversion_fit.is_none());
    }

    #[test]
    fn probe_transition_readout_is_rejected() {
        let p = Pulse::square(Transition::Probe, 80.0, 0.0, 10.0).unwrap();
        let r = readout_conversion(
            &DensityMatrix::ground(),
            &p,
            &MediumParams::default(),
            &Stepping::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_readout_keeps_coherence() {
        let rho = DensityMatrix::spin_superposition(0.5, 0.0);
        let p = Pulse::square(Transition::Coupling, 0.0, 0.0, 10.0).unwrap();
        let params = MediumParams::default();
        let r = readout_conversion(&rho, &p, &params, &Stepping::default()).unwrap();
        let re = r.series.channel(Channel::ReRho12).unwrap();
        assert!(re.iter().all(|v| (v - re[0]).abs() < 1e-12));
        assert!(r.series.channel(Channel::EdArb).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn detector_squares() {
        let ts = TimeSeries::from_channels(vec![0.0, 1.0], vec![(Channel::EdArb, vec![-2.0, 3.0])])
            .unwrap();
        assert_eq!(detector_intensity(&ts).unwrap(), vec![4.0, 9.0]);
        let ts = TimeSeries::from_channels(vec![0.0], vec![]).unwrap();
        assert!(matches!(detector_intensity(&ts), Err(Error::Schema(_))));
    }

    #[test]
    fn collinear_and_cancelling_geometries() {
        let k0 = 1.0e7;
        let z = WaveVector::in_plane(k0, 0.0);
        let (kd, mm) = phase_match(z, z, z, k0);
        assert_eq!(kd, z);
        assert_eq!(mm, 0.0);
        let c = WaveVector::in_plane(k0, 0.035);
        let a = WaveVector::in_plane(k0, 0.07);
        let (kd, mm) = phase_match(c, a, a, k0);
        assert_eq!(kd, c);
        assert!(mm < 1e-8);
    }

    #[test]
    fn onset_detection() {
        assert_eq!(onset_index(&[false, false, true, true]), Some(2));
        assert_eq!(onset_index(&[false, true, false, true]), None);
        assert_eq!(onset_index(&[true, true]), None);
        assert_eq!(onset_index(&[false, false]), None);
    }
}
