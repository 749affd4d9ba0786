//! Inhomogeneous spin ensemble: detuning classes, ensemble averages,
//! free-induction decay and two-photon-detuning maps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution as _, Normal};
use rayon::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::bloch::{evolve, Conservation, Evolution, Stepping};
use crate::density::{DensityMatrix, ZERO};
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::pulse::PulseSequence;
use crate::series::{Channel, SpectralMap, TimeSeries};

/// Members further out than this many FWHM are moved onto the edge; for a
/// Lorentzian that is under 1% of the mass.
pub const DEFAULT_CLIP_FWHM: f64 = 32.0;

/// Members evolved concurrently before their results are folded in.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    Lorentzian,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Equal-mass midpoints of the (clipped) distribution.
    Quantile,
    /// Uniform detuning grid over the clipped support, weighted by the density.
    Grid,
    MonteCarlo { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub distribution: Distribution,
    pub fwhm_khz: f64,
    pub n_members: usize,
    pub sampling: Sampling,
    /// Samples are clamped to `±clip_fwhm·fwhm_khz`.
    pub clip_fwhm: f64,
}

impl EnsembleSpec {
    pub fn lorentzian(fwhm_khz: f64, n_members: usize) -> Self {
        Self {
            distribution: Distribution::Lorentzian,
            fwhm_khz,
            n_members,
            sampling: Sampling::Quantile,
            clip_fwhm: DEFAULT_CLIP_FWHM,
        }
    }

    pub fn gaussian(fwhm_khz: f64, n_members: usize) -> Self {
        Self {
            distribution: Distribution::Gaussian,
            ..Self::lorentzian(fwhm_khz, n_members)
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_members == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one member".into()));
        }
        if !(self.fwhm_khz >= 0.0) || !self.fwhm_khz.is_finite() {
            return Err(Error::InvalidInput(format!("fwhm {} kHz must be ≥ 0", self.fwhm_khz)));
        }
        if !(self.clip_fwhm > 0.0) {
            return Err(Error::InvalidInput("clip_fwhm must be positive".into()));
        }
        Ok(())
    }
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self::lorentzian(30.0, 201)
    }
}

/// One detuning class of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub detuning_khz: f64,
    pub weight: f64,
}

enum Shape {
    Lorentzian { hwhm: f64 },
    Gaussian { normal: StdNormal },
}

impl Shape {
    fn new(distribution: Distribution, fwhm: f64) -> Self {
        match distribution {
            Distribution::Lorentzian => Shape::Lorentzian { hwhm: 0.5 * fwhm },
            Distribution::Gaussian => {
                let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
                Shape::Gaussian {
                    normal: StdNormal::new(0.0, sigma).expect("positive width"),
                }
            }
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            Shape::Lorentzian { hwhm } => hwhm / (PI * (x * x + hwhm * hwhm)),
            Shape::Gaussian { normal } => normal.pdf(x),
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        match self {
            Shape::Lorentzian { hwhm } => hwhm * (PI * (q - 0.5)).tan(),
            Shape::Gaussian { normal } => normal.inverse_cdf(q),
        }
    }
}

/// Detuning classes and weights for `spec`.
///
/// Quantile sampling is mirrored so the set is exactly symmetric about zero.
/// Samples beyond `±clip_fwhm·fwhm_khz` are clamped to the edge, which keeps
/// every member's weight and so the total mass.
pub fn sample_detunings(spec: &EnsembleSpec) -> Result<Vec<Member>> {
    spec.check()?;
    let n = spec.n_members;
    let weight = 1.0 / n as f64;
    if spec.fwhm_khz == 0.0 {
        return Ok(vec![
            Member {
                detuning_khz: 0.0,
                weight
            };
            n
        ]);
    }
    let shape = Shape::new(spec.distribution, spec.fwhm_khz);
    let clip = spec.clip_fwhm * spec.fwhm_khz;
    let detunings: Vec<f64> = match spec.sampling {
        Sampling::Quantile => {
            let mut d = vec![0.0; n];
            for i in 0..n / 2 {
                let x = shape.quantile((i as f64 + 0.5) / n as f64).max(-clip);
                d[i] = x;
                d[n - 1 - i] = -x;
            }
            d
        }
        Sampling::Grid => {
            if n == 1 {
                return Ok(vec![Member { detuning_khz: 0.0, weight: 1.0 }]);
            }
            let step = 2.0 * clip / (n - 1) as f64;
            let mut x: Vec<f64> = (0..n).map(|i| -clip + i as f64 * step).collect();
            for i in 0..n / 2 {
                x[n - 1 - i] = -x[i];
            }
            if n % 2 == 1 {
                x[n / 2] = 0.0;
            }
            let w: Vec<f64> = x.iter().map(|&v| shape.density(v)).collect();
            let total: f64 = w.iter().sum();
            return Ok(x
                .into_iter()
                .zip(w)
                .map(|(detuning_khz, w)| Member {
                    detuning_khz,
                    weight: w / total,
                })
                .collect());
        }
        Sampling::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> f64> = match spec.distribution {
                Distribution::Lorentzian => {
                    let c = Cauchy::new(0.0, 0.5 * spec.fwhm_khz).expect("positive width");
                    Box::new(move |r| c.sample(r))
                }
                Distribution::Gaussian => {
                    let sigma = spec.fwhm_khz / (2.0 * (2.0 * 2f64.ln()).sqrt());
                    let g = Normal::new(0.0, sigma).expect("positive width");
                    Box::new(move |r| g.sample(r))
                }
            };
            (0..n).map(|_| draw(&mut rng).clamp(-clip, clip)).collect()
        }
    };
    Ok(detunings
        .into_iter()
        .map(|detuning_khz| Member {
            detuning_khz,
            weight,
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct EnsembleEvolution {
    /// Weighted average of every channel.
    pub series: TimeSeries,
    pub mean_final_state: DensityMatrix,
    /// Weighted average of the recorded states when [`Stepping::record_states`] is set.
    pub mean_states: Option<Vec<DensityMatrix>>,
    pub conservation: Conservation,
    pub members: Vec<Member>,
}

/// Evolves every member with its own spin shift and averages in member order.
pub fn ensemble_evolve(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &MediumParams,
    spec: &EnsembleSpec,
    stepping: &Stepping,
) -> Result<EnsembleEvolution> {
    let members = sample_detunings(spec)?;
    let mut series = TimeSeries::standard();
    let mut mean_final = ZERO;
    let mut mean_states: Option<Vec<[[Complex64; 3]; 3]>> = None;
    let mut conservation = Conservation::default();

    for chunk in members.chunks(CHUNK) {
        let runs: Vec<Result<Evolution>> = chunk
            .par_iter()
            .map(|m| evolve(rho0, seq, params, m.detuning_khz, stepping))
            .collect();
        for (m, run) in chunk.iter().zip(runs) {
            let run = run?;
            series.accumulate(&run.series, m.weight);
            conservation.merge(&run.conservation);
            add_scaled(&mut mean_final, run.final_state.elements(), m.weight);
            if let Some(states) = run.states {
                let acc = mean_states.get_or_insert_with(|| vec![ZERO; states.len()]);
                for (a, s) in acc.iter_mut().zip(&states) {
                    add_scaled(a, s.elements(), m.weight);
                }
            }
        }
    }

    Ok(EnsembleEvolution {
        series,
        mean_final_state: DensityMatrix::from_elements(mean_final),
        mean_states: mean_states
            .map(|v| v.into_iter().map(DensityMatrix::from_elements).collect()),
        conservation,
        members,
    })
}

fn add_scaled(acc: &mut [[Complex64; 3]; 3], m: &[[Complex64; 3]; 3], w: f64) {
    for i in 0..3 {
        for j in 0..3 {
            acc[i][j] += w * m[i][j];
        }
    }
}

/// Time after `t_start_us` at which `|channel|` first drops to `1/e` of its
/// value at `t_start_us`, linearly interpolated between samples.
pub fn fid_decay_time(ts: &TimeSeries, channel: Channel, t_start_us: f64) -> Result<f64> {
    let values = ts.channel(channel)?;
    let t = ts.t_us();
    let k0 = ts
        .index_at(t_start_us)
        .ok_or_else(|| Error::NoDecay(format!("series ends before t = {t_start_us} μs")))?;
    let reference = values[k0].abs();
    if reference == 0.0 {
        return Err(Error::NoDecay(format!(
            "{} is zero at t = {t_start_us} μs",
            channel.name()
        )));
    }
    let threshold = reference / std::f64::consts::E;
    let below = values[k0..].iter().filter(|v| v.abs() < threshold).count();
    let crossing = (k0 + 1..values.len()).find(|&k| values[k].abs() <= threshold);
    match crossing {
        Some(k) if below >= 10 => {
            let (a, b) = (values[k - 1].abs(), values[k].abs());
            let frac = if a == b { 0.0 } else { (a - threshold) / (a - b) };
            Ok(t[k - 1] + frac * (t[k] - t[k - 1]) - t[k0])
        }
        Some(_) => Err(Error::NoDecay(format!(
            "only {below} samples of {} below 1/e",
            channel.name()
        ))),
        None => Err(Error::NoDecay(format!(
            "{} never falls to 1/e of its value at {t_start_us} μs",
            channel.name()
        ))),
    }
}

/// One evolution per two-photon detuning `δ2` (applied as the spin shift),
/// tabulating `channel` over (δ2, t).
pub fn two_photon_map(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &MediumParams,
    delta2_khz: &[f64],
    stepping: &Stepping,
    channel: Channel,
) -> Result<SpectralMap> {
    if delta2_khz.is_empty() {
        return Err(Error::InvalidInput("detuning grid is empty".into()));
    }
    let stepping = Stepping {
        record_states: false,
        ..*stepping
    };
    let runs: Vec<Result<Vec<f64>>> = delta2_khz
        .par_iter()
        .map(|&d| {
            let ev = evolve(rho0, seq, params, d, &stepping)?;
            Ok(ev.series.channel(channel)?.to_vec())
        })
        .collect();
    let values = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let t = evolve_grid(seq, &stepping);
    SpectralMap::new(delta2_khz.to_vec(), t, values)
}

/// Sample times produced by [`evolve`] for `seq`.
pub(crate) fn evolve_grid(seq: &PulseSequence, stepping: &Stepping) -> Vec<f64> {
    let dt = stepping.dt_us;
    let n_steps = ((seq.span_us() / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut t = vec![seq.start_us()];
    for k in 1..=n_steps {
        if k % stepping.output_stride == 0 || k == n_steps {
            t.push(if k == n_steps {
                seq.total_duration_us()
            } else {
                seq.start_us() + k as f64 * dt
            });
        }
    }
    t
}

/// Maximally coherent spin superposition with Re ρ12 = 1/2.
pub fn coherent_spin_state() -> DensityMatrix {
    DensityMatrix::spin_superposition(std::f64::consts::FRAC_PI_4, 0.0)
}
