//! One-dimensional reduced Maxwell–Bloch propagation of the probe in the
//! retarded frame.
//!
//! Each slab's atoms are integrated in time with RK4 under the field entering
//! the slab; the field is then advanced by first-order upwind Euler,
//! `Ω(z+Δz) = Ω(z) + i·η·Δz·ρ31`. A second, phase-tagged mode can be carried
//! alongside the probe for the routing read-out.

use num_complex::Complex64;

use crate::bloch::{check_step, step_rates, Conservation, Generator};
use crate::density::{DensityMatrix, Mat3};
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::units::{angular, KHZ_TO_RAD_PER_US};

pub const DEFAULT_SLABS: usize = 256;

/// Complex probe Rabi envelope (kHz) on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub t0_us: f64,
    pub dt_us: f64,
    pub values: Vec<Complex64>,
}

impl Envelope {
    pub fn new(t0_us: f64, dt_us: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt_us > 0.0) || values.len() < 2 {
            return Err(Error::InvalidInput(
                "envelope needs dt > 0 and at least two samples".into(),
            ));
        }
        Ok(Self {
            t0_us,
            dt_us,
            values,
        })
    }

    /// Gaussian pulse with intensity FWHM `fwhm_us`, sampled on `[0, total_us]`.
    pub fn gaussian(
        center_us: f64,
        fwhm_us: f64,
        peak_khz: f64,
        total_us: f64,
        dt_us: f64,
    ) -> Result<Self> {
        if !(fwhm_us > 0.0) || !(total_us > dt_us) {
            return Err(Error::InvalidInput(
                "pulse width and window must be positive".into(),
            ));
        }
        let n = (total_us / dt_us).round() as usize + 1;
        let a = 2.0 * 2f64.ln() / (fwhm_us * fwhm_us);
        let values = (0..n)
            .map(|k| {
                let t = k as f64 * dt_us - center_us;
                Complex64::new(peak_khz * (-a * t * t).exp(), 0.0)
            })
            .collect();
        Self::new(0.0, dt_us, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.t0_us + k as f64 * self.dt_us)
            .collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `Σ |Ω|²·dt` (kHz²·μs).
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dt_us
    }

    pub fn peak_khz(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> PulseTrace {
        PulseTrace {
            t_us: self.times(),
            values: self.magnitudes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationGrid {
    pub n_slabs: usize,
}

impl Default for PropagationGrid {
    fn default() -> Self {
        Self {
            n_slabs: DEFAULT_SLABS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub output: Envelope,
    /// Pulse energy entering slab 0, then leaving each slab.
    pub slab_energy: Vec<f64>,
    pub conservation: Conservation,
}

/// Coupling-transition drive of one atomic copy on one time step.
pub(crate) trait CouplingField {
    fn copies(&self) -> usize;
    /// Step index at which copies start to differ.
    fn fork_step(&self) -> usize;
    /// Coupling Rabi frequency (angular) of `copy` during the step starting at `t`.
    fn at(&self, copy: usize, t_mid_us: f64) -> Complex64;
    /// Weight `w` with which `ρ31` of `copy` feeds the read-out mode; the
    /// read-out mode drives `copy` with `conj(w)`.
    fn readout_weight(&self, copy: usize) -> Complex64;
}

pub(crate) struct Constant(pub(crate) Complex64);

impl CouplingField for Constant {
    fn copies(&self) -> usize {
        1
    }
    fn fork_step(&self) -> usize {
        usize::MAX
    }
    fn at(&self, _: usize, _: f64) -> Complex64 {
        self.0
    }
    fn readout_weight(&self, _: usize) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

pub(crate) struct March {
    pub probe: Envelope,
    pub readout: Vec<Complex64>,
    pub slab_energy: Vec<f64>,
    pub conservation: Conservation,
}

fn slab_guard(params: &MediumParams, dz: f64) -> Result<()> {
    let eta = params.eta();
    if eta == 0.0 {
        return Ok(());
    }
    let depth = eta * dz / (2.0 * angular(params.gamma13_khz));
    if !(depth <= 1.0) {
        return Err(Error::Config {
            location: "propagation grid".into(),
            key: "n_slabs".into(),
            message: format!(
                "slab optical depth η·Δz/(2γ13) = {depth:.3} exceeds 1; increase n_slabs"
            ),
        });
    }
    Ok(())
}

/// Shared z-march. `peak_coupling_khz` feeds the step-size guard.
pub(crate) fn march(
    input: &Envelope,
    coupling: &dyn CouplingField,
    peak_coupling_khz: f64,
    params: &MediumParams,
    grid: &PropagationGrid,
) -> Result<March> {
    params.validate()?;
    if grid.n_slabs < 2 {
        return Err(Error::InvalidInput("need at least 2 slabs".into()));
    }
    let dz = params.length_mm / grid.n_slabs as f64;
    slab_guard(params, dz)?;
    let dt = input.dt_us;
    check_step(
        dt,
        &step_rates(params, input.peak_khz(), peak_coupling_khz, 0.0, 0.0, 0.0),
    )?;

    let gen = Generator::new(params, 0.0, 0.0, 0.0);
    let n = input.len();
    let gain = Complex64::new(0.0, params.eta() * dz / KHZ_TO_RAD_PER_US);
    let copies = coupling.copies();
    let inv = 1.0 / copies as f64;
    let fork = coupling.fork_step();

    let mut field = input.values.clone();
    let mut readout = vec![Complex64::new(0.0, 0.0); n];
    let mut slab_energy = Vec::with_capacity(grid.n_slabs + 1);
    slab_energy.push(input.energy());
    let mut conservation = Conservation::default();
    let mut source = vec![Complex64::new(0.0, 0.0); n];
    let mut source_d = vec![Complex64::new(0.0, 0.0); n];

    for _ in 0..grid.n_slabs {
        let mut atoms: Vec<Mat3> = vec![*DensityMatrix::ground().elements()];
        for k in 0..n {
            if k == fork && atoms.len() == 1 && copies > 1 {
                atoms = vec![atoms[0]; copies];
            }
            let mut s = Complex64::new(0.0, 0.0);
            let mut sd = Complex64::new(0.0, 0.0);
            for (m, rho) in atoms.iter().enumerate() {
                let r31 = rho[2][0];
                s += r31;
                sd += r31 * coupling.readout_weight(m);
            }
            let w = if atoms.len() == 1 { 1.0 } else { inv };
            source[k] = s * w;
            source_d[k] = if atoms.len() == 1 {
                // identical copies: the phase average of the weights
                s * (0..copies).map(|m| coupling.readout_weight(m)).sum::<Complex64>() * inv
            } else {
                sd * w
            };
            if k + 1 == n {
                break;
            }
            let t0 = input.t0_us + k as f64 * dt;
            for (m, rho) in atoms.iter_mut().enumerate() {
                // the read-out mode reaches copy m with phase conj(weight)
                let back = coupling.readout_weight(m).conj();
                let p0 = (field[k] + back * readout[k]) * KHZ_TO_RAD_PER_US;
                let p1 = (field[k + 1] + back * readout[k + 1]) * KHZ_TO_RAD_PER_US;
                let pm = 0.5 * (p0 + p1);
                let c = coupling.at(m, t0 + 0.5 * dt);
                *rho = gen.rk4(rho, [(p0, c), (pm, c), (p1, c)], dt);
                conservation.observe(&DensityMatrix::from_elements(*rho));
            }
        }
        for k in 0..n {
            field[k] += gain * source[k];
            readout[k] += gain * source_d[k];
        }
        slab_energy.push(field.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt);
    }

    Ok(March {
        probe: Envelope {
            t0_us: input.t0_us,
            dt_us: dt,
            values: field,
        },
        readout,
        slab_energy,
        conservation,
    })
}

/// Propagates `input` through the medium under a CW resonant coupling field.
pub fn propagate_pulse(
    input: &Envelope,
    coupling_khz: f64,
    params: &MediumParams,
    grid: &PropagationGrid,
) -> Result<PropagationResult> {
    let peak = input.peak_khz();
    if peak > coupling_khz / 5.0 {
        return Err(Error::Regime(format!(
            "probe peak {peak} kHz exceeds Ω_C/5 = {} kHz",
            coupling_khz / 5.0
        )));
    }
    let m = march(
        input,
        &Constant(Complex64::new(angular(coupling_khz), 0.0)),
        coupling_khz,
        params,
        grid,
    )?;
    Ok(PropagationResult {
        output: m.probe,
        slab_energy: m.slab_energy,
        conservation: m.conservation,
    })
}

/// Real pulse trace used for delay extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrace {
    pub t_us: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMethod {
    /// Parabolic interpolation around the maxima.
    Peak,
    /// Difference of first moments, weighted by the trace values.
    Centroid,
}

fn detect(trace: &PulseTrace, what: &str) -> Result<usize> {
    if trace.t_us.len() != trace.values.len() || trace.values.len() < 3 {
        return Err(Error::Detection(format!("{what} trace too short")));
    }
    let mut sorted: Vec<f64> = trace.values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    let (k, max) = trace
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    if !(max > 10.0 * floor) {
        return Err(Error::Detection(format!(
            "{what}: max {max} not above 10× floor {floor}"
        )));
    }
    Ok(k)
}

fn peak_time(trace: &PulseTrace, k: usize) -> f64 {
    let t = &trace.t_us;
    let y = &trace.values;
    if k == 0 || k + 1 >= y.len() {
        return t[k];
    }
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return t[k];
    }
    let h = 0.5 * (t[k + 1] - t[k - 1]);
    t[k] + 0.5 * h * (y0 - y2) / denom
}

fn centroid(trace: &PulseTrace) -> f64 {
    let w: f64 = trace.values.iter().sum();
    trace
        .t_us
        .iter()
        .zip(&trace.values)
        .map(|(t, v)| t * v)
        .sum::<f64>()
        / w
}

/// Delay of `output` relative to `input`.
pub fn extract_delay(input: &PulseTrace, output: &PulseTrace, method: DelayMethod) -> Result<f64> {
    let ki = detect(input, "input")?;
    let ko = detect(output, "output")?;
    Ok(match method {
        DelayMethod::Peak => peak_time(output, ko) - peak_time(input, ki),
        DelayMethod::Centroid => centroid(output) - centroid(input),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_trace(center: f64, width: f64) -> PulseTrace {
        let t: Vec<f64> = (0..2001).map(|k| k as f64 * 0.05).collect();
        let values = t
            .iter()
            .map(|x| (-(x - center).powi(2) / (2.0 * width * width)).exp())
            .collect();
        PulseTrace { t_us: t, values }
    }

    #[test]
    fn identical_traces_have_zero_delay() {
        let a = gaussian_trace(30.0, 3.0);
        for m in [DelayMethod::Peak, DelayMethod::Centroid] {
            assert!(extract_delay(&a, &a, m).unwrap().abs() < 0.005);
        }
    }

    #[test]
    fn shifted_trace_gives_shift() {
        let a = gaussian_trace(30.0, 3.0);
        let b = gaussian_trace(37.0, 3.0);
        for m in [DelayMethod::Peak, DelayMethod::Centroid] {
            assert!((extract_delay(&a, &b, m).unwrap() - 7.0).abs() < 0.005);
        }
    }

    #[test]
    fn flat_trace_is_not_a_pulse() {
        let a = gaussian_trace(30.0, 3.0);
        let flat = PulseTrace {
            t_us: a.t_us.clone(),
            values: vec![1.0; a.t_us.len()],
        };
        assert!(matches!(
            extract_delay(&a, &flat, DelayMethod::Peak),
            Err(Error::Detection(_))
        ));
    }

    #[test]
    fn vacuum_leaves_pulse_unchanged() {
        let input = Envelope::gaussian(20.0, 8.0, 5.0, 60.0, 0.01).unwrap();
        let p = MediumParams {
            coupling_const: 0.0,
            ..Default::default()
        };
        let r = propagate_pulse(&input, 100.0, &p, &PropagationGrid { n_slabs: 4 }).unwrap();
        for (a, b) in r.output.values.iter().zip(&input.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn thick_slabs_are_rejected() {
        let input = Envelope::gaussian(20.0, 8.0, 5.0, 60.0, 0.01).unwrap();
        let r = propagate_pulse(&input, 100.0, &MediumParams::default(), &PropagationGrid { n_slabs: 64 });
        assert!(matches!(r, Err(Error::Config { .. })));
    }

    #[test]
    fn strong_probe_is_rejected() {
        let input = Envelope::gaussian(20.0, 8.0, 30.0, 60.0, 0.01).unwrap();
        let r = propagate_pulse(&input, 100.0, &MediumParams::default(), &PropagationGrid::default());
        assert!(matches!(r, Err(Error::Regime(_))));
    }
}
