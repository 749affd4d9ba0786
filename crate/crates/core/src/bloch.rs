//! Density-matrix dynamics of a single Λ-system member.
//!
//! Rotating-frame Hamiltonian (angular units, ħ = 1):
//!
//! ```text
//! H = −δ_P |3⟩⟨3| − (δ_P − δ_C + δ_inh) |2⟩⟨2|
//!     − (Ω_P/2)(|3⟩⟨1| + h.c.) − (Ω_C/2)(|3⟩⟨2| + h.c.)
//! ```
//!
//! with `dρ/dt = −i[H, ρ]` plus dephasing of every coherence and population
//! decay out of `|3⟩`. The coupling sign makes the ρ12 equation read
//!
//! ```text
//! dρ12/dt = −i(Ω_C/2)ρ13 + i(Ω_P/2)ρ32 − i(δ_P − δ_C + δ_inh)ρ12 − γ12 ρ12
//! ```
//!
//! In this convention absorption shows up as `Im ρ13 < 0` and emission as
//! `Im ρ13 > 0`.

use num_complex::Complex64;

use crate::density::{DensityMatrix, Mat3, ZERO};
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::pulse::{PulseSequence, Transition};
use crate::series::TimeSeries;
use crate::units::{angular, KHZ_TO_RAD_PER_US};

/// Validity tolerance applied to states handed to the dynamics.
pub const STATE_TOL: f64 = 1e-9;

/// Largest admissible `dt·2π·rate`.
pub const MAX_STEP_PHASE: f64 = 0.1;

/// Instantaneous inputs of the Liouvillian (all kHz).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochInputs {
    pub probe_rabi_khz: f64,
    pub coupling_rabi_khz: f64,
    pub probe_detuning_khz: f64,
    pub coupling_detuning_khz: f64,
    /// Spin shift of this ensemble member.
    pub inhomogeneous_khz: f64,
}

/// Relaxation rates and diagonal Hamiltonian entries in rad/μs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Generator {
    h22: f64,
    h33: f64,
    g12: f64,
    g13: f64,
    g23: f64,
    d31: f64,
    d32: f64,
}

impl Generator {
    pub(crate) fn new(
        params: &MediumParams,
        probe_detuning_khz: f64,
        coupling_detuning_khz: f64,
        inhomogeneous_khz: f64,
    ) -> Self {
        Self {
            h22: -angular(probe_detuning_khz - coupling_detuning_khz + inhomogeneous_khz),
            h33: -angular(probe_detuning_khz),
            g12: angular(params.gamma12_khz),
            g13: angular(params.gamma13_khz),
            g23: angular(params.gamma23_khz),
            d31: angular(params.decay31_khz),
            d32: angular(params.decay32_khz),
        }
    }

    /// `dρ/dt` for complex Rabi frequencies (rad/μs) on the two transitions,
    /// evaluated with the full commutator.
    pub(crate) fn rhs_full(&self, rho: &Mat3, probe: Complex64, coupling: Complex64) -> Mat3 {
        let zero = Complex64::new(0.0, 0.0);
        let h: Mat3 = [
            [zero, zero, -0.5 * probe.conj()],
            [zero, Complex64::new(self.h22, 0.0), -0.5 * coupling.conj()],
            [-0.5 * probe, -0.5 * coupling, Complex64::new(self.h33, 0.0)],
        ];
        let mut out = ZERO;
        let minus_i = Complex64::new(0.0, -1.0);
        for i in 0..3 {
            for j in 0..3 {
                let mut hr = zero;
                let mut rh = zero;
                for k in 0..3 {
                    hr += h[i][k] * rho[k][j];
                    rh += rho[i][k] * h[k][j];
                }
                out[i][j] = minus_i * (hr - rh);
            }
        }
        self.relax(rho, &mut out);
        out
    }

    /// Same as [`Generator::rhs_full`] for a Hermitian `rho`: only the upper
    /// triangle is evaluated and the rest is mirrored.
    #[inline]
    pub(crate) fn rhs(&self, r: &Mat3, probe: Complex64, coupling: Complex64) -> Mat3 {
        let h31 = -0.5 * probe;
        let h32 = -0.5 * coupling;
        let h13 = h31.conj();
        let h23 = h32.conj();
        let (a, b) = (self.h22, self.h33);
        let mi = Complex64::new(0.0, -1.0);
        let d11 = mi * (h13 * r[2][0] - r[0][2] * h31);
        let d22 = mi * (h23 * r[2][1] - r[1][2] * h32);
        let d12 = mi * (h13 * r[2][1] - r[0][1] * a - r[0][2] * h32);
        let d13 = mi * (h13 * r[2][2] - r[0][0] * h13 - r[0][1] * h23 - r[0][2] * b);
        let d23 = mi * (r[1][2] * a + h23 * r[2][2] - r[1][0] * h13 - r[1][1] * h23 - r[1][2] * b);
        let d11 = Complex64::new(d11.re, 0.0);
        let d22 = Complex64::new(d22.re, 0.0);
        let d33 = -(d11 + d22);
        let mut out = [
            [d11, d12, d13],
            [d12.conj(), d22, d23],
            [d13.conj(), d23.conj(), d33],
        ];
        self.relax(r, &mut out);
        out
    }

    #[inline]
    fn relax(&self, rho: &Mat3, out: &mut Mat3) {
        out[0][1] -= self.g12 * rho[0][1];
        out[1][0] -= self.g12 * rho[1][0];
        out[0][2] -= self.g13 * rho[0][2];
        out[2][0] -= self.g13 * rho[2][0];
        out[1][2] -= self.g23 * rho[1][2];
        out[2][1] -= self.g23 * rho[2][1];
        let p3 = rho[2][2];
        out[2][2] -= (self.d31 + self.d32) * p3;
        out[0][0] += self.d31 * p3;
        out[1][1] += self.d32 * p3;
    }

    /// One RK4 step of length `dt` given the drives at the start, midpoint and end.
    #[inline]
    pub(crate) fn rk4(&self, rho: &Mat3, drives: [(Complex64, Complex64); 3], dt: f64) -> Mat3 {
        let k1 = self.rhs(rho, drives[0].0, drives[0].1);
        let k2 = self.rhs(&axpy(rho, 0.5 * dt, &k1), drives[1].0, drives[1].1);
        let k3 = self.rhs(&axpy(rho, 0.5 * dt, &k2), drives[1].0, drives[1].1);
        let k4 = self.rhs(&axpy(rho, dt, &k3), drives[2].0, drives[2].1);
        let mut out = *rho;
        let c = dt / 6.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += c * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
        out
    }
}

#[inline]
fn axpy(x: &Mat3, a: f64, y: &Mat3) -> Mat3 {
    let mut out = *x;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += a * y[i][j];
        }
    }
    out
}

/// `dρ/dt` in units of 1/μs.
pub fn liouvillian(
    rho: &DensityMatrix,
    inputs: &BlochInputs,
    params: &MediumParams,
) -> Result<Mat3> {
    rho.require_valid(STATE_TOL, "liouvillian state")?;
    params.validate()?;
    let gen = Generator::new(
        params,
        inputs.probe_detuning_khz,
        inputs.coupling_detuning_khz,
        inputs.inhomogeneous_khz,
    );
    Ok(gen.rhs_full(
        rho.elements(),
        Complex64::new(angular(inputs.probe_rabi_khz), 0.0),
        Complex64::new(angular(inputs.coupling_rabi_khz), 0.0),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepping {
    pub dt_us: f64,
    /// Record every `output_stride`-th step (the final step is always recorded).
    pub output_stride: usize,
    /// Keep the density matrix of every recorded sample.
    pub record_states: bool,
}

impl Stepping {
    pub fn new(dt_us: f64, output_stride: usize) -> Self {
        Self {
            dt_us,
            output_stride,
            record_states: false,
        }
    }

    pub fn recording_states(mut self) -> Self {
        self.record_states = true;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.dt_us > 0.0) || !self.dt_us.is_finite() {
            return Err(Error::InvalidInput(format!("dt_us = {} must be positive", self.dt_us)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidInput("output_stride must be ≥ 1".into()));
        }
        Ok(())
    }
}

impl Default for Stepping {
    fn default() -> Self {
        Self::new(0.01, 1)
    }
}

/// Worst deviations from a physical state seen over recorded samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_population: f64,
    pub max_population: f64,
}

impl Default for Conservation {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_population: f64::INFINITY,
            max_population: f64::NEG_INFINITY,
        }
    }
}

impl Conservation {
    pub fn observe(&mut self, rho: &DensityMatrix) {
        self.max_trace_error = self.max_trace_error.max((rho.trace() - 1.0).norm());
        self.max_hermiticity_error = self.max_hermiticity_error.max(rho.hermiticity_error());
        for k in 1..=3 {
            let p = rho.population(k);
            self.min_population = self.min_population.min(p);
            self.max_population = self.max_population.max(p);
        }
    }

    pub fn merge(&mut self, other: &Conservation) {
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_population = self.min_population.min(other.min_population);
        self.max_population = self.max_population.max(other.max_population);
    }

    /// Trace within 1e-9, Hermiticity within 1e-12, populations in [−1e-9, 1 + 1e-9].
    pub fn within_tolerance(&self) -> bool {
        self.max_trace_error <= 1e-9
            && self.max_hermiticity_error <= 1e-12
            && self.min_population >= -1e-9
            && self.max_population <= 1.0 + 1e-9
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub final_state: DensityMatrix,
    /// Present when [`Stepping::record_states`] is set.
    pub states: Option<Vec<DensityMatrix>>,
    pub conservation: Conservation,
}

/// Rejects steps whose phase `dt·2π·rate` reaches [`MAX_STEP_PHASE`] for any named rate.
pub(crate) fn check_step(dt_us: f64, rates: &[(&str, f64)]) -> Result<()> {
    for &(name, khz) in rates {
        let product = dt_us * KHZ_TO_RAD_PER_US * khz.abs();
        if !(product < MAX_STEP_PHASE) {
            return Err(Error::StepSize {
                rate_name: name.to_string(),
                value_khz: khz,
                dt_us,
                product,
            });
        }
    }
    Ok(())
}

pub(crate) fn step_rates<'a>(
    params: &MediumParams,
    probe_peak_khz: f64,
    coupling_peak_khz: f64,
    probe_detuning_khz: f64,
    coupling_detuning_khz: f64,
    inhomogeneous_khz: f64,
) -> Vec<(&'a str, f64)> {
    vec![
        ("probe Rabi frequency", probe_peak_khz),
        ("coupling Rabi frequency", coupling_peak_khz),
        ("probe detuning", probe_detuning_khz),
        (
            "two-photon detuning",
            probe_detuning_khz - coupling_detuning_khz + inhomogeneous_khz,
        ),
        ("gamma12_khz", params.gamma12_khz),
        ("gamma13_khz", params.gamma13_khz),
        ("gamma23_khz", params.gamma23_khz),
        ("decay31_khz + decay32_khz", params.decay31_khz + params.decay32_khz),
    ]
}

/// Fixed-step RK4 integration of `rho0` through `seq`.
///
/// The grid is `start + k·dt`; the last step is shortened to land on the end of
/// the sequence.
pub fn evolve(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &MediumParams,
    inhomogeneous_khz: f64,
    stepping: &Stepping,
) -> Result<Evolution> {
    stepping.check()?;
    params.validate()?;
    rho0.require_valid(STATE_TOL, "initial state")?;
    if !inhomogeneous_khz.is_finite() {
        return Err(Error::InvalidInput("inhomogeneous shift must be finite".into()));
    }
    let (dp, dc) = seq.detunings();
    check_step(
        stepping.dt_us,
        &step_rates(
            params,
            seq.peak_rabi(Transition::Probe),
            seq.peak_rabi(Transition::Coupling),
            dp,
            dc,
            inhomogeneous_khz,
        ),
    )?;
    let gen = Generator::new(params, dp, dc, inhomogeneous_khz);

    let span = seq.span_us();
    let dt = stepping.dt_us;
    let n_steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let t_at = |k: usize| {
        if k >= n_steps {
            seq.total_duration_us()
        } else {
            seq.start_us() + k as f64 * dt
        }
    };
    let drive = |t: f64| {
        let d = seq.drive_at(t);
        (
            Complex64::new(angular(d.probe_khz), 0.0),
            Complex64::new(angular(d.coupling_khz), 0.0),
        )
    };

    let n_samples = n_steps / stepping.output_stride + 2;
    let mut series = TimeSeries::with_capacity(n_samples);
    let mut states = stepping.record_states.then(|| Vec::with_capacity(n_samples));
    let mut conservation = Conservation::default();
    let mut record = |t: f64, m: &Mat3| {
        let rho = DensityMatrix::from_elements(*m);
        series.push_state(t, &rho);
        conservation.observe(&rho);
        if let Some(s) = states.as_mut() {
            s.push(rho);
        }
    };

    let mut rho = *rho0.elements();
    record(t_at(0), &rho);
    for k in 0..n_steps {
        let t0 = t_at(k);
        let t1 = t_at(k + 1);
        let h = t1 - t0;
        // one-sided samples, so a pulse edge on the grid is seen by one step only
        let eps = 1e-9 * h;
        rho = gen.rk4(&rho, [drive(t0 + eps), drive(t0 + 0.5 * h), drive(t1 - eps)], h);
        if (k + 1) % stepping.output_stride == 0 || k + 1 == n_steps {
            record(t1, &rho);
        }
    }

    Ok(Evolution {
        series,
        final_state: DensityMatrix::from_elements(rho),
        states,
        conservation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::Pulse;
    use crate::series::Channel;

    fn closed() -> MediumParams {
        MediumParams {
            gamma12_khz: 0.0,
            gamma13_khz: 0.0,
            gamma23_khz: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn hermitian_rhs_matches_full_commutator() {
        let params = MediumParams {
            gamma12_khz: 0.4,
            gamma13_khz: 3.0,
            gamma23_khz: 2.0,
            decay31_khz: 1.0,
            decay32_khz: 0.5,
            ..Default::default()
        };
        let gen = Generator::new(&params, 7.0, -3.0, 11.0);
        for k in 0..50 {
            let x = k as f64;
            let psi = [
                Complex64::new(x.sin(), 0.3),
                Complex64::new(0.2, (1.7 * x).cos()),
                Complex64::new((0.3 * x).cos(), -0.5),
            ];
            let rho = DensityMatrix::pure(psi).unwrap();
            let p = Complex64::from_polar(0.5 + 0.01 * x, 0.1 * x);
            let c = Complex64::from_polar(0.9, -0.2 * x);
            let a = gen.rhs(rho.elements(), p, c);
            let b = gen.rhs_full(rho.elements(), p, c);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((a[i][j] - b[i][j]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn nothing_drives_nothing_moves() {
        let d = liouvillian(&DensityMatrix::ground(), &BlochInputs::default(), &closed()).unwrap();
        assert!(d.iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn probe_on_ground_state_drives_rho13() {
        let inputs = BlochInputs {
            probe_rabi_khz: 10.0,
            ..Default::default()
        };
        let d = liouvillian(&DensityMatrix::ground(), &inputs, &closed()).unwrap();
        // dρ13/dt = −i(Ω_P/2)(ρ11 − ρ33), Ω_P = 2π·10 kHz = 0.0628 rad/μs
        assert!((d[0][2] - Complex64::new(0.0, -0.031_415_926_535_897_93)).norm() < 1e-15);
        assert!((d[2][0] - d[0][2].conj()).norm() == 0.0);
    }

    #[test]
    fn invalid_state_is_rejected() {
        let rho = DensityMatrix::diagonal([0.5, 0.0, 0.0]);
        assert!(matches!(
            liouvillian(&rho, &BlochInputs::default(), &closed()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn free_diagonal_state_is_constant() {
        let seq = PulseSequence::free(0.0, 20.0).unwrap();
        let rho0 = DensityMatrix::diagonal([0.5, 0.3, 0.2]);
        let ev = evolve(&rho0, &seq, &closed(), 0.0, &Stepping::new(0.01, 10)).unwrap();
        for (c, v) in ev.series.channels() {
            let first = v[0];
            assert!(v.iter().all(|x| *x == first), "{} not constant", c.name());
        }
        assert_eq!(ev.series.len(), 201);
    }

    #[test]
    fn half_rabi_cycle_inverts_population() {
        let p = Pulse::square(Transition::Probe, 100.0, 0.0, 10.0).unwrap();
        let seq = PulseSequence::new(vec![p], 10.0).unwrap();
        let ev = evolve(&DensityMatrix::ground(), &seq, &closed(), 0.0, &Stepping::new(0.001, 100)).unwrap();
        let k = ev.series.index_at(5.0).unwrap();
        let pop3 = ev.series.channel(Channel::Pop3).unwrap()[k];
        assert!((pop3 - 1.0).abs() < 1e-4, "pop3 = {pop3}");
    }

    #[test]
    fn oversized_step_names_the_rate() {
        let p = Pulse::square(Transition::Coupling, 2000.0, 0.0, 1.0).unwrap();
        let seq = PulseSequence::new(vec![p], 1.0).unwrap();
        let err = evolve(&DensityMatrix::ground(), &seq, &closed(), 0.0, &Stepping::new(0.01, 1))
            .unwrap_err();
        match err {
            Error::StepSize { rate_name, .. } => assert_eq!(rate_name, "coupling Rabi frequency"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn short_last_step_lands_on_end() {
        let seq = PulseSequence::free(0.0, 1.005).unwrap();
        let ev = evolve(&DensityMatrix::ground(), &seq, &closed(), 0.0, &Stepping::new(0.01, 1)).unwrap();
        assert_eq!(*ev.series.t_us().last().unwrap(), 1.005);
    }
}
