//! Delayed routing: the slowed probe E_S is converted into a new field E_D by
//! a read-out pulse on the coupling transition.
//!
//! While the read-out is on it replaces the coupling field and carries a phase
//! `φ`. The medium is simulated for `n_phases` evenly spaced phases. The part of
//! `ρ31` independent of `φ` feeds the probe mode E_S; the part `∝ e^{iφ}` feeds
//! the read-out mode E_D, and copy `m` is driven by `E_S + E_D·e^{iφ_m}`.
//! Before the read-out all copies coincide, so they share one trajectory.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::bloch::Conservation;
use crate::error::{Error, Result};
use crate::medium::MediumParams;
use crate::propagation::{march, Constant, CouplingField, Envelope, PropagationGrid};
use crate::units::angular;

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSetup {
    pub probe: Envelope,
    pub coupling_khz: f64,
    pub readout_rabi_khz: f64,
    pub readout_start_us: f64,
    pub readout_len_us: f64,
    pub n_phases: usize,
}

#[derive(Debug, Clone)]
pub struct RoutingResult {
    /// E_S without read-out.
    pub reference: Envelope,
    /// E_S with read-out.
    pub signal: Envelope,
    /// E_D.
    pub readout: Envelope,
    pub conservation: Conservation,
}

struct Readout {
    coupling: f64,
    readout: f64,
    start: f64,
    end: f64,
    phases: Vec<Complex64>,
    fork: usize,
}

impl CouplingField for Readout {
    fn copies(&self) -> usize {
        self.phases.len()
    }
    fn fork_step(&self) -> usize {
        self.fork
    }
    fn at(&self, copy: usize, t_mid_us: f64) -> Complex64 {
        if t_mid_us >= self.start && t_mid_us < self.end {
            self.readout * self.phases[copy]
        } else {
            Complex64::new(self.coupling, 0.0)
        }
    }
    fn readout_weight(&self, copy: usize) -> Complex64 {
        self.phases[copy].conj()
    }
}

pub fn route(setup: &RoutingSetup, params: &MediumParams, grid: &PropagationGrid) -> Result<RoutingResult> {
    if setup.n_phases < 4 {
        return Err(Error::InvalidInput("n_phases must be at least 4".into()));
    }
    if !(setup.readout_len_us > 0.0) || !(setup.readout_rabi_khz >= 0.0) {
        return Err(Error::InvalidInput(
            "read-out needs a positive length and a Rabi frequency ≥ 0".into(),
        ));
    }
    let peak = setup.probe.peak_khz();
    if peak > setup.coupling_khz / 5.0 {
        return Err(Error::Regime(format!(
            "probe peak {peak} kHz exceeds Ω_C/5 = {} kHz",
            setup.coupling_khz / 5.0
        )));
    }
    let probe = &setup.probe;
    let fork = ((setup.readout_start_us - probe.t0_us) / probe.dt_us - 0.5)
        .ceil()
        .max(0.0) as usize;
    let field = Readout {
        coupling: angular(setup.coupling_khz),
        readout: angular(setup.readout_rabi_khz),
        start: setup.readout_start_us,
        end: setup.readout_start_us + setup.readout_len_us,
        phases: (0..setup.n_phases)
            .map(|m| Complex64::from_polar(1.0, TAU * m as f64 / setup.n_phases as f64))
            .collect(),
        fork,
    };
    let peak_coupling = setup.coupling_khz.max(setup.readout_rabi_khz);
    let reference = march(probe, &Constant(Complex64::new(angular(setup.coupling_khz), 0.0)), setup.coupling_khz, params, grid)?;
    let routed = march(probe, &field, peak_coupling, params, grid)?;
    let mut conservation = reference.conservation;
    conservation.merge(&routed.conservation);
    Ok(RoutingResult {
        reference: reference.probe,
        signal: routed.probe,
        readout: Envelope {
            t0_us: probe.t0_us,
            dt_us: probe.dt_us,
            values: routed.readout,
        },
        conservation,
    })
}
