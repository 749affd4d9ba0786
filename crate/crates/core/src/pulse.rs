//! Time-gated Rabi envelopes and pulse sequences.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `|1⟩–|3⟩`, driven by `E_P`.
    Probe,
    /// `|2⟩–|3⟩`, driven by `Ω_C` and by the read-out `Ω_A`.
    Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edge {
    Square,
    /// Half-cosine ramps of length `edge_us` at both ends of the window.
    RaisedCosine { edge_us: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub transition: Transition,
    pub rabi_khz: f64,
    pub t_on_us: f64,
    pub t_off_us: f64,
    pub edge: Edge,
    /// δ_P for probe pulses, δ_C for coupling pulses.
    pub detuning_khz: f64,
}

impl Pulse {
    pub fn new(
        transition: Transition,
        rabi_khz: f64,
        t_on_us: f64,
        t_off_us: f64,
        edge: Edge,
        detuning_khz: f64,
    ) -> Result<Self> {
        let p = Self {
            transition,
            rabi_khz,
            t_on_us,
            t_off_us,
            edge,
            detuning_khz,
        };
        p.check()?;
        Ok(p)
    }

    /// Square, resonant pulse.
    pub fn square(transition: Transition, rabi_khz: f64, t_on_us: f64, t_off_us: f64) -> Result<Self> {
        Self::new(transition, rabi_khz, t_on_us, t_off_us, Edge::Square, 0.0)
    }

    fn check(&self) -> Result<()> {
        let finite = [self.rabi_khz, self.t_on_us, self.t_off_us, self.detuning_khz]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("pulse fields must be finite".into()));
        }
        if !(self.t_off_us > self.t_on_us) {
            return Err(Error::InvalidInput(format!(
                "pulse window [{}, {}] μs is empty",
                self.t_on_us, self.t_off_us
            )));
        }
        if self.rabi_khz < 0.0 {
            return Err(Error::InvalidInput(format!(
                "Rabi frequency {} kHz is negative",
                self.rabi_khz
            )));
        }
        if let Edge::RaisedCosine { edge_us } = self.edge {
            let half = 0.5 * (self.t_off_us - self.t_on_us);
            if !(edge_us > 0.0 && edge_us <= half) {
                return Err(Error::InvalidInput(format!(
                    "edge {edge_us} μs must lie in (0, {half}] for this window"
                )));
            }
        }
        Ok(())
    }

    pub fn duration_us(&self) -> f64 {
        self.t_off_us - self.t_on_us
    }

    /// Copy of the pulse with a different Rabi frequency.
    pub fn with_rabi(&self, rabi_khz: f64) -> Result<Self> {
        let mut p = *self;
        p.rabi_khz = rabi_khz;
        p.check()?;
        Ok(p)
    }

    /// Rabi frequency (kHz) at time `t_us`.
    pub fn envelope(&self, t_us: f64) -> f64 {
        if t_us < self.t_on_us || t_us > self.t_off_us {
            return 0.0;
        }
        match self.edge {
            Edge::Square => self.rabi_khz,
            Edge::RaisedCosine { edge_us } => {
                let from_start = t_us - self.t_on_us;
                let to_end = self.t_off_us - t_us;
                let ramp = |x: f64| 0.5 * (1.0 - (PI * x / edge_us).cos());
                if from_start < edge_us {
                    self.rabi_khz * ramp(from_start)
                } else if to_end < edge_us {
                    self.rabi_khz * ramp(to_end)
                } else {
                    self.rabi_khz
                }
            }
        }
    }
}

/// Instantaneous Rabi frequencies (kHz) on the two transitions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Drive {
    pub probe_khz: f64,
    pub coupling_khz: f64,
}

/// Pulses evolved over `[start_us, total_duration_us]`.
///
/// Each transition has one detuning for the whole sequence (it fixes the
/// rotating frame), so all pulses on the same transition must agree on it.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    start_us: f64,
    total_duration_us: f64,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>, total_duration_us: f64) -> Result<Self> {
        Self::with_start(pulses, 0.0, total_duration_us)
    }

    pub fn with_start(pulses: Vec<Pulse>, start_us: f64, total_duration_us: f64) -> Result<Self> {
        if !(total_duration_us > start_us) || !start_us.is_finite() || !total_duration_us.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sequence span [{start_us}, {total_duration_us}] μs is empty"
            )));
        }
        for p in &pulses {
            p.check()?;
            if p.t_off_us > total_duration_us {
                return Err(Error::InvalidInput(format!(
                    "pulse ending at {} μs exceeds total duration {} μs",
                    p.t_off_us, total_duration_us
                )));
            }
        }
        for transition in [Transition::Probe, Transition::Coupling] {
            let mut it = pulses.iter().filter(|p| p.transition == transition);
            if let Some(first) = it.next() {
                if let Some(other) = it.find(|p| p.detuning_khz != first.detuning_khz) {
                    return Err(Error::InvalidInput(format!(
                        "{transition:?} pulses disagree on detuning ({} vs {} kHz)",
                        first.detuning_khz, other.detuning_khz
                    )));
                }
            }
        }
        Ok(Self {
            pulses,
            start_us,
            total_duration_us,
        })
    }

    /// Free evolution, no pulses.
    pub fn free(start_us: f64, total_duration_us: f64) -> Result<Self> {
        Self::with_start(Vec::new(), start_us, total_duration_us)
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn start_us(&self) -> f64 {
        self.start_us
    }

    pub fn total_duration_us(&self) -> f64 {
        self.total_duration_us
    }

    pub fn span_us(&self) -> f64 {
        self.total_duration_us - self.start_us
    }

    /// Sum of the envelopes on each transition at `t_us`.
    pub fn drive_at(&self, t_us: f64) -> Drive {
        let mut d = Drive::default();
        for p in &self.pulses {
            let v = p.envelope(t_us);
            match p.transition {
                Transition::Probe => d.probe_khz += v,
                Transition::Coupling => d.coupling_khz += v,
            }
        }
        d
    }

    /// (δ_P, δ_C) in kHz; zero for a transition without pulses.
    pub fn detunings(&self) -> (f64, f64) {
        let of = |t: Transition| {
            self.pulses
                .iter()
                .find(|p| p.transition == t)
                .map_or(0.0, |p| p.detuning_khz)
        };
        (of(Transition::Probe), of(Transition::Coupling))
    }

    /// Upper bound on the summed Rabi frequency on `transition`.
    pub fn peak_rabi(&self, transition: Transition) -> f64 {
        self.pulses
            .iter()
            .filter(|p| p.transition == transition)
            .map(|p| p.rabi_khz)
            .sum()
    }
}
