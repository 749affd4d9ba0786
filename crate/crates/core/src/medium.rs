use crate::error::{Error, Result};
use crate::units;

/// Decoherence rates, inhomogeneous width and propagation constants of the medium.
///
/// All rates are ordinary frequencies in kHz. A coherence with rate `γ` decays as
/// `exp(-2π·γ·t)`, so the spin homogeneous time `T2 = 500 μs` corresponds to
/// `gamma12_khz ≈ 0.318` (see [`MediumParams::with_spin_t2_us`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Spin (|1⟩–|2⟩) dephasing rate.
    pub gamma12_khz: f64,
    /// Total decay rate of the optical coherence ρ13.
    pub gamma13_khz: f64,
    /// Total decay rate of the optical coherence ρ23.
    pub gamma23_khz: f64,
    /// Population decay |3⟩ → |1⟩.
    pub decay31_khz: f64,
    /// Population decay |3⟩ → |2⟩.
    pub decay32_khz: f64,
    /// Spin inhomogeneous FWHM Δ_S.
    pub delta_s_khz: f64,
    pub length_mm: f64,
    /// Atom-field coupling η₀ in rad/(μs·mm); the field equation uses η = η₀·n_density_rel.
    pub coupling_const: f64,
    pub n_density_rel: f64,
}

impl Default for MediumParams {
    /// Population-shelved Pr:YSO-like defaults: no spin decay, 1 kHz optical
    /// dephasing, no spontaneous decay, Δ_S = 30 kHz, 3 mm crystal.
    fn default() -> Self {
        Self {
            gamma12_khz: 0.0,
            gamma13_khz: 1.0,
            gamma23_khz: 1.0,
            decay31_khz: 0.0,
            decay32_khz: 0.0,
            delta_s_khz: 30.0,
            length_mm: 3.0,
            coupling_const: 1.0,
            n_density_rel: 1.0,
        }
    }
}

impl MediumParams {
    pub fn with_spin_t2_us(mut self, t2_us: f64) -> Self {
        self.gamma12_khz = units::rate_from_t2(t2_us);
        self
    }

    /// Effective field coupling η (rad/(μs·mm)).
    pub fn eta(&self) -> f64 {
        self.coupling_const * self.n_density_rel
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma12_khz", self.gamma12_khz),
            ("gamma13_khz", self.gamma13_khz),
            ("gamma23_khz", self.gamma23_khz),
            ("decay31_khz", self.decay31_khz),
            ("decay32_khz", self.decay32_khz),
            ("delta_s_khz", self.delta_s_khz),
            ("coupling_const", self.coupling_const),
            ("n_density_rel", self.n_density_rel),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and ≥ 0")));
            }
        }
        if !(self.length_mm > 0.0) || !self.length_mm.is_finite() {
            return Err(Error::InvalidInput(format!(
                "length_mm = {} must be positive",
                self.length_mm
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        MediumParams::default().validate().unwrap();
    }

    #[test]
    fn negative_rate_and_zero_length_rejected() {
        let p = MediumParams {
            gamma13_khz: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = MediumParams {
            length_mm: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
