//! Three-level density matrix.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat3 = [[Complex64; 3]; 3];

pub(crate) const ZERO: Mat3 = [[Complex64::new(0.0, 0.0); 3]; 3];

/// Density matrix of one Λ-system member. Index 0, 1, 2 stand for `|1⟩`, `|2⟩`, `|3⟩`.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Mat3,
}

impl DensityMatrix {
    /// Wraps raw elements without validation.
    pub fn from_elements(m: Mat3) -> Self {
        Self { m }
    }

    /// `|1⟩⟨1|`, the optically pumped starting state.
    pub fn ground() -> Self {
        Self::diagonal([1.0, 0.0, 0.0])
    }

    pub fn diagonal(p: [f64; 3]) -> Self {
        let mut m = ZERO;
        for (k, pk) in p.iter().enumerate() {
            m[k][k] = Complex64::new(*pk, 0.0);
        }
        Self { m }
    }

    pub fn maximally_mixed() -> Self {
        Self::diagonal([1.0 / 3.0; 3])
    }

    /// `|ψ⟩⟨ψ|` for the (normalised) amplitudes `psi`.
    pub fn pure(psi: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("state vector has zero norm".into()));
        }
        let mut m = ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = psi[i] * psi[j].conj() / norm;
            }
        }
        Ok(Self { m })
    }

    /// Ground-state superposition `cos θ|1⟩ + e^{iφ} sin θ|2⟩`.
    pub fn spin_superposition(theta: f64, phase: f64) -> Self {
        let psi = [
            Complex64::new(theta.cos(), 0.0),
            Complex64::from_polar(theta.sin(), phase),
            Complex64::new(0.0, 0.0),
        ];
        Self::pure(psi).expect("unit-norm superposition")
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn elements(&self) -> &Mat3 {
        &self.m
    }

    pub fn rho12(&self) -> Complex64 {
        self.m[0][1]
    }

    pub fn rho13(&self) -> Complex64 {
        self.m[0][2]
    }

    pub fn rho23(&self) -> Complex64 {
        self.m[1][2]
    }

    /// Population of level `level` (1-based, as in the physics notation).
    pub fn population(&self, level: usize) -> f64 {
        assert!((1..=3).contains(&level), "levels are 1, 2, 3");
        self.m[level - 1][level - 1].re
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                worst = worst.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace and the population range against `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        assert!(tol > 0.0, "tolerance must be positive");
        let mut violations = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                let dev = (self.m[i][j] - self.m[j][i].conj()).norm();
                if !(dev <= tol) {
                    violations.push(Violation::NonHermitian { i, j, deviation: dev });
                }
            }
        }
        let tr = self.trace();
        if !((tr - 1.0).norm() <= tol) {
            violations.push(Violation::Trace { trace: tr });
        }
        for k in 0..3 {
            let p = self.m[k][k].re;
            if !(p >= -tol && p <= 1.0 + tol) {
                violations.push(Violation::Population {
                    level: k + 1,
                    value: p,
                });
            }
        }
        ValidationReport { violations }
    }

    pub(crate) fn require_valid(&self, tol: f64, what: &str) -> Result<()> {
        let report = self.validate(tol);
        if report.ok() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("{what}: {report}")))
        }
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.m.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonHermitian { i: usize, j: usize, deviation: f64 },
    Trace { trace: Complex64 },
    Population { level: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonHermitian { i, j, deviation } => write!(
                f,
                "ρ{}{} differs from conj(ρ{}{}) by {deviation:e}",
                i + 1,
                j + 1,
                j + 1,
                i + 1
            ),
            Violation::Trace { trace } => write!(f, "trace is {trace}"),
            Violation::Population { level, value } => {
                write!(f, "population of |{level}⟩ is {value}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
