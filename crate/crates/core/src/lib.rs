//! Numerical model of EIT slow light and delayed all-optical routing in a
//! three-level Λ system.
//!
//! Levels are `|1⟩`, `|2⟩` (ground hyperfine states) and `|3⟩` (excited).
//! The probe couples `|1⟩–|3⟩`, the coupling and read-out fields couple
//! `|2⟩–|3⟩`.
//!
//! Units: every user-facing frequency or rate is an ordinary frequency in kHz
//! and every time is in μs. The equations of motion work in angular units
//! (rad/μs), obtained with [`units::angular`].

pub mod analysis;
pub mod bloch;
pub mod config;
pub mod density;
pub mod eit;
pub mod ensemble;
pub mod error;
pub mod fwm;
pub mod medium;
pub mod output;
pub mod propagation;
pub mod pulse;
pub mod routing;
pub mod scenario;
pub mod series;
pub mod units;

pub use bloch::{evolve, liouvillian, BlochInputs, Conservation, Evolution, Stepping};
pub use density::{DensityMatrix, ValidationReport, Violation};
pub use error::{Error, Result};
pub use medium::MediumParams;
pub use pulse::{Edge, Pulse, PulseSequence, Transition};
pub use series::{Channel, SpectralMap, TimeSeries};
