//! Sampled observables.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    ReRho12,
    ImRho12,
    ReRho13,
    ImRho13,
    Pop1,
    Pop2,
    Pop3,
    /// Read-out field proxy, `Im ρ13` in arbitrary units.
    EdArb,
}

impl Channel {
    /// Column order of the time-series CSV.
    pub const ALL: [Channel; 8] = [
        Channel::ReRho12,
        Channel::ImRho12,
        Channel::ReRho13,
        Channel::ImRho13,
        Channel::Pop1,
        Channel::Pop2,
        Channel::Pop3,
        Channel::EdArb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::ReRho12 => "re_rho12",
            Channel::ImRho12 => "im_rho12",
            Channel::ReRho13 => "re_rho13",
            Channel::ImRho13 => "im_rho13",
            Channel::Pop1 => "pop1",
            Channel::Pop2 => "pop2",
            Channel::Pop3 => "pop3",
            Channel::EdArb => "e_d_arb",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn of(self, rho: &DensityMatrix) -> f64 {
        match self {
            Channel::ReRho12 => rho.rho12().re,
            Channel::ImRho12 => rho.rho12().im,
            Channel::ReRho13 => rho.rho13().re,
            Channel::ImRho13 | Channel::EdArb => rho.rho13().im,
            Channel::Pop1 => rho.population(1),
            Channel::Pop2 => rho.population(2),
            Channel::Pop3 => rho.population(3),
        }
    }
}

/// Real channels sampled on a strictly increasing time grid (μs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    t_us: Vec<f64>,
    channels: Vec<(Channel, Vec<f64>)>,
}

impl TimeSeries {
    /// Empty series carrying every standard channel.
    pub fn standard() -> Self {
        Self {
            t_us: Vec::new(),
            channels: Channel::ALL.iter().map(|&c| (c, Vec::new())).collect(),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            t_us: Vec::with_capacity(n),
            channels: Channel::ALL
                .iter()
                .map(|&c| (c, Vec::with_capacity(n)))
                .collect(),
        }
    }

    /// Series from a grid and an arbitrary subset of channels.
    pub fn from_channels(t_us: Vec<f64>, channels: Vec<(Channel, Vec<f64>)>) -> Result<Self> {
        let ts = Self { t_us, channels };
        ts.check()?;
        Ok(ts)
    }

    fn check(&self) -> Result<()> {
        if self.t_us.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("time grid is not strictly increasing".into()));
        }
        for (c, v) in &self.channels {
            if v.len() != self.t_us.len() {
                return Err(Error::InvalidInput(format!(
                    "channel {} has {} samples for a grid of {}",
                    c.name(),
                    v.len(),
                    self.t_us.len()
                )));
            }
        }
        Ok(())
    }

    /// Appends a sample of every standard channel.
    pub fn push_state(&mut self, t_us: f64, rho: &DensityMatrix) {
        self.t_us.push(t_us);
        for (c, v) in &mut self.channels {
            v.push(c.of(rho));
        }
    }

    pub fn t_us(&self) -> &[f64] {
        &self.t_us
    }

    pub fn len(&self) -> usize {
        self.t_us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_us.is_empty()
    }

    pub fn get(&self, channel: Channel) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(c, _)| *c == channel)
            .map(|(_, v)| v.as_slice())
    }

    pub fn channel(&self, channel: Channel) -> Result<&[f64]> {
        self.get(channel)
            .ok_or_else(|| Error::Schema(channel.name().to_string()))
    }

    pub fn channels(&self) -> impl Iterator<Item = (Channel, &[f64])> {
        self.channels.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    /// Index of the first sample at or after `t_us`.
    pub fn index_at(&self, t_us: f64) -> Option<usize> {
        self.t_us.iter().position(|&t| t >= t_us - 1e-9)
    }

    /// Samples with `t0 ≤ t ≤ t1`.
    pub fn window(&self, t0: f64, t1: f64) -> TimeSeries {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&k| self.t_us[k] >= t0 - 1e-9 && self.t_us[k] <= t1 + 1e-9)
            .collect();
        TimeSeries {
            t_us: keep.iter().map(|&k| self.t_us[k]).collect(),
            channels: self
                .channels
                .iter()
                .map(|(c, v)| (*c, keep.iter().map(|&k| v[k]).collect()))
                .collect(),
        }
    }

    /// Concatenation; `other` must start after `self` ends. A duplicated
    /// boundary sample is dropped.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        let mut out = self.clone();
        let skip = match (self.t_us.last(), other.t_us.first()) {
            (Some(a), Some(b)) if (a - b).abs() <= 1e-9 => 1,
            (Some(a), Some(b)) if b < a => {
                return Err(Error::InvalidInput("series overlap in time".into()))
            }
            _ => 0,
        };
        out.t_us.extend_from_slice(&other.t_us[skip.min(other.len())..]);
        for (c, v) in &mut out.channels {
            let src = other.channel(*c)?;
            v.extend_from_slice(&src[skip.min(src.len())..]);
        }
        Ok(out)
    }

    /// `Σ wᵢ·seriesᵢ` over series sharing one grid, accumulated in slice order.
    pub(crate) fn accumulate(&mut self, other: &TimeSeries, weight: f64) {
        if self.t_us.is_empty() {
            self.t_us = other.t_us.clone();
            for (c, v) in &mut self.channels {
                let src = other.get(*c).expect("standard channels");
                v.extend(src.iter().map(|x| weight * x));
            }
            return;
        }
        debug_assert_eq!(self.t_us.len(), other.t_us.len());
        for (c, v) in &mut self.channels {
            let src = other.get(*c).expect("standard channels");
            for (acc, x) in v.iter_mut().zip(src) {
                *acc += weight * x;
            }
        }
    }
}

/// Real values over (two-photon detuning × time). Row `i` belongs to `delta2_khz[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMap {
    pub delta2_khz: Vec<f64>,
    pub t_us: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SpectralMap {
    pub fn new(delta2_khz: Vec<f64>, t_us: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != delta2_khz.len() || values.iter().any(|r| r.len() != t_us.len()) {
            return Err(Error::InvalidInput(
                "map dimensions disagree with its grids".into(),
            ));
        }
        Ok(Self {
            delta2_khz,
            t_us,
            values,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Values at the time sample closest to `t_us`, one per detuning.
    pub fn column_at(&self, t_us: f64) -> Vec<f64> {
        let k = self
            .t_us
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t_us).abs().total_cmp(&(b.1 - t_us).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.values.iter().map(|r| r[k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(Channel::from_name(c.name()), Some(c));
        }
        assert_eq!(Channel::from_name("nope"), None);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let r = TimeSeries::from_channels(vec![0.0, 1.0], vec![(Channel::EdArb, vec![1.0])]);
        assert!(r.is_err());
        let r = TimeSeries::from_channels(vec![1.0, 0.0], vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn concat_drops_shared_boundary() {
        let mut a = TimeSeries::standard();
        a.push_state(0.0, &DensityMatrix::ground());
        a.push_state(1.0, &DensityMatrix::ground());
        let mut b = TimeSeries::standard();
        b.push_state(1.0, &DensityMatrix::ground());
        b.push_state(2.0, &DensityMatrix::ground());
        let c = a.concat(&b).unwrap();
        assert_eq!(c.t_us(), &[0.0, 1.0, 2.0]);
        assert_eq!(c.channel(Channel::Pop1).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn map_dimension_check() {
        assert!(SpectralMap::new(vec![0.0], vec![0.0, 1.0], vec![vec![1.0]]).is_err());
        let m = SpectralMap::new(vec![0.0, 1.0], vec![0.0], vec![vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(m.column_at(0.3), vec![1.0, 2.0]);
    }
}
