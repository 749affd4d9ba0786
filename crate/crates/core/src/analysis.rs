//! Small numerical helpers shared by the analysis operations.

use crate::error::{Error, Result};

/// Pearson correlation coefficient. `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Least-squares `s` minimising `Σ (y − s·x)²`.
pub fn fit_scale(x: &[f64], y: &[f64]) -> Option<f64> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx)
}

/// Centered first derivative at interior samples `1..n-1` of a non-uniform grid.
pub fn centered_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(t.len(), y.len());
    (1..t.len().saturating_sub(1))
        .map(|k| (y[k + 1] - y[k - 1]) / (t[k + 1] - t[k - 1]))
        .collect()
}

/// Exponent `p` of the least-squares fit `y ∝ x^p` in log-log space.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two (x, y) pairs".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("power-law fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("x values are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Number of direction changes of `values`, ignoring excursions smaller than `floor`.
pub fn count_slope_reversals(values: &[f64], floor: f64) -> usize {
    let Some(&first) = values.first() else {
        return 0;
    };
    // direction: 0 unknown, +1 rising, -1 falling
    let mut direction = 0i8;
    let mut extreme = first;
    let mut reversals = 0;
    for &v in &values[1..] {
        match direction {
            0 => {
                if v - extreme > floor {
                    direction = 1;
                    extreme = v;
                } else if extreme - v > floor {
                    direction = -1;
                    extreme = v;
                }
            }
            1 => {
                if v > extreme {
                    extreme = v;
                } else if extreme - v > floor {
                    direction = -1;
                    extreme = v;
                    reversals += 1;
                }
            }
            _ => {
                if v < extreme {
                    extreme = v;
                } else if v - extreme > floor {
                    direction = 1;
                    extreme = v;
                    reversals += 1;
                }
            }
        }
    }
    reversals
}
