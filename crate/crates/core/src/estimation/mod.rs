//! Weighted nonlinear least-squares fits of the decay and correlation models.

mod fits;
mod lm;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fits::{
    fit_exponential, fit_g2, fit_g2_with, fit_stretched, G2FitOptions, DEFAULT_FAST_WINDOW, DEFAULT_SLOW_WINDOW_START,
};
pub use lm::{damped_least_squares, Bound, CurveData, LmOptions, ParamSpec};

/// TCSPC counts versus delay on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayHistogram {
    pub bin_centers: Vec<f64>,
    /// Counts per bin. Real-valued so noiseless expectation histograms share the type.
    pub counts: Vec<f64>,
    pub bin_width: f64,
}

impl DecayHistogram {
    pub fn new(bin_centers: Vec<f64>, counts: Vec<f64>, bin_width: f64) -> Result<Self> {
        if bin_centers.len() != counts.len() {
            return Err(Error::domain("bin centers and counts differ in length"));
        }
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::domain(format!("bin width must be > 0, got {bin_width}")));
        }
        for (i, w) in bin_centers.windows(2).enumerate() {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - bin_width).abs() > 1e-9 * bin_width.max(w[1].abs()) {
                return Err(Error::domain(format!(
                    "bin centers must be uniformly spaced by {bin_width} ns (violated after bin {i})"
                )));
            }
        }
        if let Some(c) = counts.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::domain(format!("counts must be finite and >= 0, got {c}")));
        }
        Ok(Self { bin_centers, counts, bin_width })
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Outcome of a converged fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    /// One-sigma uncertainties for parameters and derived quantities.
    pub uncertainties: BTreeMap<String, f64>,
    pub derived: BTreeMap<String, f64>,
    pub reduced_chi_square: f64,
    /// Fitted time range (ns).
    pub window: Option<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    /// Covariance of the free parameters, in `covariance_order`.
    pub covariance: Vec<Vec<f64>>,
    pub covariance_order: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.parameters.get(name).or_else(|| self.derived.get(name)).copied().unwrap_or(f64::NAN)
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.uncertainties.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn covariance_of(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.covariance_order.iter().position(|n| n == a)?;
        let j = self.covariance_order.iter().position(|n| n == b)?;
        Some(self.covariance[i][j])
    }
}
