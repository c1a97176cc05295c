//! Closed-form decay laws of the three-level emitter.
//!
//! Two regimes of the reservoir level |3⟩ are covered: a short-lived
//! level feeding |2⟩ at a constant rate, and a metastable level that
//! feeds |2⟩ through power-law (dispersive) trapping, `r32(t) = r32' t^-α`.
//! The latter produces the stretched-like emission law
//! `I(t) = A t^(β-1) exp(-(r t)^β)` with `β = 1 - α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma_fn;

/// Relative separation below which `r21` and `r'` are treated as equal.
pub const DEGENERATE_RATE_TOL: f64 = 1e-9;

/// Parameters of the stretched-like decay law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedDecayParams {
    pub amplitude: f64,
    /// ns⁻¹
    pub rate: f64,
    pub beta: f64,
}

impl StretchedDecayParams {
    pub fn new(amplitude: f64, rate: f64, beta: f64) -> Result<Self> {
        let p = Self { amplitude, rate, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::domain(format!("amplitude must be > 0, got {}", self.amplitude)));
        }
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(Error::domain(format!("rate must be > 0, got {}", self.rate)));
        }
        check_beta(self.beta)
    }
}

/// Initial occupancies and constant rates of the two coupled levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelDecayParams {
    pub n2_0: f64,
    pub n3_0: f64,
    pub r21: f64,
    /// Total depletion rate of |3⟩, `r31 + r32`.
    pub r_prime: f64,
    pub r32: f64,
}

impl TwoLevelDecayParams {
    /// Builds the parameter set from the individual rates of level |3⟩.
    pub fn from_rates(n2_0: f64, n3_0: f64, r21: f64, r31: f64, r32: f64) -> Result<Self> {
        let p = Self { n2_0, n3_0, r21, r_prime: r31 + r32, r32 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r21", self.r21), ("r_prime", self.r_prime), ("r32", self.r32)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.r32 > self.r_prime * (1.0 + 1e-12) {
            return Err(Error::domain("r32 cannot exceed r' = r31 + r32"));
        }
        if !(self.n2_0 >= 0.0) || !(self.n3_0 >= 0.0) || self.n2_0 + self.n3_0 > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "occupancies must be non-negative with n2_0 + n3_0 <= 1, got ({}, {})",
                self.n2_0, self.n3_0
            )));
        }
        Ok(())
    }
}

/// Power-law trapping of the metastable reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTrapping {
    /// Prefactor `r32'` so that `r32' t^-α` is in ns⁻¹.
    pub r32_prime: f64,
    pub alpha: f64,
    /// Radiative loss rate of |3⟩ (ns⁻¹). Only used by the exact ODE.
    pub r31: f64,
    pub n3_0: f64,
}

impl PowerLawTrapping {
    pub fn validate(&self) -> Result<()> {
        if !(self.r32_prime > 0.0) || !self.r32_prime.is_finite() {
            return Err(Error::domain(format!("r32_prime must be > 0, got {}", self.r32_prime)));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1), got {}", self.alpha)));
        }
        if !(self.r31 >= 0.0) || !self.r31.is_finite() {
            return Err(Error::domain(format!("r31 must be >= 0, got {}", self.r31)));
        }
        if !(0.0..=1.0).contains(&self.n3_0) {
            return Err(Error::domain(format!("n3_0 must lie in [0, 1], got {}", self.n3_0)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn effective_rate(&self) -> Result<f64> {
        effective_rate_r(self.r32_prime, self.alpha)
    }

    /// Trapping rate `r32(t)`.
    pub fn rate_at(&self, t: f64) -> Result<f64> {
        trapping_rate(t, self.r32_prime, self.alpha)
    }
}

/// Occupancies of the three levels on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrajectory {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
}

impl PopulationTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total(&self, i: usize) -> f64 {
        self.p1[i] + self.p2[i] + self.p3[i]
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Stretched-like emission intensity `A t^(β-1) exp(-(r t)^β)`.
///
/// For `β < 1` the law has an integrable singularity at the origin, so
/// `t <= 0` is rejected rather than clamped. At `β = 1` the value at
/// `t = 0` is the finite amplitude.
pub fn stretched_intensity(t: f64, p: &StretchedDecayParams) -> Result<f64> {
    p.validate()?;
    if t < 0.0 || !t.is_finite() || (t == 0.0 && p.beta < 1.0) {
        return Err(Error::domain(format!("stretched_intensity requires t > 0, got {t}")));
    }
    if p.beta == 1.0 {
        return Ok(p.amplitude * (-p.rate * t).exp());
    }
    Ok(p.amplitude * t.powf(p.beta - 1.0) * (-(p.rate * t).powf(p.beta)).exp())
}

/// Mean lifetime `(1/r) Γ(1/β + 1)` of the stretched-like law.
pub fn average_lifetime(rate_r: f64, beta: f64) -> Result<f64> {
    if !(rate_r > 0.0) || !rate_r.is_finite() {
        return Err(Error::domain(format!("rate must be > 0, got {rate_r}")));
    }
    check_beta(beta)?;
    Ok(gamma_fn(1.0 / beta + 1.0)? / rate_r)
}

/// Occupancy of |2⟩ for constant rates, fed by the exponentially
/// depleting level |3⟩.
pub fn case1_population_n2(t: f64, p: &TwoLevelDecayParams) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be >= 0, got {t}")));
    }
    let diff = p.r21 - p.r_prime;
    if diff.abs() <= DEGENERATE_RATE_TOL * p.r21.max(p.r_prime) {
        return Err(Error::DegenerateRates { r21: p.r21, r_prime: p.r_prime });
    }
    let e21 = (-p.r21 * t).exp();
    let ep = (-p.r_prime * t).exp();
    Ok(p.n2_0 * e21 + p.n3_0 * p.r32 / diff * (ep - e21))
}

/// Emission intensity `r21 n2(t)` of the constant-rate regime.
pub fn case1_intensity(t: f64, p: &TwoLevelDecayParams) -> Result<f64> {
    Ok(p.r21 * case1_population_n2(t, p)?)
}

/// Effective stretched rate `r = (2 r32' / (1-α))^(1/(1-α))`.
///
/// The factor 2 encodes the approximation `r31 + r32 ≈ 2 r32`.
pub fn effective_rate_r(r32_prime: f64, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(r32_prime > 0.0) || !r32_prime.is_finite() {
        return Err(Error::domain(format!("r32_prime must be > 0, got {r32_prime}")));
    }
    let beta = 1.0 - alpha;
    Ok((2.0 * r32_prime / beta).powf(1.0 / beta))
}

/// Occupancy of the metastable level, `n3(0) exp(-(r t)^β)`.
pub fn metastable_population_n3(t: f64, p: &PowerLawTrapping) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be >= 0, got {t}")));
    }
    let r = p.effective_rate()?;
    let beta = p.beta();
    if beta == 1.0 {
        return Ok(p.n3_0 * (-r * t).exp());
    }
    Ok(p.n3_0 * (-(r * t).powf(beta)).exp())
}

/// Power-law trapping rate `r32' t^-α`.
pub fn trapping_rate(t: f64, r32_prime: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("trapping_rate requires t > 0, got {t}")));
    }
    if alpha == 0.0 {
        return Ok(r32_prime);
    }
    Ok(r32_prime * t.powf(-alpha))
}
