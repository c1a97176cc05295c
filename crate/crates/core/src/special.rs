//! Special functions needed by the decay laws.

use crate::error::{Error, Result};

/// Gamma function for positive real arguments.
///
/// Backed by the Lanczos approximation in `statrs`, which is accurate to
/// well below 1e-13 relative on the range used by the lifetime formula.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    // integer arguments small enough for an exact factorial
    if x.fract() == 0.0 && x <= 23.0 {
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Digamma function, ψ(x) = Γ'(x)/Γ(x), for positive arguments.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::digamma(x))
}
