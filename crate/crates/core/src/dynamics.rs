//! Deterministic population dynamics of the three-level system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PopulationTrajectory, PowerLawTrapping};
use crate::ode::{self, Tolerances};
use crate::rate_matrix::RateSet;

/// Which rate equations to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dynamics {
    /// Full matrix equation under continuous excitation.
    Matrix(RateSet),
    /// Relaxation after excitation with constant rates, no re-excitation.
    Relaxation { r21: f64, r31: f64, r32: f64 },
    /// Relaxation with power-law trapping `r32(t) = r32' t^-α`.
    ///
    /// With `paired_loss` the loss of |3⟩ to the ground state tracks the
    /// trapping rate, so the total depletion is `2 r32(t)`; otherwise the
    /// constant `r31` of the trapping parameters is used.
    PowerLaw { r21: f64, trapping: PowerLawTrapping, paired_loss: bool },
}

impl Dynamics {
    fn validate(&self) -> Result<()> {
        match self {
            Dynamics::Matrix(r) => r.validate(),
            Dynamics::Relaxation { r21, r31, r32 } => {
                for (n, v) in [("r21", r21), ("r31", r31), ("r32", r32)] {
                    if !(*v >= 0.0) || !v.is_finite() {
                        return Err(Error::domain(format!("{n} must be >= 0, got {v}")));
                    }
                }
                Ok(())
            }
            Dynamics::PowerLaw { r21, trapping, .. } => {
                if !(*r21 >= 0.0) || !r21.is_finite() {
                    return Err(Error::domain(format!("r21 must be >= 0, got {r21}")));
                }
                trapping.validate()
            }
        }
    }

    /// Time derivative of `(p1, p2, p3)`.
    pub fn derivative(&self, t: f64, p: &[f64; 3]) -> [f64; 3] {
        match *self {
            Dynamics::Matrix(RateSet { r12, r21, r13, r31, r32 }) => [
                -(r12 + r13) * p[0] + r21 * p[1] + r31 * p[2],
                r12 * p[0] - r21 * p[1] + r32 * p[2],
                r13 * p[0] - (r31 + r32) * p[2],
            ],
            Dynamics::Relaxation { r21, r31, r32 } => {
                [r21 * p[1] + r31 * p[2], r32 * p[2] - r21 * p[1], -(r31 + r32) * p[2]]
            }
            Dynamics::PowerLaw { r21, trapping, paired_loss } => {
                let r32 = if trapping.alpha == 0.0 {
                    trapping.r32_prime
                } else {
                    trapping.r32_prime * t.powf(-trapping.alpha)
                };
                let r31 = if paired_loss { r32 } else { trapping.r31 };
                [r21 * p[1] + r31 * p[2], r32 * p[2] - r21 * p[1], -(r31 + r32) * p[2]]
            }
        }
    }
}

/// Integrates the populations over `grid`, starting from `initial` at `grid[0]`.
///
/// Power-law trapping diverges at the origin, so its grid must start at
/// a strictly positive time.
pub fn integrate_populations(dynamics: &Dynamics, initial: [f64; 3], grid: &[f64]) -> Result<PopulationTrajectory> {
    integrate_populations_with(dynamics, initial, grid, Tolerances::default())
}

pub fn integrate_populations_with(
    dynamics: &Dynamics,
    initial: [f64; 3],
    grid: &[f64],
    tol: Tolerances,
) -> Result<PopulationTrajectory> {
    dynamics.validate()?;
    if initial.iter().any(|v| !(*v >= 0.0) || *v > 1.0) {
        return Err(Error::domain(format!("initial occupancies must lie in [0, 1], got {initial:?}")));
    }
    if let (Dynamics::PowerLaw { trapping, .. }, Some(&t0)) = (dynamics, grid.first()) {
        if trapping.alpha > 0.0 && !(t0 > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "power-law trapping is singular at t = 0; grid must start at t_min > 0, got {t0}"
            )));
        }
    }
    let (states, _) = ode::integrate(|t, p| dynamics.derivative(t, p), initial, grid, tol)?;
    let mut traj = PopulationTrajectory {
        times: grid.to_vec(),
        p1: Vec::with_capacity(states.len()),
        p2: Vec::with_capacity(states.len()),
        p3: Vec::with_capacity(states.len()),
    };
    for s in states {
        traj.p1.push(s[0]);
        traj.p2.push(s[1]);
        traj.p3.push(s[2]);
    }
    Ok(traj)
}
