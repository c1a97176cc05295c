//! Three-level emitter toolkit for long-lifetime quantum-dot emission.
//!
//! The crate covers the closed-form decay laws of a QD coupled to a
//! metastable wetting-layer reservoir ([`model`]), the three-level rate
//! matrix and its second-order correlation function ([`rate_matrix`]),
//! deterministic and stochastic simulation ([`dynamics`], [`stochastic`]),
//! TCSPC/HBT data reduction ([`photon_stats`]) and weighted least-squares
//! fitting ([`estimation`]).
//!
//! Units are fixed throughout: times in ns, rates in ns⁻¹.

pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod io;
pub mod model;
pub mod ode;
pub mod photon_stats;
pub mod rate_matrix;
pub mod special;
pub mod stochastic;
pub mod stream;
pub mod synthetic;

#[cfg(test)]
pub(crate) mod oracle;

pub use error::{Error, Result};
pub use estimation::{DecayHistogram, FitResult};
pub use model::{PopulationTrajectory, PowerLawTrapping, StretchedDecayParams, TwoLevelDecayParams};
pub use photon_stats::Correlogram;
pub use rate_matrix::{EigenDecomposition, G2Params, RateSet};
pub use stream::PhotonStream;
