//! Estimation of Markov chain convergence bounds from common-random-number
//! coupled simulation.
//!
//! Chains are expressed as iterated function systems `x' = f(θ, x)` with θ
//! built coordinate-wise from uniforms. Driving two copies on the same
//! uniforms isolates the effect of the initial condition; under the right
//! monotonicity conditions the resulting distances estimate the squared
//! L²-Wasserstein distance, and combined with a rejection-sampling constant
//! they bound the distance to stationarity.

pub mod bounds;
pub mod chains;
pub mod error;
pub mod estimators;
pub mod gibbs;
pub mod ifs;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};

/// Locale-free float formatting with 17 significant digits, enough for an
/// exact f64 round trip.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
