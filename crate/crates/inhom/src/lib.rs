//! Markov flows driven by time-dependent generators, `Ṁ = M·Q(t)` with
//! `M(0) = I`, and what can be said about matrices reachable that way.
//!
//! Piecewise-constant schedules are the main input: by the Bang-Bang
//! principle they reach every interior point of the reachable set, and they
//! can be evolved exactly as products of exponentials.

mod gembed;
mod poisson;
mod schedule;

pub use gembed::{b_quantity, g_embed_d3, g_necessary, factor_bound_from_det, GReport, GRoute, GVerdict};
pub use poisson::{bangbang_product, poisson_matrix, star_point, PoissonFactor};
pub use schedule::{evolve, liouville_det, peano_baker, peano_baker_terms, Schedule, Segment};

use embed_linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InhomError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("time {0} is outside the schedule span or off its sampling grid")]
    TimeOutOfRange(f64),
    #[error("Peano–Baker series did not converge within {0} terms")]
    NotConverged(usize),
    #[error("invalid Poisson factor: {0}")]
    InvalidFactor(String),
    #[error("only dimension {expected} is supported, got {got}")]
    Dimension { expected: &'static str, got: usize },
    #[error("input is not a Markov matrix")]
    NotMarkov,
    #[error("matrix is not totally positive")]
    NotTotallyPositive,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
