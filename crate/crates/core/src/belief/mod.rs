//! Theory-of-evidence machinery.
//!
//! Sampled multinomial transition models are turned into belief functions:
//! per-outcome confidence intervals bound the singleton masses, the slack is
//! spread over compound propositions by a minimum-norm linear solve, and the
//! result is discounted by the confidence level onto a boundary proposition
//! that stands for every outcome not (yet) observed. Lower and upper
//! expectations are the Choquet integrals of a value vector under that belief
//! function.

mod distribution;
mod function;
mod samples;
mod system;

pub use distribution::{
    bin_outcomes, dist2belief, dist2belief_with_accuracy, interval_bounds, undiscounted_belief,
    BinnedDistribution, EmpiricalDistribution, SolveReport, DEFAULT_BIN_CAP,
};
pub use function::{BeliefFunction, Proposition, ValueBounds, MASS_TOLERANCE};
pub use samples::{accuracy_for, required_samples, ConfidenceSpec, EPSILON_MIN};
pub use system::{assemble_system, ConstraintSystem, MAX_OUTCOMES};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("proposition {mask:#b} is not a nonempty subset of an outcome space of size {n}")]
    InvalidProposition { mask: u64, n: usize },
    #[error("mass {0} is outside [0, 1]")]
    InvalidMass(f64),
    #[error("masses sum to {0}, expected 1")]
    Unnormalized(f64),
    #[error("expected {expected} outcome values, got {got}")]
    MissingValue { expected: usize, got: usize },
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("{name} = {value} violates {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("{0} outcomes is outside the supported range 1..={MAX_OUTCOMES}; bin first")]
    OutcomeCount(usize),
    #[error("empirical distribution has no samples")]
    EmptyDistribution,
}
