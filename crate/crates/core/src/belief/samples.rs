//! Empirical relation between accuracy, confidence and sample count for
//! multinomial estimates.
//!
//! ```text
//!              ln( 1 / (1.25 (1 - δ) - 1/6) )
//! t(ε, δ) = ------------------------------------------
//!            ε · ( -ln( 1 / (1.5 (1 - ε) + 1/3) ) )²
//! ```
//!
//! The relation is a fitted curve, not a bound. Its numerator is negative for
//! `δ < 1/15` and its denominator vanishes at `ε = 5/9`; in `ε` it falls from
//! infinity to a minimum at [`eps_turn`] and rises again. Inversion only
//! uses the falling branch `(0, eps_turn]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::BeliefError;

/// Floor on the accuracy returned by [`accuracy_for`].
pub const EPSILON_MIN: f64 = 1e-6;

/// Upper limit (exclusive) on `delta` for the relation to be defined.
const DELTA_MAX: f64 = 13.0 / 15.0;

/// Accuracy / confidence requirement: `P(|p - p̂| < epsilon) >= 1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSpec {
    pub epsilon: f64,
    pub delta: f64,
}

impl ConfidenceSpec {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, BeliefError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(BeliefError::Domain {
                name: "epsilon",
                value: epsilon,
                constraint: "0 <= epsilon <= 1",
            });
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(BeliefError::Domain {
                name: "delta",
                value: delta,
                constraint: "0 <= delta <= 1",
            });
        }
        Ok(Self { epsilon, delta })
    }
}

fn check_delta(delta: f64) -> Result<(), BeliefError> {
    if !(0.0..DELTA_MAX).contains(&delta) {
        return Err(BeliefError::Domain {
            name: "delta",
            value: delta,
            constraint: "0 <= delta < 13/15 (1.25(1 - delta) - 1/6 > 0)",
        });
    }
    Ok(())
}

fn numerator(delta: f64) -> f64 {
    (1.0 / (1.25 * (1.0 - delta) - 1.0 / 6.0)).ln()
}

fn denominator(epsilon: f64) -> f64 {
    let inner = -(1.0 / (1.5 * (1.0 - epsilon) + 1.0 / 3.0)).ln();
    epsilon * inner * inner
}

/// Number of samples the relation asks for at `(epsilon, delta)`, evaluated
/// literally. Negative for `delta < 1/15`.
pub fn required_samples(spec: ConfidenceSpec) -> Result<f64, BeliefError> {
    let ConfidenceSpec { epsilon, delta } = spec;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(BeliefError::Domain {
            name: "epsilon",
            value: epsilon,
            constraint: "0 < epsilon <= 1",
        });
    }
    check_delta(delta)?;
    let den = denominator(epsilon);
    if den == 0.0 {
        return Err(BeliefError::Domain {
            name: "epsilon",
            value: epsilon,
            constraint: "epsilon != 5/9 (sample relation diverges)",
        });
    }
    Ok(numerator(delta) / den)
}

/// Accuracy at which the sample relation bottoms out; `t` decreases in
/// `epsilon` on `(0, eps_turn]`.
pub(crate) fn eps_turn() -> f64 {
    static TURN: OnceLock<f64> = OnceLock::new();
    *TURN.get_or_init(|| {
        // d/dε [ε ln²x] = 0  <=>  ln x = 3ε / x  with x = 11/6 - 1.5ε
        let g = |e: f64| {
            let x = 11.0 / 6.0 - 1.5 * e;
            x.ln() - 3.0 * e / x
        };
        let (mut lo, mut hi) = (0.0, 5.0 / 9.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Accuracy certified by `n` samples at confidence `delta`: the `epsilon`
/// on the falling branch with `required_samples(epsilon, delta) = n`,
/// clamped to `[EPSILON_MIN, 1]`.
///
/// For `delta <= 1/15` the relation asks for no samples at any accuracy, so
/// the result is `EPSILON_MIN`. When `n` is below the relation's minimum the
/// accuracy is uncertified and the result is `1`.
pub fn accuracy_for(delta: f64, n: u64) -> Result<f64, BeliefError> {
    check_delta(delta)?;
    if n == 0 {
        return Err(BeliefError::EmptyDistribution);
    }
    let num = numerator(delta);
    if num <= 0.0 {
        return Ok(EPSILON_MIN);
    }
    let target = n as f64;
    let t = |e: f64| num / denominator(e);
    let turn = eps_turn();
    if target < t(turn) {
        return Ok(1.0);
    }
    if target >= t(EPSILON_MIN) {
        return Ok(EPSILON_MIN);
    }
    let (mut lo, mut hi) = (EPSILON_MIN, turn);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if t(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
