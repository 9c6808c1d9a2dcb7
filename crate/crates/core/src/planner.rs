//! Interface shared by the online planners.

use rand::Rng;
use thiserror::Error;

use crate::amdp::{ActionId, GenerativeModel, ModelError};
use crate::belief::BeliefError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("state has no actions")]
    NoActions,
    #[error("search budget must be at least {needed}, got {got}")]
    Budget { needed: usize, got: usize },
    #[error("state is not in the search graph")]
    MissingState,
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// An online planner: given the current state, spend a search budget on the
/// generative model and recommend one action.
pub trait Planner<M: GenerativeModel> {
    fn plan(&mut self, model: &M, state: &M::State) -> Result<ActionId, PlanError>;

    /// Drops any search state kept between calls (start of a new episode).
    fn reset(&mut self);
}

/// Index of the maximum of `scores`; exact ties are broken uniformly at
/// random from `rng`.
pub(crate) fn argmax_random_tie<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Option<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if scores.is_empty() || best.is_nan() {
        return None;
    }
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    match ties.len() {
        0 => None,
        1 => Some(ties[0]),
        k => Some(ties[rng.gen_range(0..k)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ties_are_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut seen = [0usize; 3];
        for _ in 0..300 {
            seen[argmax_random_tie(&[1.0, 0.0, 1.0], &mut rng).unwrap()] += 1;
        }
        assert_eq!(seen[1], 0);
        assert!(seen[0] > 100 && seen[2] > 100);
        assert_eq!(argmax_random_tie(&[], &mut rng), None);
        assert_eq!(argmax_random_tie(&[0.5, 2.0], &mut rng), Some(1));
    }
}
