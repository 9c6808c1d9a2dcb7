//! Generative-model contract and empirical transition models.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{required_samples, BeliefError, ConfidenceSpec, EmpiricalDistribution, ValueBounds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("reward {reward} outside [{r_min}, {r_max}]")]
    RewardOutOfBounds { reward: f64, r_min: f64, r_max: f64 },
    #[error("state-action pair has not been sampled")]
    Unvisited,
    #[error("action {0} is not available in this state")]
    InvalidAction(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid model specification: {0}")]
    InvalidSpec(&'static str),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

/// Index of an action within a state's action list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

/// One sampled transition `ω = (s', r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<S> {
    pub next_state: S,
    pub reward: f64,
    pub terminal: bool,
}

/// A blackbox simulator that can be queried at any state-action pair.
pub trait GenerativeModel {
    type State: Clone + Eq + Hash + Ord + Debug;

    fn actions(&self, state: &Self::State) -> Vec<ActionId>;

    fn sample<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: ActionId,
        rng: &mut R,
    ) -> Result<Observation<Self::State>, ModelError>;
}

/// Discount and reward bounds; value bounds follow as `R / (1 - γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmdpSpec {
    pub gamma: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl AmdpSpec {
    pub fn new(gamma: f64, r_min: f64, r_max: f64) -> Result<Self, ModelError> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(ModelError::InvalidSpec("gamma must lie in (0, 1)"));
        }
        if !(r_min <= r_max) {
            return Err(ModelError::InvalidSpec("r_min must not exceed r_max"));
        }
        Ok(Self { gamma, r_min, r_max })
    }

    pub fn v_min(&self) -> f64 {
        self.r_min / (1.0 - self.gamma)
    }

    pub fn v_max(&self) -> f64 {
        self.r_max / (1.0 - self.gamma)
    }

    pub fn value_bounds(&self) -> ValueBounds {
        ValueBounds {
            lower: self.v_min(),
            upper: self.v_max(),
        }
    }

    pub fn check_reward(&self, reward: f64) -> Result<(), ModelError> {
        if !(self.r_min..=self.r_max).contains(&reward) {
            return Err(ModelError::RewardOutOfBounds {
                reward,
                r_min: self.r_min,
                r_max: self.r_max,
            });
        }
        Ok(())
    }
}

/// Reward with a total order, so it can be part of an outcome's identity.
#[derive(Debug, Clone, Copy)]
pub struct Reward(pub f64);

impl PartialEq for Reward {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}

impl Eq for Reward {}

impl PartialOrd for Reward {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Reward {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Atomic outcome of a state-action pair. Identity is the `(s', r)` pair;
/// `terminal` is a property of `s'`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition<S> {
    pub next_state: S,
    pub reward: Reward,
    pub terminal: bool,
}

impl<S: Clone> Transition<S> {
    pub fn from_observation(obs: &Observation<S>) -> Self {
        Self {
            next_state: obs.next_state.clone(),
            reward: Reward(obs.reward),
            terminal: obs.terminal,
        }
    }

    pub fn to_observation(&self) -> Observation<S> {
        Observation {
            next_state: self.next_state.clone(),
            reward: self.reward.0,
            terminal: self.terminal,
        }
    }
}

/// Whether `n` samples meet the `(ε, δ)` requirement. At least one sample is
/// always needed, even where the sample relation asks for none.
pub fn is_known_count(n: u64, spec: ConfidenceSpec) -> Result<bool, BeliefError> {
    Ok(n >= 1 && n as f64 >= required_samples(spec)?)
}

/// Empirical transition model: outcome counts per state-action pair.
#[derive(Debug, Clone)]
pub struct EmpiricalModel<S: Ord + Hash> {
    spec: AmdpSpec,
    pairs: HashMap<(S, ActionId), EmpiricalDistribution<Transition<S>>>,
}

impl<S: Clone + Eq + Hash + Ord> EmpiricalModel<S> {
    pub fn new(spec: AmdpSpec) -> Self {
        Self {
            spec,
            pairs: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &AmdpSpec {
        &self.spec
    }

    pub fn record_observation(&mut self, state: &S, action: ActionId, obs: &Observation<S>) -> Result<(), ModelError> {
        self.spec.check_reward(obs.reward)?;
        self.pairs
            .entry((state.clone(), action))
            .or_default()
            .record(Transition::from_observation(obs));
        Ok(())
    }

    pub fn distribution(&self, state: &S, action: ActionId) -> Option<&EmpiricalDistribution<Transition<S>>> {
        self.pairs.get(&(state.clone(), action))
    }

    pub fn visits(&self, state: &S, action: ActionId) -> u64 {
        self.distribution(state, action).map_or(0, |d| d.total())
    }

    /// Draws from the raw empirical frequencies at `(state, action)`.
    pub fn sample_empirical<R: Rng + ?Sized>(
        &self,
        state: &S,
        action: ActionId,
        rng: &mut R,
    ) -> Result<Observation<S>, ModelError> {
        self.distribution(state, action)
            .and_then(|d| d.sample(rng))
            .map(Transition::to_observation)
            .ok_or(ModelError::Unvisited)
    }

    pub fn is_known(&self, state: &S, action: ActionId, spec: ConfidenceSpec) -> Result<bool, ModelError> {
        Ok(is_known_count(self.visits(state, action), spec)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> AmdpSpec {
        AmdpSpec::new(0.9, 0.0, 1.0).unwrap()
    }

    fn obs(s: u32, r: f64) -> Observation<u32> {
        Observation {
            next_state: s,
            reward: r,
            terminal: false,
        }
    }

    #[test]
    fn value_bounds() {
        let spec = AmdpSpec::new(0.95, -1.0, 1.0).unwrap();
        assert!((spec.v_min() + 20.0).abs() < 1e-9);
        assert!((spec.v_max() - 20.0).abs() < 1e-9);
        assert!(AmdpSpec::new(1.0, 0.0, 1.0).is_err());
        assert!(AmdpSpec::new(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn recording_counts() {
        let mut m = EmpiricalModel::new(spec());
        m.record_observation(&0, ActionId(0), &obs(1, 0.5)).unwrap();
        let d = m.distribution(&0, ActionId(0)).unwrap();
        assert_eq!((d.total(), d.support_len()), (1, 1));

        m.record_observation(&0, ActionId(0), &obs(1, 0.5)).unwrap();
        let d = m.distribution(&0, ActionId(0)).unwrap();
        assert_eq!((d.total(), d.support_len()), (2, 1));

        m.record_observation(&0, ActionId(0), &obs(1, 0.25)).unwrap();
        assert_eq!(m.distribution(&0, ActionId(0)).unwrap().support_len(), 2);
        let freqs: f64 = m.distribution(&0, ActionId(0)).unwrap().frequencies().iter().sum();
        assert_eq!(freqs, 1.0);
    }

    #[test]
    fn out_of_bounds_reward_is_rejected() {
        let mut m = EmpiricalModel::new(spec());
        let err = m.record_observation(&0, ActionId(0), &obs(1, 2.0)).unwrap_err();
        assert!(matches!(err, ModelError::RewardOutOfBounds { .. }));
        assert_eq!(m.visits(&0, ActionId(0)), 0);
    }

    #[test]
    fn empirical_sampling() {
        let mut m = EmpiricalModel::new(spec());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(m.sample_empirical(&0, ActionId(0), &mut rng), Err(ModelError::Unvisited));

        m.record_observation(&0, ActionId(0), &obs(4, 1.0)).unwrap();
        for _ in 0..20 {
            assert_eq!(m.sample_empirical(&0, ActionId(0), &mut rng).unwrap(), obs(4, 1.0));
        }

        for _ in 0..2 {
            m.record_observation(&0, ActionId(0), &obs(4, 1.0)).unwrap();
        }
        m.record_observation(&0, ActionId(0), &obs(5, 0.0)).unwrap();
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| m.sample_empirical(&0, ActionId(0), &mut rng).unwrap().next_state == 4)
            .count();
        assert!((hits as f64 / draws as f64 - 0.75).abs() < 0.03);

        let seq = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| m.sample_empirical(&0, ActionId(0), &mut rng).unwrap().next_state)
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn known_threshold() {
        let conf = ConfidenceSpec::new(0.05, 0.3).unwrap();
        let t = required_samples(conf).unwrap();
        let needed = t.ceil() as u64;
        let mut m = EmpiricalModel::new(spec());
        assert!(!m.is_known(&0, ActionId(0), conf).unwrap());
        for _ in 0..needed - 1 {
            m.record_observation(&0, ActionId(0), &obs(1, 0.0)).unwrap();
        }
        assert!(!m.is_known(&0, ActionId(0), conf).unwrap());
        m.record_observation(&0, ActionId(0), &obs(1, 0.0)).unwrap();
        assert!(m.is_known(&0, ActionId(0), conf).unwrap());
    }

    #[test]
    fn two_outcome_generator_is_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = EmpiricalModel::new(spec());
        for _ in 0..10_000 {
            let s = if rng.gen_bool(0.7) { 1 } else { 2 };
            m.record_observation(&0, ActionId(0), &obs(s, 0.0)).unwrap();
        }
        let f = m.distribution(&0, ActionId(0)).unwrap().frequencies();
        assert!((f[0] - 0.7).abs() < 0.02 && (f[1] - 0.3).abs() < 0.02);
    }
}
