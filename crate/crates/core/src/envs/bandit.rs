use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_action, Environment};
use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

/// One-shot decision: pull an arm, collect a reward, done. Each arm is a
/// list of `(reward, weight)` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bandit {
    pub arms: Vec<Vec<(f64, f64)>>,
}

impl Bandit {
    pub fn new(arms: Vec<Vec<(f64, f64)>>) -> Result<Self, ModelError> {
        if arms.is_empty() || arms.iter().any(|a| a.is_empty()) {
            return Err(ModelError::InvalidSpec("every bandit arm needs an outcome"));
        }
        if arms.iter().flatten().any(|&(r, w)| !r.is_finite() || !(w > 0.0)) {
            return Err(ModelError::InvalidSpec("bandit outcomes need finite rewards and positive weights"));
        }
        Ok(Self { arms })
    }

    /// Arms paying fixed rewards.
    pub fn deterministic(rewards: &[f64]) -> Result<Self, ModelError> {
        Self::new(rewards.iter().map(|&r| vec![(r, 1.0)]).collect())
    }
}

impl GenerativeModel for Bandit {
    /// 0 before the pull; `1 + 64·arm + outcome` after.
    type State = u32;

    fn actions(&self, s: &u32) -> Vec<ActionId> {
        if *s == 0 {
            (0..self.arms.len()).map(ActionId).collect()
        } else {
            Vec::new()
        }
    }

    fn sample<R: Rng + ?Sized>(&self, s: &u32, a: ActionId, rng: &mut R) -> Result<Observation<u32>, ModelError> {
        check_action(a, self.arms.len())?;
        if *s != 0 {
            return Err(ModelError::InvalidState(format!("bandit state {s} is terminal")));
        }
        let arm = &self.arms[a.0];
        let total: f64 = arm.iter().map(|o| o.1).sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = arm.len() - 1;
        for (i, &(_, w)) in arm.iter().enumerate() {
            if x < w {
                pick = i;
                break;
            }
            x -= w;
        }
        Ok(Observation {
            next_state: 1 + 64 * a.0 as u32 + pick as u32,
            reward: arm[pick].0,
            terminal: true,
        })
    }
}

impl Environment for Bandit {
    fn start(&self) -> u32 {
        0
    }

    fn is_goal(&self, s: &u32) -> bool {
        *s != 0
    }

    fn reward_range(&self) -> (f64, f64) {
        let rewards = self.arms.iter().flatten().map(|o| o.0);
        let lo = rewards.clone().fold(0.0, f64::min);
        let hi = rewards.fold(0.0, f64::max);
        (lo, hi)
    }

    fn start_goal_distance(&self) -> f64 {
        1.0
    }
}
