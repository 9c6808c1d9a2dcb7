use rand::Rng;

use super::{check_action, Environment};
use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

/// Deterministic chain `0 → 1 → … → len-1`. `advance` (action 0) moves one
/// state right and pays 1 on entering the terminal last state; `quit`
/// (action 1) ends the episode at once with reward `quit_reward`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub len: u32,
    pub quit_reward: f64,
}

impl Chain {
    pub fn new(len: u32, quit_reward: f64) -> Result<Self, ModelError> {
        if len < 2 {
            return Err(ModelError::InvalidSpec("chain needs at least two states"));
        }
        if !(0.0..=1.0).contains(&quit_reward) {
            return Err(ModelError::InvalidSpec("quit reward must lie in [0, 1]"));
        }
        Ok(Self { len, quit_reward })
    }

    /// Exact optimal value of state `s` by backward induction.
    pub fn value(&self, s: u32, gamma: f64) -> f64 {
        let mut v = 0.0;
        for i in (s..self.len - 1).rev() {
            let advance = if i + 2 == self.len { 1.0 } else { gamma * v };
            v = advance.max(self.quit_reward);
        }
        v
    }

    fn quit_state(&self) -> u32 {
        self.len
    }
}

impl GenerativeModel for Chain {
    type State = u32;

    fn actions(&self, s: &u32) -> Vec<ActionId> {
        if *s + 1 >= self.len {
            Vec::new()
        } else {
            vec![ActionId(0), ActionId(1)]
        }
    }

    fn sample<R: Rng + ?Sized>(&self, s: &u32, a: ActionId, _rng: &mut R) -> Result<Observation<u32>, ModelError> {
        check_action(a, 2)?;
        if *s + 1 >= self.len {
            return Err(ModelError::InvalidState(format!("chain state {s} is terminal")));
        }
        Ok(if a.0 == 0 {
            let last = s + 2 == self.len;
            Observation {
                next_state: s + 1,
                reward: if last { 1.0 } else { 0.0 },
                terminal: last,
            }
        } else {
            Observation {
                next_state: self.quit_state(),
                reward: self.quit_reward,
                terminal: true,
            }
        })
    }
}

impl Environment for Chain {
    fn start(&self) -> u32 {
        0
    }

    fn is_goal(&self, s: &u32) -> bool {
        *s + 1 == self.len
    }

    fn reward_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn start_goal_distance(&self) -> f64 {
        f64::from(self.len - 1)
    }
}
