//! Benchmark worlds. Every environment is a [`GenerativeModel`] that can be
//! sampled at any state, plus a start state and a goal test for episodes.

mod bandit;
mod chain;
mod grid;
mod sailing;
mod tunnel;

pub use bandit::Bandit;
pub use chain::Chain;
pub use grid::{GridConfig, GridWorld};
pub use sailing::{SailState, SailingConfig, SailingWorld};
pub use tunnel::{TunnelConfig, TunnelWorld};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amdp::{ActionId, GenerativeModel, ModelError, Observation};

/// Default episode cap.
pub const MAX_STEPS: usize = 100;

/// Integer grid position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Pos) -> f64 {
        (((self.x - other.x).pow(2) + (self.y - other.y).pow(2)) as f64).sqrt()
    }
}

/// Cardinal moves shared by the grid and tunnel worlds: north, east, south, west.
pub(crate) const CARDINAL: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

pub(crate) fn cardinal_actions() -> Vec<ActionId> {
    (0..CARDINAL.len()).map(ActionId).collect()
}

pub(crate) fn check_action(a: ActionId, n: usize) -> Result<(), ModelError> {
    if a.0 >= n {
        return Err(ModelError::InvalidAction(a.0));
    }
    Ok(())
}

/// Goals are absorbing in the model: every action stays put and pays the
/// best reward, so a goal is worth exactly `v_max`. A terminal goal would be
/// worth its entry reward alone, less than the upper bound of any loop that
/// keeps discounted boundary mass, and optimistic planners would never enter
/// it. Episodes still end on arrival (see [`Episode`]).
pub(crate) fn absorbed<S>(state: S, reward: f64) -> Observation<S> {
    Observation {
        next_state: state,
        reward,
        terminal: false,
    }
}

/// An episodic task on top of a generative model.
pub trait Environment: GenerativeModel {
    fn start(&self) -> Self::State;

    /// Start state of a fresh episode; worlds with random initial
    /// conditions draw them from `rng`.
    fn reset_state<R: rand::Rng + ?Sized>(&self, _rng: &mut R) -> Self::State {
        self.start()
    }

    /// Reaching a goal ends the episode.
    fn is_goal(&self, state: &Self::State) -> bool;

    /// Reward range `(r_min, r_max)` of every transition.
    fn reward_range(&self) -> (f64, f64);

    /// Euclidean start-goal distance, used to bucket results.
    fn start_goal_distance(&self) -> f64;
}

/// The world as the agent experiences it: one state, advanced by executing
/// actions with the episode's own random stream.
pub struct Episode<'a, E: Environment> {
    env: &'a E,
    state: E::State,
    rng: ChaCha8Rng,
    steps: usize,
    done: bool,
}

impl<'a, E: Environment> Episode<'a, E> {
    pub fn new(env: &'a E, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            state: env.reset_state(&mut rng),
            env,
            rng,
            steps: 0,
            done: false,
        }
    }

    /// Back to the start state with a fresh stream.
    pub fn reset(&mut self, seed: u64) -> &E::State {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = self.env.reset_state(&mut self.rng);
        self.steps = 0;
        self.done = false;
        &self.state
    }

    pub fn state(&self) -> &E::State {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn step(&mut self, action: ActionId) -> Result<Observation<E::State>, ModelError> {
        let obs = self.env.sample(&self.state, action, &mut self.rng)?;
        self.state = obs.next_state.clone();
        self.steps += 1;
        self.done = obs.terminal || self.env.is_goal(&self.state) || self.env.actions(&self.state).is_empty();
        Ok(obs)
    }
}
