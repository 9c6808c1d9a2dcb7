//! UCT baseline: UCB1 tree search with uniform random rollouts.
//!
//! The tree is rebuilt on every call; nodes are keyed by the sampled
//! successor state under each action.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amdp::{ActionId, GenerativeModel};
use crate::planner::{argmax_random_tie, PlanError, Planner};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UctConfig {
    /// Exploration constant.
    pub c: f64,
    pub rollout_horizon: usize,
    /// Iterations per search.
    pub n_samples: usize,
    pub gamma: f64,
    pub seed: u64,
}

impl UctConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.c >= 0.0) {
            return Err(PlanError::InvalidConfig(format!("exploration constant {} is negative", self.c)));
        }
        if self.rollout_horizon == 0 {
            return Err(PlanError::InvalidConfig("rollout_horizon must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(PlanError::InvalidConfig(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
struct Arm<S> {
    visits: u64,
    total: f64,
    children: HashMap<S, usize>,
}

impl<S> Arm<S> {
    fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total / self.visits as f64
        }
    }
}

#[derive(Debug, Clone)]
struct UctNode<S> {
    state: S,
    terminal: bool,
    visits: u64,
    actions: Vec<ActionId>,
    arms: Vec<Arm<S>>,
}

pub struct UctPlanner<S> {
    config: UctConfig,
    nodes: Vec<UctNode<S>>,
    rng: ChaCha8Rng,
}

impl<S: Clone + Eq + std::hash::Hash> UctPlanner<S> {
    pub fn new(config: UctConfig) -> Result<Self, PlanError> {
        config.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            nodes: Vec::new(),
        })
    }

    pub fn config(&self) -> &UctConfig {
        &self.config
    }

    fn push_node<M: GenerativeModel<State = S>>(&mut self, model: &M, state: S, terminal: bool) -> usize {
        let actions = if terminal { Vec::new() } else { model.actions(&state) };
        let arms = actions
            .iter()
            .map(|_| Arm {
                visits: 0,
                total: 0.0,
                children: HashMap::new(),
            })
            .collect();
        self.nodes.push(UctNode {
            state,
            terminal,
            visits: 0,
            actions,
            arms,
        });
        self.nodes.len() - 1
    }

    /// Runs `n_samples` iterations from `root` and returns the action with
    /// the highest mean return.
    pub fn search<M>(&mut self, root: &S, model: &M) -> Result<ActionId, PlanError>
    where
        M: GenerativeModel<State = S>,
    {
        self.nodes.clear();
        let root_id = self.push_node(model, root.clone(), false);
        let n_actions = self.nodes[root_id].actions.len();
        if n_actions == 0 {
            return Err(PlanError::NoActions);
        }
        if self.config.n_samples < n_actions {
            return Err(PlanError::Budget {
                needed: n_actions,
                got: self.config.n_samples,
            });
        }
        for _ in 0..self.config.n_samples {
            self.iterate(root_id, model)?;
        }
        let means: Vec<f64> = self.nodes[root_id].arms.iter().map(Arm::mean).collect();
        let pick = argmax_random_tie(&means, &mut self.rng).ok_or(PlanError::NoActions)?;
        Ok(self.nodes[root_id].actions[pick])
    }

    /// Per-action `(visits, mean return)` at the root of the last search.
    pub fn root_statistics(&self) -> Vec<(ActionId, u64, f64)> {
        self.nodes
            .first()
            .map(|n| n.actions.iter().zip(&n.arms).map(|(&a, arm)| (a, arm.visits, arm.mean())).collect())
            .unwrap_or_default()
    }

    fn select(&mut self, id: usize) -> usize {
        let node = &self.nodes[id];
        let untried: Vec<usize> = (0..node.arms.len()).filter(|&i| node.arms[i].visits == 0).collect();
        if !untried.is_empty() {
            return untried[self.rng.gen_range(0..untried.len())];
        }
        let log_n = (node.visits as f64).ln();
        let c = self.config.c;
        let scores: Vec<f64> = node
            .arms
            .iter()
            .map(|arm| arm.mean() + c * (log_n / arm.visits as f64).sqrt())
            .collect();
        argmax_random_tie(&scores, &mut self.rng).expect("node has actions")
    }

    fn iterate<M>(&mut self, root: usize, model: &M) -> Result<(), PlanError>
    where
        M: GenerativeModel<State = S>,
    {
        let gamma = self.config.gamma;
        let horizon = self.config.rollout_horizon;
        let mut path: Vec<(usize, usize, f64)> = Vec::new();
        let mut id = root;
        let mut tail = 0.0;
        while path.len() < horizon {
            let node = &self.nodes[id];
            if node.terminal || node.actions.is_empty() {
                break;
            }
            let arm = self.select(id);
            let expanding = self.nodes[id].arms[arm].visits == 0;
            let action = self.nodes[id].actions[arm];
            let obs = model.sample(&self.nodes[id].state, action, &mut self.rng)?;
            path.push((id, arm, obs.reward));
            let child = match self.nodes[id].arms[arm].children.get(&obs.next_state) {
                Some(&c) => c,
                None => {
                    let c = self.push_node(model, obs.next_state.clone(), obs.terminal);
                    self.nodes[id].arms[arm].children.insert(obs.next_state, c);
                    c
                }
            };
            id = child;
            if expanding {
                if !obs.terminal {
                    tail = self.rollout(model, &self.nodes[id].state.clone(), horizon - path.len())?;
                }
                break;
            }
        }
        let mut ret = tail;
        for &(node, arm, reward) in path.iter().rev() {
            ret = reward + gamma * ret;
            let n = &mut self.nodes[node];
            n.visits += 1;
            n.arms[arm].visits += 1;
            n.arms[arm].total += ret;
        }
        Ok(())
    }

    /// Discounted return of a uniform random policy over `steps` steps.
    fn rollout<M>(&mut self, model: &M, start: &S, steps: usize) -> Result<f64, PlanError>
    where
        M: GenerativeModel<State = S>,
    {
        let gamma = self.config.gamma;
        let mut state = start.clone();
        let (mut ret, mut discount) = (0.0, 1.0);
        for _ in 0..steps {
            let actions = model.actions(&state);
            if actions.is_empty() {
                break;
            }
            let a = actions[self.rng.gen_range(0..actions.len())];
            let obs = model.sample(&state, a, &mut self.rng)?;
            ret += discount * obs.reward;
            discount *= gamma;
            if obs.terminal {
                break;
            }
            state = obs.next_state;
        }
        Ok(ret)
    }
}

impl<M> Planner<M> for UctPlanner<M::State>
where
    M: GenerativeModel,
{
    fn plan(&mut self, model: &M, state: &M::State) -> Result<ActionId, PlanError> {
        self.search(state, model)
    }

    fn reset(&mut self) {
        self.nodes.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amdp::{ModelError, Observation};

    struct Bandit(Vec<f64>);

    impl GenerativeModel for Bandit {
        type State = u8;

        fn actions(&self, s: &u8) -> Vec<ActionId> {
            if *s == 0 {
                (0..self.0.len()).map(ActionId).collect()
            } else {
                Vec::new()
            }
        }

        fn sample<R: Rng + ?Sized>(&self, _s: &u8, a: ActionId, _rng: &mut R) -> Result<Observation<u8>, ModelError> {
            Ok(Observation {
                next_state: 1,
                reward: self.0[a.0],
                terminal: true,
            })
        }
    }

    fn config(n: usize) -> UctConfig {
        UctConfig {
            c: 0.5,
            rollout_horizon: 25,
            n_samples: n,
            gamma: 0.95,
            seed: 7,
        }
    }

    #[test]
    fn single_action() {
        let mut p = UctPlanner::new(config(5)).unwrap();
        assert_eq!(p.search(&0, &Bandit(vec![0.3])).unwrap(), ActionId(0));
    }

    #[test]
    fn deterministic_bandit() {
        let mut p = UctPlanner::new(config(100)).unwrap();
        assert_eq!(p.search(&0, &Bandit(vec![0.0, 1.0])).unwrap(), ActionId(1));
    }

    #[test]
    fn every_root_action_is_tried_before_any_repeat() {
        let arms = vec![0.1, 0.9, 0.5, 0.2];
        let mut p = UctPlanner::new(config(4)).unwrap();
        p.search(&0, &Bandit(arms)).unwrap();
        assert!(p.root_statistics().iter().all(|&(_, n, _)| n == 1));
    }

    #[test]
    fn small_budgets_and_bad_configs_are_rejected() {
        let mut p = UctPlanner::new(config(1)).unwrap();
        assert!(matches!(p.search(&0, &Bandit(vec![0.0, 1.0])), Err(PlanError::Budget { needed: 2, got: 1 })));
        assert_eq!(p.search(&1, &Bandit(vec![0.0])), Err(PlanError::NoActions));
        assert!(UctPlanner::<u8>::new(UctConfig { c: -1.0, ..config(5) }).is_err());
        assert!(UctPlanner::<u8>::new(UctConfig { rollout_horizon: 0, ..config(5) }).is_err());
    }

    #[test]
    fn same_seed_same_statistics() {
        let run = || {
            let mut p = UctPlanner::new(config(60)).unwrap();
            p.search(&0, &Bandit(vec![0.2, 0.4, 0.3])).unwrap();
            p.root_statistics()
        };
        assert_eq!(run(), run());
    }
}
