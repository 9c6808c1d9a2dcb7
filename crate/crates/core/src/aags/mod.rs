//! Ambiguity attitude graph search.
//!
//! Trajectories are grown optimistically (highest upper expectation first)
//! through a graph of visited states. Each state-action pair keeps its
//! sampled outcomes; once a pair meets the `(ε, δ)` sample requirement its
//! own empirical model replaces the simulator. Value bounds are pushed back
//! through parent links after every trajectory, and the recommended action
//! maximizes the α-Hurwicz blend `(1 - α)·lowerE + α·upperE` at the root.

mod graph;

pub use graph::{Edge, Graph, Node, NodeId, Outcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amdp::{is_known_count, ActionId, AmdpSpec, GenerativeModel, Transition};
use crate::belief::ConfidenceSpec;
use crate::planner::{argmax_random_tie, PlanError, Planner};

/// Default minimal backpropagation threshold, as a fraction of `v_max - v_min`.
pub const BETA_FLOOR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AagsConfig {
    /// Ambiguity attitude: 0 is robust, 1 is optimistic.
    pub alpha: f64,
    pub confidence: ConfidenceSpec,
    /// Trajectories per search.
    pub n_trajectories: usize,
    /// Maximum trajectory length.
    pub horizon: usize,
    /// Keep the graph between searches (static environments).
    pub reuse_graph: bool,
    /// Minimal backpropagation threshold; defaults to
    /// `BETA_FLOOR_FRACTION·(v_max - v_min)`.
    pub beta_floor: Option<f64>,
    /// Select in-trajectory actions by the root's upper expectations instead
    /// of the current state's.
    pub root_action_selection: bool,
    pub seed: u64,
}

impl AagsConfig {
    pub fn new(alpha: f64, confidence: ConfidenceSpec, n_trajectories: usize, horizon: usize) -> Self {
        Self {
            alpha,
            confidence,
            n_trajectories,
            horizon,
            reuse_graph: true,
            beta_floor: None,
            root_action_selection: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PlanError::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.n_trajectories == 0 {
            return Err(PlanError::Budget {
                needed: 1,
                got: 0,
            });
        }
        if self.horizon == 0 {
            return Err(PlanError::InvalidConfig("horizon must be at least 1".into()));
        }
        if let Some(beta) = self.beta_floor {
            if !(beta > 0.0) {
                return Err(PlanError::InvalidConfig("beta_floor must be positive".into()));
            }
        }
        ConfidenceSpec::new(self.confidence.epsilon, self.confidence.delta)?;
        Ok(())
    }
}

/// Counters for one planner instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub trajectories: u64,
    pub generator_calls: u64,
    pub model_calls: u64,
    /// States popped from the backpropagation worklist.
    pub backups: u64,
}

/// α-Hurwicz value of a `(lower, upper)` pair.
pub fn hurwicz(lower: f64, upper: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * lower + alpha * upper
}

/// Index maximizing [`hurwicz`] over `bounds`; ties broken from `rng`.
pub fn hurwicz_choice<R: rand::Rng + ?Sized>(bounds: &[(f64, f64)], alpha: f64, rng: &mut R) -> Option<usize> {
    let scores: Vec<f64> = bounds.iter().map(|&(l, u)| hurwicz(l, u, alpha)).collect();
    argmax_random_tie(&scores, rng)
}

pub struct AagsPlanner<S> {
    config: AagsConfig,
    graph: Graph<S>,
    rng: ChaCha8Rng,
    stats: SearchStats,
}

impl<S> AagsPlanner<S>
where
    S: Clone + Eq + std::hash::Hash + Ord,
{
    pub fn new(config: AagsConfig, spec: AmdpSpec) -> Result<Self, PlanError> {
        config.validate()?;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            graph: Graph::new(spec),
            stats: SearchStats::default(),
        })
    }

    pub fn config(&self) -> &AagsConfig {
        &self.config
    }

    pub fn graph(&self) -> &Graph<S> {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut Graph<S> {
        &mut self.graph
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    fn delta(&self) -> f64 {
        self.config.confidence.delta
    }

    fn beta_floor(&self) -> f64 {
        let spec = self.graph.spec();
        self.config
            .beta_floor
            .unwrap_or(BETA_FLOOR_FRACTION * (spec.v_max() - spec.v_min()))
    }

    /// Runs `n_trajectories` trajectories from `root` and returns the
    /// α-Hurwicz recommendation.
    pub fn search<M>(&mut self, root: &S, model: &M) -> Result<ActionId, PlanError>
    where
        M: GenerativeModel<State = S>,
    {
        if !self.config.reuse_graph {
            self.graph.clear();
        }
        let root_id = self.graph.get_or_insert(root);
        if !self.graph.node(root_id).expanded {
            self.graph.expand(root_id, model.actions(root));
        }
        if self.graph.node(root_id).edges.is_empty() {
            return Err(PlanError::NoActions);
        }
        for _ in 0..self.config.n_trajectories {
            let trace = self.trajectory(root_id, model)?;
            let regret = self.root_regret(root_id)?;
            self.backpropagate(&trace, regret)?;
            self.stats.trajectories += 1;
        }
        self.recommend(root, self.config.alpha)
    }

    fn trajectory<M>(&mut self, root: NodeId, model: &M) -> Result<Vec<NodeId>, PlanError>
    where
        M: GenerativeModel<State = S>,
    {
        let delta = self.delta();
        let mut trace = vec![root];
        let mut current = root;
        for _ in 0..self.config.horizon {
            if self.graph.node(current).terminal {
                break;
            }
            if !self.graph.node(current).expanded {
                let actions = model.actions(&self.graph.node(current).state);
                self.graph.expand(current, actions);
            }
            if self.graph.node(current).edges.is_empty() {
                break;
            }

            let edge = self.select_edge(root, current, delta)?;
            let visits = self.graph.node(current).edges[edge].visits();
            let outcome = if is_known_count(visits, self.config.confidence)? {
                self.stats.model_calls += 1;
                self.graph.node(current).edges[edge]
                    .outcomes
                    .sample(&mut self.rng)
                    .cloned()
                    .expect("known edge has samples")
            } else {
                self.stats.generator_calls += 1;
                let node = self.graph.node(current);
                let obs = model.sample(&node.state, node.edges[edge].action, &mut self.rng)?;
                self.graph.spec().check_reward(obs.reward)?;
                let next = self.graph.get_or_insert(&obs.next_state);
                Transition {
                    next_state: next,
                    reward: crate::amdp::Reward(obs.reward),
                    terminal: obs.terminal,
                }
            };
            let next = outcome.next_state;
            self.graph.record(current, edge, outcome);
            if !trace.contains(&next) {
                trace.push(next);
            }
            current = next;
        }
        Ok(trace)
    }

    fn select_edge(&mut self, root: NodeId, current: NodeId, delta: f64) -> Result<usize, PlanError> {
        if self.config.root_action_selection {
            let bounds = self.graph.action_bounds(root, delta)?;
            let uppers: Vec<f64> = bounds.iter().map(|b| b.1).collect();
            let pick = argmax_random_tie(&uppers, &mut self.rng).ok_or(PlanError::NoActions)?;
            let action = self.graph.node(root).edges[pick].action;
            if let Some(e) = self.graph.node(current).edges.iter().position(|e| e.action == action) {
                return Ok(e);
            }
        }
        let bounds = self.graph.action_bounds(current, delta)?;
        let uppers: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        argmax_random_tie(&uppers, &mut self.rng).ok_or(PlanError::NoActions)
    }

    /// Gap between the best and second-best α-values at the root; the full
    /// value range until two actions have been sampled.
    fn root_regret(&mut self, root: NodeId) -> Result<f64, PlanError> {
        let spec = *self.graph.spec();
        let alpha = self.config.alpha;
        let sampled = self.graph.node(root).edges.iter().filter(|e| e.visits() > 0).count();
        if sampled < 2 {
            return Ok(spec.v_max() - spec.v_min());
        }
        let mut scores: Vec<f64> = self
            .graph
            .action_bounds(root, self.delta())?
            .into_iter()
            .map(|(l, u)| hurwicz(l, u, alpha))
            .collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        Ok(scores[0] - scores[1])
    }

    /// Pushes bounds back from the states in `trace`. A state's parents are
    /// revisited when its lower bound rose or its upper bound fell by more
    /// than `β = (1 - γ)/γ · regret` (floored at `beta_floor`).
    pub fn backpropagate(&mut self, trace: &[NodeId], regret: f64) -> Result<usize, PlanError> {
        let gamma = self.graph.spec().gamma;
        let beta = ((1.0 - gamma) / gamma * regret).max(self.beta_floor());
        let delta = self.delta();
        let mut queued = vec![false; self.graph.len()];
        let mut stack: Vec<NodeId> = Vec::with_capacity(trace.len());
        for &id in trace {
            if !queued[id.0] {
                queued[id.0] = true;
                stack.push(id);
            }
        }
        let mut enqueued = 0;
        while let Some(id) = stack.pop() {
            queued[id.0] = false;
            self.stats.backups += 1;
            let (rise, fall) = self.graph.update_bounds(id, delta)?;
            if rise > beta || fall > beta {
                for &p in &self.graph.node(id).parents {
                    if !queued[p.0] {
                        queued[p.0] = true;
                        stack.push(p);
                        enqueued += 1;
                    }
                }
            }
        }
        Ok(enqueued)
    }

    /// `argmax_a (1 - α)·lowerE(s, a) + α·upperE(s, a)`, ties broken at random.
    pub fn recommend(&mut self, state: &S, alpha: f64) -> Result<ActionId, PlanError> {
        let id = self.graph.id(state).ok_or(PlanError::MissingState)?;
        let bounds = self.graph.action_bounds(id, self.delta())?;
        let pick = hurwicz_choice(&bounds, alpha, &mut self.rng).ok_or(PlanError::NoActions)?;
        Ok(self.graph.node(id).edges[pick].action)
    }

    /// `(lowerE, upperE)` per action at `state`.
    pub fn action_bounds(&mut self, state: &S) -> Result<Vec<(ActionId, f64, f64)>, PlanError> {
        let id = self.graph.id(state).ok_or(PlanError::MissingState)?;
        let bounds = self.graph.action_bounds(id, self.delta())?;
        Ok(self
            .graph
            .node(id)
            .edges
            .iter()
            .zip(bounds)
            .map(|(e, (l, u))| (e.action, l, u))
            .collect())
    }
}

impl<M> Planner<M> for AagsPlanner<M::State>
where
    M: GenerativeModel,
{
    fn plan(&mut self, model: &M, state: &M::State) -> Result<ActionId, PlanError> {
        self.search(state, model)
    }

    fn reset(&mut self) {
        self.graph.clear();
    }
}

#[cfg(test)]
mod tests;
