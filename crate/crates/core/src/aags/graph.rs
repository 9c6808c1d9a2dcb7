use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use crate::amdp::{ActionId, AmdpSpec, Transition};
use crate::belief::{bin_outcomes, dist2belief, BeliefError, BeliefFunction, EmpiricalDistribution, DEFAULT_BIN_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Outcome of an edge: successor node and reward.
pub type Outcome = Transition<NodeId>;

#[derive(Debug, Clone)]
struct CachedBelief {
    belief: Arc<BeliefFunction>,
    /// Outcomes in each (possibly composite) atomic outcome of `belief`.
    bins: Vec<Vec<Outcome>>,
}

/// Samples and belief function for one action at a node.
#[derive(Debug, Clone)]
pub struct Edge {
    pub action: ActionId,
    pub outcomes: EmpiricalDistribution<Outcome>,
    cached: Option<CachedBelief>,
}

impl Edge {
    fn new(action: ActionId) -> Self {
        Self {
            action,
            outcomes: EmpiricalDistribution::new(),
            cached: None,
        }
    }

    pub fn visits(&self) -> u64 {
        self.outcomes.total()
    }
}

#[derive(Debug, Clone)]
pub struct Node<S> {
    pub state: S,
    pub terminal: bool,
    /// Actions have been queried from the model.
    pub expanded: bool,
    pub edges: Vec<Edge>,
    pub lower: f64,
    pub upper: f64,
    /// Nodes with an edge into this one, in first-seen order.
    pub parents: Vec<NodeId>,
}

impl<S> Node<S> {
    /// Value is fixed: terminal, or expanded with nothing to do.
    pub fn is_leaf(&self) -> bool {
        self.terminal || (self.expanded && self.edges.is_empty())
    }
}

/// Search graph over visited states. May be cyclic.
#[derive(Debug, Clone)]
pub struct Graph<S> {
    nodes: Vec<Node<S>>,
    index: HashMap<S, NodeId>,
    spec: AmdpSpec,
    /// Belief functions by `(counts, δ bits)`; edges with equal evidence
    /// share one solve.
    beliefs: HashMap<(Vec<u64>, u64), Arc<BeliefFunction>>,
}

/// Entries kept in the belief memo before it is cleared.
const BELIEF_MEMO_CAP: usize = 4096;

impl<S: Clone + Eq + Hash + Ord> Graph<S> {
    pub fn new(spec: AmdpSpec) -> Self {
        Self {
            nodes: Vec::new(),
            index: HashMap::new(),
            spec,
            beliefs: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &AmdpSpec {
        &self.spec
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.index.clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, state: &S) -> Option<NodeId> {
        self.index.get(state).copied()
    }

    pub fn node(&self, id: NodeId) -> &Node<S> {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node<S>)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn get_or_insert(&mut self, state: &S) -> NodeId {
        if let Some(id) = self.index.get(state) {
            return *id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            state: state.clone(),
            terminal: false,
            expanded: false,
            edges: Vec::new(),
            lower: self.spec.v_min(),
            upper: self.spec.v_max(),
            parents: Vec::new(),
        });
        self.index.insert(state.clone(), id);
        id
    }

    pub(crate) fn expand(&mut self, id: NodeId, actions: Vec<ActionId>) {
        let node = &mut self.nodes[id.0];
        node.expanded = true;
        node.edges = actions.into_iter().map(Edge::new).collect();
        if node.edges.is_empty() {
            node.lower = 0.0;
            node.upper = 0.0;
        }
    }

    pub(crate) fn mark_terminal(&mut self, id: NodeId) {
        let node = &mut self.nodes[id.0];
        node.terminal = true;
        node.lower = 0.0;
        node.upper = 0.0;
    }

    /// Records one observed transition on `(from, edge)` and links the
    /// successor back to its parent.
    pub(crate) fn record(&mut self, from: NodeId, edge: usize, outcome: Outcome) {
        let to = outcome.next_state;
        if outcome.terminal && !self.nodes[to.0].terminal {
            self.mark_terminal(to);
        }
        let e = &mut self.nodes[from.0].edges[edge];
        e.outcomes.record(outcome);
        e.cached = None;
        let parents = &mut self.nodes[to.0].parents;
        if !parents.contains(&from) {
            parents.push(from);
        }
    }

    fn refresh_belief(&mut self, id: NodeId, edge: usize, delta: f64) -> Result<(), BeliefError> {
        let e = &mut self.nodes[id.0].edges[edge];
        if e.cached.is_some() || e.outcomes.is_empty() {
            return Ok(());
        }
        let binned = bin_outcomes(&e.outcomes, DEFAULT_BIN_CAP);
        let key = (binned.counts, delta.to_bits());
        let belief = match self.beliefs.get(&key) {
            Some(b) => Arc::clone(b),
            None => {
                let b = Arc::new(dist2belief(&key.0, delta)?);
                if self.beliefs.len() >= BELIEF_MEMO_CAP {
                    self.beliefs.clear();
                }
                self.beliefs.insert(key, Arc::clone(&b));
                b
            }
        };
        e.cached = Some(CachedBelief {
            belief,
            bins: binned.bins,
        });
        Ok(())
    }

    /// Lower and upper expectation of taking edge `edge` at node `id`.
    ///
    /// Outcomes are valued `r + γ·L(s')` for the lower pass and `r + γ·U(s')`
    /// for the upper pass; composite (binned) outcomes take the min and max
    /// over their members. An unsampled edge is vacuous: `(v_min, v_max)`.
    pub fn edge_bounds(&mut self, id: NodeId, edge: usize, delta: f64) -> Result<(f64, f64), BeliefError> {
        self.refresh_belief(id, edge, delta)?;
        let Some(cached) = &self.nodes[id.0].edges[edge].cached else {
            return Ok((self.spec.v_min(), self.spec.v_max()));
        };
        let gamma = self.spec.gamma;
        let mut lows = Vec::with_capacity(cached.bins.len());
        let mut highs = Vec::with_capacity(cached.bins.len());
        for bin in &cached.bins {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for o in bin {
                let succ = &self.nodes[o.next_state.0];
                lo = lo.min(o.reward.0 + gamma * succ.lower);
                hi = hi.max(o.reward.0 + gamma * succ.upper);
            }
            lows.push(lo);
            highs.push(hi);
        }
        let bounds = self.spec.value_bounds();
        let lower = cached.belief.choquet_lower(&lows, bounds)?;
        let upper = cached.belief.choquet_upper(&highs, bounds)?;
        Ok((lower, upper))
    }

    /// `(lowerE, upperE)` for every action at `id`.
    pub fn action_bounds(&mut self, id: NodeId, delta: f64) -> Result<Vec<(f64, f64)>, BeliefError> {
        (0..self.nodes[id.0].edges.len())
            .map(|e| self.edge_bounds(id, e, delta))
            .collect()
    }

    /// Recomputes the node's bounds from its edges, keeping them monotone:
    /// the lower bound never decreases, the upper bound never increases, and
    /// `L <= U` always holds. Returns `(lower rise, upper fall)`.
    pub(crate) fn update_bounds(&mut self, id: NodeId, delta: f64) -> Result<(f64, f64), BeliefError> {
        if self.nodes[id.0].is_leaf() || !self.nodes[id.0].expanded {
            return Ok((0.0, 0.0));
        }
        let bounds = self.action_bounds(id, delta)?;
        let new_lower = bounds.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
        let new_upper = bounds.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        let node = &mut self.nodes[id.0];
        let (old_lower, old_upper) = (node.lower, node.upper);
        let upper = old_upper.min(new_upper).max(old_lower);
        let lower = old_lower.max(new_lower).min(upper);
        node.lower = lower;
        node.upper = upper;
        Ok((lower - old_lower, old_upper - upper))
    }
}
