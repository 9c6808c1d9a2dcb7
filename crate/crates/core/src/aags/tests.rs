use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::amdp::{ModelError, Observation, Reward};
use crate::belief::required_samples;

/// One decision, terminal afterwards. Each arm is a list of (reward, weight).
struct Arms(Vec<Vec<(f64, f64)>>);

impl GenerativeModel for Arms {
    type State = u32;

    fn actions(&self, s: &u32) -> Vec<ActionId> {
        if *s == 0 {
            (0..self.0.len()).map(ActionId).collect()
        } else {
            Vec::new()
        }
    }

    fn sample<R: Rng + ?Sized>(&self, s: &u32, a: ActionId, rng: &mut R) -> Result<Observation<u32>, ModelError> {
        if *s != 0 {
            return Err(ModelError::InvalidState(format!("{s}")));
        }
        let arm = self.0.get(a.0).ok_or(ModelError::InvalidAction(a.0))?;
        let total: f64 = arm.iter().map(|o| o.1).sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = arm.len() - 1;
        for (i, o) in arm.iter().enumerate() {
            if x < o.1 {
                pick = i;
                break;
            }
            x -= o.1;
        }
        Ok(Observation {
            next_state: 1 + pick as u32 + 100 * a.0 as u32,
            reward: arm[pick].0,
            terminal: true,
        })
    }
}

/// States 0..len-1. `advance` moves right (reward 1 on entering the last,
/// terminal, state); `quit` ends the episode with reward 0.2.
struct Chain {
    len: u32,
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
        Ok(match a.0 {
            0 => Observation {
                next_state: s + 1,
                reward: if s + 2 == self.len { 1.0 } else { 0.0 },
                terminal: s + 2 == self.len,
            },
            1 => Observation {
                next_state: self.len,
                reward: 0.2,
                terminal: true,
            },
            other => return Err(ModelError::InvalidAction(other)),
        })
    }
}

fn chain_value(len: u32, gamma: f64) -> f64 {
    let mut v = 0.0;
    for s in (0..len - 1).rev() {
        let advance = if s + 2 == len { 1.0 } else { gamma * v };
        v = f64::max(advance, 0.2);
    }
    v
}

fn unit_spec(gamma: f64) -> AmdpSpec {
    AmdpSpec::new(gamma, 0.0, 1.0).unwrap()
}

fn config(alpha: f64, epsilon: f64, delta: f64, n: usize, horizon: usize) -> AagsConfig {
    AagsConfig::new(alpha, ConfidenceSpec::new(epsilon, delta).unwrap(), n, horizon)
}

#[test]
fn deterministic_bandit_finds_the_paying_arm() {
    let model = Arms(vec![vec![(0.0, 1.0)], vec![(1.0, 1.0)]]);
    for alpha in [0.0, 0.5, 1.0] {
        let mut p = AagsPlanner::new(config(alpha, 0.1, 0.1, 10, 5), unit_spec(0.95)).unwrap();
        assert_eq!(p.search(&0, &model).unwrap(), ActionId(1), "alpha={alpha}");
    }
}

#[test]
fn attitude_splits_a_sure_arm_from_a_coin_flip() {
    // A pays 0.5 always, B pays 0 or 1. Two samples each.
    let mut p: AagsPlanner<u32> = AagsPlanner::new(config(0.0, 0.1, 0.1, 1, 1), unit_spec(0.95)).unwrap();
    let g = p.graph_mut();
    let root = g.get_or_insert(&0);
    g.expand(root, vec![ActionId(0), ActionId(1)]);
    let outcome = |g: &mut Graph<u32>, s: u32, r: f64| Transition {
        next_state: g.get_or_insert(&s),
        reward: Reward(r),
        terminal: true,
    };
    for _ in 0..2 {
        let o = outcome(g, 1, 0.5);
        g.record(root, 0, o);
    }
    let o = outcome(g, 2, 0.0);
    g.record(root, 1, o);
    let o = outcome(g, 3, 1.0);
    g.record(root, 1, o);

    let bounds = p.action_bounds(&0).unwrap();
    let (a, b) = (bounds[0], bounds[1]);
    // eps(0.1, 2) ~ 0.071: A = 0.9 * 0.5, B = 0.9 * (0.5 - eps).
    assert!((a.1 - 0.45).abs() < 1e-9, "{a:?}");
    assert!(b.1 < a.1 && b.2 > a.2, "{a:?} {b:?}");
    assert_eq!(p.recommend(&0, 0.0).unwrap(), ActionId(0));
    assert_eq!(p.recommend(&0, 1.0).unwrap(), ActionId(1));
}

#[test]
fn crossover_is_where_the_blends_meet() {
    let bounds = [(0.4, 0.6), (0.2, 0.9)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut switch = None;
    let mut last = hurwicz_choice(&bounds, 0.0, &mut rng).unwrap();
    assert_eq!(last, 0);
    for i in 1..=1000 {
        let alpha = i as f64 / 1000.0;
        let pick = hurwicz_choice(&bounds, alpha, &mut rng).unwrap();
        if pick != last {
            assert!(switch.is_none(), "second switch at {alpha}");
            switch = Some(alpha);
            last = pick;
        }
    }
    assert_eq!(last, 1);
    assert!((switch.unwrap() - 0.4).abs() <= 0.01, "{switch:?}");
}

#[test]
fn extreme_attitudes_follow_one_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let bounds: Vec<(f64, f64)> = (0..4)
            .map(|_| {
                let l: f64 = rng.gen();
                (l, l + rng.gen::<f64>())
            })
            .collect();
        let lows: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let highs: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        assert_eq!(hurwicz_choice(&bounds, 0.0, &mut rng), argmax_random_tie(&lows, &mut rng));
        assert_eq!(hurwicz_choice(&bounds, 1.0, &mut rng), argmax_random_tie(&highs, &mut rng));
    }
}

#[test]
fn chain_bounds_converge_without_discounting() {
    let gamma = 0.9;
    let spec = unit_spec(gamma);
    let mut p = AagsPlanner::new(config(0.0, 0.1, 0.0, 200, 10), spec).unwrap();
    p.search(&0, &Chain { len: 5 }).unwrap();
    let truth = chain_value(5, gamma);
    let root = p.graph().node(p.graph().id(&0).unwrap());
    assert!((root.lower - truth).abs() < 0.05, "L={} truth={truth}", root.lower);
    assert!((root.upper - truth).abs() < 0.05, "U={} truth={truth}", root.upper);
}

#[test]
fn discounting_keeps_a_boundary_residual() {
    let spec = unit_spec(0.9);
    let mut p = AagsPlanner::new(config(0.0, 0.1, 0.1, 200, 10), spec).unwrap();
    p.search(&0, &Chain { len: 5 }).unwrap();
    let truth = chain_value(5, 0.9);
    let root = p.graph().node(p.graph().id(&0).unwrap());
    assert!(root.lower <= truth + 1e-9 && root.upper >= truth - 1e-9);
    assert!(root.upper - root.lower > 0.1 * (spec.v_max() - spec.v_min()) * 0.5);
}

#[test]
fn bounds_only_tighten() {
    let model = Arms(vec![vec![(0.0, 1.0), (1.0, 1.0)], vec![(0.3, 2.0), (0.6, 1.0)], vec![(0.5, 1.0)]]);
    let spec = unit_spec(0.9);
    let mut p = AagsPlanner::new(config(0.5, 0.1, 0.2, 1, 3), spec).unwrap();
    let mut seen: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for _ in 0..300 {
        p.search(&0, &model).unwrap();
        for (_, node) in p.graph().nodes() {
            assert!(spec.v_min() <= node.lower && node.lower <= node.upper && node.upper <= spec.v_max());
            if let Some(&(l, u)) = seen.get(&node.state) {
                assert!(node.lower >= l && node.upper <= u, "{} ({l}, {u}) -> ({}, {})", node.state, node.lower, node.upper);
            }
            seen.insert(node.state, (node.lower, node.upper));
        }
    }
}

#[test]
fn converged_graph_enqueues_nothing() {
    let mut p = AagsPlanner::new(config(0.0, 0.1, 0.0, 100, 10), unit_spec(0.9)).unwrap();
    p.search(&0, &Chain { len: 5 }).unwrap();
    let all: Vec<NodeId> = p.graph().nodes().map(|(id, _)| id).collect();
    assert_eq!(p.backpropagate(&all, 0.0).unwrap(), 0);
}

/// Counts generator calls per (state, action).
struct Counting<M> {
    inner: M,
    calls: RefCell<BTreeMap<(u32, usize), u64>>,
}

impl<M: GenerativeModel<State = u32>> GenerativeModel for Counting<M> {
    type State = u32;

    fn actions(&self, s: &u32) -> Vec<ActionId> {
        self.inner.actions(s)
    }

    fn sample<R: Rng + ?Sized>(&self, s: &u32, a: ActionId, rng: &mut R) -> Result<Observation<u32>, ModelError> {
        *self.calls.borrow_mut().entry((*s, a.0)).or_default() += 1;
        self.inner.sample(s, a, rng)
    }
}

#[test]
fn known_pairs_stop_calling_the_generator() {
    let confidence = ConfidenceSpec::new(0.05, 0.3).unwrap();
    let need = required_samples(confidence).unwrap().ceil() as u64;
    let model = Counting {
        inner: Arms(vec![vec![(0.0, 1.0), (1.0, 1.0)], vec![(0.2, 1.0), (0.4, 1.0), (0.7, 1.0)]]),
        calls: RefCell::new(BTreeMap::new()),
    };
    let mut cfg = config(1.0, 0.05, 0.3, 400, 2);
    cfg.confidence = confidence;
    let mut p = AagsPlanner::new(cfg, unit_spec(0.9)).unwrap();
    p.search(&0, &model).unwrap();
    let calls = model.calls.borrow();
    assert!(p.stats().model_calls > 0);
    for (&key, &n) in calls.iter() {
        assert!(n <= need, "{key:?} called {n} times, known after {need}");
    }
    assert_eq!(calls.values().sum::<u64>(), p.stats().generator_calls);
}

#[test]
fn same_seed_same_search() {
    let model = Arms(vec![vec![(0.0, 1.0), (1.0, 1.0)], vec![(0.4, 1.0), (0.6, 1.0)]]);
    let run = || {
        let mut p = AagsPlanner::new(config(0.5, 0.1, 0.1, 50, 3), unit_spec(0.9)).unwrap();
        let a = p.search(&0, &model).unwrap();
        (a, p.action_bounds(&0).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn bad_configs_are_rejected() {
    let spec = unit_spec(0.9);
    assert!(AagsPlanner::<u32>::new(config(1.5, 0.1, 0.1, 10, 5), spec).is_err());
    assert!(matches!(
        AagsPlanner::<u32>::new(config(0.5, 0.1, 0.1, 0, 5), spec),
        Err(PlanError::Budget { .. })
    ));
    assert!(AagsPlanner::<u32>::new(config(0.5, 0.1, 0.1, 10, 0), spec).is_err());
    let mut p = AagsPlanner::new(config(0.5, 0.1, 0.1, 10, 5), spec).unwrap();
    assert_eq!(p.search(&1, &Arms(vec![vec![(1.0, 1.0)]])), Err(PlanError::NoActions));
    assert_eq!(p.recommend(&42, 0.5), Err(PlanError::MissingState));
}

#[test]
fn unvisited_actions_are_vacuous() {
    let spec = unit_spec(0.95);
    let mut p: AagsPlanner<u32> = AagsPlanner::new(config(0.5, 0.1, 0.1, 1, 1), spec).unwrap();
    let g = p.graph_mut();
    let root = g.get_or_insert(&0);
    g.expand(root, vec![ActionId(0)]);
    assert_eq!(p.action_bounds(&0).unwrap(), vec![(ActionId(0), spec.v_min(), spec.v_max())]);
}

#[test]
fn terminal_reward_bounds_tighten_with_samples() {
    let spec = unit_spec(0.95);
    let mut p: AagsPlanner<u32> = AagsPlanner::new(config(0.5, 0.1, 0.1, 1, 1), spec).unwrap();
    let g = p.graph_mut();
    let root = g.get_or_insert(&0);
    g.expand(root, vec![ActionId(0)]);
    let next = g.get_or_insert(&1);
    for _ in 0..10_000 {
        g.record(
            root,
            0,
            Transition {
                next_state: next,
                reward: Reward(1.0),
                terminal: true,
            },
        );
    }
    let (_, l, u) = p.action_bounds(&0).unwrap()[0];
    // δ of the mass sits on the boundary, valued at v_min / v_max.
    assert!((l - 0.9).abs() < 1e-9, "{l}");
    assert!((u - (0.9 + 0.1 * spec.v_max())).abs() < 1e-9, "{u}");
}
