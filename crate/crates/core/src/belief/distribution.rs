use std::collections::BTreeMap;

use rand::Rng;

use super::{accuracy_for, assemble_system, BeliefError, BeliefFunction, Proposition, MAX_OUTCOMES};

/// Default cap on distinct outcomes before binning.
pub const DEFAULT_BIN_CAP: usize = MAX_OUTCOMES;

/// Outcome counts for one state-action pair. Outcomes are kept in their
/// natural (canonical) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> Default for EmpiricalDistribution<K> {
    fn default() -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<K: Ord + Clone> EmpiricalDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<I: IntoIterator<Item = (K, u64)>>(counts: I) -> Self {
        let mut d = Self::new();
        for (k, c) in counts {
            if c > 0 {
                *d.counts.entry(k).or_insert(0) += c;
                d.total += c;
            }
        }
        d
    }

    pub fn record(&mut self, outcome: K) {
        *self.counts.entry(outcome).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, outcome: &K) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> {
        self.counts.iter().map(|(k, c)| (k, *c))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        frequencies(&self.counts())
    }

    /// Draws an outcome with probability `count / total`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&K> {
        if self.total == 0 {
            return None;
        }
        let mut u = rng.gen_range(0..self.total);
        for (k, &c) in &self.counts {
            if u < c {
                return Some(k);
            }
            u -= c;
        }
        unreachable!("draw below total")
    }
}

fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Per-outcome `(Bel, Pl)` from an accuracy `epsilon` around frequencies `p`.
pub fn interval_bounds(p: &[f64], epsilon: f64) -> Vec<(f64, f64)> {
    p.iter()
        .map(|&q| ((q - epsilon).max(0.0), (q + epsilon).min(1.0)))
        .collect()
}

/// A distribution whose outcomes have been merged into at most `cap` bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedDistribution<K> {
    /// Constituent outcomes of each bin, in canonical order.
    pub bins: Vec<Vec<K>>,
    pub counts: Vec<u64>,
}

impl<K> BinnedDistribution<K> {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// Merges the lowest-count outcomes (ties by canonical order) into a single
/// composite outcome until at most `cap` outcomes remain. The composite sits
/// at the position of its first constituent.
pub fn bin_outcomes<K: Ord + Clone>(p: &EmpiricalDistribution<K>, cap: usize) -> BinnedDistribution<K> {
    let cap = cap.max(2);
    let entries: Vec<(K, u64)> = p.iter().map(|(k, c)| (k.clone(), c)).collect();
    if entries.len() <= cap {
        return BinnedDistribution {
            counts: entries.iter().map(|(_, c)| *c).collect(),
            bins: entries.into_iter().map(|(k, _)| vec![k]).collect(),
        };
    }
    let merge_count = entries.len() - cap + 1;
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by_key(|&i| (entries[i].1, i));
    let mut merged = vec![false; entries.len()];
    for &i in &order[..merge_count] {
        merged[i] = true;
    }
    let first_merged = merged.iter().position(|&m| m).expect("at least one merge");

    let mut bins = Vec::with_capacity(cap);
    let mut counts = Vec::with_capacity(cap);
    for (i, (k, c)) in entries.iter().enumerate() {
        if i == first_merged {
            let members: Vec<K> = entries
                .iter()
                .zip(&merged)
                .filter(|(_, &m)| m)
                .map(|((k, _), _)| k.clone())
                .collect();
            let total = entries.iter().zip(&merged).filter(|(_, &m)| m).map(|((_, c), _)| c).sum();
            bins.push(members);
            counts.push(total);
        } else if !merged[i] {
            bins.push(vec![k.clone()]);
            counts.push(*c);
        }
    }
    BinnedDistribution { bins, counts }
}

/// Diagnostics from the mass-distribution solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub epsilon: f64,
    /// The minimum-norm solution had negative entries or violated the
    /// total-mass row and was projected back onto valid masses.
    pub projected: bool,
}

/// Belief function (before discounting) implied by accuracy `epsilon` around
/// the empirical frequencies of `counts`.
///
/// Singletons receive `Bel(ω) = max(p_ω - ε, 0)`; the remaining mass
/// `1 - Σ Bel` is spread over compound propositions by the minimum-norm
/// solution of the constraint system. Negative entries are clamped to zero,
/// and the surplus or deficit against the total-mass row is taken from the
/// full-set proposition; if that would make the full set negative, all
/// compound masses are rescaled instead.
pub fn undiscounted_belief(counts: &[u64], epsilon: f64) -> Result<(BeliefFunction, SolveReport), BeliefError> {
    let n = counts.len();
    if n == 0 || counts.iter().sum::<u64>() == 0 {
        return Err(BeliefError::EmptyDistribution);
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(BeliefError::Domain {
            name: "epsilon",
            value: epsilon,
            constraint: "0 <= epsilon <= 1",
        });
    }
    let system = assemble_system(n)?;
    let bounds = interval_bounds(&frequencies(counts), epsilon);
    let bel_total: f64 = bounds.iter().map(|(b, _)| b).sum();
    let target = (1.0 - bel_total).max(0.0);

    let mut rhs: Vec<f64> = bounds.iter().map(|(b, p)| p - b).collect();
    rhs.push(target);
    let mut x = system.solve(&rhs);

    let mut projected = false;
    for v in &mut x {
        if *v < 0.0 {
            projected |= *v < -1e-12;
            *v = 0.0;
        }
    }
    let full_col = x.len() - 1;
    let surplus: f64 = x.iter().sum::<f64>() - target;
    if surplus.abs() > 1e-9 {
        projected = true;
    }
    if x[full_col] - surplus >= 0.0 {
        x[full_col] -= surplus;
    } else {
        x[full_col] = 0.0;
        let sum: f64 = x.iter().sum();
        if sum > 0.0 {
            let scale = target / sum;
            x.iter_mut().for_each(|v| *v *= scale);
        } else {
            x[full_col] = target;
        }
    }

    let mut bf = BeliefFunction::empty(n)?;
    for (i, (b, _)) in bounds.iter().enumerate() {
        bf.add_mass(Proposition::singleton(i), *b);
    }
    for (col, m) in system.columns().iter().zip(&x) {
        bf.add_mass(*col, *m);
    }
    Ok((bf, SolveReport { epsilon, projected }))
}

/// Belief function for accuracy `epsilon`, discounted by `delta`.
pub fn dist2belief_with_accuracy(counts: &[u64], epsilon: f64, delta: f64) -> Result<BeliefFunction, BeliefError> {
    let (bf, _) = undiscounted_belief(counts, epsilon)?;
    bf.discount(delta)
}

/// Belief function for the sampled distribution `counts` at confidence
/// `delta`: accuracy comes from the sample relation for `Σ counts` samples.
pub fn dist2belief(counts: &[u64], delta: f64) -> Result<BeliefFunction, BeliefError> {
    let total: u64 = counts.iter().sum();
    let epsilon = accuracy_for(delta, total)?;
    dist2belief_with_accuracy(counts, epsilon, delta)
}
