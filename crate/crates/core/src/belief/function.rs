use std::collections::BTreeMap;

use super::BeliefError;

/// Tolerance on total mass.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A nonempty subset of an outcome space, encoded as a bitmask over the
/// space's fixed outcome ordering (bit `i` set iff outcome `i` is a member).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proposition(u64);

impl Proposition {
    pub fn new(mask: u64, n: usize) -> Result<Self, BeliefError> {
        if mask == 0 || n == 0 || n > 64 || (n < 64 && mask >> n != 0) {
            return Err(BeliefError::InvalidProposition { mask, n });
        }
        Ok(Self(mask))
    }

    pub fn singleton(i: usize) -> Self {
        Self(1 << i)
    }

    /// The full outcome set of size `n`.
    pub fn full(n: usize) -> Self {
        debug_assert!((1..=64).contains(&n));
        Self(if n == 64 { u64::MAX } else { (1 << n) - 1 })
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self, BeliefError> {
        let mut mask = 0u64;
        for i in indices {
            if i >= n || i >= 64 {
                return Err(BeliefError::InvalidProposition { mask: mask | 1 << (i % 64), n });
            }
            mask |= 1 << i;
        }
        Self::new(mask, n)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: Proposition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Proposition) -> bool {
        self.0 & other.0 != 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

/// Bounds on the value of any outcome, used to value the boundary
/// proposition that represents unobserved outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueBounds {
    pub lower: f64,
    pub upper: f64,
}

impl ValueBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, BeliefError> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(BeliefError::InvalidBounds { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A mass assignment over the propositions of an `n`-outcome space.
///
/// The boundary proposition stands for `{U ∪ L ∪ Θ}`: the observed outcomes
/// together with the extreme values any unobserved outcome could take. It is
/// a strict superset of every proposition over the observed outcomes, so it
/// counts towards plausibility but never towards belief.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefFunction {
    n: usize,
    masses: BTreeMap<Proposition, f64>,
    boundary: f64,
}

impl BeliefFunction {
    /// Builds a belief function, accumulating repeated propositions.
    pub fn new<I>(n: usize, masses: I, boundary: f64) -> Result<Self, BeliefError>
    where
        I: IntoIterator<Item = (Proposition, f64)>,
    {
        let mut bf = Self::empty(n)?;
        for (prop, mass) in masses {
            Proposition::new(prop.mask(), n)?;
            check_mass(mass)?;
            bf.add_mass(prop, mass);
        }
        check_mass(boundary)?;
        bf.boundary = boundary;
        let total = bf.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(BeliefError::Unnormalized(total));
        }
        Ok(bf)
    }

    /// All mass on the full outcome set.
    pub fn vacuous(n: usize) -> Result<Self, BeliefError> {
        let mut bf = Self::empty(n)?;
        bf.add_mass(Proposition::full(n), 1.0);
        Ok(bf)
    }

    /// All mass on the boundary proposition.
    pub fn vacuous_boundary(n: usize) -> Result<Self, BeliefError> {
        let mut bf = Self::empty(n)?;
        bf.boundary = 1.0;
        Ok(bf)
    }

    pub(crate) fn empty(n: usize) -> Result<Self, BeliefError> {
        if n == 0 || n > 64 {
            return Err(BeliefError::OutcomeCount(n));
        }
        Ok(Self {
            n,
            masses: BTreeMap::new(),
            boundary: 0.0,
        })
    }

    pub(crate) fn add_mass(&mut self, prop: Proposition, mass: f64) {
        if mass != 0.0 {
            *self.masses.entry(prop).or_insert(0.0) += mass;
        }
    }

    pub fn outcome_count(&self) -> usize {
        self.n
    }

    pub fn mass(&self, prop: Proposition) -> f64 {
        self.masses.get(&prop).copied().unwrap_or(0.0)
    }

    pub fn boundary_mass(&self) -> f64 {
        self.boundary
    }

    /// Propositions with nonzero mass, in canonical order.
    pub fn focal_elements(&self) -> impl Iterator<Item = (Proposition, f64)> + '_ {
        self.masses.iter().map(|(p, m)| (*p, *m))
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum::<f64>() + self.boundary
    }

    fn check(&self, set: Proposition) -> Result<(), BeliefError> {
        Proposition::new(set.mask(), self.n).map(|_| ())
    }

    /// Belief: total mass of propositions contained in `set`.
    pub fn bel(&self, set: Proposition) -> Result<f64, BeliefError> {
        self.check(set)?;
        Ok(self
            .masses
            .iter()
            .filter(|(c, _)| c.is_subset_of(set))
            .map(|(_, m)| m)
            .sum())
    }

    /// Plausibility: total mass of propositions intersecting `set`,
    /// including the boundary.
    pub fn pl(&self, set: Proposition) -> Result<f64, BeliefError> {
        self.check(set)?;
        Ok(self
            .masses
            .iter()
            .filter(|(c, _)| c.intersects(set))
            .map(|(_, m)| m)
            .sum::<f64>()
            + self.boundary)
    }

    /// Shafer discounting: scales every mass by `1 - delta` and moves `delta`
    /// onto the boundary proposition.
    pub fn discount(&self, delta: f64) -> Result<Self, BeliefError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(BeliefError::Domain {
                name: "delta",
                value: delta,
                constraint: "0 <= delta <= 1",
            });
        }
        let keep = 1.0 - delta;
        let mut out = Self::empty(self.n)?;
        for (p, m) in self.focal_elements() {
            out.add_mass(p, keep * m);
        }
        out.boundary = keep * self.boundary + delta;
        Ok(out)
    }

    /// Lower (Choquet) expectation: each proposition's mass goes to its
    /// least valuable member; the boundary's mass goes to `bounds.lower`.
    pub fn choquet_lower(&self, values: &[f64], bounds: ValueBounds) -> Result<f64, BeliefError> {
        self.check_values(values)?;
        let mut total = 0.0;
        for (p, m) in self.focal_elements() {
            let worst = p.members().map(|i| values[i]).fold(f64::INFINITY, f64::min);
            total += m * worst;
        }
        if self.boundary != 0.0 {
            let floor = values.iter().copied().fold(bounds.lower, f64::min);
            total += self.boundary * floor;
        }
        Ok(total)
    }

    /// Upper (Choquet) expectation, the mirror of [`Self::choquet_lower`].
    pub fn choquet_upper(&self, values: &[f64], bounds: ValueBounds) -> Result<f64, BeliefError> {
        self.check_values(values)?;
        let mut total = 0.0;
        for (p, m) in self.focal_elements() {
            let best = p.members().map(|i| values[i]).fold(f64::NEG_INFINITY, f64::max);
            total += m * best;
        }
        if self.boundary != 0.0 {
            let ceiling = values.iter().copied().fold(bounds.upper, f64::max);
            total += self.boundary * ceiling;
        }
        Ok(total)
    }

    fn check_values(&self, values: &[f64]) -> Result<(), BeliefError> {
        if values.len() != self.n {
            return Err(BeliefError::MissingValue {
                expected: self.n,
                got: values.len(),
            });
        }
        Ok(())
    }

    /// The same masses over an outcome space with one extra outcome appended.
    /// The new outcome carries no mass of its own; only the boundary covers it.
    pub fn with_extra_outcome(&self) -> Result<Self, BeliefError> {
        let mut out = Self::empty(self.n + 1)?;
        out.masses = self.masses.clone();
        out.boundary = self.boundary;
        Ok(out)
    }
}

fn check_mass(mass: f64) -> Result<(), BeliefError> {
    if !(0.0..=1.0).contains(&mass) {
        return Err(BeliefError::InvalidMass(mass));
    }
    Ok(())
}
