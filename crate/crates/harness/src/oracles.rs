//! Independent brute-force checks, shared by the acceptance suite and
//! `plan oracle`.

use std::fmt;

use aags_core::aags::{hurwicz_choice, AagsConfig, AagsPlanner};
use aags_core::amdp::AmdpSpec;
use aags_core::belief::{
    accuracy_for, dist2belief_with_accuracy, required_samples, BeliefFunction, ConfidenceSpec, Proposition,
    ValueBounds,
};
use aags_core::envs::Chain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::HarnessError;

pub const NAMES: [&str; 6] = ["properties", "credal", "extra-outcome", "coverage", "chain", "crossover"];

#[derive(Debug, Clone)]
pub struct Report {
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        write!(f, "{}: {}", self.name, if self.passed { "agree" } else { "DISAGREE" })
    }
}

pub fn run(name: &str, seed: u64) -> Result<Report, HarnessError> {
    match name {
        "properties" => Ok(properties(seed, 1000).report()),
        "credal" => Ok(credal(seed, 200).report()),
        "extra-outcome" => Ok(extra_outcome(seed, 100).report()),
        "coverage" => Ok(coverage(seed, 2000).report()),
        "chain" => chain(seed, 0.0).map(|c| c.report()),
        "crossover" => Ok(crossover(seed).report()),
        other => Err(HarnessError::Config(format!("unknown oracle {other}; one of {NAMES:?}"))),
    }
}

#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub instances: usize,
    /// First few violations, for the report.
    pub failures: Vec<String>,
    pub violations: usize,
}

impl PropertyCheck {
    const TOL: f64 = 1e-9;

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn report(&self) -> Report {
        let mut lines = vec![format!(
            "{} random belief functions on 2-6 outcomes: {} violations of normalization, duality, monotonicity or interval consistency",
            self.instances, self.violations
        )];
        lines.extend(self.failures.iter().cloned());
        Report {
            name: "properties",
            passed: self.passed(),
            lines,
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.violations += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }
}

/// Normalization, Bel/Pl duality, monotonicity under inclusion and
/// consistency of each built function with its interval constraints, on
/// random sample counts. Half the instances take their accuracy from the
/// sample relation, half draw it directly.
pub fn properties(seed: u64, instances: usize) -> PropertyCheck {
    const TOL: f64 = PropertyCheck::TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = PropertyCheck {
        instances,
        failures: Vec::new(),
        violations: 0,
    };
    let bounds = ValueBounds::new(-1.0, 1.0).expect("valid bounds");
    for k in 0..instances {
        let n = rng.gen_range(2..=6);
        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=40)).collect();
        let delta = rng.gen_range(0.0..0.5);
        let total: u64 = counts.iter().sum();
        let eps = if k % 2 == 0 {
            rng.gen_range(0.0..0.5)
        } else {
            accuracy_for(delta, total).expect("delta in range")
        };
        let bf = dist2belief_with_accuracy(&counts, eps, delta).expect("valid counts");
        let tag = format!("instance {k}: counts {counts:?} eps {eps:.4} delta {delta:.4}");

        check.expect((bf.total_mass() - 1.0).abs() < TOL, || format!("{tag}: total mass {}", bf.total_mass()));
        check.expect(bf.focal_elements().all(|(_, m)| m >= 0.0), || format!("{tag}: negative mass"));

        let full = Proposition::full(n).mask();
        let sets: Vec<Proposition> = (1..=full).map(|m| Proposition::new(m, n).expect("mask in range")).collect();
        let bel: Vec<f64> = sets.iter().map(|s| bf.bel(*s).expect("valid set")).collect();
        let pl: Vec<f64> = sets.iter().map(|s| bf.pl(*s).expect("valid set")).collect();
        for (i, a) in sets.iter().enumerate() {
            let rest = full & !a.mask();
            let bel_rest = if rest == 0 { 0.0 } else { bel[rest as usize - 1] };
            check.expect((pl[i] - (1.0 - bel_rest)).abs() < TOL, || {
                format!("{tag}: pl({:b}) = {} but 1 - bel(complement) = {}", a.mask(), pl[i], 1.0 - bel_rest)
            });
            check.expect(bel[i] <= pl[i] + TOL, || format!("{tag}: bel > pl on {:b}", a.mask()));
            for (j, b) in sets.iter().enumerate() {
                if a.is_subset_of(*b) {
                    check.expect(bel[i] <= bel[j] + TOL && pl[i] <= pl[j] + TOL, || {
                        format!("{tag}: not monotone from {:b} to {:b}", a.mask(), b.mask())
                    });
                }
            }
        }
        for (i, c) in counts.iter().enumerate() {
            let p = *c as f64 / total as f64;
            let want = (1.0 - delta) * (p - eps).max(0.0);
            let s = Proposition::singleton(i).mask() as usize - 1;
            check.expect((bel[s] - want).abs() < TOL, || format!("{tag}: bel({i}) = {} not {want}", bel[s]));
            check.expect(pl[s] >= (1.0 - delta) * p - TOL, || format!("{tag}: pl({i}) below the frequency"));
        }
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean: f64 = counts.iter().zip(&values).map(|(c, v)| *c as f64 / total as f64 * v).sum();
        let lo = bf.choquet_lower(&values, bounds).expect("matching values");
        let hi = bf.choquet_upper(&values, bounds).expect("matching values");
        check.expect(lo <= mean + TOL && mean <= hi + TOL, || format!("{tag}: [{lo}, {hi}] misses {mean}"));
    }
    check
}

#[derive(Debug, Clone)]
pub struct ExtraOutcomeCheck {
    pub instances: usize,
    pub mismatches: usize,
}

impl ExtraOutcomeCheck {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }

    fn report(&self) -> Report {
        Report {
            name: "extra-outcome",
            passed: self.passed(),
            lines: vec![format!(
                "{} belief functions with a zero-mass outcome added: {} expectations changed (bitwise)",
                self.instances, self.mismatches
            )],
        }
    }
}

/// Adding an outcome that carries no mass of its own and takes any value in
/// `[L, U]` leaves both Choquet expectations bit-identical.
pub fn extra_outcome(seed: u64, instances: usize) -> ExtraOutcomeCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = ValueBounds::new(-2.0, 3.0).expect("valid bounds");
    let mut mismatches = 0;
    for _ in 0..instances {
        let n = rng.gen_range(1..=6);
        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=40)).collect();
        let bf = dist2belief_with_accuracy(&counts, rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5))
            .expect("valid counts");
        let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(bounds.lower..=bounds.upper)).collect();
        let lo = bf.choquet_lower(&values, bounds).expect("matching values");
        let hi = bf.choquet_upper(&values, bounds).expect("matching values");
        values.push(rng.gen_range(bounds.lower..=bounds.upper));
        let wider = bf.with_extra_outcome().expect("room for one more outcome");
        let lo2 = wider.choquet_lower(&values, bounds).expect("matching values");
        let hi2 = wider.choquet_upper(&values, bounds).expect("matching values");
        if lo.to_bits() != lo2.to_bits() || hi.to_bits() != hi2.to_bits() {
            mismatches += 1;
        }
    }
    ExtraOutcomeCheck { instances, mismatches }
}

/// Grid step of the credal-set enumeration.
pub const CREDAL_STEP: f64 = 1e-3;

/// Min and max of `Σ q·v` over `{q : bel(ω) <= q_ω <= pl(ω), Σ q = 1}`,
/// with `q` enumerated on a grid of step [`CREDAL_STEP`] (the last
/// coordinate takes up the remainder). Only for two or three outcomes.
pub fn credal_extremes(bf: &BeliefFunction, values: &[f64]) -> (f64, f64) {
    let n = bf.outcome_count();
    assert!((2..=3).contains(&n) && values.len() == n);
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let s = Proposition::singleton(i);
            (bf.bel(s).unwrap(), bf.pl(s).unwrap())
        })
        .collect();
    // Grid points within half a step of a bound count as on it.
    let slack = CREDAL_STEP / 2.0;
    let ok = |i: usize, q: f64| q >= bounds[i].0 - slack && q <= bounds[i].1 + slack;
    let steps = (1.0 / CREDAL_STEP).round() as i64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut visit = |q: &[f64]| {
        let e: f64 = q.iter().zip(values).map(|(q, v)| q * v).sum();
        lo = lo.min(e);
        hi = hi.max(e);
    };
    for a in 0..=steps {
        let q0 = a as f64 * CREDAL_STEP;
        if !ok(0, q0) {
            continue;
        }
        if n == 2 {
            let q1 = 1.0 - q0;
            if ok(1, q1) {
                visit(&[q0, q1]);
            }
            continue;
        }
        for b in 0..=(steps - a) {
            let q1 = b as f64 * CREDAL_STEP;
            let q2 = 1.0 - q0 - q1;
            if ok(1, q1) && ok(2, q2) {
                visit(&[q0, q1, q2]);
            }
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone)]
pub struct CredalCheck {
    pub instances: usize,
    pub max_error: f64,
}

impl CredalCheck {
    pub const TOLERANCE: f64 = 2e-3;

    pub fn passed(&self) -> bool {
        self.max_error <= Self::TOLERANCE
    }

    fn report(&self) -> Report {
        Report {
            name: "credal",
            passed: self.passed(),
            lines: vec![format!(
                "{} undiscounted belief functions on 2-3 outcomes: max |choquet - credal grid| = {:.2e} (tolerance {:.0e})",
                self.instances,
                self.max_error,
                Self::TOLERANCE
            )],
        }
    }
}

/// Choquet expectations against credal-set enumeration on random empirical
/// distributions (no discounting, accuracy drawn in [0.01, 0.3]).
pub fn credal(seed: u64, instances: usize) -> CredalCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = ValueBounds::new(0.0, 1.0).unwrap();
    let mut max_error: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.gen_range(2..=3);
        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=30)).collect();
        let eps = rng.gen_range(0.01..0.3);
        let bf = dist2belief_with_accuracy(&counts, eps, 0.0).expect("valid counts");
        let values: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let lower = bf.choquet_lower(&values, bounds).unwrap();
        let upper = bf.choquet_upper(&values, bounds).unwrap();
        let (lo, hi) = credal_extremes(&bf, &values);
        max_error = max_error.max((lower - lo).abs()).max((upper - hi).abs());
    }
    CredalCheck { instances, max_error }
}

#[derive(Debug, Clone)]
pub struct CoverageCheck {
    /// `(epsilon, delta, samples, observed frequency, required frequency)`.
    pub cases: Vec<(f64, f64, u64, f64, f64)>,
}

impl CoverageCheck {
    pub const SLACK: f64 = 0.05;

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.3 >= c.4)
    }

    fn report(&self) -> Report {
        Report {
            name: "coverage",
            passed: self.passed(),
            lines: self
                .cases
                .iter()
                .map(|(e, d, n, f, need)| {
                    format!("eps={e} delta={d}: {n} samples, all-within-eps frequency {f:.4} (need >= {need:.2})")
                })
                .collect(),
        }
    }
}

/// Frequency with which `t(ε, δ)` samples of a random 4-outcome multinomial
/// estimate every probability to within `ε`.
pub fn coverage(seed: u64, reps: usize) -> CoverageCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirichlet = Dirichlet::new(&[1.0; 4]).expect("valid concentration");
    let mut cases = Vec::new();
    for (eps, delta) in [(0.1, 0.1), (0.2, 0.1)] {
        let t = required_samples(ConfidenceSpec::new(eps, delta).unwrap()).unwrap();
        let n = t.ceil().max(1.0) as u64;
        let mut hits = 0usize;
        for _ in 0..reps {
            let p: Vec<f64> = dirichlet.sample(&mut rng);
            let mut counts = [0u64; 4];
            for _ in 0..n {
                let mut x: f64 = rng.gen();
                let mut k = 3;
                for (i, pi) in p.iter().enumerate() {
                    if x < *pi {
                        k = i;
                        break;
                    }
                    x -= pi;
                }
                counts[k] += 1;
            }
            if (0..4).all(|i| (counts[i] as f64 / n as f64 - p[i]).abs() < eps) {
                hits += 1;
            }
        }
        cases.push((eps, delta, n, hits as f64 / reps as f64, 1.0 - delta - CoverageCheck::SLACK));
    }
    CoverageCheck { cases }
}

#[derive(Debug, Clone)]
pub struct ChainCheck {
    pub delta: f64,
    pub truth: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

impl ChainCheck {
    pub fn passed(&self) -> bool {
        (self.lower - self.truth).abs() <= self.tolerance && (self.upper - self.truth).abs() <= self.tolerance
    }

    fn report(&self) -> Report {
        Report {
            name: "chain",
            passed: self.passed(),
            lines: vec![format!(
                "5-state chain, gamma 0.9, delta {}: value {:.4}, root bounds [{:.4}, {:.4}], tolerance {:.4}",
                self.delta, self.truth, self.lower, self.upper, self.tolerance
            )],
        }
    }
}

/// AAGS root bounds on a 5-state deterministic chain after 200 trajectories
/// against backward induction.
pub fn chain(seed: u64, delta: f64) -> Result<ChainCheck, HarnessError> {
    let gamma = 0.9;
    let model = Chain::new(5, 0.2)?;
    let spec = AmdpSpec::new(gamma, 0.0, 1.0)?;
    let confidence = ConfidenceSpec::new(0.1, delta).map_err(aags_core::planner::PlanError::from)?;
    let mut cfg = AagsConfig::new(0.0, confidence, 200, 10);
    cfg.seed = seed;
    let mut planner = AagsPlanner::new(cfg, spec)?;
    planner.search(&0, &model)?;
    let root = planner.graph().node(planner.graph().id(&0).expect("root is in the graph"));
    Ok(ChainCheck {
        delta,
        truth: model.value(0, gamma),
        lower: root.lower,
        upper: root.upper,
        tolerance: delta * (spec.v_max() - spec.v_min()) + 0.05,
    })
}

#[derive(Debug, Clone)]
pub struct CrossoverCheck {
    pub switches: Vec<f64>,
    pub expected: f64,
}

impl CrossoverCheck {
    pub const TOLERANCE: f64 = 0.01;

    pub fn passed(&self) -> bool {
        self.switches.len() == 1 && (self.switches[0] - self.expected).abs() <= Self::TOLERANCE
    }

    fn report(&self) -> Report {
        Report {
            name: "crossover",
            passed: self.passed(),
            lines: vec![format!(
                "arms (0.4, 0.6) and (0.2, 0.9): recommendation switches at {:?}, hand value {}",
                self.switches, self.expected
            )],
        }
    }
}

/// Scans α on a 1e-3 grid for the recommendation switch between the arms
/// `(L, U) = (0.4, 0.6)` and `(0.2, 0.9)`.
pub fn crossover(seed: u64) -> CrossoverCheck {
    let bounds = [(0.4, 0.6), (0.2, 0.9)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut switches = Vec::new();
    let mut last = hurwicz_choice(&bounds, 0.0, &mut rng);
    for i in 1..=1000 {
        let alpha = i as f64 / 1000.0;
        let pick = hurwicz_choice(&bounds, alpha, &mut rng);
        if pick != last {
            switches.push(alpha);
            last = pick;
        }
    }
    // 0.4 + 0.2α = 0.2 + 0.7α
    CrossoverCheck { switches, expected: 0.4 }
}
