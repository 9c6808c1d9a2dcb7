use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::{BeliefError, Proposition};

/// Largest outcome space the mass-distribution system is built for.
pub const MAX_OUTCOMES: usize = 12;

/// The linear system that spreads interval slack over compound propositions.
///
/// Rows are the singletons `ω_i` plus a final total-mass row of ones; columns
/// are the propositions of size two or more, including the full set (for a
/// single outcome the full set is the only column). Entry `(i, j)` is 1 iff
/// `ω_i ∈ θ_j`.
///
/// The system is underdetermined for `n >= 3` (and inconsistent in general
/// for `n = 2`), so solutions are minimum-norm least-squares:
/// `x = Aᵀ (A Aᵀ)⁺ b`. Only the `(n + 1)²` Gram pseudo-inverse is stored;
/// `Aᵀ y` is applied through the column masks.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    n: usize,
    columns: Vec<Proposition>,
    gram_pinv: DMatrix<f64>,
}

impl ConstraintSystem {
    fn build(n: usize) -> Self {
        let full = Proposition::full(n);
        let columns: Vec<Proposition> = (1..=full.mask())
            .filter(|m| m.count_ones() >= 2 || *m == full.mask())
            .map(|m| Proposition::new(m, n).expect("mask within space"))
            .collect();
        let rows = n + 1;
        let mut gram = DMatrix::<f64>::zeros(rows, rows);
        for col in &columns {
            // Nonzero rows of this column: its members plus the total row.
            let support: Vec<usize> = col.members().chain(std::iter::once(n)).collect();
            for &i in &support {
                for &k in &support {
                    gram[(i, k)] += 1.0;
                }
            }
        }
        let gram_pinv = gram
            .pseudo_inverse(1e-10)
            .expect("Gram matrix pseudo-inverse");
        Self {
            n,
            columns,
            gram_pinv,
        }
    }

    pub fn outcome_count(&self) -> usize {
        self.n
    }

    /// Compound propositions, one per column, in ascending mask order.
    pub fn columns(&self) -> &[Proposition] {
        &self.columns
    }

    /// Dense `(n + 1) × columns` constraint matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n + 1, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for i in col.members() {
                a[(i, j)] = 1.0;
            }
            a[(self.n, j)] = 1.0;
        }
        a
    }

    /// Minimum-norm least-squares solution of `A x = b`; `b` has `n + 1` rows.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n + 1, "right-hand side has the wrong length");
        let y = &self.gram_pinv * DMatrix::from_column_slice(b.len(), 1, b);
        let total = y[self.n];
        self.columns
            .iter()
            .map(|col| col.members().map(|i| y[i]).sum::<f64>() + total)
            .collect()
    }
}

/// The shared, lazily built system for an `n`-outcome space.
pub fn assemble_system(n: usize) -> Result<&'static ConstraintSystem, BeliefError> {
    static CACHE: [OnceLock<ConstraintSystem>; MAX_OUTCOMES] = [const { OnceLock::new() }; MAX_OUTCOMES];
    if !(1..=MAX_OUTCOMES).contains(&n) {
        return Err(BeliefError::OutcomeCount(n));
    }
    Ok(CACHE[n - 1].get_or_init(|| ConstraintSystem::build(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_outcome_system_is_a_single_column() {
        let sys = assemble_system(2).unwrap();
        let a = sys.matrix();
        assert_eq!(a.shape(), (3, 1));
        assert!(a.iter().all(|&v| v == 1.0));
        // Inconsistent right-hand side: least squares averages the rows.
        let x = sys.solve(&[0.1, 0.2, 0.3]);
        assert!((x[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn three_outcome_columns() {
        let sys = assemble_system(3).unwrap();
        let masks: Vec<u64> = sys.columns().iter().map(|p| p.mask()).collect();
        assert_eq!(masks, vec![0b011, 0b101, 0b110, 0b111]);
        assert_eq!(sys.matrix().shape(), (4, 4));
    }

    #[test]
    fn column_count_is_power_set_minus_singletons_and_empty() {
        for n in 2..=MAX_OUTCOMES {
            let sys = assemble_system(n).unwrap();
            assert_eq!(sys.columns().len(), (1 << n) - n - 1, "n = {n}");
        }
        assert_eq!(assemble_system(1).unwrap().columns().len(), 1);
    }

    #[test]
    fn out_of_range_sizes_are_rejected() {
        assert!(assemble_system(0).is_err());
        assert_eq!(assemble_system(13).unwrap_err(), BeliefError::OutcomeCount(13));
    }

    #[test]
    fn matches_a_dense_svd_pseudo_inverse() {
        // Independent route: pseudo-inverse of the full matrix.
        for n in 2..=5 {
            let sys = assemble_system(n).unwrap();
            let a = sys.matrix();
            let pinv = a.clone().pseudo_inverse(1e-12).unwrap();
            let b: Vec<f64> = (0..=n).map(|i| 0.05 + 0.07 * i as f64).collect();
            let want = &pinv * DMatrix::from_column_slice(n + 1, 1, &b);
            let got = sys.solve(&b);
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g - w).abs() < 1e-10, "n = {n}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn consistent_systems_are_solved_exactly() {
        let sys = assemble_system(4).unwrap();
        let a = sys.matrix();
        let x0: Vec<f64> = (0..sys.columns().len()).map(|j| 0.01 * (j % 5) as f64).collect();
        let b = &a * DMatrix::from_column_slice(x0.len(), 1, &x0);
        let x = sys.solve(b.as_slice());
        let back = &a * DMatrix::from_column_slice(x.len(), 1, &x);
        for (u, v) in back.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
