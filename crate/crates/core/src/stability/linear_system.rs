use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{coefficients_unchecked, summable_forward};
use crate::error::Result;
use crate::kernels::Kernel;
use crate::ruelle_operator::TransferOperator;

/// Singular values below this fraction of the largest count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// The relations of several summable critical points at once.
///
/// Row `r` belongs to critical point `i = indices[r]`, column `j` to critical
/// point `j`; the entry is the coefficient of `γ_{d_j}` in `φ_i − R*φ_i`,
/// namely `δ_ij − b_j A(1, c_j, R, d_i)`. Columns with `γ_{d_j} ≡ 0` are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRelationSystem {
    pub indices: Vec<usize>,
    pub order: usize,
    pub matrix: Vec<Vec<Complex64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rank_tol: f64,
    /// `(2d − 2) − rank`.
    pub dimension_bound: usize,
    /// Left null vectors `B` with `Σ_r B_r M[r][j] ≈ 0`, one per deficient
    /// direction. `Σ_r B_r φ_{indices[r]}` is then fixed by `R*` up to
    /// truncation.
    pub null_combinations: Vec<Vec<Complex64>>,
}

impl LinearRelationSystem {
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let rows = self.matrix.len();
        let cols = self.matrix.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, cols, |r, c| self.matrix[r][c])
    }

    /// Largest `|Σ_r B_r M[r][j]|` over the null combinations.
    pub fn null_residual(&self) -> f64 {
        let m = self.to_matrix();
        let mut worst: f64 = 0.0;
        for b in &self.null_combinations {
            for j in 0..m.ncols() {
                let s: Complex64 = (0..m.nrows()).map(|r| b[r] * m[(r, j)]).sum();
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

/// Rank, singular values (descending) and left null vectors of `m`.
pub fn rank_of(m: &DMatrix<Complex64>, rel_tol: f64) -> (usize, Vec<f64>, Vec<Vec<Complex64>>) {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return (0, Vec::new(), Vec::new());
    }
    // pad to at least square so U is complete
    let padded = if cols < rows {
        m.clone().resize_horizontally(rows, Complex64::new(0.0, 0.0))
    } else {
        m.clone()
    };
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let cutoff = rel_tol * sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let null = order[rank..]
        .iter()
        .filter(|&&i| i < u.ncols())
        .map(|&i| u.column(i).iter().map(|v| v.conj()).collect())
        .collect();
    let reported = sigma.into_iter().take(rows.min(cols)).collect();
    (rank, reported, null)
}

/// Build and decompose the system for the given critical points; each must
/// have summable evidence.
pub fn build_linear_system(
    op: &TransferOperator,
    indices: &[usize],
    n: usize,
    rank_tol: f64,
) -> Result<LinearRelationSystem> {
    let cd = op.critical();
    let k = cd.len();
    let live: Vec<bool> = cd
        .values
        .iter()
        .map(|&d| !Kernel::gamma(d).is_identically_zero())
        .collect();
    let mut matrix = Vec::with_capacity(indices.len());
    for &i in indices {
        summable_forward(op, i, n)?;
        let coefs = coefficients_unchecked(op, i, n)?;
        let row: Vec<Complex64> = (0..k)
            .map(|j| {
                if !live[j] {
                    return Complex64::new(0.0, 0.0);
                }
                let delta = if i == j { 1.0 } else { 0.0 };
                Complex64::new(delta, 0.0) - coefs.entries[j].b_c
            })
            .collect();
        matrix.push(row);
    }
    let m = DMatrix::from_fn(indices.len(), k, |r, c| matrix[r][c]);
    let (rank, singular_values, null_combinations) = rank_of(&m, rank_tol);
    let total = 2 * op.map().degree() - 2;
    Ok(LinearRelationSystem {
        indices: indices.to_vec(),
        order: n,
        matrix,
        singular_values,
        rank,
        rank_tol,
        dimension_bound: total.saturating_sub(rank),
        null_combinations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fixtures;
    use crate::rational_map::Tolerances;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fixture_system() {
        let op = TransferOperator::new(fixtures::chebyshev_quadratic(), Tolerances::default()).unwrap();
        let s = build_linear_system(&op, &[0], 60, DEFAULT_RANK_TOL).unwrap();
        assert!((s.matrix[0][0] - 1.5).norm() < 1e-14);
        assert_eq!(s.rank, 1);
        assert_eq!(s.dimension_bound, 1);
        assert!(s.null_combinations.is_empty());
    }

    #[test]
    fn cubic_system_has_one_dead_row() {
        let op = TransferOperator::new(fixtures::chebyshev_cubic(), Tolerances::default()).unwrap();
        let s = build_linear_system(&op, &[0, 1], 60, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(s.rank, 1);
        assert_eq!(s.dimension_bound, 3);
        assert_eq!(s.null_combinations.len(), 1);
        assert!(s.null_residual() < 1e-12);
        // the null combination sits on the critical point whose value is 1
        let dead = op
            .critical()
            .values
            .iter()
            .position(|d| (d - 1.0).norm() < 1e-12)
            .unwrap();
        let b = &s.null_combinations[0];
        assert!((b[dead].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_summable_row_is_refused() {
        let op = TransferOperator::new(fixtures::attracting_quadratic(0.5), Tolerances::default()).unwrap();
        assert!(matches!(
            build_linear_system(&op, &[0], 80, DEFAULT_RANK_TOL),
            Err(Error::NotSummable { .. })
        ));
    }

    #[test]
    fn rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(
            3,
            2,
            &[
                c(1.0, 0.0),
                c(2.0, 1.0),
                c(2.0, 0.0),
                c(4.0, 2.0),
                c(0.0, 1.0),
                c(0.0, -1.0),
            ],
        );
        let (rank, sigma, null) = rank_of(&m, DEFAULT_RANK_TOL);
        assert_eq!(rank, 2);
        assert_eq!(sigma.len(), 2);
        assert_eq!(null.len(), 1);
        let b = &null[0];
        for j in 0..2 {
            let s: Complex64 = (0..3).map(|r| b[r] * m[(r, j)]).sum();
            assert!(s.norm() < 1e-12);
        }

        let square = DMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 2.0), c(0.5, 0.5), c(1.0, 1.0)]);
        let (rank, _, null) = rank_of(&square, DEFAULT_RANK_TOL);
        assert_eq!((rank, null.len()), (1, 1));
    }
}
