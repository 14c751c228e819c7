//! Formal Cauchy products and the identities tying the three series
//! together.
//!
//! Writing `A_k(w) = γ_{R^k(a)}(w)/(R^k)'(a)` and iterating the closed form
//! of `R*` gives, order by order,
//!
//! ```text
//! (R*)ⁿγ_a = A_n + Σᵢ bᵢ Σ_{k<n} A_k(cᵢ) · (R*)^{n−1−k} γ_{dᵢ}
//! ```
//!
//! and, summed against `xⁿ`,
//!
//! ```text
//! RS(x, z, a) = A(x, z, a) + x Σᵢ bᵢ RS(x, z, dᵢ) · A(x, cᵢ, a).
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::modified::{a_at_point, rs_iterates};
use super::SeriesQuery;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelCombination};
use crate::numeric::CompensatedSum;
use crate::rational_map::{orbit_cocycle, RationalMap, Tolerances};
use crate::ruelle_operator::TransferOperator;

/// `c_i = Σ_{j≤i} a_j b_{i−j}` for `i < n`.
pub fn cauchy_product(a: &[Complex64], b: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if a.len() < n || b.len() < n {
        return Err(Error::InvalidArgument(format!(
            "sequences of length {} and {} cannot give {n} coefficients",
            a.len(),
            b.len()
        )));
    }
    Ok((0..n)
        .map(|i| (0..=i).map(|j| a[j] * b[i - j]).collect::<CompensatedSum>().value())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop6Report {
    /// Worst residual over the probes for each order `n = 0..=N`, relative to
    /// `max(1, |(R*)ⁿγ_a(z)|)`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Orbit data `A_k` of the base point: `(R^k(a), 1/(R^k)'(a))`.
fn orbit_weights(map: &RationalMap, a: Complex64, n: usize, tol: &Tolerances) -> Result<Vec<(Complex64, Complex64)>> {
    let orbit = orbit_cocycle(map, map.snap(a, tol), n, tol);
    if orbit.escaped {
        return Err(Error::InvalidArgument(format!(
            "orbit of {a} escaped after {} steps",
            orbit.computed()
        )));
    }
    orbit
        .points
        .iter()
        .zip(&orbit.cocycle)
        .enumerate()
        .map(|(step, (&w, &d))| {
            if d == Complex64::new(0.0, 0.0) {
                Err(Error::CriticalOrbit {
                    step,
                    point: orbit.points[step - 1],
                })
            } else {
                Ok((w, Complex64::new(1.0, 0.0) / d))
            }
        })
        .collect()
}

fn a_k(weights: &[(Complex64, Complex64)], k: usize, w: Complex64) -> Result<Complex64> {
    let (point, inv) = weights[k];
    Ok(Kernel::gamma(point).eval(w)? * inv)
}

/// Compares `(R*)ⁿγ_a` from operator iteration against the column sum built
/// from the orbit of `a` and the iterates of `γ_{dᵢ}`, for `n = 0..=N`.
pub fn verify_prop6(op: &TransferOperator, a: Complex64, n: usize, probes: &[Complex64]) -> Result<Prop6Report> {
    let map = op.map();
    let cd = op.critical();
    let left = rs_iterates(op, Kernel::gamma(a), n)?;
    let weights = orbit_weights(map, a, n, op.tolerances())?;

    let active: Vec<usize> = (0..cd.len())
        .filter(|&i| !Kernel::gamma(cd.values[i]).is_identically_zero())
        .collect();
    let columns: Vec<Vec<KernelCombination>> = active
        .iter()
        .map(|&i| rs_iterates(op, Kernel::gamma(cd.values[i]), n.saturating_sub(1)))
        .collect::<Result<_>>()?;
    let crit_weights: Vec<Vec<Complex64>> = active
        .iter()
        .map(|&i| (0..=n).map(|k| a_k(&weights, k, cd.points[i])).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let mut residuals = Vec::with_capacity(n + 1);
    for order in 0..=n {
        let mut worst: f64 = 0.0;
        for &z in probes {
            let lhs = left[order].eval(z)?;
            let mut rhs = CompensatedSum::new();
            rhs.add(a_k(&weights, order, z)?);
            for (col, &i) in active.iter().enumerate() {
                let b = cd.residues[i];
                for k in 0..order {
                    rhs.add(b * crit_weights[col][k] * columns[col][order - 1 - k].eval(z)?);
                }
            }
            worst = worst.max((lhs - rhs.value()).norm() / lhs.norm().max(1.0));
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Prop6Report {
        residuals,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cor9Report {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// `|x|^{N+1}/(1 − |x|)` times the largest `|(R*)ⁿγ_a(z)|`, the size of
    /// the neglected tails.
    pub truncation_bound: f64,
}

/// `RS(x, z, a)` against `A(x, z, a) + x Σᵢ bᵢ RS(x, z, dᵢ)·A(x, cᵢ, a)`,
/// every series truncated at order `N`.
pub fn verify_cor9(op: &TransferOperator, a: Complex64, x: Complex64, z: Complex64, n: usize) -> Result<Cor9Report> {
    if !(x.norm() < 1.0) {
        return Err(Error::InvalidArgument(format!("|x| = {} must be below 1", x.norm())));
    }
    let map = op.map();
    let cd = op.critical();
    let tol = op.tolerances();

    let left = rs_iterates(op, Kernel::gamma(a), n)?;
    let mut lhs = CompensatedSum::new();
    let mut xn = Complex64::new(1.0, 0.0);
    let mut largest: f64 = 0.0;
    for f in &left {
        let v = f.eval(z)?;
        largest = largest.max(v.norm());
        lhs.add(xn * v);
        xn *= x;
    }

    let q = SeriesQuery::new(a, x, n)?.with_tolerances(*tol);
    let mut rhs = CompensatedSum::new();
    rhs.add(super::modified_series_eval(map, &q, z)?.value);
    for i in 0..cd.len() {
        let di = Kernel::gamma(cd.values[i]);
        if di.is_identically_zero() {
            continue;
        }
        let rs = super::rs_truncated_kernel(op, di, x, n, z)?.value;
        let ac = a_at_point(map, a, cd.points[i], x, n, tol)?.value;
        rhs.add(x * cd.residues[i] * rs * ac);
    }
    let (lhs, rhs) = (lhs.value(), rhs.value());
    Ok(Cor9Report {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        truncation_bound: x.norm().powi(n as i32 + 1) / (1.0 - x.norm()) * largest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusReport {
    /// `f(g(z))` with `f(w) = Σ 1/((Rⁱ)'(d₁)(w − g(Rⁱ(d₁))))`.
    pub lhs: Complex64,
    /// `(z + y − 1)²·φ_τ(z)`.
    pub rhs_claim: Complex64,
    /// `((z + y − 1)²·φ_τ(z) + (1 − y − z)·B_N) / (y(y − 1))`.
    pub rhs_exact: Complex64,
    /// `|lhs − rhs_exact|`.
    pub residual: f64,
    /// `|lhs − rhs_claim|`; vanishes only when `y(y − 1) = 1` and `B_N = 0`.
    pub claim_gap: f64,
    /// `B_N = Σ_{i<N} 1/(Rⁱ)'(d₁)`.
    pub b_partial: Complex64,
    /// `|y(y − 1)|` is small enough to amplify rounding.
    pub ill_conditioned: bool,
}

const MOBIUS_CONDITION: f64 = 1e-6;

/// The transformation rule of the `τ`-series
/// `φ_τ(z) = Σ_{i<N} 1/((Rⁱ)'(d₁)(z − Rⁱ(d₁)))` under `g(z) = yz/(z + y − 1)`.
pub fn mobius_transform_identity(
    map: &RationalMap,
    d1: Complex64,
    y: Complex64,
    z: Complex64,
    n: usize,
    tol: &Tolerances,
) -> Result<MobiusReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one term required".into()));
    }
    let weights = orbit_weights(map, d1, n - 1, tol)?;
    let yy = y * (y - 1.0);
    if yy == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("y(y − 1) vanishes".into()));
    }
    let g = |w: Complex64| y * w / (w + y - 1.0);
    let gz = g(z);
    let (mut lhs, mut phi, mut b) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for &(w, inv) in &weights {
        let gw = g(w);
        let (d_lhs, d_phi) = (gz - gw, z - w);
        for (dist, point) in [(d_phi.norm(), z), (d_lhs.norm(), gz)] {
            if dist <= 1e-13 * point.norm().max(1.0) || !gw.re.is_finite() {
                return Err(Error::ProximityCollision { point, distance: dist });
            }
        }
        lhs.add(inv / d_lhs);
        phi.add(inv / d_phi);
        b.add(inv);
    }
    let (lhs, phi, b) = (lhs.value(), phi.value(), b.value());
    let s = z + y - 1.0;
    let rhs_claim = s * s * phi;
    let rhs_exact = (s * s * phi + (1.0 - y - z) * b) / yy;
    Ok(MobiusReport {
        lhs,
        rhs_claim,
        rhs_exact,
        residual: (lhs - rhs_exact).norm(),
        claim_gap: (lhs - rhs_claim).norm(),
        b_partial: b,
        ill_conditioned: yy.norm() < MOBIUS_CONDITION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cauchy_of_ones_counts() {
        let ones = vec![c(1.0, 0.0); 10];
        let p = cauchy_product(&ones, &ones, 10).unwrap();
        for (i, v) in p.iter().enumerate() {
            assert_eq!(*v, c(i as f64 + 1.0, 0.0));
        }
    }

    #[test]
    fn cauchy_of_geometric_halves() {
        let n = 80;
        let g: Vec<Complex64> = (0..n).map(|i| c(0.5f64.powi(i as i32), 0.0)).collect();
        let p = cauchy_product(&g, &g, n).unwrap();
        for (i, v) in p.iter().enumerate() {
            assert!((v.re - (i as f64 + 1.0) * 0.5f64.powi(i as i32)).abs() < 1e-15);
        }
        let total: Complex64 = p.iter().sum();
        assert!((total.re - 4.0).abs() < 1e-12);
        assert!(cauchy_product(&g, &g[..5], 6).is_err());
    }

    fn seq() -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-3i32..4, -3i32..4).prop_map(|(a, b)| c(a as f64, b as f64)), 8)
    }

    proptest! {
        #[test]
        fn cauchy_is_commutative_and_associative(a in seq(), b in seq(), d in seq()) {
            let ab = cauchy_product(&a, &b, 8).unwrap();
            prop_assert_eq!(&ab, &cauchy_product(&b, &a, 8).unwrap());
            let left = cauchy_product(&ab, &d, 8).unwrap();
            let right = cauchy_product(&a, &cauchy_product(&b, &d, 8).unwrap(), 8).unwrap();
            // small integers: exact in floating point
            prop_assert_eq!(left, right);
        }

        #[test]
        fn cauchy_is_bilinear(a in seq(), b in seq(), d in seq(), s in -4i32..5) {
            let s = c(s as f64, 0.0);
            let sum: Vec<Complex64> = a.iter().zip(&d).map(|(x, y)| s * x + y).collect();
            let lhs = cauchy_product(&sum, &b, 8).unwrap();
            let ab = cauchy_product(&a, &b, 8).unwrap();
            let db = cauchy_product(&d, &b, 8).unwrap();
            for i in 0..8 {
                prop_assert_eq!(lhs[i], s * ab[i] + db[i]);
            }
        }
    }

    fn g_op() -> TransferOperator {
        TransferOperator::new(fixtures::chebyshev_quadratic(), Tolerances::default()).unwrap()
    }

    #[test]
    fn column_relation_on_fixture() {
        let op = g_op();
        let r = verify_prop6(&op, c(-1.0 / 3.0, 0.0), 20, &[c(2.0, 1.0)]).unwrap();
        assert_eq!(r.residuals.len(), 21);
        assert_eq!(r.residuals[0], 0.0);
        assert!(r.residuals[1] < 1e-10);
        assert!(r.max_residual < 1e-8, "{:?}", r.residuals);
    }

    #[test]
    fn column_relation_on_cubic() {
        let op = TransferOperator::new(fixtures::chebyshev_cubic(), Tolerances::default()).unwrap();
        let probes = [c(2.0, 1.0), c(-0.4, 1.3)];
        let r = verify_prop6(&op, c(0.3, 0.0), 12, &probes).unwrap();
        assert!(r.max_residual < 1e-8, "{:?}", r.residuals);
    }

    #[test]
    fn functional_relation_zero_weight() {
        let op = g_op();
        let r = verify_cor9(&op, c(-1.0 / 3.0, 0.0), c(0.0, 0.0), c(2.0, 1.0), 10).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.lhs, Kernel::gamma(c(-1.0 / 3.0, 0.0)).eval(c(2.0, 1.0)).unwrap());
    }

    #[test]
    fn functional_relation_on_fixture() {
        let op = g_op();
        let z = c(2.0, 1.0);
        let r = verify_cor9(&op, c(-1.0 / 3.0, 0.0), c(0.9, 0.0), z, 100).unwrap();
        assert!(r.residual < 1e-6);
        // closed form: RS = γ_d/(1 + x/2)
        let want = Kernel::gamma(c(-1.0 / 3.0, 0.0)).eval(z).unwrap() / 1.45;
        assert!((r.lhs - want).norm() < 1e-14);
        let mut prev = f64::INFINITY;
        for n in [5, 10, 20, 40] {
            let res = verify_cor9(&op, c(-1.0 / 3.0, 0.0), c(0.9, 0.0), z, n)
                .unwrap()
                .residual;
            assert!(res < prev, "N = {n}: {res} vs {prev}");
            prev = res;
        }
    }

    #[test]
    fn mobius_single_term() {
        let g = fixtures::chebyshev_quadratic();
        let t = Tolerances::default();
        let r = mobius_transform_identity(&g, c(-1.0 / 3.0, 0.0), c(5.0, 0.0), c(2.0, 2.0), 1, &t).unwrap();
        assert!(r.residual < 1e-12);
        assert_eq!(r.b_partial, c(1.0, 0.0));
    }

    #[test]
    fn mobius_on_fixture() {
        let g = fixtures::chebyshev_quadratic();
        let t = Tolerances::default();
        let r = mobius_transform_identity(&g, c(-1.0 / 3.0, 0.0), c(5.0, 0.0), c(2.0, 2.0), 60, &t).unwrap();
        assert!(r.residual < 1e-9);
        assert!((r.b_partial - 2.0 / 3.0).norm() < 1e-15);
        assert!(r.claim_gap > 1e-3);
        assert!(!r.ill_conditioned);
    }

    #[test]
    fn mobius_conditioning_warning() {
        let g = fixtures::chebyshev_quadratic();
        let t = Tolerances::default();
        let r = mobius_transform_identity(&g, c(-1.0 / 3.0, 0.0), c(1.0 + 1e-8, 0.0), c(2.0, 2.0), 5, &t).unwrap();
        assert!(r.ill_conditioned);
    }
}
