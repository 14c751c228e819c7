//! Dense complex polynomials and a simultaneous-iteration root finder.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with complex coefficients in ascending degree order.
///
/// Trailing (highest-degree) exact zeros are trimmed on construction, so the
/// last stored coefficient is nonzero unless the polynomial is identically
/// zero, in which case a single `0` is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for ComplexPolynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPolynomial("non-finite coefficient".into()));
        }
        Ok(Self::new(coeffs))
    }
}

impl From<ComplexPolynomial> for Vec<Complex64> {
    fn from(p: ComplexPolynomial) -> Self {
        p.coeffs
    }
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(Complex64::new(0.0, 0.0));
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(zero) + other.coeffs.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// Drops leading coefficients below `rel_tol * max|coeff|`. Used after
    /// operations (conjugation) whose exact result has lower degree but whose
    /// floating-point image carries rounding residue.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let cutoff = rel_tol * self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    /// Residual bound used to accept a root: `1e-10 · max|coeff| · max(1,|r|)^deg`.
    pub(crate) fn root_tolerance(&self, root: Complex64, rel: f64) -> f64 {
        rel * self.max_abs_coeff() * root.norm().max(1.0).powi(self.degree() as i32)
    }
}

/// Options for [`poly_roots_with`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub max_iterations: usize,
    pub restarts: usize,
    /// Relative residual bound each returned root must satisfy.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            restarts: 4,
            residual_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

/// All `deg(p)` roots of `p`, with multiplicity.
pub fn poly_roots(p: &ComplexPolynomial) -> Result<Vec<Complex64>> {
    poly_roots_with(p, &RootOptions::default())
}

pub fn poly_roots_with(p: &ComplexPolynomial, opts: &RootOptions) -> Result<Vec<Complex64>> {
    if p.degree() == 0 {
        return Err(Error::InvalidPolynomial("root finding needs degree >= 1".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    // exact zero roots come off first
    let lowest = p.coeffs.iter().position(|c| *c != zero).unwrap();
    let mut roots = vec![zero; lowest];
    let reduced = ComplexPolynomial::new(p.coeffs[lowest..].to_vec());
    if reduced.degree() == 0 {
        return Ok(roots);
    }
    let lead = reduced.leading();
    let monic = reduced.scale(Complex64::new(1.0, 0.0) / lead);

    let found = if monic.degree() == 1 {
        vec![-monic.coeffs[0]]
    } else {
        aberth(&monic, opts)?
    };
    roots.extend(found.into_iter().map(|r| newton_polish(&monic, r)));

    let residual = roots
        .iter()
        .map(|&r| p.eval(r).norm() / p.root_tolerance(r, 1.0))
        .fold(0.0, f64::max);
    if residual > opts.residual_tol {
        return Err(Error::RootNonConvergence { best: roots, residual });
    }
    Ok(roots)
}

fn initial_guesses(p: &ComplexPolynomial, phase: f64) -> Vec<Complex64> {
    let n = p.degree();
    // Fujiwara-type bound on root moduli gives the circle radius
    let bound = (0..n)
        .map(|k| p.coeffs[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let centroid = -p.coeffs[n - 1] / n as f64;
    let radius = 0.5 * bound + 0.5 * (bound - centroid.norm()).abs().max(1e-3);
    (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + phase;
            centroid + Complex64::from_polar(radius, theta)
        })
        .collect()
}

fn aberth(p: &ComplexPolynomial, opts: &RootOptions) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<Complex64>)> = None;

    for attempt in 0..=opts.restarts {
        let phase = 0.4 + if attempt == 0 { 0.0 } else { rng.random::<f64>() * 6.0 };
        let mut z = initial_guesses(p, phase);
        if attempt > 0 {
            for zi in z.iter_mut() {
                *zi *= 1.0 + 0.1 * (rng.random::<f64>() - 0.5);
            }
        }
        let mut converged = false;
        for _ in 0..opts.max_iterations {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let (v, dv) = p.eval_with_derivative(z[i]);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = v / dv;
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                    .sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if !step.re.is_finite() || !step.im.is_finite() {
                    continue;
                }
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
            if max_step < 1e-15 {
                converged = true;
                break;
            }
        }
        let residual = z
            .iter()
            .map(|&r| p.eval(r).norm() / p.root_tolerance(r, 1.0))
            .fold(0.0, f64::max);
        if converged && residual <= opts.residual_tol {
            return Ok(z);
        }
        // multiple roots converge linearly; accept on residual alone
        if residual <= opts.residual_tol * 1e-3 {
            return Ok(z);
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, z));
        }
    }
    let (residual, z) = best.unwrap();
    if residual <= opts.residual_tol {
        return Ok(z);
    }
    Err(Error::RootNonConvergence { best: z, residual })
}

fn newton_polish(p: &ComplexPolynomial, mut r: Complex64) -> Complex64 {
    let mut res = p.eval(r).norm();
    for _ in 0..3 {
        let (v, dv) = p.eval_with_derivative(r);
        if dv == Complex64::new(0.0, 0.0) {
            break;
        }
        let cand = r - v / dv;
        let cres = p.eval(cand).norm();
        if !(cres < res) {
            break;
        }
        r = cand;
        res = cres;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_real(mut v: Vec<Complex64>) -> Vec<f64> {
        for r in &v {
            assert!(r.im.abs() < 1e-9, "unexpected complex root {r}");
        }
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v.into_iter().map(|r| r.re).collect()
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = ComplexPolynomial::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(ComplexPolynomial::from_real(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn roots_of_z_squared_minus_one() {
        let r = sorted_real(poly_roots(&ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0])).unwrap());
        assert!((r[0] + 1.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn roots_of_normalized_fixed_point_equation() {
        // 3w^2 - 3w = 3w(w - 1)
        let r = sorted_real(poly_roots(&ComplexPolynomial::from_real(&[0.0, -3.0, 3.0])).unwrap());
        assert_eq!(r[0], 0.0);
        assert!((r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn roots_of_cubic_with_rational_roots() {
        let p = ComplexPolynomial::from_real(&[2.0, -1.0, -2.0, 1.0]);
        let r = sorted_real(poly_roots(&p).unwrap());
        for (got, want) in r.iter().zip([-1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_is_accepted_on_residual() {
        // (z - 2)^2 (z + i)
        let p = ComplexPolynomial::new(vec![c(-4.0, 0.0), c(4.0, 0.0), c(-1.0, 0.0)])
            .scale(c(-1.0, 0.0))
            .mul(&ComplexPolynomial::new(vec![c(0.0, 1.0), c(1.0, 0.0)]));
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.len(), 3);
        let near_two = roots.iter().filter(|r| (*r - c(2.0, 0.0)).norm() < 1e-6).count();
        assert_eq!(near_two, 2);
    }

    #[test]
    fn constant_polynomial_is_rejected() {
        assert!(poly_roots(&ComplexPolynomial::from_real(&[3.0])).is_err());
    }

    proptest! {
        #[test]
        fn residual_bound_holds(
            coeffs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..=9),
            lead in (0.1f64..10.0, -10.0f64..10.0),
        ) {
            let mut cs: Vec<Complex64> = coeffs.into_iter().map(|(a, b)| c(a, b)).collect();
            cs.push(c(lead.0, lead.1));
            let p = ComplexPolynomial::new(cs);
            let roots = poly_roots(&p).unwrap();
            prop_assert_eq!(roots.len(), p.degree());
            for r in roots {
                prop_assert!(p.eval(r).norm() <= p.root_tolerance(r, 1e-10));
            }
        }
    }
}
