use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SeriesQuery;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelCombination};
use crate::numeric::{geometric_fit, CompensatedSum};
use crate::rational_map::{critical_data, orbit_cocycle, OrbitCocycle, RationalMap, Tolerances};
use crate::ruelle_operator::TransferOperator;

use super::FIT_WINDOW;

/// Orbit points closer than this to the critical point are flagged in
/// [`a_at_critical`].
pub const PROXIMITY_RADIUS: f64 = 1e-3;
/// Evaluation points closer than this (relative) to a kernel base are refused.
const COLLISION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProximityFlag {
    pub step: usize,
    pub distance: f64,
    pub term: Complex64,
    /// `2·|w(w−1)R''(c)/(c(c−1))| / |(R^{n+1})'(a)|`, the size a term this
    /// close to the critical point can have.
    pub cap: f64,
    pub within_cap: bool,
}

/// A truncated modified series `Σ_{n≤N} xⁿ γ_{Rⁿ(a)}(z)/(Rⁿ)'(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedValue {
    pub value: Complex64,
    pub terms: Vec<Complex64>,
    /// Geometric extrapolation of the neglected `Σ_{n>N} |term_n|`.
    pub tail_estimate: f64,
    /// Geometric extrapolation of `Σ_{n>N} |Rⁿ(a)|·|ln|Rⁿ(a)|| / |(Rⁿ)'(a)|`;
    /// the kernel-norm tail is at most a constant times this.
    pub kernel_weight_tail: f64,
    pub truncated: bool,
    pub proximity: Vec<ProximityFlag>,
}

fn orbit_checked(map: &RationalMap, a: Complex64, n: usize, tol: &Tolerances) -> Result<OrbitCocycle> {
    let orbit = orbit_cocycle(map, map.snap(a, tol), n, tol);
    if let Some(step) = orbit.cocycle.iter().position(|d| *d == Complex64::new(0.0, 0.0)) {
        return Err(Error::CriticalOrbit {
            step,
            point: orbit.points[step - 1],
        });
    }
    Ok(orbit)
}

fn finish(orbit: &OrbitCocycle, terms: Vec<Complex64>, proximity: Vec<ProximityFlag>) -> ModifiedValue {
    let value = terms.iter().copied().collect::<CompensatedSum>().value();
    let mags: Vec<f64> = terms.iter().map(|t| t.norm()).collect();
    let weights: Vec<f64> = orbit
        .points
        .iter()
        .zip(&orbit.cocycle)
        .map(|(w, d)| {
            let r = w.norm();
            if r == 0.0 {
                0.0
            } else {
                r * r.ln().abs() / d.norm()
            }
        })
        .collect();
    ModifiedValue {
        value,
        terms,
        tail_estimate: geometric_fit(&mags, FIT_WINDOW).tail,
        kernel_weight_tail: geometric_fit(&weights, FIT_WINDOW).tail,
        truncated: orbit.escaped,
        proximity,
    }
}

/// `A(x, z, R, a)` truncated at `q.order`. Orbit points on 0 or 1 give
/// `γ ≡ 0` and contribute nothing.
pub fn modified_series_eval(map: &RationalMap, q: &SeriesQuery, z: Complex64) -> Result<ModifiedValue> {
    if !map.is_standard() {
        return Err(Error::NotStandard);
    }
    let orbit = orbit_checked(map, q.base, q.order, &q.tol)?;
    let mut terms = Vec::with_capacity(orbit.points.len());
    let mut xn = Complex64::new(1.0, 0.0);
    for (&w, &d) in orbit.points.iter().zip(&orbit.cocycle) {
        let k = Kernel::gamma(w);
        if k.is_identically_zero() {
            terms.push(Complex64::new(0.0, 0.0));
        } else {
            let distance = (z - w).norm();
            if distance <= COLLISION_TOL * w.norm().max(1.0) {
                return Err(Error::ProximityCollision { point: z, distance });
            }
            terms.push(xn * k.eval(z)? / d);
        }
        xn *= q.weight;
    }
    Ok(finish(&orbit, terms, Vec::new()))
}

/// `A(x, c_j, R, a)` at the critical point `c_j`, with terms from orbit
/// points near `c_j` flagged and compared against the size bound.
pub fn a_at_critical(
    map: &RationalMap,
    a: Complex64,
    j: usize,
    x: Complex64,
    n: usize,
    tol: &Tolerances,
) -> Result<ModifiedValue> {
    let cd = critical_data(map, tol)?;
    if j >= cd.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            count: cd.len(),
        });
    }
    let cj = cd.points[j];
    a_at_point(map, a, cj, x, n, tol)
}

pub(crate) fn a_at_point(
    map: &RationalMap,
    a: Complex64,
    cj: Complex64,
    x: Complex64,
    n: usize,
    tol: &Tolerances,
) -> Result<ModifiedValue> {
    if !map.is_standard() {
        return Err(Error::NotStandard);
    }
    let orbit = orbit_checked(map, a, n, tol)?;
    let r2 = map.second_derivative(cj);
    let mut terms = Vec::with_capacity(orbit.points.len());
    let mut proximity = Vec::new();
    let mut xn = Complex64::new(1.0, 0.0);
    for (step, (&w, &d)) in orbit.points.iter().zip(&orbit.cocycle).enumerate() {
        let k = Kernel::gamma(w);
        if k.is_identically_zero() {
            terms.push(Complex64::new(0.0, 0.0));
            xn *= x;
            continue;
        }
        let distance = (w - cj).norm();
        if distance <= 1e-14 * cj.norm().max(1.0) {
            return Err(Error::CriticalOrbit { step, point: w });
        }
        let term = xn * k.eval(cj)? / d;
        if distance < PROXIMITY_RADIUS {
            let next = d * map.derivative(w);
            let cap = 2.0 * (w * (w - 1.0) * r2 / (cj * (cj - 1.0))).norm() / next.norm();
            proximity.push(ProximityFlag {
                step,
                distance,
                term,
                cap,
                within_cap: term.norm() <= cap,
            });
        }
        terms.push(term);
        xn *= x;
    }
    Ok(finish(&orbit, terms, proximity))
}

/// `Σ_{n≤N} xⁿ γ_{Rⁿ(a)}/(Rⁿ)'(a)` as a kernel combination.
pub fn modified_combination(
    map: &RationalMap,
    a: Complex64,
    x: Complex64,
    n: usize,
    tol: &Tolerances,
) -> Result<KernelCombination> {
    if !map.is_standard() {
        return Err(Error::NotStandard);
    }
    let orbit = orbit_checked(map, a, n, tol)?;
    let mut out = KernelCombination::new();
    let mut xn = Complex64::new(1.0, 0.0);
    for (&w, &d) in orbit.points.iter().zip(&orbit.cocycle) {
        out.push(xn / d, Kernel::gamma(w));
        xn *= x;
    }
    out.merge();
    Ok(out)
}

/// `(R*)ⁱ k` for `i = 0..=n`, each as an exact kernel combination.
pub fn rs_iterates(op: &TransferOperator, start: Kernel, n: usize) -> Result<Vec<KernelCombination>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(KernelCombination::single(Complex64::new(1.0, 0.0), start));
    for i in 0..n {
        let next = op.apply_to_combination(&out[i])?;
        out.push(next);
    }
    Ok(out)
}

/// A truncated backward series `Σ_{i≤N} xⁱ (R*)ⁱk (z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsValue {
    pub value: Complex64,
    /// `xⁱ (R*)ⁱk (z)` for each `i`.
    pub terms: Vec<Complex64>,
    /// Number of kernels in `(R*)ⁱk` after merging.
    pub kernel_counts: Vec<usize>,
}

pub fn rs_truncated_kernel(
    op: &TransferOperator,
    start: Kernel,
    x: Complex64,
    n: usize,
    z: Complex64,
) -> Result<RsValue> {
    let iterates = rs_iterates(op, start, n)?;
    let mut terms = Vec::with_capacity(n + 1);
    let mut xn = Complex64::new(1.0, 0.0);
    for f in &iterates {
        terms.push(xn * f.eval(z)?);
        xn *= x;
    }
    Ok(RsValue {
        value: terms.iter().copied().collect::<CompensatedSum>().value(),
        terms,
        kernel_counts: iterates.iter().map(|f| f.len()).collect(),
    })
}

/// `RS(x, z, R, a)` truncated at `q.order`.
pub fn rs_truncated(op: &TransferOperator, q: &SeriesQuery, z: Complex64) -> Result<RsValue> {
    rs_truncated_kernel(op, Kernel::gamma(q.base), q.weight, q.order, z)
}

/// `Σ_{i≤N} xⁱ (R*)ⁱk` as one merged combination.
pub fn rs_combination(op: &TransferOperator, start: Kernel, x: Complex64, n: usize) -> Result<KernelCombination> {
    let mut out = KernelCombination::new();
    let mut xn = Complex64::new(1.0, 0.0);
    for f in rs_iterates(op, start, n)? {
        for t in f.terms() {
            out.push(xn * t.coeff, t.kernel());
        }
        xn *= x;
    }
    out.merge();
    Ok(out)
}
