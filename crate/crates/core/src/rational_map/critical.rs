use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{poly_roots_with, RationalMap, RootOptions, Tolerances};
use crate::error::{Error, Result};

/// Finite critical points with the partial-fraction data of `1/R'`:
///
/// ```text
/// 1/R'(z) = ω + Σ bᵢ / (z − cᵢ),   bᵢ = 1/R''(cᵢ),   ω = 1/R'(∞)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub points: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub omega: Complex64,
    pub simple: Vec<bool>,
}

impl CriticalData {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `ω + Σ bᵢ/(z − cᵢ)`.
    pub fn reciprocal_derivative(&self, z: Complex64) -> Complex64 {
        self.points
            .iter()
            .zip(&self.residues)
            .fold(self.omega, |acc, (&c, &b)| acc + b / (z - c))
    }

    /// `hᵢ(z) = 1/R'(z) − bᵢ/(z − cᵢ)`, evaluated from the decomposition.
    pub fn h(&self, i: usize, z: Complex64) -> Complex64 {
        self.points
            .iter()
            .zip(&self.residues)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .fold(self.omega, |acc, (_, (&c, &b))| acc + b / (z - c))
    }

    /// `hᵢ(cᵢ)`, the finite part of `1/R'` at `cᵢ`.
    pub fn h_at_critical(&self, i: usize) -> Complex64 {
        self.h(i, self.points[i])
    }

    /// Largest `|1/R'(z) − decomposition(z)|` over the probes, relative to
    /// `max(1, |1/R'(z)|)`.
    pub fn decomposition_residual(&self, map: &RationalMap, probes: &[Complex64]) -> f64 {
        probes
            .iter()
            .map(|&z| {
                let direct = Complex64::new(1.0, 0.0) / map.derivative(z);
                (direct - self.reciprocal_derivative(z)).norm() / direct.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn index_of(&self, z: Complex64, tol: f64) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - z).norm()))
            .filter(|(_, d)| *d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Finite critical points (roots of `P'Q − PQ'`), residues `1/R''(cᵢ)`,
/// critical values and `ω`. The map must fix ∞.
pub fn critical_data(map: &RationalMap, tol: &Tolerances) -> Result<CriticalData> {
    if !map.fixes_infinity() {
        return Err(Error::InfinityNotFixed);
    }
    let w = map.critical_polynomial();
    let points: Vec<Complex64> = if w.degree() == 0 {
        Vec::new()
    } else {
        poly_roots_with(
            w,
            &RootOptions {
                residual_tol: tol.root,
                ..RootOptions::default()
            },
        )?
        .into_iter()
        .map(|c| map.snap(c, tol))
        .collect()
    };

    let q = map.denominator();
    let dw = w.derivative();
    let mut residues = Vec::with_capacity(points.len());
    let mut values = Vec::with_capacity(points.len());
    for &c in &points {
        // R'' = W'/Q² wherever W vanishes
        let qc = q.eval(c);
        let second = dw.eval(c) / (qc * qc);
        if second.norm() <= tol.simple {
            return Err(Error::NonSimpleCritical {
                point: c,
                second_derivative: second.norm(),
            });
        }
        residues.push(Complex64::new(1.0, 0.0) / second);
        values.push(map.snap(map.eval(c), tol));
    }

    let (n, m) = (map.numerator().degree(), map.denominator().degree());
    let omega = if n == m + 1 {
        // R' → lead(W)/lead(Q)² at ∞
        let lq = q.leading();
        lq * lq / w.leading()
    } else {
        Complex64::new(0.0, 0.0)
    };

    Ok(CriticalData {
        simple: vec![true; points.len()],
        points,
        residues,
        values,
        omega,
    })
}
