//! Monte-Carlo `L¹(ℂ)` norms for functions with finitely many integrable
//! singularities and at least `|z|⁻³` decay.
//!
//! The sampler is a stratified mixture: one polar component per pole with
//! the radius uniform on `[0, ρ_k]` (area density `1/(2πρ_k r)`, which
//! cancels a `1/r` singularity) and one heavy-tailed global component with
//! `r = s·u/(1 − u)` (area density `s/(2πr(s + r)²)`). Each component gets a
//! fixed share of the samples and the estimate uses the full mixture density,
//! so the weight `|f|/q` stays bounded near poles and at infinity.
//!
//! Samples are drawn in fixed-size blocks, each with its own ChaCha8 stream,
//! and the block partial sums are reduced in block order, so the result does
//! not depend on the thread schedule.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KernelCombination;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 10_000;
const BLOCK: usize = 4096;
const GLOBAL_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Estimate {
    pub estimate: f64,
    /// One-sigma statistical error.
    pub std_error: f64,
    pub samples: usize,
    /// False when the input is known not to be in `L¹` (the estimate is then
    /// a finite-sample artefact).
    pub integrable: bool,
}

impl L1Estimate {
    fn zero(samples: usize) -> Self {
        Self {
            estimate: 0.0,
            std_error: 0.0,
            samples,
            integrable: true,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.estimate == 0.0 {
            0.0
        } else {
            self.std_error / self.estimate
        }
    }
}

pub fn l1_norm_estimate(f: &KernelCombination, samples: usize, seed: u64) -> Result<L1Estimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    if f.is_empty() {
        return Ok(L1Estimate::zero(samples));
    }
    let poles = f.poles();
    let mut est = l1_norm_estimate_fn(|z| f.eval_unchecked(z).norm(), &poles, samples, seed)?;
    est.integrable = f.is_integrable();
    Ok(est)
}

/// `∬ |f|` for `f` given as a modulus function, with its singular points
/// listed in `poles`. Integrability is the caller's responsibility.
pub fn l1_norm_estimate_fn<F>(f: F, poles: &[Complex64], samples: usize, seed: u64) -> Result<L1Estimate>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let mixture = Mixture::new(poles);
    let counts: Vec<usize> = mixture
        .weights
        .iter()
        .map(|w| ((samples as f64) * w).round().max(2.0) as usize)
        .collect();

    let mut blocks = Vec::new();
    for (comp, &n) in counts.iter().enumerate() {
        let mut left = n;
        while left > 0 {
            let take = left.min(BLOCK);
            blocks.push((comp, take));
            left -= take;
        }
    }

    let partials: Vec<(usize, f64, f64)> = blocks
        .par_iter()
        .enumerate()
        .map(|(id, &(comp, n))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let z = mixture.sample(comp, &mut rng);
                let q = mixture.density(z);
                let v = f(z);
                let g = if v.is_finite() && q > 0.0 && q.is_finite() {
                    v / q
                } else {
                    0.0
                };
                s += g;
                s2 += g * g;
            }
            (comp, s, s2)
        })
        .collect();

    let mut sums = vec![(0.0f64, 0.0f64); counts.len()];
    for (comp, s, s2) in partials {
        sums[comp].0 += s;
        sums[comp].1 += s2;
    }
    let (mut estimate, mut variance) = (0.0, 0.0);
    for ((w, &n), (s, s2)) in mixture.weights.iter().zip(&counts).zip(sums) {
        let nf = n as f64;
        let mean = s / nf;
        let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
        estimate += w * mean;
        variance += w * w * var / nf;
    }
    Ok(L1Estimate {
        estimate,
        std_error: variance.sqrt(),
        samples: counts.iter().sum(),
        integrable: true,
    })
}

/// Smallest `M` with `V ≤ M·|a|·ln|a|` over the given `(a, V)` pairs;
/// points with `|a| ≤ 1` are ignored.
pub fn fit_growth_constant(points: &[(Complex64, f64)]) -> f64 {
    points
        .iter()
        .filter(|(a, _)| a.norm() > 1.0)
        .map(|(a, v)| v / (a.norm() * a.norm().ln()))
        .fold(0.0, f64::max)
}

struct Mixture {
    poles: Vec<Complex64>,
    radii: Vec<f64>,
    center: Complex64,
    scale: f64,
    /// Pole components first, global component last.
    weights: Vec<f64>,
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

impl Mixture {
    fn new(poles: &[Complex64]) -> Self {
        let radii = poles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let nearest = poles
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| (p - q).norm())
                    .fold(f64::INFINITY, f64::min);
                (0.5 * nearest).min(1.0)
            })
            .collect();
        let center = if poles.is_empty() {
            Complex64::new(0.0, 0.0)
        } else {
            poles.iter().sum::<Complex64>() / poles.len() as f64
        };
        let scale = poles.iter().map(|p| (p - center).norm()).fold(1.0, f64::max);
        let mut weights = if poles.is_empty() {
            Vec::new()
        } else {
            vec![(1.0 - GLOBAL_WEIGHT) / poles.len() as f64; poles.len()]
        };
        weights.push(if poles.is_empty() { 1.0 } else { GLOBAL_WEIGHT });
        Self {
            poles: poles.to_vec(),
            radii,
            center,
            scale,
            weights,
        }
    }

    fn sample<R: Rng>(&self, comp: usize, rng: &mut R) -> Complex64 {
        let theta = TAU * rng.random::<f64>();
        let u = open_unit(rng);
        if comp < self.poles.len() {
            self.poles[comp] + Complex64::from_polar(self.radii[comp] * u, theta)
        } else {
            self.center + Complex64::from_polar(self.scale * u / (1.0 - u), theta)
        }
    }

    fn density(&self, z: Complex64) -> f64 {
        let mut q = 0.0;
        for ((p, rho), w) in self.poles.iter().zip(&self.radii).zip(&self.weights) {
            let r = (z - p).norm();
            if r < *rho {
                q += w / (TAU * rho * r);
            }
        }
        let r = (z - self.center).norm();
        let s = self.scale;
        q + self.weights[self.poles.len()] * s / (TAU * r * (s + r) * (s + r))
    }
}
