//! Seeded randomized verification suites.
//!
//! Trial `i` draws from a ChaCha8 stream selected by `i`, so every trial is
//! reproducible on its own and the report does not depend on thread count.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::kernels::{Kernel, KernelKind};
use crate::probes::annulus_probes_with;
use crate::rational_map::{orbit_cocycle, RationalMap, Tolerances};
use crate::ruelle_operator::TransferOperator;
use crate::series::{mobius_transform_identity, verify_cor9, verify_prop6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma4,
    Prop6,
    Cor9,
    Contraction,
    Mobius,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma4,
        Suite::Prop6,
        Suite::Cor9,
        Suite::Contraction,
        Suite::Mobius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma4 => "lemma4",
            Suite::Prop6 => "prop6",
            Suite::Cor9 => "cor9",
            Suite::Contraction => "contraction",
            Suite::Mobius => "mobius",
        }
    }

    /// Pass threshold on the per-trial residual.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Lemma4 | Suite::Prop6 => 1e-8,
            Suite::Cor9 => 1e-6,
            Suite::Contraction => 0.0,
            Suite::Mobius => 1e-9,
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Contraction => 10,
            _ => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    /// Monte-Carlo samples per norm in the contraction suite.
    pub samples: usize,
}

impl SuiteConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            seed,
            trials: suite.default_trials(),
            tol: suite.default_tol(),
            samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    /// `NaN` (`null` in JSON) when the trial errored.
    pub residual: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub passed: bool,
    pub failures: usize,
    pub worst_residual: f64,
    pub worst_trial: Option<usize>,
    pub trials: Vec<TrialResult>,
}

pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            match run_trial(config, &mut rng) {
                Ok((residual, detail)) => TrialResult {
                    trial: i,
                    residual,
                    passed: residual <= config.tol,
                    detail,
                },
                Err(e) => TrialResult {
                    trial: i,
                    residual: f64::NAN,
                    passed: false,
                    detail: e.to_string(),
                },
            }
        })
        .collect();
    let worst = trials
        .iter()
        .filter(|t| !t.residual.is_nan())
        .max_by(|a, b| a.residual.total_cmp(&b.residual));
    let failures = trials.iter().filter(|t| !t.passed).count();
    SuiteReport {
        config: *config,
        passed: failures == 0,
        failures,
        worst_residual: worst.map_or(0.0, |t| t.residual),
        worst_trial: worst.map(|t| t.trial),
        trials,
    }
}

fn run_trial(config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<(f64, String)> {
    match config.suite {
        Suite::Lemma4 => lemma4_trial(rng),
        Suite::Prop6 => prop6_trial(rng),
        Suite::Cor9 => cor9_trial(rng),
        Suite::Contraction => contraction_trial(rng, config.samples),
        Suite::Mobius => mobius_trial(rng),
    }
}

fn random_annulus<R: Rng>(rng: &mut R, avoid: &[Complex64]) -> Complex64 {
    annulus_probes_with(rng, 1, avoid)[0]
}

/// A base point away from the special points of `op` whose image is finite.
fn random_base<R: Rng>(rng: &mut R, op: &TransferOperator) -> Complex64 {
    let mut avoid = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    avoid.extend(&op.critical().points);
    loop {
        let a = random_annulus(rng, &avoid);
        if op.map().eval(a).norm() < 1e3 {
            return a;
        }
    }
}

/// Closed-form `R*` of `γ`/`τ` kernels against preimage sums on a random
/// standard map, both at random bases and at every critical point. The
/// residual is relative to `Σ |k(y)|/|R'(y)|²`.
fn lemma4_trial(rng: &mut ChaCha8Rng) -> Result<(f64, String)> {
    let degree = rng.random_range(2..=4);
    let map = fixtures::random_standard_map(rng, degree);
    let op = TransferOperator::new(map, Tolerances::default())?;
    let mut kernels = Vec::new();
    for kind in [KernelKind::Gamma, KernelKind::Tau] {
        kernels.push(Kernel::new(kind, random_base(rng, &op)));
        for &c in &op.critical().points {
            kernels.push(Kernel::new(kind, c));
        }
    }
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for k in &kernels {
        let closed = op.apply_to_kernel(k)?;
        let mut avoid = closed.poles();
        avoid.extend(&op.critical().values);
        avoid.push(op.map().eval(k.base));
        for z in annulus_probes_with(rng, 20, &avoid) {
            let pointwise = match op.apply_pointwise(k, z) {
                Ok(v) => v,
                Err(Error::IllConditioned { .. }) | Err(Error::KernelPole { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let scale = op.modulus_apply_pointwise(k, z)?;
            let r = (closed.eval(z)? - pointwise).norm() / scale.max(f64::MIN_POSITIVE);
            worst = worst.max(r);
        }
    }
    Ok((
        worst,
        format!("degree {degree}, {} kernels, {skipped} probes skipped", kernels.len()),
    ))
}

/// A fixture map together with a parametrization of its Julia set (a real
/// interval) and the order used there.
fn julia_fixture<R: Rng>(rng: &mut R) -> (RationalMap, Complex64, usize, &'static str) {
    let t = rng.random_range(-1.0..1.0);
    if rng.random_bool(0.5) {
        (
            fixtures::chebyshev_quadratic(),
            Complex64::new((2.0 * t + 1.0) / 3.0, 0.0),
            20,
            "3w²−2w",
        )
    } else {
        (fixtures::chebyshev_cubic(), Complex64::new(t, 0.0), 12, "4w³−3w")
    }
}

fn orbit_points(map: &RationalMap, a: Complex64, n: usize) -> Vec<Complex64> {
    orbit_cocycle(map, a, n, &Tolerances::default()).points
}

fn prop6_trial(rng: &mut ChaCha8Rng) -> Result<(f64, String)> {
    let (map, a, n, name) = julia_fixture(rng);
    let op = TransferOperator::new(map, Tolerances::default())?;
    let mut avoid = orbit_points(op.map(), a, n);
    avoid.extend(&op.critical().values);
    let probes = annulus_probes_with(rng, 5, &avoid);
    let r = verify_prop6(&op, a, n, &probes)?;
    Ok((r.max_residual, format!("{name}, a = {:.6}, N = {n}", a.re)))
}

fn cor9_trial(rng: &mut ChaCha8Rng) -> Result<(f64, String)> {
    let (map, a, _, name) = julia_fixture(rng);
    let op = TransferOperator::new(map, Tolerances::default())?;
    let x = Complex64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..std::f64::consts::TAU));
    let z = loop {
        let z = random_annulus(rng, &[]);
        if z.im.abs() >= 0.1 {
            break z;
        }
    };
    let r = verify_cor9(&op, a, x, z, 100)?;
    Ok((r.residual, format!("{name}, a = {:.6}, x = {x:.4}, z = {z:.4}", a.re)))
}

/// Excess of `‖R*γ_a‖₁/‖γ_a‖₁` over `1 + 3σ`.
fn contraction_trial(rng: &mut ChaCha8Rng, samples: usize) -> Result<(f64, String)> {
    let degree = rng.random_range(2..=4);
    let op = TransferOperator::new(fixtures::random_standard_map(rng, degree), Tolerances::default())?;
    let a = random_base(rng, &op);
    let f = crate::kernels::KernelCombination::single(Complex64::new(1.0, 0.0), Kernel::gamma(a));
    let r = op.l1_contraction_check(&f, samples, rng.random())?;
    Ok((
        (r.ratio - (1.0 + 3.0 * r.ratio_sigma)).max(0.0),
        format!(
            "degree {degree}, a = {a:.4}, ratio {:.4} ± {:.4}",
            r.ratio, r.ratio_sigma
        ),
    ))
}

fn mobius_trial(rng: &mut ChaCha8Rng) -> Result<(f64, String)> {
    let (map, d1, name) = if rng.random_bool(0.5) {
        (
            fixtures::chebyshev_quadratic(),
            Complex64::new(-1.0 / 3.0, 0.0),
            "3w²−2w",
        )
    } else {
        (fixtures::chebyshev_cubic(), Complex64::new(-1.0, 0.0), "4w³−3w")
    };
    let y = Complex64::from_polar(rng.random_range(2.0..6.0), rng.random_range(0.0..std::f64::consts::TAU));
    let mut avoid = orbit_points(&map, d1, 2);
    avoid.push(Complex64::new(1.0, 0.0) - y);
    let z = random_annulus(rng, &avoid);
    let r = mobius_transform_identity(&map, d1, y, z, 60, &Tolerances::default())?;
    Ok((r.residual, format!("{name}, y = {y:.4}, z = {z:.4}")))
}
