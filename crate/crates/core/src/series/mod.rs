//! Ruelle–Poincaré series along critical orbits.
//!
//! * forward: `Σ 1/(Rⁿ)'(R(a))` and its absolute, `|w ln|w||`-weighted and
//!   `(Rⁿ)²`-weighted companions ([`forward_series`], [`summability_report`]);
//! * modified: `A(x, z, R, a) = Σ xⁿ γ_{Rⁿ(a)}(z)/(Rⁿ)'(a)`
//!   ([`modified_series_eval`], [`a_at_critical`]);
//! * backward: `RS(x, z, R, a) = Σ xⁱ (R*)ⁱγ_a(z)` ([`rs_truncated`]).
//!
//! Convergence verdicts are evidence from a geometric fit over the trailing
//! terms, never proofs.

mod forward;
mod modified;
mod relations;

pub use forward::{ab_constants, forward_series, summability_report, ABConstants, SummabilityReport};
pub use modified::{
    a_at_critical, modified_combination, modified_series_eval, rs_combination, rs_iterates, rs_truncated,
    rs_truncated_kernel, ModifiedValue, ProximityFlag, RsValue, PROXIMITY_RADIUS,
};
pub use relations::{
    cauchy_product, mobius_transform_identity, verify_cor9, verify_prop6, Cor9Report, MobiusReport, Prop6Report,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{geometric_fit, CompensatedSum};
use crate::rational_map::Tolerances;

pub const DEFAULT_ORDER: usize = 200;
/// Trailing window for the geometric fit.
pub const FIT_WINDOW: usize = 20;
/// Fitted ratios within this distance of 1 give no verdict.
pub const VERDICT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SummableEvidence,
    DivergentEvidence,
    Inconclusive,
}

impl Verdict {
    pub fn from_ratio(ratio: f64) -> Self {
        if !ratio.is_finite() {
            Verdict::Inconclusive
        } else if ratio < 1.0 - VERDICT_MARGIN {
            Verdict::SummableEvidence
        } else if ratio > 1.0 + VERDICT_MARGIN {
            Verdict::DivergentEvidence
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn is_summable(self) -> bool {
        self == Verdict::SummableEvidence
    }
}

/// Base point, weight `x` (`|x| ≤ 1`) and truncation order of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesQuery {
    pub base: Complex64,
    pub weight: Complex64,
    pub order: usize,
    pub tol: Tolerances,
}

impl SeriesQuery {
    pub fn new(base: Complex64, weight: Complex64, order: usize) -> Result<Self> {
        if !(weight.norm() <= 1.0 + 1e-15) {
            return Err(Error::InvalidArgument(format!("|x| = {} exceeds 1", weight.norm())));
        }
        Ok(Self {
            base,
            weight,
            order,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub terms: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    /// Geometric extrapolation of `Σ_{n > N} |term_n|`.
    pub tail_estimate: f64,
    pub verdict: Verdict,
    pub fitted_ratio: f64,
    /// The underlying orbit escaped before the requested order; terms stop
    /// where it did.
    pub truncated: bool,
}

/// One CSV row; the header is `n,term_re,term_im,partial_re,partial_im,|term|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub n: usize,
    pub term_re: f64,
    pub term_im: f64,
    pub partial_re: f64,
    pub partial_im: f64,
    #[serde(rename = "|term|")]
    pub abs_term: f64,
}

impl SeriesReport {
    pub fn from_terms(terms: Vec<Complex64>, truncated: bool) -> Self {
        let mut acc = CompensatedSum::new();
        let partial_sums = terms
            .iter()
            .map(|&t| {
                acc.add(t);
                acc.value()
            })
            .collect();
        let mags: Vec<f64> = terms.iter().map(|t| t.norm()).collect();
        let fit = geometric_fit(&mags, FIT_WINDOW);
        let verdict = if terms.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            Verdict::DivergentEvidence
        } else {
            Verdict::from_ratio(fit.ratio)
        };
        Self {
            terms,
            partial_sums,
            tail_estimate: fit.tail,
            verdict,
            fitted_ratio: fit.ratio,
            truncated,
        }
    }

    pub fn sum(&self) -> Complex64 {
        self.partial_sums.last().copied().unwrap_or_default()
    }

    pub fn rows(&self) -> Vec<SeriesRow> {
        self.terms
            .iter()
            .zip(&self.partial_sums)
            .enumerate()
            .map(|(n, (t, s))| SeriesRow {
                n,
                term_re: t.re,
                term_im: t.im,
                partial_re: s.re,
                partial_im: s.im,
                abs_term: t.norm(),
            })
            .collect()
    }
}
