//! The rational kernels
//!
//! ```text
//! γ_a(z) = a(a − 1) / (z (z − 1) (z − a)),     τ_a(z) = 1 / (z − a)
//! ```
//!
//! and finite linear combinations of them. `γ_0` and `γ_1` are the zero
//! function; they are kept representable so that orbits landing on the fixed
//! points 0 and 1 need no special casing.

mod l1;

pub use l1::{fit_growth_constant, l1_norm_estimate, l1_norm_estimate_fn, L1Estimate, MIN_SAMPLES};

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Distance below which evaluation counts as hitting a pole.
pub const POLE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Gamma,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub base: Complex64,
}

fn is_zero_or_one(a: Complex64) -> bool {
    a == Complex64::new(0.0, 0.0) || a == Complex64::new(1.0, 0.0)
}

impl Kernel {
    pub fn gamma(base: Complex64) -> Self {
        Self {
            kind: KernelKind::Gamma,
            base,
        }
    }

    pub fn tau(base: Complex64) -> Self {
        Self {
            kind: KernelKind::Tau,
            base,
        }
    }

    pub fn new(kind: KernelKind, base: Complex64) -> Self {
        Self { kind, base }
    }

    /// `γ_0` and `γ_1` vanish identically.
    pub fn is_identically_zero(&self) -> bool {
        self.kind == KernelKind::Gamma && is_zero_or_one(self.base)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        match self.kind {
            _ if self.is_identically_zero() => Vec::new(),
            KernelKind::Gamma => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), self.base],
            KernelKind::Tau => vec![self.base],
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        kernel_eval(self, z)
    }

    /// Evaluation without the pole check; non-finite at poles.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let a = self.base;
        match self.kind {
            _ if self.is_identically_zero() => Complex64::new(0.0, 0.0),
            KernelKind::Gamma => a * (a - 1.0) / (z * (z - 1.0) * (z - a)),
            KernelKind::Tau => Complex64::new(1.0, 0.0) / (z - a),
        }
    }
}

pub fn kernel_eval(k: &Kernel, z: Complex64) -> Result<Complex64> {
    if k.is_identically_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(pole) = k.poles().into_iter().find(|p| (z - p).norm() <= POLE_TOL) {
        return Err(Error::KernelPole { pole });
    }
    Ok(k.eval_unchecked(z))
}

/// Partial fractions of `γ_a`: `(a − 1) τ_0 − a τ_1 + τ_a`.
pub fn gamma_decompose(a: Complex64) -> Result<KernelCombination> {
    if is_zero_or_one(a) {
        return Err(Error::DegenerateKernel { base: a });
    }
    let mut out = KernelCombination::new();
    out.push(a - 1.0, Kernel::tau(Complex64::new(0.0, 0.0)));
    out.push(-a, Kernel::tau(Complex64::new(1.0, 0.0)));
    out.push(Complex64::new(1.0, 0.0), Kernel::tau(a));
    Ok(out)
}

/// One `coeff · kernel` term; serialized flat as `{"kind", "base", "coeff"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub kind: KernelKind,
    pub base: Complex64,
    pub coeff: Complex64,
}

impl Term {
    pub fn kernel(&self) -> Kernel {
        Kernel::new(self.kind, self.base)
    }
}

/// Finite sum `Σ coeff_k · kernel_k`.
///
/// [`merge`](Self::merge) consolidates equal `(kind, base)` pairs (compared
/// bitwise) and drops zero terms; the arithmetic helpers always return merged
/// combinations. Term order is order of first appearance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Term>", into = "Vec<Term>")]
pub struct KernelCombination {
    terms: Vec<Term>,
    merged: bool,
}

impl From<Vec<Term>> for KernelCombination {
    fn from(terms: Vec<Term>) -> Self {
        Self { terms, merged: false }
    }
}

impl From<KernelCombination> for Vec<Term> {
    fn from(c: KernelCombination) -> Self {
        c.terms
    }
}

fn key(kind: KernelKind, base: Complex64) -> (KernelKind, u64, u64) {
    // + 0.0 folds −0.0 onto 0.0
    (kind, (base.re + 0.0).to_bits(), (base.im + 0.0).to_bits())
}

impl KernelCombination {
    pub fn new() -> Self {
        Self {
            terms: Vec::new(),
            merged: true,
        }
    }

    pub fn single(coeff: Complex64, kernel: Kernel) -> Self {
        let mut c = Self::new();
        c.push(coeff, kernel);
        c.merge();
        c
    }

    pub fn push(&mut self, coeff: Complex64, kernel: Kernel) {
        self.terms.push(Term {
            kind: kernel.kind,
            base: kernel.base,
            coeff,
        });
        self.merged = false;
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_merged(&self) -> bool {
        self.merged
    }

    pub fn merge(&mut self) {
        if self.merged {
            return;
        }
        let mut index: HashMap<(KernelKind, u64, u64), usize> = HashMap::new();
        let mut sums: Vec<(Term, CompensatedSum)> = Vec::new();
        for t in &self.terms {
            if t.kernel().is_identically_zero() {
                continue;
            }
            let k = key(t.kind, t.base);
            let slot = *index.entry(k).or_insert_with(|| {
                sums.push((*t, CompensatedSum::new()));
                sums.len() - 1
            });
            sums[slot].1.add(t.coeff);
        }
        self.terms = sums
            .into_iter()
            .map(|(t, s)| Term { coeff: s.value(), ..t })
            .filter(|t| t.coeff != Complex64::new(0.0, 0.0))
            .collect();
        self.merged = true;
    }

    pub fn merged(mut self) -> Self {
        self.merge();
        self
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::from(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * s,
                    ..*t
                })
                .collect::<Vec<_>>(),
        );
        out.merge();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::from(self.terms.iter().chain(&other.terms).copied().collect::<Vec<_>>());
        out.merge();
        out
    }

    /// `Σ coeff_k · kernel_k(z)` with compensated summation in term order.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut s = CompensatedSum::new();
        for t in &self.terms {
            s.add(t.coeff * kernel_eval(&t.kernel(), z)?);
        }
        Ok(s.value())
    }

    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.kernel().eval_unchecked(z))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `Σ |coeff_k · kernel_k(z)|`, the scale against which cancellation in
    /// [`eval`](Self::eval) is judged.
    pub fn eval_abs_sum(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * t.kernel().eval_unchecked(z)).norm())
            .sum()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for t in &self.terms {
            for p in t.kernel().poles() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Rewrites every `γ` term through [`gamma_decompose`], giving an equal
    /// combination of `τ` kernels only.
    pub fn to_tau_basis(&self) -> Self {
        let mut out = Self::new();
        for t in &self.terms {
            match t.kind {
                KernelKind::Tau => out.push(t.coeff, t.kernel()),
                KernelKind::Gamma => {
                    if let Ok(parts) = gamma_decompose(t.base) {
                        for p in parts.terms() {
                            out.push(t.coeff * p.coeff, p.kernel());
                        }
                    }
                }
            }
        }
        out.merge();
        out
    }

    /// Whether the combination lies in `L¹(ℂ)`: after rewriting in `τ`
    /// kernels, `Σ c_k = 0` and `Σ c_k a_k = 0` so that it decays like
    /// `|z|⁻³`. Checked relative to the coefficient size.
    pub fn is_integrable(&self) -> bool {
        let tau = self.to_tau_basis();
        let scale: f64 = tau.terms.iter().map(|t| t.coeff.norm() * t.base.norm().max(1.0)).sum();
        if scale == 0.0 {
            return true;
        }
        let m0: Complex64 = tau.terms.iter().map(|t| t.coeff).sum();
        let m1: Complex64 = tau.terms.iter().map(|t| t.coeff * t.base).sum();
        m0.norm() <= 1e-12 * scale && m1.norm() <= 1e-12 * scale
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }
}
