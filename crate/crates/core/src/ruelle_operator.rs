//! The transfer operator
//!
//! ```text
//! R*f(z) = Σ_{R(y) = z} f(y) / R'(y)²
//! ```
//!
//! realized both pointwise (through preimages) and exactly on the kernel
//! span, together with the pushforward `R_*f = f(R)·R'²/deg R`, the modulus
//! operator and the Beltrami operator `μ ↦ μ(R)·conj(R')/R'`.
//!
//! On the span, with `1/R' = ω + Σ bᵢ/(z − cᵢ)` and `dᵢ = R(cᵢ)`:
//!
//! ```text
//! R*γ_a = γ_{R(a)}/R'(a) + Σ bᵢ γ_a(cᵢ) γ_{dᵢ}        (a not critical)
//! R*γ_a = κᵢ γ_{dᵢ} + Σ_{j≠i} bⱼ γ_a(cⱼ) γ_{dⱼ}        (a = cᵢ)
//! κᵢ = lim_{a→cᵢ} (1/R'(a) + bᵢ γ_a(cᵢ)) = hᵢ(cᵢ) − bᵢ (2cᵢ − 1)/(cᵢ(cᵢ − 1))
//! ```
//!
//! and the same with `τ` in place of `γ`, where the limit is just `hᵢ(cᵢ)`.
//! `γ` terms need the map to fix 0, 1 and ∞.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{l1_norm_estimate, l1_norm_estimate_fn, Kernel, KernelCombination, KernelKind, L1Estimate};
use crate::numeric::CompensatedSum;
use crate::rational_map::{critical_data, CriticalData, RationalMap, Tolerances};

/// Anything that can be evaluated at a point of the plane.
pub trait Evaluable {
    fn eval_at(&self, z: Complex64) -> Result<Complex64>;
}

impl<F: Fn(Complex64) -> Complex64> Evaluable for F {
    fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        Ok(self(z))
    }
}

impl Evaluable for KernelCombination {
    fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        self.eval(z)
    }
}

impl Evaluable for Kernel {
    fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        self.eval(z)
    }
}

/// A pointwise transfer-operator value with its conditioning flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseValue {
    pub value: Complex64,
    /// `Σ |f(y)|/|R'(y)|²`, the scale for judging cancellation.
    pub modulus: f64,
    /// Some preimage had `|R'(y)| < tol.ill_conditioned`.
    pub near_critical_value: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub before: L1Estimate,
    pub after: L1Estimate,
    pub ratio: f64,
    /// Combined one-sigma relative error of the ratio.
    pub ratio_sigma: f64,
    pub within_bound: bool,
}

/// `R*` for a map fixing ∞, with its critical data cached.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    map: RationalMap,
    critical: CriticalData,
    tol: Tolerances,
}

impl TransferOperator {
    pub fn new(map: RationalMap, tol: Tolerances) -> Result<Self> {
        let critical = critical_data(&map, &tol)?;
        Ok(Self { map, critical, tol })
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn critical(&self) -> &CriticalData {
        &self.critical
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn apply_pointwise<F: Evaluable + ?Sized>(&self, f: &F, z: Complex64) -> Result<Complex64> {
        Ok(self.apply_pointwise_report(f, z)?.value)
    }

    pub fn apply_pointwise_report<F: Evaluable + ?Sized>(&self, f: &F, z: Complex64) -> Result<PointwiseValue> {
        let pre = self.map.preimages(z, &self.tol)?;
        let mut sum = CompensatedSum::new();
        let mut modulus = 0.0;
        for p in &pre.points {
            if p.derivative.norm() < self.tol.derivative_floor {
                return Err(Error::IllConditioned {
                    point: p.point,
                    derivative: p.derivative.norm(),
                });
            }
            let term = f.eval_at(p.point)? / (p.derivative * p.derivative);
            modulus += term.norm();
            sum.add(term);
        }
        Ok(PointwiseValue {
            value: sum.value(),
            modulus,
            near_critical_value: pre.near_critical_value,
        })
    }

    /// `Σ |f(y)| / |R'(y)|²`.
    pub fn modulus_apply_pointwise<F: Evaluable + ?Sized>(&self, f: &F, z: Complex64) -> Result<f64> {
        Ok(self.apply_pointwise_report(f, z)?.modulus)
    }

    /// `f(R(z))·R'(z)²/deg R`.
    pub fn pushforward<F: Evaluable + ?Sized>(&self, f: &F, z: Complex64) -> Result<Complex64> {
        let d = self.map.derivative(z);
        Ok(f.eval_at(self.map.eval(z))? * d * d / self.map.degree() as f64)
    }

    /// `μ(R(z))·conj(R'(z))/R'(z)`.
    pub fn beltrami_apply<F: Evaluable + ?Sized>(&self, mu: &F, z: Complex64) -> Result<Complex64> {
        let d = self.map.derivative(z);
        if !(d.norm() >= self.tol.derivative_floor) {
            return Err(Error::IllConditioned {
                point: z,
                derivative: d.norm(),
            });
        }
        Ok(mu.eval_at(self.map.eval(z))? * d.conj() / d)
    }

    fn require_standard(&self, kind: KernelKind) -> Result<()> {
        if kind == KernelKind::Gamma && !self.map.is_standard() {
            return Err(Error::NotStandard);
        }
        Ok(())
    }

    /// Closed-form `R*` of one kernel.
    pub fn apply_to_kernel(&self, k: &Kernel) -> Result<KernelCombination> {
        if k.is_identically_zero() {
            return Ok(KernelCombination::new());
        }
        self.require_standard(k.kind)?;
        let a = k.base;
        if let Some(i) = self.critical.index_of(a, self.tol.critical_dispatch) {
            return self.apply_at_critical(i, k.kind);
        }
        let ra = self.map.eval(a);
        if !ra.re.is_finite() || !ra.im.is_finite() || ra.norm() > self.tol.overflow {
            return Err(Error::PoleBase { base: a });
        }
        let ra = self.map.snap(ra, &self.tol);
        let mut out = KernelCombination::new();
        out.push(
            Complex64::new(1.0, 0.0) / self.map.derivative(a),
            Kernel::new(k.kind, ra),
        );
        for j in 0..self.critical.len() {
            let target = Kernel::new(k.kind, self.critical.values[j]);
            if target.is_identically_zero() {
                continue;
            }
            let cj = self.critical.points[j];
            out.push(self.critical.residues[j] * k.eval(cj)?, target);
        }
        out.merge();
        Ok(out)
    }

    fn apply_at_critical(&self, i: usize, kind: KernelKind) -> Result<KernelCombination> {
        let ci = self.critical.points[i];
        let kernel = Kernel::new(kind, ci);
        let mut out = KernelCombination::new();
        let di = Kernel::new(kind, self.critical.values[i]);
        if !di.is_identically_zero() {
            out.push(self.critical_kernel_coefficient(i, kind)?, di);
        }
        for j in (0..self.critical.len()).filter(|&j| j != i) {
            let target = Kernel::new(kind, self.critical.values[j]);
            if target.is_identically_zero() {
                continue;
            }
            out.push(
                self.critical.residues[j] * kernel.eval(self.critical.points[j])?,
                target,
            );
        }
        out.merge();
        Ok(out)
    }

    /// Limit coefficient of `γ_{dᵢ}` (or `τ_{dᵢ}`) in `R*` of the kernel based
    /// at the critical point `cᵢ`.
    pub fn critical_kernel_coefficient(&self, i: usize, kind: KernelKind) -> Result<Complex64> {
        if i >= self.critical.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: self.critical.len(),
            });
        }
        let h = self.critical.h_at_critical(i);
        match kind {
            KernelKind::Tau => Ok(h),
            KernelKind::Gamma => {
                self.require_standard(kind)?;
                let c = self.critical.points[i];
                if Kernel::gamma(c).is_identically_zero() {
                    return Err(Error::DegenerateKernel { base: c });
                }
                let b = self.critical.residues[i];
                Ok(h - b * (2.0 * c - 1.0) / (c * (c - 1.0)))
            }
        }
    }

    /// Closed-form `R*` extended linearly to a combination.
    pub fn apply_to_combination(&self, f: &KernelCombination) -> Result<KernelCombination> {
        let mut out = KernelCombination::new();
        for t in f.terms() {
            for s in self.apply_to_kernel(&t.kernel())?.terms() {
                out.push(t.coeff * s.coeff, s.kernel());
            }
        }
        out.merge();
        Ok(out)
    }

    /// Monte-Carlo `‖f‖₁` and `‖R*f‖₁`; the ratio should not exceed
    /// `1 + 3σ`.
    pub fn l1_contraction_check(&self, f: &KernelCombination, samples: usize, seed: u64) -> Result<ContractionReport> {
        let before = l1_norm_estimate(f, samples, seed)?;
        let image = self.apply_to_combination(f)?;
        let after = l1_norm_estimate(&image, samples, seed.wrapping_add(1))?;
        Ok(contraction_report(before, after))
    }

    /// Equality case of the contraction bound: `g = R_*φ` has `R*g = φ` and
    /// `‖g‖₁ = ‖φ‖₁`. Both norms of `g` and `R*g` are estimated from
    /// pointwise evaluation (preimage sums for the latter).
    pub fn l1_contraction_check_pushforward(
        &self,
        phi: &KernelCombination,
        samples: usize,
        seed: u64,
    ) -> Result<ContractionReport> {
        let mut poles = Vec::new();
        for p in phi.poles() {
            for y in self.map.preimages(p, &self.tol)?.points {
                poles.push(y.point);
            }
        }
        let g = |z: Complex64| {
            self.pushforward(&|w: Complex64| phi.eval_unchecked(w), z)
                .map(|v| v.norm())
                .unwrap_or(0.0)
        };
        let before = l1_norm_estimate_fn(g, &poles, samples, seed)?;
        let rg = |z: Complex64| {
            let push = |y: Complex64| {
                let d = self.map.derivative(y);
                phi.eval_unchecked(self.map.eval(y)) * d * d / self.map.degree() as f64
            };
            self.apply_pointwise(&push, z).map(|v| v.norm()).unwrap_or(0.0)
        };
        let after = l1_norm_estimate_fn(rg, &phi.poles(), samples, seed.wrapping_add(1))?;
        Ok(contraction_report(before, after))
    }
}

fn contraction_report(before: L1Estimate, after: L1Estimate) -> ContractionReport {
    if before.estimate == 0.0 {
        return ContractionReport {
            before,
            after,
            ratio: 1.0,
            ratio_sigma: 0.0,
            within_bound: after.estimate == 0.0,
        };
    }
    let ratio = after.estimate / before.estimate;
    let ratio_sigma = before.relative_error().hypot(after.relative_error());
    ContractionReport {
        before,
        after,
        ratio,
        ratio_sigma,
        within_bound: ratio <= 1.0 + 3.0 * ratio_sigma,
    }
}
