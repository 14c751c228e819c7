//! Relation coefficients of a summable critical point, the triviality test,
//! instability certificates and residual diagnostics.
//!
//! For a critical point `c_{i0}` with critical value `d = d_{i0}` the
//! coefficients are `C_j = A(1, c_j, R, d)`. The relation they define is
//! trivial when `C_{i0} = 1/b_{i0}` and `C_j = 0` for `j ≠ i0`. The
//! relation runs over finite critical points only.
//!
//! Which critical points lie in the Julia set is not decided here; callers
//! pass the indices they consider.

mod linear_system;

pub use linear_system::{build_linear_system, rank_of, LinearRelationSystem, DEFAULT_RANK_TOL};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelCombination};
use crate::rational_map::{orbit_cocycle, Tolerances};
use crate::ruelle_operator::TransferOperator;
use crate::series::{ab_constants, forward_series, modified_combination, Verdict};

pub const DEFAULT_TRIVIALITY_TOL: f64 = 1e-8;
/// Required ratio between a certified quantity and its uncertainty.
pub const CERTIFICATE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub index: usize,
    pub critical_point: Complex64,
    pub residue: Complex64,
    /// `C_j`; zero when `degenerate`.
    pub value: Complex64,
    pub b_c: Complex64,
    pub tail: f64,
    /// `c_j ∈ {0, 1}` or `d_j ∈ {0, 1}`. Either way `γ_{d_j} ≡ 0`, so the
    /// term drops out of the relation.
    pub degenerate: bool,
    /// Orbit points of `d` within the proximity radius of `c_j`.
    pub near_critical_steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCoefficients {
    pub index: usize,
    pub critical_value: Complex64,
    pub entries: Vec<CoefficientEntry>,
}

fn check_index(op: &TransferOperator, i0: usize) -> Result<()> {
    let count = op.critical().len();
    if i0 >= count {
        return Err(Error::IndexOutOfRange { index: i0, count });
    }
    Ok(())
}

/// Forward series at `c_{i0}`, refusing points without summable evidence.
fn summable_forward(op: &TransferOperator, i0: usize, n: usize) -> Result<crate::series::SeriesReport> {
    check_index(op, i0)?;
    let s = forward_series(op.map(), op.critical().points[i0], n, op.tolerances())?;
    if !s.verdict.is_summable() {
        return Err(Error::NotSummable {
            index: i0,
            ratio: s.fitted_ratio,
        });
    }
    Ok(s)
}

/// `C_j = A(1, c_j, R, d_{i0})` truncated at order `N`.
pub fn relation_coefficients(op: &TransferOperator, i0: usize, n: usize) -> Result<RelationCoefficients> {
    summable_forward(op, i0, n)?;
    coefficients_unchecked(op, i0, n)
}

fn coefficients_unchecked(op: &TransferOperator, i0: usize, n: usize) -> Result<RelationCoefficients> {
    let cd = op.critical();
    let d = cd.values[i0];
    let mut entries = Vec::with_capacity(cd.len());
    for j in 0..cd.len() {
        let cj = cd.points[j];
        let pole = Kernel::gamma(cj).is_identically_zero();
        let degenerate = pole || Kernel::gamma(cd.values[j]).is_identically_zero();
        let (value, tail, near) = if pole {
            (Complex64::new(0.0, 0.0), 0.0, Vec::new())
        } else {
            let v = crate::series::a_at_critical(op.map(), d, j, Complex64::new(1.0, 0.0), n, op.tolerances())?;
            let near = v.proximity.iter().map(|p| p.step).collect();
            (v.value, v.tail_estimate, near)
        };
        entries.push(CoefficientEntry {
            index: j,
            critical_point: cj,
            residue: cd.residues[j],
            value,
            b_c: cd.residues[j] * value,
            tail,
            degenerate,
            near_critical_steps: near,
        });
    }
    Ok(RelationCoefficients {
        index: i0,
        critical_value: d,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivialityVerdict {
    pub trivial: bool,
    /// `|C_{i0} − 1/b_{i0}|`.
    pub primary_margin: f64,
    /// `max_{j≠i0} |C_j|` over non-degenerate `j`.
    pub other_margin: f64,
    pub tol: f64,
    /// The deciding margin lies within a factor 10 of `tol`.
    pub margin_warning: bool,
}

/// Triviality of the relation from its coefficients.
pub fn triviality_from_coefficients(
    coefficients: &[Complex64],
    degenerate: &[bool],
    i0: usize,
    b_i0: Complex64,
    tol: f64,
) -> TrivialityVerdict {
    let primary_margin = (coefficients[i0] - Complex64::new(1.0, 0.0) / b_i0).norm();
    let other_margin = coefficients
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i0 && !degenerate.get(*j).copied().unwrap_or(false))
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    let worst = primary_margin.max(other_margin);
    let trivial = primary_margin < tol && other_margin < tol;
    TrivialityVerdict {
        trivial,
        primary_margin,
        other_margin,
        tol,
        margin_warning: worst >= tol / CERTIFICATE_FACTOR && worst < tol * CERTIFICATE_FACTOR,
    }
}

pub fn triviality_test(
    op: &TransferOperator,
    i0: usize,
    n: usize,
    tol: f64,
) -> Result<(RelationCoefficients, TrivialityVerdict)> {
    let coefs = relation_coefficients(op, i0, n)?;
    let verdict = triviality_of(&coefs, tol);
    Ok((coefs, verdict))
}

fn triviality_of(coefs: &RelationCoefficients, tol: f64) -> TrivialityVerdict {
    let values: Vec<Complex64> = coefs.entries.iter().map(|e| e.value).collect();
    let degenerate: Vec<bool> = coefs.entries.iter().map(|e| e.degenerate).collect();
    let b = coefs.entries[coefs.index].residue;
    triviality_from_coefficients(&values, &degenerate, coefs.index, b, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    UnstableCertified,
    TrivialRelation,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateBasis {
    /// `S ≠ 0`.
    NonzeroSum,
    /// Non-trivial relation.
    NontrivialRelation,
    None,
}

/// Everything the certificate decision looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateInputs {
    pub verdict: Verdict,
    pub s: Complex64,
    pub s_tail: f64,
    pub triviality: TrivialityVerdict,
    pub a: Complex64,
    pub a_tail: f64,
    pub b: Complex64,
    pub b_tail: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub basis: CertificateBasis,
    /// `|S| / max(tail, tol)`.
    pub sum_margin: f64,
    /// `max(|C_{i0} − 1/b_{i0}|, max_{j≠i0}|C_j|) / tol`.
    pub relation_margin: f64,
    /// The relation tested trivial yet `|A|` or `|B|` exceeds its tail, which
    /// cannot happen for an exact trivial relation.
    pub internal_inconsistency: bool,
}

pub fn certify(inputs: &CertificateInputs) -> Certificate {
    let tol = inputs.tol;
    let sum_margin = inputs.s.norm() / inputs.s_tail.max(tol);
    let t = &inputs.triviality;
    let relation_margin = t.primary_margin.max(t.other_margin) / tol;
    let internal_inconsistency =
        t.trivial && (inputs.a.norm() > inputs.a_tail.max(tol) || inputs.b.norm() > inputs.b_tail.max(tol));
    let (kind, basis) = if !inputs.verdict.is_summable() {
        (CertificateKind::Inconclusive, CertificateBasis::None)
    } else if sum_margin >= CERTIFICATE_FACTOR {
        (CertificateKind::UnstableCertified, CertificateBasis::NonzeroSum)
    } else if !t.trivial && relation_margin >= CERTIFICATE_FACTOR {
        (CertificateKind::UnstableCertified, CertificateBasis::NontrivialRelation)
    } else if t.trivial {
        (CertificateKind::TrivialRelation, CertificateBasis::None)
    } else {
        (CertificateKind::Inconclusive, CertificateBasis::None)
    };
    Certificate {
        kind,
        basis,
        sum_margin,
        relation_margin,
        internal_inconsistency,
    }
}

/// Distance from the critical point to the computed orbit of its critical
/// value; a positive distance is necessary for `c ∉ X_c`, though the orbit
/// closure is only sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSeparation {
    pub min_distance: f64,
    pub closest_step: usize,
    pub separated: bool,
}

pub fn orbit_separation(op: &TransferOperator, i0: usize, n: usize) -> Result<OrbitSeparation> {
    check_index(op, i0)?;
    let c = op.critical().points[i0];
    let orbit = orbit_cocycle(op.map(), op.critical().values[i0], n, op.tolerances());
    let (closest_step, min_distance) = orbit
        .points
        .iter()
        .map(|w| (w - c).norm())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY));
    Ok(OrbitSeparation {
        min_distance,
        closest_step,
        separated: min_distance > op.tolerances().critical_dispatch,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub index: usize,
    pub critical_point: Complex64,
    pub critical_value: Complex64,
    pub residue: Complex64,
    pub order: usize,
    pub verdict: Verdict,
    pub fitted_ratio: f64,
    /// `S = Σ 1/(Rⁿ)'(R(c))`.
    pub s: Complex64,
    pub s_tail: f64,
    pub coefficients: Vec<CoefficientEntry>,
    pub triviality: Option<TrivialityVerdict>,
    pub a: Option<Complex64>,
    pub a_tail: Option<f64>,
    pub b: Option<Complex64>,
    pub b_tail: Option<f64>,
    pub separation: OrbitSeparation,
    pub certificate: Certificate,
    pub tol: f64,
    pub tolerances: Tolerances,
}

/// Full stability analysis of critical point `i0`. Points without
/// summable evidence get an inconclusive certificate and no coefficients.
pub fn instability_certificate(op: &TransferOperator, i0: usize, n: usize, tol: f64) -> Result<StabilityReport> {
    check_index(op, i0)?;
    let cd = op.critical();
    let s = forward_series(op.map(), cd.points[i0], n, op.tolerances())?;
    let separation = orbit_separation(op, i0, n)?;
    let base = StabilityReport {
        index: i0,
        critical_point: cd.points[i0],
        critical_value: cd.values[i0],
        residue: cd.residues[i0],
        order: n,
        verdict: s.verdict,
        fitted_ratio: s.fitted_ratio,
        s: s.sum(),
        s_tail: s.tail_estimate,
        coefficients: Vec::new(),
        triviality: None,
        a: None,
        a_tail: None,
        b: None,
        b_tail: None,
        separation,
        certificate: Certificate {
            kind: CertificateKind::Inconclusive,
            basis: CertificateBasis::None,
            sum_margin: 0.0,
            relation_margin: 0.0,
            internal_inconsistency: false,
        },
        tol,
        tolerances: *op.tolerances(),
    };
    if !s.verdict.is_summable() {
        return Ok(base);
    }
    let coefs = coefficients_unchecked(op, i0, n)?;
    let triviality = triviality_of(&coefs, tol);
    let ab = ab_constants(op.map(), cd.values[i0], n, op.tolerances())?;
    let certificate = certify(&CertificateInputs {
        verdict: s.verdict,
        s: s.sum(),
        s_tail: s.tail_estimate,
        triviality,
        a: ab.a,
        a_tail: ab.a_tail,
        b: ab.b,
        b_tail: ab.b_tail,
        tol,
    });
    Ok(StabilityReport {
        coefficients: coefs.entries,
        triviality: Some(triviality),
        a: Some(ab.a),
        a_tail: Some(ab.a_tail),
        b: Some(ab.b),
        b_tail: Some(ab.b_tail),
        certificate,
        ..base
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    /// Largest `|R*φ_N(z) − (φ_N(z) − γ_d(z) + Σ bᵢ Cᵢ γ_{dᵢ}(z))|`.
    pub residual: f64,
    /// Largest `|γ_{R^{N+1}(d)}(z)/(R^{N+1})'(d)|`, the first neglected
    /// term, which the residual equals up to rounding.
    pub predicted: f64,
    pub per_probe: Vec<f64>,
    /// Probes refused because a preimage sat on a pole or critical point.
    pub skipped: Vec<Complex64>,
}

/// `φ_N = Σ_{n≤N} γ_{Rⁿ(d)}/(Rⁿ)'(d)` for `d = d_{i0}`. The left side
/// `R*φ_N` is a preimage sum; the right side is kernel bookkeeping with
/// `Cᵢ^{(N)}` taken from the same truncation.
pub fn fixed_point_identity_residual(
    op: &TransferOperator,
    i0: usize,
    n: usize,
    probes: &[Complex64],
) -> Result<FixedPointReport> {
    check_index(op, i0)?;
    let cd = op.critical();
    let tol = op.tolerances();
    let d = cd.values[i0];
    let one = Complex64::new(1.0, 0.0);
    let phi = modified_combination(op.map(), d, one, n, tol)?;
    let next = modified_combination(op.map(), d, one, n + 1, tol)?;
    let tail_term = next.add(&phi.scale(-one));
    let coefs = coefficients_unchecked(op, i0, n)?;

    let mut rhs = phi.add(&KernelCombination::single(-one, Kernel::gamma(d)));
    for e in &coefs.entries {
        if !e.degenerate {
            rhs = rhs.add(&KernelCombination::single(e.b_c, Kernel::gamma(cd.values[e.index])));
        }
    }

    let mut per_probe = Vec::with_capacity(probes.len());
    let mut skipped = Vec::new();
    let mut predicted: f64 = 0.0;
    for &z in probes {
        let lhs = match op.apply_pointwise(&phi, z) {
            Ok(v) => v,
            Err(Error::KernelPole { .. }) | Err(Error::IllConditioned { .. }) => {
                skipped.push(z);
                continue;
            }
            Err(e) => return Err(e),
        };
        per_probe.push((lhs - rhs.eval(z)?).norm());
        predicted = predicted.max(tail_term.eval(z)?.norm());
    }
    Ok(FixedPointReport {
        residual: per_probe.iter().copied().fold(0.0, f64::max),
        predicted,
        per_probe,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFieldReport {
    /// Largest `| Σ|φ(y)|/|R'(y)|² − |φ(z)| |`.
    pub modulus_residual: f64,
    /// Largest `|B_R(μ)(z) − μ(z)|` for `μ = conj(φ)/|φ|`.
    pub beltrami_residual: f64,
    pub evaluated: usize,
    /// Probes where `|φ| ≤ 1e-10` (at the probe or at its image) or a
    /// preimage was unusable.
    pub skipped: Vec<Complex64>,
}

const LINE_FIELD_FLOOR: f64 = 1e-10;

/// Invariance diagnostics for `|φ|` under the modulus operator and for the
/// line field `conj(φ)/|φ|` under the Beltrami operator. Both vanish only for
/// genuine fixed points.
pub fn line_field_residual<F>(op: &TransferOperator, phi: &F, probes: &[Complex64]) -> Result<LineFieldReport>
where
    F: crate::ruelle_operator::Evaluable + ?Sized,
{
    let mu = |w: Complex64| -> Result<Complex64> {
        let v = phi.eval_at(w)?;
        Ok(v.conj() / v.norm())
    };
    let (mut modulus_residual, mut beltrami_residual): (f64, f64) = (0.0, 0.0);
    let mut skipped = Vec::new();
    let mut evaluated = 0;
    for &z in probes {
        let here = match phi.eval_at(z) {
            Ok(v) if v.norm() > LINE_FIELD_FLOOR => v,
            _ => {
                skipped.push(z);
                continue;
            }
        };
        let image = op.map().eval(z);
        let there = phi.eval_at(image);
        let modulus = op.modulus_apply_pointwise(
            &|y: Complex64| Complex64::new(phi.eval_at(y).map(|v| v.norm()).unwrap_or(f64::NAN), 0.0),
            z,
        );
        let (Ok(there), Ok(modulus)) = (there, modulus) else {
            skipped.push(z);
            continue;
        };
        if there.norm() <= LINE_FIELD_FLOOR || !modulus.is_finite() {
            skipped.push(z);
            continue;
        }
        let pulled = op.beltrami_apply(&|w: Complex64| mu(w).unwrap_or(Complex64::new(f64::NAN, f64::NAN)), z)?;
        modulus_residual = modulus_residual.max((modulus - here.norm()).abs());
        beltrami_residual = beltrami_residual.max((pulled - here.conj() / here.norm()).norm());
        evaluated += 1;
    }
    Ok(LineFieldReport {
        modulus_residual,
        beltrami_residual,
        evaluated,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::probes::annulus_probes;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g_op() -> TransferOperator {
        TransferOperator::new(fixtures::chebyshev_quadratic(), Tolerances::default()).unwrap()
    }

    fn cubic_op() -> TransferOperator {
        TransferOperator::new(fixtures::chebyshev_cubic(), Tolerances::default()).unwrap()
    }

    #[test]
    fn fixture_coefficient() {
        let coefs = relation_coefficients(&g_op(), 0, 60).unwrap();
        assert_eq!(coefs.entries.len(), 1);
        let e = &coefs.entries[0];
        assert!((e.value + 3.0).norm() < 1e-14);
        assert!((e.b_c + 0.5).norm() < 1e-14);
        assert_eq!(e.tail, 0.0);
        assert!(!e.degenerate);
    }

    #[test]
    fn orbit_on_fixed_point_gives_finite_coefficients() {
        // the cubic sends 1/2 to −1 (repelling, fixed) and −1/2 to 1
        let op = cubic_op();
        let i = op.critical().points.iter().position(|p| p.re < 0.0).unwrap();
        let coefs = relation_coefficients(&op, i, 60).unwrap();
        assert_eq!(coefs.critical_value, c(1.0, 0.0));
        assert!(coefs.entries.iter().all(|e| e.value == c(0.0, 0.0)));
    }

    #[test]
    fn coefficient_tail_shrinks_geometrically() {
        let op = cubic_op();
        let i = op.critical().points.iter().position(|p| p.re > 0.0).unwrap();
        for n in [4, 8] {
            let short = relation_coefficients(&op, i, n).unwrap();
            let long = relation_coefficients(&op, i, 2 * n).unwrap();
            for (s, l) in short.entries.iter().zip(&long.entries) {
                assert!(s.tail > 0.0);
                assert!(l.tail <= s.tail / 4.0);
            }
        }
    }

    #[test]
    fn divergent_point_is_refused() {
        let op = TransferOperator::new(fixtures::attracting_quadratic(0.5), Tolerances::default()).unwrap();
        // critical point −1/2 is attracted to 0
        assert!(matches!(
            relation_coefficients(&op, 0, 80),
            Err(Error::NotSummable { .. })
        ));
        let report = instability_certificate(&op, 0, 80, DEFAULT_TRIVIALITY_TOL).unwrap();
        assert_eq!(report.certificate.kind, CertificateKind::Inconclusive);
        assert!(report.triviality.is_none());
    }

    #[test]
    fn fixture_is_not_trivial() {
        let (_, v) = triviality_test(&g_op(), 0, 60, 1e-8).unwrap();
        assert!(!v.trivial);
        assert!((v.primary_margin - 9.0).abs() < 1e-12);
        assert_eq!(v.other_margin, 0.0);
    }

    #[test]
    fn injected_trivial_coefficients() {
        let b = c(0.25, 0.0);
        let v = triviality_from_coefficients(&[c(4.0, 0.0), c(0.0, 0.0)], &[false, false], 0, b, 1e-8);
        assert!(v.trivial && !v.margin_warning);
        let near = triviality_from_coefficients(&[c(4.0 + 0.5e-8, 0.0), c(0.0, 0.0)], &[false, false], 0, b, 1e-8);
        assert!(near.trivial && near.margin_warning);
        let other = triviality_from_coefficients(&[c(4.0, 0.0), c(0.1, 0.0)], &[false, false], 0, b, 1e-8);
        assert!(!other.trivial);
        let masked = triviality_from_coefficients(&[c(4.0, 0.0), c(0.1, 0.0)], &[false, true], 0, b, 1e-8);
        assert!(masked.trivial);
    }

    #[test]
    fn fixture_certificate() {
        let r = instability_certificate(&g_op(), 0, 60, DEFAULT_TRIVIALITY_TOL).unwrap();
        assert_eq!(r.certificate.kind, CertificateKind::UnstableCertified);
        assert_eq!(r.certificate.basis, CertificateBasis::NonzeroSum);
        assert!(!r.certificate.internal_inconsistency);
        assert!((r.s - 2.0 / 3.0).norm() < 1e-15);
        assert!((r.a.unwrap() + 2.0 / 3.0).norm() < 1e-15);
        assert!((r.b.unwrap() - 2.0 / 3.0).norm() < 1e-15);
        assert!(r.separation.separated);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"unstable-certified\""));
    }

    #[test]
    fn certificate_survives_longer_truncation() {
        let op = cubic_op();
        let i = op.critical().points.iter().position(|p| p.re > 0.0).unwrap();
        let mut seen = false;
        for n in [20, 40, 80] {
            let r = instability_certificate(&op, i, n, DEFAULT_TRIVIALITY_TOL).unwrap();
            if seen {
                assert_eq!(r.certificate.kind, CertificateKind::UnstableCertified);
            }
            seen |= r.certificate.kind == CertificateKind::UnstableCertified;
        }
        assert!(seen);
    }

    fn inputs(triviality: TrivialityVerdict, a: f64) -> CertificateInputs {
        CertificateInputs {
            verdict: Verdict::SummableEvidence,
            s: c(0.0, 0.0),
            s_tail: 1e-20,
            triviality,
            a: c(a, 0.0),
            a_tail: 1e-20,
            b: c(0.0, 0.0),
            b_tail: 1e-20,
            tol: 1e-8,
        }
    }

    #[test]
    fn injected_inconsistency_is_flagged() {
        let trivial = triviality_from_coefficients(&[c(2.0, 0.0)], &[false], 0, c(0.5, 0.0), 1e-8);
        let cert = certify(&inputs(trivial, 0.5));
        assert_eq!(cert.kind, CertificateKind::TrivialRelation);
        assert!(cert.internal_inconsistency);
        let clean = certify(&inputs(trivial, 0.0));
        assert!(!clean.internal_inconsistency);
    }

    #[test]
    fn divergent_input_is_inconclusive() {
        let nontrivial = triviality_from_coefficients(&[c(-3.0, 0.0)], &[false], 0, c(1.0 / 6.0, 0.0), 1e-8);
        let mut i = inputs(nontrivial, 0.0);
        i.verdict = Verdict::DivergentEvidence;
        i.s = c(1.0, 0.0);
        assert_eq!(certify(&i).kind, CertificateKind::Inconclusive);
        i.verdict = Verdict::SummableEvidence;
        i.s = c(0.0, 0.0);
        let cert = certify(&i);
        assert_eq!(cert.kind, CertificateKind::UnstableCertified);
        assert_eq!(cert.basis, CertificateBasis::NontrivialRelation);
    }

    #[test]
    fn fixed_point_identity_on_fixture() {
        let probes = annulus_probes(10, 17, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0 / 3.0, 0.0)]);
        for n in [1, 60] {
            let r = fixed_point_identity_residual(&g_op(), 0, n, &probes).unwrap();
            assert!(r.residual < 1e-12, "N = {n}: {}", r.residual);
            assert_eq!(r.predicted, 0.0);
            assert!(r.skipped.is_empty());
        }
    }

    #[test]
    fn fixed_point_residual_tracks_the_tail() {
        let op = cubic_op();
        let i = op.critical().points.iter().position(|p| p.re > 0.0).unwrap();
        let probes = annulus_probes(10, 5, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let mut last = f64::INFINITY;
        for n in 1..6 {
            let r = fixed_point_identity_residual(&op, i, n, &probes).unwrap();
            assert!((r.residual - r.predicted).abs() <= 1e-12 + 1e-8 * r.predicted);
            assert!((last / r.residual - 9.0).abs() < 0.5 || last.is_infinite());
            last = r.residual;
        }
    }

    #[test]
    fn line_field_diagnostics() {
        let op = TransferOperator::new(fixtures::z_squared(), Tolerances::default()).unwrap();
        let phi = KernelCombination::single(c(1.0, 0.0), Kernel::gamma(c(2.0, 0.0)));
        let probes = annulus_probes(20, 1, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(-1.0, 0.0)]);
        let r = line_field_residual(&op, &phi, &probes).unwrap();
        assert!(r.modulus_residual > 1e-3 && r.beltrami_residual > 1e-3);
        assert!(r.modulus_residual >= 0.0);

        let id = TransferOperator::new(fixtures::identity(), Tolerances::default()).unwrap();
        let r = line_field_residual(&id, &phi, &probes).unwrap();
        assert!(r.modulus_residual < 1e-12 && r.beltrami_residual < 1e-12);
        assert_eq!(r.evaluated, 20);
    }

    #[test]
    fn separation_of_fixture() {
        let s = orbit_separation(&g_op(), 0, 20).unwrap();
        assert!((s.min_distance - 2.0 / 3.0).abs() < 1e-15);
        assert!(s.separated);
    }
}
