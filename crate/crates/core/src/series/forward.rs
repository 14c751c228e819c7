use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SeriesReport, Verdict};
use crate::error::{Error, Result};
use crate::rational_map::{orbit_cocycle, OrbitCocycle, RationalMap, Tolerances};

/// Orbit moduli above this mark the orbit as unbounded.
const BOUNDED_RADIUS: f64 = 1e6;

fn image(map: &RationalMap, a: Complex64, tol: &Tolerances) -> Result<Complex64> {
    let ra = map.eval(a);
    if !ra.re.is_finite() || !ra.im.is_finite() || ra.norm() > tol.overflow {
        return Err(Error::PoleBase { base: a });
    }
    Ok(map.snap(ra, tol))
}

/// Orbit of `start` with `count` points; errors if the cocycle vanishes,
/// i.e. the orbit passes through a critical point.
fn checked_orbit(map: &RationalMap, start: Complex64, count: usize, tol: &Tolerances) -> Result<OrbitCocycle> {
    let orbit = orbit_cocycle(map, start, count.saturating_sub(1), tol);
    if let Some(step) = orbit.cocycle.iter().position(|d| *d == Complex64::new(0.0, 0.0)) {
        return Err(Error::CriticalOrbit {
            step,
            point: orbit.points[step - 1],
        });
    }
    Ok(orbit)
}

fn weighted<F>(orbit: &OrbitCocycle, count: usize, weight: F) -> SeriesReport
where
    F: Fn(Complex64) -> Complex64,
{
    let terms = orbit
        .points
        .iter()
        .zip(&orbit.cocycle)
        .take(count)
        .map(|(&w, &d)| weight(w) / d)
        .collect();
    SeriesReport::from_terms(terms, orbit.escaped)
}

/// `Σ_{n<N} 1/(Rⁿ)'(R(a))`.
pub fn forward_series(map: &RationalMap, a: Complex64, n: usize, tol: &Tolerances) -> Result<SeriesReport> {
    let orbit = checked_orbit(map, image(map, a, tol)?, n, tol)?;
    Ok(weighted(&orbit, n, |_| Complex64::new(1.0, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub point: Complex64,
    pub critical_value: Complex64,
    /// `Σ 1/(Rⁿ)'(R(a))`.
    pub forward: SeriesReport,
    /// `Σ |1/(Rⁿ)'(R(a))|`.
    pub absolute: SeriesReport,
    /// `Σ |Rⁿ(R(a))|·|ln|Rⁿ(R(a))|| / |(Rⁿ)'(R(a))|`; `None` (not applicable)
    /// for bounded orbits.
    pub weighted: Option<SeriesReport>,
    /// `Σ (Rⁿ(R(a)))² / (Rⁿ)'(R(a))`.
    pub conjugation: SeriesReport,
    pub unbounded: bool,
    pub max_orbit_modulus: f64,
    pub verdict: Verdict,
}

pub fn summability_report(map: &RationalMap, a: Complex64, n: usize, tol: &Tolerances) -> Result<SummabilityReport> {
    let start = image(map, a, tol)?;
    let orbit = checked_orbit(map, start, n, tol)?;
    let forward = weighted(&orbit, n, |_| Complex64::new(1.0, 0.0));
    let absolute = SeriesReport::from_terms(
        forward.terms.iter().map(|t| Complex64::new(t.norm(), 0.0)).collect(),
        orbit.escaped,
    );
    let max_orbit_modulus = orbit.max_modulus();
    let unbounded = orbit.escaped || max_orbit_modulus > BOUNDED_RADIUS;
    let weighted_series = unbounded.then(|| {
        let terms = orbit
            .points
            .iter()
            .zip(&orbit.cocycle)
            .take(n)
            .map(|(w, d)| {
                let r = w.norm();
                let wl = if r == 0.0 { 0.0 } else { r * r.ln().abs() };
                Complex64::new(wl / d.norm(), 0.0)
            })
            .collect();
        SeriesReport::from_terms(terms, orbit.escaped)
    });
    let conjugation = weighted(&orbit, n, |w| w * w);

    let verdict = match (&weighted_series, absolute.verdict) {
        (_, Verdict::DivergentEvidence) => Verdict::DivergentEvidence,
        (None, v) => v,
        (Some(w), Verdict::SummableEvidence) => w.verdict,
        (Some(w), _) if w.verdict == Verdict::DivergentEvidence => Verdict::DivergentEvidence,
        _ => Verdict::Inconclusive,
    };
    Ok(SummabilityReport {
        point: a,
        critical_value: start,
        forward,
        absolute,
        weighted: weighted_series,
        conjugation,
        unbounded,
        max_orbit_modulus,
        verdict,
    })
}

/// `A = Σ Rⁿ(d₁)/(Rⁿ)'(d₁)` and `B = Σ 1/(Rⁿ)'(d₁)`, `n < N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ABConstants {
    pub a: Complex64,
    pub b: Complex64,
    pub a_tail: f64,
    pub b_tail: f64,
    pub a_series: SeriesReport,
    pub b_series: SeriesReport,
}

pub fn ab_constants(map: &RationalMap, d1: Complex64, n: usize, tol: &Tolerances) -> Result<ABConstants> {
    let orbit = checked_orbit(map, d1, n, tol)?;
    let a_series = weighted(&orbit, n, |w| w);
    let b_series = weighted(&orbit, n, |_| Complex64::new(1.0, 0.0));
    Ok(ABConstants {
        a: a_series.sum(),
        b: b_series.sum(),
        a_tail: a_series.tail_estimate,
        b_tail: b_series.tail_estimate,
        a_series,
        b_series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fixture_forward_sum() {
        let t = Tolerances::default();
        let r = forward_series(&fixtures::chebyshev_quadratic(), c(1.0 / 3.0, 0.0), 60, &t).unwrap();
        assert_eq!(r.terms.len(), 60);
        assert!((r.terms[1] + 0.25).norm() < 1e-15 && (r.terms[2] + 1.0 / 16.0).norm() < 1e-15);
        assert!((r.sum() - 2.0 / 3.0).norm() < 1e-15);
        assert!(r.tail_estimate < 4f64.powi(-55));
        assert_eq!(r.verdict, Verdict::SummableEvidence);
        assert!((r.fitted_ratio - 0.25).abs() < 1e-9);
    }

    #[test]
    fn single_term() {
        let t = Tolerances::default();
        let r = forward_series(&fixtures::chebyshev_quadratic(), c(1.0 / 3.0, 0.0), 1, &t).unwrap();
        assert_eq!(r.terms, vec![c(1.0, 0.0)]);
        assert_eq!(r.sum(), c(1.0, 0.0));
    }

    #[test]
    fn superattracting_orbit_errors() {
        let t = Tolerances::default();
        let err = forward_series(&fixtures::z_squared(), c(0.0, 0.0), 5, &t).unwrap_err();
        assert!(matches!(err, Error::CriticalOrbit { step: 1, .. }));
    }

    #[test]
    fn bounded_orbit_skips_weighted_series() {
        let t = Tolerances::default();
        let r = summability_report(&fixtures::chebyshev_quadratic(), c(1.0 / 3.0, 0.0), 60, &t).unwrap();
        assert!(!r.unbounded);
        assert!(r.weighted.is_none());
        assert_eq!(r.verdict, Verdict::SummableEvidence);
        assert!((r.absolute.fitted_ratio - 0.25).abs() < 1e-9);
        // conjugation series: (−1/3)² + Σ_{n≥1} 1²/(−4ⁿ) = 1/9 − 1/3
        assert!((r.conjugation.sum() - (1.0 / 9.0 - 1.0 / 3.0)).norm() < 1e-14);
    }

    #[test]
    fn attracting_orbit_diverges() {
        let t = Tolerances::default();
        // 0 is attracting with multiplier 1/2; the orbit of 0.1 converges to it
        let r = summability_report(&fixtures::attracting_quadratic(0.5), c(0.1, 0.0), 80, &t).unwrap();
        assert_eq!(r.verdict, Verdict::DivergentEvidence);
        assert!((r.absolute.fitted_ratio - 2.0).abs() < 1e-3);
    }

    #[test]
    fn escaping_orbit_is_unbounded() {
        let t = Tolerances::default();
        let r = summability_report(&fixtures::z_squared(), c(1.5, 0.0), 40, &t).unwrap();
        assert!(r.unbounded);
        assert!(r.forward.truncated);
        let w = r.weighted.expect("weighted series for unbounded orbit");
        assert!(w.terms.iter().all(|x| x.re >= 0.0));
    }

    #[test]
    fn fixture_ab_constants() {
        let t = Tolerances::default();
        let g = fixtures::chebyshev_quadratic();
        let ab = ab_constants(&g, c(-1.0 / 3.0, 0.0), 60, &t).unwrap();
        assert!((ab.a + 2.0 / 3.0).norm() < 1e-15);
        assert!((ab.b - 2.0 / 3.0).norm() < 1e-15);

        let one = ab_constants(&g, c(-1.0 / 3.0, 0.0), 1, &t).unwrap();
        assert_eq!((one.a, one.b), (c(-1.0 / 3.0, 0.0), c(1.0, 0.0)));

        // −1 is a repelling fixed point of the cubic with multiplier 9
        let cubic = fixtures::chebyshev_cubic();
        for n in [5, 10, 15] {
            let s = ab_constants(&cubic, c(-1.0, 0.0), n, &t).unwrap();
            let l = ab_constants(&cubic, c(-1.0, 0.0), 2 * n, &t).unwrap();
            assert!(s.a_tail > 0.0);
            let ulp = 4.0 * f64::EPSILON * l.a.norm().max(l.b.norm());
            assert!((s.a - l.a).norm() <= s.a_tail * (1.0 + 1e-9) + ulp, "n = {n}");
            assert!((s.b - l.b).norm() <= s.b_tail * (1.0 + 1e-9) + ulp, "n = {n}");
        }
    }

    #[test]
    fn absolute_series_dominates_oscillation() {
        let t = Tolerances::default();
        let r = forward_series(&fixtures::chebyshev_quadratic(), c(1.0 / 3.0, 0.0), 40, &t).unwrap();
        for (m, n) in [(0, 5), (3, 17), (10, 39)] {
            let diff = (r.partial_sums[n] - r.partial_sums[m]).norm();
            let abs: f64 = r.terms[m + 1..=n].iter().map(|x| x.norm()).sum();
            assert!(diff <= abs * (1.0 + 1e-12) + 1e-16);
        }
    }
}
