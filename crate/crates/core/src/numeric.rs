//! Small numerical helpers shared across modules.

use num_complex::Complex64;

/// Neumaier-compensated running sum of complex numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

fn two_sum(acc: f64, comp: &mut f64, x: f64) -> f64 {
    let t = acc + x;
    if acc.abs() >= x.abs() {
        *comp += (acc - t) + x;
    } else {
        *comp += (x - t) + acc;
    }
    t
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: Complex64) {
        self.sum.re = two_sum(self.sum.re, &mut self.comp.re, x.re);
        self.sum.im = two_sum(self.sum.im, &mut self.comp.im, x.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Geometric model `|t_n| ≈ C ρ^n` fitted by least squares on `ln |t_n|`
/// over the trailing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFit {
    pub ratio: f64,
    /// Extrapolated `Σ_{n > last} |t_n|`; infinite when `ratio >= 1`.
    pub tail: f64,
}

pub fn geometric_fit(magnitudes: &[f64], window: usize) -> GeometricFit {
    let start = magnitudes.len().saturating_sub(window.max(2));
    let pts: Vec<(f64, f64)> = magnitudes[start..]
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0 && m.is_finite())
        .map(|(i, m)| ((start + i) as f64, m.ln()))
        .collect();

    let last = magnitudes.last().copied().unwrap_or(0.0);
    if pts.is_empty() {
        // every trailing term vanished exactly
        return GeometricFit { ratio: 0.0, tail: 0.0 };
    }
    if pts.len() == 1 {
        let tail = if last == 0.0 { 0.0 } else { f64::INFINITY };
        return GeometricFit {
            ratio: if last == 0.0 { 0.0 } else { 1.0 },
            tail,
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let ratio = (sxy / sxx).exp();
    let tail = if last == 0.0 {
        0.0
    } else if ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    GeometricFit { ratio, tail }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(Complex64::new(1e16, 0.0));
        for _ in 0..10 {
            s.add(Complex64::new(1.0, 0.0));
        }
        s.add(Complex64::new(-1e16, 0.0));
        assert_eq!(s.value().re, 10.0);
    }

    #[test]
    fn geometric_fit_quarter() {
        let mags: Vec<f64> = (0..30).map(|n| 0.25f64.powi(n)).collect();
        let fit = geometric_fit(&mags, 20);
        assert!((fit.ratio - 0.25).abs() < 1e-12);
        let exact = 0.25f64.powi(30) / (1.0 - 0.25);
        assert!((fit.tail - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn geometric_fit_all_zero_tail() {
        let fit = geometric_fit(&[1.0, 0.0, 0.0, 0.0], 20);
        assert_eq!(fit.tail, 0.0);
    }
}
