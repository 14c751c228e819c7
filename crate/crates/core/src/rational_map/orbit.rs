use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RationalMap, Tolerances};

/// Forward orbit `R⁰(z₀), …, R^N(z₀)` with the derivative cocycle
/// `(Rⁿ)'(z₀) = Π_{k<n} R'(R^k(z₀))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCocycle {
    pub start: Complex64,
    pub points: Vec<Complex64>,
    pub cocycle: Vec<Complex64>,
    /// Requested length `N`; `points.len() == N + 1` unless the orbit escaped.
    pub length: usize,
    /// Set when the orbit left the overflow guard (or hit a pole) before step `N`.
    pub escaped: bool,
}

impl OrbitCocycle {
    /// Number of computed steps (`points.len() − 1`).
    pub fn computed(&self) -> usize {
        self.points.len() - 1
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// Iterates `z0` forward `n` steps. Points of a standard-normalized map that
/// come within `tol.snap` of 0 or 1 are snapped onto them, since those are
/// exact fixed points of the map.
pub fn orbit_cocycle(map: &RationalMap, z0: Complex64, n: usize, tol: &Tolerances) -> OrbitCocycle {
    let mut points = Vec::with_capacity(n + 1);
    let mut cocycle = Vec::with_capacity(n + 1);
    let mut z = z0;
    let mut d = Complex64::new(1.0, 0.0);
    points.push(z);
    cocycle.push(d);
    let mut escaped = false;
    for _ in 0..n {
        let next = map.eval(z);
        if !next.re.is_finite() || !next.im.is_finite() || next.norm() > tol.overflow {
            escaped = true;
            break;
        }
        d *= map.derivative(z);
        z = map.snap(next, tol);
        points.push(z);
        cocycle.push(d);
    }
    OrbitCocycle {
        start: z0,
        points,
        cocycle,
        length: n,
        escaped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chebyshev_critical_value_orbit() {
        let o = orbit_cocycle(
            &fixtures::chebyshev_quadratic(),
            c(-1.0 / 3.0, 0.0),
            3,
            &Tolerances::default(),
        );
        let want_points = [-1.0 / 3.0, 1.0, 1.0, 1.0];
        let want_cocycle = [1.0, -4.0, -16.0, -64.0];
        for k in 0..4 {
            assert!((o.points[k] - want_points[k]).norm() < 1e-14);
            assert!((o.cocycle[k] - want_cocycle[k]).norm() < 1e-12);
        }
        assert!(!o.escaped);
    }

    #[test]
    fn zero_steps() {
        let o = orbit_cocycle(&fixtures::z_squared(), c(0.7, 0.2), 0, &Tolerances::default());
        assert_eq!(o.points, vec![c(0.7, 0.2)]);
        assert_eq!(o.cocycle, vec![c(1.0, 0.0)]);
    }

    #[test]
    fn z_squared_from_two() {
        let o = orbit_cocycle(&fixtures::z_squared(), c(2.0, 0.0), 2, &Tolerances::default());
        assert_eq!(o.points, vec![c(2.0, 0.0), c(4.0, 0.0), c(16.0, 0.0)]);
        assert_eq!(o.cocycle, vec![c(1.0, 0.0), c(4.0, 0.0), c(32.0, 0.0)]);
    }

    #[test]
    fn escape_is_flagged_not_errored() {
        let o = orbit_cocycle(&fixtures::z_squared(), c(2.0, 0.0), 40, &Tolerances::default());
        assert!(o.escaped);
        assert!(o.computed() < 40);
        assert!(o.points.iter().all(|p| p.norm() <= 1e150));
    }

    #[test]
    fn cocycle_is_multiplicative() {
        let map = fixtures::chebyshev_cubic();
        let t = Tolerances::default();
        let z0 = c(0.31, 1e-10);
        let full = orbit_cocycle(&map, z0, 9, &t);
        let (m, n) = (4, 5);
        let head = orbit_cocycle(&map, z0, m, &t);
        let tail = orbit_cocycle(&map, head.points[m], n, &t);
        let prod = head.cocycle[m] * tail.cocycle[n];
        assert!((full.cocycle[m + n] - prod).norm() <= 1e-10 * prod.norm());
        for k in 0..9 {
            let step = full.cocycle[k] * map.derivative(full.points[k]);
            assert!((full.cocycle[k + 1] - step).norm() <= 1e-12 * step.norm());
        }
    }
}
