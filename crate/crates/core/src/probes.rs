//! Seeded probe points for identity checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INNER_RADIUS: f64 = 0.5;
pub const OUTER_RADIUS: f64 = 3.0;
pub const EXCLUSION_RADIUS: f64 = 0.05;

/// `n` points uniform (by area) in `0.5 ≤ |z| ≤ 3`, each at least 0.05 from
/// every point of `avoid`.
pub fn annulus_probes(n: usize, seed: u64, avoid: &[Complex64]) -> Vec<Complex64> {
    annulus_probes_with(&mut ChaCha8Rng::seed_from_u64(seed), n, avoid)
}

pub fn annulus_probes_with<R: Rng>(rng: &mut R, n: usize, avoid: &[Complex64]) -> Vec<Complex64> {
    let (r0, r1) = (INNER_RADIUS * INNER_RADIUS, OUTER_RADIUS * OUTER_RADIUS);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = (r0 + rng.random::<f64>() * (r1 - r0)).sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        let z = Complex64::from_polar(r, theta);
        if avoid.iter().all(|p| (z - p).norm() >= EXCLUSION_RADIUS) {
            out.push(z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_respect_annulus_and_exclusions() {
        let avoid = [Complex64::new(1.0, 0.0), Complex64::new(-0.7, 0.2)];
        let pts = annulus_probes(500, 3, &avoid);
        assert_eq!(pts.len(), 500);
        for z in &pts {
            assert!(z.norm() >= INNER_RADIUS - 1e-12 && z.norm() <= OUTER_RADIUS + 1e-12);
            assert!(avoid.iter().all(|p| (z - p).norm() >= EXCLUSION_RADIUS));
        }
        assert_eq!(pts, annulus_probes(500, 3, &avoid));
    }
}
