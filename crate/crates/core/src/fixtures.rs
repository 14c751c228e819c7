//! Reference maps with closed-form critical orbits, plus a generator of
//! random standard-normalized maps for randomized checks.
//!
//! Julia-set membership of critical points is documented here rather than
//! computed:
//!
//! * `3w² − 2w` (conjugate of `z² − 2`): the critical point `1/3` lies in the
//!   Julia set `[−1/3, 1]`; its orbit `1/3 → −1/3 → 1 → 1 …` is summable.
//! * `4w³ − 3w` (conjugate of the cubic Chebyshev map): both critical points
//!   `±1/2` lie in the Julia set `[−1, 1]`.
//! * `z²`, `z²/(2z − 1)`: critical points are superattracting fixed points
//!   in the Fatou set.

use num_complex::Complex64;
use rand::Rng;

use crate::rational_map::{critical_data, ComplexPolynomial, RationalMap, Tolerances};

fn real_poly(coeffs: &[f64]) -> ComplexPolynomial {
    ComplexPolynomial::from_real(coeffs)
}

pub fn z_squared() -> RationalMap {
    RationalMap::polynomial(real_poly(&[0.0, 0.0, 1.0])).expect("valid map")
}

/// `z² − 2`, not normalized; fixed points `−1, 2, ∞`.
pub fn chebyshev_unnormalized() -> RationalMap {
    RationalMap::polynomial(real_poly(&[-2.0, 0.0, 1.0])).expect("valid map")
}

/// `g(w) = 3w² − 2w`.
pub fn chebyshev_quadratic() -> RationalMap {
    RationalMap::polynomial(real_poly(&[0.0, -2.0, 3.0])).expect("valid map")
}

/// `4w³ − 3w`: critical values `−1` (repelling fixed point, multiplier 9) and `1`.
pub fn chebyshev_cubic() -> RationalMap {
    RationalMap::polynomial(real_poly(&[0.0, -3.0, 0.0, 4.0])).expect("valid map")
}

pub fn z_squared_over_2z_minus_1() -> RationalMap {
    RationalMap::new(real_poly(&[0.0, 0.0, 1.0]), real_poly(&[-1.0, 2.0])).expect("valid map")
}

/// `λz + (1 − λ)z²`: 0 is a fixed point with multiplier `λ`.
pub fn attracting_quadratic(lambda: f64) -> RationalMap {
    RationalMap::polynomial(real_poly(&[0.0, lambda, 1.0 - lambda])).expect("valid map")
}

pub fn identity() -> RationalMap {
    RationalMap::polynomial(real_poly(&[0.0, 1.0])).expect("valid map")
}

fn random_complex<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius))
}

/// Random map `z·P(z)/Q(z)` of the given degree with `P(1) = Q(1)`,
/// `deg P = degree − 1`, `deg Q ≤ degree − 2`; it fixes 0, 1 and ∞.
/// Draws are rejected until the map is coprime, has simple critical points
/// with `|R''| ≥ 0.05`, and critical points at least 0.05 from the poles.
pub fn random_standard_map<R: Rng>(rng: &mut R, degree: usize) -> RationalMap {
    assert!(degree >= 2, "degree must be at least 2");
    let tol = Tolerances::default();
    loop {
        let mut p: Vec<Complex64> = (0..degree).map(|_| random_complex(rng, 1.0)).collect();
        p[degree - 1] += Complex64::new(1.0, 0.0);
        let q_deg = rng.random_range(0..=degree - 2);
        let mut q: Vec<Complex64> = (0..=q_deg).map(|_| random_complex(rng, 1.0)).collect();
        q[q_deg] += Complex64::new(1.0, 0.0);

        let (pp, qp) = (ComplexPolynomial::new(p.clone()), ComplexPolynomial::new(q.clone()));
        let one = Complex64::new(1.0, 0.0);
        p[0] += qp.eval(one) - pp.eval(one);

        let mut num = vec![Complex64::new(0.0, 0.0)];
        num.extend(p);
        let Ok(map) = RationalMap::new(ComplexPolynomial::new(num), ComplexPolynomial::new(q)) else {
            continue;
        };
        if !map.is_standard() || map.degree() != degree {
            continue;
        }
        let Ok(cd) = critical_data(&map, &tol) else {
            continue;
        };
        let well_separated = cd
            .points
            .iter()
            .all(|&c| map.second_derivative(c).norm() >= 0.05 && map.denominator().eval(c).norm() >= 0.05)
            && cd
                .points
                .iter()
                .enumerate()
                .all(|(i, &a)| cd.points.iter().skip(i + 1).all(|&b| (a - b).norm() >= 0.05));
        if well_separated {
            return map;
        }
    }
}
