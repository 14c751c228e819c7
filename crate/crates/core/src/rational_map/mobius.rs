use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

impl std::fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpherePoint::Finite(z) => write!(f, "{z}"),
            SpherePoint::Infinity => write!(f, "∞"),
        }
    }
}

/// `z ↦ (a z + b) / (c z + d)`, stored with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let size = [a, b, c, d].iter().map(|x| x.norm()).fold(0.0, f64::max);
        if size == 0.0 || det.norm() <= 1e-14 * size * size {
            return Err(Error::InvalidArgument("singular Möbius matrix".into()));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// The transform sending `p0, p1, p2` to `0, 1, ∞`.
    pub fn to_standard(p0: SpherePoint, p1: SpherePoint, p2: SpherePoint) -> Result<Self> {
        use SpherePoint::*;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let distinct = |x: SpherePoint, y: SpherePoint| match (x, y) {
            (Finite(u), Finite(v)) => (u - v).norm() > 1e-12 * u.norm().max(v.norm()).max(1.0),
            (Infinity, Infinity) => false,
            _ => true,
        };
        if !distinct(p0, p1) || !distinct(p1, p2) || !distinct(p0, p2) {
            return Err(Error::DegenerateTriple);
        }
        let (a, b, c, d) = match (p0, p1, p2) {
            (Finite(x0), Finite(x1), Infinity) => (one, -x0, zero, x1 - x0),
            (Infinity, Finite(x1), Finite(x2)) => (zero, x1 - x2, one, -x2),
            (Finite(x0), Infinity, Finite(x2)) => (one, -x0, one, -x2),
            (Finite(x0), Finite(x1), Finite(x2)) => (x1 - x2, -x0 * (x1 - x2), x1 - x0, -x2 * (x1 - x0)),
            _ => return Err(Error::DegenerateTriple),
        };
        Self::new(a, b, c, d).map_err(|_| Error::DegenerateTriple)
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Finite-plane evaluation; returns a non-finite value at the pole.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn affine_normalization_of_chebyshev_fixed_points() {
        let h = MobiusTransform::to_standard(c(-1.0, 0.0).into(), c(2.0, 0.0).into(), SpherePoint::Infinity).unwrap();
        // h(z) = (z + 1)/3
        for z in [c(0.0, 0.0), c(1.5, -2.0), c(-7.0, 3.0)] {
            assert!((h.eval(z) - (z + 1.0) / 3.0).norm() < 1e-15);
        }
        assert!((h.determinant() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let h = MobiusTransform::new(c(1.0, 2.0), c(-0.5, 0.0), c(0.3, -1.0), c(2.0, 1.0)).unwrap();
        let id = h.compose(&h.inverse());
        for k in 0..10 {
            let z = c(0.3 * k as f64 - 1.0, 0.7 - 0.2 * k as f64);
            assert!((id.eval(z) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn finite_triple_goes_to_standard() {
        let (p0, p1, p2) = (c(0.5, 0.5), c(-1.0, 2.0), c(3.0, -1.0));
        let h = MobiusTransform::to_standard(p0.into(), p1.into(), p2.into()).unwrap();
        assert!(h.eval(p0).norm() < 1e-14);
        assert!((h.eval(p1) - 1.0).norm() < 1e-14);
        assert!(h.eval(p2).norm() > 1e12);
    }

    #[test]
    fn degenerate_triple_is_rejected() {
        let p = c(1.0, 1.0).into();
        assert!(matches!(
            MobiusTransform::to_standard(p, p, SpherePoint::Infinity),
            Err(Error::DegenerateTriple)
        ));
    }
}
