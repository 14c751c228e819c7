//! Rational maps `R = P/Q` of the Riemann sphere: evaluation, derivatives,
//! Möbius normalization, preimages, critical data and orbits.
//!
//! Standard normalization means `R(0) = 0`, `R(1) = 1` and `R(∞) = ∞`; the
//! kernel calculus in [`crate::kernels`] and [`crate::ruelle_operator`]
//! assumes it.

mod critical;
mod mobius;
mod orbit;
mod poly;

pub use critical::{critical_data, CriticalData};
pub use mobius::{MobiusTransform, SpherePoint};
pub use orbit::{orbit_cocycle, OrbitCocycle};
pub use poly::{poly_roots, poly_roots_with, ComplexPolynomial, RootOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by the map-level operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual bound for polynomial roots.
    pub root: f64,
    /// Minimum `|R''(c)|` for a critical point to count as simple.
    pub simple: f64,
    /// Distance below which a base point is treated as the critical point.
    pub critical_dispatch: f64,
    /// `|R'(y)|` below which a preimage is flagged ill-conditioned.
    pub ill_conditioned: f64,
    /// `|R'(y)|` below which pointwise transfer sums refuse to divide.
    pub derivative_floor: f64,
    /// Distance below which points are snapped onto the exact fixed points 0 and 1.
    pub snap: f64,
    /// Orbit modulus treated as escape to ∞.
    pub overflow: f64,
    /// Residual allowed for a claimed fixed point.
    pub fixed_point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: 1e-10,
            simple: 1e-8,
            critical_dispatch: 1e-8,
            ill_conditioned: 1e-6,
            derivative_floor: 1e-12,
            snap: 1e-13,
            overflow: 1e150,
            fixed_point: 1e-10,
        }
    }
}

/// `R(z) = numerator(z) / denominator(z)` with coprime polynomials and a
/// monic denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    numerator: ComplexPolynomial,
    denominator: ComplexPolynomial,
    degree: usize,
    standard: bool,
    /// `W = P'Q − PQ'`, so that `R' = W / Q²`.
    crit_poly: ComplexPolynomial,
    /// `U = W'Q − 2WQ'`, so that `R'' = U / Q³`.
    second_poly: ComplexPolynomial,
    /// `V = U'Q − 3UQ'`, so that `R''' = V / Q⁴`.
    third_poly: ComplexPolynomial,
}

/// JSON map specification: coefficient arrays of `[re, im]` pairs in
/// ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

/// Relative tolerance on the scaled resultant proxy used to reject
/// numerator/denominator pairs with a common root.
const COPRIME_TOL: f64 = 1e-10;

impl RationalMap {
    pub fn new(numerator: ComplexPolynomial, denominator: ComplexPolynomial) -> Result<Self> {
        if numerator.is_zero() {
            return Err(Error::InvalidPolynomial("numerator is zero".into()));
        }
        if denominator.is_zero() {
            return Err(Error::InvalidPolynomial("denominator is zero".into()));
        }
        check_coprime(&numerator, &denominator)?;

        let lead = denominator.leading();
        let inv = Complex64::new(1.0, 0.0) / lead;
        let numerator = numerator.scale(inv);
        let denominator = denominator.scale(inv);
        let degree = numerator.degree().max(denominator.degree());
        if degree == 0 {
            return Err(Error::InvalidPolynomial("constant map".into()));
        }

        let (p, q) = (&numerator, &denominator);
        let dq = q.derivative();
        let crit_poly = p.derivative().mul(q).sub(&p.mul(&dq));
        let second_poly = crit_poly
            .derivative()
            .mul(q)
            .sub(&crit_poly.mul(&dq).scale(Complex64::new(2.0, 0.0)));
        let third_poly = second_poly
            .derivative()
            .mul(q)
            .sub(&second_poly.mul(&dq).scale(Complex64::new(3.0, 0.0)));

        let mut map = Self {
            numerator,
            denominator,
            degree,
            standard: false,
            crit_poly,
            second_poly,
            third_poly,
        };
        map.standard = map.fixes_infinity()
            && map.eval(Complex64::new(0.0, 0.0)).norm() < 1e-12
            && (map.eval(Complex64::new(1.0, 0.0)) - 1.0).norm() < 1e-12;
        Ok(map)
    }

    pub fn from_spec(spec: &MapSpec) -> Result<Self> {
        Self::new(
            ComplexPolynomial::try_from(spec.numerator.clone())?,
            ComplexPolynomial::try_from(spec.denominator.clone())?,
        )
    }

    pub fn to_spec(&self) -> MapSpec {
        MapSpec {
            numerator: self.numerator.coefficients().to_vec(),
            denominator: self.denominator.coefficients().to_vec(),
        }
    }

    pub fn polynomial(p: ComplexPolynomial) -> Result<Self> {
        Self::new(p, ComplexPolynomial::constant(Complex64::new(1.0, 0.0)))
    }

    pub fn numerator(&self) -> &ComplexPolynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &ComplexPolynomial {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// True when the map fixes 0, 1 and ∞ (each to within 1e-12).
    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn fixes_infinity(&self) -> bool {
        self.numerator.degree() > self.denominator.degree()
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.degree() == 0
    }

    /// `W = P'Q − PQ'`; its roots are the finite critical points.
    pub fn critical_polynomial(&self) -> &ComplexPolynomial {
        &self.crit_poly
    }

    /// Value in the finite plane; non-finite at poles.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.numerator.eval(z) / self.denominator.eval(z)
    }

    pub fn eval_sphere(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                let (n, m) = (self.numerator.degree(), self.denominator.degree());
                if n > m {
                    SpherePoint::Infinity
                } else if n == m {
                    SpherePoint::Finite(self.numerator.leading() / self.denominator.leading())
                } else {
                    SpherePoint::Finite(Complex64::new(0.0, 0.0))
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.denominator.eval(z);
                if den == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.numerator.eval(z) / den)
                }
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let q = self.denominator.eval(z);
        self.crit_poly.eval(z) / (q * q)
    }

    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        let q = self.denominator.eval(z);
        self.second_poly.eval(z) / (q * q * q)
    }

    pub fn third_derivative(&self, z: Complex64) -> Complex64 {
        let q = self.denominator.eval(z);
        let q2 = q * q;
        self.third_poly.eval(z) / (q2 * q2)
    }

    /// `h ∘ R ∘ h⁻¹`.
    pub fn conjugate(&self, h: &MobiusTransform) -> Result<Self> {
        let inv = h.inverse();
        let n = self.degree;
        // R(h⁻¹(w)) = Σ p_k (αw+β)^k (γw+δ)^{n−k} / Σ q_k (…)
        let top = ComplexPolynomial::new(vec![inv.b, inv.a]);
        let bottom = ComplexPolynomial::new(vec![inv.d, inv.c]);
        let homogenize = |p: &ComplexPolynomial| {
            p.coefficients().iter().enumerate().fold(
                ComplexPolynomial::constant(Complex64::new(0.0, 0.0)),
                |acc, (k, &ck)| acc.add(&top.pow(k).mul(&bottom.pow(n - k)).scale(ck)),
            )
        };
        let ph = homogenize(&self.numerator);
        let qh = homogenize(&self.denominator);
        let num = ph.scale(h.a).add(&qh.scale(h.b));
        let den = ph.scale(h.c).add(&qh.scale(h.d));
        let scale = num.max_abs_coeff().max(den.max_abs_coeff());
        let trim = |p: &ComplexPolynomial| {
            let cutoff = 1e-13 * scale;
            let mut cs = p.coefficients().to_vec();
            while cs.len() > 1 && cs.last().is_some_and(|c| c.norm() <= cutoff) {
                cs.pop();
            }
            for c in cs.iter_mut() {
                if c.norm() <= cutoff {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            ComplexPolynomial::new(cs)
        };
        Self::new(trim(&num), trim(&den))
    }

    /// Preimages `R⁻¹(z)`: the roots of `P(y) − z Q(y)`.
    pub fn preimages(&self, z: Complex64, tol: &Tolerances) -> Result<Preimages> {
        let eq = self.numerator.sub(&self.denominator.scale(z));
        let missing = self.degree - eq.degree();
        let roots = if eq.degree() == 0 {
            Vec::new()
        } else {
            poly_roots_with(
                &eq,
                &RootOptions {
                    residual_tol: tol.root,
                    ..RootOptions::default()
                },
            )?
        };
        let points: Vec<Preimage> = roots
            .into_iter()
            .map(|y| {
                let derivative = self.derivative(y);
                Preimage {
                    point: y,
                    derivative,
                    ill_conditioned: derivative.norm() < tol.ill_conditioned,
                }
            })
            .collect();
        let near_critical_value = points.iter().any(|p| p.ill_conditioned);
        Ok(Preimages {
            points,
            at_infinity: missing,
            near_critical_value,
        })
    }

    /// Conjugates the map so the given three fixed points land on `0, 1, ∞`.
    pub fn normalize_to_standard(
        &self,
        triple: [SpherePoint; 3],
        tol: &Tolerances,
    ) -> Result<(RationalMap, MobiusTransform)> {
        for p in triple {
            self.check_fixed(p, tol)?;
        }
        let h = MobiusTransform::to_standard(triple[0], triple[1], triple[2])?;
        let conj = self.conjugate(&h)?;
        if !conj.is_standard() {
            return Err(Error::NotStandard);
        }
        Ok((conj, h))
    }

    fn check_fixed(&self, p: SpherePoint, tol: &Tolerances) -> Result<()> {
        match p {
            SpherePoint::Infinity => {
                if self.fixes_infinity() {
                    Ok(())
                } else {
                    Err(Error::NotFixed {
                        point: "∞".into(),
                        residual: f64::INFINITY,
                    })
                }
            }
            SpherePoint::Finite(z) => {
                let residual = (self.eval(z) - z).norm() / z.norm().max(1.0);
                if residual.is_finite() && residual < tol.fixed_point {
                    Ok(())
                } else {
                    Err(Error::NotFixed {
                        point: z.to_string(),
                        residual,
                    })
                }
            }
        }
    }

    /// Finite fixed points: roots of `P − zQ`.
    pub fn finite_fixed_points(&self) -> Result<Vec<Complex64>> {
        let eq = self
            .numerator
            .sub(&self.denominator.mul(&ComplexPolynomial::from_real(&[0.0, 1.0])));
        if eq.degree() == 0 {
            return Ok(Vec::new());
        }
        poly_roots(&eq)
    }

    /// Snaps `z` onto 0 or 1 when the map is standard and `z` is within `tol.snap`.
    pub(crate) fn snap(&self, z: Complex64, tol: &Tolerances) -> Complex64 {
        snap_to_fixed(z, self.standard, tol.snap)
    }
}

pub(crate) fn snap_to_fixed(z: Complex64, standard: bool, snap: f64) -> Complex64 {
    if !standard {
        return z;
    }
    if z.norm() < snap {
        Complex64::new(0.0, 0.0)
    } else if (z - 1.0).norm() < snap {
        Complex64::new(1.0, 0.0)
    } else {
        z
    }
}

fn check_coprime(p: &ComplexPolynomial, q: &ComplexPolynomial) -> Result<()> {
    let (small, large) = if p.degree() <= q.degree() { (p, q) } else { (q, p) };
    if small.degree() == 0 {
        return Ok(());
    }
    let roots = poly_roots(small)?;
    let norm = large.max_abs_coeff();
    for r in roots {
        let scaled = large.eval(r).norm() / (norm * r.norm().max(1.0).powi(large.degree() as i32));
        if scaled < COPRIME_TOL {
            return Err(Error::CommonRoot { root: r });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub point: Complex64,
    pub derivative: Complex64,
    pub ill_conditioned: bool,
}

/// Result of [`RationalMap::preimages`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimages {
    pub points: Vec<Preimage>,
    /// Number of preimages at ∞ (nonzero only for maps not fixing ∞).
    pub at_infinity: usize,
    /// Set when some preimage has `|R'| < tol.ill_conditioned`, i.e. `z` sits on
    /// or near a critical value and roots may coalesce.
    pub near_critical_value: bool,
}
