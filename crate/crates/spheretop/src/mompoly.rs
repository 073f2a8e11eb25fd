//! Momentum polynomials and degree-wise decomposition of the canonical
//! bracket.
//!
//! A `MomentumPolynomial` is Σ a_{ij}(θ, φ) p_θ^i p_φ^j with position-
//! dependent coefficient functions. The bracket of two such polynomials is
//! again one, assembled by exact bookkeeping in the momenta (coefficients
//! multiplied and position-differentiated with duals, monomial degrees
//! shifted) rather than by sampling momenta. For the system's H (degree 2)
//! and F (degree 3), every coefficient of {H, F} vanishes degree by degree:
//! the momentum-free term through the Q identity, the p_θ p_φ term through
//! the P identity, and the p_φ² term through the derivative interplay of P
//! and Q.

use crate::dual::Dual;
use crate::model::{self, Params};
use crate::scalar::Real;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomPolyError {
    #[error("momentum degree ({0}, {1}) exceeds the structural cap of total degree 3")]
    DegreeOverflow(u8, u8),
    #[error("bracket input degrees ({h}, {f}) exceed the supported (2, 3)")]
    BracketDegrees { h: u8, f: u8 },
}

/// A position-dependent coefficient a(θ, φ), evaluable with its gradient.
pub trait CoefficientFn {
    fn value(&self, theta: f64, phi: f64) -> f64;
    /// (a, [∂a/∂θ, ∂a/∂φ]).
    fn value_and_grad(&self, theta: f64, phi: f64) -> (f64, [f64; 2]);
}

/// Coefficients defined by one generic expression get `CoefficientFn` (value
/// via `f64`, gradient via `Dual<f64, 2>`) for free.
pub trait PositionExpr {
    fn expr<T: Real>(&self, theta: T, phi: T) -> T;
}

impl<P: PositionExpr> CoefficientFn for P {
    fn value(&self, theta: f64, phi: f64) -> f64 {
        self.expr(theta, phi)
    }

    fn value_and_grad(&self, theta: f64, phi: f64) -> (f64, [f64; 2]) {
        let t = Dual::<f64, 2>::variable(theta, 0);
        let p = Dual::<f64, 2>::variable(phi, 1);
        let v = self.expr(t, p);
        (v.re, v.eps)
    }
}

struct ConstCoeff(f64);
impl PositionExpr for ConstCoeff {
    fn expr<T: Real>(&self, _theta: T, _phi: T) -> T {
        T::from_f64(self.0)
    }
}

/// ½·C(cosθ), the p_φ² coefficient of H.
struct HalfKineticC {
    s: f64,
}
impl PositionExpr for HalfKineticC {
    fn expr<T: Real>(&self, theta: T, _phi: T) -> T {
        T::from_f64(0.5) * model::kinetic_c(theta.cos(), T::from_f64(self.s))
    }
}

/// V(θ, φ), the momentum-free part of H.
struct PotentialCoeff {
    params: Params,
}
impl PositionExpr for PotentialCoeff {
    fn expr<T: Real>(&self, theta: T, phi: T) -> T {
        let s = T::from_f64(self.params.s);
        let z = theta.cos();
        T::from_f64(self.params.a) * theta.sin() * phi.cos() / model::w(z, s).sqrt()
            + T::from_f64(self.params.c) / model::w(z, s)
    }
}

/// C(cosθ) − 1, the p_φ³ coefficient of F.
struct KineticCMinusOne {
    s: f64,
}
impl PositionExpr for KineticCMinusOne {
    fn expr<T: Real>(&self, theta: T, _phi: T) -> T {
        model::kinetic_c(theta.cos(), T::from_f64(self.s)) - T::one()
    }
}

/// 2V + A cosφ Q/(√W sinθ), the p_φ coefficient of F.
struct FLinearPphi {
    params: Params,
}
impl PositionExpr for FLinearPphi {
    fn expr<T: Real>(&self, theta: T, phi: T) -> T {
        let s = T::from_f64(self.params.s);
        let a = T::from_f64(self.params.a);
        let z = theta.cos();
        let w = model::w(z, s);
        let v = a * theta.sin() * phi.cos() / w.sqrt() + T::from_f64(self.params.c) / w;
        T::from_f64(2.0) * v + a * phi.cos() * model::q(z, s) / (w.sqrt() * theta.sin())
    }
}

/// 2A sinφ √W, the p_θ coefficient of F.
struct FLinearPtheta {
    params: Params,
}
impl PositionExpr for FLinearPtheta {
    fn expr<T: Real>(&self, theta: T, phi: T) -> T {
        let s = T::from_f64(self.params.s);
        T::from_f64(2.0 * self.params.a) * phi.sin() * model::w(theta.cos(), s).sqrt()
    }
}

/// Polynomial in (p_θ, p_φ) with coefficient functions of (θ, φ); total
/// degree capped at 3.
pub struct MomentumPolynomial {
    terms: BTreeMap<(u8, u8), Box<dyn CoefficientFn>>,
}

impl MomentumPolynomial {
    pub fn new() -> Self {
        MomentumPolynomial {
            terms: BTreeMap::new(),
        }
    }

    /// Inserts the coefficient of p_θ^i p_φ^j.
    pub fn insert(
        &mut self,
        i: u8,
        j: u8,
        coeff: Box<dyn CoefficientFn>,
    ) -> Result<(), MomPolyError> {
        if i + j > 3 {
            return Err(MomPolyError::DegreeOverflow(i, j));
        }
        self.terms.insert((i, j), coeff);
        Ok(())
    }

    pub fn total_degree(&self) -> u8 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64, phi: f64, p_theta: f64, p_phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                c.value(theta, phi) * p_theta.powi(i as i32) * p_phi.powi(j as i32)
            })
            .sum()
    }

    /// H = ½ p_θ² + ½C(cosθ) p_φ² + V(θ, φ) as a momentum polynomial.
    pub fn hamiltonian(params: &Params) -> Self {
        let mut poly = Self::new();
        poly.insert(2, 0, Box::new(ConstCoeff(0.5))).unwrap();
        poly.insert(0, 2, Box::new(HalfKineticC { s: params.s }))
            .unwrap();
        poly.insert(0, 0, Box::new(PotentialCoeff { params: *params }))
            .unwrap();
        poly
    }

    /// F = p_θ² p_φ + (C−1) p_φ³ + (2V + A cosφ Q/(√W sinθ)) p_φ + 2A sinφ √W p_θ.
    ///
    /// This is the four-term form with 2H p_φ expanded, so the cubic
    /// structure is explicit.
    pub fn integral_f(params: &Params) -> Self {
        let mut poly = Self::new();
        poly.insert(2, 1, Box::new(ConstCoeff(1.0))).unwrap();
        poly.insert(0, 3, Box::new(KineticCMinusOne { s: params.s }))
            .unwrap();
        poly.insert(0, 1, Box::new(FLinearPphi { params: *params }))
            .unwrap();
        poly.insert(1, 0, Box::new(FLinearPtheta { params: *params }))
            .unwrap();
        poly
    }
}

impl Default for MomentumPolynomial {
    fn default() -> Self {
        Self::new()
    }
}

/// Coefficients of the canonical bracket {h, f} by momentum monomial,
/// evaluated at a basepoint (θ, φ). Monomials up to total degree 4 are
/// structurally possible; for the system's H and F every one of them
/// cancels to roundoff.
pub fn bracket_degree_decomposition(
    h: &MomentumPolynomial,
    f: &MomentumPolynomial,
    basepoint: (f64, f64),
) -> Result<BTreeMap<(u8, u8), f64>, MomPolyError> {
    if h.total_degree() > 2 || f.total_degree() > 3 {
        return Err(MomPolyError::BracketDegrees {
            h: h.total_degree(),
            f: f.total_degree(),
        });
    }
    let (theta, phi) = basepoint;

    let h_data: Vec<((u8, u8), f64, [f64; 2])> = h
        .terms
        .iter()
        .map(|(&d, c)| {
            let (v, g) = c.value_and_grad(theta, phi);
            (d, v, g)
        })
        .collect();
    let f_data: Vec<((u8, u8), f64, [f64; 2])> = f
        .terms
        .iter()
        .map(|(&d, c)| {
            let (v, g) = c.value_and_grad(theta, phi);
            (d, v, g)
        })
        .collect();

    let mut out: BTreeMap<(u8, u8), f64> = BTreeMap::new();
    for m in 0..=4u8 {
        for n in 0..=(4 - m) {
            out.insert((m, n), 0.0);
        }
    }

    // {h, f} = Σ_q ∂h/∂q ∂f/∂p_q − ∂h/∂p_q ∂f/∂q  with q ∈ {θ, φ}.
    // Positions differentiate coefficients; momenta shift monomial degrees.
    let mut add = |deg: (i16, i16), value: f64| {
        if value == 0.0 || deg.0 < 0 || deg.1 < 0 {
            return;
        }
        *out.get_mut(&(deg.0 as u8, deg.1 as u8)).unwrap() += value;
    };

    for &((hi, hj), hv, hg) in &h_data {
        for &((fi, fj), fv, fg) in &f_data {
            let (hi, hj, fi, fj) = (hi as i16, hj as i16, fi as i16, fj as i16);
            // ∂h/∂θ · ∂f/∂p_θ : monomial (hi + fi − 1, hj + fj)
            add((hi + fi - 1, hj + fj), hg[0] * fi as f64 * fv);
            // − ∂h/∂p_θ · ∂f/∂θ
            add((hi + fi - 1, hj + fj), -(hi as f64) * hv * fg[0]);
            // ∂h/∂φ · ∂f/∂p_φ : monomial (hi + fi, hj + fj − 1)
            add((hi + fi, hj + fj - 1), hg[1] * fj as f64 * fv);
            // − ∂h/∂p_φ · ∂f/∂φ
            add((hi + fi, hj + fj - 1), -(hj as f64) * hv * fg[1]);
        }
    }
    Ok(out)
}
