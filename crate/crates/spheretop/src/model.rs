//! System parameters and the scalar structure functions on z = cos θ.
//!
//! The family is parametrized by `(A, c, s)` with `s > 1`. All position
//! dependence of the kinetic and potential terms funnels through the
//! structure functions
//!
//! ```text
//! W(z) = z + s
//! P(z) = 3z² + 4sz + 1
//! Q(z) = 3z² + 2sz − 1
//! G(z) = P(z) / (2W(z))²
//! R(z) = 3/2·z² + 3sz + s² − 3/4·z⁴ − sz³ + 1/4
//! C(z) = 1/(1−z²) + G(z)          (azimuthal kinetic coefficient)
//! ```
//!
//! together with the polynomial identities `Q = 2zW + z² − 1` and
//! `P = 4zW + 1 − z²`, the endpoint value `R(−1) = (s−1)²`, the derivative
//! `R′ = 3(1−z²)(z+s)`, and the quotient `C = R / ((1−z²)W²)`. Everything
//! downstream (pole gluing of the cubic integral, degree-wise bracket
//! cancellation, positivity of the kinetic form) rides on these.

use crate::scalar::Real;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape parameter must satisfy s > 1 (got s = {0})")]
    ShapeParameter(f64),
    #[error("parameter {name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("z must lie in [-1, 1] (got z = {0})")]
    ZOutOfRange(f64),
    #[error("theta must lie strictly inside (0, pi) (got theta = {0})")]
    ThetaOutOfRange(f64),
    #[error("operation requires c = 0 (got c = {0})")]
    RequiresZeroC(f64),
}

/// Couplings of the Hamiltonian family. `a` multiplies the trigonometric
/// potential term, `c` the 1/W term, and `s` shapes the kinetic profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub a: f64,
    pub c: f64,
    pub s: f64,
}

impl Params {
    /// Validates `s > 1` strictly and finiteness of all couplings.
    pub fn new(a: f64, c: f64, s: f64) -> Result<Self, ModelError> {
        for (name, value) in [("A", a), ("c", c), ("s", s)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        if s <= 1.0 {
            return Err(ModelError::ShapeParameter(s));
        }
        Ok(Params { a, c, s })
    }
}

/// W(z) = z + s. Strictly positive on [−1, 1] for s > 1, so √W needs no
/// branch choice anywhere on the sphere.
#[inline]
pub fn w<T: Real>(z: T, s: T) -> T {
    z + s
}

/// P(z) = 3z² + 4sz + 1.
#[inline]
pub fn p<T: Real>(z: T, s: T) -> T {
    T::from_f64(3.0) * z * z + T::from_f64(4.0) * s * z + T::one()
}

/// Q(z) = 3z² + 2sz − 1.
#[inline]
pub fn q<T: Real>(z: T, s: T) -> T {
    T::from_f64(3.0) * z * z + T::from_f64(2.0) * s * z - T::one()
}

/// G(z) = P(z) / (2W(z))².
#[inline]
pub fn g<T: Real>(z: T, s: T) -> T {
    let two_w = T::from_f64(2.0) * w(z, s);
    p(z, s) / (two_w * two_w)
}

/// Positivity numerator R(z) = 3/2·z² + 3sz + s² − 3/4·z⁴ − sz³ + 1/4.
///
/// The constant term is +1/4: that is the unique choice consistent with both
/// the endpoint value R(−1) = (s−1)² and the quotient C·(1−z²)W² = R.
#[inline]
pub fn r<T: Real>(z: T, s: T) -> T {
    let z2 = z * z;
    T::from_f64(1.5) * z2 + T::from_f64(3.0) * s * z + s * s
        - T::from_f64(0.75) * z2 * z2
        - s * z2 * z
        + T::from_f64(0.25)
}

/// Azimuthal kinetic coefficient C(z) = 1/(1−z²) + G(z), defined for |z| < 1.
#[inline]
pub fn kinetic_c<T: Real>(z: T, s: T) -> T {
    (T::one() - z * z).recip() + g(z, s)
}

/// Analytic derivative dR/dz = 3(1−z²)(z+s).
#[inline]
pub fn dr_dz<T: Real>(z: T, s: T) -> T {
    T::from_f64(3.0) * (T::one() - z * z) * w(z, s)
}

/// All structure-function values at one z. `c` is `None` at the poles
/// z = ±1, where the azimuthal coefficient has no finite value; callers
/// near the poles use `g` and the pole-chart kinetic form instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureValues<T> {
    pub z: T,
    pub w: T,
    pub p: T,
    pub q: T,
    pub g: T,
    pub r: T,
    pub c: Option<T>,
}

/// Evaluates all six structure functions at `z ∈ [−1, 1]`, `s > 1`.
pub fn eval_structure<T: Real>(z: T, s: T) -> Result<StructureValues<T>, ModelError> {
    let zv = z.value();
    if !(-1.0..=1.0).contains(&zv) || !zv.is_finite() {
        return Err(ModelError::ZOutOfRange(zv));
    }
    if !(s.value() > 1.0) {
        return Err(ModelError::ShapeParameter(s.value()));
    }
    let c = if zv.abs() >= 1.0 {
        None
    } else {
        Some(kinetic_c(z, s))
    };
    Ok(StructureValues {
        z,
        w: w(z, s),
        p: p(z, s),
        q: q(z, s),
        g: g(z, s),
        r: r(z, s),
        c,
    })
}

/// Residuals of the two polynomial identities:
/// `rQ = Q − (2zW + z² − 1)` and `rP = P − (4zW + 1 − z²)`.
/// Both vanish identically; in floating point they stay within a few ulps.
pub fn check_identities<T: Real>(z: T, s: T) -> (T, T) {
    let wv = w(z, s);
    let two = T::from_f64(2.0);
    let four = T::from_f64(4.0);
    let rq = q(z, s) - (two * z * wv + z * z - T::one());
    let rp = p(z, s) - (four * z * wv + T::one() - z * z);
    (rq, rp)
}

/// dR/dz (the analytic formula; cross-checked against finite differences of
/// [`r`] in the test suite).
pub fn structure_derivative<T: Real>(z: T, s: T) -> Result<T, ModelError> {
    if !(s.value() > 1.0) {
        return Err(ModelError::ShapeParameter(s.value()));
    }
    Ok(dr_dz(z, s))
}

/// Potential in the spherical chart:
/// `V = A sinθ cosφ / √W(cosθ) + c / W(cosθ)`, θ strictly inside (0, π).
pub fn potential_spherical<T: Real>(theta: T, phi: T, params: &Params) -> Result<T, ModelError> {
    let tv = theta.value();
    if !(tv > 0.0 && tv < std::f64::consts::PI) {
        return Err(ModelError::ThetaOutOfRange(tv));
    }
    let z = theta.cos();
    let a = T::from_f64(params.a);
    let c = T::from_f64(params.c);
    let s = T::from_f64(params.s);
    Ok(a * theta.sin() * phi.cos() / w(z, s).sqrt() + c / w(z, s))
}

/// Potential in embedding coordinates: `V = −A x / √W(z) + c / W(z)`.
/// Smooth on the whole sphere (the sign convention is
/// `(x, y, z) = (−sinθ cosφ, −sinθ sinφ, cosθ)`).
pub fn potential_global<T: Real>(x: T, _y: T, z: T, params: &Params) -> T {
    let a = T::from_f64(params.a);
    let c = T::from_f64(params.c);
    let s = T::from_f64(params.s);
    -a * x / w(z, s).sqrt() + c / w(z, s)
}

/// The factored potential coefficient `U(z) = −A/√W(z)` in `V = x·U(z)`,
/// which only exists when `c = 0`.
pub fn potential_u<T: Real>(z: T, params: &Params) -> Result<T, ModelError> {
    if params.c != 0.0 {
        return Err(ModelError::RequiresZeroC(params.c));
    }
    Ok(-T::from_f64(params.a) / w(z, T::from_f64(params.s)).sqrt())
}

/// dU/dz for `c = 0`: `U′(z) = A / (2 W(z)^{3/2})`.
pub fn potential_u_prime<T: Real>(z: T, params: &Params) -> Result<T, ModelError> {
    if params.c != 0.0 {
        return Err(ModelError::RequiresZeroC(params.c));
    }
    let wv = w(z, T::from_f64(params.s));
    Ok(T::from_f64(params.a) / (T::from_f64(2.0) * wv * wv.sqrt()))
}
