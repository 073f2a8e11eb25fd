//! Phase-space states in three charts of T*S² and the evaluation of the
//! Hamiltonian, kinetic energy, and the cubic integral F in each of them.
//!
//! Charts:
//! * spherical `(θ, φ, p_θ, p_φ)`: canonical, valid away from the poles;
//! * pole `(x, y, p_x, p_y)` with a hemisphere flag: canonical, valid for
//!   x² + y² < 1 with z = ±√(1 − x² − y²);
//! * global `(x, y, z, L_x, L_y, L_z)`: the Lie-Poisson chart on the
//!   Casimir level set x² + y² + z² = 1, x·L = 0. Singularity-free, used as
//!   the canonical comparison chart.
//!
//! The coordinate convention is `(x, y, z) = (−sinθ cosφ, −sinθ sinφ, cosθ)`;
//! both forms of the potential only agree under this convention and a
//! dedicated test pins it.

use crate::model::{self, Params};
use crate::scalar::Real;
use serde::Serialize;
use thiserror::Error;

/// Scaled tolerance for the two Casimir residuals a `GlobalState` must satisfy.
pub const CASIMIR_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("theta = {0} is outside the open interval (0, pi)")]
    ThetaOutOfRange(f64),
    #[error("state has a non-finite component")]
    NonFinite,
    #[error("x^2 + y^2 = {0} must be < 1 in a pole chart")]
    OutsidePoleDisk(f64),
    #[error("hemisphere {requested:?} is inconsistent with theta = {theta}")]
    HemisphereMismatch { requested: Hemisphere, theta: f64 },
    #[error("sphere Casimir violated: |x^2+y^2+z^2-1| = {0:e}")]
    SphereCasimir(f64),
    #[error("orthogonality Casimir violated: |x.L| = {0:e} (scaled)")]
    OrthogonalityCasimir(f64),
    #[error("inverse chart undefined at |z| = 1 (z = {0})")]
    AtPole(f64),
    #[error("|z| = {0} too close to the equator for the pole-chart momentum map")]
    NearEquator(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    North,
    South,
}

impl Hemisphere {
    /// z-sign of this hemisphere: +1 north, −1 south.
    #[inline]
    pub fn z_sign(self) -> f64 {
        match self {
            Hemisphere::North => 1.0,
            Hemisphere::South => -1.0,
        }
    }

    pub fn of_z(z: f64) -> Hemisphere {
        if z >= 0.0 {
            Hemisphere::North
        } else {
            Hemisphere::South
        }
    }
}

/// Canonical spherical-chart state; θ strictly interior to (0, π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalState<T> {
    pub theta: T,
    pub phi: T,
    pub p_theta: T,
    pub p_phi: T,
}

impl<T: Real> SphericalState<T> {
    pub fn new(theta: T, phi: T, p_theta: T, p_phi: T) -> Result<Self, ChartError> {
        let tv = theta.value();
        if !(tv > 0.0 && tv < std::f64::consts::PI) {
            return Err(ChartError::ThetaOutOfRange(tv));
        }
        for v in [theta, phi, p_theta, p_phi] {
            if !v.value().is_finite() {
                return Err(ChartError::NonFinite);
            }
        }
        Ok(SphericalState {
            theta,
            phi,
            p_theta,
            p_phi,
        })
    }

    #[inline]
    pub fn coords(&self) -> [T; 4] {
        [self.theta, self.phi, self.p_theta, self.p_phi]
    }
}

/// Canonical pole-chart state; `hemisphere` fixes z = ±√(1 − x² − y²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleChartState<T> {
    pub hemisphere: Hemisphere,
    pub x: T,
    pub y: T,
    pub p_x: T,
    pub p_y: T,
}

impl<T: Real> PoleChartState<T> {
    pub fn new(hemisphere: Hemisphere, x: T, y: T, p_x: T, p_y: T) -> Result<Self, ChartError> {
        let r2 = x.value() * x.value() + y.value() * y.value();
        if !(r2 < 1.0) {
            return Err(ChartError::OutsidePoleDisk(r2));
        }
        for v in [x, y, p_x, p_y] {
            if !v.value().is_finite() {
                return Err(ChartError::NonFinite);
            }
        }
        Ok(PoleChartState {
            hemisphere,
            x,
            y,
            p_x,
            p_y,
        })
    }

    /// Signed height z = ±√(1 − x² − y²).
    #[inline]
    pub fn z(&self) -> T {
        let root = (T::one() - self.x * self.x - self.y * self.y).sqrt();
        match self.hemisphere {
            Hemisphere::North => root,
            Hemisphere::South => -root,
        }
    }

    #[inline]
    pub fn coords(&self) -> [T; 4] {
        [self.x, self.y, self.p_x, self.p_y]
    }
}

/// Position on S² with angular momentum, on the Casimir level set
/// x² + y² + z² = 1, x·L = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub l_x: T,
    pub l_y: T,
    pub l_z: T,
}

impl<T: Real> GlobalState<T> {
    /// Validates both Casimir residuals (1e−12, orthogonality scaled by 1 + ‖L‖).
    pub fn new(x: T, y: T, z: T, l_x: T, l_y: T, l_z: T) -> Result<Self, ChartError> {
        let st = GlobalState {
            x,
            y,
            z,
            l_x,
            l_y,
            l_z,
        };
        let (sphere, ortho) = st.casimir_residuals();
        if !sphere.is_finite() || !ortho.is_finite() {
            return Err(ChartError::NonFinite);
        }
        if sphere > CASIMIR_TOL {
            return Err(ChartError::SphereCasimir(sphere));
        }
        if ortho > CASIMIR_TOL {
            return Err(ChartError::OrthogonalityCasimir(ortho));
        }
        Ok(st)
    }

    /// `(|x²+y²+z²−1|, |x·L| / (1+‖L‖))`, both as primal values.
    pub fn casimir_residuals(&self) -> (f64, f64) {
        let [x, y, z] = [self.x.value(), self.y.value(), self.z.value()];
        let [lx, ly, lz] = [self.l_x.value(), self.l_y.value(), self.l_z.value()];
        let sphere = (x * x + y * y + z * z - 1.0).abs();
        let norm_l = (lx * lx + ly * ly + lz * lz).sqrt();
        let ortho = (x * lx + y * ly + z * lz).abs() / (1.0 + norm_l);
        (sphere, ortho)
    }

    #[inline]
    pub fn coords(&self) -> [T; 6] {
        [self.x, self.y, self.z, self.l_x, self.l_y, self.l_z]
    }
}

impl GlobalState<f64> {
    /// Projects raw components onto the Casimir level set: the position is
    /// renormalized to the unit sphere and L is orthogonalized against it.
    /// Returns the projected state together with the pre-projection residual
    /// max(sphere, scaled orthogonality), so integrator defects stay visible.
    pub fn project(raw: [f64; 6]) -> (GlobalState<f64>, f64) {
        let [x, y, z, lx, ly, lz] = raw;
        let sphere = (x * x + y * y + z * z - 1.0).abs();
        let norm_l = (lx * lx + ly * ly + lz * lz).sqrt();
        let ortho = (x * lx + y * ly + z * lz).abs() / (1.0 + norm_l);
        let residual = sphere.max(ortho);

        let n = (x * x + y * y + z * z).sqrt();
        let (px, py, pz) = (x / n, y / n, z / n);
        let dot = px * lx + py * ly + pz * lz;
        let st = GlobalState {
            x: px,
            y: py,
            z: pz,
            l_x: lx - dot * px,
            l_y: ly - dot * py,
            l_z: lz - dot * pz,
        };
        (st, residual)
    }
}

/// A phase-space point tagged by chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum State<T> {
    Spherical(SphericalState<T>),
    Pole(PoleChartState<T>),
    Global(GlobalState<T>),
}

/// The complexified view ξ = x + iy, η = L_x + iL_y of a global state,
/// used by the complex equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexView {
    pub xi: num_complex::Complex64,
    pub eta: num_complex::Complex64,
}

impl From<&GlobalState<f64>> for ComplexView {
    fn from(g: &GlobalState<f64>) -> Self {
        ComplexView {
            xi: num_complex::Complex64::new(g.x, g.y),
            eta: num_complex::Complex64::new(g.l_x, g.l_y),
        }
    }
}

// ---------------------------------------------------------------------------
// Chart transforms
// ---------------------------------------------------------------------------

/// Canonical lift of the position map to the requested pole chart.
///
/// Positions: x = −sinθ cosφ, y = −sinθ sinφ. Momenta follow the canonical
/// transformation (p_φ = x p_y − y p_x exactly); the momentum inverse uses the
/// signed z, which reduces to the usual √((x²+y²)^{−1}−1) factor on the north
/// chart.
pub fn spherical_to_pole<T: Real>(
    st: &SphericalState<T>,
    hemisphere: Hemisphere,
) -> Result<PoleChartState<T>, ChartError> {
    let z = st.theta.cos();
    if z.value() * hemisphere.z_sign() <= 0.0 {
        return Err(ChartError::HemisphereMismatch {
            requested: hemisphere,
            theta: st.theta.value(),
        });
    }
    let sin_t = st.theta.sin();
    let (cos_p, sin_p) = (st.phi.cos(), st.phi.sin());
    let x = -sin_t * cos_p;
    let y = -sin_t * sin_p;
    // Rotated momentum components: u along (cosφ, sinφ), v along (sinφ, −cosφ).
    let u = -st.p_theta / z;
    let v = st.p_phi / sin_t;
    let p_x = cos_p * u + sin_p * v;
    let p_y = sin_p * u - cos_p * v;
    PoleChartState::new(hemisphere, x, y, p_x, p_y)
}

/// Inverse of [`spherical_to_pole`]; fails at the exact pole x = y = 0 where
/// the spherical chart is undefined.
pub fn pole_to_spherical<T: Real>(st: &PoleChartState<T>) -> Result<SphericalState<T>, ChartError> {
    let r2 = st.x * st.x + st.y * st.y;
    if r2.value() <= 0.0 {
        return Err(ChartError::AtPole(st.z().value()));
    }
    let sin_t = r2.sqrt();
    let z = st.z();
    // acos(z) covers both hemispheres uniformly.
    let theta = z.acos();
    let phi = (-st.y).atan2(-st.x);
    let u = (st.x * st.p_x + st.y * st.p_y) / (-sin_t);
    let p_theta = -z * u;
    let p_phi = st.x * st.p_y - st.y * st.p_x;
    SphericalState::new(theta, phi, p_theta, p_phi)
}

/// Embedding of a spherical-chart state into the global chart. Lands exactly
/// (to roundoff) on both Casimir level sets; `L_z = p_φ` identically.
pub fn spherical_to_global<T: Real>(st: &SphericalState<T>) -> GlobalState<T> {
    let (sin_t, cos_t) = (st.theta.sin(), st.theta.cos());
    let (sin_p, cos_p) = (st.phi.sin(), st.phi.cos());
    let cot_t = cos_t / sin_t;
    GlobalState {
        x: -sin_t * cos_p,
        y: -sin_t * sin_p,
        z: cos_t,
        l_x: sin_p * st.p_theta + cot_t * cos_p * st.p_phi,
        l_y: -cos_p * st.p_theta + cot_t * sin_p * st.p_phi,
        l_z: st.p_phi,
    }
}

/// Inverse of [`spherical_to_global`], defined for |z| < 1.
pub fn global_to_spherical<T: Real>(st: &GlobalState<T>) -> Result<SphericalState<T>, ChartError> {
    if st.z.value().abs() >= 1.0 {
        return Err(ChartError::AtPole(st.z.value()));
    }
    let theta = st.z.acos();
    let phi = (-st.y).atan2(-st.x);
    let (sin_p, cos_p) = (phi.sin(), phi.cos());
    let p_theta = sin_p * st.l_x - cos_p * st.l_y;
    SphericalState::new(theta, phi, p_theta, st.l_z)
}

/// Embedding of a pole-chart state into the global chart. In pole
/// coordinates the angular momentum collapses to L = (−z p_y, z p_x, p_φ).
pub fn pole_to_global<T: Real>(st: &PoleChartState<T>) -> GlobalState<T> {
    let z = st.z();
    GlobalState {
        x: st.x,
        y: st.y,
        z,
        l_x: -z * st.p_y,
        l_y: z * st.p_x,
        l_z: st.x * st.p_y - st.y * st.p_x,
    }
}

/// Inverse of [`pole_to_global`] on the matching hemisphere; needs z bounded
/// away from the equator (|z| ≥ 1e−6) to invert the momentum map p = L/z.
pub fn global_to_pole<T: Real>(
    st: &GlobalState<T>,
    hemisphere: Hemisphere,
) -> Result<PoleChartState<T>, ChartError> {
    let zv = st.z.value();
    if zv * hemisphere.z_sign() <= 0.0 {
        return Err(ChartError::HemisphereMismatch {
            requested: hemisphere,
            theta: zv.acos(),
        });
    }
    if zv.abs() < 1e-6 {
        return Err(ChartError::NearEquator(zv));
    }
    let p_x = st.l_y / st.z;
    let p_y = -st.l_x / st.z;
    PoleChartState::new(hemisphere, st.x, st.y, p_x, p_y)
}

/// Any state mapped to the canonical comparison chart.
pub fn to_global<T: Real>(state: &State<T>) -> GlobalState<T> {
    match state {
        State::Spherical(s) => spherical_to_global(s),
        State::Pole(p) => pole_to_global(p),
        State::Global(g) => *g,
    }
}

/// Max-norm distance between two physical states, measured in the global
/// chart (the singularity-free canonical comparison chart; states in any
/// charts describe the same point iff this is roundoff-small).
pub fn canonical_distance(a: &State<f64>, b: &State<f64>) -> f64 {
    let ga = to_global(a).coords();
    let gb = to_global(b).coords();
    ga.iter()
        .zip(gb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Energies and the cubic integral
// ---------------------------------------------------------------------------

/// Kinetic energy in the spherical chart:
/// `K = ½ p_θ² + ½ C(cosθ) p_φ²` with `C = 1/sin²θ + G`.
#[inline]
pub fn kinetic_spherical<T: Real>(theta: T, p_theta: T, p_phi: T, s: T) -> T {
    let half = T::from_f64(0.5);
    let c = model::kinetic_c(theta.cos(), s);
    half * p_theta * p_theta + half * c * p_phi * p_phi
}

/// Hamiltonian on spherical-chart coordinates `[θ, φ, p_θ, p_φ]` (unchecked).
pub fn hamiltonian_spherical_coords<T: Real>(q: [T; 4], params: &Params) -> T {
    let [theta, phi, p_theta, p_phi] = q;
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let c = T::from_f64(params.c);
    let z = theta.cos();
    let wv = model::w(z, s);
    let v = a * theta.sin() * phi.cos() / wv.sqrt() + c / wv;
    kinetic_spherical(theta, p_theta, p_phi, s) + v
}

/// Kinetic energy on pole-chart coordinates `[x, y, p_x, p_y]` (unchecked):
/// `K = ½(p_x² + p_y² − (x p_x + y p_y)² + (x p_y − y p_x)² G(z))`.
pub fn kinetic_pole_coords<T: Real>(q: [T; 4], hemisphere: Hemisphere, s: T) -> T {
    let [x, y, p_x, p_y] = q;
    let z = signed_z(x, y, hemisphere);
    let radial = x * p_x + y * p_y;
    let p_phi = x * p_y - y * p_x;
    T::from_f64(0.5)
        * (p_x * p_x + p_y * p_y - radial * radial + p_phi * p_phi * model::g(z, s))
}

#[inline]
fn signed_z<T: Real>(x: T, y: T, hemisphere: Hemisphere) -> T {
    let root = (T::one() - x * x - y * y).sqrt();
    match hemisphere {
        Hemisphere::North => root,
        Hemisphere::South => -root,
    }
}

/// Hamiltonian on pole-chart coordinates (unchecked).
pub fn hamiltonian_pole_coords<T: Real>(q: [T; 4], hemisphere: Hemisphere, params: &Params) -> T {
    let [x, y, _, _] = q;
    let z = signed_z(x, y, hemisphere);
    kinetic_pole_coords(q, hemisphere, T::from_f64(params.s))
        + model::potential_global(x, y, z, params)
}

/// Kinetic energy on global coordinates: `K = ½(L_x² + L_y² + (1+G(z)) L_z²)`.
/// Agrees with the chart forms on the Casimir level set.
pub fn kinetic_global_coords<T: Real>(u: [T; 6], s: T) -> T {
    let [_, _, z, lx, ly, lz] = u;
    T::from_f64(0.5) * (lx * lx + ly * ly + (T::one() + model::g(z, s)) * lz * lz)
}

/// Hamiltonian on global coordinates (unchecked).
pub fn hamiltonian_global_coords<T: Real>(u: [T; 6], params: &Params) -> T {
    let [x, y, z, ..] = u;
    kinetic_global_coords(u, T::from_f64(params.s)) + model::potential_global(x, y, z, params)
}

/// The cubic integral in the spherical chart, four-term long form:
/// `F = 2H p_φ − p_φ³ + A cosφ · Q/(√W sinθ) · p_φ + 2A sinφ √W p_θ`.
pub fn integral_f_spherical_coords<T: Real>(q: [T; 4], params: &Params) -> T {
    let [theta, phi, p_theta, p_phi] = q;
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let z = theta.cos();
    let wv = model::w(z, s);
    let h = hamiltonian_spherical_coords(q, params);
    T::from_f64(2.0) * h * p_phi - p_phi * p_phi * p_phi
        + a * phi.cos() * model::q(z, s) / (wv.sqrt() * theta.sin()) * p_phi
        + T::from_f64(2.0) * a * phi.sin() * wv.sqrt() * p_theta
}

/// The cubic integral in the global chart, short form (the pole-regular one):
/// `F = 2H L_z − L_z³ + (A/√W)(x L_z + 2W L_x)`.
pub fn integral_f_global_coords<T: Real>(u: [T; 6], params: &Params) -> T {
    let [x, _, z, lx, _, lz] = u;
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let wv = model::w(z, s);
    let h = hamiltonian_global_coords(u, params);
    T::from_f64(2.0) * h * lz - lz * lz * lz
        + a / wv.sqrt() * (x * lz + T::from_f64(2.0) * wv * lx)
}

/// The cubic integral on pole-chart coordinates. Built from the global short
/// form with L = (−z p_y, z p_x, x p_y − y p_x), so it is hemisphere-uniform
/// and regular at the pole.
pub fn integral_f_pole_coords<T: Real>(q: [T; 4], hemisphere: Hemisphere, params: &Params) -> T {
    let [x, y, p_x, p_y] = q;
    let z = signed_z(x, y, hemisphere);
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let wv = model::w(z, s);
    let p_phi = x * p_y - y * p_x;
    let h = hamiltonian_pole_coords(q, hemisphere, params);
    T::from_f64(2.0) * h * p_phi - p_phi * p_phi * p_phi
        + a / wv.sqrt() * (x * p_phi - T::from_f64(2.0) * wv * z * p_y)
}

/// Hamiltonian of a state in any chart.
pub fn hamiltonian<T: Real>(state: &State<T>, params: &Params) -> T {
    match state {
        State::Spherical(s) => hamiltonian_spherical_coords(s.coords(), params),
        State::Pole(p) => hamiltonian_pole_coords(p.coords(), p.hemisphere, params),
        State::Global(g) => hamiltonian_global_coords(g.coords(), params),
    }
}

/// The cubic integral of a state in any chart.
pub fn integral_f<T: Real>(state: &State<T>, params: &Params) -> T {
    match state {
        State::Spherical(s) => integral_f_spherical_coords(s.coords(), params),
        State::Pole(p) => integral_f_pole_coords(p.coords(), p.hemisphere, params),
        State::Global(g) => integral_f_global_coords(g.coords(), params),
    }
}

/// The potential at a position given in any chart.
pub fn potential<T: Real>(state: &State<T>, params: &Params) -> T {
    match state {
        State::Spherical(s) => model::potential_spherical(s.theta, s.phi, params)
            .expect("spherical states are interior by construction"),
        State::Pole(p) => model::potential_global(p.x, p.y, p.z(), params),
        State::Global(g) => model::potential_global(g.x, g.y, g.z, params),
    }
}

/// 2×2 momentum quadratic form of K in the spherical chart: diag(1, C(cosθ)).
pub fn kinetic_quadratic_form_spherical<T: Real>(theta: T, s: T) -> [[T; 2]; 2] {
    let c = model::kinetic_c(theta.cos(), s);
    [[T::one(), T::zero()], [T::zero(), c]]
}

/// 2×2 momentum quadratic form of K in a pole chart. Eigenvalues are z² and
/// R(z)/W(z)², both strictly positive for x² + y² < 1.
pub fn kinetic_quadratic_form_pole<T: Real>(
    x: T,
    y: T,
    hemisphere: Hemisphere,
    s: T,
) -> [[T; 2]; 2] {
    let z = signed_z(x, y, hemisphere);
    let g = model::g(z, s);
    let off = -x * y * (T::one() + g);
    [
        [T::one() - x * x + g * y * y, off],
        [off, T::one() - y * y + g * x * x],
    ]
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn symmetric_eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 - disc, tr / 2.0 + disc]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;

    fn params() -> Params {
        Params::new(1.0, 0.0, 2.0).unwrap()
    }

    /// |a − b| modulo 2π.
    fn angle_diff(a: f64, b: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let d = (a - b).rem_euclid(two_pi);
        d.min(two_pi - d)
    }

    #[test]
    fn pole_round_trip_near_equator_edge() {
        let st = SphericalState::new(
            std::f64::consts::FRAC_PI_2 - 0.1,
            0.0,
            0.3,
            0.7,
        )
        .unwrap();
        let pole = spherical_to_pole(&st, Hemisphere::North).unwrap();
        let back = pole_to_spherical(&pole).unwrap();
        assert!((back.theta - st.theta).abs() < 1e-12);
        assert!((back.phi - st.phi).abs() < 1e-12);
        assert!((back.p_theta - st.p_theta).abs() < 1e-12);
        assert!((back.p_phi - st.p_phi).abs() < 1e-12);
    }

    #[test]
    fn p_phi_is_preserved_through_pole_chart() {
        // p_φ = x p_y − y p_x is the defining relation; the composed map
        // reproduces it to a few ulps.
        let mut rng = sampling::rng(42);
        for _ in 0..200 {
            let st = sampling::random_spherical_state(&mut rng, 0.2, 1.5);
            let hemi = Hemisphere::of_z(st.theta.cos());
            if st.theta.cos().abs() < 1e-3 {
                continue;
            }
            let pole = spherical_to_pole(&st, hemi).unwrap();
            let p_phi = pole.x * pole.p_y - pole.y * pole.p_x;
            assert!((p_phi - st.p_phi).abs() <= 4e-15 * (1.0 + st.p_phi.abs()));
        }
    }

    #[test]
    fn hemisphere_mismatch_rejected() {
        let st = SphericalState::new(2.5, 0.0, 0.1, 0.1).unwrap();
        assert!(matches!(
            spherical_to_pole(&st, Hemisphere::North),
            Err(ChartError::HemisphereMismatch { .. })
        ));
        assert!(spherical_to_pole(&st, Hemisphere::South).is_ok());
    }

    #[test]
    fn global_round_trip_and_casimirs() {
        let mut rng = sampling::rng(42);
        for _ in 0..1000 {
            let st = sampling::random_spherical_state(&mut rng, 0.05, 2.0);
            let g = spherical_to_global(&st);
            let (sphere, ortho) = g.casimir_residuals();
            assert!(sphere <= 1e-13, "sphere casimir {sphere:e}");
            assert!(ortho <= 1e-13, "orthogonality casimir {ortho:e}");
            assert_eq!(g.l_z, st.p_phi);
            let back = global_to_spherical(&g).unwrap();
            assert!((back.theta - st.theta).abs() < 1e-12);
            assert!(angle_diff(back.phi, st.phi) < 1e-12);
            assert!((back.p_theta - st.p_theta).abs() < 1e-12);
            assert!((back.p_phi - st.p_phi).abs() < 1e-12);
        }
    }

    #[test]
    fn convention_fixture() {
        // θ = π/2, φ = 0, p_θ = 0, p_φ = 1 → (x,y,z) = (−1,0,0), L_z = 1.
        let st = SphericalState::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 1.0).unwrap();
        let g = spherical_to_global(&st);
        assert!((g.x + 1.0).abs() < 1e-15);
        assert!(g.y.abs() < 1e-15);
        assert!(g.z.abs() < 1e-16);
        assert_eq!(g.l_z, 1.0);
        let dot = g.x * g.l_x + g.y * g.l_y + g.z * g.l_z;
        assert!(dot.abs() < 1e-15);
    }

    #[test]
    fn kinetic_agrees_between_spherical_and_global() {
        let mut rng = sampling::rng(7);
        for _ in 0..500 {
            let st = sampling::random_spherical_state(&mut rng, 0.1, 2.0);
            let g = spherical_to_global(&st);
            let k_sph = kinetic_spherical(st.theta, st.p_theta, st.p_phi, 1.7);
            let k_glob = kinetic_global_coords(g.coords(), 1.7);
            let scale = 1.0 + k_sph.abs();
            assert!((k_sph - k_glob).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn hamiltonian_fixtures() {
        // Pure p_θ kinetic term at the equator.
        let free = Params::new(0.0, 0.0, 2.0).unwrap();
        let st = SphericalState::new(std::f64::consts::FRAC_PI_2, 0.3, 1.0, 0.0).unwrap();
        assert!((hamiltonian(&State::Spherical(st), &free) - 0.5).abs() < 1e-15);

        // ½(1 + 1/16) + 1/√2 at the equator with unit p_φ.
        let st = SphericalState::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 1.0).unwrap();
        let h = hamiltonian(&State::Spherical(st), &params());
        assert!((h - 1.2383567811865475).abs() < 1e-15);

        // North-pole rest state with L_x only (Casimir-forced L_z = 0).
        let p = Params::new(1.0, 1.0, 2.0).unwrap();
        let g = GlobalState::new(0.0, 0.0, 1.0, 0.5, 0.0, 0.0).unwrap();
        let h = hamiltonian(&State::Global(g), &p);
        assert!((h - (0.125 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn integral_f_fixtures() {
        // A = 0 ⇒ F = 2H p_φ − p_φ³ exactly.
        let p0 = Params::new(0.0, 0.4, 1.5).unwrap();
        let st = SphericalState::new(1.1, 0.8, 0.4, -0.9).unwrap();
        let h = hamiltonian(&State::Spherical(st), &p0);
        let f = integral_f(&State::Spherical(st), &p0);
        assert!((f - (2.0 * h * st.p_phi - st.p_phi.powi(3))).abs() < 1e-14);

        // L = 0 ⇒ F = 0 (every term carries a momentum factor).
        let g = GlobalState::new(0.6, 0.0, 0.8, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(integral_f(&State::Global(g), &params()), 0.0);
    }

    #[test]
    fn f_cross_chart_consistency() {
        let p = Params::new(0.7, -0.3, 1.5).unwrap();
        let mut rng = sampling::rng(42);
        let mut checked = 0;
        while checked < 1000 {
            let st = sampling::random_spherical_state(&mut rng, 0.05, 2.0);
            if st.theta.cos().abs() > 0.95 {
                continue;
            }
            checked += 1;
            let f_sph = integral_f(&State::Spherical(st), &p);
            let g = spherical_to_global(&st);
            let f_glob = integral_f(&State::Global(g), &p);
            let scale = 1.0 + f_sph.abs();
            assert!(
                (f_sph - f_glob).abs() <= 1e-11 * scale,
                "sph {f_sph} vs glob {f_glob}"
            );
        }
    }

    #[test]
    fn h_and_f_agree_through_pole_chart() {
        let p = Params::new(0.9, 0.2, 1.3).unwrap();
        let mut rng = sampling::rng(11);
        let mut checked = 0;
        while checked < 500 {
            let st = sampling::random_spherical_state(&mut rng, 0.05, 1.5);
            let z = st.theta.cos();
            if z.abs() < 0.8 || z.abs() > 0.9 {
                continue; // overlap band only
            }
            checked += 1;
            let pole = spherical_to_pole(&st, Hemisphere::of_z(z)).unwrap();
            let h_sph = hamiltonian(&State::Spherical(st), &p);
            let h_pole = hamiltonian(&State::Pole(pole), &p);
            let f_sph = integral_f(&State::Spherical(st), &p);
            let f_pole = integral_f(&State::Pole(pole), &p);
            assert!((h_sph - h_pole).abs() <= 1e-11 * (1.0 + h_sph.abs()));
            assert!((f_sph - f_pole).abs() <= 1e-11 * (1.0 + f_sph.abs()));
        }
    }

    #[test]
    fn f_bounded_at_poles() {
        // Global short form stays bounded on bounded momentum balls at the
        // poles themselves (the pole-regular gluing).
        let p = params();
        let mut rng = sampling::rng(3);
        for _ in 0..200 {
            let lx: f64 = rng.gen_range(-2.0..2.0);
            let ly: f64 = rng.gen_range(-2.0..2.0);
            for z in [1.0, -1.0] {
                // At the poles the Casimir forces L_z = 0.
                let g = GlobalState::new(0.0, 0.0, z, lx, ly, 0.0).unwrap();
                let f = integral_f(&State::Global(g), &p);
                assert!(f.is_finite());
                assert!(f.abs() < 50.0);
            }
        }
    }

    #[test]
    fn potential_agrees_across_charts() {
        let p = Params::new(0.8, -0.4, 1.6).unwrap();
        let mut rng = sampling::rng(42);
        let mut checked = 0;
        while checked < 300 {
            let st = sampling::random_spherical_state(&mut rng, 0.05, 1.0);
            let z = st.theta.cos();
            if z.abs() < 1e-3 {
                continue;
            }
            checked += 1;
            let v_sph = potential(&State::Spherical(st), &p);
            let v_glob = potential(&State::Global(spherical_to_global(&st)), &p);
            assert!((v_sph - v_glob).abs() <= 1e-12 * (1.0 + v_sph.abs()));
            let pole = spherical_to_pole(&st, Hemisphere::of_z(z)).unwrap();
            let v_pole = potential(&State::Pole(pole), &p);
            assert!((v_sph - v_pole).abs() <= 1e-12 * (1.0 + v_sph.abs()));
        }
    }

    #[test]
    fn canonical_distance_identifies_equal_states_across_charts() {
        let st = SphericalState::new(2.6, 0.4, 0.3, -0.5).unwrap();
        let pole = spherical_to_pole(&st, Hemisphere::South).unwrap();
        let g = spherical_to_global(&st);
        assert!(canonical_distance(&State::Spherical(st), &State::Pole(pole)) <= 1e-13);
        assert!(canonical_distance(&State::Spherical(st), &State::Global(g)) <= 1e-15);
        let other = SphericalState::new(2.6, 0.4, 0.3, -0.499).unwrap();
        assert!(canonical_distance(&State::Spherical(st), &State::Spherical(other)) > 1e-4);
    }

    #[test]
    fn vector_field_dispatch_matches_chart_conventions() {
        let p = params();
        let st = SphericalState::new(1.1, 0.4, 0.37, -0.21).unwrap();
        match crate::bracket::hamiltonian_vector_field(&State::Spherical(st), &p) {
            crate::bracket::FieldVector::Canonical(f) => {
                assert!((f[0] - st.p_theta).abs() < 1e-15, "dθ/dt = +p_θ");
            }
            other => panic!("expected canonical field, got {other:?}"),
        }
        let g = spherical_to_global(&st);
        match crate::bracket::hamiltonian_vector_field(&State::Global(g), &p) {
            crate::bracket::FieldVector::LiePoisson(f) => {
                let tangency: f64 = (0..3).map(|i| g.coords()[i] * f[i]).sum();
                assert!(tangency.abs() <= 1e-13, "field tangent to the sphere");
            }
            other => panic!("expected Lie-Poisson field, got {other:?}"),
        }
    }

    #[test]
    fn complex_view_matches_components() {
        let st = SphericalState::new(1.2, 0.7, 0.3, -0.4).unwrap();
        let g = spherical_to_global(&st);
        let view = ComplexView::from(&g);
        assert_eq!(view.xi.re, g.x);
        assert_eq!(view.xi.im, g.y);
        assert_eq!(view.eta.re, g.l_x);
        assert_eq!(view.eta.im, g.l_y);
    }

    #[test]
    fn kinetic_form_fixtures() {
        // Spherical chart: diag(1, C); at the pole of the pole chart: identity.
        let m = kinetic_quadratic_form_spherical(std::f64::consts::FRAC_PI_2, 2.0);
        assert_eq!(m[0][0], 1.0);
        assert!((m[1][1] - (1.0 + 1.0 / 16.0)).abs() < 1e-15);
        let m = kinetic_quadratic_form_pole(0.0, 0.0, Hemisphere::North, 2.0);
        assert_eq!(m, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn kinetic_form_positive_even_where_one_plus_g_negative() {
        // s = 1.5, z = −0.9 has 1 + G < 0, yet both eigenvalues stay positive.
        let s = 1.5;
        let z: f64 = -0.9;
        assert!(1.0 + crate::model::g(z, s) < 0.0);
        let theta = z.acos();
        let m = kinetic_quadratic_form_spherical(theta, s);
        let eig = symmetric_eigenvalues(m);
        assert!(eig[0] > 0.0);

        let r = (1.0 - z * z).sqrt();
        let m = kinetic_quadratic_form_pole(r * 0.6, -r * 0.8, Hemisphere::South, s);
        let eig = symmetric_eigenvalues(m);
        assert!(eig[0] > 0.0, "min eigenvalue {}", eig[0]);
    }

    #[test]
    fn minimum_kinetic_eigenvalue_over_grid() {
        for s in [1.01, 1.5, 5.0] {
            let mut min_eig = f64::INFINITY;
            for i in 1..200 {
                let theta = std::f64::consts::PI * i as f64 / 200.0;
                for j in 0..200 {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / 200.0;
                    let _ = phi;
                    let m = kinetic_quadratic_form_spherical(theta, s);
                    min_eig = min_eig.min(symmetric_eigenvalues(m)[0]);
                }
            }
            assert!(min_eig > 0.0, "s = {s}: min eigenvalue {min_eig}");
        }
    }
}
