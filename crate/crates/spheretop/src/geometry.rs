//! Kinetic metrics, Gaussian curvature, positivity verification, and the
//! Maupertuis geodesic family.
//!
//! The kinetic energy of the base system defines the surface-of-revolution
//! metric ds² = dθ² + dφ²/C(cosθ); at energy h > max V the Maupertuis
//! principle rescales it conformally to (h − V)·ds² whose geodesic flow is
//! generated by H_geod = K/(h − V). The degree-3 integral of that flow is
//! the momentum-homogenized image of F; because the closed form of that
//! integral admits several sign/leading-term conventions, the library
//! enumerates all eight candidate combinations and keeps the unique one that
//! commutes with H_geod, storing the full residual table alongside the
//! winner.

use crate::bracket::{self, Observable};
use crate::charts::{self, Hemisphere};
use crate::dual::Dual;
use crate::dynamics::{self, ChartPoint, IntegratorConfig};
use crate::gc::GCParams;
use crate::model::{self, Params};
use crate::sampling;
use crate::scalar::Real;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum GeometryError {
    #[error("theta grid touches a pole (theta = {0}); curvature needs the open interval (0, pi)")]
    GridTouchesPole(f64),
    #[error("shape parameter must satisfy s > 1 (got {0})")]
    ShapeParameter(f64),
    #[error("energy parameter h = {h} must exceed the potential maximum {max_v}")]
    HBelowPotentialMax { h: f64, max_v: f64 },
    #[error("no sign variant of the geodesic integral commutes (best residual {best:e})")]
    NoCommutingVariant { best: f64 },
    #[error("initial state is off the energy level: |H - h| = {0:e}")]
    OffEnergyLevel(f64),
    #[error("conformal density h - V = {0} is not positive (internal error)")]
    NonPositiveDensity(f64),
    #[error("integration failed during the correspondence run: {0}")]
    Integration(String),
}

// ---------------------------------------------------------------------------
// Metric profiles and curvature
// ---------------------------------------------------------------------------

/// A surface-of-revolution metric ds² = dθ² + f(θ)²dφ², optionally rescaled
/// by a conformal factor ρ(θ, φ).
#[derive(Debug, Clone, Copy, Serialize)]
pub enum MetricProfile {
    /// Unit sphere, f = sinθ.
    Round,
    /// Kinetic metric of the cubic-integral family: f = 1/√C(cosθ).
    NewSystem { s: f64 },
    /// Kinetic metric of the reduced Goryachev-Chaplygin family:
    /// f² = 1/(1/sin²θ + 3).
    GoryachevChaplygin,
    /// Maupertuis rescaling (h − V)·(new-system metric).
    GeodesicMaupertuis { params: Params, h: f64 },
    /// Maupertuis rescaling (h₁ − V₁)·(Goryachev-Chaplygin metric).
    GcGeodesic { gc: GCParams },
}

impl MetricProfile {
    pub fn tag(&self) -> &'static str {
        match self {
            MetricProfile::Round => "round",
            MetricProfile::NewSystem { .. } => "new-system",
            MetricProfile::GoryachevChaplygin => "goryachev-chaplygin",
            MetricProfile::GeodesicMaupertuis { .. } => "geodesic-maupertuis",
            MetricProfile::GcGeodesic { .. } => "gc-geodesic",
        }
    }

    /// Base profile f(θ) of the underlying ds² = dθ² + f²dφ².
    pub fn profile_f<T: Real>(&self, theta: T) -> T {
        match self {
            MetricProfile::Round => theta.sin(),
            MetricProfile::NewSystem { s } | MetricProfile::GeodesicMaupertuis {
                params: Params { s, .. },
                ..
            } => model::kinetic_c(theta.cos(), T::from_f64(*s)).sqrt().recip(),
            MetricProfile::GoryachevChaplygin | MetricProfile::GcGeodesic { .. } => {
                let sin2 = theta.sin() * theta.sin();
                (sin2.recip() + T::from_f64(3.0)).sqrt().recip()
            }
        }
    }

    /// Conformal factor ρ(θ, φ); identically 1 for the bare kinetic metrics.
    pub fn conformal_rho<T: Real>(&self, theta: T, phi: T) -> T {
        match self {
            MetricProfile::Round
            | MetricProfile::NewSystem { .. }
            | MetricProfile::GoryachevChaplygin => T::one(),
            MetricProfile::GeodesicMaupertuis { params, h } => {
                let v = model::potential_spherical(theta, phi, params)
                    .expect("curvature grids stay interior");
                T::from_f64(*h) - v
            }
            MetricProfile::GcGeodesic { gc } => {
                T::from_f64(gc.h1) - T::from_f64(gc.a1) * theta.sin() * phi.sin()
            }
        }
    }

    pub fn has_conformal_factor(&self) -> bool {
        matches!(
            self,
            MetricProfile::GeodesicMaupertuis { .. } | MetricProfile::GcGeodesic { .. }
        )
    }
}

type Jet = Dual<Dual<f64, 1>, 1>;

/// Seeds θ for exact second derivatives: value, d/dθ, d²/dθ².
fn jet_variable(x: f64) -> Jet {
    Dual {
        re: Dual::variable(x, 0),
        eps: [Dual::one()],
    }
}

fn jet_parts(j: Jet) -> (f64, f64, f64) {
    (j.re.re, j.re.eps[0], j.eps[0].eps[0])
}

/// Gaussian curvature of the metric at (θ, φ).
///
/// For ρ ≡ 1 profiles this is κ₀ = −f″/f; for conformal rescalings
/// κ = (κ₀ − ½Δ₀ ln ρ)/ρ with Δ₀ the Laplace-Beltrami operator of the base
/// metric. All derivatives come from nested duals.
pub fn curvature_at(metric: &MetricProfile, theta: f64, phi: f64) -> f64 {
    let (f, f1, f2) = jet_parts(metric.profile_f(jet_variable(theta)));
    let kappa0 = -f2 / f;
    if !metric.has_conformal_factor() {
        return kappa0;
    }
    let rho = metric.conformal_rho(theta, phi);
    // ln ρ derivatives in θ and in φ (two univariate nested-dual passes).
    let (_, lt1, lt2) = jet_parts(
        metric
            .conformal_rho(jet_variable(theta), Jet::from_f64(phi))
            .ln(),
    );
    let (_, _, lp2) = jet_parts(
        metric
            .conformal_rho(Jet::from_f64(theta), jet_variable(phi))
            .ln(),
    );
    let laplace = lt2 + (f1 / f) * lt1 + lp2 / (f * f);
    (kappa0 - 0.5 * laplace) / rho
}

/// Stencil fallback for [`curvature_at`]: the same Laplacian formula with
/// all derivatives from Richardson-extrapolated central differences at
/// step 1e−4. Kept as the independent second path to the dual-number route.
pub fn curvature_at_stencil(metric: &MetricProfile, theta: f64, phi: f64) -> f64 {
    let h = 1e-4;
    // Richardson-extrapolated first and second central differences.
    let d1 = |f: &dyn Fn(f64) -> f64, x: f64| -> f64 {
        let coarse = (f(x + 2.0 * h) - f(x - 2.0 * h)) / (4.0 * h);
        let fine = (f(x + h) - f(x - h)) / (2.0 * h);
        (4.0 * fine - coarse) / 3.0
    };
    let d2 = |f: &dyn Fn(f64) -> f64, x: f64| -> f64 {
        let coarse = (f(x + 2.0 * h) - 2.0 * f(x) + f(x - 2.0 * h)) / (4.0 * h * h);
        let fine = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (4.0 * fine - coarse) / 3.0
    };
    let fp = |t: f64| metric.profile_f(t);
    let f = fp(theta);
    let kappa0 = -d2(&fp, theta) / f;
    if !metric.has_conformal_factor() {
        return kappa0;
    }
    let rho = metric.conformal_rho(theta, phi);
    let ln_rho_t = |t: f64| metric.conformal_rho(t, phi).ln();
    let ln_rho_p = |p: f64| metric.conformal_rho(theta, p).ln();
    let laplace =
        d2(&ln_rho_t, theta) + (d1(&fp, theta) / f) * d1(&ln_rho_t, theta) + d2(&ln_rho_p, phi) / (f * f);
    (kappa0 - 0.5 * laplace) / rho
}

/// κ on a θ-grid. For metrics with a φ-dependent conformal factor the value
/// reported per θ is the mean over a 16-point φ grid (the profile claim is
/// only asserted for the bare ρ ≡ 1 metrics).
pub fn curvature_profile(
    metric: &MetricProfile,
    thetas: &[f64],
) -> Result<Vec<f64>, GeometryError> {
    for &t in thetas {
        if !(t > 0.0 && t < std::f64::consts::PI) {
            return Err(GeometryError::GridTouchesPole(t));
        }
    }
    let phi_dependent = metric.has_conformal_factor();
    Ok(thetas
        .iter()
        .map(|&t| {
            if phi_dependent {
                let n = 16;
                (0..n)
                    .map(|k| curvature_at(metric, t, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                    .sum::<f64>()
                    / n as f64
            } else {
                curvature_at(metric, t, 0.0)
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Positivity
// ---------------------------------------------------------------------------

/// Grid minima backing the positive-definiteness of the kinetic form.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub s: f64,
    pub grid_points: usize,
    pub min_r: f64,
    pub argmin_r_z: f64,
    /// min over the grid of C(z)·(1−z²)·W(z)², the independent quotient
    /// route to R.
    pub min_c_quotient: f64,
    /// max |C·(1−z²)W² − R| over the grid.
    pub max_quotient_residual: f64,
    /// min eigenvalue of the 2×2 kinetic form over spherical and pole grids.
    pub min_kinetic_eigenvalue: f64,
    pub r_at_minus_one: f64,
    pub r_endpoint_expected: f64,
}

/// Verifies R > 0, the C-quotient identity, and kinetic-form positivity on
/// grids for one s > 1.
pub fn positivity_check(s: f64, n_grid: usize) -> Result<PositivityReport, GeometryError> {
    if !(s > 1.0) {
        return Err(GeometryError::ShapeParameter(s));
    }
    let n = n_grid.max(8);
    let mut min_r = f64::INFINITY;
    let mut argmin_r_z = f64::NAN;
    let mut min_c_quotient = f64::INFINITY;
    let mut max_quotient_residual: f64 = 0.0;
    for i in 1..n {
        let z = -1.0 + 2.0 * i as f64 / n as f64;
        let r = model::r(z, s);
        if r < min_r {
            min_r = r;
            argmin_r_z = z;
        }
        let quotient = model::kinetic_c(z, s) * (1.0 - z * z) * model::w(z, s) * model::w(z, s);
        min_c_quotient = min_c_quotient.min(quotient);
        max_quotient_residual = max_quotient_residual.max((quotient - r).abs());
    }

    let mut min_eig = f64::INFINITY;
    let grid = 200;
    for i in 1..grid {
        let theta = std::f64::consts::PI * i as f64 / grid as f64;
        let m = charts::kinetic_quadratic_form_spherical(theta, s);
        min_eig = min_eig.min(charts::symmetric_eigenvalues(m)[0]);
    }
    for hemi in [Hemisphere::North, Hemisphere::South] {
        for i in 0..grid {
            let radius = 0.6 * i as f64 / grid as f64;
            for j in 0..8 {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                let m = charts::kinetic_quadratic_form_pole(
                    radius * ang.cos(),
                    radius * ang.sin(),
                    hemi,
                    s,
                );
                min_eig = min_eig.min(charts::symmetric_eigenvalues(m)[0]);
            }
        }
    }

    Ok(PositivityReport {
        s,
        grid_points: n,
        min_r,
        argmin_r_z,
        min_c_quotient,
        max_quotient_residual,
        min_kinetic_eigenvalue: min_eig,
        r_at_minus_one: model::r(-1.0, s),
        r_endpoint_expected: (s - 1.0) * (s - 1.0),
    })
}

/// Diagnostic probe without the s > 1 gate: returns the first grid z where
/// the kinetic profile degenerates, R(z) ≤ 0 or W(z) ≤ 0 (for s < 1 the
/// shift W changes sign inside [−1, 1], killing √W and the C quotient; R
/// itself only touches zero, its interior critical value being ¼(s²−1)²).
pub fn positivity_probe(s: f64, n_grid: usize) -> Option<(f64, f64)> {
    let n = n_grid.max(8);
    for i in 1..n {
        let z = -1.0 + 2.0 * i as f64 / n as f64;
        let r = model::r(z, s);
        let w = model::w(z, s);
        if r <= 0.0 || w <= 0.0 {
            return Some((z, r.min(w)));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Potential maximum
// ---------------------------------------------------------------------------

/// Location and value of the global maximum of V over the sphere.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaxPotential {
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
}

fn potential_on_sphere(theta: f64, phi: f64, params: &Params) -> f64 {
    let (sin_t, cos_t) = theta.sin_cos();
    model::potential_global(-sin_t * phi.cos(), -sin_t * phi.sin(), cos_t, params)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..90 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    0.5 * (a + b)
}

/// Global maximum of V over S²: 721×1440 coarse grid, then coordinate-wise
/// golden-section refinement. The refined value is clamped to be no smaller
/// than the best grid sample.
pub fn max_potential(params: &Params) -> MaxPotential {
    let (n_theta, n_phi) = (721usize, 1440usize);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=n_theta {
        let theta = std::f64::consts::PI * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let v = potential_on_sphere(theta, phi, params);
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let d_theta = std::f64::consts::PI / n_theta as f64;
    let d_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let (mut value, mut theta, mut phi) = best;
    for _ in 0..4 {
        theta = golden_max(
            |t| potential_on_sphere(t, phi, params),
            (theta - d_theta).max(0.0),
            (theta + d_theta).min(std::f64::consts::PI),
        );
        phi = golden_max(|p| potential_on_sphere(theta, p, params), phi - d_phi, phi + d_phi);
        value = potential_on_sphere(theta, phi, params);
    }
    if value < best.0 {
        (value, theta, phi) = best;
    }
    MaxPotential { value, theta, phi }
}

// ---------------------------------------------------------------------------
// Maupertuis system and sign resolution
// ---------------------------------------------------------------------------

/// One sign/leading-term combination of the geodesic integral closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VariantKey {
    /// Leading term uses H_geod (true) or the base Hamiltonian H (false).
    pub lead_geodesic: bool,
    /// Sign of the cubic p_φ³ term.
    pub cubic_sign: i8,
    /// Common sign of the paired ±2V p_φ terms.
    pub v_terms_sign: i8,
}

impl VariantKey {
    pub fn all() -> Vec<VariantKey> {
        let mut out = Vec::with_capacity(8);
        for lead_geodesic in [false, true] {
            for cubic_sign in [1i8, -1] {
                for v_terms_sign in [1i8, -1] {
                    out.push(VariantKey {
                        lead_geodesic,
                        cubic_sign,
                        v_terms_sign,
                    });
                }
            }
        }
        out
    }
}

/// Residual-table entry of the sign-resolution protocol.
#[derive(Debug, Clone, Serialize)]
pub struct VariantResidual {
    pub variant: VariantKey,
    pub max_scaled_residual: f64,
    pub passes: bool,
}

/// Outcome of the sign-resolution protocol: the winning variant with the
/// residual table for all candidates.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionRecord {
    pub resolved: VariantKey,
    pub table: Vec<VariantResidual>,
    pub states_tested: usize,
    pub tolerance: f64,
    /// Number of variants under tolerance (1 generically; larger when A = 0
    /// collapses the A-terms).
    pub passing: usize,
}

/// Runs the bracket test for every variant and picks the winner.
/// `preferred` breaks ties when several variants pass (degenerate A = 0).
pub(crate) fn resolve_sign_variants<H, F>(
    h_obs: &H,
    variants: &[(VariantKey, F)],
    states: &[[f64; 4]],
    tol: f64,
    preferred: VariantKey,
) -> Result<ResolutionRecord, GeometryError>
where
    H: Observable<4>,
    F: Observable<4>,
{
    let mut table = Vec::with_capacity(variants.len());
    for (key, f_obs) in variants {
        let max_res = states
            .iter()
            .map(|&x| bracket::scaled_canonical_residual(h_obs, f_obs, x))
            .fold(0.0, f64::max);
        table.push(VariantResidual {
            variant: *key,
            max_scaled_residual: max_res,
            passes: max_res <= tol,
        });
    }
    let passing: Vec<&VariantResidual> = table.iter().filter(|v| v.passes).collect();
    let resolved = match passing.len() {
        0 => {
            let best = table
                .iter()
                .map(|v| v.max_scaled_residual)
                .fold(f64::INFINITY, f64::min);
            return Err(GeometryError::NoCommutingVariant { best });
        }
        1 => passing[0].variant,
        _ => {
            if passing.iter().any(|v| v.variant == preferred) {
                preferred
            } else {
                passing[0].variant
            }
        }
    };
    Ok(ResolutionRecord {
        resolved,
        states_tested: states.len(),
        tolerance: tol,
        passing: passing.len(),
        table,
    })
}

/// The geodesic-flow system at energy parameter h: H_geod = K/(h − V) with
/// the sign-resolved degree-3 integral F_geod.
#[derive(Debug, Clone, Serialize)]
pub struct MaupertuisSystem {
    pub params: Params,
    pub h: f64,
    pub max_v: f64,
    pub resolution: ResolutionRecord,
}

/// H_geod on spherical coordinates.
pub fn h_geod_spherical_coords<T: Real>(x: [T; 4], params: &Params, h: f64) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    let k = charts::kinetic_spherical(theta, p_theta, p_phi, T::from_f64(params.s));
    let v = model::potential_spherical(theta, phi, params).expect("interior theta");
    k / (T::from_f64(h) - v)
}

/// H_geod on pole-chart coordinates.
pub fn h_geod_pole_coords<T: Real>(x: [T; 4], hemisphere: Hemisphere, params: &Params, h: f64) -> T {
    let k = charts::kinetic_pole_coords(x, hemisphere, T::from_f64(params.s));
    let z = {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let root = (T::one() - r2).sqrt();
        match hemisphere {
            Hemisphere::North => root,
            Hemisphere::South => -root,
        }
    };
    let v = model::potential_global(x[0], x[1], z, params);
    k / (T::from_f64(h) - v)
}

/// F_geod variant on spherical coordinates:
/// 2·lead·p_φ + σ₁ p_φ³ + σ₂(−2V p_φ + 2V p_φ H_geod) + H_geod·(A-terms).
pub fn f_geod_spherical_coords<T: Real>(
    x: [T; 4],
    params: &Params,
    h: f64,
    variant: VariantKey,
) -> T {
    let [theta, phi, p_theta, p_phi] = x;
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let z = theta.cos();
    let w = model::w(z, s);
    let k = charts::kinetic_spherical(theta, p_theta, p_phi, s);
    let v = model::potential_spherical(theta, phi, params).expect("interior theta");
    let h_geod = k / (T::from_f64(h) - v);
    let lead = if variant.lead_geodesic { h_geod } else { k + v };
    let a_terms = a * phi.cos() * model::q(z, s) / (w.sqrt() * theta.sin()) * p_phi
        + T::from_f64(2.0) * a * phi.sin() * w.sqrt() * p_theta;
    let two = T::from_f64(2.0);
    two * lead * p_phi
        + T::from_f64(variant.cubic_sign as f64) * p_phi * p_phi * p_phi
        + T::from_f64(variant.v_terms_sign as f64) * (two * v * p_phi * (h_geod - T::one()))
        + h_geod * a_terms
}

/// F_geod variant on pole-chart coordinates (A-terms through the
/// pole-regular global short form).
pub fn f_geod_pole_coords<T: Real>(
    x: [T; 4],
    hemisphere: Hemisphere,
    params: &Params,
    h: f64,
    variant: VariantKey,
) -> T {
    let [xq, yq, p_x, p_y] = x;
    let s = T::from_f64(params.s);
    let a = T::from_f64(params.a);
    let z = {
        let root = (T::one() - xq * xq - yq * yq).sqrt();
        match hemisphere {
            Hemisphere::North => root,
            Hemisphere::South => -root,
        }
    };
    let w = model::w(z, s);
    let p_phi = xq * p_y - yq * p_x;
    let k = charts::kinetic_pole_coords(x, hemisphere, s);
    let v = model::potential_global(xq, yq, z, params);
    let h_geod = k / (T::from_f64(h) - v);
    let lead = if variant.lead_geodesic { h_geod } else { k + v };
    let a_terms = a / w.sqrt() * (xq * p_phi - T::from_f64(2.0) * w * z * p_y);
    let two = T::from_f64(2.0);
    two * lead * p_phi
        + T::from_f64(variant.cubic_sign as f64) * p_phi * p_phi * p_phi
        + T::from_f64(variant.v_terms_sign as f64) * (two * v * p_phi * (h_geod - T::one()))
        + h_geod * a_terms
}

/// Observable wrapper for H_geod on the spherical chart.
pub struct GeodesicHamiltonian {
    pub params: Params,
    pub h: f64,
}

impl Observable<4> for GeodesicHamiltonian {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        h_geod_spherical_coords(x, &self.params, self.h)
    }
}

/// Observable wrapper for one F_geod variant on the spherical chart.
pub struct GeodesicIntegralVariant {
    pub params: Params,
    pub h: f64,
    pub variant: VariantKey,
}

impl Observable<4> for GeodesicIntegralVariant {
    fn eval<T: Real>(&self, x: [T; 4]) -> T {
        f_geod_spherical_coords(x, &self.params, self.h, self.variant)
    }
}

pub const VARIANT_RESOLUTION_TOL: f64 = 1e-9;
pub const VARIANT_RESOLUTION_STATES: usize = 1000;

/// The variant that the homogenized Maupertuis construction derives:
/// base-H leading term, negative cubic, direct V-pair signs.
pub const DERIVED_VARIANT: VariantKey = VariantKey {
    lead_geodesic: false,
    cubic_sign: -1,
    v_terms_sign: 1,
};

pub(crate) fn resolution_states(seed: u64, n: usize) -> Vec<[f64; 4]> {
    let mut rng = sampling::rng(seed);
    (0..n)
        .map(|_| sampling::random_spherical_state(&mut rng, 0.15, 1.5).coords())
        .collect()
}

/// Builds the geodesic system at energy h: checks h > max V, runs the
/// sign-resolution protocol, and returns the system with the residual table.
pub fn maupertuis_system(
    params: &Params,
    h: f64,
    seed: u64,
) -> Result<MaupertuisSystem, GeometryError> {
    let max_v = max_potential(params).value;
    if !(h > max_v) {
        return Err(GeometryError::HBelowPotentialMax { h, max_v });
    }
    let h_obs = GeodesicHamiltonian { params: *params, h };
    let variants: Vec<(VariantKey, GeodesicIntegralVariant)> = VariantKey::all()
        .into_iter()
        .map(|variant| {
            (
                variant,
                GeodesicIntegralVariant {
                    params: *params,
                    h,
                    variant,
                },
            )
        })
        .collect();
    let states = resolution_states(seed, VARIANT_RESOLUTION_STATES);
    let resolution = resolve_sign_variants(
        &h_obs,
        &variants,
        &states,
        VARIANT_RESOLUTION_TOL,
        DERIVED_VARIANT,
    )?;
    Ok(MaupertuisSystem {
        params: *params,
        h,
        max_v,
        resolution,
    })
}

impl MaupertuisSystem {
    pub fn h_geod(&self, state: &charts::SphericalState<f64>) -> f64 {
        h_geod_spherical_coords(state.coords(), &self.params, self.h)
    }

    /// Resolved F_geod.
    pub fn f_geod(&self, state: &charts::SphericalState<f64>) -> f64 {
        f_geod_spherical_coords(state.coords(), &self.params, self.h, self.resolution.resolved)
    }

    pub fn f_geod_at(&self, point: &ChartPoint) -> f64 {
        match point {
            ChartPoint::Spherical(s) => {
                f_geod_spherical_coords(s.coords(), &self.params, self.h, self.resolution.resolved)
            }
            ChartPoint::Pole(p) => f_geod_pole_coords(
                p.coords(),
                p.hemisphere,
                &self.params,
                self.h,
                self.resolution.resolved,
            ),
        }
    }

    pub fn metric(&self) -> MetricProfile {
        MetricProfile::GeodesicMaupertuis {
            params: self.params,
            h: self.h,
        }
    }
}

// ---------------------------------------------------------------------------
// Geodesic correspondence
// ---------------------------------------------------------------------------

/// Residuals of the Maupertuis correspondence along one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceReport {
    /// Max over samples of the scaled defect of the reparametrized H-flow
    /// against the Hamiltonian (first-order geodesic) equations of H_geod.
    pub max_geodesic_residual: f64,
    /// Max relative drift of the resolved F_geod along the curve.
    pub max_f_geod_drift: f64,
    pub samples: usize,
}

fn geodesic_field_at(point: &ChartPoint, params: &Params, h: f64) -> [f64; 4] {
    match point {
        ChartPoint::Spherical(s) => bracket::canonical_field(
            &GeodesicHamiltonian { params: *params, h },
            s.coords(),
        ),
        ChartPoint::Pole(p) => {
            struct PoleGeod {
                params: Params,
                h: f64,
                hemisphere: Hemisphere,
            }
            impl Observable<4> for PoleGeod {
                fn eval<T: Real>(&self, x: [T; 4]) -> T {
                    h_geod_pole_coords(x, self.hemisphere, &self.params, self.h)
                }
            }
            bracket::canonical_field(
                &PoleGeod {
                    params: *params,
                    h,
                    hemisphere: p.hemisphere,
                },
                p.coords(),
            )
        }
    }
}

fn base_field_at(point: &ChartPoint, params: &Params) -> [f64; 4] {
    match point {
        ChartPoint::Spherical(s) => {
            bracket::canonical_field(&bracket::SphericalHamiltonian(*params), s.coords())
        }
        ChartPoint::Pole(p) => bracket::canonical_field(
            &bracket::PoleHamiltonian(*params, p.hemisphere),
            p.coords(),
        ),
    }
}

fn potential_at(point: &ChartPoint, params: &Params) -> f64 {
    match point {
        ChartPoint::Spherical(s) => {
            model::potential_spherical(s.theta, s.phi, params).expect("interior theta")
        }
        ChartPoint::Pole(p) => model::potential_global(p.x, p.y, p.z(), params),
    }
}

/// Integrates the H-flow on the level H = h and verifies pointwise that the
/// time-rescaled phase curve (dτ = (h − V)dt, momenta unchanged) solves
/// Hamilton's equations of H_geod (the geodesic equations of the conformal
/// metric in first-order form) and that the resolved F_geod is constant
/// along it.
pub fn geodesic_correspondence_check(
    system: &MaupertuisSystem,
    initial: &charts::SphericalState<f64>,
    config: &IntegratorConfig,
) -> Result<CorrespondenceReport, GeometryError> {
    let params = system.params;
    let h_energy = charts::hamiltonian(&charts::State::Spherical(*initial), &params);
    let off = (h_energy - system.h).abs();
    if off > 1e-10 * (1.0 + system.h.abs()) {
        return Err(GeometryError::OffEnergyLevel(off));
    }

    let n_steps = (config.t_end / config.dt).round().max(1.0) as u64;
    let stride = config.record_stride.max(1) as u64;
    let mut point = ChartPoint::Spherical(*initial);
    let f0 = system.f_geod_at(&point);
    let f_scale = f0.abs().max(1.0);
    let mut max_res: f64 = 0.0;
    let mut max_f_drift: f64 = 0.0;
    let mut samples = 0usize;

    let mut assess = |point: &ChartPoint| -> Result<(), GeometryError> {
        let v = potential_at(point, &params);
        let density = system.h - v;
        if density <= 0.0 {
            return Err(GeometryError::NonPositiveDensity(density));
        }
        let base = base_field_at(point, &params);
        let geod = geodesic_field_at(point, &params, system.h);
        for i in 0..4 {
            let defect = (base[i] / density - geod[i]).abs() / (1.0 + geod[i].abs());
            max_res = max_res.max(defect);
        }
        let f = system.f_geod_at(point);
        max_f_drift = max_f_drift.max((f - f0).abs() / f_scale);
        samples += 1;
        Ok(())
    };

    assess(&point)?;
    for k in 0..n_steps {
        point = dynamics::step_implicit_midpoint(
            &point,
            config.dt,
            &params,
            config.fixed_point_tol,
            config.max_fixed_point_iters,
        )
        .map_err(|e| GeometryError::Integration(e.to_string()))?;
        point = dynamics::reseat_chart(point, config.switch_band)
            .map_err(|e| GeometryError::Integration(e.to_string()))?;
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            assess(&point)?;
        }
    }

    Ok(CorrespondenceReport {
        max_geodesic_residual: max_res,
        max_f_geod_drift: max_f_drift,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::SphericalState;

    #[test]
    fn round_metric_curvature_is_one() {
        let grid: Vec<f64> = (1..200)
            .map(|i| std::f64::consts::PI * i as f64 / 200.0)
            .collect();
        let kappa = curvature_profile(&MetricProfile::Round, &grid).unwrap();
        for k in kappa {
            assert!((k - 1.0).abs() <= 1e-8, "round curvature {k}");
        }
    }

    #[test]
    fn new_system_curvature_nonconstant() {
        let grid: Vec<f64> = (1..400)
            .map(|i| std::f64::consts::PI * i as f64 / 400.0)
            .collect();
        let kappa = curvature_profile(&MetricProfile::NewSystem { s: 2.0 }, &grid).unwrap();
        let max = kappa.iter().cloned().fold(f64::MIN, f64::max);
        let min = kappa.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min > 0.01, "curvature range {min}..{max}");
    }

    #[test]
    fn profile_curvature_is_phi_independent() {
        // Level lines of κ are {θ = const} for the bare kinetic metrics.
        for metric in [
            MetricProfile::Round,
            MetricProfile::NewSystem { s: 1.7 },
            MetricProfile::GoryachevChaplygin,
        ] {
            for i in 1..20 {
                let theta = std::f64::consts::PI * i as f64 / 20.0;
                let k0 = curvature_at(&metric, theta, 0.0);
                for phi in [0.9, 2.4, 5.1] {
                    assert_eq!(curvature_at(&metric, theta, phi), k0);
                }
            }
        }
    }

    #[test]
    fn gc_curvature_matches_closed_form() {
        // κ(θ) = 2(5 − 3sin²θ)/(3sin²θ + 1)² for f² = 1/(4 + cot²θ).
        for i in 1..60 {
            let theta = std::f64::consts::PI * i as f64 / 60.0;
            let kappa = curvature_at(&MetricProfile::GoryachevChaplygin, theta, 0.0);
            let s2 = theta.sin().powi(2);
            let expected = 2.0 * (5.0 - 3.0 * s2) / (3.0 * s2 + 1.0).powi(2);
            assert!(
                (kappa - expected).abs() <= 1e-10 * (1.0 + expected.abs()),
                "theta {theta}: {kappa} vs {expected}"
            );
        }
        // Fixed point: κ(π/3) = 88/169.
        let k = curvature_at(&MetricProfile::GoryachevChaplygin, std::f64::consts::FRAC_PI_3, 0.0);
        assert!((k - 88.0 / 169.0).abs() < 1e-12);
    }

    #[test]
    fn gc_curvature_matches_stencil_oracle() {
        // Independent five-point finite-difference oracle for −f″/f.
        let f = |t: f64| (1.0 / (t.sin().powi(-2) + 3.0)).sqrt();
        let h = 1e-4;
        for i in 2..58 {
            let t = std::f64::consts::PI * i as f64 / 60.0;
            let second = (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t)
                + 16.0 * f(t - h)
                - f(t - 2.0 * h))
                / (12.0 * h * h);
            let oracle = -second / f(t);
            let kappa = curvature_at(&MetricProfile::GoryachevChaplygin, t, 0.0);
            assert!((kappa - oracle).abs() <= 1e-6, "theta {t}: {kappa} vs {oracle}");
        }
    }

    #[test]
    fn curvature_grid_validation() {
        assert!(curvature_profile(&MetricProfile::Round, &[0.0]).is_err());
        assert!(curvature_profile(&MetricProfile::Round, &[std::f64::consts::PI]).is_err());
    }

    #[test]
    fn conformal_curvature_dual_and_stencil_paths_agree() {
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let metrics = [
            MetricProfile::GeodesicMaupertuis { params, h: 3.0 },
            MetricProfile::GcGeodesic {
                gc: crate::gc::GCParams::new(1.0, 2.5).unwrap(),
            },
        ];
        for metric in metrics {
            for i in 1..24 {
                let theta = std::f64::consts::PI * i as f64 / 24.0;
                for phi in [0.0, 1.1, 2.9, 4.4] {
                    let dual = curvature_at(&metric, theta, phi);
                    let stencil = curvature_at_stencil(&metric, theta, phi);
                    assert!(
                        (dual - stencil).abs() <= 1e-6 * (1.0 + dual.abs()),
                        "{} at ({theta}, {phi}): dual {dual} stencil {stencil}",
                        metric.tag()
                    );
                }
            }
        }
    }

    #[test]
    fn constant_conformal_factor_scales_curvature() {
        // With A = c = 0 the factor h − V is the constant h, and the
        // conformal rescaling law reduces to κ = κ₀/h.
        let params = Params::new(0.0, 0.0, 1.7).unwrap();
        let scaled = MetricProfile::GeodesicMaupertuis { params, h: 2.2 };
        let base = MetricProfile::NewSystem { s: 1.7 };
        for i in 1..30 {
            let theta = std::f64::consts::PI * i as f64 / 30.0;
            let expected = curvature_at(&base, theta, 0.0) / 2.2;
            let got = curvature_at(&scaled, theta, 0.3);
            assert!((got - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn positivity_reports() {
        for s in [1.0001, 1.5, 2.0, 9.5] {
            let report = positivity_check(s, 10_000).unwrap();
            assert!(report.min_r > 0.0, "s = {s}: min R {}", report.min_r);
            assert!(report.min_c_quotient > 0.0);
            assert!(report.min_kinetic_eigenvalue > 0.0);
            assert!(
                (report.r_at_minus_one - report.r_endpoint_expected).abs() <= 1e-12,
                "endpoint {} vs {}",
                report.r_at_minus_one,
                report.r_endpoint_expected
            );
            assert!(report.max_quotient_residual <= 1e-10 * (1.0 + s * s));
        }
        assert!(positivity_check(1.0, 100).is_err());
    }

    #[test]
    fn near_degenerate_s_pinches_at_the_endpoint() {
        // For s barely above 1 the minimum of R sits next to z = −1 and is
        // tiny, consistent with the endpoint value (s−1)².
        let s = 1.0001;
        let report = positivity_check(s, 10_000).unwrap();
        assert!(report.min_r > 0.0);
        assert!(report.min_r < 1e-4, "min R {} not small", report.min_r);
        assert!(
            report.argmin_r_z < -0.99,
            "R minimum at z = {}",
            report.argmin_r_z
        );
        assert!((report.r_at_minus_one - (s - 1.0) * (s - 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn positivity_probe_finds_violations_below_one() {
        // s = 0.5 violates R > 0 somewhere in (−1, 1).
        assert!(positivity_probe(0.5, 10_000).is_some());
        assert!(positivity_probe(2.0, 10_000).is_none());
    }

    #[test]
    fn r_monotone_on_interior() {
        let s = 1.7;
        let n = 10_000;
        let mut prev = model::r(-1.0, s);
        for i in 1..n {
            let z = -1.0 + 2.0 * i as f64 / n as f64;
            let r = model::r(z, s);
            assert!(r >= prev - 1e-12, "R not nondecreasing at z = {z}");
            prev = r;
        }
    }

    #[test]
    fn max_potential_closed_forms() {
        // A = 0, c > 0: max at z = −1 with value c/(s−1).
        let p = Params::new(0.0, 0.5, 2.0).unwrap();
        let m = max_potential(&p);
        assert!((m.value - 0.5).abs() <= 1e-10);
        assert!((m.theta - std::f64::consts::PI).abs() <= 1e-4);

        // A = 0, c < 0: max at z = +1 with value c/(s+1).
        let p = Params::new(0.0, -0.6, 2.0).unwrap();
        let m = max_potential(&p);
        assert!((m.value + 0.2).abs() <= 1e-10);
        assert!(m.theta <= 1e-4);

        // A = 1, c = 0, s = 2: max V = √3 − 1 at cosθ = √3 − 2, φ = 0.
        let p = Params::new(1.0, 0.0, 2.0).unwrap();
        let m = max_potential(&p);
        let expected = 3.0_f64.sqrt() - 1.0;
        assert!((m.value - expected).abs() <= 1e-10, "max {} vs {}", m.value, expected);
        assert!((m.theta - (3.0_f64.sqrt() - 2.0).acos()).abs() <= 1e-5);
        assert!(m.phi.abs() <= 1e-5 || (m.phi - 2.0 * std::f64::consts::PI).abs() <= 1e-5);
    }

    #[test]
    fn max_potential_refinement_dominates_grid_via_oned_oracle() {
        // 1-D golden-section oracle along φ = 0 for A > 0, c = 0.
        let p = Params::new(1.0, 0.0, 2.0).unwrap();
        let m = max_potential(&p);
        let oracle = golden_max(
            |t| t.sin() / (t.cos() + 2.0).sqrt(),
            0.1,
            std::f64::consts::PI - 0.1,
        );
        let v_oracle = oracle.sin() / (oracle.cos() + 2.0).sqrt();
        assert!((m.value - v_oracle).abs() <= 1e-10);
    }

    #[test]
    fn maupertuis_resolution_unique_at_generic_params() {
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let max_v = 3.0_f64.sqrt() - 1.0;
        let system = maupertuis_system(&params, 2.0 * max_v, 42).unwrap();
        assert_eq!(system.resolution.passing, 1);
        assert_eq!(system.resolution.resolved, DERIVED_VARIANT);
        // The positive-cubic variant must fail decisively.
        let positive_cubic = system
            .resolution
            .table
            .iter()
            .find(|v| {
                v.variant
                    == VariantKey {
                        lead_geodesic: false,
                        cubic_sign: 1,
                        v_terms_sign: 1,
                    }
            })
            .unwrap();
        assert!(!positive_cubic.passes);
        assert!(positive_cubic.max_scaled_residual > 1e-3);
    }

    #[test]
    fn maupertuis_rejects_exactly_h_at_or_below_max() {
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let max_v = max_potential(&params).value;
        assert!(matches!(
            maupertuis_system(&params, 0.5, 42),
            Err(GeometryError::HBelowPotentialMax { .. })
        ));
        // The bound is strict at the computed maximum itself.
        assert!(matches!(
            maupertuis_system(&params, max_v, 42),
            Err(GeometryError::HBelowPotentialMax { .. })
        ));
        assert!(maupertuis_system(&params, max_v * 1.001, 42).is_ok());
    }

    #[test]
    fn resolved_f_geod_is_momentum_degree_three() {
        // F_geod(λp) = λ³ F_geod(p): the resolved integral is homogeneous of
        // degree 3 in the momenta.
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let system = maupertuis_system(&params, 2.0 * (3.0_f64.sqrt() - 1.0), 42).unwrap();
        let st = SphericalState::new(1.2, 0.8, 0.4, -0.7).unwrap();
        let f1 = system.f_geod(&st);
        for lambda in [2.0, 0.5, -3.0] {
            let scaled = SphericalState::new(
                st.theta,
                st.phi,
                lambda * st.p_theta,
                lambda * st.p_phi,
            )
            .unwrap();
            let f_scaled = system.f_geod(&scaled);
            assert!(
                (f_scaled - lambda.powi(3) * f1).abs() <= 1e-12 * (1.0 + f1.abs()),
                "lambda {lambda}: {f_scaled} vs {}",
                lambda.powi(3) * f1
            );
        }
    }

    #[test]
    fn maupertuis_free_case_reduces_to_scaled_kinetic() {
        // A = c = 0: H_geod = K/h and several variants commute; the
        // canonical derived variant is chosen and recorded as degenerate.
        let params = Params::new(0.0, 0.0, 2.0).unwrap();
        let system = maupertuis_system(&params, 1.5, 42).unwrap();
        assert!(system.resolution.passing > 1);
        assert_eq!(system.resolution.resolved, DERIVED_VARIANT);
        let st = SphericalState::new(1.1, 0.4, 0.3, 0.8).unwrap();
        let k = charts::kinetic_spherical(st.theta, st.p_theta, st.p_phi, 2.0);
        assert!((system.h_geod(&st) - k / 1.5).abs() <= 1e-14);
    }

    #[test]
    fn metric11_conformal_factor_fixture() {
        // At θ = π/2, φ = π/2 the A-term vanishes (cosφ = 0), so with c = 0
        // the conformal factor is h − V = h.
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let metric = MetricProfile::GeodesicMaupertuis { params, h: 3.0 };
        let rho = metric.conformal_rho(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        assert!((rho - 3.0).abs() <= 1e-14);
    }

    #[test]
    fn correspondence_free_case() {
        // A = c = 0: V = 0, the reparametrization is linear, residual tiny.
        let params = Params::new(0.0, 0.0, 2.0).unwrap();
        let st = SphericalState::new(1.1, 0.2, 0.4, 0.6).unwrap();
        let h = charts::hamiltonian(&charts::State::Spherical(st), &params);
        let system = maupertuis_system(&params, h, 42).unwrap();
        let config = IntegratorConfig {
            dt: 2e-4,
            t_end: 10.0,
            record_stride: 50,
            ..Default::default()
        };
        let report = geodesic_correspondence_check(&system, &st, &config).unwrap();
        assert!(report.max_geodesic_residual <= 1e-8, "{report:?}");
        assert!(report.max_f_geod_drift <= 1e-7, "{report:?}");
    }

    #[test]
    fn correspondence_generic_and_h_doubling() {
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let max_v = 3.0_f64.sqrt() - 1.0;
        let config = IntegratorConfig {
            dt: 2e-4,
            t_end: 20.0,
            record_stride: 100,
            ..Default::default()
        };
        let mut residuals = Vec::new();
        for h in [2.0 * max_v, 4.0 * max_v] {
            let system = maupertuis_system(&params, h, 42).unwrap();
            // Seed on the energy level: solve p_φ from the level equation.
            let (theta, phi, p_theta) = (1.2, 0.7, 0.3);
            let roots =
                dynamics::solve_momentum_on_energy(theta, p_theta, phi, h, &params).roots();
            let p_phi = roots[roots.len() - 1];
            let st = SphericalState::new(theta, phi, p_theta, p_phi).unwrap();
            let report = geodesic_correspondence_check(&system, &st, &config).unwrap();
            assert!(
                report.max_geodesic_residual <= 1e-6,
                "h = {h}: {report:?}"
            );
            assert!(report.max_f_geod_drift <= 1e-6, "h = {h}: {report:?}");
            residuals.push(report.max_geodesic_residual);
        }
        assert!(
            residuals[1] <= 10.0 * residuals[0].max(1e-12),
            "doubling h degraded residuals: {residuals:?}"
        );
    }

    #[test]
    fn correspondence_rejects_off_level_seed() {
        let params = Params::new(1.0, 0.0, 2.0).unwrap();
        let system = maupertuis_system(&params, 2.0, 42).unwrap();
        let st = SphericalState::new(1.2, 0.7, 0.3, 0.2).unwrap();
        assert!(matches!(
            geodesic_correspondence_check(&system, &st, &IntegratorConfig::default()),
            Err(GeometryError::OffEnergyLevel(_))
        ));
    }
}
